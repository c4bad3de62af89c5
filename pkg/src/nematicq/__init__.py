"""Stable states, defect configurations, transition pathways, and
solution landscapes of the Landau-de Gennes Q-tensor model, plus the
homogeneous Maier-Saupe branch structure.

The flat five-component tensor calculus lives in ``qtensor``; ``field``
and ``energy`` discretize the square-domain free energy; ``minimize``,
``sav``, ``hisd``, and ``mep`` provide the solvers; ``maier_saupe`` and
``hedgehog`` cover the molecular model and the radial defect profile;
``fieldio`` and ``cli`` handle persistence and the command line.
"""

from .energy import LdGSystem, elastic_matrix, free_energy, gradient, metric_matrix
from .errors import (
    BudgetExceeded,
    ConfigError,
    DegeneratePath,
    LinearSolveFailure,
    NematicqError,
    NoConvergence,
    NoNematicRoots,
    NotIndexOne,
    NotStationary,
    ParseError,
    ShapeMismatch,
    SolveError,
    ValidationError,
    WrongIndex,
)
from .field import Domain, QField, seed_field, square_symmetry_orbit, symmetrize
from .fieldio import RunConfig, load_config, read_field, write_field
from .hedgehog import HedgehogProfile, ode_residual, solve_profile
from .hisd import (
    Edge,
    LandscapeGraph,
    LandscapeOptions,
    SaddleOptions,
    SaddleRecord,
    build_landscape,
    classify_stationary,
    downward_search,
    find_saddle,
    hisd_step,
    make_record,
    upward_search,
)
from .maier_saupe import (
    LeslieSet,
    MsCriticalPoint,
    critical_alpha,
    leslie_coefficients,
    order_parameters,
    ratio,
    solve_branches,
)
from .mep import MepResult, Path, find_mep, perpendicular_residual, refine_multiscale, reparametrize
from .minimize import MinimizeOptions, MinimizeResult, certify_stability, minimize
from .qtensor import (
    BulkCriticalSet,
    BulkParams,
    QTensor,
    biaxiality,
    bulk_energy,
    bulk_gradient,
    critical_points,
    eig_classify,
    frob2,
    is_physical,
    trq3,
    uniaxial_components,
)
from .sav import SavSplit, flow_to_equilibrium, sav_init, sav_split, sav_step, semi_implicit_step
from .spectrum import SpectrumReport, smallest_eigs
from .systems import System, make_rng

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded",
    "BulkCriticalSet",
    "BulkParams",
    "ConfigError",
    "DegeneratePath",
    "Domain",
    "Edge",
    "HedgehogProfile",
    "LandscapeGraph",
    "LandscapeOptions",
    "LdGSystem",
    "LeslieSet",
    "LinearSolveFailure",
    "MepResult",
    "MinimizeOptions",
    "MinimizeResult",
    "MsCriticalPoint",
    "NematicqError",
    "NoConvergence",
    "NoNematicRoots",
    "NotIndexOne",
    "NotStationary",
    "ParseError",
    "Path",
    "QField",
    "QTensor",
    "RunConfig",
    "SaddleOptions",
    "SaddleRecord",
    "SavSplit",
    "ShapeMismatch",
    "SolveError",
    "SpectrumReport",
    "System",
    "ValidationError",
    "WrongIndex",
    "biaxiality",
    "build_landscape",
    "bulk_energy",
    "bulk_gradient",
    "certify_stability",
    "classify_stationary",
    "critical_alpha",
    "critical_points",
    "downward_search",
    "eig_classify",
    "elastic_matrix",
    "find_mep",
    "find_saddle",
    "flow_to_equilibrium",
    "free_energy",
    "frob2",
    "gradient",
    "hisd_step",
    "is_physical",
    "leslie_coefficients",
    "load_config",
    "make_record",
    "make_rng",
    "metric_matrix",
    "minimize",
    "ode_residual",
    "order_parameters",
    "perpendicular_residual",
    "ratio",
    "read_field",
    "refine_multiscale",
    "reparametrize",
    "sav_init",
    "sav_split",
    "sav_step",
    "seed_field",
    "semi_implicit_step",
    "smallest_eigs",
    "solve_branches",
    "solve_profile",
    "square_symmetry_orbit",
    "symmetrize",
    "trq3",
    "uniaxial_components",
    "upward_search",
    "write_field",
]
