"""Discretized tensor fields on the unit square with Dirichlet data.

The grid holds nx x ny interior nodes; the boundary ring carries fixed
tensor values.  Interior node (i, j) sits at (x, y) = ((i+1) hx, (j+1) hy)
with hx = 1/(nx+1), hy = 1/(ny+1).  Field values are stored as an array
of shape (nx, ny, 5), component axis last; the flat vector used by the
solvers is the C-order raveling (node-major, component fastest).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np

from .errors import NoNematicRoots, ShapeMismatch
from .qtensor import BulkParams, critical_points, sym_components, to_matrix
from .systems import make_rng

__all__ = [
    "Domain",
    "QField",
    "seed_field",
    "symmetrize",
    "square_symmetry_orbit",
]


@dataclass(frozen=True, eq=False)
class Domain:
    """Immutable description of one discretized problem.

    ``boundary`` selects the Dirichlet data: "tangent" (uniaxial s_plus
    with the director along each edge, corners averaged), "planar"
    (in-plane traceless tangent data s_plus*(t t^T - I2/2) with Q33 = 0,
    vanishing exactly at the corners), "zero", or a callable
    (x, y) -> 5 components evaluated on boundary nodes.
    The one-constant elastic coefficient is normalized to 1; ``l2`` and
    ``l3`` add the optional divergence and mixed-gradient terms.

    The planar data keeps the out-of-plane component zero on the walls,
    so states whose in-plane order melts on a line (the cross state on
    the square) show genuinely small |Q| there instead of inheriting a
    uniform oblate background from the walls.
    """

    nx: int
    ny: int
    lambda2: float
    bulk: BulkParams
    l2: float = 0.0
    l3: float = 0.0
    boundary: object = "tangent"

    def __post_init__(self):
        if self.nx < 4 or self.ny < 4:
            raise ShapeMismatch(f"grid needs nx, ny >= 4, got {self.nx} x {self.ny}")
        if not (self.lambda2 > 0) or not np.isfinite(self.lambda2):
            raise ShapeMismatch(f"lambda2 must be positive, got {self.lambda2}")
        if isinstance(self.boundary, str) and self.boundary not in (
            "tangent",
            "planar",
            "zero",
        ):
            raise ShapeMismatch(f"unknown boundary kind {self.boundary!r}")

    @property
    def hx(self) -> float:
        return 1.0 / (self.nx + 1)

    @property
    def hy(self) -> float:
        return 1.0 / (self.ny + 1)

    @property
    def h(self) -> float:
        """Uniform spacing; meaningful for the square grids (nx == ny)."""
        return self.hx

    @property
    def n_dof(self) -> int:
        return 5 * self.nx * self.ny

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.nx, self.ny, 5)

    @cached_property
    def s_plus(self) -> float:
        return critical_points(self.bulk).s_plus

    @cached_property
    def xs(self) -> np.ndarray:
        """Interior node x coordinates, shape (nx,)."""
        return (np.arange(self.nx) + 1.0) * self.hx

    @cached_property
    def ys(self) -> np.ndarray:
        return (np.arange(self.ny) + 1.0) * self.hy

    @cached_property
    def ring(self) -> np.ndarray:
        """Extended frame (nx+2, ny+2, 5): boundary values, zero interior."""
        nx, ny = self.nx, self.ny
        ext = np.zeros((nx + 2, ny + 2, 5))
        if callable(self.boundary):
            xg, yg = np.meshgrid(
                np.arange(nx + 2) * self.hx,
                np.arange(ny + 2) * self.hy,
                indexing="ij",
            )
            vals = np.asarray(self.boundary(xg, yg), dtype=float)
            if vals.shape != ext.shape:
                raise ShapeMismatch(
                    f"boundary callable returned shape {vals.shape}, expected {ext.shape}"
                )
            ext[:, 0] = vals[:, 0]
            ext[:, -1] = vals[:, -1]
            ext[0, :] = vals[0, :]
            ext[-1, :] = vals[-1, :]
        elif self.boundary == "tangent":
            s = self.s_plus
            # director along x on bottom/top edges, along y on left/right
            qx = np.array([2.0 * s / 3.0, 0.0, 0.0, -s / 3.0, 0.0])
            qy = np.array([-s / 3.0, 0.0, 0.0, 2.0 * s / 3.0, 0.0])
            corner = 0.5 * (qx + qy)
            ext[1:-1, 0] = qx
            ext[1:-1, -1] = qx
            ext[0, 1:-1] = qy
            ext[-1, 1:-1] = qy
            for ij in ((0, 0), (0, -1), (-1, 0), (-1, -1)):
                ext[ij] = corner
        elif self.boundary == "planar":
            s = self.s_plus
            # in-plane traceless data: opposite edges carry opposite signs,
            # so the corner averages cancel exactly
            qx = np.array([s / 2.0, 0.0, 0.0, -s / 2.0, 0.0])
            qy = np.array([-s / 2.0, 0.0, 0.0, s / 2.0, 0.0])
            ext[1:-1, 0] = qx
            ext[1:-1, -1] = qx
            ext[0, 1:-1] = qy
            ext[-1, 1:-1] = qy
        ext.setflags(write=False)
        return ext

    def extend(self, values: np.ndarray) -> np.ndarray:
        """Interior values framed by the Dirichlet ring, shape (nx+2, ny+2, 5)."""
        values = self.check_values(values)
        ext = self.ring.copy()
        ext[1:-1, 1:-1] = values
        return ext

    def check_values(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if values.shape == (self.n_dof,):
            values = values.reshape(self.shape)
        if values.shape != self.shape:
            raise ShapeMismatch(
                f"field shape {values.shape} does not match domain {self.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ShapeMismatch("field contains non-finite values")
        return values

    # Convenience delegates; heavy lifting lives in nematicq.energy.
    def free_energy(self, values: np.ndarray) -> float:
        from . import energy

        return energy.free_energy(self, values)

    def gradient(self, values: np.ndarray) -> np.ndarray:
        from . import energy

        return energy.gradient(self, values)

    def system(self):
        from .energy import LdGSystem

        return LdGSystem(self)


@dataclass(frozen=True)
class QField:
    """One field of tensors bound to its domain."""

    domain: Domain
    values: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", self.domain.check_values(self.values))

    @classmethod
    def zeros(cls, domain: Domain) -> "QField":
        return cls(domain, np.zeros(domain.shape))

    @classmethod
    def from_flat(cls, domain: Domain, flat: np.ndarray) -> "QField":
        return cls(domain, np.asarray(flat, dtype=float).reshape(domain.shape))

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def copy(self) -> "QField":
        return QField(self.domain, self.values.copy())

    def energy(self) -> float:
        return self.domain.free_energy(self.values)


_SEED_RE = re.compile(
    r"^(isotropic|diagonal\((d1|d2)\)|rotated\((bottom|top|left|right)\)|random\(([0-9.eE+-]+)\))$"
)


def _uniaxial_angle_components(s: float, theta: np.ndarray) -> np.ndarray:
    """Components of s (n n^T - I/3) for in-plane director angle theta."""
    c, sn = np.cos(theta), np.sin(theta)
    out = np.zeros(theta.shape + (5,))
    out[..., 0] = s * (c * c - 1.0 / 3.0)
    out[..., 1] = s * c * sn
    out[..., 3] = s * (sn * sn - 1.0 / 3.0)
    return out


def seed_field(domain: Domain, spec: str, seed: int = 0) -> QField:
    """Build a named initial field.

    Recognized specs: "isotropic", "diagonal(d1)", "diagonal(d2)",
    "rotated(bottom|top|left|right)", "random(sigma)".  Diagonal seeds are
    uniform uniaxial states along the two square diagonals; rotated seeds
    interpolate the director angle by pi across the square starting from
    the named edge's tangent; random(sigma) draws i.i.d. normal components
    from the counter-based generator keyed by ``seed``.
    """
    m = _SEED_RE.match(spec.strip())
    if m is None:
        raise ShapeMismatch(f"unknown seed spec {spec!r}")
    name = m.group(1)
    try:
        s = domain.s_plus
    except NoNematicRoots:
        s = 1.0
    if name == "isotropic":
        return QField.zeros(domain)
    if name.startswith("diagonal"):
        theta = np.pi / 4.0 if m.group(2) == "d1" else -np.pi / 4.0
        vals = np.broadcast_to(
            _uniaxial_angle_components(s, np.asarray(theta)), domain.shape
        ).copy()
        return QField(domain, vals)
    if name.startswith("rotated"):
        edge = m.group(3)
        x = domain.xs[:, None]
        y = domain.ys[None, :]
        if edge == "bottom":
            theta = np.pi * y + 0.0 * x
        elif edge == "top":
            theta = -np.pi * y + 0.0 * x
        elif edge == "left":
            theta = np.pi / 2.0 + np.pi * x + 0.0 * y
        else:
            theta = np.pi / 2.0 - np.pi * x + 0.0 * y
        return QField(domain, _uniaxial_angle_components(s, theta))
    sigma = float(m.group(4))
    gen = make_rng(seed, f"seed:random:{sigma:g}")
    return QField(domain, sigma * gen.normal(size=domain.shape))


def _d4_elements() -> list[np.ndarray]:
    """The eight signed permutation matrices of the square's symmetry group."""
    rots = []
    for k in range(4):
        c, s = int(round(np.cos(k * np.pi / 2))), int(round(np.sin(k * np.pi / 2)))
        rots.append(np.array([[c, -s], [s, c]], dtype=float))
    flips = [np.diag([-1.0, 1.0]) @ r for r in rots]
    return rots + flips


def _apply_d4(values: np.ndarray, o2: np.ndarray) -> np.ndarray:
    """Transform a square field by one group element (grid map + conjugation)."""
    n = values.shape[0]
    t = n - 1
    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    u = ii - t / 2.0
    v = jj - t / 2.0
    ip = np.rint(o2[0, 0] * u + o2[0, 1] * v + t / 2.0).astype(int)
    jp = np.rint(o2[1, 0] * u + o2[1, 1] * v + t / 2.0).astype(int)
    o3 = np.eye(3)
    o3[:2, :2] = o2
    mats = to_matrix(values)
    rotated = sym_components(np.einsum("ab,ijbc,dc->ijad", o3, mats, o3))
    out = np.empty_like(values)
    out[ip, jp] = rotated[ii, jj]
    return out


def square_symmetry_orbit(values: np.ndarray) -> list[np.ndarray]:
    """All eight symmetry images of a square field (identity first)."""
    if values.shape[0] != values.shape[1]:
        raise ShapeMismatch("square symmetry ops need nx == ny")
    return [_apply_d4(values, o2) for o2 in _d4_elements()]


def symmetrize(field: QField) -> QField:
    """Project onto the fully square-symmetric subspace (orbit average).

    The tangent boundary data is invariant under the full symmetry group,
    so the energy is too; averaging is the orthogonal projection onto the
    invariant subspace and maps stationary symmetric fields to themselves.
    """
    orbit = square_symmetry_orbit(field.values)
    return QField(field.domain, np.mean(orbit, axis=0))
