"""Minimal energy paths by the two-step string method.

A path is a polyline of N fields between two stationary endpoints.  Each
sweep moves every interior node down the full gradient (step 1) and then
redistributes nodes to an equal or energy-weighted arc-length
parametrization (step 2); the reparametrization supplies the tangential
control that makes the plain-descent step well posed.  The converged
string's energy maximum seeds an index-1 climbing refinement, and the
refined transition state is certified through its leading Hessian
eigenvalues.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DegeneratePath, NoConvergence, NotIndexOne, NotStationary, ValidationError, WrongIndex
from .field import QField
from .hisd import SaddleOptions, find_saddle
from .spectrum import operator_scale, smallest_eigs
from .systems import System

__all__ = [
    "Path",
    "MepResult",
    "evolve_step",
    "reparametrize",
    "find_mep",
    "refine_multiscale",
    "perpendicular_residual",
]

_CHORD_SPREAD_TOL = 1e-8


@dataclass(frozen=True)
class Path:
    """Polyline of fields with energies and arc-length labels.

    nodes has shape (N, n); alpha is the normalized cumulative chord
    length, strictly increasing from 0 to 1.  The first and last node
    are the fixed endpoints.
    """

    system: System
    nodes: np.ndarray
    energies: np.ndarray
    alpha: np.ndarray

    @classmethod
    def from_nodes(cls, system: System, nodes: np.ndarray, energies: np.ndarray | None = None) -> "Path":
        nodes = np.asarray(nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[0] < 3:
            raise ValidationError("a path needs at least 3 nodes of equal size")
        if energies is None:
            energies = np.array([system.energy(q) for q in nodes])
        chords = np.linalg.norm(np.diff(nodes, axis=0), axis=1)
        total = float(chords.sum())
        if total < 1e-14:
            raise DegeneratePath("total path length below resolution")
        alpha = np.concatenate([[0.0], np.cumsum(chords)]) / total
        alpha[-1] = 1.0
        return cls(system=system, nodes=nodes, energies=np.asarray(energies, dtype=float), alpha=alpha)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    def chord_spread(self) -> float:
        """Relative spread of consecutive chord lengths."""
        chords = np.linalg.norm(np.diff(self.nodes, axis=0), axis=1)
        mean = chords.mean()
        if mean == 0.0:
            return 0.0
        return float((chords.max() - chords.min()) / mean)


@dataclass(frozen=True)
class MepResult:
    path: Path
    ts_index: int
    ts_field: np.ndarray
    barrier_forward: float
    barrier_backward: float
    ts_lambda1: float


def _base_step(system: System, x: np.ndarray, seed: int = 0) -> float:
    return 1.0 / operator_scale(lambda w: system.hessian_vec(x, w), x.size, seed=seed)


def evolve_step(p: Path, base_step: float | None = None, max_backtracks: int = 30) -> Path:
    """Step 1: move every interior node down its full gradient.

    The per-node step starts at a shared base and halves until the node's
    energy does not increase; a node that cannot descend stays put.
    Endpoints are untouched.  Node updates are mutually independent.
    """
    system = p.system
    if base_step is None:
        base_step = _base_step(system, p.nodes[p.n_nodes // 2])
    if base_step <= 0.0:
        raise ValidationError("base step must be positive")
    nodes = p.nodes.copy()
    energies = p.energies.copy()
    for i in range(1, p.n_nodes - 1):
        g = system.gradient(nodes[i])
        step = base_step
        for _ in range(max_backtracks + 1):
            trial = p.nodes[i] - step * g
            e_trial = system.energy(trial)
            if np.isfinite(e_trial) and e_trial <= energies[i]:
                nodes[i] = trial
                energies[i] = e_trial
                break
            step *= 0.5
    return Path.from_nodes(system, nodes, energies)


def _segment_weights(energies: np.ndarray, beta: float) -> np.ndarray:
    span = float(energies.max() - energies.min())
    if span == 0.0:
        return np.ones(energies.size - 1)
    mid = 0.5 * (energies[:-1] + energies[1:])
    return 1.0 + beta * (mid - energies.min()) / span


def _weighted_chords(nodes: np.ndarray, energies: np.ndarray, mode: str, beta: float) -> np.ndarray:
    chords = np.linalg.norm(np.diff(nodes, axis=0), axis=1)
    if mode == "energy_weighted":
        chords = chords * _segment_weights(energies, beta)
    return chords


def _spread(chords: np.ndarray) -> float:
    mean = chords.mean()
    if mean == 0.0:
        return 0.0
    return float((chords.max() - chords.min()) / mean)


def _resample(
    nodes: np.ndarray, energies: np.ndarray, mode: str, interp: str, beta: float
) -> tuple[np.ndarray, np.ndarray]:
    """One redistribution pass; energies are carried by interpolation."""
    n = nodes.shape[0]
    s = np.concatenate([[0.0], np.cumsum(_weighted_chords(nodes, energies, mode, beta))])
    if s[-1] < 1e-14:
        raise DegeneratePath("total path length below resolution")
    targets = np.linspace(0.0, s[-1], n)
    keep = np.concatenate([[True], np.diff(s) > 0.0])
    pts, e_sup, s_sup = nodes[keep], energies[keep], s[keep]
    if interp == "spline" and pts.shape[0] > 2:
        out = CubicSpline(s_sup, pts, axis=0)(targets)
        e_out = CubicSpline(s_sup, e_sup)(targets)
    else:
        seg = np.clip(np.searchsorted(s_sup, targets, side="right") - 1, 0, pts.shape[0] - 2)
        frac = (targets - s_sup[seg]) / np.diff(s_sup)[seg]
        out = pts[seg] + frac[:, None] * (pts[seg + 1] - pts[seg])
        e_out = e_sup[seg] + frac * (e_sup[seg + 1] - e_sup[seg])
    out[0], out[-1] = nodes[0], nodes[-1]
    e_out[0], e_out[-1] = energies[0], energies[-1]
    return out, e_out


def reparametrize(
    p: Path,
    mode: str = "equal_arc",
    interp: str = "linear",
    beta: float = 4.0,
    max_passes: int = 200,
) -> Path:
    """Step 2: redistribute nodes to the target arc-length measure.

    A single resample leaves a corner-cutting residue, so the resampling
    is iterated to its fixed point: uniform (weighted) chord lengths
    within 1e-8 relative spread.  Intermediate passes interpolate the
    stored energies; the returned path carries freshly evaluated ones.
    Endpoints come back bit-identical.
    """
    if mode not in ("equal_arc", "energy_weighted"):
        raise ValidationError(f"unknown reparametrization mode {mode!r}")
    if interp not in ("linear", "spline"):
        raise ValidationError(f"unknown interpolation {interp!r}")
    nodes, energies = p.nodes, p.energies
    spread = _spread(_weighted_chords(nodes, energies, mode, beta))
    if spread < _CHORD_SPREAD_TOL:
        return p
    for _ in range(max_passes):
        nodes, energies = _resample(nodes, energies, mode, interp, beta)
        spread = _spread(_weighted_chords(nodes, energies, mode, beta))
        if spread < _CHORD_SPREAD_TOL:
            return Path.from_nodes(p.system, nodes)
    raise NoConvergence(
        f"reparametrization did not reach uniform spacing in {max_passes} passes",
        iterations=max_passes,
        residual=spread,
    )


def perpendicular_residual(p: Path) -> float:
    """Max over interior nodes of the gradient component normal to the path."""
    worst = 0.0
    for i in range(1, p.n_nodes - 1):
        g = p.system.gradient(p.nodes[i])
        tangent = p.nodes[i + 1] - p.nodes[i - 1]
        nt = np.linalg.norm(tangent)
        if nt > 0.0:
            tangent = tangent / nt
            g = g - (g @ tangent) * tangent
        worst = max(worst, float(np.abs(g).max()))
    return worst


def _as_flat(field, system: System | None):
    """Accept a QField or a flat array; derive the system when possible."""
    if isinstance(field, QField):
        from .energy import LdGSystem

        return field.flat.copy(), system or LdGSystem(field.domain)
    if system is None:
        raise ValidationError("plain-array endpoints need an explicit system")
    return np.asarray(field, dtype=float).reshape(-1).copy(), system


def _certify_ts(system: System, x: np.ndarray, seed: int = 0) -> float:
    rep = smallest_eigs(system, x, k=min(3, x.size), seed=seed)
    negatives = int(np.sum(rep.eigenvalues < -rep.tol_eig))
    if negatives != 1:
        raise NotIndexOne(
            f"transition state candidate has {negatives} negative eigenvalues, "
            f"leading spectrum {np.array2string(rep.eigenvalues, precision=6)}"
        )
    return float(rep.eigenvalues[0])


def _refine_ts(system: System, x0: np.ndarray, tol: float, seed: int = 0) -> np.ndarray:
    """Climbing correction: index-1 reflected dynamics with the unstable
    direction re-solved every iteration."""
    opts = SaddleOptions(tol_grad=tol, refresh_every=1, seed=seed)
    try:
        return find_saddle(system, 1, x0, opts=opts).field
    except WrongIndex as err:
        raise NotIndexOne(
            f"climbing correction converged to Morse index {err.found}"
        ) from err


def _string_loop(
    path: Path,
    tol: float,
    max_sweeps: int,
    mode: str,
    interp: str,
    base_step: float | None,
) -> Path:
    if base_step is None:
        base_step = _base_step(path.system, path.nodes[path.n_nodes // 2])
    path = reparametrize(path, mode, interp)
    for _ in range(max_sweeps):
        if perpendicular_residual(path) < tol:
            return path
        path = evolve_step(path, base_step)
        path = reparametrize(path, mode, interp)
    residual = perpendicular_residual(path)
    if residual < tol:
        return path
    raise NoConvergence(
        f"string residual {residual:.3e} above {tol:.3e} after {max_sweeps} sweeps",
        iterations=max_sweeps,
        residual=residual,
    )


def _finish(global_e0: float, global_e1: float, path: Path, ts_tol: float, seed: int) -> MepResult:
    ts_index = int(np.argmax(path.energies))
    ts_field = _refine_ts(path.system, path.nodes[ts_index].copy(), ts_tol, seed)
    ts_lambda1 = _certify_ts(path.system, ts_field, seed)
    e_ts = float(path.system.energy(ts_field))
    return MepResult(
        path=path,
        ts_index=ts_index,
        ts_field=ts_field,
        barrier_forward=e_ts - global_e0,
        barrier_backward=e_ts - global_e1,
        ts_lambda1=ts_lambda1,
    )


def find_mep(
    a,
    b,
    n_nodes: int = 16,
    tol: float = 1e-6,
    system: System | None = None,
    mode: str = "equal_arc",
    interp: str = "linear",
    max_sweeps: int = 5_000,
    base_step: float | None = None,
    ts_tol: float | None = None,
    seed: int = 0,
) -> MepResult:
    """Minimal energy path between two stationary states.

    Endpoints must satisfy ||grad||_inf < 10 tol.  The string starts as
    the straight segment, alternates evolution and reparametrization
    until every interior node's perpendicular gradient is below tol,
    then refines and certifies the transition state.

    The string residual bottoms out at a discretization floor set by the
    node spacing and path curvature, so tol should be chosen against the
    resolution; the transition state itself is refined to ts_tol
    (default min(tol, 1e-8)) by the climbing correction, independent of
    that floor.
    """
    xa, system = _as_flat(a, system)
    xb, system = _as_flat(b, system)
    if n_nodes < 8:
        raise ValidationError("a global string needs at least 8 nodes")
    for x in (xa, xb):
        g_inf = float(np.abs(system.gradient(x)).max())
        if g_inf >= 10.0 * tol:
            raise NotStationary(g_inf, 10.0 * tol)
    frac = np.linspace(0.0, 1.0, n_nodes)[:, None]
    path = Path.from_nodes(system, (1.0 - frac) * xa + frac * xb)
    path = _string_loop(path, tol, max_sweeps, mode, interp, base_step)
    ts_tol = min(tol, 1e-8) if ts_tol is None else ts_tol
    return _finish(path.energies[0], path.energies[-1], path, ts_tol, seed)


def refine_multiscale(
    coarse: Path,
    fine_n: int = 16,
    tol: float = 1e-8,
    mode: str = "equal_arc",
    interp: str = "linear",
    max_sweeps: int = 5_000,
    base_step: float | None = None,
    ts_tol: float | None = None,
    seed: int = 0,
) -> MepResult:
    """Local fine string between the two highest-energy coarse nodes.

    The selected coarse nodes become the (frozen, generally
    non-stationary) ends of a fine string resolving the barrier region;
    barriers in the result are still measured from the coarse string's
    global endpoints.
    """
    if fine_n < 3:
        raise ValidationError("a fine string needs at least 3 nodes")
    order = np.argsort(coarse.energies)
    lo, hi = sorted((int(order[-1]), int(order[-2])))
    if hi == lo:
        raise ValidationError("coarse path has fewer than two distinct node energies")
    frac = np.linspace(0.0, 1.0, fine_n)[:, None]
    nodes = (1.0 - frac) * coarse.nodes[lo] + frac * coarse.nodes[hi]
    fine = Path.from_nodes(coarse.system, nodes)
    fine = _string_loop(fine, tol, max_sweeps, mode, interp, base_step)
    ts_tol = min(tol, 1e-8) if ts_tol is None else ts_tol
    return _finish(coarse.energies[0], coarse.energies[-1], fine, ts_tol, seed)
