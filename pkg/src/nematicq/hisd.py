"""Index-k saddle search by reflected gradient dynamics, and the
assembly of solution landscapes.

A saddle of index k is found by flowing

    dx/dt = -(I - 2 V V^T) grad E(x)

while the k directions in V relax toward the k smallest Hessian
eigenvectors; explicit Euler steps plus a hard re-orthonormalization
keep V orthonormal.  Verified stationary points become SaddleRecords;
repeated downward (and optionally upward) searches from a seed record
grow the directed graph of stationary points connected by search
pathways.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import NoConvergence, NotStationary, ValidationError, WrongIndex
from .spectrum import SpectrumReport, operator_scale, smallest_eigs
from .systems import System

__all__ = [
    "SaddleSearchState",
    "SaddleRecord",
    "SaddleOptions",
    "LandscapeOptions",
    "Edge",
    "LandscapeGraph",
    "gram_schmidt",
    "hisd_step",
    "classify_stationary",
    "make_record",
    "find_saddle",
    "downward_search",
    "upward_search",
    "build_landscape",
]


def gram_schmidt(v: np.ndarray) -> np.ndarray:
    """Orthonormalize columns in order, with one reorthogonalization pass."""
    v = np.array(v, dtype=float)
    for i in range(v.shape[1]):
        for _ in range(2):
            for j in range(i):
                v[:, i] -= (v[:, j] @ v[:, i]) * v[:, j]
        nrm = float(np.linalg.norm(v[:, i]))
        if nrm < 1e-13:
            raise NoConvergence("direction set degenerated during orthonormalization")
        v[:, i] /= nrm
    return v


@dataclass(frozen=True)
class SaddleSearchState:
    """Position plus k orthonormal unstable-direction candidates."""

    x: np.ndarray
    v: np.ndarray  # (n, k), orthonormal columns
    k: int


@dataclass(frozen=True)
class SaddleRecord:
    """A verified stationary point.

    `field` is the flat coefficient vector (QField.from_flat views it on
    a domain); `lambda_spectrum` holds the smallest morse_index + 2
    eigenvalues (capped at the problem size), so the sign change behind
    the index count is visible.
    """

    field: np.ndarray
    energy: float
    morse_index: int
    lambda_spectrum: np.ndarray
    grad_inf: float
    id: int | None = None


@dataclass
class SaddleOptions:
    """Knobs for one saddle search.

    beta_dt/gamma_dt default to 1/|H| estimated by power iteration at
    the start point.  `precond` (an operator applied to the reflected
    gradient) and `refresh_every` (periodically recompute V by a
    subspace eigensolve) are off by default.
    """

    beta_dt: float | None = None
    gamma_dt: float | None = None
    l: float | None = None
    tol_grad: float = 1e-8
    max_iters: int = 50_000
    seed: int = 0
    precond: object = None
    refresh_every: int = 0
    blow_factor: float = 1e6
    radius_factor: float = 1e3
    adapt_scale: bool = True
    scale_check_every: int = 25


def hisd_step(
    system: System,
    state: SaddleSearchState,
    beta_dt: float,
    gamma_dt: float,
    l: float | None = None,
    grad: np.ndarray | None = None,
    precond=None,
) -> SaddleSearchState:
    """One explicit Euler step of the saddle dynamics.

    x moves along the reflected gradient (plain descent when k = 0);
    each v_i then relaxes against the Hessian at the new x, shielded
    from the earlier directions, and the set is re-orthonormalized.
    """
    if beta_dt <= 0.0 or gamma_dt <= 0.0:
        raise ValidationError("step sizes must be positive")
    x, v, k = state.x, state.v, state.k
    g = system.gradient(x) if grad is None else grad
    if k:
        d = g - 2.0 * v @ (v.T @ g)
    else:
        d = g
    if precond is not None:
        d = precond @ d if hasattr(precond, "__matmul__") else precond(d)
    x_new = x - beta_dt * d
    if k:
        hv = np.column_stack([system.hessian_vec(x_new, v[:, i], l) for i in range(k)])
        coef = v.T @ hv
        # shield[j, i]: weight of v_j in the update of v_i; the running
        # direction counts once, every earlier one twice, later ones not at all
        shield = np.triu(2.0 * np.ones((k, k)), 1) + np.eye(k)
        v_new = gram_schmidt(v - gamma_dt * (hv - v @ (shield * coef)))
    else:
        v_new = v
    return SaddleSearchState(x_new, v_new, k)


def classify_stationary(
    system: System, x: np.ndarray, tol_grad: float = 1e-8, seed: int = 0, k_hint: int = 0
) -> tuple[int, np.ndarray, SpectrumReport]:
    """Verified Morse index and leading spectrum at a stationary point.

    The eigensolve window grows until a non-negative eigenvalue is seen
    (or the problem size is reached), so the count is the true index,
    not a lower bound.
    """
    g_inf = float(np.abs(system.gradient(x)).max())
    if g_inf >= tol_grad:
        raise NotStationary(g_inf, tol_grad)
    n = x.size
    k_query = min(n, max(2, k_hint + 2))
    while True:
        rep = smallest_eigs(system, x, k_query, seed=seed)
        m = int(np.sum(rep.eigenvalues < -rep.tol_eig))
        if m + 2 <= k_query or k_query >= n:
            break
        k_query = min(n, m + 2)
    return m, rep.eigenvalues[: min(m + 2, n)].copy(), rep


def make_record(
    system: System, x: np.ndarray, tol_grad: float = 1e-8, seed: int = 0, k_hint: int = 0
) -> SaddleRecord:
    m, spectrum, _ = classify_stationary(system, x, tol_grad, seed, k_hint)
    g_inf = float(np.abs(system.gradient(x)).max())
    return SaddleRecord(
        field=np.array(x, dtype=float),
        energy=float(system.energy(x)),
        morse_index=m,
        lambda_spectrum=spectrum,
        grad_inf=g_inf,
    )


def find_saddle(
    system: System,
    k: int,
    x0: np.ndarray,
    v0: np.ndarray | None = None,
    opts: SaddleOptions | None = None,
) -> SaddleRecord:
    """Flow the saddle dynamics to a stationary point and verify its index.

    Raises WrongIndex (carrying the verified record) when the landing
    point is stationary but of a different index than requested; the
    caller may keep that record.
    """
    opts = opts or SaddleOptions()
    x = np.array(x0, dtype=float).reshape(-1)
    n = x.size
    if not 0 <= k <= n:
        raise ValidationError(f"index {k} out of range for {n} unknowns")
    if v0 is None:
        if k:
            v = smallest_eigs(system, x, k, seed=opts.seed).eigenvectors.copy()
        else:
            v = np.zeros((n, 0))
    else:
        v = gram_schmidt(np.asarray(v0, dtype=float).reshape(n, k))
    if opts.beta_dt is None or opts.gamma_dt is None:
        scale = operator_scale(lambda w: system.hessian_vec(x, w, opts.l), n, seed=opts.seed)
        beta = opts.beta_dt if opts.beta_dt is not None else 1.0 / scale
        gamma = opts.gamma_dt if opts.gamma_dt is not None else 1.0 / scale
    else:
        beta, gamma = opts.beta_dt, opts.gamma_dt
    beta0 = beta
    e_state = float(system.energy(x))
    e_scale = 1.0 + abs(e_state)
    x_scale = 1.0 + float(np.abs(x).max())
    state = SaddleSearchState(x, v, k)
    g_inf = np.inf

    def halve():
        nonlocal beta, gamma
        beta *= 0.5
        gamma *= 0.5
        if beta < 1e-12 * beta0:
            raise NoConvergence("saddle dynamics stalled despite step halving", it, g_inf)

    for it in range(opts.max_iters):
        g = system.gradient(state.x)
        g_inf = float(np.abs(g).max())
        if g_inf < opts.tol_grad:
            record = make_record(system, state.x, opts.tol_grad, opts.seed, k_hint=k)
            if record.morse_index != k:
                raise WrongIndex(record.morse_index, k, record=record)
            return record
        if k and opts.refresh_every and it and it % opts.refresh_every == 0:
            rep = smallest_eigs(system, state.x, k, seed=opts.seed, v0=state.v)
            state = replace(state, v=rep.eigenvectors.copy())
        if k and opts.adapt_scale and it and it % opts.scale_check_every == 0:
            # curvature can grow along the way; keep beta below 1/|H| at
            # the current point or the unstable modes start to rattle
            cap = 1.0 / operator_scale(
                lambda w: system.hessian_vec(state.x, w, opts.l), n, seed=opts.seed
            )
            beta = min(beta, cap)
            gamma = min(gamma, cap)
        trial = hisd_step(system, state, beta, gamma, opts.l, grad=g, precond=opts.precond)
        # a position running off to radius_factor times the start scale is
        # divergence, not a step-size problem; halving cannot rescue it
        if not np.all(np.isfinite(trial.x)) or np.abs(trial.x).max() > opts.radius_factor * x_scale:
            raise NoConvergence("position diverged during saddle dynamics", it, g_inf)
        e_new = float(system.energy(trial.x))
        if not np.isfinite(e_new) or abs(e_new) > opts.blow_factor * e_scale:
            halve()
            continue
        if k == 0 and e_new > e_state + 1e-12 * (1.0 + abs(e_state)):
            # plain descent must be monotone; an energy rise means the
            # step has outrun the local curvature
            halve()
            continue
        state = trial
        e_state = e_new
    raise NoConvergence(
        f"gradient inf-norm {g_inf:.3e} above {opts.tol_grad:.3e} after {opts.max_iters} steps",
        iterations=opts.max_iters,
        residual=g_inf,
    )


def _default_eps(x: np.ndarray, eps: float | None) -> float:
    if eps is not None:
        if eps <= 0.0:
            raise ValidationError("eps must be positive")
        return eps
    return 1e-2 * max(1.0, float(np.linalg.norm(x)))


def _branch_searches(
    system: System,
    origin: SaddleRecord,
    k: int,
    directions: np.ndarray,
    v0: np.ndarray,
    eps: float,
    opts: SaddleOptions,
    errors_out: list | None,
) -> list[tuple[float, SaddleRecord]]:
    """Run find_saddle from origin +/- eps * last direction; keep verified
    records (including wrong-index landings), drop failed branches."""
    found = []
    for sign in (1.0, -1.0):
        x0 = origin.field + (sign * eps) * directions
        try:
            rec = find_saddle(system, k, x0, v0=v0, opts=opts)
        except WrongIndex as err:
            rec = err.record
        except NoConvergence as err:
            if errors_out is not None:
                errors_out.append((sign, err))
            continue
        found.append((sign, rec))
    return found


def downward_search(
    system: System,
    parent: SaddleRecord,
    k: int,
    eps: float | None = None,
    opts: SaddleOptions | None = None,
    errors_out: list | None = None,
) -> list[SaddleRecord]:
    """Search for index-k saddles below a higher-index parent.

    Starts at parent +/- eps * v_{k+1} with V = (v_1 .. v_k), the parent
    eigenvectors recomputed on the spot.  Failed branches never abort
    the sibling; wrong-index landings are kept with their true index.
    """
    if k >= parent.morse_index:
        raise ValidationError("downward target index must be below the parent index")
    opts = opts or SaddleOptions()
    rep = smallest_eigs(system, parent.field, k + 1, seed=opts.seed)
    eps = _default_eps(parent.field, eps)
    hits = _branch_searches(
        system, parent, k, rep.eigenvectors[:, k], rep.eigenvectors[:, :k], eps, opts, errors_out
    )
    return [rec for _, rec in hits]


def upward_search(
    system: System,
    child: SaddleRecord,
    k: int,
    eps: float | None = None,
    opts: SaddleOptions | None = None,
    errors_out: list | None = None,
) -> list[SaddleRecord]:
    """Search for an index-k saddle above a lower-index child.

    V starts as the child's unstable eigenvectors extended by the
    smallest-positive ones up to k; x starts at child +/- eps * v_k.
    """
    if k <= child.morse_index:
        raise ValidationError("upward target index must be above the child index")
    opts = opts or SaddleOptions()
    rep = smallest_eigs(system, child.field, k, seed=opts.seed)
    eps = _default_eps(child.field, eps)
    hits = _branch_searches(
        system, child, k, rep.eigenvectors[:, k - 1], rep.eigenvectors[:, :k], eps, opts, errors_out
    )
    return [rec for _, rec in hits]


@dataclass
class LandscapeOptions:
    """Budgets and matching rules for landscape assembly.

    `max_index`, when set, adds upward sweeps from every node up to that
    index (there is no a priori bound, so it is an explicit budget).
    Two records match when both the energy gap is below 1e-8*(1+|E|)
    and the field distance is below tol_x*(1 + field scale); an
    optional `symmetry_orbit` callable (flat -> iterable of equivalent
    flats) makes matching quotient out a symmetry group.
    """

    search: SaddleOptions = field(default_factory=SaddleOptions)
    eps: float | None = None
    max_nodes: int = 200
    max_searches: int = 2000
    max_index: int | None = None
    tol_x: float = 1e-4
    symmetry_orbit: Callable | None = None


@dataclass(frozen=True)
class Edge:
    source: int
    target: int
    kind: str  # "downward" | "upward"
    sign: float


@dataclass
class LandscapeGraph:
    nodes: list  # SaddleRecords with ids assigned in discovery order
    edges: list  # Edges
    truncated: bool
    searches: int

    def node(self, node_id: int) -> SaddleRecord:
        return self.nodes[node_id]

    def by_index(self) -> dict:
        out: dict = {}
        for rec in self.nodes:
            out.setdefault(rec.morse_index, []).append(rec)
        return out

    def stable_nodes(self) -> list:
        return [rec for rec in self.nodes if rec.morse_index == 0]


def _records_match(a: SaddleRecord, b: SaddleRecord, opts: LandscapeOptions) -> bool:
    if abs(a.energy - b.energy) >= 1e-8 * (1.0 + max(abs(a.energy), abs(b.energy))):
        return False
    scale = 1.0 + max(float(np.linalg.norm(a.field)), float(np.linalg.norm(b.field)))
    candidates = [b.field]
    if opts.symmetry_orbit is not None:
        candidates = list(opts.symmetry_orbit(b.field))
    dist = min(float(np.linalg.norm(a.field - c)) for c in candidates)
    return dist < opts.tol_x * scale


def build_landscape(
    system: System, seed: SaddleRecord, opts: LandscapeOptions | None = None
) -> LandscapeGraph:
    """Grow the stationary-point graph from a verified seed record.

    Breadth-first: every accepted node schedules downward searches to
    each index below it (and upward sweeps up to max_index when set),
    both perturbation signs, in a fixed order, so discovery ids are
    deterministic.  Hitting a budget stops scheduling and returns the
    partial graph with truncated = True.
    """
    opts = opts or LandscapeOptions()
    nodes: list[SaddleRecord] = [replace(seed, id=0)]
    edges: list[Edge] = []
    searches = 0
    truncated = False

    def schedule(node_id: int) -> deque:
        rec = nodes[node_id]
        jobs = deque()
        for k in range(rec.morse_index - 1, -1, -1):
            jobs.append((node_id, "downward", k))
        if opts.max_index is not None:
            for k in range(rec.morse_index + 1, opts.max_index + 1):
                jobs.append((node_id, "upward", k))
        return jobs

    queue = schedule(0)
    eig_cache: dict[int, SpectrumReport] = {}

    def directions_for(node_id: int, want: int) -> SpectrumReport:
        rep = eig_cache.get(node_id)
        if rep is None or rep.eigenvalues.size < want:
            rec = nodes[node_id]
            # one solve covers every search scheduled from this node
            k_fetch = max(want, rec.morse_index, opts.max_index or 0)
            k_fetch = min(k_fetch, rec.field.size, 30)
            k_fetch = max(k_fetch, want)
            rep = smallest_eigs(system, rec.field, k_fetch, seed=opts.search.seed)
            eig_cache[node_id] = rep
        return rep

    while queue:
        if searches >= opts.max_searches or len(nodes) >= opts.max_nodes:
            truncated = True
            break
        node_id, kind, k = queue.popleft()
        parent = nodes[node_id]
        want = k + 1 if kind == "downward" else k
        rep = directions_for(node_id, want)
        eps = _default_eps(parent.field, opts.eps)
        searches += 2
        hits = _branch_searches(
            system,
            parent,
            k,
            rep.eigenvectors[:, want - 1],
            rep.eigenvectors[:, :k],
            eps,
            opts.search,
            None,
        )
        for sign, rec in hits:
            match_id = None
            for existing in nodes:
                if _records_match(existing, rec, opts):
                    match_id = existing.id
                    break
            if match_id is None:
                if len(nodes) >= opts.max_nodes:
                    truncated = True
                    continue
                match_id = len(nodes)
                nodes.append(replace(rec, id=match_id))
                queue.extend(schedule(match_id))
            found_index = nodes[match_id].morse_index
            if match_id == node_id:
                continue
            if kind == "downward" and found_index < parent.morse_index:
                edges.append(Edge(node_id, match_id, "downward", sign))
            elif kind == "upward" and found_index > parent.morse_index:
                edges.append(Edge(node_id, match_id, "upward", sign))
    return LandscapeGraph(nodes=nodes, edges=edges, truncated=truncated, searches=searches)
