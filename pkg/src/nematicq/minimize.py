"""Limited-memory quasi-Newton descent with backtracking line search.

Accepted iterates have non-increasing energies (Armijo condition with
c1 = 1e-4, step shrink 0.5); convergence is declared on the inf-norm of
the gradient.  When the two-loop direction fails to point downhill (for
example after a corrupted curvature history) the step falls back to
steepest descent and the history is discarded.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import NotStationary
from .spectrum import SpectrumReport, smallest_eigs
from .systems import System

__all__ = [
    "MinimizeOptions",
    "MinimizeResult",
    "minimize",
    "certify_stability",
    "lbfgs_direction",
    "ensure_descent",
]


@dataclass
class MinimizeOptions:
    memory: int = 10
    tol_grad: float = 1e-8
    max_iters: int = 2000
    c1: float = 1e-4
    shrink: float = 0.5
    max_backtracks: int = 60
    # optional projection applied to accepted iterates (e.g. a symmetry
    # average); must map the feasible set to itself
    project: object = None


@dataclass
class MinimizeResult:
    x: np.ndarray
    energy: float
    grad_inf: float
    iterations: int
    converged: bool
    energies: list = field(default_factory=list, repr=False)
    n_energy: int = 0
    n_grad: int = 0


def lbfgs_direction(g: np.ndarray, pairs, gamma: float) -> np.ndarray:
    """Two-loop recursion: approximate -H^{-1} g from curvature pairs.

    ``pairs`` holds (s, y, rho = 1/(s.y)) tuples, oldest first; ``gamma``
    scales the seed inverse Hessian.
    """
    q = g.copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * float(s @ q)
        alphas.append(a)
        q -= a * y
    q *= gamma
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * float(y @ q)
        q += (a - b) * s
    return -q


def ensure_descent(g: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Return d when it is a descent direction for g, else -g."""
    gd = float(g @ d)
    if not np.isfinite(gd) or gd >= -1e-14 * np.linalg.norm(g) * np.linalg.norm(d):
        return -g
    return d


def minimize(system: System, x0: np.ndarray, opts: MinimizeOptions | None = None) -> MinimizeResult:
    """Descend to a stationary point of the system's energy.

    Returns the best iterate tagged ``converged=False`` when the
    iteration budget runs out or the line search stagnates at machine
    resolution; energies along accepted iterates never increase.
    """
    opts = opts or MinimizeOptions()
    x = np.asarray(x0, dtype=float).reshape(-1).copy()
    e = system.energy(x)
    g = system.gradient(x)
    n_energy, n_grad = 1, 1
    pairs: deque = deque(maxlen=opts.memory)
    gamma = 1.0
    energies = [e]

    it = 0
    converged = float(np.abs(g).max()) < opts.tol_grad
    while not converged and it < opts.max_iters:
        it += 1
        d = lbfgs_direction(g, pairs, gamma)
        gd0 = float(g @ d)
        used_fallback = not np.isfinite(gd0) or gd0 >= -1e-14 * np.linalg.norm(
            g
        ) * np.linalg.norm(d)
        if used_fallback:
            d = -g
        while True:
            gd = float(g @ d)
            alpha = 1.0 if pairs else 1.0 / max(1.0, float(np.abs(g).max()))
            accepted = False
            for _ in range(opts.max_backtracks):
                x_try = x + alpha * d
                e_try = system.energy(x_try)
                n_energy += 1
                if e_try <= e + opts.c1 * alpha * gd:
                    accepted = True
                    break
                alpha *= opts.shrink
            if accepted or used_fallback:
                break
            # quasi-Newton step unusable: drop history, retry steepest descent
            pairs.clear()
            gamma = 1.0
            d = -g
            used_fallback = True
        if not accepted:
            break

        if opts.project is not None:
            x_proj = np.asarray(opts.project(x_try), dtype=float).reshape(-1)
            e_proj = system.energy(x_proj)
            n_energy += 1
            # keep the projected point only while it preserves monotonicity
            if e_proj <= e:
                x_try, e_try = x_proj, e_proj
        g_try = system.gradient(x_try)
        n_grad += 1
        s = x_try - x
        y = g_try - g
        sy = float(s @ y)
        if sy > 1e-10 * np.linalg.norm(s) * np.linalg.norm(y):
            pairs.append((s, y, 1.0 / sy))
            gamma = sy / float(y @ y)
        x, e, g = x_try, e_try, g_try
        energies.append(e)
        converged = float(np.abs(g).max()) < opts.tol_grad

    return MinimizeResult(
        x=x,
        energy=e,
        grad_inf=float(np.abs(g).max()),
        iterations=it,
        converged=converged,
        energies=energies,
        n_energy=n_energy,
        n_grad=n_grad,
    )


def certify_stability(
    system: System,
    x: np.ndarray,
    k: int = 3,
    tol_grad: float = 1e-8,
    stationarity_factor: float = 10.0,
    seed: int = 0,
) -> SpectrumReport:
    """Verify x is a stationary point and report its smallest eigenpairs.

    Raises NotStationary when |grad|_inf >= stationarity_factor * tol_grad.
    The returned report's ``stable`` property is the certificate: no
    eigenvalue below -tol_eig.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    gn = float(np.abs(system.gradient(x)).max())
    threshold = stationarity_factor * tol_grad
    if gn >= threshold:
        raise NotStationary(gn, threshold)
    return smallest_eigs(system, x, k, seed=seed)
