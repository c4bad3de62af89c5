"""Smallest Hessian eigenpairs through matrix-free operator actions.

The Hessian is only available as matrix-vector products (central
differences of the gradient), so the small end of the spectrum comes
from LOBPCG with a deterministic seeded start, optional SPD
preconditioning, Rayleigh-Ritz cleanup and residual verification.  Tiny
problems are assembled densely instead.  The spectral scale used for
tolerances is estimated with ten power iterations.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, lobpcg

from .errors import NoConvergence, ShapeMismatch
from .systems import System, make_rng

__all__ = ["SpectrumReport", "smallest_eigs", "solve_smallest", "operator_scale"]

# Problems at or below this size (or with k too close to n) are solved densely.
_DENSE_CUTOFF = 160


@dataclass
class SpectrumReport:
    """k smallest eigenpairs of a Hessian, with verification data.

    ``eigenvalues`` ascend; ``eigenvectors`` has orthonormal columns;
    ``residuals`` are |H v - lambda v|_2 per pair; ``scale`` estimates
    |H|_2; ``morse_index`` counts eigenvalues below -tol_eig among the
    computed ones (a lower bound on the true index when all k qualify).
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    scale: float
    tol_eig: float
    morse_index: int
    iterations: int

    @property
    def stable(self) -> bool:
        return self.morse_index == 0


def operator_scale(apply_h, n: int, iters: int = 10, seed: int = 0) -> float:
    """Dominant |eigenvalue| estimate from ``iters`` power iterations."""
    gen = make_rng(seed, "spectrum:power")
    v = gen.normal(size=n)
    v /= np.linalg.norm(v)
    nrm = 0.0
    for _ in range(iters):
        w = apply_h(v)
        nrm = float(np.linalg.norm(w))
        if nrm == 0.0 or not np.isfinite(nrm):
            break
        v = w / nrm
    if not np.isfinite(nrm):
        raise NoConvergence("operator norm estimate diverged", iters, nrm)
    return max(nrm, 1e-300)


def _rayleigh_ritz(apply_h, v: np.ndarray):
    """Orthonormalize the block and rotate it onto Ritz pairs."""
    v, _ = np.linalg.qr(v)
    hv = np.column_stack([apply_h(v[:, j]) for j in range(v.shape[1])])
    b = v.T @ hv
    b = 0.5 * (b + b.T)
    w, u = np.linalg.eigh(b)
    v = v @ u
    hv = hv @ u
    res = np.linalg.norm(hv - v * w, axis=0)
    return w, v, res


def solve_smallest(
    apply_h,
    n: int,
    k: int,
    scale: float | None = None,
    seed: int = 0,
    v0: np.ndarray | None = None,
    precond: LinearOperator | None = None,
    maxiter: int = 800,
    restarts: int = 3,
) -> SpectrumReport:
    """k smallest eigenpairs of the symmetric operator ``apply_h`` on R^n.

    Residuals must verify below 1e-6 * scale or NoConvergence is raised.
    Deterministic for fixed (seed, v0).
    """
    if not 1 <= k <= 30:
        raise ShapeMismatch(f"eigenpair count k must be in [1, 30], got {k}")
    if k > n:
        raise ShapeMismatch(f"requested {k} eigenpairs of an operator on R^{n}")
    if scale is None:
        scale = operator_scale(apply_h, n, iters=10, seed=seed)
    tol_eig = 1e-8 * scale
    res_required = 1e-6 * scale
    res_target = 1e-8 * scale

    iterations = 0
    if n <= max(_DENSE_CUTOFF, 5 * k + 5):
        eye = np.eye(n)
        h = np.column_stack([apply_h(eye[:, j]) for j in range(n)])
        h = 0.5 * (h + h.T)
        w_all, v_all = np.linalg.eigh(h)
        w, v = w_all[:k], v_all[:, :k]
        res = np.linalg.norm(h @ v - v * w, axis=0)
    else:
        gen = make_rng(seed, "spectrum:init")
        x = gen.normal(size=(n, k))
        if v0 is not None:
            v0 = np.atleast_2d(np.asarray(v0, dtype=float))
            if v0.shape[0] != n:
                v0 = v0.T
            m = min(k, v0.shape[1])
            x[:, :m] = v0[:, :m]
        x, _ = np.linalg.qr(x)
        op = LinearOperator((n, n), matvec=apply_h, dtype=float)
        w = v = res = None
        for attempt in range(restarts + 1):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                w_try, x = lobpcg(
                    op,
                    x,
                    M=precond,
                    largest=False,
                    tol=res_target,
                    maxiter=maxiter,
                )
            iterations += maxiter
            w, v, res = _rayleigh_ritz(apply_h, x)
            if res.max() <= res_required:
                break
            x = v
        if res is None or res.max() > res_required:
            raise NoConvergence(
                "eigensolver residuals above tolerance", iterations, float(res.max())
            )

    order = np.argsort(w)
    w = np.asarray(w)[order]
    v = np.asarray(v)[:, order]
    res = np.asarray(res)[order]
    morse = int(np.count_nonzero(w < -tol_eig))
    return SpectrumReport(
        eigenvalues=w,
        eigenvectors=v,
        residuals=res,
        scale=float(scale),
        tol_eig=float(tol_eig),
        morse_index=morse,
        iterations=iterations,
    )


def smallest_eigs(
    system: System,
    x: np.ndarray,
    k: int,
    l: float | None = None,
    seed: int = 0,
    v0: np.ndarray | None = None,
    precond="auto",
    maxiter: int = 800,
) -> SpectrumReport:
    """k smallest Hessian eigenpairs of ``system`` at the point ``x``.

    ``precond="auto"`` uses the system's SPD preconditioner when it
    provides one (tensor-field systems factor their elastic operator);
    pass None to disable or supply any SPD LinearOperator.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if precond == "auto":
        build = getattr(system, "preconditioner", None)
        precond = build() if callable(build) else None

    def apply_h(v):
        return system.hessian_vec(x, np.asarray(v, dtype=float).reshape(-1), l)

    return solve_smallest(
        apply_h, x.size, k, seed=seed, v0=v0, precond=precond, maxiter=maxiter
    )
