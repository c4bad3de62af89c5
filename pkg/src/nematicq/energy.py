"""Discrete free energy of a tensor field and its exact gradient.

The energy on the unit square is

    F[Q] = sum over edges   (w/2) |Q_a - Q_b|_F^2          (one-constant term)
         + sum over cells   hx hy ( l2/2 (div Q)^2 + l3/2 mixed term )
         + sum over nodes   hx hy lambda2 f_b(Q)

where the one-constant sum runs over grid edges with at least one
interior endpoint (w = hy/hx for x-edges, hx/hy for y-edges; boundary
values enter through the Dirichlet ring), the optional l2/l3 densities
are evaluated from cell-centered first differences, and the bulk sum
runs over interior nodes.  Edges joining two boundary nodes would only
add constants and are omitted.

The gradient is the plain vector of partial derivatives with respect to
the five components per node; the Frobenius metric appears only inside
the densities.
"""

from __future__ import annotations

from functools import cached_property, lru_cache

import numpy as np
import scipy.sparse as sp

from .field import Domain, QField
from .qtensor import bulk_energy, bulk_gradient, frob2, metric_apply, to_matrix
from .systems import System

__all__ = [
    "free_energy",
    "gradient",
    "LdGSystem",
    "elastic_matrix",
    "elastic_shift_vector",
    "metric_matrix",
]

_G5 = np.array(
    [
        [2.0, 0.0, 0.0, 1.0, 0.0],
        [0.0, 2.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 2.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 2.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 2.0],
    ]
)


def _cell_density_23(u: np.ndarray, l2: float, l3: float) -> float:
    """Literal l2/l3 elastic density at one cell from u = (dQ/dx, dQ/dy)."""
    ax = to_matrix(u[:5])
    ay = to_matrix(u[5:])
    div = ax[0, :] + ay[1, :]
    d2 = 0.5 * l2 * float(div @ div)
    d3 = 0.5 * l3 * float(ax[0] @ ax[0] + 2.0 * (ax[1] @ ay[0]) + ay[1] @ ay[1])
    return d2 + d3


@lru_cache(maxsize=16)
def _cell_form(l2: float, l3: float) -> np.ndarray:
    """10x10 matrix W with density = 1/2 u^T W u (by polarization)."""
    w = np.zeros((10, 10))
    eye = np.eye(10)
    for a in range(10):
        w[a, a] = 2.0 * _cell_density_23(eye[a], l2, l3)
    for a in range(10):
        for b in range(a + 1, 10):
            cross = (
                _cell_density_23(eye[a] + eye[b], l2, l3)
                - 0.5 * w[a, a]
                - 0.5 * w[b, b]
            )
            w[a, b] = w[b, a] = cross
    return w


def _cell_gradients(domain: Domain, ext: np.ndarray) -> np.ndarray:
    """Cell-centered (dQ/dx, dQ/dy), shape (nx+1, ny+1, 10)."""
    dx = (ext[1:, :, :] - ext[:-1, :, :]) / domain.hx
    dy = (ext[:, 1:, :] - ext[:, :-1, :]) / domain.hy
    ax = 0.5 * (dx[:, 1:, :] + dx[:, :-1, :])
    ay = 0.5 * (dy[1:, :, :] + dy[:-1, :, :])
    return np.concatenate([ax, ay], axis=-1)


def _energy_from_ext(domain: Domain, ext: np.ndarray, include_bulk: bool = True) -> float:
    wx = domain.hy / domain.hx
    wy = domain.hx / domain.hy
    dx = ext[1:, :, :] - ext[:-1, :, :]
    dy = ext[:, 1:, :] - ext[:, :-1, :]
    e = 0.5 * wx * float(np.sum(frob2(dx[:, 1:-1, :])))
    e += 0.5 * wy * float(np.sum(frob2(dy[1:-1, :, :])))
    if domain.l2 != 0.0 or domain.l3 != 0.0:
        u = _cell_gradients(domain, ext)
        w = _cell_form(domain.l2, domain.l3)
        e += 0.5 * domain.hx * domain.hy * float(np.einsum("ijk,kl,ijl->", u, w, u))
    if include_bulk:
        interior = ext[1:-1, 1:-1, :]
        e += (
            domain.lambda2
            * domain.hx
            * domain.hy
            * float(np.sum(bulk_energy(interior, domain.bulk)))
        )
    return e


def _elastic_grad_from_ext(domain: Domain, ext: np.ndarray) -> np.ndarray:
    """Partials of the elastic terms with respect to interior nodes."""
    wx = domain.hy / domain.hx
    wy = domain.hx / domain.hy
    v = ext[1:-1, 1:-1, :]
    lap = wx * (2.0 * v - ext[:-2, 1:-1, :] - ext[2:, 1:-1, :])
    lap += wy * (2.0 * v - ext[1:-1, :-2, :] - ext[1:-1, 2:, :])
    g = metric_apply(lap)
    if domain.l2 != 0.0 or domain.l3 != 0.0:
        u = _cell_gradients(domain, ext)
        w = _cell_form(domain.l2, domain.l3)
        s = domain.hx * domain.hy * (u @ w)
        sx = s[..., :5] / (2.0 * domain.hx)
        sy = s[..., 5:] / (2.0 * domain.hy)
        acc = np.zeros_like(ext)
        acc[1:, :-1, :] += sx
        acc[1:, 1:, :] += sx
        acc[:-1, :-1, :] -= sx
        acc[:-1, 1:, :] -= sx
        acc[:-1, 1:, :] += sy
        acc[1:, 1:, :] += sy
        acc[:-1, :-1, :] -= sy
        acc[1:, :-1, :] -= sy
        g = g + acc[1:-1, 1:-1, :]
    return g


def free_energy(domain: Domain, values: np.ndarray) -> float:
    """Total discrete free energy of the field (boundary data included)."""
    return _energy_from_ext(domain, domain.extend(values))


def gradient(domain: Domain, values: np.ndarray) -> np.ndarray:
    """Exact partial derivatives dF/dq per interior node, shape (nx, ny, 5)."""
    ext = domain.extend(values)
    g = _elastic_grad_from_ext(domain, ext)
    interior = ext[1:-1, 1:-1, :]
    g = g + domain.lambda2 * domain.hx * domain.hy * bulk_gradient(interior, domain.bulk)
    return g


def metric_matrix(domain: Domain) -> sp.csr_matrix:
    """Block-diagonal Frobenius metric on the flat vector: kron(I_nodes, G)."""
    return sp.kron(sp.identity(domain.nx * domain.ny, format="csr"), _G5, format="csr")


def elastic_matrix(domain: Domain) -> sp.csr_matrix:
    """Sparse one-constant elastic operator K with F_1[q] = 1/2 q^T K q + c^T q + const.

    Only the one-constant term is assembled; with l2 = l3 = 0 this is the
    full homogeneous elastic operator.  Node-major flat ordering matches
    ``QField.flat``.
    """
    wx = domain.hy / domain.hx
    wy = domain.hx / domain.hy

    def lap1d(n: int) -> sp.csr_matrix:
        return sp.diags([-np.ones(n - 1), 2.0 * np.ones(n), -np.ones(n - 1)], [-1, 0, 1])

    a = wx * sp.kron(lap1d(domain.nx), sp.identity(domain.ny)) + wy * sp.kron(
        sp.identity(domain.nx), lap1d(domain.ny)
    )
    return sp.kron(a, _G5, format="csr")


def elastic_apply(domain: Domain, flat: np.ndarray) -> np.ndarray:
    """Homogeneous elastic operator action (all elastic terms), matrix-free."""
    values = flat.reshape(domain.shape)
    ext = np.zeros((domain.nx + 2, domain.ny + 2, 5))
    ext[1:-1, 1:-1] = values
    return _elastic_grad_from_ext(domain, ext).reshape(-1)


def elastic_shift_vector(domain: Domain) -> np.ndarray:
    """Affine part c of the elastic gradient, from the boundary ring."""
    ext = domain.ring.copy()
    return _elastic_grad_from_ext(domain, ext).reshape(-1)


class LdGSystem(System):
    """Flat-vector energy interface over one domain."""

    def __init__(self, domain: Domain):
        self.domain = domain
        self.n = domain.n_dof

    def energy(self, x: np.ndarray) -> float:
        return free_energy(self.domain, x.reshape(self.domain.shape))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return gradient(self.domain, x.reshape(self.domain.shape)).reshape(-1)

    def field(self, x: np.ndarray) -> QField:
        return QField.from_flat(self.domain, x)

    @cached_property
    def elastic_csr(self) -> sp.csr_matrix:
        return elastic_matrix(self.domain)

    @cached_property
    def shift_vector(self) -> np.ndarray:
        return elastic_shift_vector(self.domain)

    def preconditioner(self, shift: float | None = None):
        """SPD approximate inverse of the Hessian for eigen/saddle solvers.

        Factorizes K + shift * kron(I, G) where K is the sparse
        one-constant operator; the default shift scales with the bulk
        coefficients so the factor stays positive definite.  Factors are
        cached per shift.
        """
        from scipy.sparse.linalg import LinearOperator, splu

        d = self.domain
        if shift is None:
            p = d.bulk
            shift = d.hx * d.hy * d.lambda2 * (abs(p.a) + p.b + p.c)
        cache = self.__dict__.setdefault("_precond_cache", {})
        if shift not in cache:
            mat = (self.elastic_csr + shift * metric_matrix(d)).tocsc()
            lu = splu(mat)
            cache[shift] = LinearOperator(
                (self.n, self.n), matvec=lambda v: lu.solve(np.asarray(v))
            )
        return cache[shift]
