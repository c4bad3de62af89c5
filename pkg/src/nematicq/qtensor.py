"""Pointwise algebra of traceless symmetric order tensors.

A tensor is stored as five independent components q = (q1, ..., q5) with

    Q = [[q1, q2, q3],
         [q2, q4, q5],
         [q3, q5, -q1 - q4]].

Every function here broadcasts over leading axes, so a whole field of
tensors is an array of shape (..., 5).  The squared Frobenius norm is the
quadratic form |Q|^2 = q^T G q whose matrix G couples q1 and q4; gradients
of scalar invariants are returned as plain partial derivatives with
respect to the five components.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NoNematicRoots, ShapeMismatch

__all__ = [
    "BulkParams",
    "BulkCriticalSet",
    "QTensor",
    "Phase",
    "to_matrix",
    "sym_components",
    "dual_components",
    "metric_apply",
    "frob2",
    "trq3",
    "biaxiality",
    "bulk_energy",
    "bulk_gradient",
    "bulk_energy_uniaxial",
    "bulk_energy_uniaxial_deriv",
    "uniaxial_components",
    "critical_points",
    "eig3",
    "eig_classify",
    "is_physical",
]

# Biaxiality convention: tensors with |Q|^2 below this are reported beta = 0.
ISO_NORM2_FLOOR = 1e-12

# Eigenvalue gap (relative to tensor scale) below which the closed-form
# eigenvector construction hands over to numpy's symmetric solver.
_DEGENERATE_GAP = 1e-6


def _check_last_axis(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape[-1:] != (5,):
        raise ShapeMismatch(f"expected trailing axis of length 5, got shape {q.shape}")
    return q


def to_matrix(q: np.ndarray) -> np.ndarray:
    """Map component vectors (..., 5) to matrices (..., 3, 3)."""
    q = _check_last_axis(q)
    m = np.empty(q.shape[:-1] + (3, 3), dtype=float)
    q1, q2, q3, q4, q5 = (q[..., k] for k in range(5))
    m[..., 0, 0] = q1
    m[..., 0, 1] = q2
    m[..., 0, 2] = q3
    m[..., 1, 0] = q2
    m[..., 1, 1] = q4
    m[..., 1, 2] = q5
    m[..., 2, 0] = q3
    m[..., 2, 1] = q5
    m[..., 2, 2] = -q1 - q4
    return m


def sym_components(m: np.ndarray) -> np.ndarray:
    """Extract (q1..q5) from traceless symmetric matrices (..., 3, 3)."""
    m = np.asarray(m, dtype=float)
    return np.stack(
        [m[..., 0, 0], m[..., 0, 1], m[..., 0, 2], m[..., 1, 1], m[..., 1, 2]], axis=-1
    )


def dual_components(t: np.ndarray) -> np.ndarray:
    """Contract matrices against the component basis: (T:E_1, ..., T:E_5).

    For a scalar invariant f(Q), df/dq_alpha = (df/dQ) : E_alpha where
    E_alpha = dQ/dq_alpha.  This is the map that turns a matrix-valued
    derivative into component partials; it is not the inverse of
    ``to_matrix``.
    """
    t = np.asarray(t, dtype=float)
    return np.stack(
        [
            t[..., 0, 0] - t[..., 2, 2],
            t[..., 0, 1] + t[..., 1, 0],
            t[..., 0, 2] + t[..., 2, 0],
            t[..., 1, 1] - t[..., 2, 2],
            t[..., 1, 2] + t[..., 2, 1],
        ],
        axis=-1,
    )


def metric_apply(q: np.ndarray) -> np.ndarray:
    """Apply the Frobenius metric G, so that |Q|^2 = q . metric_apply(q)."""
    q = _check_last_axis(q)
    out = np.empty_like(q)
    out[..., 0] = 2.0 * q[..., 0] + q[..., 3]
    out[..., 1] = 2.0 * q[..., 1]
    out[..., 2] = 2.0 * q[..., 2]
    out[..., 3] = q[..., 0] + 2.0 * q[..., 3]
    out[..., 4] = 2.0 * q[..., 4]
    return out


def frob2(q: np.ndarray) -> np.ndarray:
    """|Q|^2 = tr(Q^2), broadcast over leading axes."""
    q = _check_last_axis(q)
    q1, q2, q3, q4, q5 = (q[..., k] for k in range(5))
    return 2.0 * (q1 * q1 + q2 * q2 + q3 * q3 + q4 * q4 + q5 * q5 + q1 * q4)


def trq3(q: np.ndarray) -> np.ndarray:
    """tr(Q^3) = 3 det(Q) for traceless Q, broadcast over leading axes."""
    q = _check_last_axis(q)
    q1, q2, q3, q4, q5 = (q[..., k] for k in range(5))
    q6 = -q1 - q4
    det = (
        q1 * (q4 * q6 - q5 * q5)
        - q2 * (q2 * q6 - q3 * q5)
        + q3 * (q2 * q5 - q3 * q4)
    )
    return 3.0 * det


def biaxiality(q: np.ndarray) -> np.ndarray:
    """Biaxiality parameter beta = 1 - 6 tr(Q^3)^2 / tr(Q^2)^3 in [0, 1].

    beta = 0 exactly on uniaxial tensors and, by convention, on tensors
    with |Q|^2 below ``ISO_NORM2_FLOOR``; beta = 1 on maximally biaxial
    ones.  The result is clipped to [0, 1] to absorb rounding.
    """
    q = _check_last_axis(q)
    f2 = frob2(q)
    t3 = trq3(q)
    with np.errstate(divide="ignore", invalid="ignore"):
        beta = 1.0 - 6.0 * t3 * t3 / (f2 * f2 * f2)
    beta = np.where(f2 < ISO_NORM2_FLOOR, 0.0, beta)
    return np.clip(beta, 0.0, 1.0)


@dataclass(frozen=True)
class BulkParams:
    """Coefficients of the bulk density f_b(Q) = a/2 |Q|^2 - b/3 tr Q^3 + c/4 |Q|^4.

    ``a`` carries the temperature; optionally record the linear law
    a = thermal_slope * (T - t_star) so that critical temperatures can be
    reported.  b and c must be positive.
    """

    a: float
    b: float
    c: float
    thermal_slope: float | None = None
    t_star: float | None = None

    def __post_init__(self):
        for name in ("a", "b", "c"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ShapeMismatch(f"bulk coefficient {name} must be finite, got {v}")
        # b = c = 0 is allowed for quadratic-only diagnostics; negative
        # coefficients never are.
        if self.b < 0 or self.c < 0:
            raise ShapeMismatch(f"bulk coefficients need b, c >= 0, got b={self.b}, c={self.c}")

    @classmethod
    def at_temperature(
        cls, thermal_slope: float, temperature: float, t_star: float, b: float, c: float
    ) -> "BulkParams":
        """Build params with a = thermal_slope * (temperature - t_star)."""
        return cls(thermal_slope * (temperature - t_star), b, c, thermal_slope, t_star)


def bulk_energy(q: np.ndarray, p: BulkParams) -> np.ndarray:
    """Bulk density a/2 |Q|^2 - b/3 tr Q^3 + c/4 |Q|^4 per tensor."""
    f2 = frob2(q)
    return 0.5 * p.a * f2 - (p.b / 3.0) * trq3(q) + 0.25 * p.c * f2 * f2


def bulk_gradient(q: np.ndarray, p: BulkParams) -> np.ndarray:
    """Partials of the bulk density with respect to (q1..q5).

    Matrix form: T = a Q - b (Q^2 - |Q|^2/3 I) + c |Q|^2 Q, returned as
    the component contraction (T:E_1, ..., T:E_5).
    """
    q = _check_last_axis(q)
    m = to_matrix(q)
    f2 = frob2(q)[..., None, None]
    m2 = m @ m
    eye = np.eye(3)
    t = p.a * m - p.b * (m2 - (f2 / 3.0) * eye) + p.c * f2 * m
    return dual_components(t)


def uniaxial_components(s, n) -> np.ndarray:
    """Components of the uniaxial tensor s (n n^T - I/3) for unit director n."""
    n = np.asarray(n, dtype=float)
    s = np.asarray(s, dtype=float)
    m = s[..., None, None] * (n[..., :, None] * n[..., None, :] - np.eye(3) / 3.0)
    return sym_components(m)


def bulk_energy_uniaxial(s, p: BulkParams):
    """Bulk density restricted to uniaxial tensors of amplitude s."""
    s = np.asarray(s, dtype=float)
    return p.a * s * s / 3.0 - 2.0 * p.b * s**3 / 27.0 + p.c * s**4 / 9.0


def bulk_energy_uniaxial_deriv(s, p: BulkParams):
    """d/ds of the uniaxial bulk density: (2s/9)(2c s^2 - b s + 3a)."""
    s = np.asarray(s, dtype=float)
    return (2.0 * s / 9.0) * (2.0 * p.c * s * s - p.b * s + 3.0 * p.a)


@dataclass(frozen=True)
class BulkCriticalSet:
    """Critical amplitudes of the uniaxial bulk density and their stability.

    ``stability`` labels each of s_zero, s_minus, s_plus with one of
    "global_min", "local_min", "unstable", "marginal".  ``regime`` names
    the temperature window the coefficients sit in.  ``t_c`` (first-order
    transition) and ``t_ii`` (nematic spinodal) are populated when the
    linear temperature law is attached to the parameters.
    """

    params: BulkParams
    s_zero: float
    s_plus: float
    s_minus: float
    discriminant: float
    energies: dict = field(repr=False)
    stability: dict
    regime: str
    t_c: float | None = None
    t_ii: float | None = None


def critical_points(p: BulkParams) -> BulkCriticalSet:
    """Stationary amplitudes of f_b on the uniaxial slice.

    The nonzero stationary points solve 2c s^2 - b s + 3a = 0, so
    s = (b +- sqrt(b^2 - 24ac)) / (4c); s_plus is the root with the lower
    restricted energy.  Raises NoNematicRoots when b^2 < 24ac.  Each
    returned root is verified stationary to 10 significant digits.
    """
    a, b, c = p.a, p.b, p.c
    if b <= 0 or c <= 0:
        raise ShapeMismatch("critical_points needs strictly positive b and c")
    disc = b * b - 24.0 * a * c
    if disc < 0.0:
        raise NoNematicRoots(a, b, c)
    root = np.sqrt(disc)
    r_hi = (b + root) / (4.0 * c)
    r_lo = (b - root) / (4.0 * c)
    e_hi = float(bulk_energy_uniaxial(r_hi, p))
    e_lo = float(bulk_energy_uniaxial(r_lo, p))
    if e_hi <= e_lo:
        s_plus, s_minus = r_hi, r_lo
    else:
        s_plus, s_minus = r_lo, r_hi
    for s in (s_plus, s_minus):
        scale = abs(a) * abs(s) + b * s * s + c * abs(s) ** 3 + 1.0
        resid = abs(float(bulk_energy_uniaxial_deriv(s, p)))
        if resid > 1e-9 * scale:
            raise ShapeMismatch(
                f"stationarity check failed at s={s:g}: |f'(s)| = {resid:g}"
            )

    a_c = b * b / (27.0 * c)
    a_ii = b * b / (24.0 * c)
    if a < 0.0:
        regime = "deep_nematic"
        stability = {"s_zero": "unstable", "s_minus": "unstable", "s_plus": "global_min"}
    elif a == 0.0:
        regime = "supercooling_limit"
        stability = {"s_zero": "marginal", "s_minus": "marginal", "s_plus": "global_min"}
    elif a < a_c:
        regime = "nematic_global"
        stability = {"s_zero": "local_min", "s_minus": "unstable", "s_plus": "global_min"}
    elif a == a_c:
        regime = "coexistence"
        stability = {"s_zero": "global_min", "s_minus": "unstable", "s_plus": "global_min"}
    elif a < a_ii:
        regime = "isotropic_global"
        stability = {"s_zero": "global_min", "s_minus": "unstable", "s_plus": "local_min"}
    else:
        regime = "superheating_limit"
        stability = {"s_zero": "global_min", "s_minus": "marginal", "s_plus": "marginal"}

    t_c = t_ii = None
    if p.thermal_slope is not None and p.t_star is not None and p.thermal_slope > 0:
        t_c = a_c / p.thermal_slope + p.t_star
        t_ii = a_ii / p.thermal_slope + p.t_star

    energies = {
        "s_zero": 0.0,
        "s_plus": float(bulk_energy_uniaxial(s_plus, p)),
        "s_minus": float(bulk_energy_uniaxial(s_minus, p)),
    }
    return BulkCriticalSet(
        params=p,
        s_zero=0.0,
        s_plus=float(s_plus),
        s_minus=float(s_minus),
        discriminant=float(disc),
        energies=energies,
        stability=stability,
        regime=regime,
        t_c=t_c,
        t_ii=t_ii,
    )


def _eigvec_for(m: np.ndarray, lam: float) -> np.ndarray | None:
    """Null vector of (M - lam I) via the largest cross product of rows."""
    d = m - lam * np.eye(3)
    crosses = [
        np.cross(d[0], d[1]),
        np.cross(d[0], d[2]),
        np.cross(d[1], d[2]),
    ]
    norms = [np.linalg.norm(c) for c in crosses]
    k = int(np.argmax(norms))
    scale = np.linalg.norm(d, ord="fro")
    if norms[k] <= 1e-14 * max(scale * scale, 1e-30):
        return None
    return crosses[k] / norms[k]


def _fix_signs(v: np.ndarray) -> np.ndarray:
    """Deterministic sign convention: largest-magnitude entry positive."""
    k = int(np.argmax(np.abs(v)))
    return -v if v[k] < 0 else v


def eig3(q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of one tensor.

    Closed-form trigonometric eigenvalues; the eigenvector of the most
    isolated eigenvalue comes from row cross products, the remaining pair
    from the deflated 2x2 problem.  Near-degenerate spectra fall back to
    numpy's symmetric solver.
    """
    q = _check_last_axis(q)
    if q.ndim != 1:
        raise ShapeMismatch("eig3 handles one tensor; use eigvals3 for batches")
    f2 = float(frob2(q))
    if f2 < 1e-300:
        return np.zeros(3), np.eye(3)
    m = to_matrix(q)
    det = float(trq3(q)) / 3.0
    t = 2.0 * np.sqrt(f2 / 6.0)
    cos3t = np.clip(4.0 * det / t**3, -1.0, 1.0)
    theta = np.arccos(cos3t) / 3.0
    w = np.sort(t * np.cos(theta - 2.0 * np.pi * np.array([0.0, 1.0, 2.0]) / 3.0))

    scale = max(abs(w[0]), abs(w[2]))
    gaps = (w[1] - w[0], w[2] - w[1])
    if min(gaps) <= _DEGENERATE_GAP * scale:
        w_np, v_np = np.linalg.eigh(m)
        v_np = np.stack([_fix_signs(v_np[:, k]) for k in range(3)], axis=1)
        return w_np, v_np

    iso = 0 if gaps[0] >= gaps[1] else 2
    v_iso = _eigvec_for(m, w[iso])
    if v_iso is None:
        w_np, v_np = np.linalg.eigh(m)
        v_np = np.stack([_fix_signs(v_np[:, k]) for k in range(3)], axis=1)
        return w_np, v_np

    # Deflate onto the plane orthogonal to v_iso and solve the 2x2 block.
    k = int(np.argmin(np.abs(v_iso)))
    u = np.eye(3)[k] - v_iso[k] * v_iso
    u /= np.linalg.norm(u)
    wv = np.cross(v_iso, u)
    b11 = u @ m @ u
    b12 = u @ m @ wv
    b22 = wv @ m @ wv
    half = 0.5 * np.arctan2(2.0 * b12, b11 - b22)
    cth, sth = np.cos(half), np.sin(half)
    v_hi = cth * u + sth * wv
    v_lo = -sth * u + cth * wv
    lam_hi = b11 * cth * cth + 2.0 * b12 * cth * sth + b22 * sth * sth
    lam_lo = (b11 + b22) - lam_hi

    pairs = [(w[iso], v_iso), (lam_lo, v_lo), (lam_hi, v_hi)]
    pairs.sort(key=lambda pw: pw[0])
    w_out = np.array([pw[0] for pw in pairs])
    v_out = np.stack([_fix_signs(pw[1]) for pw in pairs], axis=1)
    return w_out, v_out


def is_physical(q: np.ndarray, margin: float = 0.0) -> bool:
    """True when all eigenvalues lie strictly inside (-1/3, 2/3)."""
    w, _ = eig3(np.asarray(q, dtype=float))
    return bool(w[0] > -1.0 / 3.0 + margin and w[2] < 2.0 / 3.0 - margin)


@dataclass(frozen=True)
class Phase:
    """Classification of a single tensor by eigenvalue degeneracy.

    ``kind`` is "isotropic", "uniaxial" or "biaxial".  For uniaxial
    tensors ``s`` is the scalar amplitude (positive prolate, negative
    oblate) and ``director`` the distinguished unit eigenvector.
    """

    kind: str
    eigenvalues: np.ndarray
    s: float | None = None
    director: np.ndarray | None = None
    physical: bool = True


def eig_classify(q: np.ndarray, tol: float = 1e-8) -> Phase:
    """Classify one tensor as isotropic, uniaxial(s, n) or biaxial.

    Eigenvalues closer than ``tol`` (absolute) count as equal.  A
    uniaxial tensor s (n n^T - I/3) has spectrum {2s/3, -s/3, -s/3}, so
    the distinct eigenvalue recovers s = 3/2 * lambda_distinct.
    """
    w, v = eig3(np.asarray(q, dtype=float))
    physical = bool(w[0] > -1.0 / 3.0 and w[2] < 2.0 / 3.0)
    lo, hi = w[1] - w[0], w[2] - w[1]
    if lo <= tol and hi <= tol:
        return Phase(kind="isotropic", eigenvalues=w, physical=physical)
    if lo <= tol:
        # bottom pair equal: distinct eigenvalue on top, prolate.
        return Phase(
            kind="uniaxial", eigenvalues=w, s=1.5 * w[2], director=v[:, 2], physical=physical
        )
    if hi <= tol:
        # top pair equal: distinct eigenvalue at the bottom, oblate.
        return Phase(
            kind="uniaxial", eigenvalues=w, s=1.5 * w[0], director=v[:, 0], physical=physical
        )
    return Phase(kind="biaxial", eigenvalues=w, physical=physical)


@dataclass(frozen=True)
class QTensor:
    """One traceless symmetric tensor held as its five components."""

    q1: float
    q2: float
    q3: float
    q4: float
    q5: float

    @classmethod
    def from_vector(cls, q) -> "QTensor":
        q = np.asarray(q, dtype=float)
        if q.shape != (5,):
            raise ShapeMismatch(f"expected 5 components, got shape {q.shape}")
        return cls(*(float(x) for x in q))

    @classmethod
    def from_matrix(cls, m, tol: float = 1e-10) -> "QTensor":
        m = np.asarray(m, dtype=float)
        if m.shape != (3, 3):
            raise ShapeMismatch(f"expected a 3x3 matrix, got shape {m.shape}")
        scale = max(1.0, float(np.abs(m).max()))
        if np.abs(m - m.T).max() > tol * scale or abs(np.trace(m)) > tol * scale:
            raise ShapeMismatch("matrix is not symmetric traceless within tolerance")
        return cls(m[0, 0], m[0, 1], m[0, 2], m[1, 1], m[1, 2])

    @classmethod
    def uniaxial(cls, s: float, n) -> "QTensor":
        n = np.asarray(n, dtype=float)
        n = n / np.linalg.norm(n)
        return cls.from_vector(uniaxial_components(s, n))

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.q1, self.q2, self.q3, self.q4, self.q5])

    @property
    def matrix(self) -> np.ndarray:
        return to_matrix(self.vector)

    def frob2(self) -> float:
        return float(frob2(self.vector))

    def trq3(self) -> float:
        return float(trq3(self.vector))

    def biaxiality(self) -> float:
        return float(biaxiality(self.vector))

    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        return eig3(self.vector)

    def classify(self, tol: float = 1e-8) -> Phase:
        return eig_classify(self.vector, tol)

    def is_physical(self, margin: float = 0.0) -> bool:
        return is_physical(self.vector, margin)
