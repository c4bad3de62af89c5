"""Minimal interface shared by every energy the solvers can drive.

A system exposes a scalar energy and its gradient on flat float vectors.
Minimization, gradient flow, the string method and the saddle searches
are all written against this interface, so discretized tensor fields and
low-dimensional toy potentials run through identical code paths.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["System", "make_rng", "hessian_vec"]

_MASK64 = (1 << 64) - 1


def make_rng(seed: int, stream: str = "") -> np.random.Generator:
    """Counter-based generator keyed by (seed, stream name).

    Distinct stream names give independent, reproducible streams for the
    same user seed; results do not depend on draw order elsewhere.
    """
    h = int.from_bytes(hashlib.sha256(stream.encode()).digest()[:8], "little")
    key = np.array([seed & _MASK64, h], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def default_probe_length(x: np.ndarray, v: np.ndarray) -> float:
    """Default finite-difference length: 1e-4 times the field scale per unit v."""
    nv = float(np.linalg.norm(v))
    if nv == 0.0:
        return 1e-4
    return 1e-4 * (1.0 + float(np.linalg.norm(x))) / nv


class System:
    """Base class: subclasses implement ``energy`` and ``gradient``.

    ``n`` is the number of degrees of freedom; vectors passed in and out
    are flat float64 arrays of that length.
    """

    n: int = 0

    def energy(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def gradient(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hessian_vec(self, x: np.ndarray, v: np.ndarray, l: float | None = None) -> np.ndarray:
        """Hessian action approximated by a central difference of the gradient:

            H(x) v ~ (grad(x + l v) - grad(x - l v)) / (2 l)

        Exact (independent of l) whenever the gradient is affine in x.
        """
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        if not np.any(v):
            return np.zeros_like(v)
        if l is None:
            l = default_probe_length(x, v)
        return (self.gradient(x + l * v) - self.gradient(x - l * v)) / (2.0 * l)


def hessian_vec(system: System, x: np.ndarray, v: np.ndarray, l: float | None = None) -> np.ndarray:
    """Functional form of ``System.hessian_vec`` for callers holding a system."""
    return system.hessian_vec(x, v, l)
