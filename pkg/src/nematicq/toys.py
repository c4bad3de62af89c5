"""Low-dimensional analytic potentials driven by the same solver stack.

These exercise every path-search and saddle-search code path with known
stationary sets, so they double as ground truth in tests and give the
CLI a cheap demonstration mode.
"""

from __future__ import annotations

import numpy as np

from .systems import System

__all__ = ["Quartic2D", "DoubleWell2D", "DiagQuadratic"]


class Quartic2D(System):
    """E(x, y) = (x^2 - 1)^2 + (y^2 - 1)^2.

    Nine stationary points: four minima (+-1, +-1) at energy 0, four
    index-1 saddles (0, +-1), (+-1, 0) at energy 1, and the index-2
    maximum-like saddle (0, 0) at energy 2.
    """

    n = 2

    MINIMA = [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)]
    SADDLES = [(0.0, -1.0), (0.0, 1.0), (-1.0, 0.0), (1.0, 0.0)]
    TOP = (0.0, 0.0)

    def energy(self, x: np.ndarray) -> float:
        return float((x[0] ** 2 - 1.0) ** 2 + (x[1] ** 2 - 1.0) ** 2)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return np.array(
            [4.0 * x[0] * (x[0] ** 2 - 1.0), 4.0 * x[1] * (x[1] ** 2 - 1.0)]
        )


class DoubleWell2D(System):
    """E(x, y) = (x^2 - 1)^2 + y^2.

    Two minima (+-1, 0) at energy 0 joined by the minimal path along the
    x-axis through the index-1 transition state (0, 0) with barrier 1.
    """

    n = 2

    def energy(self, x: np.ndarray) -> float:
        return float((x[0] ** 2 - 1.0) ** 2 + x[1] ** 2)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return np.array([4.0 * x[0] * (x[0] ** 2 - 1.0), 2.0 * x[1]])


class DiagQuadratic(System):
    """E(x) = 1/2 x^T diag(d) x; Hessian spectrum known exactly."""

    def __init__(self, diag):
        self.diag = np.asarray(diag, dtype=float)
        self.n = self.diag.size

    def energy(self, x: np.ndarray) -> float:
        return 0.5 * float(x @ (self.diag * x))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.diag * x
