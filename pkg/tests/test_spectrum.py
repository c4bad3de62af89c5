"""Eigensolver contracts: dense oracles, known spectra, determinism."""

import numpy as np
import pytest

from nematicq.energy import LdGSystem, elastic_matrix, metric_matrix
from nematicq.errors import ShapeMismatch
from nematicq.field import Domain
from nematicq.qtensor import BulkParams
from nematicq.spectrum import operator_scale, smallest_eigs, solve_smallest
from nematicq.systems import make_rng
from nematicq.toys import DiagQuadratic, Quartic2D

BULK = BulkParams(-1.0 / 3.0, 1.0, 1.0)


def test_known_spectrum_diag_small_dense_path():
    sy = DiagQuadratic(np.arange(1.0, 41.0))
    rep = smallest_eigs(sy, np.zeros(40), k=5)
    assert rep.eigenvalues == pytest.approx(np.arange(1.0, 6.0), abs=1e-10)
    assert rep.morse_index == 0


def test_known_spectrum_diag_lobpcg_path():
    n = 400
    sy = DiagQuadratic(np.arange(1.0, n + 1.0))
    rep = smallest_eigs(sy, np.zeros(n), k=4, seed=3)
    assert rep.eigenvalues == pytest.approx(np.arange(1.0, 5.0), abs=1e-7)
    assert np.abs(rep.eigenvectors.T @ rep.eigenvectors - np.eye(4)).max() < 1e-8
    assert rep.residuals.max() < 1e-6 * rep.scale


def test_negative_spectrum_counted():
    diag = np.concatenate([[-3.0, -1.0], np.arange(1.0, 199.0)])
    sy = DiagQuadratic(diag)
    rep = smallest_eigs(sy, np.zeros(sy.n), k=4, seed=1)
    assert rep.eigenvalues[:2] == pytest.approx([-3.0, -1.0], abs=1e-7)
    assert rep.morse_index == 2
    assert not rep.stable


def test_operator_scale_power_iterations():
    diag = np.linspace(-7.0, 5.0, 300)
    sy = DiagQuadratic(diag)
    scale = operator_scale(lambda v: sy.gradient(v), 300, iters=10, seed=0)
    assert scale == pytest.approx(7.0, rel=0.05)


def test_k_validation():
    sy = DiagQuadratic(np.ones(10))
    with pytest.raises(ShapeMismatch):
        smallest_eigs(sy, np.zeros(10), k=0)
    with pytest.raises(ShapeMismatch):
        smallest_eigs(sy, np.zeros(10), k=31)
    with pytest.raises(ShapeMismatch):
        solve_smallest(lambda v: v, 3, 5)


def test_determinism_same_seed():
    n = 300
    sy = DiagQuadratic(np.arange(1.0, n + 1.0))
    r1 = smallest_eigs(sy, np.zeros(n), k=3, seed=9)
    r2 = smallest_eigs(sy, np.zeros(n), k=3, seed=9)
    assert np.array_equal(r1.eigenvalues, r2.eigenvalues)
    assert np.array_equal(r1.eigenvectors, r2.eigenvectors)


def test_quartic_hessians():
    sy = Quartic2D()
    rep = smallest_eigs(sy, np.array([0.0, 0.0]), k=2)
    assert rep.eigenvalues == pytest.approx([-4.0, -4.0], rel=1e-6)
    assert rep.morse_index == 2
    rep = smallest_eigs(sy, np.array([1.0, 0.0]), k=2)
    assert rep.eigenvalues == pytest.approx([-4.0, 8.0], rel=1e-6)
    assert rep.morse_index == 1
    rep = smallest_eigs(sy, np.array([1.0, 1.0]), k=2)
    assert rep.morse_index == 0 and rep.stable


class TestLdGSpectrum:
    def test_quadratic_only_matches_dense_oracle_8x8(self):
        """Exact Hessian is K + a lambda2 hx hy G; compare lobpcg to eigh."""
        d = Domain(nx=8, ny=8, lambda2=2.0, bulk=BulkParams(0.7, 0.0, 0.0), boundary="zero")
        sy = LdGSystem(d)
        h_exact = (
            elastic_matrix(d) + d.bulk.a * d.lambda2 * d.hx * d.hy * metric_matrix(d)
        ).toarray()
        w_ref = np.linalg.eigvalsh(h_exact)
        x = np.zeros(sy.n)
        rep = smallest_eigs(sy, x, k=6, seed=2)
        assert rep.eigenvalues == pytest.approx(w_ref[:6], abs=1e-8)
        assert rep.residuals.max() < 1e-6 * rep.scale
        assert np.abs(rep.eigenvectors.T @ rep.eigenvectors - np.eye(6)).max() < 1e-8

    def test_nonlinear_field_matches_dense_fd_oracle(self):
        d = Domain(nx=5, ny=5, lambda2=4.0, bulk=BULK)
        sy = LdGSystem(d)
        gen = make_rng(31, "test:spectrum")
        x = 0.3 * gen.normal(size=sy.n)
        delta = 1e-5
        eye = np.eye(sy.n)
        cols = [
            (sy.gradient(x + delta * eye[:, j]) - sy.gradient(x - delta * eye[:, j]))
            / (2 * delta)
            for j in range(sy.n)
        ]
        hd = 0.5 * (np.column_stack(cols) + np.column_stack(cols).T)
        w_ref = np.linalg.eigvalsh(hd)
        rep = smallest_eigs(sy, x, k=4, seed=5)
        scale = max(1.0, np.abs(w_ref).max())
        assert np.abs(rep.eigenvalues - w_ref[:4]).max() < 1e-5 * scale

    def test_preconditioned_run_on_16x16(self):
        d = Domain(nx=16, ny=16, lambda2=5.0, bulk=BULK)
        sy = LdGSystem(d)
        x = np.zeros(sy.n)
        rep = smallest_eigs(sy, x, k=3, seed=4)
        assert rep.residuals.max() < 1e-6 * rep.scale
        rep2 = smallest_eigs(sy, x, k=3, seed=4, precond=None)
        assert rep.eigenvalues == pytest.approx(rep2.eigenvalues, abs=1e-6 * rep.scale)
