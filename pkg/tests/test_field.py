"""Domain construction, boundary data, seeds and square symmetry."""

import numpy as np
import pytest

from nematicq.energy import free_energy
from nematicq.errors import ShapeMismatch
from nematicq.field import Domain, QField, seed_field, square_symmetry_orbit, symmetrize
from nematicq.qtensor import BulkParams, eig_classify, to_matrix
from nematicq.systems import make_rng

BULK = BulkParams(-1.0 / 3.0, 1.0, 1.0)


def make_domain(n=6, lambda2=5.0, **kw):
    return Domain(nx=n, ny=n, lambda2=lambda2, bulk=BULK, **kw)


def test_domain_validation():
    with pytest.raises(ShapeMismatch):
        Domain(nx=3, ny=8, lambda2=1.0, bulk=BULK)
    with pytest.raises(ShapeMismatch):
        Domain(nx=8, ny=8, lambda2=-1.0, bulk=BULK)
    with pytest.raises(ShapeMismatch):
        Domain(nx=8, ny=8, lambda2=1.0, bulk=BULK, boundary="weird")


def test_grid_geometry():
    d = Domain(nx=5, ny=9, lambda2=1.0, bulk=BULK, boundary="zero")
    assert d.hx == pytest.approx(1.0 / 6.0)
    assert d.hy == pytest.approx(1.0 / 10.0)
    assert d.xs[0] == pytest.approx(d.hx) and d.xs[-1] == pytest.approx(1.0 - d.hx)
    assert d.n_dof == 5 * 5 * 9


def test_s_plus_for_deep_nematic_bulk():
    assert make_domain().s_plus == pytest.approx(1.0, abs=1e-14)


def test_tangent_ring_structure():
    d = make_domain(n=6)
    ring = d.ring
    s = d.s_plus
    # bottom edge: director along x
    ph = eig_classify(ring[3, 0])
    assert ph.kind == "uniaxial"
    assert ph.s == pytest.approx(s, abs=1e-12)
    assert abs(ph.director @ np.array([1.0, 0.0, 0.0])) == pytest.approx(1.0, abs=1e-12)
    # left edge: director along y
    ph = eig_classify(ring[0, 3])
    assert abs(ph.director @ np.array([0.0, 1.0, 0.0])) == pytest.approx(1.0, abs=1e-12)
    # corners: traceless average of the adjacent edge tensors
    corner = ring[0, 0]
    assert corner == pytest.approx(0.5 * (ring[3, 0] + ring[0, 3]))
    assert abs(np.trace(to_matrix(corner))) < 1e-15
    # interior of the frame array is zero
    assert not ring[1:-1, 1:-1].any()


def test_planar_ring_structure():
    d = make_domain(n=6, boundary="planar")
    ring = d.ring
    s = d.s_plus
    # bottom edge: in-plane traceless with the long axis along x and Q33 = 0
    Q = to_matrix(ring[3, 0])
    assert Q == pytest.approx(np.diag([s / 2.0, -s / 2.0, 0.0]))
    # left edge: same data rotated by 90 degrees
    Q = to_matrix(ring[0, 3])
    assert Q == pytest.approx(np.diag([-s / 2.0, s / 2.0, 0.0]))
    # opposite edges cancel exactly at the corners
    for ij in ((0, 0), (0, -1), (-1, 0), (-1, -1)):
        assert not ring[ij].any()
    assert not ring[1:-1, 1:-1].any()


def test_boundary_callable_and_zero():
    qc = np.array([0.1, 0.02, 0.0, -0.04, 0.0])

    def bc(x, y):
        return np.broadcast_to(qc, x.shape + (5,)).copy()

    d = make_domain(boundary=bc)
    assert d.ring[0, 3] == pytest.approx(qc)
    assert d.ring[2, 0] == pytest.approx(qc)
    z = make_domain(boundary="zero")
    assert not z.ring.any()


def test_extend_and_check_values():
    d = make_domain()
    vals = np.zeros(d.shape)
    ext = d.extend(vals)
    assert ext.shape == (d.nx + 2, d.ny + 2, 5)
    assert np.array_equal(ext[1:-1, 1:-1], vals)
    with pytest.raises(ShapeMismatch):
        d.check_values(np.zeros((3, 3, 5)))
    bad = np.zeros(d.shape)
    bad[0, 0, 0] = np.nan
    with pytest.raises(ShapeMismatch):
        d.check_values(bad)
    # flat vectors are accepted and reshaped
    assert d.check_values(np.zeros(d.n_dof)).shape == d.shape


def test_qfield_flat_roundtrip():
    d = make_domain()
    gen = make_rng(3, "test:field")
    f = QField(d, gen.normal(size=d.shape))
    g = QField.from_flat(d, f.flat)
    assert np.array_equal(f.values, g.values)


class TestSeeds:
    def test_isotropic(self):
        f = seed_field(make_domain(), "isotropic")
        assert not f.values.any()

    def test_diagonal_components(self):
        d = make_domain()
        f = seed_field(d, "diagonal(d1)")
        s = d.s_plus
        assert f.values[2, 3] == pytest.approx([s / 6, s / 2, 0.0, s / 6, 0.0])
        g = seed_field(d, "diagonal(d2)")
        assert g.values[2, 3] == pytest.approx([s / 6, -s / 2, 0.0, s / 6, 0.0])

    def test_rotated_matches_named_edge(self):
        d = make_domain(n=8)
        f = seed_field(d, "rotated(bottom)")
        # near the bottom edge the director is nearly along x
        ph = eig_classify(f.values[4, 0])
        assert ph.kind == "uniaxial"
        assert abs(ph.director[0]) > 0.9
        g = seed_field(d, "rotated(left)")
        ph = eig_classify(g.values[0, 4])
        assert abs(ph.director[1]) > 0.9

    def test_random_reproducible(self):
        d = make_domain()
        a = seed_field(d, "random(0.3)", seed=7)
        b = seed_field(d, "random(0.3)", seed=7)
        c = seed_field(d, "random(0.3)", seed=8)
        assert np.array_equal(a.values, b.values)
        assert not np.array_equal(a.values, c.values)
        assert a.values.std() == pytest.approx(0.3, rel=0.1)

    def test_unknown_spec_rejected(self):
        with pytest.raises(ShapeMismatch):
            seed_field(make_domain(), "vortex(3)")


class TestSquareSymmetry:
    def test_orbit_preserves_energy(self):
        d = make_domain(n=6, lambda2=3.0)
        gen = make_rng(11, "test:symmetry")
        vals = 0.3 * gen.normal(size=d.shape)
        e0 = free_energy(d, vals)
        for img in square_symmetry_orbit(vals):
            assert free_energy(d, img) == pytest.approx(e0, rel=1e-12)

    def test_orbit_preserves_energy_with_l2_l3(self):
        d = Domain(nx=6, ny=6, lambda2=3.0, bulk=BULK, l2=0.7, l3=0.4)
        gen = make_rng(12, "test:symmetry")
        vals = 0.3 * gen.normal(size=d.shape)
        e0 = free_energy(d, vals)
        for img in square_symmetry_orbit(vals):
            assert free_energy(d, img) == pytest.approx(e0, rel=1e-12)

    def test_symmetrize_is_projection(self):
        d = make_domain(n=7)
        gen = make_rng(13, "test:symmetry")
        f = QField(d, gen.normal(size=d.shape))
        p1 = symmetrize(f)
        p2 = symmetrize(p1)
        assert np.allclose(p1.values, p2.values, atol=1e-14)

    def test_symmetric_field_fixed(self):
        d = make_domain(n=6)
        f = symmetrize(seed_field(d, "random(0.2)", seed=1))
        for img in square_symmetry_orbit(f.values):
            assert np.allclose(img, f.values, atol=1e-13)

    def test_requires_square_grid(self):
        with pytest.raises(ShapeMismatch):
            square_symmetry_orbit(np.zeros((4, 6, 5)))
