"""Saddle dynamics, verified records, and landscape assembly on known
stationary sets."""

import numpy as np
import pytest

from nematicq.energy import LdGSystem
from nematicq.errors import NoConvergence, ValidationError, WrongIndex
from nematicq.field import Domain, seed_field
from nematicq.hisd import (
    LandscapeOptions,
    SaddleOptions,
    SaddleSearchState,
    _records_match,
    build_landscape,
    classify_stationary,
    downward_search,
    find_saddle,
    gram_schmidt,
    hisd_step,
    make_record,
    upward_search,
)
from nematicq.minimize import MinimizeOptions, minimize
from nematicq.qtensor import BulkParams
from nematicq.systems import make_rng
from nematicq.toys import DiagQuadratic, DoubleWell2D, Quartic2D

BULK = BulkParams(-1.0, 1.0, 1.0)


def quartic_record(point, k_hint=0):
    return make_record(Quartic2D(), np.array(point, dtype=float), k_hint=k_hint)


class TestStep:
    def test_k0_matches_plain_gradient_descent(self):
        sy = DoubleWell2D()
        beta = 0.05
        state = SaddleSearchState(np.array([0.3, 0.7]), np.zeros((2, 0)), 0)
        manual = np.array([0.3, 0.7])
        for _ in range(50):
            state = hisd_step(sy, state, beta, beta)
            manual = manual - beta * sy.gradient(manual)
            assert np.array_equal(state.x, manual)

    def test_fixed_point_at_exact_saddle(self):
        sy = Quartic2D()
        state = SaddleSearchState(np.array([0.0, 1.0]), np.eye(2)[:, :1], 1)
        out = hisd_step(sy, state, 0.1, 0.1)
        assert np.array_equal(out.x, state.x)
        assert np.allclose(out.v, state.v, atol=1e-12)

    def test_step_size_validation(self):
        sy = Quartic2D()
        state = SaddleSearchState(np.zeros(2), np.zeros((2, 0)), 0)
        with pytest.raises(ValidationError):
            hisd_step(sy, state, 0.0, 0.1)
        with pytest.raises(ValidationError):
            hisd_step(sy, state, 0.1, -1.0)

    def test_directions_stay_orthonormal(self):
        gen = make_rng(7, "test:hisd:orth")
        sy = DiagQuadratic(np.array([-3.0, -1.0, 0.5, 2.0, 4.0]))
        v = gram_schmidt(gen.normal(size=(5, 2)))
        state = SaddleSearchState(gen.normal(size=5), v, 2)
        for _ in range(100):
            state = hisd_step(sy, state, 0.05, 0.05)
            gram = state.v.T @ state.v
            assert np.abs(gram - np.eye(2)).max() < 1e-10

    def test_gram_schmidt_degenerate_raises(self):
        v = np.ones((4, 2))
        with pytest.raises(NoConvergence):
            gram_schmidt(v)

    def test_gram_schmidt_orthonormal_and_ordered(self):
        gen = make_rng(3, "test:hisd:gs")
        a = gen.normal(size=(20, 4))
        q = gram_schmidt(a)
        assert np.abs(q.T @ q - np.eye(4)).max() < 1e-12
        # first column keeps its direction
        assert q[:, 0] @ a[:, 0] > 0


class TestFindSaddle:
    def test_index1_transition_state(self):
        rec = find_saddle(Quartic2D(), 1, np.array([0.2, 0.8]))
        assert np.abs(rec.field - [0.0, 1.0]).max() < 1e-6
        assert abs(rec.energy - 1.0) < 1e-8
        assert rec.morse_index == 1
        assert rec.lambda_spectrum[0] < 0 < rec.lambda_spectrum[1]
        assert rec.grad_inf < 1e-8

    def test_index2_top(self):
        rec = find_saddle(Quartic2D(), 2, np.array([0.3, -0.25]))
        assert np.abs(rec.field - [0.0, 0.0]).max() < 1e-6
        assert abs(rec.energy - 2.0) < 1e-8
        assert rec.morse_index == 2
        assert rec.lambda_spectrum.shape == (2,)
        assert np.all(rec.lambda_spectrum < 0)

    def test_wrong_index_carries_verified_record(self):
        # descent from (eps, 0) stays on the x-axis and lands on the
        # index-1 point (1, 0), not a minimum
        with pytest.raises(WrongIndex) as info:
            find_saddle(Quartic2D(), 0, np.array([1e-2, 0.0]))
        err = info.value
        assert err.wanted == 0 and err.found == 1
        assert err.record is not None
        assert err.record.morse_index == 1
        assert np.abs(err.record.field - [1.0, 0.0]).max() < 1e-6

    def test_record_is_fixed_point_of_search(self):
        rec = find_saddle(Quartic2D(), 1, np.array([0.2, 0.8]))
        again = find_saddle(Quartic2D(), 1, rec.field)
        assert np.array_equal(again.field, rec.field)
        assert again.energy == rec.energy

    def test_max_iters_raises_no_convergence(self):
        opts = SaddleOptions(max_iters=5)
        with pytest.raises(NoConvergence) as info:
            find_saddle(Quartic2D(), 1, np.array([0.4, 0.6]), opts=opts)
        assert info.value.iterations == 5

    def test_index_range_validation(self):
        with pytest.raises(ValidationError):
            find_saddle(Quartic2D(), -1, np.zeros(2))
        with pytest.raises(ValidationError):
            find_saddle(Quartic2D(), 3, np.zeros(2))

    def test_quadratic_origin_all_indices(self):
        sy = DiagQuadratic(np.array([-2.0, 1.0, 3.0, 5.0]))
        rec = find_saddle(sy, 1, np.full(4, 0.8))
        assert np.abs(rec.field).max() < 1e-7
        assert rec.morse_index == 1
        assert np.allclose(rec.lambda_spectrum, [-2.0, 1.0, 3.0], atol=1e-6)

    def test_refresh_and_precond_reach_same_point(self):
        d = np.array([-2.0, 1.0, 3.0, 5.0])
        sy = DiagQuadratic(d)
        x0 = np.full(4, 0.8)
        base = find_saddle(sy, 1, x0)
        refreshed = find_saddle(sy, 1, x0, opts=SaddleOptions(refresh_every=5))
        pre = find_saddle(sy, 1, x0, opts=SaddleOptions(precond=lambda g: g / np.abs(d)))
        for rec in (refreshed, pre):
            assert rec.morse_index == 1
            assert np.abs(rec.field - base.field).max() < 1e-7

    def test_spectrum_length_is_index_plus_two_capped(self):
        assert quartic_record((1.0, 1.0)).lambda_spectrum.shape == (2,)
        assert quartic_record((0.0, 1.0), k_hint=1).lambda_spectrum.shape == (2,)
        sy = DiagQuadratic(np.array([-2.0, -1.0, 1.0, 3.0, 5.0]))
        rec = find_saddle(sy, 2, np.full(5, 0.5))
        assert rec.lambda_spectrum.shape == (4,)
        assert np.allclose(rec.lambda_spectrum, [-2.0, -1.0, 1.0, 3.0], atol=1e-6)


class TestDirectionalSearches:
    def test_downward_from_top(self):
        top = quartic_record((0.0, 0.0), k_hint=2)
        errs = []
        level1 = downward_search(Quartic2D(), top, 1, errors_out=errs)
        assert len(level1) == 2 and not errs
        ys = sorted(rec.field[1] for rec in level1)
        assert np.abs(np.array(ys) - [-1.0, 1.0]).max() < 1e-6
        assert all(abs(rec.field[0]) < 1e-6 and rec.morse_index == 1 for rec in level1)

        kept = downward_search(Quartic2D(), top, 0, errors_out=errs)
        assert len(kept) == 2 and not errs
        xs = sorted(rec.field[0] for rec in kept)
        assert np.abs(np.array(xs) - [-1.0, 1.0]).max() < 1e-6
        # descent pinned to the x-axis lands on index-1 points, kept as such
        assert all(rec.morse_index == 1 for rec in kept)

    def test_downward_index_validation(self):
        top = quartic_record((0.0, 0.0), k_hint=2)
        with pytest.raises(ValidationError):
            downward_search(Quartic2D(), top, 2)
        with pytest.raises(ValidationError):
            downward_search(Quartic2D(), top, 1, eps=-0.1)

    def test_upward_from_minimum(self):
        child = quartic_record((1.0, 1.0))
        errs = []
        hits = upward_search(Quartic2D(), child, 1, errors_out=errs)
        # one branch ascends to an adjacent index-1 point; the other
        # diverges outward and is dropped
        assert len(hits) == 1 and len(errs) == 1
        assert isinstance(errs[0][1], NoConvergence)
        assert np.abs(np.sort(np.abs(hits[0].field)) - [0.0, 1.0]).max() < 1e-6
        assert hits[0].morse_index == 1
        assert abs(hits[0].energy - 1.0) < 1e-8

    def test_upward_from_index1_to_top(self):
        child = quartic_record((0.0, 1.0), k_hint=1)
        hits = upward_search(Quartic2D(), child, 2)
        assert len(hits) == 1
        assert np.abs(hits[0].field - [0.0, 0.0]).max() < 1e-6
        assert hits[0].morse_index == 2

    def test_upward_index_validation(self):
        child = quartic_record((1.0, 1.0))
        with pytest.raises(ValidationError):
            upward_search(Quartic2D(), child, 0)


class TestLandscape:
    def toy_graph(self, **kw):
        seed = quartic_record((0.0, 0.0), k_hint=2)
        return build_landscape(Quartic2D(), seed, LandscapeOptions(**kw))

    def test_toy_recovers_all_nine_points(self):
        graph = self.toy_graph()
        assert not graph.truncated
        assert [rec.id for rec in graph.nodes] == list(range(9))
        by_index = graph.by_index()
        assert sorted(by_index) == [0, 1, 2]
        assert len(by_index[0]) == 4 and len(by_index[1]) == 4 and len(by_index[2]) == 1

        known = {
            0: Quartic2D.MINIMA,
            1: Quartic2D.SADDLES,
            2: [Quartic2D.TOP],
        }
        for index, points in known.items():
            found = sorted(tuple(np.round(r.field, 6)) for r in by_index[index])
            assert found == sorted(points)
        for rec in graph.nodes:
            assert abs(rec.energy - rec.morse_index) < 1e-8

    def test_toy_edges_descend_one_level(self):
        graph = self.toy_graph()
        assert len(graph.edges) == 12
        for edge in graph.edges:
            assert edge.kind == "downward"
            pair = (graph.node(edge.source).morse_index, graph.node(edge.target).morse_index)
            assert pair in {(2, 1), (1, 0)}
        # the top reaches all four index-1 points; each of those reaches two minima
        top_targets = {e.target for e in graph.edges if e.source == 0}
        assert top_targets == {rec.id for rec in graph.by_index()[1]}
        for rec in graph.by_index()[1]:
            assert len([e for e in graph.edges if e.source == rec.id]) == 2

    def test_dedup_pairwise_audit(self):
        graph = self.toy_graph()
        opts = LandscapeOptions()
        for a in graph.nodes:
            for b in graph.nodes:
                same = _records_match(a, b, opts)
                assert same == _records_match(b, a, opts)
                assert same == (a.id == b.id)

    def test_budget_truncates_without_raising(self):
        graph = self.toy_graph(max_searches=2)
        assert graph.truncated
        assert graph.searches == 2
        assert len(graph.nodes) == 3  # seed plus the first two finds

        tiny = self.toy_graph(max_nodes=1)
        assert tiny.truncated and len(tiny.nodes) == 1

    def test_upward_sweep_opt_in(self):
        seed = quartic_record((1.0, 1.0))
        graph = build_landscape(Quartic2D(), seed, LandscapeOptions(max_index=2))
        assert not graph.truncated
        indices = {rec.morse_index for rec in graph.nodes}
        assert indices == {0, 1, 2}
        assert len(graph.nodes) == 9
        kinds = {edge.kind for edge in graph.edges}
        assert kinds == {"downward", "upward"}
        for edge in graph.edges:
            src = graph.node(edge.source).morse_index
            dst = graph.node(edge.target).morse_index
            assert dst > src if edge.kind == "upward" else dst < src


class TestTensorField:
    def make_system(self, n=5):
        d = Domain(nx=n, ny=n, lambda2=5.0, bulk=BULK)
        return d, LdGSystem(d)

    def test_minimizer_record_index_matches_dense_oracle(self):
        d, sy = self.make_system(5)
        res = minimize(sy, seed_field(d, "random(0.4)", seed=11).flat, MinimizeOptions(tol_grad=1e-10))
        rec = make_record(sy, res.x, tol_grad=1e-8)

        n = sy.n
        eye = np.eye(n)
        h = np.column_stack([sy.hessian_vec(res.x, eye[:, j]) for j in range(n)])
        h = 0.5 * (h + h.T)
        eigs = np.linalg.eigh(h)[0]
        _, _, rep = classify_stationary(sy, res.x, tol_grad=1e-8)
        assert rec.morse_index == int(np.sum(eigs < -rep.tol_eig))

    def test_saddle_search_returns_perturbed_minimizer(self):
        d, sy = self.make_system(5)
        res = minimize(sy, seed_field(d, "random(0.4)", seed=11).flat, MinimizeOptions(tol_grad=1e-10))
        gen = make_rng(2, "test:hisd:perturb")
        x0 = res.x + 1e-3 * gen.normal(size=sy.n)
        rec = find_saddle(sy, 0, x0, opts=SaddleOptions(tol_grad=1e-9))
        assert rec.morse_index == 0
        assert np.abs(rec.field - res.x).max() < 1e-6
