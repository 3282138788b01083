import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import nnls as scipy_nnls

from altproj.errors import DomainError
from altproj.geometry import Cone, cone_distance, nnls, projection_angle_gap, sup_unit_inner, unit_sphere_samples

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)
vec2 = st.tuples(finite, finite).map(np.array)


def _ray_dist(g, v):
    t = max(float(v @ g) / float(g @ g), 0.0)
    return float(np.linalg.norm(v - t * g))


def face_oracle(G, v):
    """Distance to cone(G) by exhaustive enumeration of generator subsets."""
    best = float(np.linalg.norm(v))
    for k in range(1, G.shape[0] + 1):
        for face in combinations(range(G.shape[0]), k):
            F = G[list(face)].T
            lam = np.linalg.lstsq(F, v, rcond=None)[0]
            if np.all(lam >= -1e-12):
                best = min(best, float(np.linalg.norm(v - F @ lam)))
    return best


def cone2_oracle(g1, g2, v):
    """Closed-form distance to the 2-D cone generated by g1, g2 (pointed, angle < pi)."""
    M = np.column_stack([g1, g2])
    if abs(np.linalg.det(M)) > 1e-12:
        lam = np.linalg.solve(M, v)
        if np.all(lam >= 0):
            return 0.0
    return min(_ray_dist(g1, v), _ray_dist(g2, v))


class TestConeDistance:
    def test_orthogonal_ray(self):
        c = Cone.from_generators([(1, 1)])
        assert cone_distance(c, (1, -1)) == pytest.approx(math.sqrt(2), abs=1e-12)

    def test_trivial_cone(self):
        assert cone_distance(Cone.trivial(2), (3, 4)) == pytest.approx(5.0, abs=1e-12)

    def test_two_generators_against_grid(self):
        c = Cone.from_generators([(1, 0), (1, 1)])
        lam = np.arange(0, 3.0005, 2e-3)
        L1, L2 = np.meshgrid(lam, lam)
        pts = np.stack([L1 + L2, L2], axis=-1)
        grid = np.min(np.linalg.norm(pts - np.array([0, 1]), axis=-1))
        d = cone_distance(c, (0, 1))
        assert d == pytest.approx(1 / math.sqrt(2), abs=1e-12)
        assert abs(d - grid) < 2e-3

    def test_empty_cone_is_infinite(self):
        assert cone_distance(Cone.empty(2), (1, 0)) == math.inf

    def test_lineality(self):
        c = Cone.from_generators([], lineality=[(1, -1)], dim=2)
        assert cone_distance(c, (1, 1)) == pytest.approx(math.sqrt(2), abs=1e-12)
        assert cone_distance(c, (-2, 2)) < 1e-12

    def test_empty_and_trivial_are_distinct(self):
        assert Cone.empty(2).is_empty and not Cone.trivial(2).is_empty
        assert Cone.trivial(2).is_trivial and not Cone.empty(2).is_trivial

    @settings(max_examples=200, deadline=None)
    @given(vec2, vec2, vec2)
    def test_matches_closed_form_2d(self, g1, g2, v):
        n1, n2 = np.linalg.norm(g1), np.linalg.norm(g2)
        if min(n1, n2) < 1e-3 or max(n1, n2) > 2 or abs(g1[0] * g2[1] - g1[1] * g2[0]) < 1e-3 * n1 * n2:
            return
        c = Cone.from_generators([g1, g2])
        assert abs(cone_distance(c, v) - cone2_oracle(g1, g2, v)) < 1e-6

    @settings(max_examples=100, deadline=None)
    @given(st.integers(2, 5), st.integers(1, 6), st.integers(0, 2**31 - 1))
    def test_zero_iff_reconstructible(self, n, m, seed):
        r = np.random.default_rng(seed)
        G = r.standard_normal((m, n))
        c = Cone.from_generators(G)
        inside = r.random(m) @ G
        assert cone_distance(c, inside) < 1e-9
        v = r.standard_normal(n)
        d = cone_distance(c, v)
        assert d == pytest.approx(face_oracle(G, v), abs=1e-9)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_one_lipschitz(self, seed):
        r = np.random.default_rng(seed)
        c = Cone.from_generators(r.standard_normal((3, 3)), lineality=r.standard_normal((1, 3)))
        v1, v2 = r.standard_normal((2, 3))
        assert abs(cone_distance(c, v1) - cone_distance(c, v2)) <= np.linalg.norm(v1 - v2) + 1e-12

    def test_project_many_matches_project(self, rng):
        c = Cone.from_generators(rng.standard_normal((4, 3)))
        W = rng.standard_normal((20, 3))
        P = c.project_many(W)
        for w, p in zip(W, P):
            np.testing.assert_allclose(p, c.project(w), atol=1e-10)

    def test_nonfinite_rejected(self):
        with pytest.raises(DomainError):
            cone_distance(Cone.trivial(2), (np.nan, 0))


class TestNNLS:
    @pytest.mark.parametrize("seed", range(10))
    def test_against_scipy(self, seed):
        r = np.random.default_rng(seed)
        A = r.standard_normal((6, 4))
        b = r.standard_normal(6)
        x, resid = nnls(A, b)
        xs, _ = scipy_nnls(A, b)
        assert np.all(x >= 0)
        # KKT: dual residual nonpositive, zero on the support
        w = A.T @ resid
        assert np.all(w <= 1e-10)
        assert np.all(np.abs(w[x > 0]) <= 1e-10)
        # never worse than the reference solver's own solution
        assert np.linalg.norm(resid) <= np.linalg.norm(A @ xs - b) + 1e-10

    def test_wide_problem_beats_reference(self):
        # a wide instance where the reference solver's returned x is suboptimal
        r = np.random.default_rng(5663218)
        G = r.standard_normal((4, 3))
        r.random(4)
        v = r.standard_normal(3)
        x, resid = nnls(G.T, v)
        assert np.linalg.norm(resid) == pytest.approx(0.5658204772592257, abs=1e-12)
        assert np.linalg.norm(resid) == pytest.approx(face_oracle(G, v), abs=1e-12)


class TestUnitSphereSamples:
    def test_single_ray(self):
        out = unit_sphere_samples(Cone.from_generators([(2, 0)]), k=5)
        assert len(out) == 1
        np.testing.assert_allclose(out[0], (1, 0))

    def test_wedge(self):
        r2 = 1 / math.sqrt(2)
        out = np.array(unit_sphere_samples(Cone.from_generators([(1, 1), (-1, 1)]), k=1))
        for target in [(r2, r2), (-r2, r2), (0, 1)]:
            assert np.min(np.linalg.norm(out - target, axis=1)) < 1e-12

    def test_lineality_line(self):
        r2 = 1 / math.sqrt(2)
        out = np.array(unit_sphere_samples(Cone.from_generators([], lineality=[(1, -1)], dim=2), k=8))
        assert len(out) == 2
        for target in [(r2, -r2), (-r2, r2)]:
            assert np.min(np.linalg.norm(out - target, axis=1)) < 1e-12

    def test_trivial_and_empty(self):
        assert unit_sphere_samples(Cone.trivial(2)) == []
        assert unit_sphere_samples(Cone.empty(2)) == []

    def test_deterministic_and_unit(self, rng):
        c = Cone.from_generators(rng.standard_normal((3, 3)))
        a, b = unit_sphere_samples(c, 6, seed=7), unit_sphere_samples(c, 6, seed=7)
        np.testing.assert_array_equal(np.array(a), np.array(b))
        for u in a:
            assert abs(np.linalg.norm(u) - 1) < 1e-12
            assert cone_distance(c, u) < 1e-9


class TestSupUnitInner:
    def test_exact_against_samples(self, rng):
        c = Cone.from_generators([(1, 0), (1, 1)])
        W = rng.standard_normal((30, 2))
        vals = sup_unit_inner(c, W)[0]
        th = np.linspace(0, math.pi / 4, 20001)
        U = np.column_stack([np.cos(th), np.sin(th)])
        np.testing.assert_allclose(vals, np.max(W @ U.T, axis=1), atol=1e-6)


class TestAngleGap:
    def test_identical(self):
        assert projection_angle_gap((1, 0), (1, 0)) == pytest.approx(0.0, abs=1e-15)

    def test_orthogonal(self):
        # ||x - y||/||y|| = sqrt(2) and z = 0, so the gap is sqrt(2) - 1
        assert projection_angle_gap((1, 0), (0, 1)) == pytest.approx(math.sqrt(2) - 1, abs=1e-15)

    def test_zero_rejected(self):
        with pytest.raises(DomainError):
            projection_angle_gap((0, 0), (1, 0))
        with pytest.raises(DomainError):
            projection_angle_gap((1, 0), (0, 0))

    @settings(max_examples=300, deadline=None)
    @given(st.integers(2, 5).flatmap(lambda n: st.tuples(st.lists(finite, min_size=n, max_size=n), st.lists(finite, min_size=n, max_size=n))))
    def test_nonnegative(self, xy):
        x, y = map(np.array, xy)
        if np.linalg.norm(x) < 1e-6 or np.linalg.norm(y) < 1e-6:
            return
        assert projection_angle_gap(x, y) >= -1e-12
