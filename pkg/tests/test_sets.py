import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from altproj import sets as S
from altproj.errors import DomainError
from altproj.geometry import Cone, cone_distance, unit_sphere_samples

from conftest import R2, ex215, ex216, two_lines

pt2 = st.tuples(st.floats(-2, 2), st.floats(-2, 2)).map(np.array)

CONVEX = {
    "ball": S.Ball((0.3, -0.2), 1.0),
    "halfspace": S.Halfspace((1, 2), 0.5),
    "polygon": S.ConvexPolygon([(0, 0), (2, 0), (2, 1), (0.5, 1.5)]),
    "line": S.line((0, 1), (1, 1)),
    "segment": S.segment((0, 0), (1, 2)),
}
NONCONVEX = {
    "sawtooth": ex215()[0],
    "diagonal": ex215()[1],
    "rays-A": ex216()[0],
    "rays-B": ex216()[1],
    "segments": S.segment_union([[(0, 0), (1, 0)], [(1, 0), (1, 1)], [(-1, 1), (0, 2)]]),
    "union": S.Union([S.Ball((2, 0), 0.5), S.line((0, 0), (0, 1))]),
}
ALL = {**CONVEX, **NONCONVEX}


def same_cone(c1: Cone, c2: Cone, tol=1e-9):
    for a, b in ((c1, c2), (c2, c1)):
        for u in unit_sphere_samples(a, 8):
            if cone_distance(b, u) > tol:
                return False
    return c1.is_trivial == c2.is_trivial


class TestDistance:
    def test_ball(self):
        assert S.distance(S.Ball((0, 0), 1), (3, 0)) == pytest.approx(2.0, abs=1e-15)

    def test_diagonal(self):
        assert S.distance(S.diagonal_line(), (1, 0)) == pytest.approx(R2, abs=1e-15)

    def test_sawtooth_against_dense_parameters(self):
        A = S.sawtooth_graph(40)
        t = np.linspace(0, 1, 1_000_001)
        P = np.column_stack([t, S.sawtooth_f(t, 40)])
        x = np.array([1.5, 1.5])
        oracle = np.min(np.linalg.norm(P - x, axis=1))
        assert abs(A.distance(x) - oracle) < 1e-6

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            S.distance(S.Ball((0, 0), 1), (1, 2, 3))


class TestProject:
    def test_halfspace(self):
        res = S.project(S.Halfspace((1, 0), 0), (2, 5))
        np.testing.assert_allclose(res.points, [[0, 5]])
        assert res.distance == pytest.approx(2.0)

    def test_ray_union_against_grid(self):
        A = ex216()[0]
        x = np.array([0.0, 1.0])
        res = A.project(x)
        t = np.linspace(0, 3, 300_001)
        pts = np.vstack([np.column_stack([t, 0 * t]), np.column_stack([t, -t]) * R2 * math.sqrt(2)])
        d = np.linalg.norm(pts - x, axis=1)
        assert res.distance == pytest.approx(d.min(), abs=1e-9)
        np.testing.assert_allclose(res.points, [[0, 0]], atol=1e-12)

    def test_ray_union_genuine_tie(self):
        # the bisector of the two branches of B projects to both branches
        B = ex216()[1]
        phi = math.pi / 8
        x = np.array([math.cos(phi), math.sin(phi)])
        res = B.project(x)
        assert len(res.points) == 2
        np.testing.assert_allclose(np.linalg.norm(res.points - x, axis=1), res.distance, atol=1e-12)

    @pytest.mark.parametrize("n", [2, 3, 5, 10])
    def test_sawtooth_vertex_preimage(self, n):
        A = S.sawtooth_graph(40)
        s = 2.0**-n
        for t in (3 * s / 4, s, 1.5 * s):
            pts = A.project((t, t)).points
            assert np.min(np.linalg.norm(pts - [s, 0], axis=1)) < 1e-12 * s

    def test_result_sorted_and_deduplicated(self):
        B = S.ray_union((0, 0), [(1, 0), (0, 1), (-1, 0), (0, -1)])
        res = B.project((0, 0))
        assert len(res.points) == 1
        res = S.segment_union([[(0, 0), (1, 0)], [(1, 0), (1, 1)]]).project((0.5, 0.5))
        assert len(res.points) == 2
        assert [tuple(p) for p in res.points] == sorted(tuple(p) for p in res.points)

    @pytest.mark.parametrize("name", sorted(ALL))
    @settings(max_examples=40, deadline=None)
    @given(x=pt2)
    def test_idempotence_and_distances(self, name, x):
        s = ALL[name]
        res = s.project(x)
        assert res.distance == pytest.approx(s.distance(x), abs=1e-12)
        for p in res.points:
            assert abs(np.linalg.norm(x - p) - res.distance) <= 1e-10
            again = s.project(p)
            assert again.distance <= 1e-12 * (1 + np.linalg.norm(p))
            assert np.min(np.linalg.norm(again.points - p, axis=1)) <= 1e-12 * (1 + np.linalg.norm(p))
        if len(res.points) > 1:
            gaps = np.linalg.norm(res.points[:, None] - res.points[None], axis=-1)
            assert np.min(gaps[np.triu_indices(len(res.points), 1)]) > 1e-8 * res.distance

    @pytest.mark.parametrize("name", sorted(CONVEX))
    @settings(max_examples=40, deadline=None)
    @given(x=pt2, y=pt2)
    def test_convex_nonexpansive(self, name, x, y):
        s = CONVEX[name]
        px, py = s.project(x), s.project(y)
        assert len(px.points) == 1 and len(py.points) == 1
        assert np.linalg.norm(px.points[0] - py.points[0]) <= np.linalg.norm(x - y) + 1e-12


class TestSawtooth:
    @pytest.mark.parametrize("n", range(0, 40))
    def test_construction(self, n):
        assert S.sawtooth_f(2.0**-n, 40) == 0.0
        if n + 2 <= 41:
            assert S.sawtooth_f(3 * 2.0 ** -(n + 2), 40) == pytest.approx(-(2.0 ** -(n + 2)), rel=1e-14)

    def test_origin_in_set(self):
        assert S.sawtooth_graph(40).contains((0, 0))


class TestProximalNormalCone:
    @pytest.mark.parametrize("n", [1, 3, 6, 12])
    def test_sawtooth_vertex(self, n):
        c = S.proximal_normal_cone(S.sawtooth_graph(40), (2.0**-n, 0))
        assert same_cone(c, Cone.from_generators([(1, 1), (-1, 1)]), tol=1e-9)

    def test_diagonal_interior(self):
        c = S.proximal_normal_cone(S.diagonal_line(), (0.3, 0.3))
        assert same_cone(c, Cone.from_generators([], lineality=[(1, -1)], dim=2))

    def test_ball_interior_is_trivial(self):
        assert S.proximal_normal_cone(S.Ball((0, 0), 1), (0.2, 0.1)).is_trivial

    def test_ball_boundary(self):
        assert same_cone(S.proximal_normal_cone(S.Ball((0, 0), 1), (0, 1)), Cone.from_generators([(0, 1)]))

    def test_polygon_vertex(self):
        P = S.ConvexPolygon([(0, 0), (1, 0), (0, 1)])
        assert same_cone(P.proximal_normal_cone((0, 0)), Cone.from_generators([(-1, 0), (0, -1)]))

    def test_ray_union_origin(self):
        A = ex216()[0]
        c = A.proximal_normal_cone((0, 0))
        # proximal normals at the apex form the cone polar to both branches
        expected = Cone.from_generators([(-1, -1), (0, 1)])
        assert same_cone(c, expected)

    def test_nonmember_rejected(self):
        with pytest.raises(DomainError):
            S.proximal_normal_cone(S.diagonal_line(), (1, 0))

    @pytest.mark.parametrize("name", sorted(ALL))
    def test_frechet_inequality(self, name, rng):
        s = ALL[name]
        base = s.sample(np.zeros(2), 1.5, 40, 10, rng)
        for a in base[:: max(1, len(base) // 12)]:
            c = s.proximal_normal_cone(a)
            us = unit_sphere_samples(c, 4)
            # the limit radius must sit below the local feature size (sawtooth teeth shrink toward 0)
            na = float(np.linalg.norm(a))
            X = s.sample(a, 1e-5 * (min(1.0, na) if na > 0 else 1.0), 40, 20, rng)
            D = X - a
            nrm = np.linalg.norm(D, axis=1)
            D = D[nrm > 1e-12 * (1 + np.linalg.norm(a))] / nrm[nrm > 1e-12 * (1 + np.linalg.norm(a)), None]
            for u in us:
                if len(D):
                    assert np.max(D @ u) <= 1e-3


class TestRestrictedCone:
    def test_same_line_is_trivial(self):
        L = S.line((0, 0), (1, 2))
        c = S.restricted_proximal_normal_cone(L, L, (0.5, 1.0))
        assert c.is_trivial and not c.is_empty

    @pytest.mark.parametrize("n", [2, 4, 7])
    def test_sawtooth_vs_diagonal(self, n):
        A, B = ex215()
        a = np.array([2.0**-n, 0.0])
        c = S.restricted_proximal_normal_cone(A, B, a, n_grid=2000)
        expected = Cone.from_generators([(-1, 3), (1, 3)])
        # sampled preimages lie inside the exact cone; its edges are reached up to grid resolution
        for u in unit_sphere_samples(c, 8):
            assert cone_distance(expected, u) <= 1e-9
        for u in unit_sphere_samples(expected, 8):
            assert cone_distance(c, u) <= 1e-3

    def test_empty_when_no_preimage(self):
        # points of A far from B: no b in B projects onto them
        A = S.segment((0, 0), (4, 0))
        B = S.segment((0, 1), (1, 1))
        c = S.restricted_proximal_normal_cone(A, B, (3, 0), radius=1.0)
        assert c.is_empty

    @pytest.mark.parametrize("name,a", [("sawtooth", (0.25, 0)), ("sawtooth", (0.375, -0.125)), ("polygon", (2, 1)), ("rays-A", (0, 0))])
    def test_whole_space_matches_proximal(self, name, a):
        s = ALL[name]
        box = S.ConvexPolygon([(-5, -5), (5, -5), (5, 5), (-5, 5)])
        c = S.restricted_proximal_normal_cone(s, box, a, radius=1.0)
        assert same_cone(c, s.proximal_normal_cone(a), tol=1e-3)

    @pytest.mark.parametrize("pair", ["ex215", "ex216", "lines60"])
    def test_inclusion_in_proximal(self, pair, rng):
        A, B = {"ex215": ex215, "ex216": ex216, "lines60": lambda: two_lines(60)}[pair]()
        for a in A.sample(np.zeros(2), 0.2, 12, 4, rng):
            r = S.restricted_proximal_normal_cone(A, B, a)
            p = A.proximal_normal_cone(a)
            for u in unit_sphere_samples(r, 6):
                assert cone_distance(p, u) <= 1e-9


class TestTransform:
    def test_similarity_preserves_distance(self, rng):
        th = 0.7
        M = 2 * np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
        shift = np.array([0.3, -1.0])
        for s in ALL.values():
            T = s.transformed(M, shift)
            for x in rng.standard_normal((5, 2)):
                assert T.distance(M @ x + shift) == pytest.approx(2 * s.distance(x), abs=1e-12)
