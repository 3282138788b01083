"""
Closed-set oracles: membership, distance, multi-valued projection, sampling,
and proximal normal cones.

Kinds
-----
affine-subspace, halfspace, ball, convex-polygon (2-D), segment, ray,
segment-union, ray-union, sawtooth-graph, diagonal-line, finite-union.

Segments, rays and their unions share one vectorized representation
(:class:`PiecewiseLinearSet`): piece ``i`` is ``{P0[i] + t D[i] : 0 <= t <= T[i]}``
with ``T[i] = inf`` for rays and ``D[i] = 0`` for isolated points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import Cone, as_point, complement_basis, orth_basis, unit_sphere_samples

MEMBER_TOL = 1e-9
TIE_TOL = 1e-9
DEDUP_TOL = 1e-8
FLOOR = 1e-15
# ties never exceed this absolute band, so every returned point is within it of the distance
TIE_CAP = 1e-10
VERIFY_SCALES = (1e-4, 1e-6)


@dataclass
class ProjectionResult:
    points: np.ndarray  # shape (k, n), sorted lexicographically
    distance: float

    @property
    def first(self) -> np.ndarray:
        return self.points[0]


def _tie_band(best: float, x: np.ndarray) -> float:
    # relative to the distance: an absolute 1e-9 swallows sub-nanometre teeth
    return min(TIE_TOL * best, TIE_CAP) + FLOOR * (1.0 + float(np.linalg.norm(x)))


def _finalize(x: np.ndarray, cand: np.ndarray, dists: np.ndarray) -> ProjectionResult:
    """Keep all candidates tying the best distance, dedupe, sort lexicographically."""
    best = float(np.min(dists))
    tie = _tie_band(best, x)
    pts = cand[dists <= best + tie]
    order = np.lexsort(pts.T[::-1])
    pts = pts[order]
    gap = DEDUP_TOL * best + FLOOR * (1.0 + float(np.linalg.norm(x)))
    kept: list[np.ndarray] = []
    for p in pts:
        if all(np.linalg.norm(p - q) > gap for q in kept):
            kept.append(p)
    return ProjectionResult(np.array(kept), best)


def projects_to(s: "SetOracle", x: np.ndarray, a: np.ndarray) -> bool:
    """Whether ``a`` (a point of ``s``) is a nearest point of ``s`` to ``x``."""
    d = s.distance(x)
    r = float(np.linalg.norm(x - a))
    return r - d <= _tie_band(d, x)


class SetOracle:
    """Base class for closed subsets of R^dim."""

    kind: str = "abstract"
    dim: int
    convex: bool = False

    def _pt(self, x) -> np.ndarray:
        return as_point(x, self.dim)

    def distance(self, x) -> float:
        return self.project(x).distance

    def project(self, x) -> ProjectionResult:
        raise NotImplementedError

    def contains(self, x, tol: float = MEMBER_TOL) -> bool:
        return self.distance(x) <= tol

    def proximal_normal_cone(self, a) -> Cone:
        raise NotImplementedError

    def sample(self, center, radius: float, n_grid: int = 200, n_random: int = 0, rng=None) -> np.ndarray:
        """Points of the set inside the closed ball ``B(center, radius)``."""
        raise NotImplementedError

    def ray_hits(self, origin, direction, smax: float) -> np.ndarray:
        """Parameters ``s in [0, smax]`` with ``origin + s*direction`` in the set (sampled)."""
        o, u = self._pt(origin), self._pt(direction)
        s = np.linspace(0.0, smax, 65)[1:]
        pts = o + s[:, None] * u
        keep = np.array([self.distance(p) <= MEMBER_TOL for p in pts], dtype=bool)
        return s[keep]

    def transformed(self, matrix, shift) -> "SetOracle":
        """Image under the similarity ``x -> matrix @ x + shift``."""
        raise NotImplementedError

    def _require_member(self, a) -> np.ndarray:
        a = self._pt(a)
        if not self.contains(a):
            raise DomainError(f"point {a} is not in the {self.kind} set (distance {self.distance(a):.3g})")
        return a

    def __repr__(self) -> str:
        return f"<{type(self).__name__} kind={self.kind} dim={self.dim}>"


# ---------------------------------------------------------------------------
# convex kinds


class _ConvexBody(SetOracle):
    """Convex sets with nonempty interior; sampled by projecting a lattice."""

    convex = True

    def _project_one(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def project(self, x) -> ProjectionResult:
        x = self._pt(x)
        p = self._project_one(x)
        return ProjectionResult(p[None, :], float(np.linalg.norm(x - p)))

    def sample(self, center, radius, n_grid=200, n_random=0, rng=None):
        c = self._pt(center)
        pts = [_lattice(c, radius, n_grid, self.dim)]
        if n_random:
            rng = rng if rng is not None else np.random.default_rng(0)
            pts.append(_ball_uniform(rng, c, radius, n_random, self.dim))
        Z = np.vstack(pts)
        out = []
        for z in Z:
            p = self._project_one(z)
            if np.linalg.norm(p - c) <= radius:
                out.append(p)
            if np.linalg.norm(p - z) == 0.0:
                continue
        return np.array(out).reshape(-1, self.dim)


def _lattice(c: np.ndarray, radius: float, n: int, dim: int) -> np.ndarray:
    if n <= 0:
        return np.zeros((0, dim))
    if dim == 1:
        return c + np.linspace(-radius, radius, n)[:, None]
    if dim == 2:
        k = max(2, int(np.ceil(np.sqrt(n * 4 / np.pi))))
        g = np.linspace(-radius, radius, k)
        X, Y = np.meshgrid(g, g)
        Z = np.column_stack([X.ravel(), Y.ravel()])
        Z = Z[np.linalg.norm(Z, axis=1) <= radius]
        return c + Z
    rng = np.random.default_rng(12345 + dim)
    return _ball_uniform(rng, c, radius, n, dim)


def _ball_uniform(rng, c, radius, n, dim):
    g = rng.standard_normal((n, dim))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.random(n) ** (1.0 / dim)
    return c + g * r[:, None]


class AffineSubspace(SetOracle):
    """``point + span(directions)``; zero directions gives a single point."""

    kind = "affine-subspace"
    convex = True

    def __init__(self, point, directions=()):
        self.point = as_point(point)
        self.dim = self.point.size
        self.basis = orth_basis(np.asarray(directions, dtype=float).reshape(-1, self.dim), self.dim)
        self._cone = Cone(np.zeros((0, self.dim)), complement_basis(self.basis, self.dim), self.dim)

    def _project_one(self, x):
        Q = self.basis
        return self.point + Q.T @ (Q @ (x - self.point)) if Q.shape[0] else self.point.copy()

    def project(self, x):
        x = self._pt(x)
        p = self._project_one(x)
        return ProjectionResult(p[None, :], float(np.linalg.norm(x - p)))

    def proximal_normal_cone(self, a):
        self._require_member(a)
        return self._cone

    def sample(self, center, radius, n_grid=200, n_random=0, rng=None):
        c = self._pt(center)
        foot = self._project_one(c)
        h = float(np.linalg.norm(c - foot))
        if h > radius:
            return np.zeros((0, self.dim))
        r = np.sqrt(max(radius**2 - h**2, 0.0))
        k = self.basis.shape[0]
        if k == 0:
            return foot[None, :]
        if k == 1:
            t = np.linspace(-r, r, max(n_grid, 2))
            if n_random:
                rng = rng if rng is not None else np.random.default_rng(0)
                t = np.concatenate([t, rng.uniform(-r, r, n_random)])
            return foot + t[:, None] * self.basis[0]
        coords = _lattice(np.zeros(k), r, n_grid, k)
        if n_random:
            rng = rng if rng is not None else np.random.default_rng(0)
            coords = np.vstack([coords, _ball_uniform(rng, np.zeros(k), r, n_random, k)])
        return foot + coords @ self.basis

    def ray_hits(self, origin, direction, smax):
        o, u = self._pt(origin), self._pt(direction)
        Q = self.basis
        perp = lambda v: v - (Q.T @ (Q @ v) if Q.shape[0] else 0.0)
        po, pu = perp(o - self.point), perp(u)
        if np.linalg.norm(pu) < 1e-14:
            if np.linalg.norm(po) <= MEMBER_TOL:
                return np.linspace(0.0, smax, 9)[1:]
            return np.zeros(0)
        s = -float(po @ pu) / float(pu @ pu)
        if 0 <= s <= smax and np.linalg.norm(po + s * pu) <= MEMBER_TOL:
            return np.array([s])
        return np.zeros(0)

    def transformed(self, matrix, shift):
        M = np.asarray(matrix, dtype=float)
        return AffineSubspace(M @ self.point + shift, self.basis @ M.T)


class Halfspace(_ConvexBody):
    """``{x : <normal, x> <= offset}``."""

    kind = "halfspace"

    def __init__(self, normal, offset: float):
        self.normal = as_point(normal)
        self.dim = self.normal.size
        if np.linalg.norm(self.normal) == 0:
            raise DomainError("halfspace normal must be nonzero")
        self.offset = float(offset)

    def _project_one(self, x):
        n = self.normal
        ex = float(n @ x) - self.offset
        return x - max(ex, 0.0) / float(n @ n) * n

    def proximal_normal_cone(self, a):
        a = self._require_member(a)
        n = self.normal
        if float(n @ a) - self.offset < -MEMBER_TOL * np.linalg.norm(n):
            return Cone.trivial(self.dim)
        return Cone.from_generators(n[None, :], dim=self.dim)

    def transformed(self, matrix, shift):
        M = np.asarray(matrix, dtype=float)
        # <n, M^{-1}(y - s)> <= b  <=>  <M^{-T} n, y> <= b + <M^{-T} n, s>
        n2 = np.linalg.solve(M.T, self.normal)
        return Halfspace(n2, self.offset + float(n2 @ shift))


class Ball(_ConvexBody):
    kind = "ball"

    def __init__(self, center, radius: float):
        self.center = as_point(center)
        self.dim = self.center.size
        if radius <= 0:
            raise DomainError("ball radius must be positive")
        self.radius = float(radius)

    def _project_one(self, x):
        v = x - self.center
        r = float(np.linalg.norm(v))
        return x.copy() if r <= self.radius else self.center + v * (self.radius / r)

    def proximal_normal_cone(self, a):
        a = self._require_member(a)
        v = a - self.center
        if np.linalg.norm(v) < self.radius * (1 - 1e-12):
            return Cone.trivial(self.dim)
        return Cone.from_generators(v[None, :], dim=self.dim)

    def transformed(self, matrix, shift):
        M = np.asarray(matrix, dtype=float)
        scale = float(np.sqrt(abs(np.linalg.det(M)))) if self.dim == 2 else float(np.linalg.norm(M, 2))
        return Ball(M @ self.center + shift, self.radius * scale)


class ConvexPolygon(_ConvexBody):
    """Convex polygon in R^2 given by its vertices (any order)."""

    kind = "convex-polygon"

    def __init__(self, vertices):
        V = np.asarray(vertices, dtype=float).reshape(-1, 2)
        if V.shape[0] < 3:
            raise DomainError("polygon needs at least 3 vertices")
        c = V.mean(axis=0)
        ang = np.arctan2(V[:, 1] - c[1], V[:, 0] - c[0])
        self.vertices = V[np.argsort(ang)]
        self.dim = 2
        E = np.roll(self.vertices, -1, axis=0) - self.vertices
        self.normals = np.column_stack([E[:, 1], -E[:, 0]])
        self.normals /= np.linalg.norm(self.normals, axis=1, keepdims=True)
        self.offsets = np.einsum("ij,ij->i", self.normals, self.vertices)
        self._edges = PiecewiseLinearSet.from_segments(
            np.stack([self.vertices, np.roll(self.vertices, -1, axis=0)], axis=1)
        )

    def _inside(self, x, tol=0.0):
        return bool(np.all(self.normals @ x - self.offsets <= tol))

    def _project_one(self, x):
        if self._inside(x):
            return x.copy()
        return self._edges.project(x).points[0]

    def proximal_normal_cone(self, a):
        a = self._require_member(a)
        slack = self.normals @ a - self.offsets
        active = np.where(slack >= -1e-12 * max(1.0, float(np.max(np.abs(self.offsets)))))[0]
        if active.size == 0:
            return Cone.trivial(2)
        return Cone.from_generators(self.normals[active], dim=2)

    def transformed(self, matrix, shift):
        M = np.asarray(matrix, dtype=float)
        return ConvexPolygon(self.vertices @ M.T + shift)


# ---------------------------------------------------------------------------
# piecewise-linear kinds


class PiecewiseLinearSet(SetOracle):
    """Finite union of segments, rays and points, handled in one vectorized pass."""

    def __init__(self, P0, D, T, kind: str = "segment-union"):
        self.P0 = np.asarray(P0, dtype=float)
        self.D = np.asarray(D, dtype=float)
        self.T = np.asarray(T, dtype=float).reshape(-1)
        if self.P0.ndim != 2 or self.P0.shape != self.D.shape or self.T.size != self.P0.shape[0]:
            raise DomainError("piece arrays have inconsistent shapes")
        self.dim = self.P0.shape[1]
        self.kind = kind
        self.P1 = np.where(np.isfinite(self.T)[:, None], self.P0 + np.nan_to_num(self.T, posinf=0.0)[:, None] * self.D, np.nan)
        self._DD = np.einsum("ij,ij->i", self.D, self.D)
        self.convex = self.P0.shape[0] == 1
        # cones at isolated points standing in for a truncated infinite tail
        self.point_cones: dict[bytes, Cone] = {}

    @classmethod
    def from_segments(cls, segments, kind="segment-union"):
        S = np.asarray(segments, dtype=float)
        P0, P1 = S[:, 0, :], S[:, 1, :]
        obj = cls(P0, P1 - P0, np.ones(P0.shape[0]), kind)
        obj.P1 = P1.copy()  # exact endpoints
        return obj

    @classmethod
    def from_rays(cls, origins, directions, kind="ray-union"):
        O = np.atleast_2d(np.asarray(origins, dtype=float))
        U = np.atleast_2d(np.asarray(directions, dtype=float))
        if O.shape[0] == 1 and U.shape[0] > 1:
            O = np.repeat(O, U.shape[0], axis=0)
        U = U / np.linalg.norm(U, axis=1, keepdims=True)
        return cls(O, U, np.full(O.shape[0], np.inf), kind)

    @property
    def n_pieces(self) -> int:
        return self.P0.shape[0]

    def _params(self, x: np.ndarray) -> np.ndarray:
        num = (x - self.P0) @ np.zeros(self.dim) if False else np.einsum("ij,ij->i", x - self.P0, self.D)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(self._DD > 0, num / np.where(self._DD > 0, self._DD, 1.0), 0.0)
        return np.clip(t, 0.0, self.T)

    def _feet(self, x: np.ndarray):
        t = self._params(x)
        Q = self.P0 + t[:, None] * self.D
        at_end = np.isfinite(self.T) & (t >= self.T)
        Q[at_end] = self.P1[at_end]
        Q[t <= 0.0] = self.P0[t <= 0.0]
        d = np.linalg.norm(x - Q, axis=1)
        return Q, d, t

    def distance(self, x) -> float:
        x = self._pt(x)
        return float(np.min(self._feet(x)[1]))

    def project(self, x) -> ProjectionResult:
        x = self._pt(x)
        Q, d, _ = self._feet(x)
        return _finalize(x, Q, d)

    def _piece_cone(self, i: int, a: np.ndarray) -> Cone:
        D = self.D[i]
        if self._DD[i] == 0.0:
            override = self.point_cones.get(self.P0[i].tobytes())
            return override if override is not None else Cone.whole(self.dim)
        lin = complement_basis(D[None, :], self.dim)
        seglen = float(np.sqrt(self._DD[i]) * (self.T[i] if np.isfinite(self.T[i]) else 0.0))
        tol = 1e-12 * max(seglen, float(np.linalg.norm(a)))
        if np.linalg.norm(a - self.P0[i]) <= tol:
            return Cone(-D[None, :], lin, self.dim)
        if np.isfinite(self.T[i]) and np.linalg.norm(a - self.P1[i]) <= tol:
            return Cone(D[None, :], lin, self.dim)
        return Cone(np.zeros((0, self.dim)), lin, self.dim)

    def _active(self, a: np.ndarray):
        _, d, _ = self._feet(a)
        dmin = float(np.min(d))
        tol = 1e-12 * max(float(np.linalg.norm(a)), 1e-300)
        active = np.where(d <= dmin + tol)[0]
        others = d[d > dmin + tol]
        r_far = float(np.min(others)) if others.size else np.inf
        return active, r_far

    def proximal_normal_cone(self, a) -> Cone:
        a = self._require_member(a)
        active, r_far = self._active(a)
        cones = [self._piece_cone(i, a) for i in active]
        if len(cones) == 1:
            return cones[0]
        return _verified_intersection(self, a, cones, r_far)

    def sample(self, center, radius, n_grid=200, n_random=0, rng=None):
        c = self._pt(center)
        lo, hi, ok = self._clip_to_ball(c, radius)
        idx = np.where(ok)[0]
        if idx.size == 0:
            return np.zeros((0, self.dim))
        lengths = (hi[idx] - lo[idx]) * np.sqrt(self._DD[idx])
        pts = []
        # clipped endpoints of every piece, exact where unclipped
        for i in idx:
            pts.append(self.P0[i] if lo[i] == 0.0 else self.P0[i] + lo[i] * self.D[i])
            if self._DD[i] > 0:
                if np.isfinite(self.T[i]) and hi[i] == self.T[i]:
                    pts.append(self.P1[i])
                else:
                    pts.append(self.P0[i] + hi[i] * self.D[i])
        total = float(lengths.sum())
        if total > 0 and n_grid > 0:
            share = lengths / total * n_grid
            counts = np.floor(share).astype(int)
            rem = n_grid - counts.sum()
            if rem > 0:
                counts[np.argsort(-(share - counts), kind="stable")[:rem]] += 1
            for i, k in zip(idx, counts):
                if k <= 0 or self._DD[i] == 0:
                    continue
                t = lo[i] + (hi[i] - lo[i]) * np.arange(1, k + 1) / (k + 1)
                pts.extend(self.P0[i] + t[:, None] * self.D[i])
        if n_random and total > 0:
            rng = rng if rng is not None else np.random.default_rng(0)
            which = rng.choice(idx, size=n_random, p=lengths / total)
            u = rng.random(n_random)
            t = lo[which] + u * (hi[which] - lo[which])
            pts.extend(self.P0[which] + t[:, None] * self.D[which])
        out = np.array(pts)
        return out[np.linalg.norm(out - c, axis=1) <= radius * (1 + 1e-12)]

    def _clip_to_ball(self, c, radius):
        n = self.P0.shape[0]
        lo, hi = np.zeros(n), np.zeros(n)
        ok = np.zeros(n, dtype=bool)
        w = self.P0 - c
        for i in range(n):
            a2 = self._DD[i]
            c0 = float(w[i] @ w[i]) - radius**2
            if a2 == 0.0:
                ok[i] = c0 <= 0.0
                continue
            b = 2.0 * float(self.D[i] @ w[i])
            disc = b * b - 4 * a2 * c0
            if disc < 0:
                continue
            sq = np.sqrt(disc)
            t1, t2 = (-b - sq) / (2 * a2), (-b + sq) / (2 * a2)
            l, h = max(t1, 0.0), min(t2, self.T[i])
            if l <= h:
                lo[i], hi[i], ok[i] = l, h, True
        return lo, hi, ok

    def ray_hits(self, origin, direction, smax):
        o, u = self._pt(origin), self._pt(direction)
        hits = []
        for i in range(self.n_pieces):
            D = self.D[i]
            if self._DD[i] == 0.0:
                w = self.P0[i] - o
                s = float(w @ u) / float(u @ u)
                if 0 <= s <= smax and np.linalg.norm(o + s * u - self.P0[i]) <= MEMBER_TOL:
                    hits.append(s)
                continue
            M = np.column_stack([u, -D])
            sol, *_ = np.linalg.lstsq(M, self.P0[i] - o, rcond=None)
            s, t = sol
            if np.linalg.matrix_rank(M, tol=1e-12 * max(1.0, np.linalg.norm(M))) < 2:
                # parallel: collinear overlap is sampled
                w = self.P0[i] - o
                if np.linalg.norm(w - (w @ u) / (u @ u) * u) > MEMBER_TOL:
                    continue
                ends = [float(w @ u) / float(u @ u)]
                if np.isfinite(self.T[i]):
                    ends.append(float((self.P1[i] - o) @ u) / float(u @ u))
                else:
                    ends.append(np.inf if (D @ u) > 0 else -np.inf)
                l, h = max(min(ends), 0.0), min(max(ends), smax)
                if l <= h:
                    hits.extend(np.linspace(l, h, 5).tolist())
                continue
            if -1e-12 <= s <= smax and -1e-12 <= t <= self.T[i] * (1 + 1e-12) + 1e-12:
                p = o + s * u
                if np.linalg.norm(p - (self.P0[i] + t * D)) <= MEMBER_TOL:
                    hits.append(max(float(s), 0.0))
        return np.unique(np.array(hits, dtype=float))

    def transformed(self, matrix, shift):
        M = np.asarray(matrix, dtype=float)
        obj = PiecewiseLinearSet(self.P0 @ M.T + shift, self.D @ M.T, self.T.copy(), self.kind)
        if np.isfinite(self.T).any():
            obj.P1 = np.where(np.isfinite(self.T)[:, None], self.P1 @ M.T + shift, np.nan)
        for key, c in self.point_cones.items():
            p = np.frombuffer(key, dtype=float)
            gens = c.generators @ np.linalg.inv(M)  # normals transform by M^{-T}
            obj.point_cones[(M @ p + shift).tobytes()] = Cone(gens, c.lineality @ np.linalg.inv(M), c.dim)
        if hasattr(self, "depth"):
            obj.depth = self.depth
        if self.kind == "ray-union":
            # rays keep unit directions under a similarity
            scale = np.linalg.norm(obj.D, axis=1)
            obj.D = obj.D / scale[:, None]
            obj._DD = np.einsum("ij,ij->i", obj.D, obj.D)
        return obj


def _verified_intersection(s: SetOracle, a: np.ndarray, cones: list[Cone], r_far: float) -> Cone:
    """
    Proximal normal cone of a union at a point shared by several pieces.

    Candidate directions are the generators and signed lineality vectors of the
    active pieces' cones; a candidate ``g`` survives iff ``a`` is still a nearest
    point to ``a + eps*g`` at both verification scales. Scales are relative to
    the distance to the nearest inactive piece.
    """
    dim = s.dim
    cands: list[np.ndarray] = []
    for c in cones:
        cands.extend(c.generators)
        for q in c._lin_basis:
            cands.extend([q, -q])
    cands = [g / np.linalg.norm(g) for g in cands if np.linalg.norm(g) > 0]
    ref = min(1.0, r_far) if np.isfinite(r_far) else 1.0
    ref = max(ref, float(np.linalg.norm(a)) * 1e-6, 1e-300)

    def survives(g):
        for eps in VERIFY_SCALES:
            e = eps * ref
            x = a + e * g
            if e - s.distance(x) > 1e-6 * e:
                return False
        return True

    good = [g for g in cands if survives(g)]
    if not good:
        return Cone.trivial(dim)
    lin, gens = [], []
    for g in good:
        if any(np.linalg.norm(g + h) < 1e-9 for h in good):
            lin.append(g)
        else:
            gens.append(g)
    return Cone(np.array(gens).reshape(-1, dim), np.array(lin).reshape(-1, dim), dim).reduced()


def segment(p, q, kind: str = "segment") -> PiecewiseLinearSet:
    p, q = as_point(p), as_point(q)
    return PiecewiseLinearSet.from_segments(np.array([[p, q]]), kind)


def ray(origin, direction) -> PiecewiseLinearSet:
    s = PiecewiseLinearSet.from_rays(np.atleast_2d(origin), np.atleast_2d(direction), kind="ray")
    return s


def ray_union(origin, directions) -> PiecewiseLinearSet:
    return PiecewiseLinearSet.from_rays(np.atleast_2d(origin), directions, kind="ray-union")


def segment_union(segments) -> PiecewiseLinearSet:
    return PiecewiseLinearSet.from_segments(segments, kind="segment-union")


def diagonal_line(t0: float = 0.0, t1: float = 1.0) -> PiecewiseLinearSet:
    """``{(t, t) : t in [t0, t1]}``."""
    return segment((t0, t0), (t1, t1), kind="diagonal-line")


def line(point, direction) -> AffineSubspace:
    return AffineSubspace(point, [direction])


def sawtooth_f(t, depth: int = 40):
    """
    The zig-zag function on ``[0, 1]``: zero at ``1/2^n``, minimum
    ``-1/2^(n+2)`` at ``3/2^(n+2)``, slopes -1 then +1 on each tooth.
    Values below ``1/2^depth`` are reported as 0.
    """
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    for n in range(depth):
        lo, mid, hi = 2.0 ** -(n + 1), 3 * 2.0 ** -(n + 2), 2.0**-n
        m1 = (t > lo) & (t <= mid)
        m2 = (t > mid) & (t <= hi)
        out = np.where(m1, -t + lo, out)
        out = np.where(m2, t - hi, out)
    return out


def sawtooth_graph(depth: int = 40) -> PiecewiseLinearSet:
    """
    Graph of :func:`sawtooth_f` truncated after ``depth`` teeth, with the
    origin adjoined so the set stays closed.
    """
    segs = []
    for n in range(depth):
        lo, mid, hi = 2.0 ** -(n + 1), 3 * 2.0 ** -(n + 2), 2.0**-n
        bottom = (mid, -(2.0 ** -(n + 2)))
        segs.append([(lo, 0.0), bottom])
        segs.append([bottom, (hi, 0.0)])
    segs.append([(0.0, 0.0), (0.0, 0.0)])
    obj = PiecewiseLinearSet.from_segments(np.array(segs), kind="sawtooth-graph")
    obj.depth = depth
    # the untruncated graph has tangent directions (1, 0) and (3, -1) at the origin
    obj.point_cones[np.zeros(2).tobytes()] = Cone.from_generators([[0.0, 1.0], [-1.0, -3.0]])
    return obj


class Union(SetOracle):
    """Finite union of arbitrary oracles of the same dimension."""

    kind = "finite-union"

    def __init__(self, children):
        self.children = list(children)
        if not self.children:
            raise DomainError("union needs at least one child")
        self.dim = self.children[0].dim
        if any(ch.dim != self.dim for ch in self.children):
            raise DomainError("union children must share a dimension")

    def project(self, x):
        x = self._pt(x)
        cand, dist = [], []
        for ch in self.children:
            r = ch.project(x)
            cand.append(r.points)
            dist.append(np.full(r.points.shape[0], r.distance))
        return _finalize(x, np.vstack(cand), np.concatenate(dist))

    def distance(self, x):
        x = self._pt(x)
        return min(ch.distance(x) for ch in self.children)

    def proximal_normal_cone(self, a):
        a = self._require_member(a)
        d = np.array([ch.distance(a) for ch in self.children])
        dmin = float(d.min())
        tol = 1e-12 * max(float(np.linalg.norm(a)), 1e-300)
        active = np.where(d <= dmin + tol)[0]
        others = d[d > dmin + tol]
        r_far = float(others.min()) if others.size else np.inf
        cones = []
        for i in active:
            ch = self.children[i]
            cones.append(ch.proximal_normal_cone(ch.project(a).points[0]))
        if len(cones) == 1:
            return cones[0]
        return _verified_intersection(self, a, cones, r_far)

    def sample(self, center, radius, n_grid=200, n_random=0, rng=None):
        k = len(self.children)
        rng = rng if rng is not None else np.random.default_rng(0)
        parts = [
            ch.sample(center, radius, max(n_grid // k, 2), n_random // k, rng) for ch in self.children
        ]
        return np.vstack([p for p in parts if p.size] or [np.zeros((0, self.dim))])

    def ray_hits(self, origin, direction, smax):
        hs = [ch.ray_hits(origin, direction, smax) for ch in self.children]
        return np.unique(np.concatenate(hs)) if hs else np.zeros(0)

    def transformed(self, matrix, shift):
        return Union([ch.transformed(matrix, shift) for ch in self.children])


# ---------------------------------------------------------------------------
# module-level operations


def distance(s: SetOracle, x) -> float:
    return s.distance(x)


def project(s: SetOracle, x) -> ProjectionResult:
    return s.project(x)


def proximal_normal_cone(s: SetOracle, a) -> Cone:
    return s.proximal_normal_cone(a)


def restricted_proximal_normal_cone(
    s: SetOracle,
    other: SetOracle,
    a,
    radius: float | None = None,
    n_grid: int = 200,
    n_dirs: int = 16,
    seed: int = 0,
) -> Cone:
    """
    ``other``-proximal normal cone of ``s`` at ``a``: the cone generated by
    ``x - a`` over sampled ``x`` in ``other`` that have ``a`` as a nearest point
    in ``s``.

    Samples are a grid of ``other`` inside ``B(a, radius)`` plus exact hits of
    ``other`` along unit directions of the proximal normal cone at ``a``.
    ``radius`` defaults to four times ``d(a, other)`` (or 1 if ``a`` is in
    ``other``). Returns the empty cone when no sample qualifies.
    """
    a = s._require_member(a)
    if radius is None:
        d_o = other.distance(a)
        radius = 4.0 * d_o if d_o > 0 else 1.0
    rng = np.random.default_rng(np.uint64(seed))
    X = [other.sample(a, radius, n_grid, 0, rng)]
    for u in unit_sphere_samples(s.proximal_normal_cone(a), k=n_dirs, seed=seed):
        hs = other.ray_hits(a, u, radius)
        if hs.size:
            X.append(a + hs[:, None] * u)
    if other.contains(a):
        X.append(a[None, :])
    X = np.vstack([x for x in X if x.size] or [np.zeros((0, s.dim))])
    dirs, any_hit = [], False
    for x in X:
        # a must be one of the projection points: a distance tie alone admits
        # near-preimages whose directions are off by sqrt(tie band)
        P = s.project(x).points
        tol = 1e-9 * float(np.linalg.norm(x - a)) + FLOOR * (1.0 + float(np.linalg.norm(x)))
        if np.min(np.linalg.norm(P - a, axis=1)) <= tol:
            any_hit = True
            v = x - a
            if np.linalg.norm(v) > FLOOR * (1.0 + np.linalg.norm(a)):
                dirs.append(v)
    if not any_hit:
        return Cone.empty(s.dim)
    if not dirs:
        return Cone.trivial(s.dim)
    return Cone.from_generators(np.array(dirs), dim=s.dim).reduced()
