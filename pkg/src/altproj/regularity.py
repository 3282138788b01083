"""
Sampled estimates of the regularity constants of a pair of closed sets at a
common point, on a shrinking ladder of radii.

Every constant is a supremum or infimum over points of the two sets near the
reference point. Each level samples both sets inside the ball of that radius
(a deterministic parameter grid plus seeded random points) and evaluates the
sup/inf exactly over the normal cones at the sampled points. Suprema over empty
configuration sets are ``-inf`` and infima are ``+inf``.

All estimators at one level share the same samples, so the orderings
``c1 <= c`` and ``c3 <= c2`` hold for the sampled values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .geometry import Cone, as_point, sup_unit_inner, unit_sphere_samples
from .sets import MEMBER_TOL, SetOracle

EXCLUDE_TOL = 1e-9
UNIT_K = 8
CAVEAT = (
    "limiting normal cones are approximated by proximal normal cones sampled at the "
    "two smallest radii; all constants are sampled lower (sup) or upper (inf) estimates"
)


@dataclass(frozen=True)
class RadiusLadder:
    rho0: float = 0.25
    factor: float = 0.5
    levels: int = 6

    def __post_init__(self):
        if not self.rho0 > 0:
            raise DomainError("rho0 must be positive")
        if not 0 < self.factor < 1:
            raise DomainError("factor must lie in (0, 1)")
        if self.levels < 2:
            raise DomainError("a ladder needs at least 2 levels")

    @property
    def radii(self) -> np.ndarray:
        return self.rho0 * self.factor ** np.arange(self.levels)

    def scaled(self, t: float) -> "RadiusLadder":
        return RadiusLadder(self.rho0 * t, self.factor, self.levels)


@dataclass
class SamplingConfig:
    n_grid: int = 200
    n_random: int = 200
    seed: int = 0
    # restricted cones look for preimage points of the other set in this multiple of rho
    preimage_factor: float = 3.0


@dataclass
class Witness:
    value: float
    a: np.ndarray | None = None
    b: np.ndarray | None = None
    u: np.ndarray | None = None
    v: np.ndarray | None = None

    def as_dict(self) -> dict:
        f = lambda z: None if z is None else [float(t) for t in z]
        return {"value": float(self.value), "a": f(self.a), "b": f(self.b), "u": f(self.u), "v": f(self.v)}


@dataclass
class Estimate:
    """One constant at one ladder level."""

    rho: float
    value: float
    witness: Witness | None = None
    counts: dict = field(default_factory=dict)


@dataclass
class LevelRecord:
    rho: float
    c_hat: float
    c1_hat: float
    c2_hat: float
    c3_hat: float
    c4_hat: float
    theta4_hat: float
    sample_counts: dict
    witnesses: dict
    tie_multiplicity: int


@dataclass
class RegularityReport:
    levels: list[LevelRecord]
    super_regularity: dict
    b_super_regularity: dict
    qualification: tuple[bool, float] | None = None
    caveat: str = CAVEAT

    def smallest(self) -> LevelRecord:
        return self.levels[-1]

    def as_dict(self) -> dict:
        lv = []
        for j, r in enumerate(self.levels):
            lv.append(
                {
                    "level": j,
                    "rho": r.rho,
                    "c_hat": r.c_hat,
                    "c1_hat": r.c1_hat,
                    "c2_hat": r.c2_hat,
                    "c3_hat": r.c3_hat,
                    "c4_hat": r.c4_hat,
                    "theta4_hat": r.theta4_hat,
                    "sample_counts": dict(r.sample_counts),
                    "tie_multiplicity": r.tie_multiplicity,
                    "witnesses": {k: w.as_dict() for k, w in r.witnesses.items() if w is not None},
                }
            )
        out = {
            "levels": lv,
            "super_regularity": [{"delta": d, "gamma": g} for d, g in self.super_regularity.items()],
            "b_super_regularity": [{"delta": d, "gamma": g} for d, g in self.b_super_regularity.items()],
            "caveat": self.caveat,
        }
        if self.qualification is not None:
            ok, margin = self.qualification
            out["qualification"] = {"holds": bool(ok), "margin": float(margin), "levels": [len(self.levels) - 2, len(self.levels) - 1]}
        return out


# ---------------------------------------------------------------------------
# shared machinery


def _check_common(A: SetOracle, B: SetOracle, xbar) -> np.ndarray:
    x = as_point(xbar)
    if A.dim != x.size or B.dim != x.size:
        raise DomainError("dimension mismatch between sets and reference point")
    for name, s in (("A", A), ("B", B)):
        if not s.contains(x):
            raise DomainError(f"reference point is not in {name} (distance {s.distance(x):.3g})")
    return x


def _unique_rows(X: np.ndarray) -> np.ndarray:
    if X.shape[0] == 0:
        return X
    _, idx = np.unique(X + 0.0, axis=0, return_index=True)
    return X[np.sort(idx)]


class _ConeCache:
    """Proximal cones of sample points, grouped by cone identity."""

    def __init__(self, s: SetOracle):
        self.s = s
        self.by_point: dict[bytes, tuple] = {}
        self.by_key: dict[tuple, Cone] = {}
        self.units: dict[tuple, np.ndarray] = {}

    def key_of(self, a: np.ndarray) -> tuple:
        kb = a.tobytes()
        hit = self.by_point.get(kb)
        if hit is None:
            c = self.s.proximal_normal_cone(a)
            k = c.key()
            self.by_key.setdefault(k, c)
            hit = (k,)
            self.by_point[kb] = hit
        return hit[0]

    def add_cone(self, c: Cone) -> tuple:
        k = c.key()
        self.by_key.setdefault(k, c)
        return k

    def unit(self, k: tuple) -> np.ndarray:
        U = self.units.get(k)
        if U is None:
            c = self.by_key[k]
            U = np.array(unit_sphere_samples(c, k=UNIT_K, seed=0)).reshape(-1, c.dim)
            self.units[k] = U
        return U

    def group(self, P: np.ndarray) -> dict[tuple, np.ndarray]:
        out: dict[tuple, list[int]] = {}
        for i, a in enumerate(P):
            out.setdefault(self.key_of(a), []).append(i)
        return {k: np.array(v) for k, v in out.items()}


def _pair_sup(CA: Cone, UA: np.ndarray, CB: Cone, UB: np.ndarray):
    """``sup -<u, v>`` over unit ``u`` in ``CA`` and unit ``v`` in ``CB``, with maximizers."""
    best, wit = -np.inf, (None, None)
    if UA.shape[0] == 0 or UB.shape[0] == 0:
        return best, wit
    vals, _, _ = sup_unit_inner(CB, -UA, fallback_dirs=UB)
    i = int(np.argmax(vals))
    if vals[i] > best:
        best = float(vals[i])
        u = UA[i]
        v = _argmax_unit(CB, -u, UB)
        wit = (u, v)
    vals, _, _ = sup_unit_inner(CA, -UB, fallback_dirs=UA)
    i = int(np.argmax(vals))
    if vals[i] > best:
        best = float(vals[i])
        v = UB[i]
        u = _argmax_unit(CA, -v, UA)
        wit = (u, v)
    return best, wit


def _argmax_unit(c: Cone, w: np.ndarray, U: np.ndarray) -> np.ndarray:
    P = c.project_many(w[None, :])[0]
    cands = [U[int(np.argmax(U @ w))]]
    n = np.linalg.norm(P)
    if n > 1e-13:
        cands.append(P / n)
    return max(cands, key=lambda u: float(u @ w))


@dataclass
class _Level:
    rho: float
    SA: np.ndarray
    SB: np.ndarray
    projB: dict  # bytes of a -> P_B(a) points
    projA: dict
    distB: np.ndarray  # d(a, B) for a in SA
    distA: np.ndarray


def _sample_set(s: SetOracle, xbar: np.ndarray, rho: float, cfg: SamplingConfig, rng) -> np.ndarray:
    P = s.sample(xbar, rho, cfg.n_grid, cfg.n_random, rng)
    P = np.vstack([P.reshape(-1, s.dim), xbar[None, :]])
    return _unique_rows(P)


def _project_all(s: SetOracle, X: np.ndarray) -> tuple[dict, np.ndarray]:
    out, d = {}, np.empty(X.shape[0])
    for i, x in enumerate(X):
        r = s.project(x)
        out[x.tobytes()] = r.points
        d[i] = r.distance
    return out, d


class _Engine:
    """Per-ladder state shared by all estimators of one (A, B, xbar) triple."""

    def __init__(self, A, B, xbar, ladder: RadiusLadder | None, cfg: SamplingConfig | None):
        self.A, self.B = A, B
        self.x = _check_common(A, B, xbar)
        self.ladder = ladder or RadiusLadder()
        self.cfg = cfg or SamplingConfig()
        self.conesA, self.conesB = _ConeCache(A), _ConeCache(B)
        self._levels: dict[int, _Level] = {}
        self._chains: dict[int, tuple] = {}
        self._pools: dict[int, tuple] = {}

    def rng(self, j: int, salt: int = 0):
        return np.random.default_rng([np.uint64(self.cfg.seed), j, salt])

    def level(self, j: int) -> _Level:
        if j in self._levels:
            return self._levels[j]
        rho = float(self.ladder.radii[j])
        rng = self.rng(j)
        SA = _sample_set(self.A, self.x, rho, self.cfg, rng)
        SB = _sample_set(self.B, self.x, rho, self.cfg, rng)
        # chain points b in P_B(a1) and a2 in P_A(b), kept inside the ball
        projB, dB = _project_all(self.B, SA)
        chainB = [p for a in SA for p in projB[a.tobytes()] if np.linalg.norm(p - self.x) <= rho]
        if chainB:
            SB = _unique_rows(np.vstack([SB, np.array(chainB)]))
        projA, dA = _project_all(self.A, SB)
        lvl = _Level(rho, SA, SB, projB, projA, dB, dA)
        self._levels[j] = lvl
        return lvl

    # restricted cones from pooled preimages ---------------------------------

    def pool(self, j: int):
        """Restricted cones ``N_A^{B-prox}`` and ``N_B^{A-prox}`` at points reached by projection."""
        if j in self._pools:
            return self._pools[j]
        rho = float(self.ladder.radii[j])
        out = []
        for s, other, salt in ((self.A, self.B, 1), (self.B, self.A, 2)):
            out.append(_restricted_pool(s, other, self.x, rho, self.cfg, self.rng(j, salt)))
        self._pools[j] = tuple(out)
        return self._pools[j]


def _restricted_pool(s, other, xbar, rho, cfg: SamplingConfig, rng):
    """
    Map each point ``a`` of ``s`` in ``B(xbar, rho)`` that is a nearest point of
    some sampled ``x`` in ``other`` to the cone generated by the ``x - a``.
    """
    X = other.sample(xbar, cfg.preimage_factor * rho, cfg.n_grid, cfg.n_random, rng)
    X = _unique_rows(np.vstack([X.reshape(-1, s.dim), xbar[None, :]]))
    groups: dict[bytes, list] = {}
    for x in X:
        for a in s.project(x).points:
            if np.linalg.norm(a - xbar) > rho * (1 + 1e-12):
                continue
            entry = groups.setdefault(a.tobytes(), [a, []])
            v = x - a
            if np.linalg.norm(v) > 1e-15 * (1.0 + np.linalg.norm(a)):
                entry[1].append(v)
    pts, cones = [], []
    for a, dirs in groups.values():
        pts.append(a)
        if dirs:
            cones.append(Cone.from_generators(np.array(dirs), dim=s.dim).reduced())
        else:
            cones.append(Cone.trivial(s.dim))
    return np.array(pts).reshape(-1, s.dim), cones


# ---------------------------------------------------------------------------
# per-level estimators


def _c_uniform_level(E: _Engine, j: int) -> Estimate:
    L = E.level(j)
    (pa, _), (pb, _) = E.pool(j)
    SA = _unique_rows(np.vstack([L.SA, pa])) if pa.size else L.SA
    SB = _unique_rows(np.vstack([L.SB, pb])) if pb.size else L.SB
    return _cone_pair_sup(E.conesA, E.conesB, SA, SB, L.rho)


def _cone_pair_sup(cA: _ConeCache, cB: _ConeCache, SA, SB, rho, keysA=None, keysB=None) -> Estimate:
    gA = cA.group(SA) if keysA is None else keysA
    gB = cB.group(SB) if keysB is None else keysB
    best, wit = -np.inf, None
    for ka, ia in gA.items():
        UA = cA.unit(ka)
        if UA.shape[0] == 0:
            continue
        for kb, ib in gB.items():
            UB = cB.unit(kb)
            if UB.shape[0] == 0:
                continue
            val, (u, v) = _pair_sup(cA.by_key[ka], UA, cB.by_key[kb], UB)
            if val > best:
                best = val
                wit = Witness(val, SA[ia[0]], SB[ib[0]], u, v)
    counts = {"A": int(SA.shape[0]), "B": int(SB.shape[0]), "cone_pairs": len(gA) * len(gB)}
    return Estimate(rho, float(best), wit, counts)


def _c1_level(E: _Engine, j: int) -> Estimate:
    L = E.level(j)
    (pa, ca), (pb, cb) = E.pool(j)
    rA, rB = _ConeCache(E.A), _ConeCache(E.B)
    gA: dict[tuple, list] = {}
    gB: dict[tuple, list] = {}
    for i, c in enumerate(ca):
        gA.setdefault(rA.add_cone(c), []).append(i)
    for i, c in enumerate(cb):
        gB.setdefault(rB.add_cone(c), []).append(i)
    est = _cone_pair_sup(
        rA, rB, pa, pb, L.rho, {k: np.array(v) for k, v in gA.items()}, {k: np.array(v) for k, v in gB.items()}
    )
    est.counts.update({"A_reached": int(pa.shape[0]), "B_reached": int(pb.shape[0])})
    return est


def _outside(S: np.ndarray, d_other: np.ndarray) -> np.ndarray:
    return S[d_other > EXCLUDE_TOL]


def _c2_level(E: _Engine, j: int) -> tuple[Estimate, int]:
    L = E.level(j)
    Aout = _outside(L.SA, L.distB)
    Bout = _outside(L.SB, L.distA)
    U, Ua, V, Vb = [], [], [], []
    ties = 1
    for a in Aout:
        P = L.projB[a.tobytes()]
        ties = max(ties, P.shape[0])
        for p in P:
            w = a - p
            U.append(w / np.linalg.norm(w))
            Ua.append((a, p))
    for b in Bout:
        P = L.projA[b.tobytes()]
        ties = max(ties, P.shape[0])
        for p in P:
            w = b - p
            V.append(w / np.linalg.norm(w))
            Vb.append((b, p))
    counts = {"A_minus_B": int(Aout.shape[0]), "B_minus_A": int(Bout.shape[0])}
    if not U or not V:
        return Estimate(L.rho, -np.inf, None, counts), ties
    U, V = np.array(U), np.array(V)
    M = -(U @ V.T)
    i, k = np.unravel_index(int(np.argmax(M)), M.shape)
    val = float(M[i, k])
    wit = Witness(val, Ua[i][0], Vb[k][0], U[i], V[k])
    counts["pairs"] = int(M.size)
    return Estimate(L.rho, val, wit, counts), ties


def _c3_level(E: _Engine, j: int) -> Estimate:
    L = E.level(j)
    rho, x = L.rho, E.x
    best, wit, n = -np.inf, None, 0
    inside = lambda p: np.linalg.norm(p - x) <= rho
    # a1 in B forces b = a1; the shared exclusion tolerance keeps chains a subset of the c2 pairs
    for a1 in _outside(L.SA, L.distB):
        for b in L.projB[a1.tobytes()]:
            if not inside(b) or E.A.distance(b) <= EXCLUDE_TOL:
                continue
            d1 = a1 - b
            n1 = np.linalg.norm(d1)
            if n1 <= 1e-15 * (1 + np.linalg.norm(b)):
                continue
            P2 = L.projA.get(b.tobytes())
            if P2 is None:
                P2 = E.A.project(b).points
            for a2 in P2:
                d2 = a2 - b
                n2 = np.linalg.norm(d2)
                if not inside(a2) or n2 <= 1e-15 * (1 + np.linalg.norm(b)):
                    continue
                n += 1
                val = float(d1 @ d2) / (n1 * n2)
                if val > best:
                    best, wit = val, Witness(val, a1, b, d1 / n1, d2 / n2)
    return Estimate(rho, best, wit, {"chains": n})


def _c4_level(E: _Engine, j: int) -> tuple[Estimate, Estimate]:
    L = E.level(j)
    Aout = _outside(L.SA, L.distB)
    Bout = _outside(L.SB, L.distA)
    counts = {"A_minus_B": int(Aout.shape[0]), "B_minus_A": int(Bout.shape[0])}
    nA, nB = Aout.shape[0], Bout.shape[0]
    if nA == 0 or nB == 0:
        return Estimate(L.rho, -np.inf, None, counts), Estimate(L.rho, np.inf, None, counts)
    diff = Bout[None, :, :] - Aout[:, None, :]  # b - a
    W = diff / np.linalg.norm(diff, axis=2, keepdims=True)
    sA, dA = np.empty((nA, nB)), np.empty((nA, nB))
    sB, dB = np.empty((nA, nB)), np.empty((nA, nB))
    for k, idx in E.conesA.group(Aout).items():
        vals, dist, _ = sup_unit_inner(E.conesA.by_key[k], W[idx].reshape(-1, E.A.dim), E.conesA.unit(k))
        sA[idx] = vals.reshape(idx.size, nB)
        dA[idx] = dist.reshape(idx.size, nB)
    for k, idx in E.conesB.group(Bout).items():
        vals, dist, _ = sup_unit_inner(E.conesB.by_key[k], -W[:, idx].transpose(1, 0, 2).reshape(-1, E.B.dim), E.conesB.unit(k))
        sB[:, idx] = vals.reshape(idx.size, nA).T
        dB[:, idx] = dist.reshape(idx.size, nA).T
    cval = np.minimum(sA, sB)
    tval = np.maximum(dA, dB)
    i, k = np.unravel_index(int(np.argmax(cval)), cval.shape)
    c4 = Estimate(L.rho, float(cval[i, k]), Witness(float(cval[i, k]), Aout[i], Bout[k]), counts)
    i2, k2 = np.unravel_index(int(np.argmin(tval)), tval.shape)
    th = Estimate(L.rho, float(tval[i2, k2]), Witness(float(tval[i2, k2]), Aout[i2], Bout[k2]), counts)
    counts["pairs"] = int(nA * nB)
    return c4, th


# ---------------------------------------------------------------------------
# public estimators


def _ladder_map(fn, E: _Engine):
    return [fn(E, j) for j in range(E.ladder.levels)]


def estimate_c_uniform(A, B, xbar, ladder=None, seed: int = 0, config: SamplingConfig | None = None) -> list[Estimate]:
    """Uniform-regularity constant: ``sup -<u, v>`` over unit proximal normals near ``xbar``."""
    return _ladder_map(_c_uniform_level, _Engine(A, B, xbar, ladder, _cfg(config, seed)))


def estimate_c1_blpw(A, B, xbar, ladder=None, seed: int = 0, config=None) -> list[Estimate]:
    """As :func:`estimate_c_uniform` with each set's normals restricted to preimages in the other set."""
    return _ladder_map(_c1_level, _Engine(A, B, xbar, ladder, _cfg(config, seed)))


def estimate_c2(A, B, xbar, ladder=None, seed: int = 0, config=None) -> list[Estimate]:
    """``sup -<a - b_a, b - a_b>`` (normalized) over ``a`` in ``A\\B``, ``b`` in ``B\\A`` and all projections."""
    return _ladder_map(lambda E, j: _c2_level(E, j)[0], _Engine(A, B, xbar, ladder, _cfg(config, seed)))


def estimate_c3_nr(A, B, xbar, ladder=None, seed: int = 0, config=None) -> list[Estimate]:
    """``sup <a1 - b, a2 - b>`` (normalized) over projection chains ``a1 -> b -> a2`` inside the ball."""
    return _ladder_map(_c3_level, _Engine(A, B, xbar, ladder, _cfg(config, seed)))


def estimate_c4_theta4(A, B, xbar, ladder=None, seed: int = 0, config=None) -> list[tuple[Estimate, Estimate]]:
    """
    Per level ``(c4, theta4)``.

    ``theta4`` is the infimum over pairs ``a`` in ``A\\B``, ``b`` in ``B\\A`` of
    the larger distance from ``+-(b - a)/||b - a||`` to the normal cones;
    ``c4`` is the supremum of the smaller of ``<b - a, u>/||b - a||`` and
    ``<a - b, v>/||b - a||`` over unit normals. When ``c4 >= 0``,
    ``c4**2 + theta4**2 == 1``.
    """
    return _ladder_map(_c4_level, _Engine(A, B, xbar, ladder, _cfg(config, seed)))


def _cfg(config: SamplingConfig | None, seed: int) -> SamplingConfig:
    if config is None:
        return SamplingConfig(seed=seed)
    return config


def _gamma(cache: _ConeCache, pts: np.ndarray, S: np.ndarray, cones: list[Cone] | None = None):
    """``sup <u, x - a>/||x - a||`` over ``a`` in ``pts``, ``x`` in ``S``, unit ``u`` in the cone at ``a``."""
    best, wit = -np.inf, None
    if cones is None:
        groups = cache.group(pts)
        items = [(cache.by_key[k], cache.unit(k), idx) for k, idx in groups.items()]
    else:
        items = []
        for i, c in enumerate(cones):
            U = np.array(unit_sphere_samples(c, k=UNIT_K, seed=0)).reshape(-1, c.dim)
            items.append((c, U, np.array([i])))
    for c, U, idx in items:
        if U.shape[0] == 0:
            continue
        for i in idx:
            a = pts[i]
            D = S - a
            n = np.linalg.norm(D, axis=1)
            keep = n > 1e-15 * (1.0 + np.linalg.norm(a))
            if not keep.any():
                continue
            W = D[keep] / n[keep, None]
            vals, _, _ = sup_unit_inner(c, W, U)
            m = int(np.argmax(vals))
            if vals[m] > best:
                best = float(vals[m])
                wit = Witness(best, a, S[keep][m])
    return best, wit


def super_regularity_modulus(A: SetOracle, xbar, deltas, seed: int = 0, config: SamplingConfig | None = None) -> dict:
    """
    ``delta -> gamma(delta)``: the sup of ``<u, x - a>/||x - a||`` over sampled
    ``x != a`` in ``A`` near ``xbar`` and unit proximal normals ``u`` at ``a``,
    clamped below at 0. Values tending to 0 indicate super-regularity.
    """
    x = as_point(xbar, A.dim)
    if not A.contains(x):
        raise DomainError("reference point is not in the set")
    cfg = _cfg(config, seed)
    cache = _ConeCache(A)
    out = {}
    for j, d in enumerate(deltas):
        rng = np.random.default_rng([np.uint64(cfg.seed), j, 7])
        S = _sample_set(A, x, float(d), cfg, rng)
        g, _ = _gamma(cache, S, S)
        out[float(d)] = max(g, 0.0)
    return out


def b_super_regularity_modulus(A, B, xbar, deltas, seed: int = 0, config=None) -> dict:
    """:func:`super_regularity_modulus` with normals restricted to preimages in ``B``."""
    x = _check_common(A, B, xbar)
    cfg = _cfg(config, seed)
    out = {}
    for j, d in enumerate(deltas):
        rng = np.random.default_rng([np.uint64(cfg.seed), j, 7])
        S = _sample_set(A, x, float(d), cfg, rng)
        pts, cones = _restricted_pool(A, B, x, float(d), cfg, np.random.default_rng([np.uint64(cfg.seed), j, 8]))
        S = _unique_rows(np.vstack([S, pts])) if pts.size else S
        g, _ = _gamma(_ConeCache(A), pts, S, cones)
        out[float(d)] = max(g, 0.0)
    return out


def check_qualification(A, B, xbar, rho_min: float | None = None, ladder=None, seed: int = 0, config=None):
    """
    Approximate test of ``N_A(xbar) ∩ -N_B(xbar) = {0}`` for limiting cones.

    Unit proximal normals of both sets are pooled over samples at the two
    smallest ladder radii (or ``rho_min`` and ``2*rho_min``). Returns
    ``(holds, margin, witness)`` with ``margin = min ||u + v||``; the condition
    fails when the margin is below 0.05.
    """
    if rho_min is not None:
        ladder = RadiusLadder(2 * rho_min, 0.5, 2)
    E = _Engine(A, B, xbar, ladder, _cfg(config, seed))
    n = E.ladder.levels
    best, wit = np.inf, None
    keysA, keysB = set(), set()
    for j in (n - 2, n - 1):
        L = E.level(j)
        keysA |= set(E.conesA.group(L.SA))
        keysB |= set(E.conesB.group(L.SB))
    for ka in keysA:
        UA = E.conesA.unit(ka)
        if UA.shape[0] == 0:
            continue
        for kb in keysB:
            UB = E.conesB.unit(kb)
            if UB.shape[0] == 0:
                continue
            s, (u, v) = _pair_sup(E.conesA.by_key[ka], UA, E.conesB.by_key[kb], UB)
            # the norm of the witness sum avoids the sqrt(eps) loss of sqrt(2 - 2 s)
            m = float(np.sqrt(max(0.0, 2.0 - 2.0 * min(s, 1.0))))
            if u is not None:
                m = min(m, float(np.linalg.norm(u + v)))
            if m < best:
                best, wit = m, (u, v)
    if not np.isfinite(best):
        return True, float("inf"), None
    return bool(best >= 0.05), best, wit


def estimate_all(
    A: SetOracle,
    B: SetOracle,
    xbar,
    ladder: RadiusLadder | None = None,
    config: SamplingConfig | None = None,
    deltas=None,
    with_b_super: bool = True,
) -> RegularityReport:
    """Every constant on one shared set of samples per level."""
    E = _Engine(A, B, xbar, ladder, config)
    levels = []
    for j in range(E.ladder.levels):
        cu = _c_uniform_level(E, j)
        c1 = _c1_level(E, j)
        c2, ties = _c2_level(E, j)
        c3 = _c3_level(E, j)
        c4, th = _c4_level(E, j)
        counts = {"c": cu.counts, "c1": c1.counts, "c2": c2.counts, "c3": c3.counts, "c4": c4.counts}
        wits = {"c": cu.witness, "c1": c1.witness, "c2": c2.witness, "c3": c3.witness, "c4": c4.witness, "theta4": th.witness}
        levels.append(LevelRecord(E.ladder.radii[j].item(), cu.value, c1.value, c2.value, c3.value, c4.value, th.value, counts, wits, ties))
    if deltas is None:
        deltas = [float(r) for r in E.ladder.radii[-3:]]
    sr = super_regularity_modulus(A, E.x, deltas, config=E.cfg)
    bsr = b_super_regularity_modulus(A, B, E.x, deltas, config=E.cfg) if with_b_super else {}
    q = check_qualification(A, B, E.x, ladder=E.ladder, config=E.cfg)
    return RegularityReport(levels, sr, bsr, (q[0], q[1]))
