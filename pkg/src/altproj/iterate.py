"""
Exact and inexact alternating projections with per-step admissibility
certificates.

Iterates alternate ``x1`` on ``B``, ``x2`` on ``A``, ``x3`` on ``B`` and so on.
Each recorded step carries the two certificate ratios for the move
``x -> a``:

* ``cert_ratio_tau = d(x, S) / ||x - a||`` (a (tau, sigma)-projection needs ``>= tau``);
* ``cert_ratio_sigma = d(x - a, N_S(a)) / ||x - a||`` (needs ``<= sigma``).

Both are reported as 1 and 0 when ``a == x``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericalFailure
from .geometry import as_point, cone_distance
from .sets import FLOOR, SetOracle

SCHEMES = ("exact", "tau-sigma", "sigma-monotone")
MODES = ("nearest", "adversarial", "random")
CERT_TOL = 1e-9
RANDOM_BATCH = 16
RANDOM_TRIALS = 1000
CLIMB_ROUNDS = 50


@dataclass(frozen=True)
class InexactnessPolicy:
    scheme: str = "exact"
    tau: float = 1.0
    sigma: float = 0.0
    mode: str = "nearest"
    seed: int = 0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise DomainError(f"unknown scheme {self.scheme!r}")
        if self.mode not in MODES:
            raise DomainError(f"unknown mode {self.mode!r}")
        if not 0 < self.tau <= 1:
            raise DomainError("tau must lie in (0, 1]")
        if not 0 <= self.sigma < 1:
            raise DomainError("sigma must lie in [0, 1)")
        if self.scheme == "exact" and (self.tau != 1.0 or self.sigma != 0.0):
            raise DomainError("the exact scheme requires tau = 1 and sigma = 0")


@dataclass
class Step:
    x: np.ndarray
    tag: str  # "init", "B" or "A"
    step_norm: float
    dist_A: float
    dist_B: float
    cert_ratio_tau: float
    cert_ratio_sigma: float


@dataclass
class IterationTrace:
    steps: list[Step]
    converged: bool = False
    limit: np.ndarray | None = None
    policy: InexactnessPolicy = field(default_factory=InexactnessPolicy)
    monotonicity_failure: bool = False
    tol: float = 1e-12

    @property
    def iterates(self) -> np.ndarray:
        return np.array([s.x for s in self.steps])

    @property
    def tags(self) -> list[str]:
        return [s.tag for s in self.steps]

    @property
    def step_norms(self) -> np.ndarray:
        return np.array([s.step_norm for s in self.steps[1:]])

    def __len__(self) -> int:
        return len(self.steps)

    def csv_text(self) -> str:
        buf = io.StringIO()
        write_csv(self, buf)
        return buf.getvalue()


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_csv(trace: IterationTrace, fh) -> None:
    """Columns: iter, tag, x_1..x_n, step_norm, dist_A, dist_B, cert_ratio_tau, cert_ratio_sigma."""
    n = trace.steps[0].x.size
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["iter", "tag", *[f"x_{i + 1}" for i in range(n)], "step_norm", "dist_A", "dist_B", "cert_ratio_tau", "cert_ratio_sigma"])
    for k, s in enumerate(trace.steps):
        w.writerow(
            [k, s.tag, *[_fmt(c) for c in s.x], _fmt(s.step_norm), _fmt(s.dist_A), _fmt(s.dist_B), _fmt(s.cert_ratio_tau), _fmt(s.cert_ratio_sigma)]
        )


def certificate(s: SetOracle, x: np.ndarray, a: np.ndarray) -> tuple[float, float]:
    """``(d(x, s)/||x - a||, d(x - a, N_s(a))/||x - a||)``."""
    r = float(np.linalg.norm(x - a))
    if r == 0.0:
        return 1.0, 0.0
    return s.distance(x) / r, cone_distance(s.proximal_normal_cone(a), x - a) / r


def _admissible(s, x, a, tau, sigma, slack=1e-12, d=None) -> bool:
    r = float(np.linalg.norm(x - a))
    if r == 0.0:
        return True
    if d is None:
        if not s.contains(a):
            return False
        d = s.distance(x)
    if tau is not None and tau * r > d + slack * r:
        return False
    return cone_distance(s.proximal_normal_cone(a), x - a) <= (sigma + slack) * r


def _select(s: SetOracle, x, tau, sigma, mode, rng, radius_factor, extra_ok=None) -> np.ndarray:
    x = as_point(x, s.dim)
    res = s.project(x)
    d = res.distance
    exact = res.points[0]
    # membership to machine precision; the looser set tolerance would stall iterations near 1e-9
    if d <= FLOOR * (1.0 + float(np.linalg.norm(x))):
        return x.copy()
    if mode == "nearest":
        return exact
    if s.convex and sigma == 0.0:
        # for convex sets x - a in N(a) characterizes the projection
        return exact
    # candidates come from sampling or projecting, so they already lie in s
    ok = lambda a: _admissible(s, x, a, tau, sigma, d=d) and (extra_ok is None or extra_ok(a))
    R = d * radius_factor

    def prefilter(pool):
        r = np.linalg.norm(pool - x, axis=1)
        keep = r <= R * (1 + 1e-12)
        return pool[keep]

    if mode == "random":
        trials = 0
        while trials < RANDOM_TRIALS:
            pool = prefilter(s.sample(x, R, 0, RANDOM_BATCH, rng))
            trials += RANDOM_BATCH
            good = [a for a in pool if ok(a)]
            if good:
                return good[int(rng.integers(len(good)))]
        return exact
    # adversarial: farthest admissible candidate, then a multiplicative hill-climb
    pool = prefilter(s.sample(x, R, 32, 32, rng))
    order = np.argsort(-np.linalg.norm(pool - x, axis=1), kind="stable")
    a = exact
    for i in order:
        if ok(pool[i]):
            if np.linalg.norm(x - pool[i]) > np.linalg.norm(x - a):
                a = pool[i]
            break
    if a is exact and not ok(exact):
        return exact
    h = 0.1 * d
    dirs = np.vstack([np.eye(s.dim), -np.eye(s.dim)])
    for _ in range(CLIMB_ROUNDS):
        if h < 1e-9 * d:
            break
        best, rb = None, float(np.linalg.norm(x - a)) * (1 + 1e-12)
        for e in dirs:
            c = s.project(a + h * e).points[0]
            rc = float(np.linalg.norm(x - c))
            if rc > rb and ok(c):
                best, rb = c, rc
        if best is None:
            h *= 0.5
        else:
            a, h = best, h * 1.1
    return a


def tau_sigma_project(s: SetOracle, x, tau: float, sigma: float, mode: str = "nearest", seed: int = 0, rng=None) -> np.ndarray:
    """
    A point ``a`` of ``s`` with ``tau*||x - a|| <= d(x, s)`` and
    ``d(x - a, N_s(a)) <= sigma*||x - a||``.

    ``nearest`` returns the (lexicographically first) exact projection;
    ``random`` draws set points within ``d(x, s)/tau`` of ``x`` and returns an
    admissible one; ``adversarial`` returns the farthest admissible point found.
    Both fall back to the exact projection.
    """
    InexactnessPolicy("tau-sigma", tau, sigma, mode)
    rng = rng if rng is not None else np.random.default_rng(np.uint64(seed))
    return _select(s, x, tau, sigma, mode, rng, 1.0 / tau)


def sigma_project(s: SetOracle, x, sigma: float, mode: str = "nearest", seed: int = 0, rng=None, max_dist: float | None = None) -> np.ndarray:
    """
    A point ``a`` of ``s`` with ``d(x - a, N_s(a)) <= sigma*||x - a||``; no
    distance constraint. Candidates are drawn within ``2 d(x, s)`` of ``x``.
    ``max_dist`` additionally caps ``||x - a||``.
    """
    InexactnessPolicy("sigma-monotone", 1.0, sigma, mode)
    rng = rng if rng is not None else np.random.default_rng(np.uint64(seed))
    extra = None
    if max_dist is not None:
        cap = max_dist * (1 + 1e-12)
        extra = lambda a: float(np.linalg.norm(as_point(x) - a)) <= cap
    return _select(s, x, None, sigma, mode, rng, 2.0, extra)


# ---------------------------------------------------------------------------
# drivers


class _Recorder:
    def __init__(self, A, B, x0, policy, tol):
        self.A, self.B, self.policy, self.tol = A, B, policy, tol
        x0 = as_point(x0, A.dim)
        if B.dim != A.dim:
            raise DomainError("sets must share a dimension")
        if not tol > 0:
            raise DomainError("tol must be positive")
        self.steps = [Step(x0.copy(), "init", 0.0, A.distance(x0), B.distance(x0), 1.0, 0.0)]

    def trace(self, **kw) -> IterationTrace:
        return IterationTrace(self.steps, policy=self.policy, tol=self.tol, **kw)

    def push(self, a, tag, prev) -> Step:
        if not np.all(np.isfinite(a)):
            raise NumericalFailure("non-finite iterate", self.trace())
        s = self.A if tag == "A" else self.B
        ct, cs = certificate(s, prev, a)
        st = Step(a.copy(), tag, float(np.linalg.norm(a - prev)), self.A.distance(a), self.B.distance(a), ct, cs)
        self.steps.append(st)
        return st

    def done(self, st: Step) -> bool:
        return st.step_norm < self.tol and st.dist_A < 10 * self.tol and st.dist_B < 10 * self.tol


def _run(A, B, x0, policy: InexactnessPolicy, tol, max_iter, choose) -> IterationTrace:
    rec = _Recorder(A, B, x0, policy, tol)
    x = rec.steps[0].x
    for k in range(int(max_iter)):
        tag = "B" if k % 2 == 0 else "A"
        a = choose(A if tag == "A" else B, x, k)
        st = rec.push(np.asarray(a, dtype=float).reshape(-1), tag, x)
        x = st.x
        if rec.done(st):
            return rec.trace(converged=True, limit=x.copy())
    return rec.trace(converged=False)


def alternating(A: SetOracle, B: SetOracle, x0, tol: float = 1e-12, max_iter: int = 100_000, tie: str = "lexicographic", seed: int = 0) -> IterationTrace:
    """
    Exact alternating projections from ``x0``.

    Ties in multi-valued projections go to the lexicographically first point,
    or to a seeded random choice with ``tie="random"``.
    """
    rng = np.random.default_rng(np.uint64(seed))

    def choose(s, x, k):
        pts = s.project(x).points
        if tie == "random" and pts.shape[0] > 1:
            return pts[int(rng.integers(pts.shape[0]))]
        return pts[0]

    if tie not in ("lexicographic", "random"):
        raise DomainError(f"unknown tie policy {tie!r}")
    return _run(A, B, x0, InexactnessPolicy(seed=seed), tol, max_iter, choose)


def run_tau_sigma(A, B, x0, tau: float, sigma: float, mode: str = "nearest", tol: float = 1e-12, max_iter: int = 100_000, seed: int = 0) -> IterationTrace:
    """Alternating ``(tau, sigma)``-projections onto ``B`` then ``A``."""
    policy = InexactnessPolicy("tau-sigma", tau, sigma, mode, seed)
    rng = np.random.default_rng(np.uint64(seed))
    choose = lambda s, x, k: _select(s, x, tau, sigma, mode, rng, 1.0 / tau)
    return _run(A, B, x0, policy, tol, max_iter, choose)


def run_sigma_monotone(A, B, x0, x1=None, sigma: float = 0.0, mode: str = "nearest", tol: float = 1e-12, max_iter: int = 100_000, seed: int = 0) -> IterationTrace:
    """
    Alternating ``sigma``-projections whose step lengths never increase.

    Candidates breaking monotonicity are rejected; the exact projection is the
    last resort. If even it lengthens the step, the trace stops with
    ``monotonicity_failure`` set.
    """
    policy = InexactnessPolicy("sigma-monotone", 1.0, sigma, mode, seed)
    rng = np.random.default_rng(np.uint64(seed))
    rec = _Recorder(A, B, x0, policy, tol)
    x = rec.steps[0].x
    if x1 is None:
        x1 = sigma_project(B, x, sigma, mode, rng=rng)
    x1 = as_point(x1, A.dim)
    if not B.contains(x1) or not _admissible(B, x, x1, None, sigma, slack=1e-9):
        raise DomainError("x1 is not a sigma-projection of x0 on B")
    st = rec.push(x1, "B", x)
    x, prev_step = st.x, st.step_norm
    if rec.done(st):
        return rec.trace(converged=True, limit=x.copy())
    for k in range(1, int(max_iter)):
        tag = "B" if k % 2 == 0 else "A"
        s = A if tag == "A" else B
        a = sigma_project(s, x, sigma, mode, rng=rng, max_dist=prev_step)
        if np.linalg.norm(a - x) > prev_step * (1 + 1e-12):
            a = s.project(x).points[0]
            if np.linalg.norm(a - x) > prev_step * (1 + 1e-12):
                return rec.trace(converged=False, monotonicity_failure=True)
        st = rec.push(a, tag, x)
        x, prev_step = st.x, st.step_norm
        if rec.done(st):
            return rec.trace(converged=True, limit=x.copy())
    return rec.trace(converged=False)


def distance_decrease(A: SetOracle, a, b, delta: float, mu: float | None = None, n_grid: int = 200, n_random: int = 200, seed: int = 0):
    """
    Evaluate the distance-decrease inequality ``d(b, A) <= ||a - b|| - mu*delta``.

    When ``mu`` is omitted it is estimated as the smallest
    ``d((b - u)/||b - u||, N_A(u))`` over sampled ``u`` in ``A`` within
    ``delta`` of ``a`` and no farther from ``b`` than ``a`` is.

    Returns ``(holds, mu_hat, lhs, rhs)``.
    """
    a = as_point(a, A.dim)
    b = as_point(b, A.dim)
    if not A.contains(a):
        raise DomainError("a must lie in A")
    if A.contains(b):
        raise DomainError("b must lie outside A")
    if not delta > 0:
        raise DomainError("delta must be positive")
    r = float(np.linalg.norm(a - b))
    if mu is None:
        rng = np.random.default_rng(np.uint64(seed))
        # nearest points of b inside the ball are where the infimum vanishes; sampling alone would miss them
        P = A.project(b).points
        P = P[np.linalg.norm(P - a, axis=1) <= delta]
        U = np.vstack([A.sample(a, delta, n_grid, n_random, rng).reshape(-1, A.dim), a[None, :], P])
        mu = np.inf
        for u in U:
            ru = float(np.linalg.norm(u - b))
            if ru <= r * (1 + 1e-12):
                mu = min(mu, cone_distance(A.proximal_normal_cone(u), (b - u) / ru))
        mu = float(mu)
    lhs = A.distance(b)
    rhs = r - mu * delta
    return bool(lhs <= rhs + 1e-9), mu, lhs, rhs


def verify_distance_decrease(A: SetOracle, a, b, delta: float, mu: float | None = None, seed: int = 0) -> bool:
    """Whether ``d(b, A) <= ||a - b|| - mu*delta + 1e-9``; see :func:`distance_decrease`."""
    return distance_decrease(A, a, b, delta, mu, seed=seed)[0]
