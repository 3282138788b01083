"""
Empirical R-linear rates of iteration traces and the theoretical rate bounds
they are compared against.

Rates come in two flavours. The per-projection rate is the geometric mean of
``||x_{k+1} - x*|| / ||x_k - x*||``; the per-cycle rate multiplies two
consecutive ratios (one projection onto each set). The exact and
sigma-monotone bounds are per projection; the (tau, sigma) bound is checked per
cycle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, HypothesisViolation, NoRateError
from .iterate import IterationTrace, InexactnessPolicy, Step

GAMMA_MARGIN = 1e-6
RATE_SLACK = 5e-3
C_MARGIN = 0.01
SUPER_REGULAR_GATE = 0.05
REGULAR_GATE = 1e-2

TAGS = {"exact": "LLM-1.2", "restricted": "BLPW-2.11", "dil": "DIL-3.8", "uniform": "UNIF-3.11"}


@dataclass
class RateEstimate:
    rate: float
    cycle_rate: float
    window: tuple[int, int]
    ratios: np.ndarray
    per_cycle_ratios: np.ndarray
    limit_estimate: np.ndarray

    def as_dict(self) -> dict:
        return {
            "rate_per_projection": float(self.rate),
            "rate_per_cycle": float(self.cycle_rate),
            "window": [int(self.window[0]), int(self.window[1])],
            "n_ratios": int(self.ratios.size),
            "limit_estimate": [float(t) for t in self.limit_estimate],
        }


def _geomean(r: np.ndarray) -> float:
    if r.size == 0:
        return 0.0
    if np.any(r <= 0):
        return 0.0
    return float(np.exp(np.mean(np.log(r))))


def estimate_rate(trace: IterationTrace, skip: int = 1) -> RateEstimate:
    """
    R-linear rate of a converged trace, with the final iterate as the limit.

    The window starts at iterate ``skip`` (the starting point lies on neither
    set, so its ratio says nothing about the contraction) and runs while the
    distance to the limit exceeds ``100*tol``. The window is trimmed to an
    even number of ratios so it spans whole cycles.
    """
    if not trace.converged:
        raise NoRateError("trace did not converge")
    X = trace.iterates
    xs = trace.limit if trace.limit is not None else X[-1]
    e = np.linalg.norm(X - xs, axis=1)
    floor = 100.0 * trace.tol
    end = skip
    while end < len(e) - 1 and e[end] > floor:
        end += 1
    n = end - skip
    n -= n % 2
    ratios = e[skip + 1 : skip + n + 1] / e[skip : skip + n] if n > 0 else np.zeros(0)
    cyc = ratios[0::2] * ratios[1::2] if n > 0 else np.zeros(0)
    rate = _geomean(ratios)
    return RateEstimate(rate, _geomean(cyc) if cyc.size else rate**2, (skip, skip + n), ratios, cyc, np.array(xs, dtype=float))


def trace_from_points(points, tol: float = 1e-12) -> IterationTrace:
    """Wrap a point sequence (for example a synthetic one) as a converged trace."""
    P = np.asarray(points, dtype=float)
    steps = []
    for k, x in enumerate(P):
        tag = "init" if k == 0 else ("B" if k % 2 else "A")
        sn = 0.0 if k == 0 else float(np.linalg.norm(x - P[k - 1]))
        steps.append(Step(x, tag, sn, np.nan, np.nan, 1.0, 0.0))
    return IterationTrace(steps, converged=True, limit=P[-1].copy(), tol=tol)


# ---------------------------------------------------------------------------
# bounds


@dataclass
class DilBound:
    gamma_star: float
    c: float
    feasible: bool


def bound_dil(theta4: float, tau: float, sigma: float) -> DilBound:
    """
    Rate ``c = (1 - g**2 + g*sigma)/tau`` at the largest admissible ``g``.

    ``g`` ranges over ``sigma < g < theta4`` with ``g - sigma <= tau``; ``c``
    decreases in ``g`` there, so ``g* = min(theta4, sigma + tau) - 1e-6``.
    ``feasible`` is false when no admissible ``g`` gives ``c < 1``.
    """
    if not 0 < tau <= 1:
        raise DomainError("tau must lie in (0, 1]")
    if not 0 <= sigma < 1:
        raise DomainError("sigma must lie in [0, 1)")
    if not theta4 <= 1 + 1e-12:
        raise DomainError("theta4 must not exceed 1")
    if sigma >= theta4:
        raise HypothesisViolation(f"sigma = {sigma} is not below theta4 = {theta4}")
    g = min(theta4, sigma + tau) - GAMMA_MARGIN
    c = (1.0 - g * g + g * sigma) / tau
    return DilBound(g, c, bool(g > sigma and c < 1.0))


@dataclass
class UniformBound:
    c0: float
    applicable: bool


def bound_uniform(c_hat: float, sigma: float) -> UniformBound:
    """``c0 = c(1 - s^2) + s^2 + 2 s sqrt(1 - s^2) + s``; inapplicable when ``c0 >= 1``."""
    if not -1 - 1e-12 <= c_hat <= 1 + 1e-12:
        raise DomainError("c_hat must lie in [-1, 1]")
    if not 0 <= sigma < 1:
        raise DomainError("sigma must lie in [0, 1)")
    s2 = sigma * sigma
    c0 = c_hat * (1 - s2) + s2 + 2 * sigma * np.sqrt(1 - s2) + sigma
    return UniformBound(float(c0), bool(c0 < 1.0))


# ---------------------------------------------------------------------------
# verdicts


@dataclass
class BoundReport:
    theorem: str
    inputs: dict
    bound: float
    empirical: float
    rate_kind: str  # "per-projection" or "per-cycle"
    applicable: bool
    satisfied: bool | None
    slack: float
    reasons: list[str] = field(default_factory=list)

    @property
    def status(self) -> str:
        if not self.applicable:
            return "NOT-APPLICABLE"
        return "SATISFIED" if self.satisfied else "VIOLATED"

    def as_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "status": self.status,
            "inputs": dict(self.inputs),
            "bound": self.bound,
            "empirical": self.empirical,
            "rate_kind": self.rate_kind,
            "slack": self.slack,
            "reasons": list(self.reasons),
        }


def _verdict(theorem, inputs, bound, empirical, kind, reasons) -> BoundReport:
    if reasons:
        return BoundReport(theorem, inputs, float(bound), float(empirical), kind, False, None, float("nan"), reasons)
    ok = empirical <= bound + RATE_SLACK
    return BoundReport(theorem, inputs, float(bound), float(empirical), kind, True, bool(ok), float(bound - empirical))


def _smallest(constants) -> dict:
    lvl = constants.levels[-1]
    sr = constants.super_regularity
    bsr = constants.b_super_regularity
    g = sr[min(sr)] if sr else float("nan")
    bg = bsr[min(bsr)] if bsr else float("nan")
    return {
        "level": len(constants.levels) - 1,
        "rho": lvl.rho,
        "c_hat": lvl.c_hat,
        "c1_hat": lvl.c1_hat,
        "c4_hat": lvl.c4_hat,
        "theta4_hat": lvl.theta4_hat,
        "gamma": g,
        "b_gamma": bg,
    }


def _check_llm(k, rate: RateEstimate) -> BoundReport:
    cbar = max(k["c_hat"], 0.0)
    c = cbar + C_MARGIN
    reasons = []
    if not k["c_hat"] < 1 - REGULAR_GATE:
        reasons.append(f"not uniformly regular: c_hat = {k['c_hat']:.6g}")
    if not k["gamma"] < SUPER_REGULAR_GATE:
        reasons.append(f"A not super-regular: gamma = {k['gamma']:.6g}")
    if c >= 1 and not reasons:
        reasons.append("c_hat + margin is not below 1")
    bound = np.sqrt(min(c, 1.0))
    return _verdict(TAGS["exact"], {**k, "c": c}, bound, rate.rate, "per-projection", reasons)


def _check_blpw(k, rate: RateEstimate) -> BoundReport:
    c = max(k["c1_hat"], 0.0) + C_MARGIN
    reasons = []
    if not k["c1_hat"] < 1 - REGULAR_GATE:
        reasons.append(f"not BLPW-restrictedly regular: c1_hat = {k['c1_hat']:.6g}")
    if not k["b_gamma"] < SUPER_REGULAR_GATE:
        reasons.append(f"A not B-super-regular: gamma_B = {k['b_gamma']:.6g}")
    if c >= 1 and not reasons:
        reasons.append("c1_hat + margin is not below 1")
    return _verdict(TAGS["restricted"], {**k, "c": c}, np.sqrt(min(c, 1.0)), rate.rate, "per-projection", reasons)


def _check_dil(k, rate: RateEstimate, tau, sigma) -> BoundReport:
    th = k["theta4_hat"]
    reasons, c, g = [], float("nan"), float("nan")
    if not th > REGULAR_GATE:
        reasons.append(f"not DIL-restrictedly regular: theta4_hat = {th:.6g}")
    else:
        try:
            b = bound_dil(min(th, 1.0), tau, sigma)
            c, g = b.c, b.gamma_star
            if not b.feasible:
                reasons.append(f"no admissible gamma gives c < 1 (c = {c:.6g})")
        except HypothesisViolation as exc:
            reasons.append(str(exc))
    return _verdict(TAGS["dil"], {**k, "tau": tau, "sigma": sigma, "gamma_star": g, "c": c}, c, rate.cycle_rate, "per-cycle", reasons)


def _check_unif(k, rate: RateEstimate, sigma) -> BoundReport:
    reasons = []
    ch = k["c_hat"]
    c0 = float("nan")
    if not np.isfinite(ch):
        reasons.append("no normals sampled: c_hat is -inf")
    else:
        u = bound_uniform(float(np.clip(ch, -1, 1)), sigma)
        c0 = u.c0
        if c0 + C_MARGIN >= 1:
            reasons.append(f"c0 + margin is not below 1 (c0 = {c0:.6g})")
    if not k["gamma"] < SUPER_REGULAR_GATE:
        reasons.append(f"A not super-regular: gamma = {k['gamma']:.6g}")
    c = c0 + C_MARGIN
    bound = np.sqrt(c) if np.isfinite(c) and c < 1 else float("nan")
    return _verdict(TAGS["uniform"], {**k, "sigma": sigma, "c0": c0, "c": c}, bound, rate.rate, "per-projection", reasons)


def compare_all(trace: IterationTrace, constants, policy: InexactnessPolicy | None = None) -> list[BoundReport]:
    """Every theorem matching the policy's scheme, in order of preference."""
    policy = policy or trace.policy
    rate = estimate_rate(trace)
    k = _smallest(constants)
    if policy.scheme == "exact":
        return [_check_llm(k, rate), _check_blpw(k, rate), _check_dil(k, rate, 1.0, 0.0)]
    if policy.scheme == "tau-sigma":
        return [_check_dil(k, rate, policy.tau, policy.sigma)]
    return [_check_unif(k, rate, policy.sigma)]


def compare(trace: IterationTrace, constants, policy: InexactnessPolicy | None = None) -> BoundReport:
    """
    Verdict for the first applicable theorem.

    When none applies, the first candidate is returned as NOT-APPLICABLE with
    the reasons of every candidate.
    """
    reps = compare_all(trace, constants, policy)
    for r in reps:
        if r.applicable:
            return r
    head = reps[0]
    head.reasons = [f"{r.theorem}: {why}" for r in reps for why in r.reasons]
    return head
