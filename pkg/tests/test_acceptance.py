"""
Acceptance criteria, one test per criterion, each at its stated tolerance.
Every test prints a single ``CRITERION n: PASS|FAIL`` line (also repeated in
the terminal summary).
"""

import math
import time

import numpy as np
import pytest

from altproj import sets as S
from altproj.analysis import RATE_SLACK, bound_dil, bound_uniform, estimate_rate
from altproj.builtins import BUILTINS
from altproj.geometry import cone_distance, projection_angle_gap, unit_sphere_samples
from altproj.iterate import alternating, distance_decrease, run_sigma_monotone, run_tau_sigma
from altproj.regularity import RadiusLadder, estimate_c2, estimate_c4_theta4, estimate_c_uniform
from altproj.scenario import load

from conftest import ACCEPTANCE_LINES, ex215, ex216, two_lines

O = np.zeros(2)
LADDER = RadiusLadder(0.25, 0.5, 6)
SEEDS = range(20)
_golden = {}


def report(n, ok, detail):
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def start(seed, radius=0.125):
    g = np.random.default_rng([seed, 11]).standard_normal(2)
    return radius * g / np.linalg.norm(g)


def golden(name):
    if name not in _golden:
        A, B = {"ex215": ex215, "ex216": ex216}[name]()
        t = time.perf_counter()
        c2 = estimate_c2(A, B, O, LADDER)[-1].value
        c4, th4 = estimate_c4_theta4(A, B, O, LADDER)[-1]
        _golden[name] = (c2, c4.value, th4.value, time.perf_counter() - t)
    return _golden[name]


def test_criterion_1_example_215_constants():
    c2, c4, _, dt = golden("ex215")
    ok = abs(c2 - 2 / math.sqrt(5)) <= 1e-2 and abs(c4 - 1) <= 1e-2 and dt < 10
    report(1, ok, f"c2={c2:.6f} (target {2 / math.sqrt(5):.6f}), c4={c4:.6f} (target 1), {dt:.2f}s < 10s")


def test_criterion_2_example_216_constants():
    c2, c4, _, dt = golden("ex216")
    ok = abs(c4 - 1 / math.sqrt(2)) <= 1e-2 and abs(c2 - 1) <= 1e-2 and dt < 10
    report(2, ok, f"c4={c4:.6f} (target {1 / math.sqrt(2):.6f}), c2={c2:.6f} (target 1), {dt:.2f}s < 10s")


def test_criterion_3_pythagorean_identity():
    worst, checked = 0.0, 0
    for name in BUILTINS:
        sc = load(name)
        for c4, th4 in estimate_c4_theta4(sc.A, sc.B, sc.xbar, sc.ladder, config=sc.sampling):
            worst = max(worst, abs(c4.value**2 + th4.value**2 - 1))
            checked += 1
    report(3, worst <= 1e-9, f"max |c4^2 + theta4^2 - 1| = {worst:.2e} over {checked} levels of {len(BUILTINS)} builtins")


def test_criterion_4_two_line_family():
    parts, ok = [], True
    for deg in (30, 45, 60):
        A, B = two_lines(deg)
        phi = math.radians(deg)
        c_hat = estimate_c_uniform(A, B, O, LADDER)[-1].value
        rates = [estimate_rate(alternating(A, B, start(s))).cycle_rate for s in range(5)]
        worst = max(abs(r - math.cos(phi) ** 2) for r in rates)
        # every c above c_hat + 0.01 (sampled up to 1) must dominate the per-cycle rate (sqrt c)^2
        cs = np.linspace(c_hat + 0.01, 1.0, 50)
        bounded = all(max(rates) <= c for c in cs)
        ok &= worst <= 1e-2 and abs(c_hat - math.cos(phi)) <= 1e-2 and bounded
        parts.append(f"{deg}deg rate err {worst:.1e}, c_hat {c_hat:.4f}")
    report(4, ok, "; ".join(parts))


def test_criterion_5_dil_bound():
    A, B = two_lines(60)
    theta4 = estimate_c4_theta4(A, B, O, LADDER)[-1][1].value
    t0 = time.perf_counter()
    runs, converged, violations, worst = 0, 0, 0, -np.inf
    for tau in (0.9, 1.0):
        for sigma in (0.0, 0.05, 0.1):
            assert sigma < theta4
            c = bound_dil(theta4, tau, sigma).c
            for mode in ("nearest", "random", "adversarial"):
                for seed in SEEDS:
                    tr = run_tau_sigma(A, B, start(seed), tau, sigma, mode, seed=seed)
                    runs += 1
                    if tr.converged:
                        converged += 1
                        r = estimate_rate(tr).cycle_rate
                        worst = max(worst, r - c)
                        violations += r > c + RATE_SLACK
    dt = time.perf_counter() - t0
    ok = violations == 0 and converged == runs and dt < 60
    report(5, ok, f"{converged}/{runs} converged, {violations} violations, max(rate - c) = {worst:.3f}, {dt:.1f}s < 60s")


def test_criterion_6_uniform_bound():
    A, B = two_lines(60)
    c_hat = estimate_c_uniform(A, B, O, LADDER)[-1].value
    runs, violations, flags_nearest, worst = 0, 0, 0, -np.inf
    for sigma in (0.0, 0.05):
        bound = math.sqrt(bound_uniform(c_hat, sigma).c0 + 0.01)
        for mode in ("nearest", "random", "adversarial"):
            for seed in SEEDS:
                x0 = A.project(start(seed)).points[0]
                tr = run_sigma_monotone(A, B, x0, sigma=sigma, mode=mode, seed=seed)
                runs += 1
                if mode == "nearest":
                    flags_nearest += tr.monotonicity_failure
                if tr.converged:
                    r = estimate_rate(tr).rate
                    worst = max(worst, r - bound)
                    violations += r > bound
                else:
                    violations += 1
    ok = violations == 0 and flags_nearest == 0
    report(6, ok, f"{runs} runs, {violations} violations, max(rate - sqrt(c0 + 0.01)) = {worst:.3f}, nearest-mode monotonicity flags: {flags_nearest}")


GOLDEN_SETS = {
    "sawtooth": lambda: ex215()[0],
    "diagonal": lambda: ex215()[1],
    "rays-A": lambda: ex216()[0],
    "rays-B": lambda: ex216()[1],
    "line-60": lambda: two_lines(60)[1],
}


def test_criterion_7_property_suites():
    rng = np.random.default_rng(7)
    counts = dict.fromkeys(["idempotence", "nonexpansive", "inclusion", "gap", "decrease"], 0)
    fails = dict.fromkeys(counts, 0)
    sets = {k: f() for k, f in GOLDEN_SETS.items()}
    others = {"sawtooth": sets["diagonal"], "diagonal": sets["sawtooth"], "rays-A": sets["rays-B"], "rays-B": sets["rays-A"], "line-60": two_lines(60)[0]}
    for name, s in sets.items():
        for x in rng.uniform(-0.6, 0.6, (200, 2)):
            for p in s.project(x).points:
                counts["idempotence"] += 1
                again = s.project(p)
                fails["idempotence"] += not (again.distance <= 1e-12 * (1 + np.linalg.norm(p)) and np.min(np.linalg.norm(again.points - p, axis=1)) <= 1e-12 * (1 + np.linalg.norm(p)))
        for a in s.sample(O, 0.3, 20, 10, rng):
            r = S.restricted_proximal_normal_cone(s, others[name], a)
            p = s.proximal_normal_cone(a)
            for u in unit_sphere_samples(r, 6):
                counts["inclusion"] += 1
                fails["inclusion"] += cone_distance(p, u) > 1e-9
        # distance decrease on 100 sampled configurations
        pts = s.sample(O, 0.5, 100, 100, rng)
        n = 0
        while n < 100:
            a = pts[rng.integers(len(pts))]
            b = a + rng.uniform(0.01, 0.5) * rng.standard_normal(2)
            if s.distance(b) <= 1e-6:
                continue
            delta = rng.uniform(0.005, 0.5)
            holds = distance_decrease(s, a, b, delta, n_grid=60, n_random=40, seed=int(n))[0]
            counts["decrease"] += 1
            fails["decrease"] += not holds
            n += 1
    for s in (S.Ball((0.2, 0.1), 0.7), S.ConvexPolygon([(0, 0), (1, 0), (1, 1), (0, 1)]), S.Halfspace((1, -2), 0.3), S.line((0, 0), (1, 3))):
        for x, y in rng.uniform(-2, 2, (200, 2, 2)):
            counts["nonexpansive"] += 1
            px, py = s.project(x).points, s.project(y).points
            fails["nonexpansive"] += not (len(px) == 1 and len(py) == 1 and np.linalg.norm(px[0] - py[0]) <= np.linalg.norm(x - y) + 1e-12)
    for _ in range(10_000):
        n = int(rng.integers(2, 6))
        x, y = rng.standard_normal((2, n))
        counts["gap"] += 1
        fails["gap"] += projection_angle_gap(x, y) < -1e-12
    ok = sum(fails.values()) == 0
    report(7, ok, ", ".join(f"{k} {fails[k]}/{counts[k]}" for k in counts) + " violations")


def test_criterion_8_independence():
    c2_15, c4_15, _, _ = golden("ex215")
    c2_16, c4_16, _, _ = golden("ex216")
    blpw_dil_15, not_dil_15 = c2_15 < 1, c4_15 >= 1 - 1e-2
    dil_16, not_blpw_dil_16 = c4_16 < 1 - 0.2, c2_16 >= 1 - 1e-2
    ok = blpw_dil_15 and not_dil_15 and dil_16 and not_blpw_dil_16
    report(
        8,
        ok,
        f"example-2.15: BLPW-DIL-regular={blpw_dil_15} (c2={c2_15:.4f}), DIL-regular={not not_dil_15} (c4={c4_15:.4f}); "
        f"example-2.16: DIL-regular={dil_16} (c4={c4_16:.4f}), BLPW-DIL-regular={not not_blpw_dil_16} (c2={c2_16:.4f})",
    )
