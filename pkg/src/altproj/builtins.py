"""Built-in scenarios, stored as scenario text with a one-line provenance."""

from __future__ import annotations

import math

_LADDER = """\
ladder.rho0 = 0.25
ladder.factor = 0.5
ladder.levels = 6
"""

EX_215 = """\
# sawtooth graph against the diagonal: BLPW-DIL regular, not DIL regular
name = example-2.15
dim = 2
setA.kind = sawtooth-graph
setA.depth = 40
setB.kind = diagonal-line
setB.t0 = 0
setB.t1 = 1
xbar = 0, 0
method.scheme = exact
run.x0 = 0.4, 0.35
""" + _LADDER

EX_216 = """\
# two ray unions sharing a branch: DIL regular, not BLPW-DIL regular
name = example-2.16
dim = 2
setA.kind = ray-union
setA.origin = 0, 0
setA.directions = 1, 0; 0.7071067811865476, -0.7071067811865476
setB.kind = ray-union
setB.origin = 0, 0
setB.directions = 1, 0; 0.7071067811865476, 0.7071067811865476
xbar = 0, 0
method.scheme = exact
""" + _LADDER


def _two_lines(deg: int, method: str = "method.scheme = exact\n", suffix: str = "") -> str:
    phi = math.radians(deg)
    c, s = (0.0, 1.0) if deg == 90 else (math.cos(phi), math.sin(phi))
    return (
        f"name = two-lines-{deg}{suffix}\n"
        "dim = 2\n"
        "setA.kind = line\n"
        "setA.point = 0, 0\n"
        "setA.direction = 1, 0\n"
        "setB.kind = line\n"
        "setB.point = 0, 0\n"
        f"setB.direction = {c!r}, {s!r}\n"
        "xbar = 0, 0\n" + method + _LADDER
    )


BUILTINS: dict[str, tuple[str, str]] = {
    "example-2.15": (EX_215, "reference example: sawtooth graph vs diagonal, c2 = 2/sqrt(5), c4 = 1"),
    "example-2.16": (EX_216, "reference example: ray unions, c4 = 1/sqrt(2), c2 = 1"),
}
for _d in (30, 45, 60, 90):
    BUILTINS[f"two-lines-{_d}"] = (_two_lines(_d), f"derived: lines at {_d} deg, c = cos(phi), cycle rate cos^2(phi)")
BUILTINS["two-lines-60-tau-sigma"] = (
    _two_lines(60, "method.scheme = tau-sigma\nmethod.tau = 0.9\nmethod.sigma = 0.05\nmethod.mode = adversarial\nrun.seeds = 0; 1; 2\n", "-tau-sigma"),
    "derived: lines at 60 deg, (0.9, 0.05)-projections, adversarial selection",
)
BUILTINS["two-lines-60-sigma-monotone"] = (
    _two_lines(60, "method.scheme = sigma-monotone\nmethod.sigma = 0.05\nmethod.mode = nearest\n", "-sigma-monotone"),
    "derived: lines at 60 deg, 0.05-projections with monotone steps",
)


def listing() -> str:
    """One line per built-in: name and provenance."""
    w = max(map(len, BUILTINS))
    return "".join(f"{k:<{w}}  {p}\n" for k, (_, p) in BUILTINS.items())
