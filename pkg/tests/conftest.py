import math

import numpy as np
import pytest

from altproj import sets as S

R2 = 1 / math.sqrt(2)


def two_lines(deg):
    phi = math.radians(deg)
    c, s = (0.0, 1.0) if deg == 90 else (math.cos(phi), math.sin(phi))
    return S.line((0, 0), (1, 0)), S.line((0, 0), (c, s))


def ex215():
    return S.sawtooth_graph(40), S.diagonal_line()


def ex216():
    A = S.ray_union((0, 0), [(1, 0), (R2, -R2)])
    B = S.ray_union((0, 0), [(1, 0), (R2, R2)])
    return A, B


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def origin():
    return np.zeros(2)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
