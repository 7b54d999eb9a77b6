import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nwidths import Instance, LpBall, NormTag, Operator, Simplex, VPolytope  # noqa: E402

ACCEPTANCE_LINES: list = []


def make(matrix, source, target, body, name=""):
    return Instance(Operator(np.asarray(matrix, dtype=float), NormTag.parse(source),
                             NormTag.parse(target)), body, name)


@pytest.fixture
def diag3():
    return make(np.diag([1, .5, .25]), "l2", "l2", LpBall(NormTag.L2, 1.0, 3), "diag3")


@pytest.fixture
def cross2_linf():
    return make(np.eye(2), "l1", "linf", LpBall(NormTag.L1, 1.0, 2), "cross2")


@pytest.fixture
def simplex2_l2():
    return make(np.eye(2), "l2", "l2", Simplex(2), "simplex2")


@pytest.fixture
def unit_square_linf():
    return make(np.eye(2), "linf", "linf",
                VPolytope(np.array([[0, 0], [1, 0], [0, 1], [1, 1.]])), "square")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
