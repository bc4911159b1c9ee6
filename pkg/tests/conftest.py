import numpy as np
import pytest

from brinkfd.fespace import build_spaces
from brinkfd.geometry import Geometry
from brinkfd.mesh import alfeld_split, build_uniform


def small(n, depth=3):
    mesh = alfeld_split(build_uniform(n))
    V, Q = build_spaces(mesh)
    return mesh, V, Q, Geometry(mesh, depth=depth)


@pytest.fixture(scope="session")
def n2():
    return small(2)


@pytest.fixture(scope="session")
def n4():
    return small(4, depth=5)


@pytest.fixture(scope="session")
def n20():
    return small(20, depth=5)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
