import math

import numpy as np
import pytest

from electroskeleton.config import RunConfig
from electroskeleton.equilibrium import build_mesh, solve_equilibrium
from electroskeleton.geom2d import EQUILATERAL, UNIT_SQUARE, regular_polygon, validate_polygon
from electroskeleton.pipeline import run_pipeline
from electroskeleton.reflections import ReflectedFieldSet

SCALENE = np.array([[0.0, 0.0], [1.0, 0.0], [0.3, 0.8]])
EQ_CENTROID = np.array([0.5, math.sqrt(3) / 6])


def _config(vertices, **kw) -> RunConfig:
    return RunConfig(vertices=tuple(map(tuple, np.asarray(vertices, dtype=float).tolist())), **kw)


@pytest.fixture(scope="session")
def tri():
    return validate_polygon(EQUILATERAL)


@pytest.fixture(scope="session")
def square():
    return validate_polygon(UNIT_SQUARE)


@pytest.fixture(scope="session")
def tri_sol(tri):
    return solve_equilibrium(build_mesh(tri, 64, 3))


@pytest.fixture(scope="session")
def square_sol(square):
    return solve_equilibrium(build_mesh(square, 64, 3))


@pytest.fixture(scope="session")
def tri_fields(tri, tri_sol):
    return ReflectedFieldSet(tri, tri_sol)


@pytest.fixture(scope="session")
def square_fields(square, square_sol):
    return ReflectedFieldSet(square, square_sol)


@pytest.fixture(scope="session")
def run_cached():
    """Memoized default-resolution pipeline runs keyed by fixture name."""
    cache = {}
    shapes = {
        "equilateral": EQUILATERAL,
        "square": UNIT_SQUARE,
        "scalene": SCALENE,
        "pentagon": regular_polygon(5),
        "hexagon": regular_polygon(6),
    }

    def get(name):
        if name not in cache:
            cfg = _config(shapes[name])
            cache[name] = (cfg, run_pipeline(cfg))
        return cache[name]

    return get


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
