import numpy as np
import pytest

from jfrff.graphs import Graph
from jfrff.spectral import eigendecompose


@pytest.hookimpl(tryfirst=True, hookwrapper=True)
def pytest_runtest_makereport(item, call):
    # expose each phase's report on the item so fixtures can see pass/fail
    outcome = yield
    report = outcome.get_result()
    setattr(item, "rep_" + report.when, report)


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def path2_graph():
    # unit 2-path: single edge of weight 1
    return Graph(adjacency=np.array([[0.0, 1.0], [1.0, 0.0]]))


@pytest.fixture
def path2_lap_basis(path2_graph):
    lap = np.array([[1.0, -1.0], [-1.0, 1.0]])
    return eigendecompose(lap)


def random_symmetric(rng, n):
    a = rng.normal(size=(n, n))
    return a + a.T


@pytest.fixture
def sym6_basis(rng):
    return eigendecompose(random_symmetric(rng, 6))
