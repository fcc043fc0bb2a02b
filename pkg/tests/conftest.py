import pytest

from qgraphpy.checker import FAIL, CheckOptions
from qgraphpy.graph_model import MetricGraph, VertexCondition
from qgraphpy.spectrum import Mesh, Solver


@pytest.fixture
def mesh():
    return Mesh(32)


@pytest.fixture
def solver():
    return Solver(n_elements=32)


@pytest.fixture
def options():
    return CheckOptions(n_elements=24)


@pytest.fixture
def triangle():
    return MetricGraph.cycle([1.0, 0.8, 1.2])


@pytest.fixture
def deltaprime_star():
    return MetricGraph.star(
        [1.0, 0.7, 1.3],
        center=VertexCondition.delta_prime(1.5),
        tips=VertexCondition.standard(),
    )


@pytest.fixture
def deltaprime_path():
    return MetricGraph.path(
        [1.0, 0.8],
        condition=VertexCondition.delta_prime(2.0),
        ends=VertexCondition.delta_prime(1.0),
    )


@pytest.fixture
def anti_flower():
    return MetricGraph.flower([1.0, 1.0, 1.0], VertexCondition.anti_standard())


@pytest.fixture
def failures():
    def _failures(verdicts):
        return [v for v in verdicts if v.status == FAIL]

    return _failures
