import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgraphpy import bounds
from qgraphpy.checker import GraphParams, random_graph
from qgraphpy.errors import (
    IndexOutOfRange,
    NotATree,
    NotBipartite,
    ZeroStrengthVertexWithoutRemarkPath,
)
from qgraphpy.graph_model import MetricGraph, VertexCondition
from qgraphpy.spectrum import Mesh


def test_standard_upper():
    r = bounds.bound_standard_upper(1, 0, 1, 1.0)
    assert r.bound_id == "ariturk1" and r.side == "upper"
    assert r.value == pytest.approx(np.pi ** 2)


@pytest.mark.parametrize(
    "alpha, lower_index, upper_index, applicable",
    [(0.0, 3, 7, True), (2.0, 3, 8, True), (-2.0, 2, 7, True)],
)
def test_delta_bounds(alpha, lower_index, upper_index, applicable):
    lower, upper = bounds.bounds_delta(4, 3, 2, 1.0, alpha)
    assert lower.value == pytest.approx((lower_index * np.pi) ** 2)
    assert upper.value == pytest.approx((upper_index * np.pi) ** 2)
    assert lower.applicable is applicable


def test_delta_lower_with_nonpositive_index():
    lower, _ = bounds.bounds_delta(1, 3, 3, 1.0, 1.0)
    assert lower.value == 0.0 and lower.applicable
    lower, _ = bounds.bounds_delta(1, 3, 3, 1.0, -1.0)
    assert not lower.applicable


@pytest.mark.parametrize("k", [1, 3, 7])
@pytest.mark.parametrize("n_edges, n_vertices", [(1, 2), (3, 3), (5, 2), (4, 5)])
def test_dirichlet_standard_reduces_to_standard(k, n_edges, n_vertices):
    betti = n_edges - n_vertices + 1
    a = bounds.bound_dirichlet_standard_upper(k, betti, 0, n_vertices, 2.0)
    b = bounds.bound_standard_upper(k, betti, n_edges, 2.0)
    assert a.value == pytest.approx(b.value)


@pytest.mark.parametrize(
    "make",
    [
        lambda L: bounds.bound_standard_upper(2, 1, 3, L),
        lambda L: bounds.bound_standard_spanning_upper(2, 1, 3, L),
        lambda L: bounds.bound_antistandard_spanning_upper(2, 3, L),
        lambda L: bounds.bounds_antistandard(2, 3, 2, L)["anti2"][1],
    ],
)
def test_upper_bounds_decrease_with_length(make):
    assert make(2.0).value < make(1.0).value


def test_spanning_bounds_need_two_edges():
    assert not bounds.bound_standard_spanning_upper(1, 0, 1, 1.0).applicable
    assert not bounds.bound_antistandard_spanning_upper(1, 1, 1.0).applicable
    assert bounds.bound_standard_spanning_upper(1, 0, 2, 1.0).k == 2


def test_deltaprime_negative_lower():
    assert not bounds.bound_deltaprime_negative_lower(3, 2, 1.0).applicable
    r = bounds.bound_deltaprime_negative_lower(6, 2, 1.0)
    assert r.value == pytest.approx((2 * np.pi / 2) ** 2)


def test_deltaprime_star_lower():
    r = bounds.bound_deltaprime_star_lower(3, 1, 3, 2, [1.0, 0.5, 0.8])
    assert r.k == 10
    shifted = 3 - 2
    expected = min((2 * shifted + 3) ** 2, (2 * shifted + 1) ** 2) * np.pi ** 2 / 4
    assert r.value == pytest.approx(expected)
    assert not bounds.bound_deltaprime_star_lower(0, 1, 3, 2, [1.0, 0.5, 0.8]).applicable
    with pytest.raises(IndexOutOfRange):
        bounds.bound_deltaprime_star_lower(1, 4, 3, 2, [1.0, 0.5, 0.8])


def test_lambda1_bounds(deltaprime_path):
    results = {r.bound_id: r.value for r in bounds.lambda1_upper_bounds_deltaprime(deltaprime_path)}
    vertex_sum = 1 / 1.0 + 4 / 2.0 + 1 / 1.0
    assert results["lambda1_deltaprime.constant"] == pytest.approx(vertex_sum / 1.8)
    assert results["lambda1_deltaprime.sine2"] == pytest.approx(4 * results["lambda1_deltaprime.sine"])


def test_lambda1_bounds_need_remark_path(deltaprime_path):
    g = deltaprime_path.replace(
        vertices={**deltaprime_path.vertices, "v1": VertexCondition.anti_standard()}
    )
    with pytest.raises(ZeroStrengthVertexWithoutRemarkPath):
        bounds.lambda1_upper_bounds_deltaprime(g)
    assert bounds.lambda1_upper_bounds_deltaprime(g, allow_anti_standard=True)[0].reason


def test_regular_constant():
    r = bounds.bound_deltaprime_regular_constant(2, 3, 0.5, 3.0)
    assert r.value == pytest.approx(8.0)


def test_tree_bounds(deltaprime_star, triangle):
    star = deltaprime_star.with_conditions(VertexCondition.standard())
    results = {r.bound_id: r for r in bounds.tree_bounds(star, "standard", 1)}
    assert set(results) == {"tree1.path", "diameter.standard", "tree1.edges", "newtree.standard"}
    assert all(r.k == 2 for r in results.values())
    assert results["tree1.path"].value == pytest.approx((np.pi / 2.3) ** 2)
    assert results["newtree.standard"].value == pytest.approx((np.pi * 3 / 6.0) ** 2)
    with pytest.raises(NotATree):
        bounds.tree_bounds(triangle, "standard", 1)


def test_pendant_diameter_gap(deltaprime_star):
    assert bounds.pendant_diameter_gap(deltaprime_star) == pytest.approx(2.3 - 2 * 3.0 / 3)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_pendant_diameter_gap_nonnegative(seed):
    t = random_graph(GraphParams(family="standard", tree=True, n_edges=(2, 8)), seed)
    assert bounds.pendant_diameter_gap(t) >= -1e-12


def test_graph_bounds_by_family(triangle, anti_flower):
    ids = {r.bound_id for r in bounds.graph_bounds(triangle, 4)}
    assert {"ariturk1", "standard2", "delta1"} <= ids
    ids = {r.bound_id for r in bounds.graph_bounds(anti_flower, 4)}
    assert ids == {"ec", "anti2", "anti1"}
    tree = MetricGraph.path([1.0, 2.0], condition=VertexCondition.anti_standard())
    assert "tree2.path" in {r.bound_id for r in bounds.graph_bounds(tree, 3)}


def test_graph_invariants(triangle):
    inv = bounds.graph_invariants(triangle)
    assert (inv.n_edges, inv.n_vertices, inv.betti) == (3, 3, 1)
    assert inv.total_strength == 0.0
    assert inv.lengths == (1.2, 1.0, 0.8)


def test_bipartite_relation_values(solver):
    square = MetricGraph.cycle([1.0, 0.7, 1.1, 0.9])
    table = bounds.bipartite_relation_check_values(square, 5, mesh=Mesh(32), solver=solver)
    assert list(table["k"]) == [1, 2, 3, 4]
    np.testing.assert_allclose(table["anti"], table["standard"], rtol=1e-2)


def test_bipartite_relation_needs_bipartite(triangle):
    with pytest.raises(NotBipartite):
        bounds.bipartite_relation_check_values(triangle, 5)
