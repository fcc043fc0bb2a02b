import pytest

from qgraphpy.errors import (
    AssignmentIncomplete,
    MixedConditionFamilies,
    NonpositiveFactor,
    PartitionIncomplete,
    StrengthSumMismatch,
    UnknownOperation,
)
from qgraphpy.graph_model import MetricGraph, VertexCondition
from qgraphpy.surgery import (
    SurgeryOp,
    apply_script,
    attach_pendant_graph,
    attach_pendant_edge,
    combine_conditions,
    disjoint_union,
    flowerize,
    glue_vertices,
    insert_graph_at_vertex,
    scale_edge,
    scale_graph,
    set_vertex_condition,
    split_vertex,
)

DP = VertexCondition.delta_prime


@pytest.mark.parametrize(
    "conditions, expected",
    [
        ([DP(1.0), DP(2.0)], DP(3.0)),
        ([DP(1.0), DP(-1.0)], VertexCondition.anti_standard()),
        ([VertexCondition.delta(2.0), VertexCondition.standard()], VertexCondition.delta(2.0)),
        ([VertexCondition.dirichlet(), VertexCondition.dirichlet()], VertexCondition.dirichlet()),
    ],
)
def test_combine_conditions(conditions, expected):
    assert combine_conditions(conditions) == expected


def test_mixed_families_cannot_glue(triangle):
    g = set_vertex_condition(triangle, "v0", DP(1.0))
    with pytest.raises(MixedConditionFamilies):
        glue_vertices(g, ["v0", "v1"])


def test_glue_ends_of_path(deltaprime_path):
    glued = glue_vertices(deltaprime_path, ["v0", "v2"], new_id="w")
    assert glued.n_vertices == 2
    assert glued.condition("w") == DP(2.0)
    assert glued.betti_number() == 1


def test_split_undoes_glue(deltaprime_path):
    glued = glue_vertices(deltaprime_path, ["v0", "v2"], new_id="w")
    parts = [[("e1", "from")], [("e2", "to")]]
    split = split_vertex(glued, "w", parts, [DP(1.0), DP(1.0)], new_ids=["v0", "v2"])
    assert dict(split.vertices) == dict(deltaprime_path.vertices)
    assert split.edges == deltaprime_path.edges


def test_split_checks_partition_and_sum(deltaprime_path):
    glued = glue_vertices(deltaprime_path, ["v0", "v2"], new_id="w")
    with pytest.raises(PartitionIncomplete):
        split_vertex(glued, "w", [[("e1", "from")]], [DP(2.0)])
    with pytest.raises(StrengthSumMismatch):
        split_vertex(glued, "w", [[("e1", "from")], [("e2", "to")]], [DP(1.0), DP(3.0)])


def test_disjoint_union_renames_clashes(triangle):
    union, vertex_map, edge_map = disjoint_union(triangle, triangle)
    assert union.n_vertices == 6 and union.n_edges == 6
    assert len(set(vertex_map.values()) | set(triangle.vertex_ids)) == 6
    assert not union.is_connected()


def test_attach_pendant_graph(deltaprime_path):
    pendant = MetricGraph.interval(0.5, DP(-3.0), DP(1.0))
    out = attach_pendant_graph(deltaprime_path, "v1", pendant, "v0")
    assert out.n_edges == 3
    assert out.condition("v1") == DP(-1.0)
    assert out.total_length() == pytest.approx(2.3)


def test_insert_point_keeps_topology(triangle):
    point = MetricGraph.point("w")
    assignment = {ep: "w" for ep in triangle.endpoints("v0")}
    out = insert_graph_at_vertex(triangle, "v0", point, assignment)
    assert sorted(out.vertex_ids) == ["v1", "v2", "w"]
    assert out.lengths() == triangle.lengths()


def test_insert_needs_full_assignment(triangle):
    inserted = MetricGraph.interval(0.3, VertexCondition.standard(), VertexCondition.standard())
    with pytest.raises(AssignmentIncomplete):
        insert_graph_at_vertex(triangle, "v0", inserted, {("e1", "from"): "v0"})


def test_insert_with_split_strengths(deltaprime_star):
    inserted = MetricGraph.path([0.6], condition=VertexCondition.anti_standard())
    assignment = {("e1", "from"): "v0", ("e2", "from"): "v1", ("e3", "from"): "v0"}
    out = insert_graph_at_vertex(
        deltaprime_star, "c", inserted, assignment, {"v0": DP(3.0), "v1": DP(-1.5)}
    )
    assert out.n_edges == 4
    assert out.degree("v0") == 3 and out.degree("v1") == 2
    with pytest.raises(StrengthSumMismatch):
        insert_graph_at_vertex(
            deltaprime_star, "c", inserted, assignment, {"v0": DP(3.0), "v1": DP(1.0)}
        )


def test_scaling(deltaprime_path):
    scaled = scale_graph(deltaprime_path, 2.0)
    assert scaled.total_length() == pytest.approx(3.6)
    assert scaled.condition("v1") == DP(4.0)
    assert scale_graph(MetricGraph.interval(1.0, VertexCondition.delta(3.0)), 3.0).condition(
        "v0"
    ) == VertexCondition.delta(1.0)
    assert scale_edge(deltaprime_path, "e2", 0.5).edge("e2").length == pytest.approx(0.4)
    with pytest.raises(NonpositiveFactor):
        scale_edge(deltaprime_path, "e1", 0.0)


def test_flowerize(deltaprime_path):
    flower = flowerize(deltaprime_path)
    assert flower.n_vertices == 1
    assert all(e.is_loop for e in flower.edges)
    assert flower.condition("flower") == DP(4.0)


def test_attach_pendant_edge(triangle):
    out = attach_pendant_edge(triangle, "v1", 0.5)
    assert out.n_edges == 4
    assert out.condition("v1.tip").kind == "Dirichlet"


def test_script_round_trip(triangle):
    ops = [
        SurgeryOp("Subdivide", {"edge": "e1", "position": 0.5}),
        SurgeryOp("ScaleGraph", {"factor": 2.0}),
        SurgeryOp("SetStrength", {"vertex": "v0", "condition": VertexCondition.delta(1.0)}),
    ]
    payload = [op.to_dict() for op in ops]
    out = apply_script(triangle, payload)
    assert out == apply_script(triangle, ops)
    assert out.n_edges == 4
    assert out.total_length() == pytest.approx(6.0)
    assert out.condition("v0") == VertexCondition.delta(1.0)


def test_unknown_operation():
    with pytest.raises(UnknownOperation):
        SurgeryOp.from_dict({"kind": "Twist"})
