"""Graph surgery: pure graph-to-graph transformations with strength bookkeeping.

Strengths are summed inside a condition family when vertices are glued or
graphs are inserted, split back when a vertex is split, and rescaled with
the edge lengths by :func:`scale_graph`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

from qgraphpy.errors import (
    AssignmentIncomplete,
    MixedConditionFamilies,
    NonpositiveFactor,
    PartitionIncomplete,
    StrengthSumMismatch,
    SurgeryError,
    UnknownOperation,
)
from qgraphpy.graph_model import Edge, Endpoint, MetricGraph, VertexCondition, fresh_id

logger = logging.getLogger(__name__)

SURGERY_KINDS = (
    "SetStrength",
    "Glue",
    "Split",
    "AttachPendant",
    "InsertAtVertex",
    "ScaleEdge",
    "ScaleGraph",
    "Flowerize",
    "AttachPendantEdge",
    "Subdivide",
)


# ------------------------------------------------------------------------------
# Strength bookkeeping
# ------------------------------------------------------------------------------
def _common_family(conditions):
    families = {c.family for c in conditions}
    if len(families) != 1:
        raise MixedConditionFamilies(
            "cannot combine conditions " + ", ".join(str(c) for c in conditions)
        )
    return families.pop()


def _snap(total, terms):
    # rounding residue of a cancelling sum is zero strength
    scale = max([abs(t) for t in terms] + [0.0])
    return 0.0 if abs(total) <= 1e-12 * scale else total


def combine_conditions(conditions: Sequence[VertexCondition]) -> VertexCondition:
    """Condition of a vertex formed by merging vertices with ``conditions``."""
    family = _common_family(conditions)
    if family in ("dirichlet", "neumann"):
        return VertexCondition.from_family(family)
    terms = [c.family_strength for c in conditions]
    return VertexCondition.from_family(family, _snap(sum(terms), terms))


def _check_sum(target: VertexCondition, parts: Sequence[VertexCondition]):
    family = _common_family([target, *parts])
    if family in ("dirichlet", "neumann"):
        return
    total = sum(c.family_strength for c in parts)
    scale = abs(target.family_strength) + sum(abs(c.family_strength) for c in parts)
    if abs(total - target.family_strength) > 1e-9 * (1 + scale):
        raise StrengthSumMismatch(
            f"strengths sum to {total:g}, expected {target.family_strength:g}"
        )


def _rehome(edges, moves):
    """Edges with endpoints moved according to ``{Endpoint: vertex}``."""
    out = []
    for e in edges:
        source = moves.get(Endpoint(e.id, "from"), e.source)
        target = moves.get(Endpoint(e.id, "to"), e.target)
        out.append(Edge(e.id, source, target, e.length))
    return out


# ------------------------------------------------------------------------------
# Conditions and gluing
# ------------------------------------------------------------------------------
def set_vertex_condition(graph: MetricGraph, v, condition: VertexCondition):
    graph.condition(v)
    vertices = dict(graph.vertices)
    vertices[v] = condition
    return graph.replace(vertices=vertices)


def glue_vertices(graph: MetricGraph, vertex_set, new_id=None, strict=True):
    """Identify the vertices of ``vertex_set`` into one vertex.

    The new vertex carries the family sum of the strengths; its id defaults
    to the members joined by "+".
    """
    members = list(dict.fromkeys(vertex_set))
    if not members:
        raise SurgeryError("nothing to glue")
    condition = combine_conditions([graph.condition(v) for v in members])

    others = set(graph.vertices) - set(members)
    vid = fresh_id(new_id or "+".join(members), others)

    vertices = {}
    for v, c in graph.vertices.items():
        if v == members[0]:
            vertices[vid] = condition
        elif v not in members:
            vertices[v] = c
    edges = [
        Edge(
            e.id,
            vid if e.source in members else e.source,
            vid if e.target in members else e.target,
            e.length,
        )
        for e in graph.edges
    ]
    return MetricGraph(vertices, edges, strict=strict)


def split_vertex(graph: MetricGraph, v, partition, conditions, strict=True, new_ids=None):
    """Split ``v`` into one vertex per part of ``partition``.

    Parameters
    ----------
    partition : list of lists of Endpoint or (edge, end) pairs
        must cover every endpoint at ``v`` exactly once
    conditions : list of VertexCondition
        one per part, same family as ``v``, strengths summing to ``v``'s
    strict : bool
        raise Disconnected if the result falls apart
    """
    cond = graph.condition(v)
    parts = [[Endpoint(*ep) for ep in part] for part in partition]
    flat = sorted(ep for part in parts for ep in part)
    if any(not part for part in parts) or flat != sorted(graph.endpoints(v)):
        raise PartitionIncomplete(f"partition does not cover the endpoints at {v!r}")
    if len(conditions) != len(parts):
        raise PartitionIncomplete("need one condition per part")
    _check_sum(cond, conditions)

    taken = set(graph.vertices) - {v}
    ids = []
    for i in range(len(parts)):
        vid = fresh_id(new_ids[i] if new_ids else f"{v}.{i + 1}", taken)
        taken.add(vid)
        ids.append(vid)

    vertices = {}
    for u, c in graph.vertices.items():
        if u == v:
            vertices.update(zip(ids, conditions))
        else:
            vertices[u] = c
    moves = {ep: ids[i] for i, part in enumerate(parts) for ep in part}
    return MetricGraph(vertices, _rehome(graph.edges, moves), strict=strict)


def disjoint_union(graph: MetricGraph, other: MetricGraph, reserved=None):
    """Union of two graphs, renaming clashing ids of ``other``.

    Returns
    -------
    union : MetricGraph (non-strict)
    vertex_map, edge_map : dict
        ids of ``other`` -> ids in the union
    """
    taken_v = set(graph.vertices) if reserved is None else set(reserved)
    taken_e = set(graph.edge_ids)
    vertex_map, edge_map = {}, {}
    for v in other.vertices:
        vertex_map[v] = fresh_id(v, taken_v)
        taken_v.add(vertex_map[v])
    for e in other.edges:
        edge_map[e.id] = fresh_id(e.id, taken_e)
        taken_e.add(edge_map[e.id])

    vertices = dict(graph.vertices)
    vertices.update({vertex_map[v]: c for v, c in other.vertices.items()})
    edges = list(graph.edges) + [
        Edge(edge_map[e.id], vertex_map[e.source], vertex_map[e.target], e.length)
        for e in other.edges
    ]
    return MetricGraph(vertices, edges, strict=False), vertex_map, edge_map


def attach_pendant_graph(graph: MetricGraph, v, pendant: MetricGraph, w):
    """Glue vertex ``w`` of ``pendant`` to vertex ``v`` of ``graph``; ``v`` keeps its id."""
    graph.condition(v)
    pendant.condition(w)
    union, vertex_map, _ = disjoint_union(graph, pendant)
    return glue_vertices(union, [v, vertex_map[w]], new_id=v)


def insert_graph_at_vertex(graph: MetricGraph, v, inserted: MetricGraph, assignment, conditions=None):
    """Replace ``v`` by ``inserted``, moving each endpoint at ``v`` to an inserted vertex.

    Parameters
    ----------
    assignment : dict
        Endpoint (or (edge, end) pair) at ``v`` -> vertex id of ``inserted``
    conditions : dict, optional
        new conditions of the receiving vertices; their strengths must sum to
        the strength of ``v`` plus the receiving vertices' own strengths.
        By default ``v``'s strength is added to the first receiving vertex.
    """
    cond_v = graph.condition(v)
    assignment = {Endpoint(*ep): w for ep, w in assignment.items()}
    if sorted(assignment) != sorted(graph.endpoints(v)):
        raise AssignmentIncomplete(f"assignment must cover exactly the endpoints at {v!r}")
    for w in assignment.values():
        if w not in inserted.vertices:
            raise AssignmentIncomplete(f"{w!r} is not a vertex of the inserted graph")

    receiving = [w for w in inserted.vertices if w in set(assignment.values())]
    if conditions is None:
        first = receiving[0]
        conditions = {first: combine_conditions([cond_v, inserted.condition(first)])}
    conditions = {**{w: inserted.condition(w) for w in receiving}, **conditions}
    if set(conditions) - set(receiving):
        raise AssignmentIncomplete("conditions given for vertices that receive no endpoint")

    own = [inserted.condition(w) for w in receiving]
    target = combine_conditions([cond_v, *own])
    _common_family([target, *conditions.values()])
    _check_sum(target, [conditions[w] for w in receiving])

    reserved = set(graph.vertices) - {v}
    union, vertex_map, _ = disjoint_union(graph, inserted, reserved=reserved)

    vertices = {}
    for u, c in graph.vertices.items():
        if u == v:
            for w, cw in inserted.vertices.items():
                vertices[vertex_map[w]] = conditions.get(w, cw)
        else:
            vertices[u] = c
    moves = {ep: vertex_map[w] for ep, w in assignment.items()}
    return MetricGraph(vertices, _rehome(union.edges, moves))


# ------------------------------------------------------------------------------
# Lengths
# ------------------------------------------------------------------------------
def _check_factor(t):
    if not t > 0:
        raise NonpositiveFactor(f"scaling factor must be positive, got {t}")


def scale_edge(graph: MetricGraph, eid, t):
    _check_factor(t)
    graph.edge(eid)
    edges = [Edge(e.id, e.source, e.target, e.length * t) if e.id == eid else e for e in graph.edges]
    return graph.replace(edges=edges)


def scale_graph(graph: MetricGraph, t):
    """Scale every length by ``t``; δ′ strengths scale by ``t``, δ strengths by ``1/t``."""
    _check_factor(t)
    vertices = {}
    for v, c in graph.vertices.items():
        if c.kind == "DeltaPrime":
            c = VertexCondition.delta_prime(c.strength * t)
        elif c.kind == "Delta":
            c = VertexCondition.delta(c.strength / t)
        vertices[v] = c
    edges = [Edge(e.id, e.source, e.target, e.length * t) for e in graph.edges]
    return MetricGraph(vertices, edges)


def flowerize(graph: MetricGraph, new_id=None):
    """Glue all vertices into one; every edge becomes a loop."""
    if not graph.is_connected():
        raise SurgeryError("flowerize needs a connected graph")
    return glue_vertices(graph, graph.vertex_ids, new_id=new_id or "flower")


def attach_pendant_edge(graph: MetricGraph, v, length, tip=None, edge_id=None, tip_id=None):
    graph.condition(v)
    tip = tip or VertexCondition.dirichlet()
    tip_vertex = fresh_id(tip_id or f"{v}.tip", set(graph.vertices))
    eid = fresh_id(edge_id or f"{v}.p", set(graph.edge_ids))
    vertices = dict(graph.vertices)
    vertices[tip_vertex] = tip
    return MetricGraph(vertices, [*graph.edges, Edge(eid, v, tip_vertex, length)])


# ------------------------------------------------------------------------------
# Reified operations
# ------------------------------------------------------------------------------
def _cond(d):
    return d if isinstance(d, VertexCondition) else VertexCondition.from_dict(d)


def _graph(d):
    return d if isinstance(d, MetricGraph) else MetricGraph.from_dict(d, strict=False)


@dataclass(frozen=True)
class SurgeryOp:
    """One surgery step, replayable from its JSON form.

    Parameters per kind (JSON names):

    - SetStrength: vertex, condition
    - Glue: vertices, new_id (optional)
    - Split: vertex, parts (lists of [edge, end]), conditions
    - AttachPendant: vertex, graph, at
    - InsertAtVertex: vertex, graph, assignment ([edge, end, vertex] triples), conditions (optional)
    - ScaleEdge: edge, factor; ScaleGraph: factor
    - Flowerize: new_id (optional)
    - AttachPendantEdge: vertex, length, tip (optional)
    - Subdivide: edge, position
    """

    kind: str
    params: dict = field(default_factory=dict)
    note: str = ""

    def __post_init__(self):
        if self.kind not in SURGERY_KINDS:
            raise UnknownOperation(f"unknown surgery kind {self.kind!r}")

    def apply(self, graph: MetricGraph) -> MetricGraph:
        p = self.params
        try:
            if self.kind == "SetStrength":
                return set_vertex_condition(graph, p["vertex"], _cond(p["condition"]))
            if self.kind == "Glue":
                return glue_vertices(graph, p["vertices"], new_id=p.get("new_id"))
            if self.kind == "Split":
                return split_vertex(
                    graph,
                    p["vertex"],
                    [[tuple(ep) for ep in part] for part in p["parts"]],
                    [_cond(c) for c in p["conditions"]],
                )
            if self.kind == "AttachPendant":
                return attach_pendant_graph(graph, p["vertex"], _graph(p["graph"]), p["at"])
            if self.kind == "InsertAtVertex":
                assignment = {(e, end): w for e, end, w in p["assignment"]}
                conditions = p.get("conditions")
                if conditions is not None:
                    conditions = {w: _cond(c) for w, c in conditions.items()}
                return insert_graph_at_vertex(
                    graph, p["vertex"], _graph(p["graph"]), assignment, conditions
                )
            if self.kind == "ScaleEdge":
                return scale_edge(graph, p["edge"], p["factor"])
            if self.kind == "ScaleGraph":
                return scale_graph(graph, p["factor"])
            if self.kind == "Flowerize":
                return flowerize(graph, new_id=p.get("new_id"))
            if self.kind == "AttachPendantEdge":
                tip = _cond(p["tip"]) if "tip" in p else None
                return attach_pendant_edge(graph, p["vertex"], p["length"], tip=tip)
            # Subdivide
            return graph.subdivide_edge(p["edge"], p["position"]).replace(strict=True)
        except KeyError as exc:
            if type(exc) is not KeyError:
                raise
            raise SurgeryError(f"{self.kind} is missing parameter {exc}") from exc

    def to_dict(self):
        params = {}
        for key, value in self.params.items():
            if isinstance(value, (MetricGraph, VertexCondition)):
                value = value.to_dict()
            params[key] = value
        d = {"kind": self.kind, "params": params}
        if self.note:
            d["note"] = self.note
        return d

    @classmethod
    def from_dict(cls, d):
        extra = set(d) - {"kind", "params", "note"}
        if extra:
            raise UnknownOperation(f"unknown operation fields {sorted(extra)}")
        return cls(d["kind"], dict(d.get("params", {})), d.get("note", ""))


def apply_script(graph: MetricGraph, ops):
    """Apply ``ops`` in order; any failure propagates and nothing is returned."""
    for i, op in enumerate(ops):
        if isinstance(op, dict):
            op = SurgeryOp.from_dict(op)
        logger.debug("surgery step %d: %s", i, op.kind)
        graph = op.apply(graph)
    return graph
