"""Metric graphs: vertices carrying conditions, edges carrying lengths."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple

import networkx as nx

from qgraphpy.errors import (
    DanglingEndpoint,
    Disconnected,
    GraphError,
    GraphFormatError,
    NonpositiveLength,
    NotATree,
    NotDegreeTwo,
    NotStandard,
    PositionOutOfRange,
    UnknownEdge,
    UnknownVertex,
    WouldCreateDanglingLoop,
    ZeroDeltaPrimeStrength,
)

logger = logging.getLogger(__name__)

# ------------------------------------------------------------------------------
# Vertex conditions
# ------------------------------------------------------------------------------
KINDS = ("Dirichlet", "Neumann", "Standard", "AntiStandard", "Delta", "DeltaPrime")
FAMILIES = ("delta", "delta_prime", "dirichlet", "neumann")

_FAMILY_OF = {
    "Standard": "delta",
    "Delta": "delta",
    "AntiStandard": "delta_prime",
    "DeltaPrime": "delta_prime",
    "Dirichlet": "dirichlet",
    "Neumann": "neumann",
}


@dataclass(frozen=True)
class VertexCondition:
    """One of the six vertex conditions.

    ``strength`` is present iff ``kind`` is Delta or DeltaPrime. A Delta with
    zero strength is stored as Standard; a DeltaPrime with zero strength is
    rejected (use AntiStandard).
    """

    kind: str
    strength: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise GraphFormatError(f"unknown condition kind {self.kind!r}")

        if self.kind in ("Delta", "DeltaPrime"):
            if self.strength is None:
                raise GraphFormatError(f"{self.kind} needs a strength")
            s = float(self.strength)
            if not math.isfinite(s):
                raise GraphFormatError(f"{self.kind} strength must be finite")
            object.__setattr__(self, "strength", s)
            if self.kind == "DeltaPrime" and s == 0:
                raise ZeroDeltaPrimeStrength(
                    "DeltaPrime strength must be nonzero, use AntiStandard"
                )
            if self.kind == "Delta" and s == 0:
                object.__setattr__(self, "kind", "Standard")
                object.__setattr__(self, "strength", None)
        elif self.strength is not None:
            raise GraphFormatError(f"{self.kind} does not take a strength")

    # ---- constructors ----
    @classmethod
    def dirichlet(cls):
        return cls("Dirichlet")

    @classmethod
    def neumann(cls):
        return cls("Neumann")

    @classmethod
    def standard(cls):
        return cls("Standard")

    @classmethod
    def anti_standard(cls):
        return cls("AntiStandard")

    @classmethod
    def delta(cls, alpha):
        return cls("Delta", alpha)

    @classmethod
    def delta_prime(cls, alpha):
        return cls("DeltaPrime", alpha)

    @classmethod
    def from_family(cls, family, strength=None):
        """Build a condition from its family and summed strength.

        A zero strength gives Standard in the delta family and AntiStandard
        in the delta_prime family.
        """
        if family == "delta":
            return cls.standard() if not strength else cls.delta(strength)
        if family == "delta_prime":
            return cls.anti_standard() if not strength else cls.delta_prime(strength)
        if family == "dirichlet":
            return cls.dirichlet()
        if family == "neumann":
            return cls.neumann()
        raise GraphFormatError(f"unknown condition family {family!r}")

    # ---- family bookkeeping ----
    @property
    def family(self):
        return _FAMILY_OF[self.kind]

    @property
    def family_strength(self):
        """Strength used for summing within a family (0 for Standard/AntiStandard)."""
        if self.kind in ("Delta", "DeltaPrime"):
            return self.strength
        if self.kind in ("Standard", "AntiStandard"):
            return 0.0
        return None

    def to_dict(self):
        d = {"kind": self.kind}
        if self.strength is not None:
            d["strength"] = self.strength
        return d

    @classmethod
    def from_dict(cls, d):
        extra = set(d) - {"kind", "strength"}
        if extra:
            raise GraphFormatError(f"unknown condition fields {sorted(extra)}")
        if "kind" not in d:
            raise GraphFormatError("condition needs a kind")
        return cls(d["kind"], d.get("strength"))

    def __str__(self) -> str:
        if self.strength is None:
            return self.kind
        return f"{self.kind}({self.strength:g})"


# ------------------------------------------------------------------------------
# Edges
# ------------------------------------------------------------------------------
@dataclass(frozen=True)
class Edge:
    id: str
    source: str
    target: str
    length: float

    def __post_init__(self):
        length = float(self.length)
        if not math.isfinite(length) or length <= 0:
            raise NonpositiveLength(f"edge {self.id!r} has length {self.length}")
        object.__setattr__(self, "length", length)

    @property
    def is_loop(self):
        return self.source == self.target

    def vertex_at(self, end):
        return self.source if end == "from" else self.target

    def to_dict(self):
        return {
            "id": self.id,
            "from": self.source,
            "to": self.target,
            "length": self.length,
        }

    @classmethod
    def from_dict(cls, d):
        extra = set(d) - {"id", "from", "to", "length"}
        if extra:
            raise GraphFormatError(f"unknown edge fields {sorted(extra)}")
        try:
            return cls(str(d["id"]), str(d["from"]), str(d["to"]), d["length"])
        except KeyError as exc:
            raise GraphFormatError(f"edge is missing field {exc}") from exc


class Endpoint(NamedTuple):
    """Edge endpoint: ``end`` is "from" (x = 0) or "to" (x = length)."""

    edge: str
    end: str


def fresh_id(base, taken):
    """Return ``base`` or the first ``base~i`` not in ``taken``."""
    if base not in taken:
        return base
    i = 1
    while f"{base}~{i}" in taken:
        i += 1
    return f"{base}~{i}"


# ------------------------------------------------------------------------------
# Metric graph
# ------------------------------------------------------------------------------
class MetricGraph:
    """Immutable compact metric graph.

    Parameters
    ----------
    vertices : Mapping[str, VertexCondition]
        vertex id -> condition, in a fixed order
    edges : Iterable[Edge]
        edges; loops and parallel edges are allowed
    strict : bool, optional
        require a connected graph of positive total length, by default True.
        Surgery uses ``strict=False`` for intermediate disjoint unions.

    Attributes
    ----------
    vertices : mapping proxy of vertex conditions
    edges : tuple of Edge
    """

    def __init__(
        self,
        vertices: Mapping[str, VertexCondition],
        edges: Iterable[Edge],
        strict=True,
    ):
        self._vertices = MappingProxyType(dict(vertices))
        self._edges = tuple(edges)
        self._edge_index = {}

        for e in self._edges:
            if e.id in self._edge_index:
                raise GraphFormatError(f"duplicate edge id {e.id!r}")
            for v in (e.source, e.target):
                if v not in self._vertices:
                    raise DanglingEndpoint(f"edge {e.id!r} references unknown vertex {v!r}")
            self._edge_index[e.id] = e

        self._endpoints = {v: [] for v in self._vertices}
        for e in self._edges:
            self._endpoints[e.source].append(Endpoint(e.id, "from"))
            self._endpoints[e.target].append(Endpoint(e.id, "to"))

        degree_sum = sum(len(ends) for ends in self._endpoints.values())
        assert degree_sum == 2 * len(self._edges), "handshake identity violated"

        if strict:
            if not self._edges:
                raise GraphError("total length must be positive")
            if not self.is_connected():
                raise Disconnected("graph is not connected")

    # ---- basic accessors ----
    @property
    def vertices(self):
        return self._vertices

    @property
    def edges(self):
        return self._edges

    @property
    def vertex_ids(self):
        return list(self._vertices)

    @property
    def edge_ids(self):
        return [e.id for e in self._edges]

    @property
    def n_vertices(self):
        return len(self._vertices)

    @property
    def n_edges(self):
        return len(self._edges)

    def condition(self, v) -> VertexCondition:
        try:
            return self._vertices[v]
        except KeyError:
            raise UnknownVertex(f"unknown vertex {v!r}") from None

    def edge(self, eid) -> Edge:
        try:
            return self._edge_index[eid]
        except KeyError:
            raise UnknownEdge(f"unknown edge {eid!r}") from None

    def endpoints(self, v):
        """Edge endpoints at ``v``; a loop contributes both of its ends."""
        self.condition(v)
        return list(self._endpoints[v])

    def replace(self, vertices=None, edges=None, strict=True):
        return MetricGraph(
            self._vertices if vertices is None else vertices,
            self._edges if edges is None else edges,
            strict=strict,
        )

    def with_conditions(self, condition: VertexCondition):
        """Same topology with every vertex given ``condition``."""
        return self.replace(vertices={v: condition for v in self._vertices})

    # ---- degrees and lengths ----
    def degrees(self):
        return {v: len(ends) for v, ends in self._endpoints.items()}

    def degree(self, v):
        return len(self.endpoints(v))

    def total_length(self):
        return float(sum(e.length for e in self._edges))

    def lengths(self):
        return [e.length for e in self._edges]

    def pendant_vertices(self):
        return frozenset(v for v, d in self.degrees().items() if d == 1)

    def pendant_edges(self):
        pendant = self.pendant_vertices()
        return [e for e in self._edges if e.source in pendant or e.target in pendant]

    def strengths(self):
        """Family strengths of the vertices that carry one."""
        return {
            v: c.family_strength
            for v, c in self._vertices.items()
            if c.family_strength is not None
        }

    # ---- topology ----
    def to_networkx(self):
        """Underlying multigraph keyed by edge id with ``length`` weights."""
        g = nx.MultiGraph()
        g.add_nodes_from(self._vertices)
        for e in self._edges:
            g.add_edge(e.source, e.target, key=e.id, length=e.length)
        return g

    def is_connected(self):
        if not self._vertices:
            return False
        return nx.is_connected(self.to_networkx())

    def betti_number(self):
        if not self.is_connected():
            raise Disconnected("Betti number needs a connected graph")
        return self.n_edges - self.n_vertices + 1

    def is_tree(self):
        return self.is_connected() and self.n_edges == self.n_vertices - 1

    def is_bipartite(self):
        if any(e.is_loop for e in self._edges):
            return False
        return nx.is_bipartite(self.to_networkx())

    def subdivide_edge(self, eid, position, vertex_id=None):
        """Insert a Standard degree-two vertex at ``position`` along ``eid``.

        Returns a new graph; the two halves keep the edge orientation.
        """
        e = self.edge(eid)
        if not 0 < position < e.length:
            raise PositionOutOfRange(
                f"position {position} not strictly inside (0, {e.length})"
            )
        taken_v = set(self._vertices)
        mid = fresh_id(vertex_id or f"{eid}.m", taken_v)
        taken_e = set(self._edge_index) - {eid}
        a_id = fresh_id(f"{eid}.a", taken_e)
        taken_e.add(a_id)
        b_id = fresh_id(f"{eid}.b", taken_e)

        edges = []
        for other in self._edges:
            if other.id == eid:
                edges.append(Edge(a_id, e.source, mid, position))
                edges.append(Edge(b_id, mid, e.target, e.length - position))
            else:
                edges.append(other)
        vertices = dict(self._vertices)
        vertices[mid] = VertexCondition.standard()
        return MetricGraph(vertices, edges, strict=False)

    def suppress_degree2_standard(self, v):
        ends = self.endpoints(v)
        if len(ends) != 2:
            raise NotDegreeTwo(f"vertex {v!r} has degree {len(ends)}")
        if self.condition(v).kind != "Standard":
            raise NotStandard(f"vertex {v!r} is {self.condition(v)}")
        (e1, end1), (e2, end2) = ends
        if e1 == e2:
            raise WouldCreateDanglingLoop(f"both ends of {e1!r} sit at {v!r}")

        first, second = self.edge(e1), self.edge(e2)
        u = first.vertex_at("to" if end1 == "from" else "from")
        w = second.vertex_at("to" if end2 == "from" else "from")
        taken = set(self._edge_index) - {e1, e2}
        merged = Edge(fresh_id(f"{e1}+{e2}", taken), u, w, first.length + second.length)

        edges = []
        for e in self._edges:
            if e.id == e1:
                edges.append(merged)
            elif e.id != e2:
                edges.append(e)
        vertices = {k: c for k, c in self._vertices.items() if k != v}
        return MetricGraph(vertices, edges, strict=False)

    def maximal_spanning_tree(self):
        """Spanning tree of largest total length.

        Returns
        -------
        tree : MetricGraph
            all vertices (with their conditions) and |V| - 1 edges
        removed : list of Edge
            the remaining β edges, in graph order
        """
        g = self.to_networkx()
        if not nx.is_connected(g):
            raise Disconnected("spanning tree needs a connected graph")
        kept = {
            key
            for _, _, key in nx.maximum_spanning_edges(
                g, algorithm="kruskal", weight="length", keys=True, data=False
            )
        }
        tree_edges = [e for e in self._edges if e.id in kept]
        removed = [e for e in self._edges if e.id not in kept]
        tree = MetricGraph(self._vertices, tree_edges, strict=False)
        assert tree.is_tree(), "maximum spanning edges did not form a tree"
        assert len(removed) == self.betti_number()
        return tree, removed

    def tree_diameter(self):
        """Largest distance between two pendant vertices of a tree."""
        if not self.is_tree():
            raise NotATree("diameter is only defined here for trees")
        if self.n_edges == 0:
            return 0.0
        g = self.to_networkx()
        pendant = sorted(self.pendant_vertices())
        diameter = 0.0
        for p in pendant:
            dist = nx.single_source_dijkstra_path_length(g, p, weight="length")
            diameter = max(diameter, max(dist[q] for q in pendant))
        return float(diameter)

    # ---- serialization ----
    def to_dict(self):
        return {
            "vertices": [
                {"id": v, "condition": c.to_dict()} for v, c in self._vertices.items()
            ],
            "edges": [e.to_dict() for e in self._edges],
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d, strict=True):
        extra = set(d) - {"vertices", "edges"}
        if extra:
            raise GraphFormatError(f"unknown graph fields {sorted(extra)}")
        vertices = {}
        for item in d.get("vertices", []):
            unknown = set(item) - {"id", "condition"}
            if unknown:
                raise GraphFormatError(f"unknown vertex fields {sorted(unknown)}")
            vid = str(item["id"])
            if vid in vertices:
                raise GraphFormatError(f"duplicate vertex id {vid!r}")
            vertices[vid] = VertexCondition.from_dict(item["condition"])
        edges = [Edge.from_dict(item) for item in d.get("edges", [])]
        return cls(vertices, edges, strict=strict)

    @classmethod
    def from_json(cls, text, strict=True):
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GraphFormatError(f"invalid graph JSON: {exc}") from exc
        return cls.from_dict(payload, strict=strict)

    # ---- named graphs ----
    @classmethod
    def interval(cls, length=1.0, left=None, right=None):
        left = left or VertexCondition.dirichlet()
        right = right or VertexCondition.dirichlet()
        return cls({"v0": left, "v1": right}, [Edge("e0", "v0", "v1", length)])

    @classmethod
    def path(cls, lengths, condition=None, ends=None):
        """Path v0 - v1 - ... with ``condition`` inside and ``ends`` at both tips."""
        condition = condition or VertexCondition.standard()
        ends = ends or condition
        n = len(lengths)
        vertices = {f"v{i}": condition for i in range(n + 1)}
        vertices["v0"] = ends
        vertices[f"v{n}"] = ends
        edges = [Edge(f"e{i + 1}", f"v{i}", f"v{i + 1}", l) for i, l in enumerate(lengths)]
        return cls(vertices, edges)

    @classmethod
    def star(cls, lengths, center=None, tips=None):
        center = center or VertexCondition.standard()
        tips = tips or VertexCondition.dirichlet()
        vertices = {"c": center}
        edges = []
        for i, l in enumerate(lengths, start=1):
            vertices[f"t{i}"] = tips
            edges.append(Edge(f"e{i}", "c", f"t{i}", l))
        return cls(vertices, edges)

    @classmethod
    def cycle(cls, lengths, condition=None):
        condition = condition or VertexCondition.standard()
        n = len(lengths)
        vertices = {f"v{i}": condition for i in range(n)}
        edges = [
            Edge(f"e{i + 1}", f"v{i}", f"v{(i + 1) % n}", l) for i, l in enumerate(lengths)
        ]
        return cls(vertices, edges)

    @classmethod
    def flower(cls, lengths, condition=None):
        condition = condition or VertexCondition.standard()
        edges = [Edge(f"e{i}", "v0", "v0", l) for i, l in enumerate(lengths, start=1)]
        return cls({"v0": condition}, edges)

    @classmethod
    def point(cls, vertex_id="w", condition=None):
        """Edge-less one-vertex graph (non-strict), the trivial insertion."""
        condition = condition or VertexCondition.standard()
        return cls({vertex_id: condition}, [], strict=False)

    # ---- dunder ----
    def __eq__(self, other):
        if not isinstance(other, MetricGraph):
            return NotImplemented
        return (
            list(self._vertices.items()) == list(other._vertices.items())
            and self._edges == other._edges
        )

    def __hash__(self):
        return hash((tuple(self._vertices.items()), self._edges))

    def __repr__(self) -> str:
        return (
            f"{self.__class__.__name__}(|V|={self.n_vertices}, |E|={self.n_edges}, "
            f"L={self.total_length():g})"
        )


def build_graph(vertex_conditions, edges, strict=True):
    """Validated graph from plain inputs.

    Parameters
    ----------
    vertex_conditions : dict
        vertex id -> VertexCondition, or a ``{"kind", "strength"}`` dict
    edges : list
        Edge objects or tuples ``(id, from, to, length)``
    """
    vertices = {
        str(v): c if isinstance(c, VertexCondition) else VertexCondition.from_dict(c)
        for v, c in vertex_conditions.items()
    }
    edge_objs = [e if isinstance(e, Edge) else Edge(*e) for e in edges]
    return MetricGraph(vertices, edge_objs, strict=strict)
