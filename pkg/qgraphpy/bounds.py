"""Closed-form eigenvalue bounds.

Every bound is a plain function of scalars returning a :class:`BoundResult`,
so it can be evaluated on counterfactual inputs. :func:`graph_bounds`
extracts the scalars from a graph and collects every bound that applies.
Indices are 1-based; ``BoundResult.k`` is the index of the eigenvalue being
bounded (``k + 1`` for the standard-condition tree statements).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from qgraphpy.errors import (
    BoundsError,
    IndexOutOfRange,
    NotATree,
    NotBipartite,
    ZeroStrengthVertexWithoutRemarkPath,
)
from qgraphpy.graph_model import MetricGraph, VertexCondition

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BoundResult:
    bound_id: str
    side: str
    k: int
    value: float
    applicable: bool = True
    reason: str = ""

    def to_dict(self):
        return {
            "bound_id": self.bound_id,
            "side": self.side,
            "k": self.k,
            "value": self.value,
            "applicable": self.applicable,
            "reason": self.reason,
        }


def _sq(index, length):
    return float((index * np.pi / length) ** 2)


def _lower(bound_id, k, index, length, nonnegative):
    """Lower bound ((index)π/L)², clamped at 0 for nonnegative spectra."""
    if index > 0:
        return BoundResult(bound_id, "lower", k, _sq(index, length))
    if nonnegative:
        return BoundResult(bound_id, "lower", k, 0.0, True, "shifted index <= 0, spectrum >= 0")
    return BoundResult(bound_id, "lower", k, 0.0, False, "shifted index <= 0")


def _check_k(k):
    if k < 1:
        raise IndexOutOfRange(f"eigenvalue index must be >= 1, got {k}")


# ------------------------------------------------------------------------------
# Standard, δ and Dirichlet graphs
# ------------------------------------------------------------------------------
def bound_standard_upper(k, betti, n_edges, total_length):
    """λ_k(Γˢ) ≤ ((k − 1 + β + |E|)π/L)²."""
    _check_k(k)
    return BoundResult("ariturk1", "upper", k, _sq(k - 1 + betti + n_edges, total_length))


def bounds_delta(k, n_edges, n_vertices, total_length, alpha):
    """(lower, upper) bounds for a δ-graph whose strengths sum to ``alpha``."""
    _check_k(k)
    if alpha == 0:
        lower = _lower("delta1", k, k - n_vertices + 1, total_length, True)
        upper = _sq(k + n_edges, total_length)
    elif alpha > 0:
        lower = _lower("delta1", k, k - n_vertices + 1, total_length, True)
        upper = _sq(k + n_edges + 1, total_length)
    else:
        lower = _lower("delta1", k, k - n_vertices, total_length, False)
        upper = _sq(k + n_edges, total_length)
    return lower, BoundResult("delta1", "upper", k, upper)


def bound_dirichlet_standard_upper(k, betti, n_dirichlet, n_standard, total_length):
    """λ_k ≤ ((k − 2 + 2β + 2|D| + |S|)π/L)² for Dirichlet/standard graphs."""
    _check_k(k)
    index = k - 2 + 2 * betti + 2 * n_dirichlet + n_standard
    return BoundResult("ariturk2", "upper", k, _sq(index, total_length))


def bound_standard_spanning_upper(k, betti, n_edges, total_length):
    """λ_{k+1}(Γˢ) ≤ ((k + β)π|E|/2L)², from a spanning tree with all edges cut open."""
    _check_k(k)
    if n_edges < 2:
        return BoundResult("standard2", "upper", k + 1, 0.0, False, "needs |E| >= 2")
    return BoundResult("standard2", "upper", k + 1, _sq(k + betti, 2 * total_length / n_edges))


# ------------------------------------------------------------------------------
# Anti-standard and δ′ graphs
# ------------------------------------------------------------------------------
def bounds_antistandard(k, n_edges, n_vertices, total_length):
    """Bracket pairs ``{"ec": (lower, upper), "anti2": (lower, upper)}``."""
    _check_k(k)
    ec = (
        _lower("ec", k, k - n_vertices, total_length, True),
        BoundResult("ec", "upper", k, _sq(k + n_edges - 1, total_length)),
    )
    anti2 = (
        BoundResult("anti2", "lower", k, _sq(k, total_length)),
        BoundResult("anti2", "upper", k, _sq(k + n_edges + n_vertices - 1, total_length)),
    )
    return {"ec": ec, "anti2": anti2}


def bound_antistandard_spanning_upper(k, n_edges, total_length, bound_id="anti1"):
    """λ_k ≤ (kπ|E|/2L)² for anti-standard graphs (and δ′ graphs below them)."""
    _check_k(k)
    if n_edges < 2:
        return BoundResult(bound_id, "upper", k, 0.0, False, "needs |E| >= 2")
    return BoundResult(bound_id, "upper", k, _sq(k, 2 * total_length / n_edges))


def bound_deltaprime_negative_lower(k, n_vertices, total_length, applicable=True):
    """((k − 2|V|)π/2L)² ≤ λ_k for δ′-graphs with negative strengths, k ≥ 2|V|."""
    _check_k(k)
    if k < 2 * n_vertices:
        return BoundResult("deltap", "lower", k, 0.0, False, "needs k >= 2|V|")
    reason = "" if applicable else "needs all strengths negative"
    return BoundResult(
        "deltap", "lower", k, _sq(k - 2 * n_vertices, 2 * total_length), applicable, reason
    )


def bound_deltaprime_star_lower(k, j, n_edges, n_vertices, lengths, applicable=True):
    """Lower bound for λ_{k|E|+j} of a δ′-graph from the star with the same edges.

    ``lengths`` are sorted in descending order internally.
    """
    if n_edges < 2:
        raise IndexOutOfRange("needs |E| >= 2")
    if not 1 <= j <= n_edges:
        raise IndexOutOfRange(f"j must lie in [1, {n_edges}], got {j}")
    if k < 0:
        raise IndexOutOfRange(f"k must be >= 0, got {k}")
    ell = sorted(lengths, reverse=True)
    shifted = k - (1 + (n_vertices + 1) / n_edges)
    first = (2 * shifted + 3) ** 2 * np.pi ** 2 / (4 * ell[0] ** 2)
    second = (2 * shifted + 1) ** 2 * np.pi ** 2 / (4 * ell[j - 1] ** 2)
    index = k * n_edges + j
    if 2 * shifted + 1 < 0:
        return BoundResult("deltaprime", "lower", index, 0.0, False, "shifted index negative")
    reason = "" if applicable else "proof assigns negative strengths"
    return BoundResult("deltaprime", "lower", index, float(min(first, second)), applicable, reason)


def lambda1_upper_bounds_deltaprime(graph: MetricGraph, allow_anti_standard=False):
    """Test-function upper bounds for λ₁ of a δ′-graph.

    Constant, sine, doubled sine and cosine on every edge. With
    ``allow_anti_standard`` the vertex sums run over nonzero strengths only.
    """
    kinds = {c.kind for c in graph.vertices.values()}
    if not kinds <= {"DeltaPrime", "AntiStandard"}:
        raise BoundsError("test-function bounds need a delta' graph")
    if "AntiStandard" in kinds and not allow_anti_standard:
        raise ZeroStrengthVertexWithoutRemarkPath(
            "anti-standard vertices present; pass allow_anti_standard=True"
        )
    reason = "zero strengths skipped" if "AntiStandard" in kinds else ""
    L = graph.total_length()
    degrees = graph.degrees()
    vertex_sum = sum(
        degrees[v] ** 2 / c.strength
        for v, c in graph.vertices.items()
        if c.kind == "DeltaPrime"
    )
    inverse_lengths = sum(1 / l for l in graph.lengths())
    values = {
        "constant": vertex_sum / L,
        "sine": np.pi ** 2 / L * inverse_lengths,
        "sine2": 4 * np.pi ** 2 / L * inverse_lengths,
        "cosine": 2 / L * (2 * np.pi ** 2 * inverse_lengths + vertex_sum),
    }
    return [
        BoundResult(f"lambda1_deltaprime.{name}", "upper", 1, float(v), True, reason)
        for name, v in values.items()
    ]


def bound_deltaprime_regular_constant(degree, n_vertices, alpha_prime, total_length):
    """λ₁ ≤ n²|V|/(α′L) when every vertex has degree n and strength α′."""
    if alpha_prime == 0:
        raise ZeroStrengthVertexWithoutRemarkPath("strength must be nonzero")
    value = degree ** 2 * n_vertices / (alpha_prime * total_length)
    return BoundResult("lambda1_deltaprime.regular", "upper", 1, float(value))


# ------------------------------------------------------------------------------
# Trees
# ------------------------------------------------------------------------------
def tree_bounds(tree: MetricGraph, kind, k):
    """Longest-path, edge-count, diameter and pendant-edge bounds for a tree.

    ``kind`` is "standard" (bounds λ_{k+1}) or "anti_standard" (bounds λ_k).
    """
    if not tree.is_tree():
        raise NotATree("tree bounds need a tree")
    _check_k(k)
    if kind == "standard":
        index, suffix, label = k + 1, "1", "standard"
    elif kind == "anti_standard":
        index, suffix, label = k, "2", "anti_standard"
    else:
        raise BoundsError(f"unknown tree kind {kind!r}")

    L = tree.total_length()
    diameter = tree.tree_diameter()
    n_edges = tree.n_edges
    n_pendant = len(tree.pendant_edges())
    results = [
        BoundResult(f"tree{suffix}.path", "upper", index, _sq(k, diameter)),
        BoundResult(f"diameter.{label}", "upper", index, _sq(k, diameter)),
    ]
    if n_edges >= 2:
        results += [
            BoundResult(f"tree{suffix}.edges", "upper", index, _sq(k, 2 * L / n_edges)),
            BoundResult(f"newtree.{label}", "upper", index, _sq(k, 2 * L / n_pendant)),
        ]
    else:
        results += [
            BoundResult(f"tree{suffix}.edges", "upper", index, 0.0, False, "needs |E| >= 2"),
            BoundResult(f"newtree.{label}", "upper", index, 0.0, False, "needs |E_p| >= 2"),
        ]
    return results


def pendant_diameter_gap(tree: MetricGraph):
    """d(T) − 2L/|E_p|, nonnegative for trees with at least two pendant edges."""
    n_pendant = len(tree.pendant_edges())
    if n_pendant < 2:
        raise BoundsError("needs at least two pendant edges")
    return tree.tree_diameter() - 2 * tree.total_length() / n_pendant


# ------------------------------------------------------------------------------
# Graph wrapper
# ------------------------------------------------------------------------------
@dataclass(frozen=True)
class GraphInvariants:
    n_edges: int
    n_vertices: int
    betti: int
    total_length: float
    lengths: tuple
    degrees: dict
    kinds: frozenset
    total_strength: float | None
    n_dirichlet: int
    n_standard: int
    is_tree: bool

    @classmethod
    def of(cls, graph: MetricGraph):
        kinds = frozenset(c.kind for c in graph.vertices.values())
        families = {c.family for c in graph.vertices.values()}
        total = None
        if len(families) == 1 and families <= {"delta", "delta_prime"}:
            total = float(sum(c.family_strength for c in graph.vertices.values()))
        conds = list(graph.vertices.values())
        return cls(
            n_edges=graph.n_edges,
            n_vertices=graph.n_vertices,
            betti=graph.betti_number(),
            total_length=graph.total_length(),
            lengths=tuple(sorted(graph.lengths(), reverse=True)),
            degrees=graph.degrees(),
            kinds=kinds,
            total_strength=total,
            n_dirichlet=sum(c.kind == "Dirichlet" for c in conds),
            n_standard=sum(c.kind == "Standard" for c in conds),
            is_tree=graph.is_tree(),
        )


def graph_invariants(graph: MetricGraph) -> GraphInvariants:
    return GraphInvariants.of(graph)


def graph_bounds(graph: MetricGraph, k_max):
    """Every bound whose hypotheses the graph meets, for indices up to ``k_max``."""
    inv = graph_invariants(graph)
    E, V, beta, L = inv.n_edges, inv.n_vertices, inv.betti, inv.total_length
    results = []

    if inv.kinds == {"Standard"}:
        results += [bound_standard_upper(k, beta, E, L) for k in range(1, k_max + 1)]
        results += [bound_standard_spanning_upper(k, beta, E, L) for k in range(1, k_max)]

    if inv.kinds <= {"Standard", "Delta"}:
        for k in range(1, k_max + 1):
            results += bounds_delta(k, E, V, L, inv.total_strength)

    if inv.kinds <= {"Standard", "Dirichlet"} and inv.n_dirichlet:
        results += [
            bound_dirichlet_standard_upper(k, beta, inv.n_dirichlet, inv.n_standard, L)
            for k in range(1, k_max + 1)
        ]

    if inv.kinds == {"AntiStandard"}:
        for k in range(1, k_max + 1):
            for pair in bounds_antistandard(k, E, V, L).values():
                results += pair
            results.append(bound_antistandard_spanning_upper(k, E, L))

    if inv.kinds <= {"AntiStandard", "DeltaPrime"} and "DeltaPrime" in inv.kinds:
        negative = inv.kinds == {"DeltaPrime"} and all(
            c.strength < 0 for c in graph.vertices.values()
        )
        results += [
            bound_antistandard_spanning_upper(k, E, L, bound_id="deltaprime_anti")
            for k in range(1, k_max + 1)
        ]
        results += lambda1_upper_bounds_deltaprime(graph, allow_anti_standard=True)
        strengths = {c.strength for c in graph.vertices.values()}
        degrees = set(inv.degrees.values())
        if inv.kinds == {"DeltaPrime"} and len(strengths) == 1 and len(degrees) == 1:
            results.append(
                bound_deltaprime_regular_constant(degrees.pop(), V, strengths.pop(), L)
            )
        results += [
            bound_deltaprime_negative_lower(k, V, L, applicable=negative)
            for k in range(2 * V, k_max + 1)
        ]
        if E >= 2:
            for k in range(0, k_max // E + 1):
                for j in range(1, E + 1):
                    if k * E + j <= k_max:
                        results.append(
                            bound_deltaprime_star_lower(k, j, E, V, inv.lengths, applicable=negative)
                        )

    if inv.is_tree and inv.kinds in ({"Standard"}, {"AntiStandard"}):
        kind = "standard" if inv.kinds == {"Standard"} else "anti_standard"
        last = k_max - 1 if kind == "standard" else k_max
        for k in range(1, last + 1):
            results += tree_bounds(graph, kind, k)

    for r in results:
        if not r.applicable:
            logger.debug("bound %s at k=%d not applicable: %s", r.bound_id, r.k, r.reason)
    return results


def bipartite_relation_check_values(bipartite: MetricGraph, k_max, mesh=None, solver=None):
    """Aligned spectra of the all-anti-standard and all-standard versions of a bipartite graph.

    Returns
    -------
    pd.DataFrame
        one row per k = 1..k_max − β with λ_{k+β}(Bᵃ) and λ_{k+1}(Bˢ) and
        their error estimates
    """
    from qgraphpy.spectrum import Solver

    if not bipartite.is_bipartite():
        raise NotBipartite("graph is not bipartite")
    solver = solver or Solver()
    beta = bipartite.betti_number()
    rows = k_max - beta
    if rows < 1:
        raise IndexOutOfRange(f"k_max={k_max} leaves no index after the shift by beta={beta}")

    anti = solver.solve(bipartite.with_conditions(VertexCondition.anti_standard()), k_max, mesh)
    std = solver.solve(bipartite.with_conditions(VertexCondition.standard()), rows + 1, mesh)
    ks = np.arange(1, rows + 1)
    return pd.DataFrame(
        {
            "k": ks,
            "anti_index": ks + beta,
            "standard_index": ks + 1,
            "anti": anti.eigenvalues[ks + beta - 1],
            "standard": std.eigenvalues[ks],
            "anti_error": anti.error_estimates[ks + beta - 1],
            "standard_error": std.error_estimates[ks],
        }
    )
