"""Variational eigensolver for metric-graph Laplacians.

Piecewise-linear elements on every edge, vertex conditions as linear
constraints (null-space reduced) or rank-one stiffness terms, and a dense
symmetric-definite generalized eigenproblem on the reduced space.
"""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
import pandas as pd
import scipy.linalg as la
import scipy.sparse as sp

from qgraphpy.errors import (
    ConstraintRankDeficiency,
    ConstraintViolation,
    KMaxExceedsDofs,
    LambdaBeyondComputedRange,
    MeshInvalid,
)
from qgraphpy.graph_model import Edge, MetricGraph

logger = logging.getLogger(__name__)


# ------------------------------------------------------------------------------
# Mesh
# ------------------------------------------------------------------------------
@dataclass(frozen=True)
class Mesh:
    """Uniform elements per edge, ``n`` by default, overridable per edge id."""

    n: int = 64
    per_edge: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        counts = [self.n, *self.per_edge.values()]
        if not all(int(c) == c and c >= 1 for c in counts):
            raise MeshInvalid(f"element counts must be integers >= 1, got {counts}")

    def count(self, eid):
        return int(self.per_edge.get(eid, self.n))

    def refined(self, factor=2):
        return Mesh(self.n * factor, {k: v * factor for k, v in self.per_edge.items()})

    def nodes(self, edge: Edge):
        return np.linspace(0.0, edge.length, self.count(edge.id) + 1)

    def to_dict(self):
        d = {"elements_per_edge": self.n}
        if self.per_edge:
            d["overrides"] = dict(sorted(self.per_edge.items()))
        return d


# ------------------------------------------------------------------------------
# Assembly
# ------------------------------------------------------------------------------
@dataclass
class FormAssembly:
    """Discrete quadratic form of a graph on a mesh.

    Attributes
    ----------
    stiffness : ndarray
        form matrix K with the vertex rank-one terms folded in
    mass : ndarray
        consistent mass matrix M
    constraints : ndarray
        rows of C, with admissible nodal vectors satisfying C x = 0
    offsets : dict
        edge id -> index of the edge's x = 0 node
    vertex_dofs : dict
        vertex id -> indices of its endpoint nodes
    rank_one : list
        (vertex, coefficient, indices) for every rank-one term added to K
    """

    stiffness: np.ndarray
    mass: np.ndarray
    constraints: np.ndarray
    offsets: dict
    vertex_dofs: dict
    rank_one: list
    mesh: Mesh

    @property
    def n_dofs(self):
        return self.stiffness.shape[0]


def _endpoint_dof(graph, mesh, offsets, endpoint):
    if endpoint.end == "from":
        return offsets[endpoint.edge]
    return offsets[endpoint.edge] + mesh.count(endpoint.edge)


def assemble_forms(graph: MetricGraph, mesh: Mesh | None = None) -> FormAssembly:
    """Stiffness, mass and constraint rows for ``graph`` on ``mesh``.

    Endpoint values at a vertex are separate unknowns; the vertex condition
    ties them together through constraint rows (continuity, Dirichlet,
    balance) or rank-one stiffness terms (δ, δ′).
    """
    mesh = mesh or Mesh()

    offsets, start = {}, 0
    for e in graph.edges:
        offsets[e.id] = start
        start += mesh.count(e.id) + 1
    n_dofs = start

    rows, cols, kvals, mvals = [], [], [], []
    for e in graph.edges:
        n = mesh.count(e.id)
        h = e.length / n
        i = offsets[e.id] + np.arange(n)
        j = i + 1
        rows += [i, j, i, j]
        cols += [i, j, j, i]
        kvals += [np.full(n, 1 / h), np.full(n, 1 / h), np.full(n, -1 / h), np.full(n, -1 / h)]
        mvals += [np.full(n, h / 3), np.full(n, h / 3), np.full(n, h / 6), np.full(n, h / 6)]
    rows = np.concatenate(rows) if rows else np.array([], dtype=int)
    cols = np.concatenate(cols) if cols else np.array([], dtype=int)
    stiffness = sp.coo_matrix(
        (np.concatenate(kvals) if kvals else [], (rows, cols)), shape=(n_dofs, n_dofs)
    ).toarray()
    mass = sp.coo_matrix(
        (np.concatenate(mvals) if mvals else [], (rows, cols)), shape=(n_dofs, n_dofs)
    ).toarray()

    constraint_rows, rank_one, vertex_dofs = [], [], {}
    for v, cond in graph.vertices.items():
        dofs = [_endpoint_dof(graph, mesh, offsets, ep) for ep in graph.endpoints(v)]
        vertex_dofs[v] = dofs
        if not dofs:
            continue

        if cond.kind in ("Standard", "Delta"):
            for d in dofs[1:]:
                row = np.zeros(n_dofs)
                row[dofs[0]], row[d] = 1.0, -1.0
                constraint_rows.append(row)
            if cond.kind == "Delta":
                stiffness[dofs[0], dofs[0]] += cond.strength
                rank_one.append((v, cond.strength, np.array(dofs[:1])))
        elif cond.kind == "Dirichlet":
            for d in dofs:
                row = np.zeros(n_dofs)
                row[d] = 1.0
                constraint_rows.append(row)
        elif cond.kind == "AntiStandard":
            row = np.zeros(n_dofs)
            np.add.at(row, dofs, 1.0)
            constraint_rows.append(row)
        elif cond.kind == "DeltaPrime":
            b = np.zeros(n_dofs)
            np.add.at(b, dofs, 1.0)
            stiffness += np.outer(b, b) / cond.strength
            rank_one.append((v, 1 / cond.strength, np.array(dofs)))
        # Neumann: natural condition, nothing to add

    constraints = np.array(constraint_rows).reshape(len(constraint_rows), n_dofs)
    assert np.allclose(stiffness, stiffness.T), "stiffness must be symmetric"
    return FormAssembly(stiffness, mass, constraints, offsets, vertex_dofs, rank_one, mesh)


def constraint_basis(assembly: FormAssembly):
    """Orthonormal basis of the admissible subspace ``{x : C x = 0}``."""
    c = assembly.constraints
    if c.shape[0] == 0:
        return np.eye(assembly.n_dofs)
    z = la.null_space(c)
    rank = assembly.n_dofs - z.shape[1]
    if rank < c.shape[0]:
        warnings.warn(
            f"dropped {c.shape[0] - rank} redundant constraint rows",
            ConstraintRankDeficiency,
            stacklevel=2,
        )
    return z


def _lowest_eigenvalues(assembly: FormAssembly, k_max):
    z = constraint_basis(assembly)
    dim = z.shape[1]
    if k_max > dim:
        raise KMaxExceedsDofs(f"k_max={k_max} exceeds the reduced dimension {dim}")
    kr = z.T @ assembly.stiffness @ z
    mr = z.T @ assembly.mass @ z
    kr = (kr + kr.T) / 2
    mr = (mr + mr.T) / 2
    return la.eigh(kr, mr, eigvals_only=True, subset_by_index=[0, k_max - 1])


# ------------------------------------------------------------------------------
# Spectrum
# ------------------------------------------------------------------------------
def group_clusters(eigenvalues, cluster_rtol=1e-9):
    """1-based index ranges ``(first, last)`` of numerically equal eigenvalues."""
    clusters = []
    first = 0
    for i in range(1, len(eigenvalues) + 1):
        if i == len(eigenvalues) or (
            eigenvalues[i] - eigenvalues[i - 1]
            >= cluster_rtol * (1 + abs(eigenvalues[i - 1]))
        ):
            clusters.append((first + 1, i))
            first = i
    return tuple(clusters)


@dataclass(frozen=True)
class Spectrum:
    """Lowest eigenvalues of a graph with Richardson error estimates.

    ``eigenvalues`` are the extrapolated values (4 λ(2n) − λ(n))/3 of the
    n- and 2n-element passes, kept in ``coarse`` and ``refined``. The error
    estimate |λ(n) − λ(2n)|/3 is that of ``refined``, an upper allowance for
    the extrapolated value. Indexing through :meth:`value` and :meth:`error`
    is 1-based.
    """

    eigenvalues: np.ndarray
    error_estimates: np.ndarray
    clusters: tuple
    mesh: Mesh
    cluster_rtol: float = 1e-9
    coarse: np.ndarray | None = None
    refined: np.ndarray | None = None

    def __len__(self):
        return len(self.eigenvalues)

    def value(self, k):
        return float(self.eigenvalues[k - 1])

    def error(self, k):
        return float(self.error_estimates[k - 1])

    def multiplicities(self):
        return [last - first + 1 for first, last in self.clusters]

    def counting_function(self, lam):
        return counting_function(self, lam)

    def to_dict(self):
        return {
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "error_estimates": [float(x) for x in self.error_estimates],
            "clusters": [list(c) for c in self.clusters],
            "mesh": self.mesh.to_dict(),
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)

    def to_frame(self):
        return pd.DataFrame(
            {
                "k": np.arange(1, len(self) + 1),
                "eigenvalue": self.eigenvalues,
                "error_estimate": self.error_estimates,
            }
        )


class Solver:
    """Two-level solve: n and 2n elements per edge, extrapolated."""

    n_elements = 64
    cluster_rtol = 1e-9

    def __init__(self, n_elements=None, cluster_rtol=None):
        if n_elements is not None:
            self.n_elements = n_elements
        if cluster_rtol is not None:
            self.cluster_rtol = cluster_rtol

    def solve(self, graph: MetricGraph, k_max=12, mesh: Mesh | None = None) -> Spectrum:
        if k_max < 1:
            raise KMaxExceedsDofs("k_max must be >= 1")
        mesh = mesh or Mesh(self.n_elements)

        coarse = _lowest_eigenvalues(assemble_forms(graph, mesh), k_max)
        fine = _lowest_eigenvalues(assemble_forms(graph, mesh.refined()), k_max)

        slack = 1e-9 * (1 + np.abs(coarse))
        if np.any(fine > coarse + slack):
            logger.warning(
                "refinement raised eigenvalues by up to %.3g (Galerkin monotonicity)",
                float(np.max(fine - coarse)),
            )
        assert np.all(np.diff(fine) >= -slack[:-1]), "eigenvalues must be ascending"

        # P1 eigenvalue error is c h² + O(h⁴)
        values = (4 * fine - coarse) / 3
        order = np.argsort(values, kind="stable")
        values = values[order]
        return Spectrum(
            eigenvalues=values,
            error_estimates=(np.abs(coarse - fine) / 3)[order],
            clusters=group_clusters(values, self.cluster_rtol),
            mesh=mesh,
            cluster_rtol=self.cluster_rtol,
            coarse=coarse,
            refined=fine,
        )


def solve_spectrum(graph, mesh=None, k_max=12, cluster_rtol=None) -> Spectrum:
    """Lowest ``k_max`` eigenvalues of ``graph``.

    Parameters
    ----------
    graph : MetricGraph
    mesh : Mesh, optional
        base mesh (default 64 elements per edge); the error pass uses its refinement
    k_max : int
        number of eigenvalues, at most the reduced dimension of the base mesh
    cluster_rtol : float, optional
        relative tolerance for multiplicity clusters

    Returns
    -------
    Spectrum
    """
    return Solver(cluster_rtol=cluster_rtol).solve(graph, k_max=k_max, mesh=mesh)


def counting_function(spectrum: Spectrum, lam):
    """Number of computed eigenvalues not exceeding ``lam``."""
    if lam > spectrum.eigenvalues[-1]:
        raise LambdaBeyondComputedRange(
            f"lambda={lam} is above the last computed eigenvalue "
            f"{spectrum.eigenvalues[-1]}"
        )
    return int(np.count_nonzero(spectrum.eigenvalues <= lam))


# ------------------------------------------------------------------------------
# Test functions
# ------------------------------------------------------------------------------
def interpolate(graph: MetricGraph, mesh: Mesh, func: Callable):
    """Nodal vector from ``func(edge, x)`` evaluated on every edge's nodes."""
    mesh = mesh or Mesh()
    parts = [np.broadcast_to(func(e, mesh.nodes(e)), mesh.nodes(e).shape) for e in graph.edges]
    return np.concatenate(parts).astype(float)


def quadratic_form_value(graph: MetricGraph, x, mesh: Mesh | None = None):
    """Form value xᵀKx of an admissible nodal vector, vertex terms included."""
    asm = assemble_forms(graph, mesh)
    x = np.asarray(x, dtype=float)
    if x.shape != (asm.n_dofs,):
        raise ConstraintViolation(f"expected {asm.n_dofs} nodal values, got {x.shape}")
    if asm.constraints.size:
        residual = np.max(np.abs(asm.constraints @ x))
        if residual > 1e-10 * (1 + np.max(np.abs(x))):
            raise ConstraintViolation(f"function violates vertex conditions by {residual:.3g}")
    return float(x @ asm.stiffness @ x)


def rayleigh_quotient(graph: MetricGraph, x, mesh: Mesh | None = None):
    mesh = mesh or Mesh()
    x = np.asarray(x, dtype=float)
    norm = float(x @ assemble_forms(graph, mesh).mass @ x)
    return quadratic_form_value(graph, x, mesh) / norm
