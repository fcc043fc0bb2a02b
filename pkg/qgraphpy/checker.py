"""Numeric verification of surgery and bound statements.

Each check builds the graphs a statement compares, solves them on one mesh
and turns every inequality into a three-valued :class:`Verdict` against the
combined Richardson error budget of the two eigenvalues. Checks with
Inconclusive verdicts are repeated on the doubled mesh (``retry`` times).

``run_suite`` draws random instances for every selected suite entry and
collects one :class:`CheckReport` per entry.
"""

from __future__ import annotations

# ------------------------------------------------------------------------------
# Imports
# ------------------------------------------------------------------------------
import json
import logging
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from qgraphpy import bounds, surgery
from qgraphpy.errors import (
    CheckError,
    ConfigInvalid,
    GridPointTooCloseToEigenvalue,
    NoValidRK,
    NotDeltaPrime,
    UnsatisfiableParams,
)
from qgraphpy.graph_model import Edge, MetricGraph, VertexCondition
from qgraphpy.oracle import dirichlet_counting
from qgraphpy.spectrum import Mesh, Solver

logger = logging.getLogger(__name__)

PASS, FAIL, INCONCLUSIVE = "Pass", "Fail", "Inconclusive"
ROUNDING_FLOOR = 1e-9
SCALING_FLOOR = 1e-10

SUITE_ENTRIES = (
    "strength",
    "gluing",
    "pendant",
    "insertion",
    "scaling",
    "rank_one_chains",
    "counting_sandwich",
    "bounds",
    "trees",
    "bipartite",
    "pendant_diameter",
)

GRAPH_CHECKS = (
    "bounds",
    "rank_one_chains",
    "counting_sandwich",
    "bipartite",
    "pendant_diameter",
    "scaling",
    "gluing",
)


# ------------------------------------------------------------------------------
# Verdicts
# ------------------------------------------------------------------------------
@dataclass(frozen=True)
class Verdict:
    """Outcome of one comparison.

    ``margin`` is positive when the claim holds; ``error_budget`` is the
    discretization allowance it was judged against.
    """

    status: str
    margin: float
    error_budget: float
    theorem_id: str = ""
    claim: str = ""
    k: int | None = None
    instance: int | None = None

    @property
    def key(self):
        return self.theorem_id, self.claim, self.k

    def to_dict(self):
        return asdict(self)


def _budget(a, a_err, b, b_err, floor):
    return float(a_err + b_err + floor * (1 + max(abs(a), abs(b))))


def compare_le(a, a_err, b, b_err, theorem_id="", claim="", k=None, sentinel=False,
               floor=ROUNDING_FLOOR):
    """Verdict on ``a <= b`` for two numbers with error estimates."""
    margin = float(b - a)
    if sentinel:
        margin = -margin
    budget = _budget(a, a_err, b, b_err, floor)
    if margin > budget:
        status = PASS
    elif margin < -budget:
        status = FAIL
    else:
        status = INCONCLUSIVE
    return Verdict(status, margin, budget, theorem_id, claim, k)


def compare_eq(a, a_err, b, b_err, theorem_id="", claim="", k=None, floor=ROUNDING_FLOOR):
    """Verdict on ``a == b``: Pass within the budget, Fail outside it."""
    diff = abs(float(a - b))
    budget = _budget(a, a_err, b, b_err, floor)
    return Verdict(PASS if diff <= budget else FAIL, -diff, budget, theorem_id, claim, k)


def compare_counts(a, b, theorem_id="", claim="", k=None, sentinel=False):
    """Verdict on ``a <= b`` for exact integers."""
    margin = float(b - a)
    if sentinel:
        margin = -margin
    return Verdict(PASS if margin >= 0 else FAIL, margin, 0.0, theorem_id, claim, k)


@dataclass(frozen=True)
class CheckOptions:
    n_elements: int = 64
    retry: int = 1
    sentinel: bool = False
    cluster_rtol: float = 1e-9


class _Session:
    """Spectra of one mesh level, cached per graph."""

    def __init__(self, mesh: Mesh, options: CheckOptions):
        self.mesh = mesh
        self.sentinel = options.sentinel
        self.solver = Solver(cluster_rtol=options.cluster_rtol)
        self._cache = {}

    def spectrum(self, graph, k_max):
        hit = self._cache.get(graph)
        if hit is None or len(hit) < k_max:
            hit = self.solver.solve(graph, k_max, self.mesh)
            self._cache[graph] = hit
        return hit

    def le(self, theorem_id, claim, k, lo, i, hi, j):
        """λ_i(lo) <= λ_j(hi); None when an index is outside the computed range."""
        if not (1 <= i <= len(lo) and 1 <= j <= len(hi)):
            return None
        return compare_le(
            lo.value(i), lo.error(i), hi.value(j), hi.error(j),
            theorem_id, claim, k, sentinel=self.sentinel,
        )


def _unsettled(v):
    # Fails within twice the budget are re-judged on the refined mesh too
    if v.status == INCONCLUSIVE:
        return True
    return v.status == FAIL and abs(v.margin) <= 2 * v.error_budget


def _verify(run, options: CheckOptions | None):
    options = options or CheckOptions()
    mesh = Mesh(options.n_elements)
    verdicts = [v for v in run(_Session(mesh, options)) if v is not None]
    for _ in range(options.retry):
        pending = sum(_unsettled(v) for v in verdicts)
        if not pending:
            break
        mesh = mesh.refined()
        logger.info("retrying %d unsettled verdicts at %d elements per edge", pending, mesh.n)
        again = {v.key: v for v in run(_Session(mesh, options)) if v is not None}
        verdicts = [again.get(v.key, v) if _unsettled(v) else v for v in verdicts]
    return verdicts


def _snap_sum(a, b):
    total = a + b
    return 0.0 if abs(total) <= 1e-12 * max(abs(a), abs(b)) else total


# ------------------------------------------------------------------------------
# Vertex conditions
# ------------------------------------------------------------------------------
def check_interlacing_strength(graph: MetricGraph, v, alpha_old, alpha_new, k_max=12, options=None):
    """Change the δ′ strength at ``v`` and verify the strength interlacing chain.

    Whichever strength gives the larger form (larger 1/α′) is the upper
    graph; the chain is λ_k(lower) <= λ_k(upper) <= λ_k(Γ₀) <= λ_{k+1}(lower)
    with Γ₀ anti-standard at ``v``.
    """
    if graph.condition(v).kind != "DeltaPrime":
        raise NotDeltaPrime(f"vertex {v!r} is {graph.condition(v)}")
    if alpha_old == 0 or alpha_new == 0:
        raise NotDeltaPrime("delta' strengths must be nonzero")
    base = surgery.set_vertex_condition(graph, v, VertexCondition.delta_prime(alpha_old))
    changed = surgery.set_vertex_condition(graph, v, VertexCondition.delta_prime(alpha_new))
    anti = surgery.set_vertex_condition(graph, v, VertexCondition.anti_standard())

    def run(s):
        sb, sc, s0 = (s.spectrum(g, k_max + 1) for g in (base, changed, anti))
        out = []
        if alpha_old == alpha_new:
            out += [
                compare_eq(sc.value(k), sc.error(k), sb.value(k), sb.error(k),
                           "strength", "lambda_k(changed) = lambda_k(G)", k)
                for k in range(1, k_max + 1)
            ]
            lower, upper, names = sb, sb, ("G", "G")
        elif 1 / alpha_old > 1 / alpha_new:
            lower, upper, names = sc, sb, ("changed", "G")
        else:
            lower, upper, names = sb, sc, ("G", "changed")
        for k in range(1, k_max + 1):
            if lower is not upper:
                out.append(s.le("strength", f"lambda_k({names[0]}) <= lambda_k({names[1]})",
                                k, lower, k, upper, k))
            out.append(s.le("strength", f"lambda_k({names[1]}) <= lambda_k(anti at v)",
                            k, upper, k, s0, k))
            out.append(s.le("strength", f"lambda_k(anti at v) <= lambda_k+1({names[0]})",
                            k, s0, k, lower, k + 1))
        return out

    return _verify(run, options)


def gluing_case(alpha1, alpha2):
    """(case number, glued_lowers) for gluing δ′ vertices of these strengths."""
    if alpha1 * alpha2 == 0:
        return 6, True
    if alpha1 > 0 and alpha2 > 0:
        return 1, True
    if alpha1 < 0 and alpha2 < 0:
        return 2, False
    total = _snap_sum(alpha1, alpha2)
    if total > 0:
        return 3, False
    if total < 0:
        return 4, True
    return 5, False


def check_gluing_cases(graph: MetricGraph, v1, v2, k_max=12, options=None):
    """Glue ``v1`` and ``v2`` and verify the comparison for their condition family."""
    if v1 == v2:
        raise CheckError("gluing needs two distinct vertices")
    c1, c2 = graph.condition(v1), graph.condition(v2)
    glued = surgery.glue_vertices(graph, [v1, v2])
    family = c1.family

    if family == "delta":
        def run(s):
            sg, st = s.spectrum(graph, k_max + 1), s.spectrum(glued, k_max + 1)
            out = []
            for k in range(1, k_max + 1):
                out.append(s.le("dinterlac", "lambda_k(G) <= lambda_k(glued)", k, sg, k, st, k))
                out.append(s.le("dinterlac", "lambda_k(glued) <= lambda_k+1(G)", k, st, k, sg, k + 1))
            return out
    elif family == "delta_prime":
        case, glued_lowers = gluing_case(c1.family_strength, c2.family_strength)
        claim = (
            f"case {case}: lambda_k(glued) <= lambda_k(G)" if glued_lowers
            else f"case {case}: lambda_k(G) <= lambda_k(glued)"
        )

        def run(s):
            sg, st = s.spectrum(graph, k_max), s.spectrum(glued, k_max)
            lo, hi = (st, sg) if glued_lowers else (sg, st)
            return [s.le("roh", claim, k, lo, k, hi, k) for k in range(1, k_max + 1)]
    else:
        raise CheckError(f"gluing checks need delta or delta' vertices, got {c1} and {c2}")

    return _verify(run, options)


def check_flower(graph: MetricGraph, k_max=12, options=None):
    """Compare a graph with its flower (all vertices glued).

    δ-family graphs get the two-sided shifted chain; δ′ graphs whose
    strengths share one sign get the one-sided comparison. Anything else
    yields no verdicts.
    """
    conds = list(graph.vertices.values())
    families = {c.family for c in conds}
    flower = surgery.flowerize(graph) if len(families) == 1 else None
    n = graph.n_vertices

    if families == {"delta"}:
        def run(s):
            sg, sf = s.spectrum(graph, k_max + n), s.spectrum(flower, k_max)
            out = []
            for k in range(1, k_max + 1):
                if k - n + 1 >= 1:
                    out.append(s.le("dflower", "lambda_k-|V|+1(flower) <= lambda_k(G)",
                                    k, sf, k - n + 1, sg, k))
                out.append(s.le("dflower", "lambda_k(G) <= lambda_k(flower)", k, sg, k, sf, k))
                out.append(s.le("dflower", "lambda_k(flower) <= lambda_k+|V|-1(G)",
                                k, sf, k, sg, k + n - 1))
            return out
        return _verify(run, options)

    if all(c.kind == "DeltaPrime" for c in conds):
        signs = {c.strength > 0 for c in conds}
        if len(signs) == 1:
            positive = signs.pop()

            def run(s):
                sg, sf = s.spectrum(graph, k_max), s.spectrum(flower, k_max)
                if positive:
                    return [s.le("dflower", "lambda_k(flower) <= lambda_k(G)", k, sf, k, sg, k)
                            for k in range(1, k_max + 1)]
                return [s.le("dflower", "lambda_k(G) <= lambda_k(flower)", k, sg, k, sf, k)
                        for k in range(1, k_max + 1)]
            return _verify(run, options)

    logger.debug("no flower comparison for %r", graph)
    return []


def check_rank_one_chains(graph: MetricGraph, v, k_max=12, options=None):
    """Interlacing chains between condition variants at ``v`` and the global chains.

    Local variants: Neumann, anti-standard, δ′(α′) and, at degree d >= 2,
    δ(d²/α′) at ``v`` (shift d − 1); Dirichlet only when ``v`` is pendant.
    Global: all-Neumann vs all-anti-standard, and for δ-family graphs the
    graph vs all-Dirichlet.
    """
    cond = graph.condition(v)
    degree = graph.degree(v)
    strengths = [cond.strength] if cond.kind == "DeltaPrime" else [1.0, -1.0]
    n = graph.n_vertices
    at_v = {
        "neumann": surgery.set_vertex_condition(graph, v, VertexCondition.neumann()),
        "anti": surgery.set_vertex_condition(graph, v, VertexCondition.anti_standard()),
    }
    for a in strengths:
        at_v[f"deltap({a:g})"] = surgery.set_vertex_condition(graph, v, VertexCondition.delta_prime(a))
        at_v[f"delta({degree ** 2 / a:g})"] = surgery.set_vertex_condition(
            graph, v, VertexCondition.delta(degree ** 2 / a)
        )
    pendant = degree == 1
    if pendant:
        at_v["dirichlet"] = surgery.set_vertex_condition(graph, v, VertexCondition.dirichlet())
    else:
        logger.info("vertex %r has degree %d; Dirichlet chains skipped", v, degree)
    all_neumann = graph.with_conditions(VertexCondition.neumann())
    all_anti = graph.with_conditions(VertexCondition.anti_standard())
    delta_family = all(c.family == "delta" for c in graph.vertices.values())
    all_dirichlet = graph.with_conditions(VertexCondition.dirichlet())

    def chain(s, out, lo_name, hi_name, shift=1):
        lo, hi = s.spectrum(at_v[lo_name], k_max + shift), s.spectrum(at_v[hi_name], k_max + shift)
        for k in range(1, k_max + 1):
            out.append(s.le("rank_one_chains", f"lambda_k({lo_name}) <= lambda_k({hi_name})",
                            k, lo, k, hi, k))
            out.append(s.le("rank_one_chains", f"lambda_k({hi_name}) <= lambda_k+{shift}({lo_name})",
                            k, hi, k, lo, k + shift))

    def run(s):
        out = []
        chain(s, out, "neumann", "anti")
        for a in strengths:
            dp, d = f"deltap({a:g})", f"delta({degree ** 2 / a:g})"
            if a > 0:
                chain(s, out, "neumann", dp)
            else:
                chain(s, out, dp, "neumann")
            if degree >= 2:
                chain(s, out, dp, d, shift=degree - 1)
            if pendant:
                chain(s, out, dp, "dirichlet")
        if pendant:
            chain(s, out, "neumann", "dirichlet")

        sn, sa = s.spectrum(all_neumann, k_max + n), s.spectrum(all_anti, k_max + n)
        for k in range(1, k_max + 1):
            out.append(s.le("rank_one_chains", "lambda_k(all neumann) <= lambda_k(all anti)",
                            k, sn, k, sa, k))
            out.append(s.le("rank_one_chains", "lambda_k(all anti) <= lambda_k+|V|(all neumann)",
                            k, sa, k, sn, k + n))
        if delta_family:
            sg, sd = s.spectrum(graph, k_max + n), s.spectrum(all_dirichlet, k_max)
            for k in range(1, k_max + 1):
                out.append(s.le("rank_one_chains", "lambda_k(G) <= lambda_k(all dirichlet)",
                                k, sg, k, sd, k))
                out.append(s.le("rank_one_chains", "lambda_k(all dirichlet) <= lambda_k+|V|(G)",
                                k, sd, k, sg, k + n))
        return out

    return _verify(run, options)


# ------------------------------------------------------------------------------
# Lengths
# ------------------------------------------------------------------------------
def check_scaling(graph: MetricGraph, t, mode="graph", edge=None, k_max=12, options=None):
    """Graph mode: λ_k(scaled)·t² = λ_k(G) up to rounding. Edge mode: monotone in t."""
    if mode == "graph":
        scaled = surgery.scale_graph(graph, t)

        def run(s):
            sg, ss = s.spectrum(graph, k_max), s.spectrum(scaled, k_max)
            return [
                compare_eq(ss.value(k) * t ** 2, 0.0, sg.value(k), 0.0,
                           "length2", "lambda_k(scaled) t^2 = lambda_k(G)", k, floor=SCALING_FLOOR)
                for k in range(1, k_max + 1)
            ]
        # exact in the discrete model: one mesh level is enough
        return _verify(run, replace(options or CheckOptions(), retry=0))

    if mode != "edge":
        raise CheckError(f"unknown scaling mode {mode!r}")
    edge = edge or graph.edge_ids[0]
    scaled = surgery.scale_edge(graph, edge, t)

    def run(s):
        sg, ss = s.spectrum(graph, k_max), s.spectrum(scaled, k_max)
        if t >= 1:
            return [s.le("length1", "lambda_k(lengthened) <= lambda_k(G)", k, ss, k, sg, k)
                    for k in range(1, k_max + 1)]
        return [s.le("length1", "lambda_k(G) <= lambda_k(shortened)", k, sg, k, ss, k)
                for k in range(1, k_max + 1)]

    return _verify(run, options)


def check_lengthening(graph: MetricGraph, edge, t, k_max=12, options=None):
    """λ_k(lengthened) <= λ_k(G) for every k from the first nonnegative λ_k(G) on."""
    if not t > 1:
        raise CheckError(f"lengthening needs t > 1, got {t}")
    longer = surgery.scale_edge(graph, edge, t)

    def run(s):
        sg, sl = s.spectrum(graph, k_max), s.spectrum(longer, k_max)
        out = []
        started = False
        for k in range(1, k_max + 1):
            started = started or sg.value(k) + ROUNDING_FLOOR >= sg.error(k)
            if not started:
                continue
            out.append(s.le("lengthening", "lambda_k(lengthened) <= lambda_k(G)", k, sl, k, sg, k))
        return out

    return _verify(run, options)


# ------------------------------------------------------------------------------
# Attaching and inserting
# ------------------------------------------------------------------------------
def pendant_case(alpha1, alpha2):
    """(case number, attached_lowers) for attaching at δ′ vertices of these strengths."""
    if alpha1 * alpha2 == 0:
        return 2, True
    if alpha1 > 0 and alpha2 > 0:
        return 1, True
    if alpha1 < 0 and alpha2 < 0:
        return 4, False
    total = _snap_sum(alpha1, alpha2)
    if total < 0:
        return 3, True
    if total > 0:
        return 5, False
    return 6, False


def pendant_counts(spec_g, spec_h, k):
    """Certified (lower, upper) counts of eigenvalues of H up to λ_k(G).

    Raises
    ------
    NoValidRK
        when λ_k(G) plus its budget is not below the last computed λ(H)
    """
    lam = spec_g.value(k)
    slack = spec_g.error(k) + float(np.max(spec_h.error_estimates)) + ROUNDING_FLOOR * (1 + abs(lam))
    if lam + slack >= spec_h.eigenvalues[-1]:
        raise NoValidRK(f"lambda_{k}(G) is beyond the computed spectrum of the pendant graph")
    eigs = spec_h.eigenvalues
    return int(np.count_nonzero(eigs <= lam - slack)), int(np.count_nonzero(eigs <= lam + slack))


def check_pendant_cases(graph: MetricGraph, v, pendant: MetricGraph, w, k_max=12, options=None):
    """Attach ``pendant`` at ``v`` (glued to its vertex ``w``) and verify the shifted comparison.

    For every k the pair (r, k) uses r = N_pendant(λ_k(G)): the lower
    certified count where the attached graph should lie below, the upper
    count where it should lie above.
    """
    c1, c2 = graph.condition(v), pendant.condition(w)
    if c1.family != "delta_prime" or c2.family != "delta_prime":
        raise NotDeltaPrime(f"pendant attachment needs delta' vertices, got {c1} and {c2}")
    case, lowers = pendant_case(c1.family_strength, c2.family_strength)
    attached = surgery.attach_pendant_graph(graph, v, pendant, w)
    claim = (
        f"case {case}: lambda_k+r(attached) <= lambda_k(G)" if lowers
        else f"case {case}: lambda_k+r(attached) >= lambda_k(G)"
    )

    def run(s):
        sg, sh = s.spectrum(graph, k_max), s.spectrum(pendant, k_max)
        pairs = []
        for k in range(1, k_max + 1):
            try:
                r_lo, r_hi = pendant_counts(sg, sh, k)
            except NoValidRK as exc:
                logger.debug("%s", exc)
                continue
            r = r_lo if lowers else r_hi
            if r >= 1:
                pairs.append((k, r))
        if not pairs:
            return [Verdict(INCONCLUSIVE, 0.0, 0.0, "pendant", "no (r, k0) pair in computed range")]
        st = s.spectrum(attached, max(k + r for k, r in pairs))
        out = []
        for k, r in pairs:
            if lowers:
                out.append(s.le("pendant", claim, k, st, k + r, sg, k))
            else:
                out.append(s.le("pendant", claim, k, sg, k, st, k + r))
        return out

    return _verify(run, options)


def prop_insert_strengths(alpha0):
    """Split of a δ′ strength over two vertices that lowers every eigenvalue."""
    if alpha0 > 0:
        return 2 * alpha0, -alpha0
    return alpha0 / 2, alpha0 / 2


def check_insertion(graph: MetricGraph, v, inserted: MetricGraph, assignment, k_max=12,
                    conditions=None, options=None):
    """Insert ``inserted`` at ``v`` and verify the matching statement.

    - edge-less ``inserted``: the spectrum is unchanged
    - δ′ vertex, anti-standard ``inserted``, two receiving vertices:
      λ_{k+1}(Γ̃) <= λ_k(G) from the first k with λ_k(G) >= max(0, λ₁(glued inserted))
    - δ-family throughout: λ_{k+r-m}(Γ̃) <= λ_k(G) whenever λ_r(inserted) <= λ_k(G), r >= m
    """
    cond_v = graph.condition(v)
    receiving = [w for w in inserted.vertices if w in set(assignment.values())]
    kinds = {c.kind for c in inserted.vertices.values()}

    if inserted.n_edges == 0:
        result = surgery.insert_graph_at_vertex(graph, v, inserted, assignment, conditions)

        def run(s):
            sg, sr = s.spectrum(graph, k_max), s.spectrum(result, k_max)
            return [compare_eq(sr.value(k), sr.error(k), sg.value(k), sg.error(k),
                               "insertion", "lambda_k(inserted point) = lambda_k(G)", k)
                    for k in range(1, k_max + 1)]
        return _verify(run, options)

    if cond_v.kind == "DeltaPrime" and kinds == {"AntiStandard"} and len(receiving) == 2:
        if conditions is None:
            a1, a2 = prop_insert_strengths(cond_v.strength)
            conditions = {
                receiving[0]: VertexCondition.delta_prime(a1),
                receiving[1]: VertexCondition.delta_prime(a2),
            }
        result = surgery.insert_graph_at_vertex(graph, v, inserted, assignment, conditions)
        closed = surgery.glue_vertices(inserted, receiving)

        def run(s):
            sg, sr = s.spectrum(graph, k_max), s.spectrum(result, k_max + 1)
            sc = s.spectrum(closed, 1)
            threshold = max(0.0, sc.value(1) + sc.error(1))
            started = False
            out = []
            for k in range(1, k_max + 1):
                started = started or sg.value(k) - sg.error(k) >= threshold
                if started:
                    out.append(s.le("insert", "lambda_k+1(inserted) <= lambda_k(G)",
                                    k, sr, k + 1, sg, k))
            return out
        return _verify(run, options)

    if cond_v.family == "delta" and all(c.family == "delta" for c in inserted.vertices.values()):
        result = surgery.insert_graph_at_vertex(graph, v, inserted, assignment, conditions)
        m = len(receiving)

        def run(s):
            sg, sh = s.spectrum(graph, k_max), s.spectrum(inserted, k_max)
            pairs = []
            for k in range(1, k_max + 1):
                try:
                    r, _ = pendant_counts(sg, sh, k)
                except NoValidRK:
                    continue
                if r >= m:
                    pairs.append((k, r))
            if not pairs:
                return []
            sr = s.spectrum(result, max(k + r - m for k, r in pairs))
            return [s.le("insertion", "lambda_k+r-m(inserted) <= lambda_k(G)", k, sr, k + r - m, sg, k)
                    for k, r in pairs]
        return _verify(run, options)

    raise CheckError(f"no insertion statement covers {cond_v} with inserted kinds {sorted(kinds)}")


# ------------------------------------------------------------------------------
# Counting, bounds, trees
# ------------------------------------------------------------------------------
def _assert_clear(lam, spectrum, lengths):
    for value, err in zip(spectrum.eigenvalues, spectrum.error_estimates):
        if abs(lam - value) <= err + ROUNDING_FLOOR * (1 + abs(lam)):
            raise GridPointTooCloseToEigenvalue(f"lambda={lam:.6g} is within budget of {value:.6g}")
    root = math.sqrt(max(lam, 0.0))
    for length in lengths:
        j = round(root * length / math.pi)
        if j >= 1 and abs(lam - (j * math.pi / length) ** 2) <= 1e-12 * (1 + lam):
            raise GridPointTooCloseToEigenvalue(f"lambda={lam:.6g} is a Dirichlet eigenvalue")


def check_counting_sandwich(graph: MetricGraph, grid=None, k_max=12, options=None):
    """[√λL/π] − |E| + 1 <= N_d(λ) <= N_a(λ) <= N_d(λ) + |V| on a λ grid.

    N_d is the decoupled Dirichlet count (closed form), N_a the computed count
    of the anti-standard graph. Grid points within budget of an eigenvalue
    are skipped.
    """
    if {c.kind for c in graph.vertices.values()} != {"AntiStandard"}:
        raise CheckError("counting sandwich needs an all anti-standard graph")
    lengths = graph.lengths()
    L, E, V = graph.total_length(), graph.n_edges, graph.n_vertices

    def run(s):
        sa = s.spectrum(graph, k_max)
        points = grid
        if points is None:
            top = 0.95 * sa.value(k_max)
            points = np.linspace(top / 25, top, 25)
        out = []
        for i, lam in enumerate(points, start=1):
            try:
                _assert_clear(lam, sa, lengths)
            except GridPointTooCloseToEigenvalue as exc:
                logger.warning("grid point skipped: %s", exc)
                continue
            n_d = dirichlet_counting(lengths, lam)
            n_a = sa.counting_function(lam)
            weyl = math.floor(math.sqrt(max(lam, 0.0)) * L / math.pi) - E + 1
            out += [
                compare_counts(weyl, n_d, "counting_sandwich", "weyl term <= N_dirichlet(lambda)", i, s.sentinel),
                compare_counts(n_d, n_a, "counting_sandwich", "N_dirichlet <= N_anti(lambda)", i, s.sentinel),
                compare_counts(n_a, n_d + V, "counting_sandwich", "N_anti <= N_dirichlet + |V|", i, s.sentinel),
            ]
        return out

    return _verify(run, options)


def check_bounds(graph: MetricGraph, k_max=12, options=None):
    """Every applicable closed-form bound against the computed spectrum."""
    results = [r for r in bounds.graph_bounds(graph, k_max) if r.applicable]
    if not results:
        return []
    top = max(r.k for r in results)

    def run(s):
        sg = s.spectrum(graph, top)
        out = []
        for r in results:
            tid = r.bound_id.split(".")[0]
            claim = f"{r.bound_id} {r.side} bound"
            lam, err = sg.value(r.k), sg.error(r.k)
            if r.side == "lower":
                out.append(compare_le(r.value, 0.0, lam, err, tid, claim, r.k, s.sentinel))
            else:
                out.append(compare_le(lam, err, r.value, 0.0, tid, claim, r.k, s.sentinel))
        return out

    return _verify(run, options)


def bounds_frame(graph: MetricGraph, k_max=12, options=None):
    """Applicable bounds with the computed eigenvalue and verdict, one row per bound."""
    options = options or CheckOptions()
    results = [r for r in bounds.graph_bounds(graph, k_max) if r.applicable]
    columns = ["bound_id", "k", "side", "value", "spectrum_value", "margin", "verdict"]
    if not results:
        return pd.DataFrame(columns=columns)
    spec = Solver(cluster_rtol=options.cluster_rtol).solve(
        graph, max(r.k for r in results), Mesh(options.n_elements)
    )
    rows = []
    for r in results:
        lam, err = spec.value(r.k), spec.error(r.k)
        if r.side == "lower":
            v = compare_le(r.value, 0.0, lam, err, sentinel=options.sentinel)
        else:
            v = compare_le(lam, err, r.value, 0.0, sentinel=options.sentinel)
        rows.append((r.bound_id, r.k, r.side, r.value, lam, v.margin, v.status))
    return pd.DataFrame(rows, columns=columns)


def bipartite_cover(graph: MetricGraph):
    """The graph itself when bipartite, else every edge subdivided at its midpoint."""
    if graph.is_bipartite():
        return graph
    out = graph
    for eid in graph.edge_ids:
        out = out.subdivide_edge(eid, out.edge(eid).length / 2)
    return out.replace(strict=True)


def check_bipartite_relations(graph: MetricGraph, k_max=12, options=None):
    """λ_{k+β}(Bᵃ) = λ_{k+1}(Bˢ) on the graph or its midpoint subdivision."""
    cover = bipartite_cover(graph)
    tid = "tree_relation" if cover.is_tree() else "bipartite_relation"
    if k_max - cover.betti_number() < 1:
        logger.info("k_max=%d leaves no index after the cycle shift", k_max)
        return []

    def run(s):
        table = bounds.bipartite_relation_check_values(cover, k_max, mesh=s.mesh, solver=s.solver)
        return [
            compare_eq(row.anti, row.anti_error, row.standard, row.standard_error,
                       tid, "lambda_k+beta(anti) = lambda_k+1(standard)", int(row.k))
            for row in table.itertuples()
        ]

    return _verify(run, options)


def check_pendant_diameter(tree: MetricGraph, slack=1e-12):
    """2L/|E_p| <= d(T) with a fixed floating slack."""
    if len(tree.pendant_edges()) < 2:
        logger.debug("fewer than two pendant edges; nothing to check")
        return []
    gap = bounds.pendant_diameter_gap(tree)
    return [Verdict(PASS if gap >= -slack else FAIL, gap, slack, "pendant_diameter",
                    "2L/|E_p| <= diameter")]


# ------------------------------------------------------------------------------
# Reports
# ------------------------------------------------------------------------------
@dataclass
class CheckReport:
    theorem_id: str
    instances: int
    verdicts: list
    worst_case: dict | None = None
    seed: int | None = None

    @property
    def failed(self):
        return [v for v in self.verdicts if v.status == FAIL]

    def counts(self):
        return {s: sum(v.status == s for v in self.verdicts) for s in (PASS, FAIL, INCONCLUSIVE)}

    def to_frame(self):
        columns = [f.name for f in fields(Verdict)]
        return pd.DataFrame([v.to_dict() for v in self.verdicts], columns=columns)

    def to_dict(self):
        return {
            "theorem_id": self.theorem_id,
            "instances": self.instances,
            "seed": self.seed,
            "counts": self.counts(),
            "worst_case": self.worst_case,
            "verdicts": [v.to_dict() for v in self.verdicts],
        }


def _worst(verdicts, graphs):
    """Lowest-margin Fail, else lowest-margin verdict overall."""
    pool = [v for v in verdicts if v.status == FAIL] or [
        v for v in verdicts if v.error_budget or v.margin
    ]
    if not pool:
        return None
    worst = min(pool, key=lambda v: v.margin)
    return {
        "instance": worst.instance,
        "claim": worst.claim,
        "k": worst.k,
        "margin": worst.margin,
        "graph": graphs.get(worst.instance),
    }


def make_report(theorem_id, results, seed=None):
    """Report from ``[(graph dict, verdicts), ...]`` indexed by instance."""
    verdicts, graphs = [], {}
    for i, (graph, vs) in enumerate(results):
        graphs[i] = graph
        verdicts += [replace(v, instance=i) for v in vs]
    return CheckReport(theorem_id, len(results), verdicts, _worst(verdicts, graphs), seed)


def check_graph(graph: MetricGraph, theorems=None, vertex=None, k_max=12, options=None):
    """Graph-level checks for one given graph, one report per selected key.

    Keys are those of ``GRAPH_CHECKS``; checks whose hypotheses the graph
    does not meet are left out.
    """
    theorems = tuple(theorems or GRAPH_CHECKS)
    unknown = set(theorems) - set(GRAPH_CHECKS)
    if unknown:
        raise ConfigInvalid(f"unknown graph checks {sorted(unknown)}")
    kinds = {c.kind for c in graph.vertices.values()}
    reports = []
    for key in theorems:
        if key == "bounds":
            verdicts = check_bounds(graph, k_max, options)
        elif key == "rank_one_chains":
            vertices = [vertex] if vertex is not None else graph.vertex_ids
            verdicts = [x for u in vertices for x in check_rank_one_chains(graph, u, k_max, options)]
        elif key == "counting_sandwich":
            if kinds != {"AntiStandard"}:
                continue
            verdicts = check_counting_sandwich(graph, k_max=k_max, options=options)
        elif key == "bipartite":
            verdicts = check_bipartite_relations(graph, k_max, options)
        elif key == "pendant_diameter":
            if not graph.is_tree():
                continue
            verdicts = check_pendant_diameter(graph)
        elif key == "scaling":
            verdicts = check_scaling(graph, 2.0, "graph", k_max=k_max, options=options)
        else:
            verdicts = check_flower(graph, k_max, options)
        reports.append(make_report(key, [(graph.to_dict(), verdicts)]))
    return reports


# ------------------------------------------------------------------------------
# Random instances
# ------------------------------------------------------------------------------
RANDOM_FAMILIES = ("delta", "delta_prime", "standard", "anti_standard", "dirichlet_standard")


@dataclass
class GraphParams:
    """Ranges for :func:`random_graph`.

    ``strengths`` are magnitudes; ``sign`` picks positive, negative or
    mixed strengths. ``anti_fraction`` turns δ′ vertices anti-standard and
    ``zero_fraction`` turns δ vertices standard with that probability.
    Without ``loops`` every extra edge joins two distinct vertices; a loop
    carries modes that do not see its vertex condition.
    """

    n_edges: tuple = (2, 6)
    lengths: tuple = (0.5, 2.0)
    strengths: tuple = (0.2, 5.0)
    sign: str = "mixed"
    family: str = "delta_prime"
    tree: bool = False
    min_vertices: int = 1
    anti_fraction: float = 0.0
    zero_fraction: float = 0.25
    dirichlet_fraction: float = 0.5
    loops: bool = True

    def validate(self):
        lo, hi = self.n_edges
        if not 1 <= lo <= hi:
            raise UnsatisfiableParams(f"edge count range {self.n_edges} is empty")
        if not 0 < self.lengths[0] <= self.lengths[1]:
            raise UnsatisfiableParams(f"length range {self.lengths} is empty or nonpositive")
        if not 0 <= self.strengths[0] <= self.strengths[1] or self.strengths[1] == 0:
            raise UnsatisfiableParams(f"strength range {self.strengths} is empty")
        if self.family == "delta_prime" and self.strengths[0] == 0:
            raise UnsatisfiableParams("delta' strengths must exclude 0")
        if self.family not in RANDOM_FAMILIES:
            raise UnsatisfiableParams(f"unknown family {self.family!r}")
        if self.sign not in ("mixed", "positive", "negative"):
            raise UnsatisfiableParams(f"unknown sign {self.sign!r}")
        if not 1 <= self.min_vertices <= lo + 1:
            raise UnsatisfiableParams(f"cannot have {self.min_vertices} vertices with {lo} edges")
        return self


def _strength(rng, params):
    magnitude = float(rng.uniform(*params.strengths))
    if params.sign == "positive":
        return magnitude
    if params.sign == "negative":
        return -magnitude
    return magnitude if rng.random() < 0.5 else -magnitude


def _condition(rng, params):
    if params.family == "delta":
        if rng.random() < params.zero_fraction:
            return VertexCondition.standard()
        return VertexCondition.delta(_strength(rng, params))
    if params.family == "delta_prime":
        if rng.random() < params.anti_fraction:
            return VertexCondition.anti_standard()
        return VertexCondition.delta_prime(_strength(rng, params))
    if params.family == "anti_standard":
        return VertexCondition.anti_standard()
    return VertexCondition.standard()


def random_graph(params: GraphParams, seed):
    """Connected random multigraph, deterministic per seed.

    A random spanning tree joins all vertices; the remaining edges pair
    random endpoints, parallel edges included and loops unless
    ``params.loops`` is off.
    """
    params.validate()
    rng = np.random.default_rng(seed)
    lo, hi = params.n_edges
    n_edges = int(rng.integers(lo, hi + 1))
    if params.tree:
        n_vertices = n_edges + 1
    else:
        fewest = params.min_vertices if params.loops else max(params.min_vertices, 2)
        n_vertices = int(rng.integers(fewest, n_edges + 2))

    ends = [(int(rng.integers(i)), i) for i in range(1, n_vertices)]
    while len(ends) < n_edges:
        if params.loops:
            a, b = (int(x) for x in rng.integers(n_vertices, size=2))
        else:
            a, b = (int(x) for x in rng.choice(n_vertices, size=2, replace=False))
        ends.append((a, b))
    edges = [
        Edge(f"e{i}", f"v{a}", f"v{b}", float(rng.uniform(*params.lengths)))
        for i, (a, b) in enumerate(ends, start=1)
    ]
    vertices = {f"v{i}": _condition(rng, params) for i in range(n_vertices)}
    graph = MetricGraph(vertices, edges)

    if params.family == "dirichlet_standard":
        candidates = sorted(graph.pendant_vertices()) or graph.vertex_ids
        chosen = [v for v in candidates if rng.random() < params.dirichlet_fraction]
        chosen = chosen or [candidates[int(rng.integers(len(candidates)))]]
        graph = graph.replace(
            vertices={v: VertexCondition.dirichlet() if v in chosen else c for v, c in vertices.items()}
        )
    return graph


# ------------------------------------------------------------------------------
# Suite
# ------------------------------------------------------------------------------
@dataclass
class SuiteConfig:
    theorems: tuple = SUITE_ENTRIES
    instances: int = 100
    seed: int = 1
    n_elements: int = 64
    k_max: int = 12
    n_jobs: int | None = None
    progress: bool = False
    sentinel: bool = False

    def validate(self):
        self.theorems = tuple(self.theorems)
        unknown = set(self.theorems) - set(SUITE_ENTRIES)
        if not self.theorems or unknown:
            raise ConfigInvalid(f"unknown or empty theorem selection {sorted(unknown)}")
        if int(self.instances) < 1:
            raise ConfigInvalid("instances must be >= 1")
        if int(self.n_elements) < 2:
            raise ConfigInvalid("n_elements must be >= 2")
        if int(self.k_max) < 2:
            raise ConfigInvalid("k_max must be >= 2")
        if self.n_jobs is not None and int(self.n_jobs) == 0:
            raise ConfigInvalid("n_jobs must be nonzero")
        return self

    @property
    def options(self):
        return CheckOptions(n_elements=self.n_elements, sentinel=self.sentinel)

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        extra = set(d) - names
        if extra:
            raise ConfigInvalid(f"unknown config keys {sorted(extra)}")
        return cls(**d).validate()

    @classmethod
    def load(cls, path):
        try:
            payload = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
        if not isinstance(payload, dict):
            raise ConfigInvalid("config must be a JSON object")
        return cls.from_dict(payload)


def _pick(rng, items):
    items = list(items)
    return items[int(rng.integers(len(items)))]


def _instance_strength(rng, k_max, options, i):
    g = random_graph(GraphParams(family="delta_prime", loops=False), rng)
    v = _pick(rng, g.vertex_ids)
    new = _strength(rng, GraphParams())
    return g, lambda: check_interlacing_strength(g, v, g.condition(v).strength, new, k_max, options)


def _instance_gluing(rng, k_max, options, i):
    if i % 3 == 1:
        params = GraphParams(family="delta", strengths=(0.0, 3.0), min_vertices=2, loops=False)
    elif i % 3 == 0:
        params = GraphParams(family="delta_prime", min_vertices=2, anti_fraction=0.25, loops=False)
    else:
        sign = "positive" if i % 2 else "negative"
        params = GraphParams(family="delta_prime", min_vertices=2, sign=sign, loops=False)
    g = random_graph(params, rng)
    v1, v2 = (str(x) for x in rng.choice(g.vertex_ids, size=2, replace=False))
    return g, lambda: check_gluing_cases(g, v1, v2, k_max, options) + check_flower(g, k_max, options)


def _instance_pendant(rng, k_max, options, i):
    g = random_graph(GraphParams(family="delta_prime", anti_fraction=0.2, loops=False), rng)
    h = random_graph(GraphParams(family="delta_prime", n_edges=(1, 3), anti_fraction=0.2, loops=False), rng)
    v, w = _pick(rng, g.vertex_ids), _pick(rng, h.vertex_ids)
    return g, lambda: check_pendant_cases(g, v, h, w, k_max, options)


def _instance_insertion(rng, k_max, options, i):
    if i % 3 == 0:
        g = random_graph(GraphParams(family="delta", strengths=(0.0, 3.0), loops=False), rng)
        h = random_graph(GraphParams(family="delta", strengths=(0.0, 3.0), n_edges=(1, 3), loops=False), rng)
        v = _pick(rng, g.vertex_ids)
        assignment = {ep: _pick(rng, h.vertex_ids) for ep in g.endpoints(v)}
        return g, lambda: check_insertion(g, v, h, assignment, k_max, options=options)
    if i % 3 == 2:
        g = random_graph(GraphParams(family="delta_prime", loops=False), rng)
        hubs = [u for u in g.vertex_ids if g.degree(u) >= 2]
        if hubs:
            v = _pick(rng, hubs)
            h = random_graph(
                GraphParams(family="anti_standard", n_edges=(1, 3), min_vertices=2, loops=False), rng
            )
            w1, w2 = (str(x) for x in rng.choice(h.vertex_ids, size=2, replace=False))
            ends = g.endpoints(v)
            assignment = {ends[0]: w1, ends[1]: w2}
            assignment.update({ep: _pick(rng, (w1, w2)) for ep in ends[2:]})
            return g, lambda: check_insertion(g, v, h, assignment, k_max, options=options)
    family = _pick(rng, ("delta", "delta_prime", "anti_standard"))
    g = random_graph(GraphParams(family=family, loops=False), rng)
    t = float(rng.uniform(1.1, 2.0))
    e = _pick(rng, g.edge_ids)
    return g, lambda: check_lengthening(g, e, t, k_max, options)


def _instance_scaling(rng, k_max, options, i):
    g = random_graph(GraphParams(family="delta_prime"), rng)
    t = (0.5, 2.0, 3.0)[i % 3]
    edge_t = float(rng.uniform(1.2, 2.0))
    e = _pick(rng, g.edge_ids)
    return g, lambda: (
        check_scaling(g, t, "graph", k_max=k_max, options=options)
        + check_scaling(g, edge_t, "edge", e, k_max, options)
    )


def _instance_chains(rng, k_max, options, i):
    family = ("delta", "delta_prime")[i % 2]
    g = random_graph(GraphParams(family=family, strengths=(0.2, 3.0), loops=False), rng)
    v = _pick(rng, g.vertex_ids)
    return g, lambda: check_rank_one_chains(g, v, k_max, options)


def _instance_counting(rng, k_max, options, i):
    g = random_graph(GraphParams(family="anti_standard"), rng)
    return g, lambda: check_counting_sandwich(g, k_max=k_max, options=options)


BOUND_FAMILIES = (
    ("standard", "mixed"),
    ("delta", "mixed"),
    ("delta", "positive"),
    ("delta", "negative"),
    ("dirichlet_standard", "mixed"),
    ("anti_standard", "mixed"),
    ("delta_prime", "negative"),
    ("delta_prime", "mixed"),
)


def _instance_bounds(rng, k_max, options, i):
    family, sign = BOUND_FAMILIES[i % len(BOUND_FAMILIES)]
    params = GraphParams(family=family, sign=sign, strengths=(0.2, 3.0), zero_fraction=0.0)
    g = random_graph(params, rng)
    return g, lambda: check_bounds(g, k_max, options)


def _instance_trees(rng, k_max, options, i):
    t = random_graph(GraphParams(family="standard", tree=True, n_edges=(1, 6)), rng)
    anti = t.with_conditions(VertexCondition.anti_standard())
    return t, lambda: (
        check_bounds(t, k_max, options)
        + check_bounds(anti, k_max, options)
        + check_bipartite_relations(t, k_max, options)
    )


def _instance_bipartite(rng, k_max, options, i):
    g = random_graph(GraphParams(family="standard", n_edges=(2, 5)), rng)
    return g, lambda: check_bipartite_relations(g, k_max, options)


def _instance_pendant_diameter(rng, k_max, options, i):
    t = random_graph(GraphParams(family="standard", tree=True, n_edges=(2, 8)), rng)
    return t, lambda: check_pendant_diameter(t)


SUITE_INSTANCES = {
    "strength": _instance_strength,
    "gluing": _instance_gluing,
    "pendant": _instance_pendant,
    "insertion": _instance_insertion,
    "scaling": _instance_scaling,
    "rank_one_chains": _instance_chains,
    "counting_sandwich": _instance_counting,
    "bounds": _instance_bounds,
    "trees": _instance_trees,
    "bipartite": _instance_bipartite,
    "pendant_diameter": _instance_pendant_diameter,
}


def run_instance(entry, seed, instance, k_max=12, options=None):
    """One suite instance: (graph dict, verdicts), reproducible from its arguments.

    The graph is drawn first and always reported. A pendant graph too short
    to host λ_k turns the instance Inconclusive; any other error propagates.
    """
    options = options or CheckOptions()
    rng = np.random.default_rng((seed, SUITE_ENTRIES.index(entry), instance))
    graph, run = SUITE_INSTANCES[entry](rng, k_max, options, instance)
    try:
        verdicts = run()
    except NoValidRK as exc:
        logger.warning("%s instance %d: %s", entry, instance, exc)
        verdicts = [Verdict(INCONCLUSIVE, 0.0, 0.0, entry, f"error: {type(exc).__name__}")]
    return graph.to_dict(), verdicts


class Suite:
    """Runs the selected suite entries; instances of an entry run in parallel."""

    n_jobs = 1

    def __init__(self, config: SuiteConfig):
        self.config = config.validate()
        if config.n_jobs is not None:
            self.n_jobs = int(config.n_jobs)

    def run_entry(self, entry):
        c = self.config
        logger.info("suite entry %s: %d instances", entry, c.instances)
        jobs = tqdm(range(c.instances), desc=entry, disable=not c.progress)
        results = Parallel(n_jobs=self.n_jobs)(
            delayed(run_instance)(entry, c.seed, i, c.k_max, c.options) for i in jobs
        )
        report = make_report(entry, results, c.seed)
        counts = report.counts()
        logger.info("%s: %d pass, %d fail, %d inconclusive", entry, counts[PASS], counts[FAIL],
                    counts[INCONCLUSIVE])
        return report

    def run(self):
        return [self.run_entry(entry) for entry in self.config.theorems]


def run_suite(config: SuiteConfig | None = None):
    """Execute every selected suite entry.

    Returns
    -------
    list of CheckReport
        one per entry, in selection order
    """
    return Suite(config or SuiteConfig()).run()


def reports_frame(reports):
    """All verdicts of ``reports`` in one table, one row per verdict."""
    frames = [r.to_frame().assign(entry=r.theorem_id) for r in reports]
    if not frames:
        return pd.DataFrame()
    return pd.concat(frames, ignore_index=True)
