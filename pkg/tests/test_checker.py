import json

import numpy as np
import pytest

from qgraphpy import checker, surgery
from qgraphpy.checker import (
    FAIL,
    INCONCLUSIVE,
    PASS,
    CheckOptions,
    GraphParams,
    SuiteConfig,
    compare_counts,
    compare_eq,
    compare_le,
    random_graph,
)
from qgraphpy.errors import CheckError, ConfigInvalid, NotDeltaPrime, UnsatisfiableParams
from qgraphpy.graph_model import MetricGraph, VertexCondition
from qgraphpy.spectrum import Mesh, Solver

DP = VertexCondition.delta_prime


# ------------------------------------------------------------------------------
# Verdict arithmetic
# ------------------------------------------------------------------------------
def test_compare_le():
    assert compare_le(1.0, 0.01, 2.0, 0.01).status == PASS
    assert compare_le(2.0, 0.01, 1.0, 0.01).status == FAIL
    v = compare_le(1.0, 0.1, 1.05, 0.1)
    assert v.status == INCONCLUSIVE
    assert v.margin == pytest.approx(0.05)
    assert v.error_budget == pytest.approx(0.2 + 1e-9 * 2.05)


def test_sentinel_flips_inequalities_only():
    assert compare_le(1.0, 0.0, 2.0, 0.0, sentinel=True).status == FAIL
    assert compare_counts(1, 2, sentinel=True).status == FAIL
    assert compare_eq(1.0, 0.0, 1.0, 0.0).status == PASS


def test_compare_eq_and_counts():
    assert compare_eq(1.0, 1e-3, 1.0005, 0.0).status == PASS
    assert compare_eq(1.0, 1e-6, 1.1, 1e-6).status == FAIL
    assert compare_counts(3, 3).status == PASS
    assert compare_counts(4, 3).status == FAIL


@pytest.mark.parametrize(
    "a1, a2, case, glued_lowers",
    [
        (1.0, 2.0, 1, True),
        (-1.0, -2.0, 2, False),
        (-1.0, 3.0, 3, False),
        (1.0, -3.0, 4, True),
        (2.0, -2.0, 5, False),
        (0.0, -2.0, 6, True),
    ],
)
def test_gluing_case(a1, a2, case, glued_lowers):
    assert checker.gluing_case(a1, a2) == (case, glued_lowers)


@pytest.mark.parametrize(
    "a1, a2, case, lowers",
    [
        (1.0, 2.0, 1, True),
        (0.0, 2.0, 2, True),
        (1.0, -3.0, 3, True),
        (-1.0, -2.0, 4, False),
        (-1.0, 3.0, 5, False),
        (2.0, -2.0, 6, False),
    ],
)
def test_pendant_case(a1, a2, case, lowers):
    assert checker.pendant_case(a1, a2) == (case, lowers)


@pytest.mark.parametrize("alpha, expected", [(2.0, (4.0, -2.0)), (-2.0, (-1.0, -1.0))])
def test_prop_insert_strengths(alpha, expected):
    split = checker.prop_insert_strengths(alpha)
    assert split == expected
    assert sum(split) == pytest.approx(alpha)


# ------------------------------------------------------------------------------
# Statement checks on fixed graphs
# ------------------------------------------------------------------------------
@pytest.mark.parametrize("old, new", [(1.0, 2.0), (-1.0, 1.0), (-2.0, -0.5), (1.5, 1.5)])
def test_strength_interlacing(deltaprime_star, options, failures, old, new):
    verdicts = checker.check_interlacing_strength(deltaprime_star, "c", old, new, 6, options)
    assert verdicts
    assert not failures(verdicts)
    assert {v.theorem_id for v in verdicts} == {"strength"}


def test_strength_needs_deltaprime(deltaprime_star):
    with pytest.raises(NotDeltaPrime):
        checker.check_interlacing_strength(deltaprime_star, "t1", 1.0, 2.0)


def test_roh_gluing(deltaprime_path, options, failures):
    verdicts = checker.check_gluing_cases(deltaprime_path, "v0", "v2", 6, options)
    assert verdicts and not failures(verdicts)
    assert verdicts[0].claim.startswith("case 1")


def test_delta_gluing(options, failures):
    g = MetricGraph.path([1.0, 0.8, 0.6], condition=VertexCondition.delta(1.0),
                         ends=VertexCondition.standard())
    verdicts = checker.check_gluing_cases(g, "v0", "v3", 6, options)
    assert {v.theorem_id for v in verdicts} == {"dinterlac"}
    assert not failures(verdicts)


def test_gluing_rejects_dirichlet():
    g = MetricGraph.interval(1.0)
    with pytest.raises(CheckError):
        checker.check_gluing_cases(g, "v0", "v1")


def test_flower_comparison(deltaprime_path, options, failures):
    verdicts = checker.check_flower(deltaprime_path, 6, options)
    assert {v.theorem_id for v in verdicts} == {"dflower"}
    assert not failures(verdicts)
    mixed = deltaprime_path.replace(vertices={**deltaprime_path.vertices, "v1": DP(-1.0)})
    assert checker.check_flower(mixed, 6, options) == []


def test_graph_scaling_is_exact(deltaprime_path, options):
    verdicts = checker.check_scaling(deltaprime_path, 3.0, "graph", k_max=6, options=options)
    assert [v.status for v in verdicts] == [PASS] * 6


@pytest.mark.parametrize("seed", range(4))
def test_graph_scaling_relative_deviation(seed):
    g = checker.random_graph(GraphParams(family="delta_prime"), seed)
    solver, mesh = Solver(), Mesh(24)
    base = solver.solve(g, 12, mesh).eigenvalues
    for t in (0.5, 2.0, 3.0):
        scaled = solver.solve(surgery.scale_graph(g, t), 12, mesh).eigenvalues
        deviation = np.abs(scaled * t ** 2 - base) / np.maximum(np.abs(base), 1.0)
        assert deviation.max() <= 1e-10
        verdicts = checker.check_scaling(g, t, "graph", k_max=12, options=CheckOptions(n_elements=24))
        assert {v.status for v in verdicts} == {PASS}


def test_edge_scaling(triangle, options, failures):
    verdicts = checker.check_scaling(triangle, 1.5, "edge", "e2", 6, options)
    assert {v.theorem_id for v in verdicts} == {"length1"}
    assert not failures(verdicts)
    with pytest.raises(CheckError):
        checker.check_scaling(triangle, 1.5, "bogus")


def test_lengthening(triangle, options, failures):
    verdicts = checker.check_lengthening(triangle, "e1", 1.5, 6, options)
    assert len(verdicts) == 6 and not failures(verdicts)
    with pytest.raises(CheckError):
        checker.check_lengthening(triangle, "e1", 0.5)


def test_pendant_attachment(deltaprime_path, options, failures):
    pendant = MetricGraph.interval(0.5, DP(1.0), DP(-2.0))
    verdicts = checker.check_pendant_cases(deltaprime_path, "v1", pendant, "v0", 8, options)
    assert verdicts and not failures(verdicts)
    assert {v.theorem_id for v in verdicts} == {"pendant"}


def test_pendant_needs_deltaprime(triangle, deltaprime_path):
    with pytest.raises(NotDeltaPrime):
        checker.check_pendant_cases(triangle, "v0", deltaprime_path, "v0")


def test_point_insertion_changes_nothing(triangle, options):
    assignment = {ep: "w" for ep in triangle.endpoints("v0")}
    verdicts = checker.check_insertion(triangle, "v0", MetricGraph.point("w"), assignment, 6,
                                       options=options)
    assert [v.status for v in verdicts] == [PASS] * 6


def test_delta_insertion(triangle, options, failures):
    inserted = MetricGraph.interval(0.5, VertexCondition.delta(1.0), VertexCondition.standard())
    assignment = {ep: "v0" for ep in triangle.endpoints("v0")}
    verdicts = checker.check_insertion(triangle, "v0", inserted, assignment, 8, options=options)
    assert not failures(verdicts)
    assert {v.theorem_id for v in verdicts} <= {"insertion"}


def test_prop_insertion(deltaprime_star, options, failures):
    inserted = MetricGraph.path([0.6], condition=VertexCondition.anti_standard())
    assignment = {("e1", "from"): "v0", ("e2", "from"): "v1", ("e3", "from"): "v0"}
    verdicts = checker.check_insertion(deltaprime_star, "c", inserted, assignment, 8,
                                       options=options)
    assert not failures(verdicts)
    assert {v.theorem_id for v in verdicts} <= {"insert"}


def test_rank_one_chains(deltaprime_star, options, failures):
    for v in ("c", "t1"):
        verdicts = checker.check_rank_one_chains(deltaprime_star, v, 5, options)
        assert verdicts and not failures(verdicts)
    claims = {v.claim for v in checker.check_rank_one_chains(deltaprime_star, "t1", 5, options)}
    assert "lambda_k(neumann) <= lambda_k(dirichlet)" in claims


def test_counting_sandwich_catches_anti_flower(anti_flower, options):
    # λ = 0 is double on the flower: N_anti(1) = 2 > N_dirichlet(1) + |V| = 1
    verdicts = checker.check_counting_sandwich(anti_flower, grid=[1.0, 5.0], options=options)
    by_claim = {}
    for v in verdicts:
        by_claim.setdefault(v.claim, []).append(v.status)
    assert by_claim["N_anti <= N_dirichlet + |V|"] == [FAIL, FAIL]
    assert by_claim["N_dirichlet <= N_anti(lambda)"] == [PASS, PASS]
    assert by_claim["weyl term <= N_dirichlet(lambda)"] == [PASS, PASS]


def test_counting_sandwich_skips_eigenvalues(anti_flower, options):
    verdicts = checker.check_counting_sandwich(anti_flower, grid=[np.pi ** 2], options=options)
    assert verdicts == []


def test_bounds_on_triangle(triangle, options, failures):
    verdicts = checker.check_bounds(triangle, 6, options)
    ids = {v.theorem_id for v in verdicts}
    assert {"ariturk1", "standard2"} <= ids
    assert not failures([v for v in verdicts if v.theorem_id in ("ariturk1", "standard2")])


def test_anti2_lower_fails_on_flower(anti_flower, options):
    verdicts = checker.check_bounds(anti_flower, 3, options)
    first = [v for v in verdicts if v.claim == "anti2 lower bound" and v.k == 1]
    assert [v.status for v in first] == [FAIL]


@pytest.mark.parametrize("condition", [VertexCondition.standard(), VertexCondition.anti_standard()])
@pytest.mark.parametrize("lengths", [[1.0, 0.7, 1.3, 0.9], [0.6, 1.8], [1.0, 1.0, 1.0]])
def test_path_bounds_never_fail(lengths, condition, failures):
    g = MetricGraph.path(lengths, condition=condition)
    verdicts = checker.check_bounds(g, 8, CheckOptions(n_elements=32))
    assert verdicts
    assert not failures(verdicts)


def test_near_fails_are_retried():
    assert checker._unsettled(compare_le(1.0 + 1.5e-3, 1e-3, 1.0, 0.0))
    assert checker._unsettled(compare_le(1.0, 1e-3, 1.0, 0.0))
    assert not checker._unsettled(compare_le(1.1, 1e-3, 1.0, 0.0))
    assert not checker._unsettled(compare_le(1.0, 1e-3, 1.1, 0.0))


def test_bounds_sentinel(triangle):
    verdicts = checker.check_bounds(triangle, 4, CheckOptions(n_elements=16, sentinel=True))
    assert any(v.status == FAIL and v.theorem_id == "ariturk1" for v in verdicts)


def test_bounds_frame(triangle):
    table = checker.bounds_frame(triangle, 4, CheckOptions(n_elements=16))
    assert list(table.columns) == ["bound_id", "k", "side", "value", "spectrum_value", "margin", "verdict"]
    assert (table.loc[table.bound_id == "ariturk1", "verdict"] == PASS).all()


def test_bipartite_relations(triangle, deltaprime_star, options, failures):
    verdicts = checker.check_bipartite_relations(triangle, 6, options)
    assert {v.theorem_id for v in verdicts} == {"bipartite_relation"}
    assert not failures(verdicts)
    star = deltaprime_star.with_conditions(VertexCondition.standard())
    verdicts = checker.check_bipartite_relations(star, 6, options)
    assert {v.theorem_id for v in verdicts} == {"tree_relation"}
    assert not failures(verdicts)


def test_bipartite_cover(triangle):
    cover = checker.bipartite_cover(triangle)
    assert cover.is_bipartite() and cover.n_edges == 6


def test_pendant_diameter(deltaprime_star):
    (v,) = checker.check_pendant_diameter(deltaprime_star)
    assert v.status == PASS and v.margin == pytest.approx(0.3)


def test_check_graph(triangle, options):
    reports = checker.check_graph(triangle, ["scaling", "pendant_diameter"], k_max=4, options=options)
    assert [r.theorem_id for r in reports] == ["scaling"]
    assert reports[0].counts()[PASS] == 4
    with pytest.raises(ConfigInvalid):
        checker.check_graph(triangle, ["nope"])


# ------------------------------------------------------------------------------
# Random instances and the suite
# ------------------------------------------------------------------------------
def test_random_graph_is_deterministic():
    params = GraphParams(family="delta", strengths=(0.0, 3.0))
    assert random_graph(params, 7) == random_graph(params, 7)


def test_random_delta_prime_strengths():
    g = random_graph(GraphParams(sign="negative"), 3)
    assert all(c.kind == "DeltaPrime" and -5.0 <= c.strength <= -0.2 for c in g.vertices.values())


def test_random_dirichlet_standard_has_dirichlet():
    g = random_graph(GraphParams(family="dirichlet_standard"), 11)
    kinds = {c.kind for c in g.vertices.values()}
    assert "Dirichlet" in kinds and kinds <= {"Dirichlet", "Standard"}


@pytest.mark.parametrize("seed", range(20))
def test_random_graph_without_loops(seed):
    g = random_graph(GraphParams(family="delta_prime", n_edges=(1, 6), loops=False), seed)
    assert g.n_vertices >= 2
    assert not any(e.is_loop for e in g.edges)


@pytest.mark.parametrize(
    "params",
    [
        GraphParams(n_edges=(3, 2)),
        GraphParams(lengths=(0.0, 1.0)),
        GraphParams(strengths=(0.0, 1.0), family="delta_prime"),
        GraphParams(sign="sideways"),
        GraphParams(family="robin"),
        GraphParams(n_edges=(1, 3), min_vertices=4),
    ],
)
def test_unsatisfiable_params(params):
    with pytest.raises(UnsatisfiableParams):
        random_graph(params, 0)


def test_suite_config_validation(tmp_path):
    with pytest.raises(ConfigInvalid):
        SuiteConfig.from_dict({"instances": 3, "colour": "red"})
    with pytest.raises(ConfigInvalid):
        SuiteConfig(theorems=("nope",)).validate()
    with pytest.raises(ConfigInvalid):
        SuiteConfig(k_max=1).validate()
    path = tmp_path / "suite.json"
    path.write_text(json.dumps({"theorems": ["pendant_diameter"], "instances": 2}))
    config = SuiteConfig.load(path)
    assert config.theorems == ("pendant_diameter",) and config.instances == 2


def _small_suite(**kwargs):
    return SuiteConfig(
        theorems=("pendant_diameter", "scaling"),
        instances=3,
        seed=5,
        n_elements=8,
        k_max=4,
        n_jobs=1,
        **kwargs,
    )


def test_suite_is_deterministic():
    first = [r.to_dict() for r in checker.run_suite(_small_suite())]
    second = [r.to_dict() for r in checker.run_suite(_small_suite())]
    assert json.dumps(first) == json.dumps(second)
    assert [r["theorem_id"] for r in first] == ["pendant_diameter", "scaling"]
    assert all(r["instances"] == 3 for r in first)


def test_suite_reports(failures):
    reports = checker.run_suite(_small_suite())
    for report in reports:
        assert not failures(report.verdicts)
        assert report.worst_case is None or report.worst_case["graph"] is not None
    frame = checker.reports_frame(reports)
    assert set(frame["entry"]) == {"pendant_diameter", "scaling"}
    assert set(frame["instance"]) == {0, 1, 2}


def test_suite_sentinel_fails():
    config = _small_suite(sentinel=True)
    config.theorems = ("bounds",)
    (report,) = checker.run_suite(config)
    assert report.failed
    assert report.worst_case["margin"] < 0


def test_interlacing_entries_are_mostly_decided():
    config = SuiteConfig(
        theorems=("strength", "pendant", "rank_one_chains", "gluing", "insertion"),
        instances=10,
        seed=3,
        n_elements=32,
        k_max=6,
        n_jobs=1,
    )
    counts = [report.counts() for report in checker.run_suite(config)]
    total = sum(sum(c.values()) for c in counts)
    assert total > 0
    assert sum(c[INCONCLUSIVE] for c in counts) / total < 0.05


@pytest.mark.parametrize("entry", ["strength", "pendant", "bounds"])
def test_run_instance_keeps_graph(entry):
    graph, verdicts = checker.run_instance(entry, 2, 0, k_max=4, options=CheckOptions(n_elements=16))
    assert MetricGraph.from_dict(graph).n_edges >= 1
    assert verdicts
