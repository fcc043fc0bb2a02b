"""Command line entry point: ``qgraphpy <command> [flags]``.

Exit codes: 0 when no verdict failed, 1 on any Fail, 2 on usage, input or
configuration errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import pandas as pd

from qgraphpy import checker, oracle
from qgraphpy.errors import QGraphError
from qgraphpy.graph_model import MetricGraph
from qgraphpy.spectrum import Mesh, Solver
from qgraphpy.surgery import apply_script

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"

_handler = None


class InputError(Exception):
    """Unreadable file or malformed flag value."""


def _configure_logging(verbose=False, quiet=False):
    global _handler
    root = logging.getLogger("qgraphpy")
    if _handler is not None:
        root.removeHandler(_handler)
    _handler = logging.StreamHandler(sys.stderr)
    _handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root.addHandler(_handler)
    root.setLevel(logging.INFO if verbose else logging.ERROR if quiet else logging.WARNING)


def _read(path, flag):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{flag} {path}: {exc.strerror}") from exc


def _load_graph(args):
    if args.graph is None:
        raise InputError("--graph is required")
    return MetricGraph.from_json(_read(args.graph, "--graph"))


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        Path(out).write_text(text)


def _frame_text(frame):
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT)


def _options(args):
    return checker.CheckOptions(n_elements=args.mesh)


def _endpoint(text, flag):
    """``dirichlet``, ``neumann``, ``robin:κ``, ``delta:α`` or ``deltaprime:α′``."""
    name, _, value = text.partition(":")
    try:
        if name == "dirichlet":
            return oracle.EndpointCondition.dirichlet()
        if name == "neumann":
            return oracle.EndpointCondition.neumann()
        if name == "robin":
            return oracle.EndpointCondition.robin(float(value))
        if name == "delta":
            return oracle.EndpointCondition.delta(float(value))
        if name == "deltaprime":
            return oracle.EndpointCondition.delta_prime(float(value))
    except ValueError as exc:
        raise InputError(f"{flag} {text!r}: {exc}") from exc
    raise InputError(f"{flag} {text!r}: unknown endpoint condition")


# ------------------------------------------------------------------------------
# Commands
# ------------------------------------------------------------------------------
def _spectrum_command(args):
    graph = _load_graph(args)
    spec = Solver().solve(graph, args.kmax, Mesh(args.mesh))
    if args.format == "json":
        _emit(spec.to_json(indent=2), args.out)
    else:
        _emit(_frame_text(spec.to_frame()), args.out)
    return 0


def _surgery_command(args):
    graph = _load_graph(args)
    if args.ops is None:
        raise InputError("--ops is required")
    ops = json.loads(_read(args.ops, "--ops"))
    if not isinstance(ops, list):
        raise InputError("--ops must hold a JSON list of operations")
    _emit(apply_script(graph, ops).to_json(indent=2), args.out)
    return 0


def _bounds_command(args):
    table = checker.bounds_frame(_load_graph(args), args.kmax, _options(args))
    if args.format == "json":
        _emit(table.to_json(orient="records", indent=2), args.out)
    else:
        _emit(_frame_text(table), args.out)
    return int((table["verdict"] == checker.FAIL).any())


def _write_reports(reports, args):
    if args.format == "json":
        _emit(json.dumps([r.to_dict() for r in reports], indent=2), args.out)
    else:
        _emit(_frame_text(checker.reports_frame(reports)), args.out)
    return int(any(r.failed for r in reports))


def _check_command(args):
    graph = _load_graph(args)
    reports = checker.check_graph(graph, args.theorem, args.vertex, args.kmax, _options(args))
    return _write_reports(reports, args)


def _suite_command(args):
    if args.config is not None:
        try:
            payload = json.loads(_read(args.config, "--config"))
        except json.JSONDecodeError as exc:
            raise InputError(f"--config {args.config}: {exc}") from exc
        if not isinstance(payload, dict):
            raise InputError(f"--config {args.config}: expected a JSON object")
        config = checker.SuiteConfig.from_dict(payload)
    else:
        config = checker.SuiteConfig(
            theorems=tuple(args.theorem or checker.SUITE_ENTRIES),
            instances=args.instances,
            seed=args.seed,
            n_elements=args.mesh,
            k_max=args.kmax,
            n_jobs=args.n_jobs,
            progress=args.progress,
            sentinel=args.sentinel,
        ).validate()
    return _write_reports(checker.run_suite(config), args)


def _oracle_command(args):
    if args.shape == "interval":
        left, right = _endpoint(args.left, "--left"), _endpoint(args.right, "--right")
        if "Robin" in (left.kind, right.kind):
            values = oracle.interval_secular_spectrum(args.length, left, right, args.kmax)
        else:
            values = oracle.interval_spectrum_closed_form(args.length, left, right, args.kmax)
    elif args.shape == "cycle":
        values = oracle.cycle_spectrum_closed_form(args.length, args.kmax)
    else:
        values = oracle.path_spectrum_closed_form(args.length, args.kind, args.kmax)
    frame = pd.DataFrame({"k": range(1, len(values) + 1), "eigenvalue": values})
    if args.format == "json":
        _emit(frame.to_json(orient="records", indent=2), args.out)
    else:
        _emit(_frame_text(frame), args.out)
    return 0


# ------------------------------------------------------------------------------
# Parser
# ------------------------------------------------------------------------------
def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _add_common(p, default_format="csv"):
    p.add_argument("--graph", metavar="FILE", help="graph JSON file")
    p.add_argument("--mesh", type=_positive_int, default=64, metavar="N",
                   help="elements per edge of the base mesh (default: 64)")
    p.add_argument("--kmax", type=_positive_int, default=12, metavar="K")
    p.add_argument("--seed", type=int, default=1, metavar="S")
    p.add_argument("--out", metavar="FILE", help="output file (default: standard output)")
    p.add_argument("--format", choices=("json", "csv"), default=default_format)
    p.add_argument("--verbose", action="store_true", help="log progress at INFO")
    p.add_argument("--quiet", action="store_true", help="log errors only")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qgraphpy",
        description="Spectra, surgery and numeric bound checks for quantum graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="lowest eigenvalues with error estimates")
    _add_common(p)
    p.set_defaults(func=_spectrum_command)

    p = sub.add_parser("surgery", help="apply a JSON list of surgery operations")
    _add_common(p, "json")
    p.add_argument("--ops", metavar="FILE", help="JSON list of operations")
    p.set_defaults(func=_surgery_command)

    p = sub.add_parser("bounds", help="closed-form bounds against the computed spectrum")
    _add_common(p)
    p.set_defaults(func=_bounds_command)

    p = sub.add_parser("check", help="graph-level checks for one graph")
    _add_common(p, "json")
    p.add_argument("--theorem", action="append", choices=checker.GRAPH_CHECKS)
    p.add_argument("--vertex", help="vertex for the rank-one chains (default: every vertex)")
    p.set_defaults(func=_check_command)

    p = sub.add_parser("suite", help="randomized verification suite")
    _add_common(p, "json")
    p.add_argument("--theorem", action="append", choices=checker.SUITE_ENTRIES)
    p.add_argument("--instances", type=_positive_int, default=100, metavar="N")
    p.add_argument("--n-jobs", type=int, default=None, metavar="N")
    p.add_argument("--config", metavar="FILE", help="suite configuration JSON")
    p.add_argument("--progress", action="store_true", help="show progress bars")
    p.add_argument("--sentinel", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=_suite_command)

    p = sub.add_parser("oracle", help="exact spectra of intervals, cycles and paths")
    _add_common(p)
    p.add_argument("--shape", choices=("interval", "cycle", "path"), default="interval")
    p.add_argument("--length", type=float, default=1.0)
    p.add_argument("--left", default="dirichlet")
    p.add_argument("--right", default="dirichlet")
    p.add_argument("--kind", choices=("standard", "anti_standard"), default="standard")
    p.set_defaults(func=_oracle_command)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    _configure_logging(args.verbose, args.quiet)
    try:
        return args.func(args)
    except (QGraphError, InputError, json.JSONDecodeError) as exc:
        print(f"qgraphpy {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
