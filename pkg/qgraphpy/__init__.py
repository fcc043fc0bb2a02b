"""Quantum graphs: vertex conditions, spectra, surgery and bound checks."""

from qgraphpy.graph_model import Edge, Endpoint, MetricGraph, VertexCondition, build_graph
from qgraphpy.spectrum import Mesh, Solver, Spectrum, solve_spectrum
from qgraphpy.surgery import SurgeryOp, apply_script
from qgraphpy.checker import CheckReport, SuiteConfig, Verdict, run_suite

__version__ = "0.1.0"
