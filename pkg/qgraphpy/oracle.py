"""Exact spectra of intervals, paths and cycles.

Closed forms where they exist; otherwise roots of the 2x2 secular determinant
of an interval with Dirichlet, Neumann or Robin ends. A Robin end with
coefficient κ means ∂φ(v) = κ φ(v) for the outward-into-the-edge derivative
∂φ, so a δ(α) pendant vertex is Robin(α) and a δ′(α′) pendant vertex,
φ(v) = α′ ∂φ(v), is Robin(1/α′).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from qgraphpy.errors import BracketingFailure, OracleError, RobinNotClosedForm
from qgraphpy.graph_model import VertexCondition

logger = logging.getLogger(__name__)

ROBIN_CONVENTION = "dphi(v) = kappa * phi(v); delta: kappa = alpha; delta': kappa = 1/alpha'"


@dataclass(frozen=True)
class EndpointCondition:
    """Boundary condition at one end of an interval.

    ``metadata`` records where a Robin coefficient came from.
    """

    kind: str
    robin_coefficient: float = 0.0
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in ("Dirichlet", "Neumann", "Robin"):
            raise OracleError(f"unknown endpoint condition {self.kind!r}")
        if not math.isfinite(self.robin_coefficient):
            raise OracleError("Robin coefficient must be finite")

    @classmethod
    def dirichlet(cls):
        return cls("Dirichlet")

    @classmethod
    def neumann(cls):
        return cls("Neumann")

    @classmethod
    def robin(cls, kappa):
        return cls("Robin", float(kappa), {"convention": ROBIN_CONVENTION})

    @classmethod
    def delta(cls, alpha):
        if alpha == 0:
            return cls.neumann()
        return cls("Robin", float(alpha), {"source": "delta", "convention": ROBIN_CONVENTION})

    @classmethod
    def delta_prime(cls, alpha_prime):
        if alpha_prime == 0:
            raise OracleError("delta' strength must be nonzero")
        return cls(
            "Robin",
            1.0 / alpha_prime,
            {"source": "delta_prime", "convention": ROBIN_CONVENTION},
        )

    @classmethod
    def from_vertex_condition(cls, cond: VertexCondition):
        """Degree-one reduction of a graph vertex condition."""
        if cond.kind in ("Dirichlet", "AntiStandard"):
            return cls.dirichlet()
        if cond.kind in ("Neumann", "Standard"):
            return cls.neumann()
        if cond.kind == "Delta":
            return cls.delta(cond.strength)
        return cls.delta_prime(cond.strength)

    @property
    def coefficients(self):
        """(p, q) with the condition written p φ(v) + q ∂φ(v) = 0."""
        if self.kind == "Dirichlet":
            return 1.0, 0.0
        if self.kind == "Neumann":
            return 0.0, 1.0
        return self.robin_coefficient, -1.0


# ------------------------------------------------------------------------------
# Closed forms
# ------------------------------------------------------------------------------
def interval_spectrum_closed_form(length, left, right, k_max):
    """Dirichlet/Neumann interval eigenvalues, ascending."""
    kinds = {left.kind, right.kind}
    if "Robin" in kinds:
        raise RobinNotClosedForm("Robin ends need interval_secular_spectrum")
    j = np.arange(k_max, dtype=float)
    if kinds == {"Dirichlet"}:
        roots = j + 1
    elif kinds == {"Neumann"}:
        roots = j
    else:
        roots = j + 0.5
    return (roots * np.pi / length) ** 2


def cycle_spectrum_closed_form(total_length, k_max):
    """All-Standard cycle: 0, then (2kπ/L)² twice each."""
    values = [0.0]
    k = 1
    while len(values) < k_max:
        values += [(2 * k * np.pi / total_length) ** 2] * 2
        k += 1
    return np.array(values[:k_max])


def path_spectrum_closed_form(total_length, kind, k_max):
    """Path graph with Standard or AntiStandard vertices, all of them alike."""
    if kind == "standard":
        start = 0
    elif kind == "anti_standard":
        start = 1
    else:
        raise OracleError(f"unknown path kind {kind!r}")
    return (np.arange(start, start + k_max, dtype=float) * np.pi / total_length) ** 2


def dirichlet_counting(lengths, lam):
    """Σ floor(√λ ℓ_j / π) for decoupled Dirichlet edges (0 for λ ≤ 0)."""
    if lam <= 0:
        return 0
    root = math.sqrt(lam)
    return int(sum(math.floor(root * l / math.pi) for l in lengths))


# ------------------------------------------------------------------------------
# Secular equation
# ------------------------------------------------------------------------------
def _det_trig(k, length, left, right):
    p0, q0 = left.coefficients
    p1, q1 = right.coefficients
    s, c = math.sin(k * length), math.cos(k * length)
    return p0 * p1 * s - (p0 * q1 + q0 * p1) * k * c - q0 * q1 * k * k * s


def _det_hyp(mu, length, left, right):
    # divided by cosh(mu * length)
    p0, q0 = left.coefficients
    p1, q1 = right.coefficients
    t = math.tanh(mu * length)
    return p0 * p1 * t - (p0 * q1 + q0 * p1) * mu + q0 * q1 * mu * mu * t


def _det_zero(length, left, right):
    p0, q0 = left.coefficients
    p1, q1 = right.coefficients
    return p0 * (p1 * length - q1) - q0 * p1


def _bracket_roots(func, grid):
    values = np.array([func(x) for x in grid])
    roots = []
    for i in range(len(grid) - 1):
        a, b = grid[i], grid[i + 1]
        fa, fb = values[i], values[i + 1]
        if fa == 0.0:
            roots.append(a)
        elif fa * fb < 0:
            roots.append(brentq(func, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps))
    return roots, values


def interval_secular_spectrum(length, left, right, k_max):
    """Lowest ``k_max`` eigenvalues of -d²/dx² on [0, length].

    Negative eigenvalues come from the hyperbolic branch in √(-λ), zero from
    the linear-function determinant, positive ones from the trigonometric
    branch in √λ. Every root is bracketed by a sign change before refining.
    """
    if length <= 0:
        raise OracleError("length must be positive")
    kappas = [c.robin_coefficient for c in (left, right) if c.kind == "Robin"]

    # negative branch
    mu_max = sum(abs(k) for k in kappas) + 10.0
    mu_grid = np.geomspace(1e-6, mu_max, 4000)
    neg_roots, _ = _bracket_roots(lambda m: _det_hyp(m, length, left, right), mu_grid)
    n_negative_max = sum(1 for k in kappas if k < 0)
    if len(neg_roots) > n_negative_max:
        raise BracketingFailure(
            f"{len(neg_roots)} negative roots but at most {n_negative_max} possible",
            grid=mu_grid,
        )
    values = sorted(-(m ** 2) for m in neg_roots)

    if abs(_det_zero(length, left, right)) < 1e-12 * (1 + length):
        values.append(0.0)

    # positive branch, extended until enough roots are found
    step = np.pi / (8 * length)
    k_hi = (k_max + 4) * np.pi / length
    positive = []
    for _ in range(20):
        grid = np.arange(step / 4096, k_hi + step, step)
        grid[1:] = np.arange(1, len(grid)) * step
        positive, _ = _bracket_roots(lambda k: _det_trig(k, length, left, right), grid)
        positive = [k for k in positive if k > 0]
        top = grid[-1]
        dirichlet_count = math.floor((top - step) * length / np.pi)
        if len(values) + len(positive) < dirichlet_count:
            raise BracketingFailure(
                f"found {len(positive)} roots below k={top:.6g}, "
                f"expected at least {dirichlet_count}",
                grid=grid,
            )
        if len(values) + len(positive) >= k_max:
            break
        k_hi *= 2
    else:
        raise BracketingFailure("could not collect enough roots", grid=grid)

    values += [k * k for k in positive]
    return np.array(sorted(values)[:k_max])
