"""Lower bounds relating the integral and supremal transport costs.

The bounds compose three tested primitives: the generalized inverse of the
cost profile, the budget-halving transform psi(t) = h(2 h^{-1}(t)), and the
concentration function.  The N-marginal bound multiplies psi by the diagonal
mass floor (N kappa - 1) / (N (N - 1)); for two marginals the floor improves
to 2 kappa - 1.  Non-positive bound values are vacuous rather than errors so
batch sweeps stay total.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .concentration import kappa, pointwise_concentration
from .cost import HFunction
from .errors import AssumptionViolated, ValidationError
from .measures import DiscreteMeasure, Measure
from .solvers import Coupling, SolveReport, solve_integral, solve_supremal

HOLDS_TOL = 1e-9


@dataclass(frozen=True)
class BoundReport:
    """One lower bound paired with the computed cost pair and its verdict."""

    c_integral: float
    c_sup: float
    bound_value: float
    bound_name: str
    holds: bool
    slack: float

    @staticmethod
    def build(c_integral: float, c_sup: float, value: float, name: str,
              tol: float = HOLDS_TOL) -> "BoundReport":
        holds = c_integral >= value - tol
        if math.isinf(c_integral) and math.isinf(value):
            slack = 0.0
        else:
            slack = c_integral - value
        return BoundReport(c_integral, c_sup, value, name, holds, slack)


def m_frak(rho: Measure, t: float, n: int, closed: bool = True) -> float:
    """(N kappa_rho(t) - 1) / (N (N - 1)); may be non-positive.

    ``closed`` selects the ball convention for discrete measures.  The closed
    default matches the definition of kappa; the open variant is the one the
    floor theorems prove, and the two differ only at the finitely many radii
    where kappa jumps.
    """
    if t < 0:
        raise ValidationError("t must be nonnegative")
    if n < 2:
        raise ValidationError("need at least two marginals")
    return (n * kappa(rho, t, closed) - 1.0) / (n * (n - 1))


def _check_assumption(rho: Measure, h: HFunction, n: int) -> None:
    """Unbounded cost at 0 requires pointwise concentration at most 1/N.

    The borderline kappa(rho) == 1/N is admitted: for the measures handled
    here the supremal cost stays finite there, so every quantity below is
    still well defined.
    """
    if h.h0 == math.inf and isinstance(rho, DiscreteMeasure):
        if pointwise_concentration(rho) > 1.0 / n:
            raise AssumptionViolated(
                f"pointwise concentration {pointwise_concentration(rho):g} exceeds 1/{n} "
                "while the cost is unbounded at zero distance"
            )


def _scaled_bound(rho: Measure, h: HFunction, c_sup: float, divisor: int,
                  floor: float) -> float:
    """psi(c_sup / divisor) * floor with extended-real care (0 * inf -> 0)."""
    if floor == 0.0:
        return 0.0
    psi = h.psi(c_sup / divisor)
    if math.isinf(psi) and floor < 0:
        return -math.inf
    return psi * floor


def main_bound_n(rho: Measure, h: HFunction, n: int, c_sup: float,
                 closed: bool = True) -> float:
    """N-marginal lower bound psi(C_inf / N(N-1)) * m_frak at the matching radius."""
    if not c_sup > 0:
        raise ValidationError("supremal cost must be positive")
    _check_assumption(rho, h, n)
    divisor = n * (n - 1)
    radius = h.inv(c_sup / divisor)
    return _scaled_bound(rho, h, c_sup, divisor, m_frak(rho, radius, n, closed))


def main_bound_2(rho: Measure, h: HFunction, c_sup: float,
                 closed: bool = True) -> float:
    """Two-marginal bound with the improved floor 2 kappa - 1."""
    if not c_sup > 0:
        raise ValidationError("supremal cost must be positive")
    _check_assumption(rho, h, 2)
    radius = h.inv(c_sup / 2.0)
    floor = 2.0 * kappa(rho, radius, closed) - 1.0
    return _scaled_bound(rho, h, c_sup, 2, floor)


def positivity_check(rho: Measure, h: HFunction, n: int, c_sup: float) -> bool:
    """kappa at the bound radius must exceed 1/N whenever c_sup is the true
    supremal cost; a False return signals an implementation bug upstream."""
    radius = h.inv(c_sup / (n * (n - 1))) if c_sup != math.inf else 0.0
    return kappa(rho, radius) > 1.0 / n


def frechet_check(rho: DiscreteMeasure, coupling, atom_subset) -> tuple:
    """Frechet sandwich for a two-marginal self-coupling and an atom subset:
    (max{0, 2 rho(A) - 1}, lambda(A x A), rho(A)).

    Accepts a Coupling or a raw M x M matrix; with a Fraction matrix and
    exact measure weights the triple is exact.
    """
    idx = sorted(set(int(i) for i in atom_subset))
    if any(i < 0 or i >= rho.size for i in idx):
        raise ValidationError("atom subset index out of range")
    if isinstance(coupling, Coupling) and coupling.n_marginals != 2:
        raise ValidationError("the sandwich is a two-marginal statement")
    mat = coupling.weights if isinstance(coupling, Coupling) else coupling
    exact = mat.dtype == object
    if exact:
        wts = rho.exact_weights()
        mass_a = sum((wts[i] for i in idx), Fraction(0))
        observed = sum((mat[i, j] for i in idx for j in idx), Fraction(0))
        lower = max(Fraction(0), 2 * mass_a - 1)
    else:
        mass_a = float(rho.weights[idx].sum()) if idx else 0.0
        observed = float(mat[np.ix_(idx, idx)].sum()) if idx else 0.0
        lower = max(0.0, 2.0 * mass_a - 1.0)
    return lower, observed, mass_a


def verify_main(rho: DiscreteMeasure, h: HFunction, n: int,
                rational: bool = False, tol: float = HOLDS_TOL) -> list[BoundReport]:
    """Solve both costs and evaluate every applicable lower bound."""
    integ: SolveReport = solve_integral(rho, h, n)
    sup: SolveReport = solve_supremal(rho, h, n, rational=rational)
    if integ.status == "error" or sup.status == "error":
        raise ValidationError("solver failure during verification")
    reports = [BoundReport.build(integ.value, sup.value,
                                 main_bound_n(rho, h, n, sup.value), "main-N", tol)]
    if n == 2:
        reports.append(BoundReport.build(integ.value, sup.value,
                                         main_bound_2(rho, h, sup.value), "main-2", tol))
    return reports
