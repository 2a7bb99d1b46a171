"""Class-specific constants and the radial-measure machinery.

For a radially symmetric density the one-dimensional CDF
F(r) = integral_0^r d omega_d rho(s) s^(d-1) ds drives everything: kappa of a
unimodal measure equals F, the optimal self-map reflects radii through
tau(r) = F^{-1}(1 - F(r)), and the supremal cost of a unimodal measure equals
1/(2 r_half) where F(r_half) = 1/2.

CDF values come from adaptive Simpson quadrature with a cached prefix over
fixed knots; unbounded tails are integrated exactly under the substitution
u = 1/s, which is smooth for every admissible profile.  Grid profiles are
integrated segment-by-segment with Gauss-Legendre rules that are exact for
the interpolated density.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass

import numpy as np

from .concentration import kappa, r_rho
from .errors import (
    NotLogConcave,
    NotUnimodal,
    OriginInput,
    OutOfRange,
    QuadratureNotConverged,
    ValidationError,
    WeightTooLarge,
)
from .measures import DiscreteMeasure, GridExpProfile, Measure, RadialMeasure

QUAD_TOL = 1e-14
MAX_DEPTH = 52
NORMALIZATION_TOL = 1e-9
BISECT_TOL = 1e-13
RADIUS_CAP = 1e15


def unit_ball_volume(dim: int) -> float:
    """Volume of the unit ball in R^dim via the Gamma function."""
    if dim < 1:
        raise ValidationError("dimension must be >= 1")
    return math.pi ** (dim / 2.0) / math.gamma(dim / 2.0 + 1.0)


# ---------------------------------------------------------------------------
# lower incomplete gamma
# ---------------------------------------------------------------------------

def lower_incomplete_gamma(a: float, x: float) -> float:
    """gamma(a, x) = integral_0^x t^(a-1) e^(-t) dt.

    Series expansion for x < a + 1, continued fraction for the complement
    otherwise; both iterated to relative machine accuracy.
    """
    if not a > 0:
        raise ValidationError("shape parameter must be positive")
    if x < 0:
        raise ValidationError("argument must be nonnegative")
    if x == 0.0:
        return 0.0
    lg = math.lgamma(a)
    if x < a + 1.0:
        ap = a
        term = 1.0 / a
        total = term
        for _ in range(500):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * 1e-16:
                break
        else:
            raise QuadratureNotConverged("incomplete-gamma series did not converge")
        return total * math.exp(-x + a * math.log(x))
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    frac = d
    for i in range(1, 500):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        frac *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    else:
        raise QuadratureNotConverged("incomplete-gamma continued fraction did not converge")
    upper_regularized = math.exp(-x + a * math.log(x) - lg) * frac
    return (1.0 - upper_regularized) * math.exp(lg)


# ---------------------------------------------------------------------------
# adaptive Simpson
# ---------------------------------------------------------------------------

def _adaptive_simpson(f, a: float, b: float, tol: float) -> float:
    fa, fm, fb = f(a), f((a + b) / 2.0), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, fa, b, fb, fm, whole, tol, depth):
        m = (a + b) / 2.0
        lm, rm = (a + m) / 2.0, (m + b) / 2.0
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        if depth > MAX_DEPTH:
            raise QuadratureNotConverged(f"adaptive Simpson exceeded depth {MAX_DEPTH}")
        if abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return (recurse(a, fa, m, fm, flm, left, tol / 2.0, depth + 1)
                + recurse(m, fm, b, fb, frm, right, tol / 2.0, depth + 1))

    if a == b:
        return 0.0
    return recurse(a, fa, b, fb, fm, whole, tol, 0)


class _PrefixIntegral:
    """Cumulative integral of a smooth scalar function over fixed knots."""

    def __init__(self, f, knots: np.ndarray, tol: float):
        self.f = f
        self.knots = knots
        self.tol = tol
        segs = [_adaptive_simpson(f, knots[k], knots[k + 1], tol)
                for k in range(len(knots) - 1)]
        self.prefix = np.concatenate([[0.0], np.cumsum(segs)])

    @property
    def total(self) -> float:
        return float(self.prefix[-1])

    def upto(self, x: float) -> float:
        if x <= self.knots[0]:
            return 0.0
        if x >= self.knots[-1]:
            return self.total
        k = int(np.searchsorted(self.knots, x, side="right") - 1)
        return float(self.prefix[k]) + _adaptive_simpson(self.f, float(self.knots[k]), x, self.tol)


_CDF_CACHE: "weakref.WeakKeyDictionary[RadialMeasure, RadialCDF]" = weakref.WeakKeyDictionary()


@dataclass(frozen=True, eq=False)
class RadialCDF:
    """Normalized radial CDF of a radial measure, with cached quadrature."""

    measure: RadialMeasure
    bulk: _PrefixIntegral
    tail: _PrefixIntegral | None     # over u = 1/s for s beyond the bulk
    normalization: float
    omega_d: float

    @staticmethod
    def for_measure(rho: RadialMeasure) -> "RadialCDF":
        cached = _CDF_CACHE.get(rho)
        if cached is None:
            cached = RadialCDF._build(rho)
            _CDF_CACHE[rho] = cached
        return cached

    @staticmethod
    def _build(rho: RadialMeasure) -> "RadialCDF":
        dim = rho.dim
        omega = unit_ball_volume(dim)
        scale = dim * omega

        def integrand(s: float) -> float:
            return scale * float(rho.density(s)) * s ** (dim - 1)

        s0 = rho.profile.bulk_radius(dim)
        if isinstance(rho.profile, GridExpProfile):
            bulk = _GridPrefix(rho.profile, dim, scale)
            tail = None
        else:
            knots = np.linspace(0.0, s0, 257)
            bulk = _PrefixIntegral(integrand, knots, QUAD_TOL)
            if float(rho.density(s0)) == 0.0:
                tail = None
            else:
                def tail_integrand(u: float) -> float:
                    # u = 1/s; the u -> 0 limit is finite for every admissible
                    # profile, so evaluate just inside rather than at 0
                    u = max(u, 1e-30)
                    s = 1.0 / u
                    val = scale * float(rho.density(s)) * s ** (dim - 1) / (u * u)
                    return val if math.isfinite(val) else 0.0

                tail = _PrefixIntegral(tail_integrand, np.linspace(0.0, 1.0 / s0, 65), QUAD_TOL)
        z = bulk.total + (tail.total if tail else 0.0)
        if not isinstance(rho.profile, GridExpProfile) and abs(z - 1.0) > NORMALIZATION_TOL:
            raise ValidationError(f"profile mass {z!r} deviates from 1 beyond {NORMALIZATION_TOL}")
        if z <= 0:
            raise ValidationError("profile carries no mass")
        return RadialCDF(rho, bulk, tail, z, omega)

    @property
    def support_end(self) -> float:
        return math.inf if self.tail is not None else float(self.bulk.knots[-1])

    def cdf(self, r: float) -> float:
        if r < 0:
            raise ValidationError("radius must be nonnegative")
        if r == 0:
            return 0.0
        s0 = float(self.bulk.knots[-1])
        raw = self.bulk.upto(min(r, s0))
        if self.tail is not None and r > s0:
            raw += self.tail.total - self.tail.upto(1.0 / r)
        return min(raw / self.normalization, 1.0)

    def survival(self, r: float) -> float:
        return 1.0 - self.cdf(r)

    def inverse(self, u: float) -> float:
        """Generalized inverse sup{r : F(r) <= u} via predicate bisection."""
        if not 0 <= u < 1:
            raise OutOfRange(f"cannot invert the CDF at {u!r}")
        hi = float(self.bulk.knots[-1])
        if self.cdf(hi) <= u:
            if self.tail is None:
                return hi
            while self.cdf(hi) <= u:
                hi *= 2.0
                if hi > RADIUS_CAP:
                    raise OutOfRange(f"inverse CDF bracket exceeded {RADIUS_CAP:g}")
        lo = 0.0
        while hi - lo > BISECT_TOL * max(1.0, lo):
            mid = (lo + hi) / 2.0
            if self.cdf(mid) <= u:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2.0

    def r_level(self, level: float) -> float:
        return self.inverse(level)

    def quadrature_knots(self) -> np.ndarray:
        return np.asarray(self.bulk.knots)


class _GridPrefix:
    """Exact cumulative integral for a piecewise-linear grid density."""

    def __init__(self, profile: GridExpProfile, dim: int, scale: float):
        nodes_n = max(5, (dim + 3) // 2 + 1)
        gl_x, gl_w = np.polynomial.legendre.leggauss(nodes_n)
        self.profile, self.dim, self.scale = profile, dim, scale
        self.gl_x, self.gl_w = gl_x, gl_w
        self.knots = np.asarray(profile.grid_r, dtype=float)
        segs = [self._segment(self.knots[k], self.knots[k + 1])
                for k in range(len(self.knots) - 1)]
        self.prefix = np.concatenate([[0.0], np.cumsum(segs)])

    def _segment(self, a: float, b: float) -> float:
        s = (a + b) / 2.0 + (b - a) / 2.0 * self.gl_x
        vals = self.scale * self.profile.density(s, self.dim) * s ** (self.dim - 1)
        return float((b - a) / 2.0 * np.dot(self.gl_w, vals))

    @property
    def total(self) -> float:
        return float(self.prefix[-1])

    def upto(self, x: float) -> float:
        if x <= self.knots[0]:
            return 0.0
        if x >= self.knots[-1]:
            return self.total
        k = int(np.searchsorted(self.knots, x, side="right") - 1)
        return float(self.prefix[k]) + self._segment(float(self.knots[k]), x)


# ---------------------------------------------------------------------------
# radial operations
# ---------------------------------------------------------------------------

def radial_cdf(rho: RadialMeasure, r: float) -> float:
    """F(r), the mass of the ball of radius r around the origin."""
    return RadialCDF.for_measure(rho).cdf(r)


def tau(rho: RadialMeasure, r: float) -> float:
    """The radial reflection profile F^{-1}(1 - F(r))."""
    if not rho.unimodal:
        raise NotUnimodal("the reflection map is derived for unimodal profiles")
    if r < 0:
        raise ValidationError("radius must be nonnegative")
    f = RadialCDF.for_measure(rho)
    return f.inverse(1.0 - f.cdf(r))


def radial_map(rho: RadialMeasure, x) -> np.ndarray:
    """The optimal self-map -x/|x| tau(|x|)."""
    vec = np.asarray(x, dtype=float).ravel()
    if vec.shape[0] != rho.dim:
        raise ValidationError(f"point has dim {vec.shape[0]}, measure has dim {rho.dim}")
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        raise OriginInput("the reflection map is undefined at the origin")
    return -(vec / norm) * tau(rho, norm)


def c_infty_radial(rho: RadialMeasure) -> float:
    """Supremal Coulomb cost of a unimodal radial measure: 1 / (2 r_half)."""
    if not rho.unimodal:
        raise NotUnimodal("the supremal-cost characterization needs unimodality")
    return 1.0 / (2.0 * RadialCDF.for_measure(rho).r_level(0.5))


# ---------------------------------------------------------------------------
# class constants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassConstantReport:
    class_name: str
    constant: float
    applicable: bool
    witness: dict

    def to_json_obj(self) -> dict:
        return {"class": self.class_name, "constant": self.constant,
                "applicable": self.applicable, "witness": self.witness}


def unimodal_constant(rho: RadialMeasure) -> ClassConstantReport:
    """kappa(2 r_half) - 1/2: the measure-specific ratio between the integral
    and supremal Coulomb costs of a unimodal radial measure."""
    if not rho.unimodal:
        raise NotUnimodal("constant defined for unimodal radial measures")
    f = RadialCDF.for_measure(rho)
    r_half = f.r_level(0.5)
    kappa_2r = f.cdf(2.0 * r_half)
    constant = kappa_2r - 0.5
    return ClassConstantReport(
        "unimodal-radial", constant, constant > 0,
        {"r_rho": r_half, "kappa_2r": kappa_2r, "S_2r": 1.0 - kappa_2r},
    )


def tail_control_constant(rho: Measure, delta: float) -> ClassConstantReport:
    """Tail-control class: applicable when at most delta of the mass escapes
    the doubled median-radius ball; the constant is (1 - 2 delta) / 4."""
    if not 0 < delta < 0.5:
        raise ValidationError("delta must lie in (0, 1/2)")
    r_half = r_rho(rho, 0.5)
    kappa_2r = kappa(rho, 2.0 * r_half)
    tail_mass = 1.0 - kappa_2r
    witness = {"r_rho": r_half, "kappa_2r": kappa_2r, "S_2r": tail_mass}
    if isinstance(rho, DiscreteMeasure):
        witness["min_weight"] = float(rho.weights.min())
    return ClassConstantReport(
        f"tail-control({delta:g})", (1.0 - 2.0 * delta) / 4.0,
        tail_mass <= delta, witness,
    )


LOG_CONCAVITY_SLACK = 1e-9
CHORD_SLACK = 1e-6


def log_concave_check(rho: RadialMeasure) -> ClassConstantReport:
    """Log-concave radial class: verify discrete log-concavity of the tilted
    density s -> rho(s) s^(d-1) on the quadrature grid, confirm the chord
    consequence S(2 r_half) <= 1/4, and report the delta = 1/4 tail constant."""
    f = RadialCDF.for_measure(rho)
    knots = f.quadrature_knots()
    s = knots[knots > 0]
    tilted = np.asarray(rho.density(s), dtype=float) * s ** (rho.dim - 1)
    pos = np.nonzero(tilted > 0)[0]
    if pos.size < 3:
        raise NotLogConcave("tilted density has too little support on the grid")
    lo, hi = pos[0], pos[-1]
    if np.any(tilted[lo : hi + 1] <= 0):
        raise NotLogConcave("tilted density support is not an interval on the grid")
    t = tilted[lo : hi + 1]
    if np.any(t[1:-1] ** 2 < t[:-2] * t[2:] * (1.0 - LOG_CONCAVITY_SLACK)):
        raise NotLogConcave("tilted density fails the discrete log-concavity test")
    r_half = f.r_level(0.5)
    tail_mass = f.survival(2.0 * r_half)
    if tail_mass > 0.25 + CHORD_SLACK:
        raise ValidationError(
            f"chord inequality violated numerically: S(2 r_half) = {tail_mass!r}"
        )
    return ClassConstantReport(
        "log-concave", (1.0 - 2.0 * 0.25) / 4.0, True,
        {"r_rho": r_half, "kappa_2r": 1.0 - tail_mass, "S_2r": tail_mass},
    )


def discrete_class_constant(rho: DiscreteMeasure) -> ClassConstantReport:
    """Discrete class: every atom below mass 1/2 gives the constant delta/2
    with delta the smallest atom weight."""
    heaviest = float(rho.weights.max())
    if heaviest >= 0.5:
        raise WeightTooLarge(f"atom of mass {heaviest:g} >= 1/2")
    delta = float(rho.weights.min())
    return ClassConstantReport(
        f"discrete({delta:g})", delta / 2.0, True,
        {"min_weight": delta, "max_weight": heaviest},
    )


TRIM_TOL = 1e-12


def trim_min_mass_check(rho: DiscreteMeasure, c_sup: float) -> bool:
    """Whether kappa(2 / c_sup) - 1/2 dominates the smallest atom weight.

    This is the discrete min-mass inequality underlying the trim-plan
    comparison; it can genuinely fail for clustered supports, so the result
    is reported rather than asserted.
    """
    if not (c_sup > 0 and math.isfinite(c_sup)):
        raise ValidationError("finite positive supremal cost required")
    from .concentration import kappa_discrete

    return kappa_discrete(rho, 2.0 / c_sup) - 0.5 >= float(rho.weights.min()) - TRIM_TOL
