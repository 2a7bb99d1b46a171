"""Probability measures on R^d: finitely supported and radially symmetric.

Two families are supported.  ``DiscreteMeasure`` is a finite list of distinct
atoms with positive weights summing to one; weights may optionally carry an
exact-rational shadow used by the feasibility solvers.  ``RadialMeasure`` is an
absolutely continuous measure whose density depends on ``|x|`` only, described
by one of four radial profiles.  Both are immutable after construction.

The JSON schema (exact keys) is::

    {"type": "discrete", "dim": d, "points": [[f, ...], ...], "weights": [f, ...]}
    {"type": "radial",   "dim": d, "profile": P}

with ``P`` one of ``{"name":"gaussian","sigma":f}``, ``{"name":"cauchy","nu":f}``,
``{"name":"uniform","a":f}``, ``{"name":"expg","grid_r":[...],"grid_g":[...]}``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DimensionMismatch, SchemaError, ValidationError

MASS_TOL = 1e-12        # allowed mass defect after construction
PARSE_MASS_TOL = 1e-9   # renormalization window when parsing


def _as_readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Finitely supported probability measure: atoms ``points`` (M x d) with
    positive ``weights`` summing to one.

    ``weight_fractions``, when present, holds the same weights as exact
    fractions (summing exactly to 1) for rational-arithmetic feasibility.
    """

    points: np.ndarray
    weights: np.ndarray
    weight_fractions: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        w = np.asarray(self.weights, dtype=float).ravel()
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
            raise ValidationError("points must form a nonempty M x d array")
        if pts.shape[0] != w.shape[0]:
            raise ValidationError("points and weights must have equal length")
        if not np.all(np.isfinite(pts)):
            raise ValidationError("non-finite coordinate")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValidationError("weights must be finite and positive")
        if abs(float(w.sum()) - 1.0) > MASS_TOL:
            raise ValidationError(
                f"weights sum to {w.sum()!r}, deviating from 1 by more than {MASS_TOL}"
            )
        if self.weight_fractions is not None:
            fr = tuple(Fraction(f) for f in self.weight_fractions)
            if len(fr) != w.shape[0]:
                raise ValidationError("weight_fractions length mismatch")
            if any(f <= 0 for f in fr) or sum(fr) != 1:
                raise ValidationError("weight_fractions must be positive and sum to 1")
            object.__setattr__(self, "weight_fractions", fr)
        for i in range(pts.shape[0]):
            d = np.linalg.norm(pts[i + 1 :] - pts[i], axis=1)
            if d.size and float(d.min()) <= 0.0:
                raise ValidationError("atoms must be pairwise distinct")
        object.__setattr__(self, "points", _as_readonly(pts))
        object.__setattr__(self, "weights", _as_readonly(w))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def distance_matrix(self) -> np.ndarray:
        diff = self.points[:, None, :] - self.points[None, :, :]
        return np.linalg.norm(diff, axis=2)

    def diameter(self) -> float:
        return float(self.distance_matrix().max())

    def min_pairwise_distance(self) -> float:
        d = self.distance_matrix()
        return float(d[~np.eye(self.size, dtype=bool)].min()) if self.size > 1 else math.inf

    def exact_weights(self) -> tuple[Fraction, ...]:
        """Exact weights for rational feasibility: the declared fractions if
        present, else the exact binary expansions of the stored floats."""
        if self.weight_fractions is not None:
            return self.weight_fractions
        return tuple(Fraction(float(x)) for x in self.weights)

    @staticmethod
    def from_rational(points, fractions) -> "DiscreteMeasure":
        fr = tuple(Fraction(f) for f in fractions)
        return DiscreteMeasure(np.asarray(points, dtype=float),
                               np.array([float(f) for f in fr]),
                               weight_fractions=fr)


# ---------------------------------------------------------------------------
# radial profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussianProfile:
    """Isotropic normal density (2 pi sigma^2)^(-d/2) exp(-s^2 / 2 sigma^2)."""

    sigma: float
    name = "gaussian"

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValidationError("sigma must be positive and finite")

    def density(self, s: np.ndarray, dim: int) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        norm = (2 * math.pi * self.sigma**2) ** (dim / 2)
        return np.exp(-(s * s) / (2 * self.sigma**2)) / norm

    def bulk_radius(self, dim: int) -> float:
        return 12.0 * self.sigma

    def monotone_nonincreasing(self) -> bool:
        return True


@dataclass(frozen=True)
class CauchyProfile:
    """Student-t density on the line; nu = 1 is the Cauchy distribution."""

    nu: float
    name = "cauchy"

    def __post_init__(self):
        if not (self.nu >= 1 and math.isfinite(self.nu)):
            raise ValidationError("nu must be >= 1 (heavier tails are not integrable here)")

    def density(self, s: np.ndarray, dim: int) -> np.ndarray:
        if dim != 1:
            raise ValidationError("cauchy-student profile is one-dimensional")
        s = np.asarray(s, dtype=float)
        k = math.gamma((self.nu + 1) / 2) / (math.sqrt(self.nu * math.pi) * math.gamma(self.nu / 2))
        return k * (1 + (s * s) / self.nu) ** (-(self.nu + 1) / 2)

    def bulk_radius(self, dim: int) -> float:
        return 50.0 * math.sqrt(self.nu)

    def monotone_nonincreasing(self) -> bool:
        return True


@dataclass(frozen=True)
class UniformProfile:
    """Uniform density 1/(2a) on the interval [-a, a]."""

    a: float
    name = "uniform"

    def __post_init__(self):
        if not (self.a > 0 and math.isfinite(self.a)):
            raise ValidationError("interval half-width must be positive")

    def density(self, s: np.ndarray, dim: int) -> np.ndarray:
        if dim != 1:
            raise ValidationError("uniform-interval profile is one-dimensional")
        s = np.asarray(s, dtype=float)
        return np.where(s <= self.a, 1.0 / (2 * self.a), 0.0)

    def bulk_radius(self, dim: int) -> float:
        return self.a

    def monotone_nonincreasing(self) -> bool:
        return True


@dataclass(frozen=True)
class GridExpProfile:
    """Density proportional to exp(-g(s)) with g sampled on a grid.

    The density values exp(-g_k) are interpolated piecewise linearly and the
    measure is truncated at the last grid node; the normalization constant is
    computed over the grid, so the truncation carries no mass by construction.
    """

    grid_r: np.ndarray
    grid_g: np.ndarray
    name = "expg"

    def __post_init__(self):
        r = np.asarray(self.grid_r, dtype=float)
        g = np.asarray(self.grid_g, dtype=float)
        if r.ndim != 1 or r.shape != g.shape or r.size < 2:
            raise ValidationError("grid_r and grid_g must be 1-d arrays of equal length >= 2")
        if r[0] != 0.0 or np.any(np.diff(r) <= 0):
            raise ValidationError("grid_r must start at 0 and be strictly increasing")
        if not np.all(np.isfinite(g)):
            raise ValidationError("grid_g must be finite")
        object.__setattr__(self, "grid_r", _as_readonly(r))
        object.__setattr__(self, "grid_g", _as_readonly(g))

    def density(self, s: np.ndarray, dim: int) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        vals = np.interp(s, self.grid_r, np.exp(-self.grid_g), right=0.0)
        return np.where(s > self.grid_r[-1], 0.0, vals)

    def bulk_radius(self, dim: int) -> float:
        return float(self.grid_r[-1])

    def monotone_nonincreasing(self) -> bool:
        dens = np.exp(-self.grid_g)
        return bool(np.all(np.diff(dens) <= 1e-15))


RadialProfile = GaussianProfile | CauchyProfile | UniformProfile | GridExpProfile


@dataclass(frozen=True, eq=False)
class RadialMeasure:
    """Radially symmetric absolutely continuous measure on R^dim.

    ``unimodal`` records whether the radial density is non-increasing; it is
    true for every parametric profile and inferred from the samples for grid
    profiles.  Concentration routines refuse non-unimodal inputs rather than
    approximate them.
    """

    dim: int
    profile: RadialProfile
    unimodal: bool = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if not (isinstance(self.dim, int) and self.dim >= 1):
            raise ValidationError("dim must be an integer >= 1")
        if isinstance(self.profile, (CauchyProfile, UniformProfile)) and self.dim != 1:
            raise ValidationError(f"{self.profile.name} profile requires dim = 1")
        if self.unimodal is None:
            object.__setattr__(self, "unimodal", self.profile.monotone_nonincreasing())
        elif self.unimodal and not self.profile.monotone_nonincreasing():
            raise ValidationError("unimodal flag set but radial density increases somewhere")

    def density(self, s) -> np.ndarray:
        return self.profile.density(s, self.dim)


Measure = DiscreteMeasure | RadialMeasure


# ---------------------------------------------------------------------------
# ball mass
# ---------------------------------------------------------------------------

def ball_mass(rho: DiscreteMeasure, center, radius: float, closed: bool = True) -> float:
    """Mass of the ball around ``center``: closed (<= radius) or open (< radius)."""
    if radius < 0:
        raise ValidationError("radius must be nonnegative")
    c = np.asarray(center, dtype=float).ravel()
    if c.shape[0] != rho.dim:
        raise DimensionMismatch(f"center has dim {c.shape[0]}, measure has dim {rho.dim}")
    d = np.linalg.norm(rho.points - c, axis=1)
    inside = d <= radius if closed else d < radius
    return float(rho.weights[inside].sum())


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------

_PROFILE_KEYS = {
    "gaussian": {"name", "sigma"},
    "cauchy": {"name", "nu"},
    "uniform": {"name", "a"},
    "expg": {"name", "grid_r", "grid_g"},
}


def _require_keys(obj: dict, keys: set[str], where: str) -> None:
    if set(obj.keys()) != keys:
        raise SchemaError(f"{where}: expected keys {sorted(keys)}, got {sorted(obj.keys())}")


def parse_measure(json_text: str) -> Measure:
    """Parse and validate a measure from its JSON form.

    Weights whose total mass drifts from 1 by at most 1e-9 are renormalized;
    a larger defect is a validation error.  Weights already within the stored
    mass tolerance are kept bit-exact so that parse/serialize round-trips.
    """
    try:
        obj = json.loads(json_text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    if not isinstance(obj, dict) or "type" not in obj:
        raise SchemaError("top-level object with a 'type' key required")
    kind = obj["type"]
    if kind == "discrete":
        _require_keys(obj, {"type", "dim", "points", "weights"}, "discrete measure")
        dim = obj["dim"]
        if not isinstance(dim, int) or dim < 1:
            raise SchemaError("dim must be a positive integer")
        try:
            pts = np.asarray(obj["points"], dtype=float)
            w = np.asarray(obj["weights"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"points/weights not numeric: {exc}") from exc
        if pts.ndim != 2 or pts.shape[1] != dim:
            raise SchemaError(f"points must be a list of length-{dim} vectors")
        s = float(w.sum())
        if abs(s - 1.0) > PARSE_MASS_TOL:
            raise ValidationError(f"total mass {s!r} deviates from 1 by more than {PARSE_MASS_TOL}")
        if abs(s - 1.0) > MASS_TOL:
            w = w / s
        return DiscreteMeasure(pts, w)
    if kind == "radial":
        _require_keys(obj, {"type", "dim", "profile"}, "radial measure")
        dim = obj["dim"]
        if not isinstance(dim, int) or dim < 1:
            raise SchemaError("dim must be a positive integer")
        prof = obj["profile"]
        if not isinstance(prof, dict) or "name" not in prof:
            raise SchemaError("profile must be an object with a 'name' key")
        name = prof["name"]
        if name not in _PROFILE_KEYS:
            raise SchemaError(f"unknown profile {name!r}")
        _require_keys(prof, _PROFILE_KEYS[name], f"profile {name!r}")
        if name == "gaussian":
            p: RadialProfile = GaussianProfile(float(prof["sigma"]))
        elif name == "cauchy":
            p = CauchyProfile(float(prof["nu"]))
        elif name == "uniform":
            p = UniformProfile(float(prof["a"]))
        else:
            p = GridExpProfile(np.asarray(prof["grid_r"], dtype=float),
                               np.asarray(prof["grid_g"], dtype=float))
        return RadialMeasure(dim, p)
    raise SchemaError(f"unknown measure type {kind!r}")


def serialize_measure(rho: Measure) -> str:
    if isinstance(rho, DiscreteMeasure):
        obj = {
            "type": "discrete",
            "dim": rho.dim,
            "points": [[float(x) for x in p] for p in rho.points],
            "weights": [float(w) for w in rho.weights],
        }
    else:
        p = rho.profile
        if isinstance(p, GaussianProfile):
            prof = {"name": "gaussian", "sigma": p.sigma}
        elif isinstance(p, CauchyProfile):
            prof = {"name": "cauchy", "nu": p.nu}
        elif isinstance(p, UniformProfile):
            prof = {"name": "uniform", "a": p.a}
        else:
            prof = {"name": "expg", "grid_r": list(map(float, p.grid_r)),
                    "grid_g": list(map(float, p.grid_g))}
        obj = {"type": "radial", "dim": rho.dim, "profile": prof}
    return json.dumps(obj)
