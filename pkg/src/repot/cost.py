"""Decreasing pointwise costs, configuration costs and costly configuration sets.

A cost profile maps inter-point distance to a value in (0, +inf]; it is
strictly decreasing and continuous on (0, inf).  Extended-real arithmetic is
plain ``float`` with ``math.inf``.  The configuration cost of N points is the
sum of the pairwise profile values; a configuration is "costly" either because
its total exceeds a budget or because some pair is closer than a cutoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


class HFunction:
    """Strictly decreasing continuous cost profile on [0, inf)."""

    @property
    def h0(self) -> float:
        """Value at 0+ (possibly +inf)."""
        raise NotImplementedError

    def eval(self, t: float) -> float:
        raise NotImplementedError

    def inv(self, s: float) -> float:
        """Generalized inverse inf{t >= 0 : h(t) <= s}.

        Returns 0 when s >= h(0+) and +inf when s is below every value of h.
        """
        raise NotImplementedError

    def psi(self, t: float) -> float:
        """h(2 h^{-1}(t)), the increasing budget-halving transform."""
        if not t > 0:
            raise ValidationError("psi requires a positive argument")
        return self.eval(2.0 * self.inv(t))

    def spec(self) -> str:
        """CLI spelling of this profile."""
        raise NotImplementedError

    def pairwise(self, dist: np.ndarray) -> np.ndarray:
        """Vectorized evaluation on a nonnegative distance array."""
        return np.vectorize(self.eval, otypes=[float])(dist)


@dataclass(frozen=True)
class PowerH(HFunction):
    """h(t) = t^(-p); the p = 1 case is the Coulomb interaction."""

    p: float

    def __post_init__(self):
        if not (self.p > 0 and math.isfinite(self.p)):
            raise ValidationError("exponent must be positive and finite")

    @property
    def h0(self) -> float:
        return math.inf

    def eval(self, t: float) -> float:
        if t < 0:
            raise ValidationError("negative distance")
        if t == 0.0:
            return math.inf
        return t ** (-self.p)

    def inv(self, s: float) -> float:
        if not s > 0:
            raise ValidationError("inverse requires s > 0")
        if s == math.inf:
            return 0.0
        return s ** (-1.0 / self.p)

    def spec(self) -> str:
        return f"power:{self.p:g}"

    def pairwise(self, dist: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.asarray(dist, dtype=float) ** (-self.p)


@dataclass(frozen=True)
class ExpDecayH(HFunction):
    """h(t) = exp(-t), a bounded repulsive cost with h(0) = 1."""

    @property
    def h0(self) -> float:
        return 1.0

    def eval(self, t: float) -> float:
        if t < 0:
            raise ValidationError("negative distance")
        return math.exp(-t)

    def inv(self, s: float) -> float:
        if not s > 0:
            raise ValidationError("inverse requires s > 0")
        if s >= 1.0:
            return 0.0
        return -math.log(s)

    def spec(self) -> str:
        return "expdecay"

    def pairwise(self, dist: np.ndarray) -> np.ndarray:
        return np.exp(-np.asarray(dist, dtype=float))


@dataclass(frozen=True)
class TabulatedH(HFunction):
    """Cost profile given by strictly decreasing samples, interpolated linearly.

    The sample grid must start at t = 0.  Beyond the last node the profile is
    held constant, so the generalized inverse returns +inf below the last
    sampled value.
    """

    ts: tuple[float, ...]
    hs: tuple[float, ...]

    def __post_init__(self):
        ts = tuple(float(t) for t in self.ts)
        hs = tuple(float(h) for h in self.hs)
        if len(ts) != len(hs) or len(ts) < 2:
            raise ValidationError("need matching t/h samples, at least two")
        if ts[0] != 0.0 or any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValidationError("t grid must start at 0 and increase strictly")
        if any(b >= a for a, b in zip(hs, hs[1:])) or hs[-1] <= 0:
            raise ValidationError("h samples must be strictly decreasing and positive")
        object.__setattr__(self, "ts", ts)
        object.__setattr__(self, "hs", hs)

    @property
    def h0(self) -> float:
        return self.hs[0]

    def eval(self, t: float) -> float:
        if t < 0:
            raise ValidationError("negative distance")
        if t >= self.ts[-1]:
            return self.hs[-1]
        return float(np.interp(t, self.ts, self.hs))

    def inv(self, s: float) -> float:
        if not s > 0:
            raise ValidationError("inverse requires s > 0")
        if s >= self.hs[0]:
            return 0.0
        if s < self.hs[-1]:
            return math.inf
        # h decreasing: invert by interpolating on the reversed samples
        return float(np.interp(-s, [-h for h in self.hs], self.ts))

    def spec(self) -> str:
        return f"table[{len(self.ts)}]"


def parse_h(text: str) -> HFunction:
    """Parse the CLI grammar: ``power:P``, ``expdecay`` or ``table:FILE.csv``."""
    if text == "expdecay":
        return ExpDecayH()
    if text.startswith("power:"):
        return PowerH(float(text.split(":", 1)[1]))
    if text.startswith("table:"):
        path = text.split(":", 1)[1]
        ts, hs = [], []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#") or line.lower().startswith("t,"):
                    continue
                a, b = line.split(",")
                ts.append(float(a))
                hs.append(float(b))
        return TabulatedH(tuple(ts), tuple(hs))
    raise ValidationError(f"unrecognized cost spec {text!r}")


# ---------------------------------------------------------------------------
# configurations
# ---------------------------------------------------------------------------

def _pair_distances(cfg: np.ndarray) -> np.ndarray:
    cfg = np.atleast_2d(np.asarray(cfg, dtype=float))
    n = cfg.shape[0]
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            out.append(float(np.linalg.norm(cfg[i] - cfg[j])))
    return np.array(out)


def config_cost(h: HFunction, cfg) -> float:
    """Sum of h over all pairwise distances; +inf as soon as a pair coincides
    and h is unbounded at 0."""
    d = _pair_distances(cfg)
    if d.size == 0:
        raise ValidationError("a configuration needs at least two points")
    total = 0.0
    for t in d:
        v = h.eval(t)
        if v == math.inf:
            return math.inf
        total += v
    return total


def in_b_beta(cfg, beta: float) -> bool:
    """Membership in the near-collision set: some pair strictly closer than beta."""
    if not beta > 0:
        raise ValidationError("beta must be positive")
    return bool(_pair_distances(cfg).min() < beta)


def in_b_upper(h: HFunction, cfg, budget: float) -> bool:
    """Membership in the over-budget set: configuration cost strictly above budget."""
    return config_cost(h, cfg) > budget
