"""Concentration function kappa, pointwise concentration and the level radius.

For a discrete measure the supremum over ball centers is exact: a subset of
atoms fits in a closed ball of radius alpha iff its minimum enclosing ball has
radius <= alpha, so the supremum reduces to a search over atom subsets, pruned
by weight and by the monotonicity of the enclosing radius.  In one dimension
an interval sweep replaces the search.  For unimodal radial measures the
optimal center is the mode and kappa equals the radial CDF.
"""

from __future__ import annotations

import math
import random

import numpy as np

from .errors import DimensionMismatch, InstanceTooLarge, NotUnimodal, ValidationError
from .measures import DiscreteMeasure, Measure, RadialMeasure

MEB_TOL = 1e-12          # feasibility slack for closed-ball containment
MAX_EXACT_ATOMS = 20     # subset search limit in dimension >= 2


# ---------------------------------------------------------------------------
# minimum enclosing ball (Welzl, any dimension)
# ---------------------------------------------------------------------------

def _ball_through(boundary: list[np.ndarray]) -> tuple[np.ndarray, float]:
    """Smallest ball with all boundary points on its surface (center in their
    affine hull)."""
    if not boundary:
        return np.zeros(0), -1.0
    q0 = boundary[0]
    if len(boundary) == 1:
        return q0, 0.0
    D = np.stack(boundary[1:]) - q0
    A = 2.0 * D @ D.T
    b = np.einsum("ij,ij->i", D, D)
    lam, *_ = np.linalg.lstsq(A, b, rcond=None)
    center = q0 + lam @ D
    radius = max(float(np.linalg.norm(p - center)) for p in boundary)
    return center, radius


def _welzl(points: list[np.ndarray], boundary: list[np.ndarray], dim: int):
    if not points or len(boundary) == dim + 1:
        return _ball_through(boundary)
    p = points[-1]
    center, radius = _welzl(points[:-1], boundary, dim)
    if radius >= 0 and np.linalg.norm(p - center) <= radius * (1 + 1e-12) + 1e-14:
        return center, radius
    return _welzl(points[:-1], boundary + [p], dim)


def min_enclosing_ball(points) -> tuple[np.ndarray, float]:
    """Center and radius of the smallest closed Euclidean ball containing the
    points; deterministic across calls."""
    try:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
    except ValueError as exc:
        raise DimensionMismatch(f"points do not share a dimension: {exc}") from exc
    if pts.shape[0] == 0:
        raise ValidationError("need at least one point")
    dims = pts.shape[1]
    if pts.shape[0] == 1:
        return pts[0].copy(), 0.0
    if dims == 1:
        lo, hi = float(pts.min()), float(pts.max())
        return np.array([(lo + hi) / 2.0]), (hi - lo) / 2.0
    order = list(range(pts.shape[0]))
    random.Random(0x5EB).shuffle(order)
    center, radius = _welzl([pts[i] for i in order], [], dims)
    return center, radius


# ---------------------------------------------------------------------------
# exact kappa for discrete measures
# ---------------------------------------------------------------------------

def _fits(radius: float, alpha: float, closed: bool) -> bool:
    return radius <= alpha + MEB_TOL if closed else radius < alpha - MEB_TOL


def _kappa_line(xs: np.ndarray, w: np.ndarray, alpha: float, closed: bool) -> float:
    order = np.argsort(xs)
    x, ww = xs[order], w[order]
    prefix = np.concatenate([[0.0], np.cumsum(ww)])
    best, i = 0.0, 0
    for j in range(len(x)):
        while not _fits((x[j] - x[i]) / 2.0, alpha, closed):
            i += 1
        best = max(best, float(prefix[j + 1] - prefix[i]))
    return best


def kappa_discrete(rho: DiscreteMeasure, alpha: float, closed: bool = True) -> float:
    """Largest mass in any ball of radius alpha (sup over all centers, exact)."""
    if alpha < 0:
        raise ValidationError("alpha must be nonnegative")
    pts, w = rho.points, rho.weights
    if rho.dim == 1:
        return _kappa_line(pts[:, 0], w, alpha, closed)
    m = rho.size
    if m > MAX_EXACT_ATOMS:
        raise InstanceTooLarge(f"exact kappa limited to {MAX_EXACT_ATOMS} atoms in dim >= 2")
    order = np.argsort(-w)
    pts, w = pts[order], w[order]
    suffix = np.concatenate([np.cumsum(w[::-1])[::-1], [0.0]])
    best = 0.0

    def descend(i: int, chosen: list[int], mass: float):
        nonlocal best
        if mass > best:
            best = mass
        if i == m or mass + suffix[i] <= best:
            return
        _, r = min_enclosing_ball(pts[chosen + [i]])
        if _fits(r, alpha, closed):
            descend(i + 1, chosen + [i], mass + float(w[i]))
        descend(i + 1, chosen, mass)

    descend(0, [], 0.0)
    return best


def pointwise_concentration(rho: DiscreteMeasure) -> float:
    """Largest single-atom mass."""
    return float(rho.weights.max())


def kappa_radial(rho: RadialMeasure, t: float) -> float:
    """kappa for a unimodal radial measure: the radial CDF at t."""
    if not rho.unimodal:
        raise NotUnimodal("kappa center is not the mode for non-unimodal densities")
    if t < 0:
        raise ValidationError("radius must be nonnegative")
    from . import classes

    return classes.radial_cdf(rho, t)


def kappa(rho: Measure, alpha: float, closed: bool = True) -> float:
    """Dispatch kappa over the two measure families."""
    if isinstance(rho, DiscreteMeasure):
        return kappa_discrete(rho, alpha, closed)
    return kappa_radial(rho, alpha)


# ---------------------------------------------------------------------------
# level radius r_rho
# ---------------------------------------------------------------------------

def _r_level_line(xs: np.ndarray, w: np.ndarray, level: float) -> float:
    order = np.argsort(xs)
    x, ww = xs[order], w[order]
    prefix = np.concatenate([[0.0], np.cumsum(ww)])
    best, i = math.inf, 0
    for j in range(len(x)):
        while prefix[j + 1] - prefix[i + 1] > level:
            i += 1
        if prefix[j + 1] - prefix[i] > level:
            best = min(best, (x[j] - x[i]) / 2.0)
    return best


def _r_level_discrete(rho: DiscreteMeasure, level: float) -> float:
    """Smallest enclosing radius of any atom subset with mass > level; this is
    sup{r : kappa(r) <= level} because kappa first exceeds the level exactly
    when such a subset fits."""
    if pointwise_concentration(rho) > level:
        return 0.0
    if rho.dim == 1:
        return _r_level_line(rho.points[:, 0], rho.weights, level)
    m = rho.size
    if m > MAX_EXACT_ATOMS:
        raise InstanceTooLarge(f"exact level radius limited to {MAX_EXACT_ATOMS} atoms in dim >= 2")
    order = np.argsort(-rho.weights)
    pts, w = rho.points[order], rho.weights[order]
    suffix = np.concatenate([np.cumsum(w[::-1])[::-1], [0.0]])
    best = math.inf

    def descend(i: int, chosen: list[int], mass: float, radius: float):
        nonlocal best
        if mass > level:
            best = min(best, radius)
            return  # supersets only grow the ball
        if i == m or mass + suffix[i] <= level:
            return
        _, r = min_enclosing_ball(pts[chosen + [i]])
        if r < best:
            descend(i + 1, chosen + [i], mass + float(w[i]), r)
        descend(i + 1, chosen, mass, radius)

    descend(0, [], 0.0, 0.0)
    return best


def r_rho(rho: Measure, level: float = 0.5) -> float:
    """sup{r : kappa_rho(r) <= level}; 0 when already exceeded at radius 0."""
    if not 0 < level < 1:
        raise ValidationError("level must lie in (0, 1)")
    if isinstance(rho, DiscreteMeasure):
        return _r_level_discrete(rho, level)
    if not rho.unimodal:
        raise NotUnimodal("level radius uses kappa = F, valid only for unimodal profiles")
    from . import classes

    return classes.RadialCDF.for_measure(rho).r_level(level)


# ---------------------------------------------------------------------------
# profile over a radius grid
# ---------------------------------------------------------------------------

MAX_PROFILE_ATOMS = 12   # full breakpoint enumeration limit in dim >= 2


def concentration_profile(rho: Measure):
    """The full map alpha -> kappa(alpha).

    Discrete case: an exact right-continuous step function returned as
    (breakpoints, values); radial case: the CDF as a callable.
    """
    if isinstance(rho, RadialMeasure):
        if not rho.unimodal:
            raise NotUnimodal("profile equals the CDF only for unimodal measures")
        from . import classes

        return classes.RadialCDF.for_measure(rho).cdf
    if rho.dim >= 2 and rho.size > MAX_PROFILE_ATOMS:
        raise InstanceTooLarge(
            f"full profile enumeration limited to {MAX_PROFILE_ATOMS} atoms in dim >= 2"
        )
    cand: list[tuple[float, float]] = []
    if rho.dim == 1:
        xs = np.sort(rho.points[:, 0])
        order = np.argsort(rho.points[:, 0])
        prefix = np.concatenate([[0.0], np.cumsum(rho.weights[order])])
        for i in range(len(xs)):
            for j in range(i, len(xs)):
                cand.append(((xs[j] - xs[i]) / 2.0, float(prefix[j + 1] - prefix[i])))
    else:
        m = rho.size
        for mask in range(1, 1 << m):
            idx = [i for i in range(m) if mask >> i & 1]
            _, r = min_enclosing_ball(rho.points[idx])
            cand.append((r, float(rho.weights[idx].sum())))
    cand.sort()
    bps: list[float] = []
    vals: list[float] = []
    running = 0.0
    for r, wgt in cand:
        if wgt > running:
            running = wgt
            if bps and abs(r - bps[-1]) <= MEB_TOL:
                vals[-1] = running
            else:
                bps.append(r)
                vals.append(running)
    return np.array(bps), np.array(vals)
