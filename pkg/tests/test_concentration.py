import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from repot import (
    DiscreteMeasure,
    GaussianProfile,
    GridExpProfile,
    InstanceTooLarge,
    NotUnimodal,
    RadialMeasure,
    UniformProfile,
    CauchyProfile,
    ValidationError,
    concentration_profile,
    kappa_discrete,
    kappa_radial,
    min_enclosing_ball,
    pointwise_concentration,
    r_rho,
)
from conftest import random_discrete, three_point_line


# ---------------------------------------------------------------------------
# minimum enclosing ball
# ---------------------------------------------------------------------------

def grid_refined_meb_radius(pts: np.ndarray) -> float:
    """Brute-force oracle: refine a center grid around the best cell."""
    lo = pts.min(axis=0) - 1.0
    hi = pts.max(axis=0) + 1.0
    best_c, best_r = None, math.inf
    for _ in range(40):
        axes = [np.linspace(lo[k], hi[k], 11) for k in range(pts.shape[1])]
        for c in itertools.product(*axes):
            r = float(np.linalg.norm(pts - np.asarray(c), axis=1).max())
            if r < best_r:
                best_r, best_c = r, np.asarray(c)
        span = (hi - lo) * 0.25
        lo, hi = best_c - span / 2, best_c + span / 2
    return best_r


def test_meb_single_point():
    c, r = min_enclosing_ball([[3.0, -1.0]])
    assert r == 0.0 and c.tolist() == [3.0, -1.0]


def test_meb_two_points():
    c, r = min_enclosing_ball([[0.0, 0.0], [2.0, 0.0]])
    assert r == pytest.approx(1.0, abs=1e-12)
    assert c.tolist() == pytest.approx([1.0, 0.0], abs=1e-12)


def test_meb_unit_triangle():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]])
    expected = grid_refined_meb_radius(pts)
    _, r = min_enclosing_ball(pts)
    assert r == pytest.approx(expected, abs=1e-9)
    assert r == pytest.approx(0.5773502692, abs=1e-9)


def test_meb_random_vs_support_subset_oracle():
    rng = np.random.default_rng(5)
    for _ in range(40):
        m, d = int(rng.integers(1, 9)), int(rng.integers(1, 4))
        pts = rng.random((m, d)) * 3
        c, r = min_enclosing_ball(pts)
        assert np.linalg.norm(pts - c, axis=1).max() <= r + 1e-9
        best = math.inf
        for size in range(1, min(m, d + 1) + 1):
            for comb in itertools.combinations(range(m), size):
                sub = pts[list(comb)]
                if size == 1:
                    cc, rr = sub[0], 0.0
                else:
                    q0 = sub[0]
                    dd = sub[1:] - q0
                    lam, *_ = np.linalg.lstsq(2 * dd @ dd.T, np.einsum("ij,ij->i", dd, dd),
                                              rcond=None)
                    cc = q0 + lam @ dd
                    rr = float(np.linalg.norm(sub - cc, axis=1).max())
                if np.linalg.norm(pts - cc, axis=1).max() <= rr + 1e-9:
                    best = min(best, rr)
        assert r == pytest.approx(best, abs=1e-8)


def test_meb_deterministic():
    pts = np.random.default_rng(0).random((12, 2))
    first = min_enclosing_ball(pts)
    second = min_enclosing_ball(pts)
    assert first[1] == second[1] and first[0].tolist() == second[0].tolist()


# ---------------------------------------------------------------------------
# kappa, discrete
# ---------------------------------------------------------------------------

def test_kappa_two_cluster():
    rho = three_point_line(Fraction(1, 10))
    assert kappa_discrete(rho, 2.0) == pytest.approx(0.6, abs=1e-15)


def test_kappa_saturates_at_support_radius():
    # half the diameter suffices only on the line; in general the support's
    # own enclosing radius is the saturation point (it can exceed diam/2)
    rng = np.random.default_rng(1)
    for _ in range(10):
        d = int(rng.integers(1, 3))
        rho = random_discrete(rng, int(rng.integers(2, 7)), d)
        _, r_all = min_enclosing_ball(rho.points)
        assert kappa_discrete(rho, r_all + 1e-9) == pytest.approx(1.0, abs=1e-12)
        if d == 1:
            assert kappa_discrete(rho, rho.diameter() / 2) == pytest.approx(1.0, abs=1e-12)


def test_kappa_at_zero_is_pointwise():
    rng = np.random.default_rng(2)
    for _ in range(10):
        rho = random_discrete(rng, int(rng.integers(2, 7)), int(rng.integers(1, 3)))
        assert kappa_discrete(rho, 0.0) == pointwise_concentration(rho)


def test_kappa_monotone_in_alpha():
    rng = np.random.default_rng(3)
    rho = random_discrete(rng, 6, 2)
    alphas = np.linspace(0, rho.diameter(), 25)
    vals = [kappa_discrete(rho, float(a)) for a in alphas]
    assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))


def test_kappa_dominates_feasible_subsets():
    rng = np.random.default_rng(4)
    for _ in range(30):
        rho = random_discrete(rng, int(rng.integers(2, 8)), int(rng.integers(1, 3)))
        idx = sorted(rng.choice(rho.size, size=int(rng.integers(1, rho.size + 1)),
                                replace=False).tolist())
        _, r = min_enclosing_ball(rho.points[idx])
        assert kappa_discrete(rho, r) >= float(rho.weights[idx].sum()) - 1e-12


def grid_scan_kappa(rho: DiscreteMeasure, alpha: float, pitch: float) -> float:
    """Approximate kappa by scanning ball centers over a grid."""
    lo = rho.points.min(axis=0) - alpha
    hi = rho.points.max(axis=0) + alpha
    axes = [np.arange(lo[k], hi[k] + pitch, pitch) for k in range(rho.dim)]
    best = 0.0
    for c in itertools.product(*axes):
        d = np.linalg.norm(rho.points - np.asarray(c), axis=1)
        best = max(best, float(rho.weights[d <= alpha].sum()))
    return best


def test_kappa_vs_grid_scan_sandwich():
    rng = np.random.default_rng(6)
    checked = 0
    while checked < 100:
        m, d = int(rng.integers(2, 9)), int(rng.integers(1, 3))
        rho = random_discrete(rng, m, d)
        diam = rho.diameter()
        pitch = 1e-3 * diam if d == 1 else 2e-2 * diam
        alpha = float(rng.uniform(0.05, 0.7)) * diam
        exact = kappa_discrete(rho, alpha)
        assert grid_scan_kappa(rho, alpha, pitch) <= exact + 1e-12
        assert exact <= grid_scan_kappa(rho, alpha + pitch * math.sqrt(d) + 1e-12, pitch) + 1e-12
        checked += 1


def test_kappa_open_vs_closed():
    rho = DiscreteMeasure([[0.0], [1.0]], [0.5, 0.5])
    assert kappa_discrete(rho, 0.5, closed=True) == 1.0
    assert kappa_discrete(rho, 0.5, closed=False) == 0.5


def test_kappa_size_guard():
    pts = np.random.default_rng(0).random((21, 2))
    rho = DiscreteMeasure(pts, np.full(21, 1 / 21))
    with pytest.raises(InstanceTooLarge):
        kappa_discrete(rho, 0.3)


# ---------------------------------------------------------------------------
# kappa, radial
# ---------------------------------------------------------------------------

def test_kappa_radial_gaussian_closed_form():
    rho = RadialMeasure(2, GaussianProfile(1.3))
    for t in (0.4, 1.0, 2.5):
        assert kappa_radial(rho, t) == pytest.approx(1 - math.exp(-t * t / (2 * 1.3**2)),
                                                     abs=1e-9)


def test_kappa_radial_uniform():
    rho = RadialMeasure(1, UniformProfile(1.0))
    assert kappa_radial(rho, 0.25) == pytest.approx(0.25, abs=1e-9)
    assert kappa_radial(rho, 0.0) == 0.0


def test_kappa_radial_refuses_non_unimodal():
    bumpy = RadialMeasure(1, GridExpProfile(np.array([0.0, 1.0, 2.0]),
                                            np.array([1.0, 2.0, 0.0])))
    assert not bumpy.unimodal
    with pytest.raises(NotUnimodal):
        kappa_radial(bumpy, 1.0)


# ---------------------------------------------------------------------------
# level radius
# ---------------------------------------------------------------------------

def test_r_rho_gaussian_median():
    for sigma in (0.5, 2.0):
        rho = RadialMeasure(2, GaussianProfile(sigma))
        assert r_rho(rho, 0.5) == pytest.approx(sigma * math.sqrt(2 * math.log(2)), abs=1e-8)


def test_r_rho_cauchy_and_uniform():
    assert r_rho(RadialMeasure(1, CauchyProfile(1.0)), 0.5) == pytest.approx(1.0, abs=1e-8)
    assert r_rho(RadialMeasure(1, UniformProfile(1.0)), 0.5) == pytest.approx(0.5, abs=1e-9)


def test_r_rho_level_crossing_consistency():
    rho = RadialMeasure(2, GaussianProfile(1.0))
    for level in (0.3, 0.5, 0.8):
        r = r_rho(rho, level)
        assert kappa_radial(rho, r - 1e-6) <= level
        assert kappa_radial(rho, r + 1e-6) > level


def test_r_rho_discrete_exact():
    rho = DiscreteMeasure([[0.0], [1.0]], [0.5, 0.5])
    assert r_rho(rho, 0.5) == pytest.approx(0.5, abs=1e-15)
    heavy = DiscreteMeasure([[0.0], [1.0]], [0.6, 0.4])
    assert r_rho(heavy, 0.5) == 0.0


def test_r_rho_discrete_vs_subset_enumeration():
    rng = np.random.default_rng(7)
    for _ in range(30):
        m, d = int(rng.integers(2, 8)), int(rng.integers(1, 3))
        rho = random_discrete(rng, m, d)
        level = float(rng.uniform(0.2, 0.9))
        mine = r_rho(rho, level)
        brute = math.inf
        if pointwise_concentration(rho) > level:
            brute = 0.0
        else:
            for mask in range(1, 1 << m):
                idx = [i for i in range(m) if mask >> i & 1]
                if rho.weights[idx].sum() > level:
                    _, r = min_enclosing_ball(rho.points[idx])
                    brute = min(brute, r)
        assert mine == pytest.approx(brute, abs=1e-10)


def test_r_rho_level_range_guard():
    rho = DiscreteMeasure([[0.0], [1.0]], [0.5, 0.5])
    with pytest.raises(ValidationError):
        r_rho(rho, 0.0)


# ---------------------------------------------------------------------------
# profile
# ---------------------------------------------------------------------------

def test_profile_matches_pointwise_kappa():
    rng = np.random.default_rng(8)
    rho = random_discrete(rng, 5, 2)
    bps, vals = concentration_profile(rho)
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    assert vals[0] == pytest.approx(pointwise_concentration(rho), abs=1e-12)
    assert vals[-1] == pytest.approx(1.0, abs=1e-12)
    for alpha in np.linspace(0, rho.diameter(), 17):
        k = int(np.searchsorted(bps, alpha + 1e-12, side="right")) - 1
        step_val = 0.0 if k < 0 else float(vals[k])
        assert step_val == pytest.approx(kappa_discrete(rho, float(alpha)), abs=1e-12)


def test_meb_dimension_mismatch():
    from repot import DimensionMismatch
    with pytest.raises(DimensionMismatch):
        min_enclosing_ball([[0.0], [0.0, 1.0]])
