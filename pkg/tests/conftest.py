from fractions import Fraction

import hypothesis
import numpy as np
import pytest

from repot import DiscreteMeasure

hypothesis.settings.register_profile("suite", max_examples=60, deadline=None)
hypothesis.settings.load_profile("suite")


def three_point_line(eps: Fraction) -> DiscreteMeasure:
    """Half mass at 0, eps at 1, the rest at 1/eps."""
    return DiscreteMeasure.from_rational(
        [[0.0], [1.0], [float(1 / eps)]],
        [Fraction(1, 2), eps, Fraction(1, 2) - eps],
    )


def random_discrete(rng: np.random.Generator, m: int, d: int,
                    max_weight: float = 1.0, box: float = 1.0) -> DiscreteMeasure:
    """Separated atoms in a box with flat-Dirichlet weights, optionally with
    the heaviest atom capped by rejection."""
    while True:
        pts = rng.random((m, d)) * box
        gaps = [np.linalg.norm(pts[i] - pts[j]) for i in range(m) for j in range(i + 1, m)]
        if not gaps or min(gaps) >= 1e-3:
            break
    for _ in range(10_000):
        w = rng.dirichlet(np.ones(m))
        w = w / w.sum()
        if np.all(w > 0) and w.max() < max_weight:
            return DiscreteMeasure(pts, w)
    raise AssertionError("rejection budget exhausted in test generator")


def random_rational_discrete(rng: np.random.Generator, m: int, d: int,
                             denominator: int = 64) -> DiscreteMeasure:
    """Atoms as above; weights are random positive fractions k_i / D."""
    while True:
        pts = rng.random((m, d))
        gaps = [np.linalg.norm(pts[i] - pts[j]) for i in range(m) for j in range(i + 1, m)]
        if not gaps or min(gaps) >= 1e-3:
            break
    cuts = np.sort(rng.choice(np.arange(1, denominator), size=m - 1, replace=False))
    parts = np.diff(np.concatenate([[0], cuts, [denominator]]))
    fractions = [Fraction(int(k), denominator) for k in parts]
    return DiscreteMeasure.from_rational(pts, fractions)


@pytest.fixture(scope="session")
def coulomb():
    from repot import PowerH

    return PowerH(1)
