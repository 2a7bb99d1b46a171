import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from repot import ExpDecayH, PowerH, TabulatedH, ValidationError, config_cost, in_b_beta, in_b_upper, parse_h


def test_power_eval():
    h = PowerH(1)
    assert h.eval(2.0) == 0.5
    assert h.eval(0.0) == math.inf
    assert ExpDecayH().eval(0.0) == 1.0


def test_inverse_values():
    h = PowerH(1)
    assert h.inv(0.5) == 2.0
    assert h.inv(math.inf) == 0.0
    assert ExpDecayH().inv(2.0) == 0.0


def test_psi_closed_forms():
    assert PowerH(1).psi(1.0) == pytest.approx(0.5, abs=1e-15)
    assert PowerH(2).psi(1.0) == pytest.approx(0.25, abs=1e-12)
    assert ExpDecayH().psi(0.25) == pytest.approx(0.0625, abs=1e-12)


def test_psi_matches_numeric_composition():
    for h in (PowerH(2), ExpDecayH(), PowerH(0.7)):
        for t in (0.05, 0.3, 0.9):
            assert h.psi(t) == pytest.approx(h.eval(2 * h.inv(t)), abs=1e-12)


@given(st.floats(min_value=1e-3, max_value=1e3),
       st.sampled_from([PowerH(1), PowerH(2.5), ExpDecayH()]))
def test_inverse_of_eval_is_identity(t, h):
    if isinstance(h, ExpDecayH) and t > 100:
        return  # below double precision of exp
    s = h.eval(t)
    if 0 < s < math.inf:
        assert h.inv(s) == pytest.approx(t, abs=1e-10, rel=1e-10)


@given(st.floats(min_value=1e-6, max_value=1e6),
       st.sampled_from([PowerH(1), PowerH(3), ExpDecayH()]))
def test_generalized_inverse_bound(s, h):
    t = h.inv(s)
    if t < math.inf:
        assert h.eval(t) <= s * (1 + 1e-12) or h.eval(t) == pytest.approx(s, rel=1e-12)


@given(st.floats(min_value=1e-6, max_value=1e3), st.floats(min_value=1e-6, max_value=1e3),
       st.sampled_from([PowerH(1), PowerH(2), ExpDecayH()]))
def test_psi_monotone(t1, t2, h):
    lo, hi = sorted((t1, t2))
    assert h.psi(lo) <= h.psi(hi) * (1 + 1e-13)


def test_tabulated_roundtrip():
    ts = (0.0, 0.5, 1.0, 2.0, 4.0)
    hs = (4.0, 2.5, 1.5, 0.75, 0.2)
    h = TabulatedH(ts, hs)
    assert h.h0 == 4.0
    for t in (0.25, 0.9, 3.0):
        assert h.inv(h.eval(t)) == pytest.approx(t, abs=1e-10)
    assert h.inv(10.0) == 0.0
    assert h.inv(0.1) == math.inf


def test_tabulated_validation():
    with pytest.raises(ValidationError):
        TabulatedH((0.0, 1.0), (1.0, 1.0))       # not strictly decreasing
    with pytest.raises(ValidationError):
        TabulatedH((0.5, 1.0), (2.0, 1.0))       # grid must start at 0


def test_parse_h_grammar(tmp_path):
    assert isinstance(parse_h("power:2.5"), PowerH)
    assert parse_h("power:2.5").p == 2.5
    assert isinstance(parse_h("expdecay"), ExpDecayH)
    table = tmp_path / "h.csv"
    table.write_text("t,h\n0.0,3.0\n1.0,1.0\n2.0,0.5\n")
    h = parse_h(f"table:{table}")
    assert h.eval(1.0) == 1.0
    with pytest.raises(ValidationError):
        parse_h("cubic")


def test_config_cost_values():
    h = PowerH(1)
    assert config_cost(h, [[0.0], [1.0], [2.0]]) == pytest.approx(2.5, abs=1e-15)
    assert config_cost(h, [[0.0], [0.0]]) == math.inf
    assert config_cost(ExpDecayH(), [[0.0], [0.0]]) == 1.0


def test_costly_set_membership():
    assert not in_b_beta([[0.0], [1.0]], 1.0)       # strict inequality
    assert in_b_beta([[0.0], [0.5], [5.0]], 1.0)
    assert in_b_upper(PowerH(1), [[0.0], [1.0]], 0.5)
    assert not in_b_upper(PowerH(1), [[0.0], [1.0]], 1.0)


def _random_config(rng, n, d):
    return rng.random((n, d)) * 2.0


def test_costly_set_inclusions_random():
    rng = np.random.default_rng(0)
    h_list = [PowerH(1), PowerH(2), ExpDecayH()]
    for _ in range(500):
        n = int(rng.integers(2, 5))
        cfg = _random_config(rng, n, int(rng.integers(1, 3)))
        beta = float(rng.uniform(0.05, 2.0))
        h = h_list[int(rng.integers(0, len(h_list)))]
        if in_b_beta(cfg, beta):
            assert in_b_upper(h, cfg, h.eval(beta))
        pairs = n * (n - 1) // 2
        if in_b_upper(h, cfg, pairs * h.eval(beta)):
            assert in_b_beta(cfg, beta)
