import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mrdprice.distributions import (Deterministic, Exponential, Gamma, Kumaraswamy, Lognormal,
                                    Mixture, Uniform, from_spec)
from mrdprice.orders import (check_order, cv_comparison, mean_preserving, statics_suite)

import oracles

EXP = lambda lam: {"family": "exponential", "params": {"lambda": lam}}


def test_exponential_orders_in_rate():
    a, b = Exponential(2.0), Exponential(1.0)
    for order in ("st", "hr", "mrl", "disp", "ew"):
        v = check_order(order, a, b)
        assert v.holds_1_le_2 and not v.holds_2_le_1, order


@settings(max_examples=20, deadline=None)
@given(l1=st.floats(0.3, 5), l2=st.floats(0.3, 5))
def test_hr_implies_mrl_and_st(l1, l2):
    a, b = Kumaraswamy(max(l1, l2)), Kumaraswamy(min(l1, l2))
    hr = check_order("hr", a, b)
    if hr.holds_1_le_2:
        assert check_order("mrl", a, b).holds_1_le_2
        assert check_order("st", a, b).holds_1_le_2


def test_uniform_vs_piecewise():
    u = Uniform(0, 1)
    p = from_spec({"family": "piecewise", "knots": oracles.PIECEWISE_KNOTS})
    st_v = check_order("st", u, p)
    assert st_v.holds_2_le_1
    mrl = check_order("mrl", u, p)
    assert not mrl.holds
    assert mrl.crossings


def test_hr_rejects_gapped_support():
    p = from_spec({"family": "piecewise", "knots": oracles.PIECEWISE_KNOTS})
    with pytest.raises(ValueError):
        check_order("hr", Uniform(0, 1), p)


def test_cx_needs_equal_means():
    with pytest.raises(ValueError):
        check_order("cx", Gamma(2, 1), Exponential(1.0))
    v = check_order("cx", Gamma(2, 1), Exponential(0.5))
    assert v.holds_1_le_2
    v = check_order("cx", Gamma(2, 2), Lognormal(0.5, 1.0), allow_unequal_means=True)
    assert v.notes


def test_mean_preserving_endpoints():
    x = Gamma(2.0, 1.0)
    assert isinstance(mean_preserving(x, 0.0), Deterministic)
    assert mean_preserving(x, 0.4).mean == pytest.approx(x.mean)


@pytest.mark.parametrize("scn", [
    {"theorem": "lemma", "X1": EXP(2), "X2": EXP(1)},
    {"theorem": "size_i", "X": EXP(1), "c": 3.0},
    {"theorem": "transform_iii", "X1": EXP(2), "X2": EXP(1), "p": 0.3},
    {"theorem": "var_ii", "X1": EXP(2), "X2": EXP(1)},
    {"theorem": "var_i", "X1": EXP(2), "X2": EXP(1)},
    {"theorem": "size_ii", "X": EXP(1), "Z": {"family": "uniform", "params": {}}, "n": 200000},
    {"theorem": "transform_i", "X1": EXP(2), "X2": EXP(1),
     "Z": {"family": "uniform", "params": {}}, "method": "grid"},
])
def test_statics_rows_pass(scn):
    rows = statics_suite(scn)
    assert rows and all(r.status == "PASS" for r in rows), [r.as_dict() for r in rows]


def test_mean_preserving_suite_monotone():
    rows = statics_suite({"theorem": "mean_preserving", "X": EXP(1)})
    assert [r.status for r in rows] == ["PASS"] * 5


def test_hypothesis_failure_is_reported():
    rows = statics_suite({"theorem": "size_i", "X": EXP(1), "c": 0.5})
    assert rows[0].status == "hypothesis_failed"
    assert "c >= 1" in rows[0].failed_premise


def test_st_is_inconclusive():
    p = {"family": "piecewise", "knots": oracles.PIECEWISE_KNOTS}
    rows = statics_suite({"theorem": "st", "X1": {"family": "uniform", "params": {}}, "X2": p})
    assert rows[0].status == "inconclusive"
    assert rows[0].hypotheses["X2 <=st X1"]


def test_cv_rule():
    rep = cv_comparison(Exponential(1.0), [(1.0, 1.0), (0.0, 3.0)])
    assert rep.children[0]["cv"] < rep.children[1]["cv"]
    assert rep.children[0]["price"] == pytest.approx(1.0, abs=1e-8)
    assert rep.children[1]["price"] == pytest.approx(3.0, abs=1e-8)
    assert not rep.cv_predicts_prices


def test_unknown_theorem():
    with pytest.raises(ValueError):
        statics_suite({"theorem": "nope"})
