import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mrdprice.distributions import (Affine, Exponential, Gamma, GeneralizedPareto, Kumaraswamy,
                                    Pareto, Uniform, from_spec)
from mrdprice.equilibrium import (NoFiniteOptimum, deterministic_price, expected_profit,
                                  optimal_price, profit_curve, unimodality_report)

import oracles


@pytest.mark.parametrize("d,ref", [
    (Exponential(2.0), oracles.price_exponential(2.0)),
    (Kumaraswamy(2.0), oracles.price_kumaraswamy(2.0)),
    (Pareto(1.0, 3.0), oracles.price_pareto(3.0)),
    (Uniform(0.0, 1.0), oracles.PRICE_UNIFORM01),
    (Uniform(0.8, 1.0), oracles.price_uniform(0.8, 1.0)),
    (Gamma(2.0, 1.5), oracles.price_gamma2(1.5)),
], ids=repr)
def test_prices_match_oracles(d, ref):
    res = optimal_price(d)
    assert res.unique
    assert res.price == pytest.approx(ref, abs=1e-9)


def test_piecewise_price():
    d = from_spec({"family": "piecewise", "knots": oracles.PIECEWISE_KNOTS})
    assert optimal_price(d).price == pytest.approx(oracles.PRICE_PIECEWISE, abs=1e-9)


@pytest.mark.parametrize("params", [{"shape": 3.0, "scale": 1.0}, {"shape": 1.5, "scale": 2.0}])
def test_price_matches_density_based_fixed_point(params):
    d = Gamma(**params)
    ref = oracles.fixed_point_from_pdf(oracles.SCIPY["gamma"](params), 0.01, 20)
    assert optimal_price(d).price == pytest.approx(ref, abs=1e-8)


def test_below_support_case():
    res = optimal_price(Pareto(1.0, 3.0))
    assert res.boundary_case == "below_L"


def test_pareto_k2_is_flat_not_error():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = optimal_price(Pareto(1.0, 2.0))
    assert res.flat_optimum and not res.unique
    assert res.plateaus[0][0] == pytest.approx(1.0, abs=1e-6)
    assert res.as_dict()["no_finite_optimum"] is False


def test_heavy_tail_has_no_finite_optimum():
    with pytest.raises(NoFiniteOptimum):
        optimal_price(Pareto(1.0, 1.5))


def test_profit_derivative_sign_and_argmax():
    d = Exponential(1.0)
    curve = profit_curve(d, 1.0, np.linspace(0, 8, 2001))
    assert abs(curve.argmax - 1.0) <= curve.step
    assert unimodality_report(d).unimodal


def test_expected_profit_formula():
    assert expected_profit(Exponential(1.0), 1.0, 0.5) == pytest.approx(0.5 * math.exp(-1))
    assert deterministic_price(4.0) == 2.0


@settings(max_examples=30, deadline=None)
@given(lam=st.floats(0.1, 20))
def test_exponential_price_property(lam):
    assert optimal_price(Exponential(lam)).price == pytest.approx(1 / lam, rel=1e-9)


@settings(max_examples=25, deadline=None)
@given(c=st.floats(1.0, 10.0), shape=st.floats(1.0, 4.0))
def test_scaling_scales_the_price(c, shape):
    base = Gamma(shape, 1.0)
    r = optimal_price(base).price
    assert optimal_price(Affine(base, 0.0, c, kind="scale")).price == pytest.approx(c * r, rel=1e-8)


@settings(max_examples=20, deadline=None)
@given(eps=st.floats(0.05, 2.0))
def test_gpareto_price_closed_form(eps):
    d = GeneralizedPareto.from_epsilon(eps)
    # m(r) = (sigma + k (r - mu))/(1 - k) = r
    ref = (d.sigma - d.k * d.mu) / (1 - 2 * d.k)
    assert optimal_price(d).price == pytest.approx(max(ref, d.mu) if ref > d.mu else d.mean / 2, rel=1e-8)
