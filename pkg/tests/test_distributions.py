import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from mrdprice import distributions as dist
from mrdprice.distributions import (Affine, Convolution, Deterministic, Empirical, Exponential,
                                    Gamma, GeneralizedPareto, Kumaraswamy, Lognormal, Mixture,
                                    Normal, Pareto, PiecewiseLinearCdf, Uniform, from_spec)

import oracles

FAMILIES = [Exponential(1.5), Pareto(1.0, 3.0), GeneralizedPareto.from_epsilon(0.5),
            Kumaraswamy(3.0), Uniform(0.5, 2.0), Gamma(2.0, 2.0), Lognormal(0.0, 0.5),
            Normal(3.0, 1.0)]


@pytest.mark.parametrize("d", FAMILIES, ids=repr)
def test_mrd_at_zero_is_mean(d):
    assert float(d.mrd(0.0)) == pytest.approx(d.mean, rel=1e-8)


@pytest.mark.parametrize("d", FAMILIES, ids=repr)
def test_closed_form_tail_matches_quadrature(d):
    for q in (0.1, 0.5, 0.9, 0.99):
        r = float(d.quantile(q))
        assert float(d.tail(r)) == pytest.approx(dist.DemandDistribution.tail(d, r), rel=1e-7, abs=1e-12)


@pytest.mark.parametrize("name,params", [
    ("exponential", {"lambda": 0.7}), ("gamma", {"shape": 3.0, "scale": 0.5}),
    ("lognormal", {"mu": 0.1, "sigma": 0.8}), ("uniform", {"a": 0.2, "b": 1.7}),
    ("kumaraswamy", {"lambda": 4.0}), ("pareto", {"L": 1.0, "k": 3.5}),
])
def test_mrd_matches_scipy_density(name, params):
    d = from_spec({"family": name, "params": params})
    ref = oracles.SCIPY[name](params)
    for q in (0.2, 0.6, 0.95):
        r = float(ref.ppf(q))
        assert float(d.mrd(r)) == pytest.approx(oracles.mrd_from_pdf(ref, r), rel=1e-7)
        assert float(d.sf(r)) == pytest.approx(ref.sf(r), rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(c=st.floats(0.2, 20), lam=st.floats(0.2, 5), q=st.floats(0.01, 0.99))
def test_scaling_law(c, lam, q):
    base = Gamma(2.0, 1.0 / lam)
    r = float(base.quantile(q))
    scaled = Affine(base, 0.0, c, kind="scale")
    assert float(scaled.mrd(c * r)) == pytest.approx(c * float(base.mrd(r)), rel=1e-8)


@settings(max_examples=30, deadline=None)
@given(p=st.floats(0.01, 0.99), q=st.floats(0.05, 0.95))
def test_mixture_survival_is_convex_combination(p, q):
    a, b = Exponential(1.0), Uniform(0.0, 3.0)
    m = Mixture(a, b, p)
    r = float(m.quantile(q))
    assert float(m.sf(r)) == pytest.approx(p * float(a.sf(r)) + (1 - p) * float(b.sf(r)), abs=1e-10)
    assert float(m.cdf(r)) == pytest.approx(q, abs=1e-8)


def test_piecewise_oracle_and_gap():
    d = from_spec({"family": "piecewise", "knots": oracles.PIECEWISE_KNOTS})
    assert isinstance(d, PiecewiseLinearCdf)
    assert d.has_gaps
    assert float(d.mrd(0.5)) == pytest.approx(5 / 6 - 0.5, abs=1e-14)
    assert d.mean == pytest.approx(float(d.tail(0.0)))


def test_pareto_k2_has_infinite_second_moment():
    assert math.isinf(Pareto(1.0, 2.0).second_moment)
    assert Pareto(1.0, 3.0).second_moment == pytest.approx(3.0)
    with pytest.raises(ValueError):
        Pareto(1.0, 1.0)


def test_gpareto_mrd_is_linear():
    d = GeneralizedPareto(0.1, 1.0, 0.3)
    for r in (0.2, 1.0, 5.0):
        assert float(d.mrd(r)) == pytest.approx((1.0 + 0.3 * (r - 0.1)) / 0.7, rel=1e-12)


def test_hazard_and_gfr():
    d = Exponential(2.0)
    assert float(dist.hazard(d, 0.7)) == pytest.approx(2.0)
    assert float(dist.gfr(d, 0.7)) == pytest.approx(1.4)
    with pytest.raises(ValueError):
        dist.hazard(Deterministic(1.0), 0.5)


def test_gmrd_rejects_nonpositive():
    with pytest.raises(ValueError):
        dist.gmrd(Exponential(1.0), 0.0)
    assert float(dist.elasticity(Exponential(1.0), 2.0)) == pytest.approx(2.0)


@pytest.mark.parametrize("d,expect", [
    (Exponential(1.0), {"ifr": True, "dmrd": True, "dgmrd": True}),
    (Uniform(0, 1), {"ifr": True, "dmrd": True, "dgmrd": True}),
    (Pareto(1.0, 3.0), {"ifr": False, "dmrd": False, "dgmrd": True}),
    (Lognormal(0.0, 1.0), {"ifr": False, "dgmrd": True}),
], ids=repr)
def test_classification(d, expect):
    rep = dist.classify(d)
    for k, v in expect.items():
        assert getattr(rep, k) == v, k


def test_profile_arrays_are_read_only():
    prof = dist.MrdProfile(Exponential(1.0), np.linspace(0.1, 3, 20))
    with pytest.raises(ValueError):
        prof.m[0] = 1.0


def test_empirical_matches_exact_suffix_sum():
    x = np.array([0.5, 1.0, 2.0, 4.0])
    e = Empirical(x)
    assert float(e.mrd(1.5)) == pytest.approx(((2 - 1.5) + (4 - 1.5)) / 2)
    assert e.mean == pytest.approx(x.mean())


def test_convolution_mean_and_sampling_reproducible():
    c1 = Convolution(Exponential(1.0), Uniform(0, 1), method="mc", n=100_000, seed=7)
    c2 = Convolution(Exponential(1.0), Uniform(0, 1), method="mc", n=100_000, seed=7)
    assert c1.exact_mean == pytest.approx(1.5)
    assert float(c1.mrd(1.0)) == float(c2.mrd(1.0))
    g = Convolution(Exponential(1.0), Uniform(0, 1), method="grid")
    assert g.mean == pytest.approx(1.5, rel=1e-4)


def test_from_spec_roundtrip_and_errors():
    d = from_spec({"transform": "scale", "c": 2, "of": {"family": "exponential", "params": {"lambda": 1}}})
    assert d.mean == pytest.approx(2.0)
    with pytest.raises(ValueError):
        from_spec({"family": "nope"})
    with pytest.raises(ValueError):
        from_spec({"family": "exponential", "params": {}})
    assert from_spec({"family": "uniform", "params": {"a": "1/3", "b": 1}}).support.lower == pytest.approx(1 / 3)


def test_sampling_matches_distribution():
    from mrdprice._rng import make_rng
    x = Kumaraswamy(2.0).sample(200_000, make_rng(1, 0))
    assert np.mean(x <= 0.5) == pytest.approx(0.75, abs=0.005)
