import math

import numpy as np
import pytest

from mrdprice.distributions import Deterministic, Exponential, Gamma
from mrdprice.market import MarketStructure
from mrdprice.sim import SimConfig, mc_expected_profit, mc_two_stage, sample


def test_sampling_is_worker_invariant():
    d = Gamma(2.0, 1.0)
    a = sample(d, 200_000, seed=3, workers=1)
    b = sample(d, 200_000, seed=3, workers=4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample(d, 200_000, seed=4))


def test_mc_profit_agrees_with_closed_form():
    cfg = SimConfig(seed=11, n_draws=200_000)
    est = mc_expected_profit(Exponential(1.0), [0.5, 1.0, 2.0], 1.0, cfg)
    for r, e in zip([0.5, 1.0, 2.0], est):
        assert e.agrees(r * math.exp(-r))


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(n_draws=10)
    with pytest.raises(ValueError):
        SimConfig(seed=-1)
    cfg = SimConfig(price_grid=(1.0, 2.0))
    assert SimConfig.from_dict(cfg.to_dict()) == cfg


def test_oracle_policy_on_deterministic_demand():
    cfg = SimConfig(n_draws=10_000, price_grid=tuple(np.linspace(0.5, 1.5, 11)))
    rep = mc_two_stage(Deterministic(2.0), MarketStructure("cournot_n", n=2),
                       "oracle_deterministic", cfg)
    assert rep.retailer_profit.value == pytest.approx(1 / 9)
    assert rep.empirical_argmax == pytest.approx(1.0)


def test_two_stage_table_error_and_no_trade():
    rep = mc_two_stage(Exponential(1.0), config=SimConfig(seed=5, n_draws=100_000, record_draws=3))
    assert rep.profit_table_error < 1e-10
    assert rep.no_trade.agrees(1 - math.exp(-1))
    assert len(rep.records) == 3
    assert rep.to_json() == rep.to_json()


def test_collusion_orders_less():
    cfg = SimConfig(n_draws=10_000)
    a = mc_two_stage(Deterministic(4.0), MarketStructure("collusion", beta=1, gamma=1), config=cfg,
                     r_star=1.0)
    b = mc_two_stage(Deterministic(4.0), MarketStructure("cournot_diff", beta=1, gamma=1), config=cfg,
                     r_star=1.0)
    assert a.total_order.value == pytest.approx(1.5)
    assert b.total_order.value == pytest.approx(2.0)
