"""How often does demand fall short of the posted price?

For demand with decreasing mean residual demand the no-trade probability
F(r*) never exceeds 1 - 1/e; heavy tails break the bound.
"""
import math

from mrdprice.distributions import Exponential, GeneralizedPareto, Kumaraswamy
from mrdprice.market import no_trade_probability

print(f"bound 1 - 1/e = {1 - math.exp(-1):.6f}")
for lam in (1, 4, 16, 64, 200):
    rep = no_trade_probability(Kumaraswamy(lam))
    print(f"Kumaraswamy(1, {lam:3d}): F(r*) = {rep.probability:.6f}")
print(f"Exponential(3):      F(r*) = {no_trade_probability(Exponential(3)).probability:.6f}")
for eps in (2.0, 0.5, 0.05):
    rep = no_trade_probability(GeneralizedPareto.from_epsilon(eps))
    print(f"GPareto eps={eps:<5}:  F(r*) = {rep.probability:.6f}  DMRD={rep.is_dmrd}")
