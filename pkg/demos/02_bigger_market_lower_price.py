"""A stochastically larger market can command a lower wholesale price.

Uniform(0, 1) dominates the piecewise-linear demand below in the usual
stochastic order, yet its optimal price is lower because the MRD curves cross.
"""
from mrdprice.distributions import PiecewiseLinearCdf, Uniform
from mrdprice.equilibrium import optimal_price
from mrdprice.orders import check_order

u = Uniform(0.0, 1.0)
p = PiecewiseLinearCdf([(0, 0), (1 / 3, 7 / 9), (2 / 3, 7 / 9), (1, 1)])

print("piecewise <=st uniform:", check_order("st", p, u).holds_1_le_2)
mrl = check_order("mrl", u, p)
print("mrl ordered either way:", mrl.holds, " crossings at", [round(c, 4) for c in mrl.crossings])
print(f"r*(uniform)   = {optimal_price(u).price:.6f}")
print(f"r*(piecewise) = {optimal_price(p).price:.6f}")
