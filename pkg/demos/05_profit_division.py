"""Realised profits when the supplier prices before demand is known.

Compares Cournot retailers facing a price posted under uncertainty with the
benchmark where the supplier sees alpha and charges alpha/2.
"""
from mrdprice.distributions import Gamma
from mrdprice.equilibrium import optimal_price
from mrdprice.market import ratio_analytics, realized_profits

r = optimal_price(Gamma(2.0, 2.0)).price
print(f"Gamma(2, 2): r* = {r:.4f}, retailers and shares cross at alpha = 2r* = {2 * r:.4f}")
for n in (2, 5, 8):
    a = ratio_analytics(r, n)
    print(f"n={n}: aggregate ratio peaks at alpha={a.argmax:.3f} with {a.max_value:.4f}, "
          f"tends to {a.limit:.4f}; exceeds 1 on ({a.gt1_interval[0]:.3f}, {a.gt1_interval[1]:.3f})")
for alpha in (4.0, 2 * r, 8.0, 20.0):
    o = realized_profits(alpha, r, 2)
    print(f"alpha={alpha:7.3f}  supplier U/D = {o.pi_s_U:7.3f}/{o.pi_s_D:7.3f}  "
          f"retailer U/D = {o.pi_i_U:6.3f}/{o.pi_i_D:6.3f}  ratio = {o.ratio:.4f}")
