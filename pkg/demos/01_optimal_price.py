"""Optimal wholesale price as the fixed point of the mean residual demand.

The supplier's expected profit r * E(alpha - r)_+ has derivative sf(r) (m(r) - r),
so the price where the MRD curve crosses the diagonal is optimal.
"""
import warnings

import numpy as np

from mrdprice.distributions import Exponential, Gamma, Kumaraswamy, Pareto, mrd
from mrdprice.equilibrium import optimal_price, profit_curve

for d in (Exponential(1.0), Gamma(2.0, 2.0), Kumaraswamy(4.0), Pareto(1.0, 3.0)):
    res = optimal_price(d)
    r = res.price
    print(f"{d!r:40s} r* = {r:.6f}  m(r*) = {float(mrd(d, r)):.6f}  ({res.boundary_case})")

d = Gamma(2.0, 2.0)
curve = profit_curve(d, 1.0, np.linspace(0, 15, 1501))
print(f"\nGamma(2, 2): grid argmax of expected profit = {curve.argmax:.3f}, "
      f"fixed point = {optimal_price(d).price:.3f}")

with warnings.catch_warnings():
    warnings.simplefilter("ignore", RuntimeWarning)
    res = optimal_price(Pareto(1.0, 2.0))
print(f"Pareto k=2: flat optimum on {res.plateaus[0]}, every price there earns the same")
