"""Independent reference values, derived by hand or from scipy.stats.

Nothing here imports the package under test.
"""
import math

import numpy as np
from scipy import integrate, optimize, stats


def price_exponential(lam):
    return 1.0 / lam


def price_kumaraswamy(lam):
    # F(x) = 1 - (1 - x)^lam on [0, 1]: m(r) = (1 - r) / (lam + 1)
    return 1.0 / (lam + 2)


def price_pareto(k, L=1.0):
    # below L, m(r) = mean - r; the fixed point mean/2 lies below L when k > 2
    return k * L / (2 * (k - 1))


def price_uniform(a, b):
    # m(r) = (b - r)/2 on [a, b] and (a + b)/2 - r below a
    r = b / 3
    return r if r >= a else (a + b) / 4


def price_gamma2(scale):
    # shape 2: m(r) = scale (2 + y)/(1 + y), y = r/scale, so y^2 = 2
    return scale * math.sqrt(2.0)


# cdf knots (0,0), (1/3,7/9), (2/3,7/9), (1,1); on [1/3, 2/3] the survival is
# flat at 2/9 and m(r) = 5/6 - r
PIECEWISE_KNOTS = [[0, 0], ["1/3", "7/9"], ["2/3", "7/9"], [1, 1]]
PRICE_PIECEWISE = 5.0 / 12.0
PRICE_UNIFORM01 = 1.0 / 3.0

NO_TRADE_BOUND = 1.0 - math.exp(-1.0)


def no_trade_kumaraswamy(lam):
    return 1.0 - (1.0 - 1.0 / (lam + 2)) ** lam


def tail_from_pdf(frozen, r):
    """E(X - r)_+ from the density of a scipy.stats frozen distribution."""
    hi = frozen.ppf(1 - 1e-14)
    if not r < hi:
        return 0.0
    val, _ = integrate.quad(lambda x: (x - r) * frozen.pdf(x), r, hi, limit=400,
                            epsabs=1e-13, epsrel=1e-11)
    return val


def mrd_from_pdf(frozen, r):
    return tail_from_pdf(frozen, r) / frozen.sf(r)


def fixed_point_from_pdf(frozen, lo, hi):
    return optimize.brentq(lambda r: mrd_from_pdf(frozen, r) - r, lo, hi, xtol=1e-13)


def cournot_table(alpha, r, n):
    """Classic n-retailer Cournot (beta = 1) realised profits."""
    ex = max(alpha - r, 0.0)
    return {"supplier": n / (n + 1) * r * ex, "retailer": ex**2 / (n + 1) ** 2,
            "quantity": ex / (n + 1)}


def brute_force_ratio_peak(r, n):
    f = lambda a: -4 * (a - r) * (a + n * r) / ((n + 2) * a * a)
    res = optimize.minimize_scalar(f, bounds=(r * 1.0001, 100 * r), method="bounded",
                                   options={"xatol": 1e-12})
    return res.x, -res.fun


SCIPY = {
    "exponential": lambda p: stats.expon(scale=1 / p["lambda"]),
    "gamma": lambda p: stats.gamma(p["shape"], scale=p["scale"]),
    "lognormal": lambda p: stats.lognorm(p["sigma"], scale=math.exp(p["mu"])),
    "uniform": lambda p: stats.uniform(p.get("a", 0), p.get("b", 1) - p.get("a", 0)),
    "kumaraswamy": lambda p: stats.beta(1, p["lambda"]),
    "pareto": lambda p: stats.pareto(p["k"], scale=p["L"]),
}


def sample_mean_excess(frozen, r, n, seed):
    x = frozen.rvs(size=n, random_state=np.random.default_rng(seed))
    return float(np.maximum(x - r, 0).mean())
