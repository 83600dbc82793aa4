"""Second-stage retail market: order constants, no-trade risk and realised profits.

Profits, shares and the aggregate ratio use classic Cournot competition among
``n`` retailers with the inverse-demand slope scaled to one.  The other market
structures enter only through their order constant ``lambda_M`` and through the
primitive playout in :func:`play`, which the Monte Carlo module uses.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate

from .distributions import DemandDistribution, classify
from .equilibrium import EquilibriumResult, optimal_price

__all__ = [
    "STRUCTURES",
    "NO_TRADE_BOUND",
    "MarketStructure",
    "MarketOutcome",
    "NoTradeReport",
    "RatioAnalytics",
    "Playout",
    "lambda_M",
    "play",
    "no_trade_probability",
    "realized_profits",
    "supplier_shares",
    "aggregate_ratio",
    "ratio_analytics",
    "domain_check",
    "performance_rows",
    "CSV_COLUMNS",
]

STRUCTURES = ("cournot_diff", "bertrand_diff", "single_retailer", "competing_no_returns",
              "competing_full_returns", "collusion", "cournot_n")
NO_TRADE_BOUND = 1.0 - math.exp(-1.0)
CSV_COLUMNS = ("alpha", "n", "r_star", "pi_s_U", "pi_i_U", "pi_A_U", "pi_s_D", "pi_i_D",
               "pi_A_D", "share_U", "share_D", "ratio")


@dataclass(frozen=True)
class MarketStructure:
    """Retail market structure with inverse demand ``p_i = alpha - beta q_i - gamma q_j``.

    ``cournot_n`` uses ``p = alpha - beta * sum(q)`` with ``n`` retailers and
    ignores ``gamma``.  Products are substitutes with ``|gamma| <= beta``
    unless ``allow_gamma_gt_beta`` is set.
    """

    kind: str
    beta: float = 1.0
    gamma: float = 0.0
    n: int = 2
    allow_gamma_gt_beta: bool = False

    def __post_init__(self):
        if self.kind not in STRUCTURES:
            raise ValueError(f"unknown market structure {self.kind!r}; expected one of {STRUCTURES}")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        if self.kind == "cournot_n":
            if int(self.n) != self.n or self.n < 1:
                raise ValueError("cournot_n needs an integer n >= 1")
            return
        if abs(self.gamma) > self.beta and not self.allow_gamma_gt_beta:
            raise ValueError(f"|gamma| = {abs(self.gamma):g} exceeds beta = {self.beta:g}; "
                             "pass allow_gamma_gt_beta=True to override")
        if self.kind in ("bertrand_diff", "competing_full_returns"):
            if not (2 * self.beta - self.gamma > 0 and self.beta + self.gamma > 0):
                raise ValueError("price competition needs 2*beta - gamma > 0 and beta + gamma > 0")
        if self.kind in ("cournot_diff", "competing_no_returns") and not 2 * self.beta + self.gamma > 0:
            raise ValueError("quantity competition needs 2*beta + gamma > 0")
        if self.kind == "collusion" and not self.beta + self.gamma > 0:
            raise ValueError("collusion needs beta + gamma > 0")

    @property
    def retailers(self) -> int:
        if self.kind == "cournot_n":
            return int(self.n)
        return 1 if self.kind == "single_retailer" else 2

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "MarketStructure":
        allowed = {"kind", "beta", "gamma", "n", "allow_gamma_gt_beta"}
        unknown = set(d) - allowed
        if unknown:
            raise ValueError(f"unknown structure fields {sorted(unknown)}")
        return cls(**d)


def lambda_M(structure: MarketStructure, aggregate: bool = False) -> float:
    """Order constant: each retailer orders ``lambda_M * (alpha - r)_+``.

    With ``aggregate=True`` the per-retailer constant is multiplied by the
    number of retailers.
    """
    b, g = structure.beta, structure.gamma
    k = structure.kind
    if k in ("cournot_diff", "competing_no_returns"):
        lam = 1 / (2 * b + g)
    elif k in ("bertrand_diff", "competing_full_returns"):
        lam = b / ((2 * b - g) * (b + g))
    elif k == "single_retailer":
        lam = 1 / (2 * b)
    elif k == "collusion":
        # joint profit maximisation; the pair together orders (alpha - r)_+ / (beta + gamma)
        lam = 1 / (2 * (b + g))
    else:
        lam = 1 / (b * (structure.n + 1))
    return lam * structure.retailers if aggregate else lam


# ---------------------------------------------------------------------------
# primitive playout
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Playout:
    """Second-stage equilibrium per draw; arrays have shape (draws, retailers)."""

    quantities: np.ndarray
    prices: np.ndarray
    retailer_profits: np.ndarray
    supplier_profit: np.ndarray


def _foc_solution(structure: MarketStructure) -> np.ndarray:
    """Equilibrium per unit of ``(alpha - r)``: quantities for quantity games.

    Derived from the first-order conditions of each retailer's (or the
    coalition's) problem, which are linear in the decision variables.
    """
    b, g, n = structure.beta, structure.gamma, structure.retailers
    k = structure.kind
    if k == "cournot_n":
        A = b * (np.eye(n) + np.ones((n, n)))
    elif k == "single_retailer":
        A = np.array([[2 * b]])
    elif k in ("cournot_diff", "competing_no_returns"):
        A = np.array([[2 * b, g], [g, 2 * b]])
    elif k == "collusion":
        A = np.array([[2 * b, 2 * g], [2 * g, 2 * b]])
    else:
        raise ValueError("price game")
    # minimum-norm solution picks the symmetric split when gamma = beta makes A singular
    return np.linalg.lstsq(A, np.ones(n), rcond=None)[0]


def play(structure: MarketStructure, alpha, r) -> Playout:
    """Second-stage equilibrium from the inverse demand system.

    Retailers know ``alpha``; each earns ``q_i (p_i - r)`` and the supplier
    ``r * sum(q_i)``.  When ``alpha <= r`` nobody orders.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    r = np.broadcast_to(np.asarray(r, dtype=float), alpha.shape)
    excess = np.maximum(alpha - r, 0.0)[:, None]
    a_eff = r[:, None] + excess
    b, g, n = structure.beta, structure.gamma, structure.retailers
    if structure.kind in ("bertrand_diff", "competing_full_returns"):
        if abs(b - g) < 1e-14:
            # perfect substitutes: prices fall to cost and the market splits evenly
            p = np.broadcast_to(r[:, None], (len(alpha), 2)).copy()
            q = np.broadcast_to(excess / (2 * b), (len(alpha), 2)).copy()
        else:
            det = b * b - g * g
            bb, cc = b / det, g / det  # q_i = (bb - cc) a - bb p_i + cc p_j
            A = np.array([[2 * bb, -cc], [-cc, 2 * bb]])
            rhs = np.repeat((bb - cc) * a_eff + bb * r[:, None], 2, axis=1)
            p = np.linalg.solve(A, rhs.T).T
            q = (bb - cc) * a_eff - bb * p + cc * p[:, ::-1]
    else:
        q = excess * _foc_solution(structure)[None, :]
        if structure.kind == "cournot_n":
            p = np.broadcast_to(a_eff - b * q.sum(axis=1, keepdims=True), q.shape).copy()
        elif n == 1:
            p = a_eff - b * q
        else:
            p = a_eff - b * q - g * q[:, ::-1]
    q = np.where(excess > 0, q, 0.0)
    prof = q * (p - r[:, None])
    return Playout(q, p, prof, r * q.sum(axis=1))


# ---------------------------------------------------------------------------
# no-trade probability
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NoTradeReport:
    r_star: float
    probability: float
    is_dmrd: bool
    bound: float
    satisfied: bool | None
    representation: float
    representation_error: float

    def as_dict(self) -> dict:
        return asdict(self)


def _mrd_representation(d: DemandDistribution, r: float) -> float:
    """``1 - m(0)/m(r) * exp(-int_0^r du / m(u))``, the cdf rebuilt from the MRD."""
    m0 = d.mean
    mr = float(d.mrd(r))
    pts = [b for b in d.breakpoints if 0 < b < r]
    integral, _ = integrate.quad(lambda u: 1.0 / float(d.mrd(u)), 0.0, r,
                                 points=pts or None, epsabs=1e-13, epsrel=1e-12, limit=500)
    return 1.0 - (m0 / mr) * math.exp(-integral)


def no_trade_probability(d: DemandDistribution,
                         result: EquilibriumResult | None = None) -> NoTradeReport:
    """``F(r*)`` with the DMRD bound check and an MRD-representation cross-check."""
    res = result if result is not None else optimal_price(d)
    if not res.unique:
        raise ValueError(f"no-trade probability needs a unique optimal price; candidates: "
                         f"prices={list(res.prices)}, plateaus={list(res.plateaus)}")
    r = res.prices[0]
    prob = float(d.cdf(r))
    try:
        is_dmrd = bool(classify(d).dmrd)
    except ValueError:
        is_dmrd = False
    rep = _mrd_representation(d, r)
    err = abs(rep - prob)
    if err > 1e-6:
        warnings.warn(f"MRD representation disagrees with the cdf at r*: {rep!r} vs {prob!r}",
                      RuntimeWarning, stacklevel=2)
    sat = prob <= NO_TRADE_BOUND + 1e-9 if is_dmrd else None
    return NoTradeReport(r, prob, is_dmrd, NO_TRADE_BOUND, sat, rep, err)


# ---------------------------------------------------------------------------
# realised profits (classic Cournot, beta = 1)
# ---------------------------------------------------------------------------

def _check_n(n) -> int:
    if int(n) != n or n < 1:
        raise ValueError("n must be an integer >= 1")
    return int(n)


@dataclass(frozen=True)
class MarketOutcome:
    alpha: float
    r_star: float
    n: int
    pi_s_U: float
    pi_i_U: float
    pi_A_U: float
    pi_s_D: float
    pi_i_D: float
    pi_A_D: float
    share_U: float | None
    share_D: float
    ratio: float

    def row(self) -> tuple:
        return tuple(getattr(self, c) for c in CSV_COLUMNS)


def realized_profits(alpha: float, r_star: float, n: int) -> MarketOutcome:
    """Realised equilibrium profits for demand level ``alpha``.

    ``U`` is the market where the supplier posted ``r_star`` before ``alpha``
    was known; ``D`` the one where he observed ``alpha`` and charged ``alpha/2``.
    """
    n = _check_n(n)
    if not alpha > 0 or r_star < 0:
        raise ValueError("need alpha > 0 and r_star >= 0")
    ex = max(alpha - r_star, 0.0)
    s_U = n / (n + 1) * r_star * ex
    i_U = ex * ex / (n + 1) ** 2
    half = alpha / 2
    s_D = n / (n + 1) * half * half
    i_D = half * half / (n + 1) ** 2
    a_U = s_U + n * i_U
    a_D = s_D + n * i_D
    share_U = (n + 1) * r_star / (n * r_star + alpha) if alpha > r_star else None
    return MarketOutcome(alpha, r_star, n, s_U, i_U, a_U, s_D, i_D, a_D, share_U,
                         (n + 1) / (n + 2), aggregate_ratio(alpha, r_star, n))


def supplier_shares(alpha: float, r_star: float, n: int) -> dict:
    """Supplier's share of aggregate realised profit in both markets."""
    n = _check_n(n)
    if not alpha > r_star:
        raise ValueError("shares are undefined when alpha <= r_star (no trade)")
    return {"share_U": (n + 1) * r_star / (n * r_star + alpha), "share_D": (n + 1) / (n + 2)}


def aggregate_ratio(alpha, r_star: float, n: int):
    """``Pi_A^U / Pi_A^D = 4 (alpha - r)(alpha + n r) / ((n + 2) alpha^2)``; 0 without trade."""
    n = _check_n(n)
    a = np.asarray(alpha, dtype=float)
    if np.any(a <= 0):
        raise ValueError("alpha must be positive")
    val = 4 * (a - r_star) * (a + n * r_star) / ((n + 2) * a * a)
    val = np.where(a > r_star, val, 0.0)
    return float(val) if val.ndim == 0 else val


@dataclass(frozen=True)
class RatioAnalytics:
    argmax: float | None
    max_value: float | None
    limit: float
    gt1_interval: tuple[float, float]

    def as_dict(self) -> dict:
        return asdict(self)


def ratio_analytics(r_star: float, n: int) -> RatioAnalytics:
    """Peak, limit and the region where the stochastic market beats the deterministic one."""
    n = _check_n(n)
    limit = 4 / (n + 2)
    if n == 1:
        return RatioAnalytics(None, None, limit, (r_star, math.inf))
    argmax = 2 * n * r_star / (n - 1)
    peak = 1 + 1 / (n * (n + 2))
    hi = math.inf if n == 2 else 2 * n * r_star / (n - 2)
    return RatioAnalytics(argmax, peak, limit, (2 * r_star, hi))


def domain_check(d: DemandDistribution, r_star: float, ns=()) -> list[str]:
    """Warnings when the support is too short for the profit-division results."""
    H = d.support.upper
    out = []
    if not H > 2 * r_star:
        out.append(f"upper support H={H:g} does not exceed 2 r* = {2 * r_star:g}")
    for n in ns:
        if n >= 3 and not H > 2 * n * r_star / (n - 2):
            out.append(f"n={n}: upper support H={H:g} does not exceed 2 n r*/(n-2) = "
                       f"{2 * n * r_star / (n - 2):g}")
    return out


def performance_rows(d: DemandDistribution, alphas, ns, r_star: float | None = None):
    """``MarketOutcome`` rows for every ``(n, alpha)`` with ``alpha`` inside the support."""
    if r_star is None:
        r_star = optimal_price(d).price
    lo, hi = d.support
    rows = []
    for n in ns:
        for a in alphas:
            if a < lo or a > hi or a <= 0:
                continue
            if a == hi:
                warnings.warn(f"alpha = H = {hi:g} is a boundary query", RuntimeWarning,
                              stacklevel=2)
            rows.append(realized_profits(float(a), r_star, int(n)))
    return rows
