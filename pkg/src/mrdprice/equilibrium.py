"""Supplier's first-stage pricing problem.

Expected supplier profit at wholesale price ``r`` is ``lambda_M * r * E(X - r)_+``;
its stationary points are the fixed points ``r = m(r)`` of the mean residual
demand.  :func:`optimal_price` finds all of them, together with flat stretches
where ``m(r) = r`` on an interval, and attaches the sufficiency diagnostics
(strictly decreasing GMRD, finite second moment) that make the fixed point
unique.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .distributions import DemandDistribution, Empirical, classify

__all__ = [
    "NoFiniteOptimum",
    "Sufficiency",
    "EquilibriumResult",
    "ProfitCurve",
    "UnimodalityReport",
    "optimal_price",
    "deterministic_price",
    "expected_profit",
    "profit_curve",
    "unimodality_report",
    "scan_bounds",
]

RESIDUAL_TOL = 1e-8


class NoFiniteOptimum(ArithmeticError):
    """Expected profit keeps increasing up to the truncation point."""


@dataclass(frozen=True)
class Sufficiency:
    dgmrd_strict: bool
    second_moment_finite: bool

    @property
    def holds(self) -> bool:
        return self.dgmrd_strict and self.second_moment_finite


@dataclass(frozen=True)
class EquilibriumResult:
    prices: tuple[float, ...]
    plateaus: tuple[tuple[float, float], ...]
    unique: bool
    sufficiency: Sufficiency
    boundary_case: str  # interior | below_L | none
    residuals: tuple[float, ...]
    stderr: tuple[float, ...] = ()
    flat_optimum: bool = False
    grid_argmax: float | None = None
    notes: tuple[str, ...] = field(default=())

    @property
    def price(self) -> float:
        """The unique optimal price; raises if there is none or several."""
        if not self.unique:
            raise ValueError(f"optimal price is not unique: prices={list(self.prices)}, "
                             f"plateaus={list(self.plateaus)}")
        return self.prices[0]

    def as_dict(self) -> dict:
        return {
            "prices": list(self.prices),
            "plateaus": [list(p) for p in self.plateaus],
            "unique": self.unique,
            "sufficiency": {"dgmrd_strict": self.sufficiency.dgmrd_strict,
                            "second_moment_finite": self.sufficiency.second_moment_finite},
            "boundary_case": self.boundary_case,
            "residuals": list(self.residuals),
            "stderr": list(self.stderr),
            "flat_optimum": self.flat_optimum,
            "no_finite_optimum": False,
            "grid_argmax": self.grid_argmax,
            "notes": list(self.notes),
        }


def deterministic_price(alpha: float) -> float:
    """Optimal price when the demand intercept ``alpha`` is known."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    return alpha / 2


def expected_profit(d: DemandDistribution, r, lambda_M: float = 1.0):
    """``lambda_M * r * E(X - r)_+``."""
    if not lambda_M > 0:
        raise ValueError("lambda_M must be positive")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("price must be nonnegative")
    val = lambda_M * r * np.asarray(d.tail(r), dtype=float)
    val = np.where(r >= d.support.upper, 0.0, val)
    return float(val) if val.ndim == 0 else val


@dataclass(frozen=True)
class ProfitCurve:
    lambda_M: float
    r: np.ndarray
    profit: np.ndarray

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.r.tolist(), self.profit.tolist()))

    @property
    def argmax(self) -> float:
        return float(self.r[int(np.argmax(self.profit))])

    @property
    def step(self) -> float:
        """Largest grid spacing around the argmax."""
        k = int(np.argmax(self.profit))
        gaps = [self.r[k] - self.r[k - 1]] if k > 0 else []
        if k + 1 < len(self.r):
            gaps.append(self.r[k + 1] - self.r[k])
        return float(max(gaps))


def profit_curve(d: DemandDistribution, lambda_M: float, grid) -> ProfitCurve:
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or len(g) < 2:
        raise ValueError("grid must be a 1-d array with at least two points")
    if np.any(g < 0) or np.any(np.diff(g) <= 0):
        raise ValueError("grid must be nonnegative and strictly increasing")
    p = np.asarray(expected_profit(d, g, lambda_M), dtype=float)
    g = g.copy()
    g.setflags(write=False)
    p.setflags(write=False)
    return ProfitCurve(float(lambda_M), g, p)


def scan_bounds(d: DemandDistribution) -> tuple[float, float]:
    """Interval on which fixed points are searched, inside the support."""
    lower, upper = d.support
    lo = max(lower, float(d.quantile(1e-9)), 1e-12)
    hi = float(d.quantile(1 - 1e-9))
    if math.isfinite(upper):
        hi = min(hi, upper) if hi > lo else upper
    return lo, hi


def _empirical(d) -> Empirical | None:
    inner = getattr(d, "realisation", d)
    return inner if isinstance(inner, Empirical) else None


def _price_stderr(emp: Empirical, r: float) -> float:
    """Delta-method standard error of a fixed point of the empirical MRD."""
    h = 0.02 * max(r, 1e-6)
    slope = (float(emp.mrd(r + h)) - float(emp.mrd(max(r - h, 0.0)))) / (r + h - max(r - h, 0.0))
    return float(emp.mrd_stderr(r)) / max(abs(1.0 - slope), 1e-3)


def _sufficiency(d: DemandDistribution) -> Sufficiency:
    try:
        strict = classify(d).dgmrd_strict
    except (ValueError, NotImplementedError, numerics.QuadratureError):
        strict = False
    return Sufficiency(bool(strict), math.isfinite(d.second_moment))


def optimal_price(d: DemandDistribution, n_seed: int = 256,
                  tol: float = numerics.ROOT_TOL) -> EquilibriumResult:
    """All fixed points of ``m(r) = r`` and flat stretches of the profit curve.

    Raises
    ------
    NoFiniteOptimum
        When the second moment is infinite and ``m(r) > r`` on the whole scan
        range, i.e. expected profit grows up to the truncation point.
    """
    mu = d.mean
    if not math.isfinite(mu):
        raise ValueError("demand mean must be finite")
    lower, upper = d.support
    emp = _empirical(d)
    notes: list[str] = []
    prices: list[float] = []
    residuals: list[float] = []
    stderr: list[float] = []
    boundary = "none"

    # below the support m(r) = mean - r, so mean/2 < L is a fixed point
    if mu / 2 < lower:
        prices.append(mu / 2)
        residuals.append(abs(float(d.mrd(mu / 2)) - mu / 2))
        stderr.append(0.0)
        boundary = "below_L"

    f = lambda r: float(d.mrd(r)) - r
    lo, hi = scan_bounds(d)
    plateaus: list[tuple[float, float]] = []
    positive_everywhere = False
    if hi > lo:
        scan = numerics.find_all_roots(f, lo, hi, n_seed=n_seed, tol=tol,
                                       extra_points=d.breakpoints)
        plateaus = list(scan.plateaus)
        found = []
        for root in scan.roots:
            x = root.root
            res = abs(f(x))
            se = _price_stderr(emp, x) if emp is not None else 0.0
            noise = 3 * float(emp.mrd_stderr(x)) if emp is not None else 0.0
            if res <= RESIDUAL_TOL * (1 + x) or res <= noise:
                found.append((x, res, se))
        if emp is not None and found:
            found = _merge_clusters(found)
        for x, res, se in found:
            prices.append(x)
            residuals.append(res)
            stderr.append(se)
        if found and boundary == "none":
            boundary = "interior"
        xs = np.linspace(lo, hi, 65)
        positive_everywhere = not found and not plateaus and all(f(x) > 0 for x in xs)

    # mean/2 == L: the fixed point sits exactly on the lower support edge
    if not prices and not plateaus and abs(mu / 2 - lower) <= 1e-9 * (1 + lower) \
            and f(lower) <= RESIDUAL_TOL * (1 + lower):
        prices.append(lower)
        residuals.append(abs(f(lower)))
        stderr.append(0.0)
        boundary = "interior"

    suff = _sufficiency(d)
    grid_argmax = None
    if positive_everywhere:
        if not suff.second_moment_finite:
            raise NoFiniteOptimum(
                "expected profit increases up to the truncation point: m(r) > r on "
                f"[{lo:.6g}, {hi:.6g}] and the second moment of demand is infinite, so the "
                "profit diverges as r grows and no finite optimal price exists")
        notes.append("m(r) > r on the whole scan range; optimum lies beyond truncation")
    if plateaus:
        notes.append("m(r) = r on an interval: expected profit is flat there")
        if not suff.second_moment_finite:
            warnings.warn("infinite second moment with a flat profit stretch; every price on "
                          "the plateau is optimal", RuntimeWarning, stacklevel=2)
    if not prices:
        grid = np.geomspace(lo, hi, 2048) if hi > lo else np.array([lo])
        grid_argmax = float(grid[int(np.argmax(expected_profit(d, grid)))])

    order = np.argsort(prices)
    prices = [prices[i] for i in order]
    residuals = [residuals[i] for i in order]
    stderr = [stderr[i] for i in order]
    unique = len(prices) == 1 and not plateaus
    if suff.holds and not unique:
        notes.append("sufficiency holds but the scan found several candidates: grid artifact")
    return EquilibriumResult(
        prices=tuple(float(p) for p in prices),
        plateaus=tuple((float(a), float(b)) for a, b in plateaus),
        unique=unique,
        sufficiency=suff,
        boundary_case=boundary,
        residuals=tuple(float(v) for v in residuals),
        stderr=tuple(float(v) for v in stderr),
        flat_optimum=bool(plateaus),
        grid_argmax=grid_argmax,
        notes=tuple(notes),
    )


def _merge_clusters(found):
    """Collapse sawtooth crossings of an empirical MRD into one price per cluster."""
    out = []
    cluster = [found[0]]
    for item in found[1:]:
        width = max(6 * cluster[-1][2], 1e-9 * (1 + item[0]))
        if item[0] - cluster[-1][0] <= width:
            cluster.append(item)
        else:
            out.append(cluster)
            cluster = [item]
    out.append(cluster)
    merged = []
    for c in out:
        x = float(np.median([v[0] for v in c]))
        merged.append((x, min(v[1] for v in c), max(v[2] for v in c)))
    return merged


@dataclass(frozen=True)
class UnimodalityReport:
    pattern: str
    sign_changes: tuple[float, ...]
    unimodal: bool
    plateaus: tuple[tuple[float, float], ...]
    plateau_invariant: tuple[tuple[float, float, float, bool], ...]

    def as_dict(self) -> dict:
        return {
            "pattern": self.pattern,
            "sign_changes": list(self.sign_changes),
            "unimodal": self.unimodal,
            "plateaus": [list(p) for p in self.plateaus],
            "plateau_invariant": [
                {"lo": a, "hi": b, "max_rel_dev": dev, "constant": ok}
                for a, b, dev, ok in self.plateau_invariant
            ],
        }


def unimodality_report(d: DemandDistribution, grid=None, tol: float = 1e-8) -> UnimodalityReport:
    """Sign pattern of ``m(r) - r``, the sign of the profit derivative.

    A single ``+`` to ``-`` change means a unimodal profit.  Zero runs (at
    least four consecutive points) are plateaus; on each, ``sf(r) * r**2``
    must be constant, which is what ``m(r) = r`` on an interval forces.
    """
    if grid is None:
        _, hi = scan_bounds(d)
        start = max(1e-6 * d.mean, 1e-12)
        grid = np.unique(np.concatenate([
            np.geomspace(start, hi, 2048),
            [b for b in d.breakpoints if start < b < hi]]))
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or len(g) < 16 or np.any(np.diff(g) <= 0):
        raise ValueError("grid must be strictly increasing with at least 16 points")
    f = np.asarray(d.mrd(g), dtype=float) - g
    sign = np.where(np.abs(f) <= tol * (1 + np.abs(g)), 0, np.sign(f)).astype(int)

    # runs of equal sign
    runs = []
    start = 0
    for i in range(1, len(g) + 1):
        if i == len(g) or sign[i] != sign[start]:
            runs.append((int(sign[start]), start, i - 1))
            start = i
    plateaus = []
    cleaned = []
    for s, a, b in runs:
        if s == 0 and b - a >= 3:
            plateaus.append((float(g[a]), float(g[b])))
            cleaned.append(("0", a, b))
        elif s != 0:
            sym = "+" if s > 0 else "-"
            if cleaned and cleaned[-1][0] == sym:
                cleaned[-1] = (sym, cleaned[-1][1], b)
            else:
                cleaned.append((sym, a, b))
    pattern = "".join(c[0] for c in cleaned)

    changes = []
    for (s1, _, b1), (s2, a2, _) in zip(cleaned, cleaned[1:]):
        if {s1, s2} == {"+", "-"}:
            try:
                changes.append(numerics.find_root_bracketed(
                    lambda r: float(d.mrd(r)) - r, g[b1], g[a2]).root)
            except numerics.BracketError:
                changes.append(float((g[b1] + g[a2]) / 2))

    invariant = []
    for a, b in plateaus:
        mask = (g >= a) & (g <= b)
        v = np.asarray(d.sf(g[mask]), dtype=float) * g[mask] ** 2
        dev = float(np.max(np.abs(v - v[0])) / abs(v[0])) if v[0] != 0 else math.inf
        invariant.append((a, b, dev, dev <= tol))

    return UnimodalityReport(
        pattern=pattern,
        sign_changes=tuple(float(c) for c in changes),
        unimodal=pattern in ("+-", "+0-"),
        plateaus=tuple(plateaus),
        plateau_invariant=tuple(invariant),
    )
