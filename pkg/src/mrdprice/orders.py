"""Stochastic-order checks, demand transformations and the comparative-statics harness.

Every order check builds a gap function ``D`` that is nonnegative wherever the
defining comparison favours ``X1 <= X2``:

=====  ==============================================
st     ``sf2(r) - sf1(r)``
hr     ``h1(r) - h2(r)``
mrl    ``m2(r) - m1(r)``
cx     ``tail2(r) - tail1(r)`` (equal means required)
ew     ``tail2(Q2(p)) - tail1(Q1(p))``
disp   increments of ``Q2(p) - Q1(p)`` over a p-grid
=====  ==============================================

Verdicts are certified on a grid only: "holds" means no violation beyond the
tolerance at any grid point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
from scipy import optimize

from . import distributions as dist
from .distributions import (Affine, ConvexFunction, ConvexMap, Convolution, DemandDistribution,
                            Deterministic, Mixture, PiecewiseLinearCdf, classify, from_spec)
from .equilibrium import EquilibriumResult, optimal_price

__all__ = [
    "ORDERS",
    "OrderVerdict",
    "TransformNode",
    "StaticsRow",
    "CvReport",
    "check_order",
    "apply_transform",
    "mean_preserving",
    "statics_suite",
    "cv_comparison",
    "order_grid",
]

ORDERS = ("st", "hr", "mrl", "cx", "disp", "ew")
GRID_POINTS = 512
GAP_TOL = 1e-9
CROSSING_TOL = 1e-8
PRICE_TOL = 1e-7
MEAN_TOL = 1e-6


@dataclass(frozen=True)
class OrderVerdict:
    order: str
    holds_1_le_2: bool
    holds_2_le_1: bool
    crossings: tuple[float, ...]
    grid: dict
    margin: float
    notes: tuple[str, ...] = ()

    @property
    def holds(self) -> bool:
        return self.holds_1_le_2 or self.holds_2_le_1

    def as_dict(self) -> dict:
        return {"order": self.order, "holds_1_le_2": self.holds_1_le_2,
                "holds_2_le_1": self.holds_2_le_1, "crossings": list(self.crossings),
                "grid": self.grid, "margin": self.margin, "notes": list(self.notes),
                "certification": "grid"}


def _upper(d: DemandDistribution, q: float = 1 - 1e-6) -> float:
    hi = d.support.upper
    return hi if math.isfinite(hi) else float(d.quantile(q))


def order_grid(d1: DemandDistribution, d2: DemandDistribution, n: int = GRID_POINTS) -> np.ndarray:
    """r-grid covering both supports: linear and geometric points plus knots."""
    if n < GRID_POINTS:
        raise ValueError(f"order grids need at least {GRID_POINTS} points")
    lo = min(d1.support.lower, d2.support.lower,
             float(d1.quantile(1e-6)), float(d2.quantile(1e-6)))
    hi = max(_upper(d1), _upper(d2))
    if not hi > lo:
        hi = lo + 1.0
    pts = [np.linspace(lo, hi, n)]
    start = max(lo, 1e-9 * hi)
    if start < hi:
        pts.append(np.geomspace(start, hi, n))
    knots = [b for b in (*d1.breakpoints, *d2.breakpoints) if lo <= b <= hi]
    pts.append(np.array(knots, dtype=float))
    return np.unique(np.concatenate(pts))


def _p_grid(n: int) -> np.ndarray:
    return np.linspace(1e-4, 1 - 1e-4, n)


def _check_density(d: DemandDistribution, name: str) -> None:
    if not d.has_density:
        raise ValueError(f"hr order needs densities; {name} has none")
    if isinstance(d, PiecewiseLinearCdf) and d.has_gaps:
        raise ValueError(f"hr order undefined: {name} has zero-density gaps where the hazard "
                         "is undefined")


def _hazard(d, r):
    return np.asarray(dist.hazard(d, r), dtype=float)


def _gap_function(order: str, d1, d2):
    """Callable gap D(x) (x = r or p) for all orders except disp."""
    if order == "st":
        return lambda r: np.asarray(d2.sf(r), float) - np.asarray(d1.sf(r), float)
    if order == "hr":
        return lambda r: _hazard(d1, r) - _hazard(d2, r)
    if order == "mrl":
        return lambda r: np.asarray(d2.mrd(r), float) - np.asarray(d1.mrd(r), float)
    if order == "cx":
        return lambda r: np.asarray(d2.tail(r), float) - np.asarray(d1.tail(r), float)
    if order == "ew":
        def ew(p):
            return (np.asarray(d2.tail(d2.quantile(p)), float)
                    - np.asarray(d1.tail(d1.quantile(p)), float))
        return ew
    raise ValueError(f"unknown order {order!r}; expected one of {ORDERS}")


def _scale(order, d1, d2, x):
    if order == "st":
        return np.ones_like(x)
    if order == "hr":
        return np.maximum(np.abs(_hazard(d1, x)), np.abs(_hazard(d2, x)))
    if order == "mrl":
        return np.maximum(np.abs(np.asarray(d1.mrd(x))), np.abs(np.asarray(d2.mrd(x))))
    if order == "cx":
        return np.maximum(np.asarray(d1.tail(x)), np.asarray(d2.tail(x)))
    return np.maximum(np.asarray(d1.tail(d1.quantile(x))), np.asarray(d2.tail(d2.quantile(x))))


def _crossings(gap_fn, x: np.ndarray, sign: np.ndarray) -> list[float]:
    nz = np.nonzero(sign)[0]
    out = []
    for a, b in zip(nz, nz[1:]):
        if sign[a] != sign[b]:
            lo, hi = x[a], x[b]
            if b == a + 1 and gap_fn is not None:
                g = lambda t: float(gap_fn(t))
                try:
                    out.append(float(optimize.bisect(g, lo, hi, xtol=CROSSING_TOL)))
                    continue
                except ValueError:
                    pass
            out.append(float((lo + hi) / 2))
    return out


def check_order(order: str, d1: DemandDistribution, d2: DemandDistribution, grid=None,
                n: int = GRID_POINTS, tol: float = GAP_TOL,
                allow_unequal_means: bool = False) -> OrderVerdict:
    """Grid-certified check of ``X1 <= X2`` and ``X2 <= X1`` in the given order.

    For r-based orders ``grid`` is a grid of prices; for ``disp`` and ``ew`` it
    is a grid of probabilities in (0, 1).
    """
    order = order.lower()
    if order not in ORDERS:
        raise ValueError(f"unknown order {order!r}; expected one of {ORDERS}")
    notes: list[str] = []
    if order == "cx":
        m1, m2 = d1.mean, d2.mean
        if abs(m1 - m2) > MEAN_TOL * (1 + abs(m1)):
            if not allow_unequal_means:
                raise ValueError(f"convex order needs equal means (got {m1:.9g} and {m2:.9g})")
            notes.append("means differ: the tail comparison certifies the increasing-convex "
                         "order, not the convex order")
    if order == "hr":
        _check_density(d1, "X1")
        _check_density(d2, "X2")

    p_based = order in ("disp", "ew")
    if grid is None:
        x = _p_grid(n) if p_based else order_grid(d1, d2, n)
    else:
        x = np.asarray(grid, dtype=float)
        if x.ndim != 1 or len(x) < GRID_POINTS or np.any(np.diff(x) <= 0):
            raise ValueError(f"order grid must be strictly increasing with >= {GRID_POINTS} points")
        if p_based and (x[0] <= 0 or x[-1] >= 1):
            raise ValueError("disp / ew grids are probabilities strictly inside (0, 1)")
    if order == "hr":
        keep = (np.asarray(d1.sf(x)) > 0) & (np.asarray(d2.sf(x)) > 0)
        x = x[keep]

    if order == "disp":
        diff = np.asarray(d2.quantile(x), float) - np.asarray(d1.quantile(x), float)
        gap = np.diff(diff)
        scale = np.maximum(np.abs(np.diff(np.asarray(d1.quantile(x), float))),
                           np.abs(np.diff(np.asarray(d2.quantile(x), float))))
        xs = (x[:-1] + x[1:]) / 2
        gap_fn = None
    else:
        gap_fn = _gap_function(order, d1, d2)
        gap = np.asarray(gap_fn(x), dtype=float)
        scale = _scale(order, d1, d2, x)
        xs = x
    if np.any(np.isnan(gap)):
        raise ValueError(f"{order} gap is NaN at {xs[np.isnan(gap)][0]!r}")
    thr = tol * (1 + np.abs(scale))
    sign = np.where(np.abs(gap) <= thr, 0, np.sign(gap)).astype(int)
    holds12 = bool(np.all(sign >= 0))
    holds21 = bool(np.all(sign <= 0))
    crossings = _crossings(gap_fn, xs, sign) if not (holds12 or holds21) else []
    grid_meta = {"kind": "p" if p_based else "r", "lo": float(x[0]), "hi": float(x[-1]),
                 "points": int(len(x)), "tol": tol}
    return OrderVerdict(order, holds12, holds21, tuple(crossings), grid_meta,
                        float(np.min(gap)), tuple(notes))


# ---------------------------------------------------------------------------
# transformations
# ---------------------------------------------------------------------------

def mean_preserving(base: DemandDistribution, kappa: float) -> DemandDistribution:
    """``kappa * X + (1 - kappa) * E X``; a point mass at the mean for ``kappa = 0``."""
    if not 0 <= kappa <= 1:
        raise ValueError("kappa must lie in [0, 1]")
    mu = base.mean
    if kappa == 0:
        return Deterministic(mu)
    return Affine(base, (1 - kappa) * mu, kappa, kind="mean_preserving", kappa=kappa)


@dataclass(frozen=True)
class TransformNode:
    """One transformation applied to one or two operands.

    ``kind`` is ``scale`` (param ``c``), ``convolve`` (second operand ``Z``),
    ``mixture`` (param ``p``, second operand), ``convex_map`` (param ``phi``, a
    :class:`ConvexFunction`) or ``mean_preserving`` (param ``kappa``).
    """

    kind: str
    operands: tuple[DemandDistribution, ...]
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        arity = {"scale": 1, "convex_map": 1, "mean_preserving": 1, "convolve": 2, "mixture": 2}
        if self.kind not in arity:
            raise ValueError(f"unknown transform {self.kind!r}")
        if len(self.operands) != arity[self.kind]:
            raise ValueError(f"{self.kind} takes {arity[self.kind]} operand(s)")
        if self.kind == "scale" and not self.params.get("c", 0) > 0:
            raise ValueError("scale factor c must be positive")
        if self.kind == "mixture" and not 0 < self.params.get("p", -1) < 1:
            raise ValueError("mixture weight p must lie in (0, 1)")
        if self.kind == "mean_preserving" and not 0 <= self.params.get("kappa", -1) <= 1:
            raise ValueError("kappa must lie in [0, 1]")
        if self.kind == "convex_map" and not isinstance(self.params.get("phi"), ConvexFunction):
            raise ValueError("convex_map needs a whitelisted ConvexFunction as 'phi'")


def apply_transform(node: TransformNode) -> DemandDistribution:
    x = node.operands[0]
    p = node.params
    if node.kind == "scale":
        return Affine(x, 0.0, float(p["c"]), kind="scale")
    if node.kind == "mean_preserving":
        return mean_preserving(x, float(p["kappa"]))
    if node.kind == "convex_map":
        return ConvexMap(x, p["phi"])
    if node.kind == "mixture":
        return Mixture(x, node.operands[1], float(p["p"]))
    return Convolution(x, node.operands[1], method=p.get("method", "mc"),
                       n=int(p.get("n", 1_000_000)), seed=int(p.get("seed", dist.DEFAULT_SEED)),
                       grid_points=int(p.get("grid_points", 8192)))


# ---------------------------------------------------------------------------
# comparative statics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StaticsRow:
    theorem: str
    transformation: str
    hypothesis: str
    price_relation: str
    status: str  # PASS | FAIL | hypothesis_failed | inconclusive
    prices: dict
    hypotheses: dict
    failed_premise: str | None = None
    notes: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {"theorem": self.theorem, "transformation": self.transformation,
                "hypothesis": self.hypothesis, "price_relation": self.price_relation,
                "status": self.status, "prices": self.prices, "hypotheses": self.hypotheses,
                "failed_premise": self.failed_premise, "notes": list(self.notes)}


@dataclass(frozen=True)
class _PriceSet:
    values: tuple[float, ...]
    stderr: float

    @property
    def lo(self):
        return min(self.values)

    @property
    def hi(self):
        return max(self.values)


def _price_set(d: DemandDistribution) -> _PriceSet:
    res: EquilibriumResult = optimal_price(d)
    vals = list(res.prices)
    for a, b in res.plateaus:
        vals.extend([a, b])
    if not vals:
        raise ValueError(f"no equilibrium price found for {d!r}")
    se = max(res.stderr) if res.stderr else 0.0
    return _PriceSet(tuple(vals), se)


def _le(a: _PriceSet, b: _PriceSet, tol: float = PRICE_TOL) -> bool:
    """Setwise ``a <= b``: every element of ``a`` is below every element of ``b``."""
    band = 3 * (a.stderr + b.stderr)
    return a.hi <= b.lo + tol * (1 + abs(b.lo)) + band


def _fmt(ps: _PriceSet):
    return list(ps.values) if len(ps.values) > 1 else ps.values[0]


def _regular(d: DemandDistribution) -> tuple[bool, str]:
    """Strictly DGMRD with finite second moment."""
    if not math.isfinite(d.second_moment):
        return False, "infinite second moment"
    try:
        rep = classify(d)
    except (ValueError, NotImplementedError) as exc:
        return False, f"classification failed: {exc}"
    if not rep.dgmrd_strict:
        return False, "not strictly DGMRD"
    return True, ""


def _row(theorem, transformation, hypothesis, relation, hyps: dict, check, prices: dict,
         notes=()):
    failed = [k for k, v in hyps.items() if not v]
    if failed:
        return StaticsRow(theorem, transformation, hypothesis, relation, "hypothesis_failed",
                          prices, hyps, failed_premise=", ".join(failed), notes=tuple(notes))
    status = "PASS" if check() else "FAIL"
    return StaticsRow(theorem, transformation, hypothesis, relation, status, prices, hyps,
                      notes=tuple(notes))


def _dist(scn: dict, key: str, seed) -> DemandDistribution:
    if key not in scn:
        raise ValueError(f"scenario needs {key!r}")
    v = scn[key]
    return v if isinstance(v, DemandDistribution) else from_spec(v, seed=seed)


def _regular_hyps(**named) -> dict:
    out = {}
    for name, d in named.items():
        ok, why = _regular(d)
        out[f"{name} strictly DGMRD, finite second moment" + ("" if ok else f" ({why})")] = ok
    return out


def _conv_params(scn: dict) -> dict:
    return {"method": scn.get("method", "mc"), "n": int(scn.get("n", 1_000_000)),
            "seed": int(scn.get("seed", dist.DEFAULT_SEED)),
            "grid_points": int(scn.get("grid_points", 8192))}


def statics_suite(scenario: dict) -> list[StaticsRow]:
    """Run one comparative-statics scenario and return one row per checked price relation.

    ``scenario["theorem"]`` is one of ``lemma, size_i, size_ii, transform_i,
    transform_ii, transform_iii, var_i, var_ii, mean_preserving, st, cx, cv``.
    Operands are distribution objects or JSON specs.
    """
    th = scenario.get("theorem")
    seed = scenario.get("seed")
    if th == "lemma":
        x1, x2 = _dist(scenario, "X1", seed), _dist(scenario, "X2", seed)
        hyps = {"X1 <=mrl X2": check_order("mrl", x1, x2).holds_1_le_2, **_regular_hyps(X1=x1, X2=x2)}
        r1, r2 = _price_set(x1), _price_set(x2)
        return [_row(th, "X1 <=mrl X2", "X1, X2 strictly DGMRD", "r*_1 <= r*_2", hyps,
                     lambda: _le(r1, r2), {"r*_1": _fmt(r1), "r*_2": _fmt(r2)})]

    if th == "size_i":
        x, c = _dist(scenario, "X", seed), float(scenario["c"])
        cx = apply_transform(TransformNode("scale", (x,), {"c": c}))
        hyps = {"c >= 1": c >= 1, **_regular_hyps(X=x)}
        r1, r2 = _price_set(x), _price_set(cx)
        return [_row(th, f"cX, c={c:g}", "c >= 1", "r*_X <= r*_{cX}", hyps,
                     lambda: _le(r1, r2), {"r*_X": _fmt(r1), "r*_cX": _fmt(r2)})]

    if th == "size_ii":
        x, z = _dist(scenario, "X", seed), _dist(scenario, "Z", seed)
        xz = apply_transform(TransformNode("convolve", (x, z), _conv_params(scenario)))
        hyps = {"X DMRD": classify(x).dmrd,
                "Z finite second moment": math.isfinite(z.second_moment),
                **_regular_hyps(X=x)}
        r1, r2 = _price_set(x), _price_set(xz)
        return [_row(th, "X + Z", "X DMRD, Z >= 0 with E Z^2 < inf", "r*_X <= r*_{X+Z}", hyps,
                     lambda: _le(r1, r2), {"r*_X": _fmt(r1), "r*_X+Z": _fmt(r2)},
                     notes=(f"X+Z realised by {xz.method} convolution",))]

    if th in ("transform_i", "transform_ii", "transform_iii"):
        x1, x2 = _dist(scenario, "X1", seed), _dist(scenario, "X2", seed)
        hyps = {"X1 <=mrl X2": check_order("mrl", x1, x2).holds_1_le_2, **_regular_hyps(X1=x1, X2=x2)}
        if th == "transform_i":
            z = _dist(scenario, "Z", seed)
            try:
                z_ifr = bool(classify(z).ifr)
            except ValueError:
                z_ifr = False
            hyps["Z IFR"] = z_ifr
            cp = _conv_params(scenario)
            y1 = apply_transform(TransformNode("convolve", (x1, z), cp))
            y2 = apply_transform(TransformNode("convolve", (x2, z), cp))
            r1, r2 = _price_set(y1), _price_set(y2)
            return [_row(th, "X1 <=mrl X2", "Z >= 0, IFR, independent", "r*_{X1+Z} <= r*_{X2+Z}",
                         hyps, lambda: _le(r1, r2), {"r*_X1+Z": _fmt(r1), "r*_X2+Z": _fmt(r2)})]
        if th == "transform_ii":
            spec = dict(scenario.get("phi", {"phi": "power", "gamma": 2.0}))
            name = spec.pop("phi")
            phi = getattr(ConvexFunction, name)(**{k: float(v) for k, v in spec.items()})
            y1 = apply_transform(TransformNode("convex_map", (x1,), {"phi": phi}))
            y2 = apply_transform(TransformNode("convex_map", (x2,), {"phi": phi}))
            r1, r2 = _price_set(y1), _price_set(y2)
            return [_row(th, "X1 <=mrl X2", f"phi={name} increasing, convex",
                         "r*_{phi(X1)} <= r*_{phi(X2)}", hyps, lambda: _le(r1, r2),
                         {"r*_phi(X1)": _fmt(r1), "r*_phi(X2)": _fmt(r2)})]
        p = float(scenario["p"])
        xp = apply_transform(TransformNode("mixture", (x1, x2), {"p": p}))
        r1, rp, r2 = _price_set(x1), _price_set(xp), _price_set(x2)
        return [_row(th, "X1 <=mrl X2", f"X_p = pF1 + (1-p)F2, p={p:g}",
                     "r*_1 <= r*_{X_p} <= r*_2", hyps, lambda: _le(r1, rp) and _le(rp, r2),
                     {"r*_1": _fmt(r1), "r*_Xp": _fmt(rp), "r*_2": _fmt(r2)})]

    if th in ("var_i", "var_ii"):
        x1, x2 = _dist(scenario, "X1", seed), _dist(scenario, "X2", seed)
        c1, c2 = classify(x1), classify(x2)
        hyps = _regular_hyps(X1=x1, X2=x2)
        if th == "var_i":
            hyps["X1 <=ew X2"] = check_order("ew", x1, x2).holds_1_le_2
            hyps["L1 <= L2"] = x1.support.lower <= x2.support.lower
            hyps["X1 or X2 DMRD"] = bool(c1.dmrd or c2.dmrd)
            label, extra = "X1 <=ew X2", "L1 <= L2 and X1 or X2 DMRD"
        else:
            hyps["X1 <=disp X2"] = check_order("disp", x1, x2).holds_1_le_2
            hyps["X1 or X2 IFR"] = bool(c1.ifr or c2.ifr)
            label, extra = "X1 <=disp X2", "X1 or X2 IFR"
        r1, r2 = _price_set(x1), _price_set(x2)
        return [_row(th, label, extra, "r*_1 <= r*_2", hyps, lambda: _le(r1, r2),
                     {"r*_1": _fmt(r1), "r*_2": _fmt(r2)})]

    if th == "mean_preserving":
        x = _dist(scenario, "X", seed)
        kappas = scenario.get("kappa", [0.0, 0.25, 0.5, 0.75, 1.0])
        kappas = [float(k) for k in (kappas if isinstance(kappas, (list, tuple)) else [kappas])]
        try:
            dgmrd = bool(classify(x).dgmrd)
        except ValueError:
            dgmrd = False
        base = _price_set(x)
        rows = []
        prev = None
        for k in kappas:
            hyps = {"X DGMRD": dgmrd, "X finite variance": math.isfinite(x.second_moment),
                    "kappa in [0, 1]": 0 <= k <= 1}
            if not hyps["kappa in [0, 1]"]:
                rows.append(StaticsRow(th, f"X_k, k={k:g}", "kappa in [0,1]", "r*_k <= r*",
                                       "hypothesis_failed", {}, hyps, "kappa in [0, 1]"))
                continue
            rk = _price_set(mean_preserving(x, k))
            monotone = prev is None or _le(prev, rk)
            rows.append(_row(th, f"X_k = kX + (1-k)EX, k={k:g}", "kappa in [0,1]", "r*_k <= r*",
                             hyps, lambda rk=rk, monotone=monotone: _le(rk, base) and monotone,
                             {"r*_k": _fmt(rk), "r*": _fmt(base)},
                             notes=("checked also that r*_k is nondecreasing in k",)))
            prev = rk
        return rows

    if th in ("st", "cx"):
        x1, x2 = _dist(scenario, "X1", seed), _dist(scenario, "X2", seed)
        v = check_order(th, x1, x2, allow_unequal_means=bool(scenario.get("allow_unequal_means")))
        r1, r2 = _price_set(x1), _price_set(x2)
        rel = "r*_1 <= r*_2" if _le(r1, r2) else ("r*_1 >= r*_2" if _le(r2, r1) else "unordered")
        return [StaticsRow(th, f"X1 <={th} X2", "", "inconclusive", "inconclusive",
                           {"r*_1": _fmt(r1), "r*_2": _fmt(r2)},
                           {f"X1 <={th} X2": v.holds_1_le_2, f"X2 <={th} X1": v.holds_2_le_1},
                           notes=(f"observed {rel}",) + v.notes)]

    if th == "cv":
        x = _dist(scenario, "X", seed)
        pairs = scenario.get("pairs", [[1.0, 1.0], [0.0, 3.0]])
        rep = cv_comparison(x, [tuple(map(float, p)) for p in pairs])
        return [StaticsRow(th, "X_i = delta_i + lambda_i X", "CV_1 <= CV_2", "inconclusive",
                           "inconclusive",
                           {f"r*_{i + 1}": c["price"] for i, c in enumerate(rep.children)},
                           {f"CV_{i + 1}": c["cv"] for i, c in enumerate(rep.children)},
                           notes=(f"CV rule predicts the price order: {rep.cv_predicts_prices}",))]

    raise ValueError(f"unknown theorem {th!r}")


@dataclass(frozen=True)
class CvReport:
    children: tuple[dict, ...]
    cv_predicts_prices: bool
    violations: tuple[tuple[int, int], ...]

    def as_dict(self) -> dict:
        return {"children": list(self.children), "cv_predicts_prices": self.cv_predicts_prices,
                "violations": [list(v) for v in self.violations]}


def cv_comparison(x: DemandDistribution, pairs: Sequence[tuple[float, float]]) -> CvReport:
    """Coefficient of variation versus optimal price for affine children ``delta + lam * X``.

    The CV rule says a lower CV comes with a higher price; ``violations``
    lists child index pairs where the computed prices contradict it.
    """
    children = []
    for delta, lam in pairs:
        if delta < 0 or not lam > 0:
            raise ValueError("affine children need delta >= 0 and lambda > 0")
        child = Affine(x, delta, lam)
        var = child.second_moment - child.mean**2
        cv = math.sqrt(max(var, 0.0)) / child.mean
        res = optimal_price(child)
        price = res.prices[0] if res.unique else list(res.prices)
        children.append({"delta": delta, "lambda": lam, "mean": child.mean, "cv": cv,
                         "price": price})
    bad = []
    for i in range(len(children)):
        for j in range(len(children)):
            a, b = children[i], children[j]
            if a["cv"] < b["cv"] - 1e-12 and isinstance(a["price"], float) \
                    and isinstance(b["price"], float) and not a["price"] > b["price"]:
                bad.append((i, j))
    return CvReport(tuple(children), not bad, tuple(bad))


def describe_scenario(scenario: dict) -> dict[str, Any]:
    return {k: (v.to_spec() if isinstance(v, DemandDistribution) else v) for k, v in scenario.items()}
