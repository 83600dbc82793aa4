"""Quadrature, bracketed root finding and grid diagnostics.

Everything here is duck-typed on the distribution side: a "distribution" is
anything exposing ``sf``, ``quantile``, ``support``, ``mean`` and optionally
``tail`` / ``breakpoints`` / ``tail_beyond``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize

__all__ = [
    "QuadratureSettings",
    "QuadratureError",
    "RootResult",
    "RootScan",
    "BracketError",
    "MonotoneResult",
    "tail_integral",
    "quad_tail",
    "find_root_bracketed",
    "find_all_roots",
    "monotone_check",
    "default_grid",
    "ROOT_TOL",
    "PLATEAU_TOL",
]

ROOT_TOL = 1e-10
PLATEAU_TOL = 1e-8
TRUNCATION_Q = 1.0 - 1e-10


@dataclass(frozen=True)
class QuadratureSettings:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    max_subdivisions: int = 2000

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 16:
            raise ValueError("max_subdivisions must be at least 16")


DEFAULT_QUAD = QuadratureSettings()


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message: str, estimate: float, error_bound: float) -> None:
        super().__init__(f"{message} (estimate={estimate!r}, error bound={error_bound!r})")
        self.estimate = estimate
        self.error_bound = error_bound


class BracketError(ValueError):
    """No sign change on the supplied bracket; the caller must rebracket."""


@dataclass(frozen=True)
class RootResult:
    root: float
    residual: float
    bracket: tuple[float, float]
    iterations: int
    converged: bool


@dataclass(frozen=True)
class RootScan:
    """All sign-change roots of a function on an interval plus flat stretches."""

    roots: list[RootResult] = field(default_factory=list)
    plateaus: list[tuple[float, float]] = field(default_factory=list)

    @property
    def values(self) -> list[float]:
        return [r.root for r in self.roots]


@dataclass(frozen=True)
class MonotoneResult:
    verdict: str  # increasing | decreasing | constant | non-monotone
    worst_violation: tuple[float, float]
    strict: bool

    @property
    def nonincreasing(self) -> bool:
        return self.verdict in ("decreasing", "constant")

    @property
    def nondecreasing(self) -> bool:
        return self.verdict in ("increasing", "constant")


# -- quadrature ---------------------------------------------------------------

def _quad(func: Callable[[float], float], a: float, b: float, points, settings: QuadratureSettings):
    kwargs = dict(epsabs=settings.abs_tol, epsrel=settings.rel_tol,
                  limit=settings.max_subdivisions, full_output=1)
    if points is not None and math.isfinite(b):
        pts = [p for p in points if a < p < b]
        if pts:
            kwargs["points"] = pts
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(func, a, b, **kwargs)
    value, err = out[0], out[1]
    ier = 0
    if len(out) > 3:
        # a 4th element (message) is only returned when ier != 0
        ier = 1
    if ier and err > max(settings.abs_tol, settings.rel_tol * abs(value)) * 100:
        raise QuadratureError(f"quadrature on [{a}, {b}] did not converge", value, err)
    return value, err


def quad_tail(d, r: float, settings: QuadratureSettings = DEFAULT_QUAD) -> float:
    """Integral of the survival function of ``d`` over ``[r, inf)`` by QUADPACK.

    The range is cut at the ``1 - 1e-10`` quantile; the remainder uses the
    distribution's analytic ``tail_beyond`` when it has one and a second
    (infinite-range) quadrature otherwise.
    """
    r = float(r)
    lower, upper = d.support
    if r >= upper:
        return 0.0
    head = 0.0
    if r < lower:
        # survival is identically 1 below the support
        head = lower - r
        r = lower
    cut = upper if math.isfinite(upper) else float(d.quantile(TRUNCATION_Q))
    cut = max(cut, r)
    points = getattr(d, "breakpoints", ())
    body = 0.0
    if cut > r:
        body, _ = _quad(lambda u: float(d.sf(u)), r, cut, points, settings)
    rest = 0.0
    if not math.isfinite(upper):
        beyond = getattr(d, "tail_beyond", None)
        closed = beyond(cut) if beyond is not None else None
        if closed is not None:
            rest = closed
        else:
            rest, _ = _quad(lambda u: float(d.sf(u)), cut, math.inf, None, settings)
    return head + body + rest


def tail_integral(d, r, method: str = "auto", settings: QuadratureSettings = DEFAULT_QUAD):
    """Integral of the survival function from ``r`` to infinity, ``E(X - r)_+``.

    ``method="auto"`` uses the distribution's own evaluator (closed form where
    the family has one); ``method="quad"`` forces adaptive quadrature on the
    survival function, which is what the tests use as an independent route.
    Accepts scalars or arrays.
    """
    if method not in ("auto", "quad"):
        raise ValueError(f"unknown method {method!r}")
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0):
        raise ValueError("tail_integral requires r >= 0")
    if method == "auto":
        return d.tail(r)
    out = np.array([quad_tail(d, x, settings) for x in arr.ravel()]).reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


# -- roots --------------------------------------------------------------------

def find_root_bracketed(f: Callable[[float], float], lo: float, hi: float,
                        tol: float = ROOT_TOL, maxiter: int = 200) -> RootResult:
    """Brent's method on ``[lo, hi]``.

    Raises
    ------
    BracketError
        If ``f(lo)`` and ``f(hi)`` share a strict sign.
    """
    lo, hi = float(lo), float(hi)
    if lo > hi:
        lo, hi = hi, lo
    flo, fhi = float(f(lo)), float(f(hi))
    if math.isnan(flo) or math.isnan(fhi):
        raise ValueError(f"f is NaN at a bracket end ({lo}, {hi})")
    if flo == 0.0:
        return RootResult(lo, 0.0, (lo, hi), 0, True)
    if fhi == 0.0:
        return RootResult(hi, 0.0, (lo, hi), 0, True)
    if flo * fhi > 0:
        raise BracketError(
            f"no sign change on [{lo}, {hi}] (f={flo:.3g}, {fhi:.3g}); rebracket")
    root, info = optimize.brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps,
                                 maxiter=maxiter, full_output=True, disp=False)
    return RootResult(float(root), float(f(root)), (lo, hi), int(info.iterations),
                      bool(info.converged))


def _seed_points(lo: float, hi: float, n_seed: int, spacing: str) -> np.ndarray:
    if spacing == "auto":
        spacing = "geometric" if lo > 0 and hi / lo > 100 else "linear"
    if spacing == "geometric":
        if lo <= 0:
            raise ValueError("geometric spacing needs lo > 0")
        return np.geomspace(lo, hi, n_seed + 1)
    return np.linspace(lo, hi, n_seed + 1)


def find_all_roots(f: Callable[[float], float], lo: float, hi: float, n_seed: int = 256,
                   tol: float = ROOT_TOL, plateau_tol: float = PLATEAU_TOL,
                   spacing: str = "auto", extra_points: Sequence[float] = ()) -> RootScan:
    """Scan ``n_seed`` subintervals of ``[lo, hi]`` for sign changes and refine each.

    Stretches where ``|f(x)| <= plateau_tol * (1 + |x|)`` holds on at least
    three consecutive subintervals are returned as plateaus instead of roots;
    sign flips inside a plateau are numerical noise and are dropped.
    """
    if n_seed < 32:
        raise ValueError("n_seed must be at least 32")
    if not hi > lo:
        return RootScan()
    xs = _seed_points(lo, hi, n_seed, spacing)
    if len(extra_points):
        extra = [p for p in extra_points if lo < p < hi]
        xs = np.unique(np.concatenate([xs, extra]))
    ys = np.array([float(f(x)) for x in xs])
    bad = np.isnan(ys)
    if bad.any():
        raise ValueError(f"f is NaN at r={xs[bad][0]!r}")

    near = np.abs(ys) <= plateau_tol * (1.0 + np.abs(xs))
    in_plateau = np.zeros_like(near)
    plateaus: list[tuple[float, float]] = []
    i = 0
    while i < len(xs):
        if near[i]:
            j = i
            while j + 1 < len(xs) and near[j + 1]:
                j += 1
            if j - i >= 3:
                plateaus.append((float(xs[i]), float(xs[j])))
                in_plateau[i:j + 1] = True
            i = j + 1
        else:
            i += 1

    roots: list[RootResult] = []
    for k in range(len(xs)):
        if in_plateau[k]:
            continue
        if ys[k] == 0.0:
            roots.append(RootResult(float(xs[k]), 0.0, (float(xs[k]), float(xs[k])), 0, True))
            continue
        if k + 1 < len(xs) and not in_plateau[k + 1] and ys[k + 1] != 0.0 \
                and ys[k] * ys[k + 1] < 0:
            roots.append(find_root_bracketed(f, xs[k], xs[k + 1], tol))

    roots.sort(key=lambda r: r.root)
    distinct: list[RootResult] = []
    for r in roots:
        if distinct and abs(r.root - distinct[-1].root) <= 10 * tol * (1 + abs(r.root)):
            continue
        distinct.append(r)
    return RootScan(distinct, plateaus)


# -- grids and monotonicity -----------------------------------------------------

def monotone_check(f, grid, tol: float = 1e-9) -> MonotoneResult:
    """Classify the monotonicity of ``f`` sampled on ``grid``.

    ``f`` may be a callable or an array of values already sampled on ``grid``.
    A step counts as "not increasing" when ``diff <= tol * (1 + |value|)``.
    """
    xs = np.asarray(grid, dtype=float)
    if xs.ndim != 1 or len(xs) < 16:
        raise ValueError("monotone_check needs a 1-d grid of at least 16 points")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("grid must be strictly increasing")
    if callable(f):
        ys = np.asarray(f(xs), dtype=float)
        if ys.shape != xs.shape:
            ys = np.array([float(f(x)) for x in xs])
    else:
        ys = np.asarray(f, dtype=float)
    nan = np.isnan(ys)
    if nan.any():
        raise ValueError(f"NaN sample at r={xs[nan][0]!r}")

    d = np.diff(ys)
    scale = tol * (1.0 + np.maximum(np.abs(ys[:-1]), np.abs(ys[1:])))
    up = d > scale
    down = d < -scale
    if not up.any() and not down.any():
        verdict, strict = "constant", False
    elif not up.any():
        verdict, strict = "decreasing", bool(down.all())
    elif not down.any():
        verdict, strict = "increasing", bool(up.all())
    else:
        verdict, strict = "non-monotone", False

    # worst step against the dominant direction
    if verdict in ("decreasing", "constant"):
        k = int(np.argmax(d))
    elif verdict == "increasing":
        k = int(np.argmin(d))
    else:
        k = int(np.argmax(d))
    return MonotoneResult(verdict, (float(xs[k]), float(d[k])), strict)


def default_grid(d, n: int = 512, lo_q: float = 1e-6, hi_q: float = 1 - 1e-6) -> np.ndarray:
    """Geometric grid between two quantiles of ``d``, strictly inside the support."""
    lower, upper = d.support
    lo = float(d.quantile(lo_q))
    hi = float(d.quantile(hi_q))
    lo = max(lo, 1e-12)
    if math.isfinite(upper):
        hi = min(hi, upper * (1 - 1e-9))
    if not hi > lo:
        raise ValueError("distribution too concentrated for a grid")
    return np.geomspace(lo, hi, n)
