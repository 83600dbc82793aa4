"""Nonnegative demand distributions and their mean-residual-demand evaluators.

Every family exposes the same small surface (``cdf``, ``sf``, ``pdf``,
``quantile``, ``tail``, ``mean``, ``second_moment``, ``support``, ``sample``)
and is immutable after construction.  ``tail(r)`` is the integral of the
survival function over ``[r, inf)``, i.e. ``E(X - r)_+``; families with a
closed form override it, the rest fall back to adaptive quadrature.

The module-level functions (:func:`mrd`, :func:`gmrd`, :func:`hazard`, ...)
are thin, vectorised wrappers that accept any of these objects.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

import numpy as np
from scipy import optimize, special, stats

from . import numerics
from ._rng import DEFAULT_SEED, make_rng

__all__ = [
    "DemandDistribution",
    "Exponential",
    "Pareto",
    "GeneralizedPareto",
    "Kumaraswamy",
    "Uniform",
    "Gamma",
    "Lognormal",
    "Normal",
    "PiecewiseLinearCdf",
    "Deterministic",
    "Affine",
    "Mixture",
    "ConvexFunction",
    "ConvexMap",
    "Empirical",
    "Convolution",
    "SupportBounds",
    "MrdProfile",
    "ClassificationReport",
    "cdf",
    "survival",
    "mean",
    "second_moment",
    "mrd",
    "gmrd",
    "elasticity",
    "hazard",
    "gfr",
    "classify",
    "from_spec",
    "to_spec",
]

UNDERFLOW = 1e-300
MONOTONE_TOL = 1e-9


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def _arr(r) -> np.ndarray:
    return np.asarray(r, dtype=float)


@dataclass(frozen=True)
class SupportBounds:
    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not 0 <= self.lower <= self.upper:
            raise ValueError(f"invalid support [{self.lower}, {self.upper}]")

    def __iter__(self):
        return iter((self.lower, self.upper))

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.upper)


class DemandDistribution:
    """Base class for nonnegative demand laws.

    Subclasses implement ``sf`` and ``quantile`` at minimum; everything else
    has a generic fallback.
    """

    has_density = True
    breakpoints: tuple[float, ...] = ()

    # -- required ---------------------------------------------------------
    @property
    def support(self) -> SupportBounds:
        raise NotImplementedError

    def sf(self, r):
        raise NotImplementedError

    def quantile(self, p):
        raise NotImplementedError

    # -- generic fallbacks --------------------------------------------------
    def cdf(self, r):
        return _out(1.0 - _arr(self.sf(r)))

    def pdf(self, r):
        raise NotImplementedError(f"{type(self).__name__} has no density")

    @property
    def mean(self) -> float:
        return float(self.tail(0.0))

    @property
    def second_moment(self) -> float:
        # E X^2 = 2 * int_0^inf u sf(u) du
        lower, upper = self.support
        cut = upper if math.isfinite(upper) else float(self.quantile(numerics.TRUNCATION_Q))
        body, _ = numerics._quad(lambda u: 2 * u * float(self.sf(u)), 0.0, cut,
                                 self.breakpoints, numerics.DEFAULT_QUAD)
        if math.isfinite(upper):
            return body
        try:
            rest, _ = numerics._quad(lambda u: 2 * u * float(self.sf(u)), cut, math.inf,
                                     None, numerics.DEFAULT_QUAD)
        except numerics.QuadratureError:
            return math.inf
        return body + rest

    def tail(self, r):
        r = _arr(r)
        vals = [numerics.quad_tail(self, x) for x in r.ravel()]
        return _out(np.array(vals).reshape(r.shape))

    def tail_beyond(self, cut: float) -> float | None:
        return None

    def mrd(self, r):
        """Mean residual demand ``E(X - r | X > r)``; zero at and beyond ``H``."""
        r = _arr(r)
        s = _arr(self.sf(r))
        ok = (s > UNDERFLOW) & (r < self.support.upper)
        out = np.zeros_like(r, dtype=float)
        if np.any(ok):
            t = _arr(self.tail(r[ok]) if r.ndim else self.tail(float(r)))
            out[ok] = t / s[ok]
        return _out(out)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        u = rng.random(n)
        return np.asarray(self.quantile(u), dtype=float)

    def to_spec(self) -> dict:
        raise NotImplementedError

    def __repr__(self) -> str:  # dataclass subclasses override
        return f"{type(self).__name__}()"


# ---------------------------------------------------------------------------
# parametric families
# ---------------------------------------------------------------------------

@dataclass(frozen=True, repr=True)
class Exponential(DemandDistribution):
    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("Exponential rate must be positive")

    @property
    def support(self):
        return SupportBounds(0.0, math.inf)

    def sf(self, r):
        r = _arr(r)
        return _out(np.where(r < 0, 1.0, np.exp(-self.rate * np.maximum(r, 0.0))))

    def pdf(self, r):
        r = _arr(r)
        return _out(np.where(r < 0, 0.0, self.rate * np.exp(-self.rate * np.maximum(r, 0.0))))

    def quantile(self, p):
        return _out(-np.log1p(-_arr(p)) / self.rate)

    def tail(self, r):
        r = _arr(r)
        return _out(np.where(r < 0, -r + 1 / self.rate, np.exp(-self.rate * np.maximum(r, 0.0)) / self.rate))

    def tail_beyond(self, cut):
        return float(self.tail(cut))

    def mrd(self, r):
        r = _arr(r)
        return _out(np.where(r < 0, 1 / self.rate - r, 1 / self.rate))

    @property
    def mean(self):
        return 1 / self.rate

    @property
    def second_moment(self):
        return 2 / self.rate**2

    def sample(self, n, rng):
        return rng.exponential(1 / self.rate, n)

    def to_spec(self):
        return {"family": "exponential", "params": {"lambda": self.rate}}


@dataclass(frozen=True)
class Pareto(DemandDistribution):
    """Pareto with scale ``L`` and shape ``k``; requires ``k > 1`` (finite mean)."""

    L: float
    k: float

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("Pareto scale L must be positive")
        if not self.k > 1:
            raise ValueError(f"Pareto shape k={self.k} <= 1 has infinite mean; "
                             "demand must have a finite expectation")

    @property
    def support(self):
        return SupportBounds(self.L, math.inf)

    @property
    def breakpoints(self):
        return (self.L,)

    def sf(self, r):
        r = _arr(r)
        return _out(np.where(r < self.L, 1.0, (self.L / np.maximum(r, self.L)) ** self.k))

    def pdf(self, r):
        r = _arr(r)
        rr = np.maximum(r, self.L)
        return _out(np.where(r < self.L, 0.0, self.k * self.L**self.k * rr ** (-self.k - 1)))

    def quantile(self, p):
        return _out(self.L * (1 - _arr(p)) ** (-1 / self.k))

    def tail(self, r):
        r = _arr(r)
        k, L = self.k, self.L
        rr = np.maximum(r, L)
        above = L**k * rr ** (1 - k) / (k - 1)
        return _out(np.where(r < L, (L - r) + L / (k - 1), above))

    def tail_beyond(self, cut):
        return float(self.tail(max(cut, self.L)))

    def mrd(self, r):
        r = _arr(r)
        return _out(np.where(r < self.L, _arr(self.tail(r)), r / (self.k - 1)))

    @property
    def mean(self):
        return self.k * self.L / (self.k - 1)

    @property
    def second_moment(self):
        return self.k * self.L**2 / (self.k - 2) if self.k > 2 else math.inf

    def to_spec(self):
        return {"family": "pareto", "params": {"L": self.L, "k": self.k}}


@dataclass(frozen=True)
class GeneralizedPareto(DemandDistribution):
    """Pareto II with location ``mu``, scale ``sigma`` and shape ``k`` in [0, 1)."""

    mu: float
    sigma: float
    k: float

    def __post_init__(self):
        if self.mu < 0 or not self.sigma > 0:
            raise ValueError("GeneralizedPareto needs mu >= 0 and sigma > 0")
        if not 0 <= self.k < 1:
            raise ValueError("GeneralizedPareto shape must lie in [0, 1) for a finite mean")

    @classmethod
    def from_epsilon(cls, eps: float, mu: float = 0.02) -> "GeneralizedPareto":
        """The one-parameter family with ``sigma = k = 1 / (2 + eps)``."""
        if not eps > 0:
            raise ValueError("eps must be positive")
        s = 1.0 / (2.0 + eps)
        return cls(mu, s, s)

    @property
    def support(self):
        return SupportBounds(self.mu, math.inf)

    @property
    def breakpoints(self):
        return (self.mu,)

    def _z(self, r):
        return np.maximum(_arr(r) - self.mu, 0.0) / self.sigma

    def sf(self, r):
        z = self._z(r)
        if self.k == 0:
            return _out(np.exp(-z))
        return _out((1 + self.k * z) ** (-1 / self.k))

    def pdf(self, r):
        r = _arr(r)
        z = self._z(r)
        if self.k == 0:
            dens = np.exp(-z) / self.sigma
        else:
            dens = (1 + self.k * z) ** (-(1 + 1 / self.k)) / self.sigma
        return _out(np.where(r < self.mu, 0.0, dens))

    def quantile(self, p):
        p = _arr(p)
        if self.k == 0:
            return _out(self.mu - self.sigma * np.log1p(-p))
        return _out(self.mu + self.sigma * ((1 - p) ** (-self.k) - 1) / self.k)

    def tail(self, r):
        r = _arr(r)
        z = self._z(r)
        c = self.sigma / (1 - self.k)
        if self.k == 0:
            above = c * np.exp(-z)
        else:
            above = c * (1 + self.k * z) ** (1 - 1 / self.k)
        return _out(np.where(r < self.mu, (self.mu - r) + c, above))

    def tail_beyond(self, cut):
        return float(self.tail(cut))

    def mrd(self, r):
        r = _arr(r)
        lin = (self.sigma + self.k * (r - self.mu)) / (1 - self.k)
        return _out(np.where(r < self.mu, _arr(self.tail(r)), lin))

    @property
    def mean(self):
        return self.mu + self.sigma / (1 - self.k)

    @property
    def second_moment(self):
        if self.k >= 0.5:
            return math.inf
        var = self.sigma**2 / ((1 - self.k) ** 2 * (1 - 2 * self.k))
        return var + self.mean**2

    def to_spec(self):
        return {"family": "gpareto", "params": {"mu": self.mu, "sigma": self.sigma, "k": self.k}}


@dataclass(frozen=True)
class Kumaraswamy(DemandDistribution):
    """Kumaraswamy(1, lam), i.e. Beta(1, lam): ``F(r) = 1 - (1 - r)^lam`` on [0, 1]."""

    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("Kumaraswamy lambda must be positive")

    @property
    def support(self):
        return SupportBounds(0.0, 1.0)

    def sf(self, r):
        r = np.clip(_arr(r), 0.0, 1.0)
        return _out((1 - r) ** self.lam)

    def pdf(self, r):
        r = _arr(r)
        inside = (r >= 0) & (r < 1)
        rr = np.clip(r, 0.0, 1.0)
        with np.errstate(divide="ignore"):
            dens = self.lam * (1 - rr) ** (self.lam - 1)
        return _out(np.where(inside, dens, 0.0))

    def quantile(self, p):
        return _out(-np.expm1(np.log1p(-_arr(p)) / self.lam))

    def tail(self, r):
        r = _arr(r)
        rr = np.clip(r, 0.0, 1.0)
        return _out(np.where(r < 0, -r, 0.0) + (1 - rr) ** (self.lam + 1) / (self.lam + 1))

    def mrd(self, r):
        r = _arr(r)
        return _out(np.where(r >= 1, 0.0, np.where(r < 0, -r, 0) + (1 - np.clip(r, 0, 1)) / (1 + self.lam)))

    @property
    def mean(self):
        return 1 / (1 + self.lam)

    @property
    def second_moment(self):
        return 2 / ((self.lam + 1) * (self.lam + 2))

    def to_spec(self):
        return {"family": "kumaraswamy", "params": {"lambda": self.lam}}


@dataclass(frozen=True)
class Uniform(DemandDistribution):
    a: float
    b: float

    def __post_init__(self):
        if not 0 <= self.a < self.b:
            raise ValueError("Uniform needs 0 <= a < b")

    @property
    def support(self):
        return SupportBounds(self.a, self.b)

    @property
    def breakpoints(self):
        return (self.a,)

    def sf(self, r):
        r = _arr(r)
        return _out(np.clip((self.b - r) / (self.b - self.a), 0.0, 1.0))

    def pdf(self, r):
        r = _arr(r)
        return _out(np.where((r >= self.a) & (r < self.b), 1 / (self.b - self.a), 0.0))

    def quantile(self, p):
        return _out(self.a + _arr(p) * (self.b - self.a))

    def tail(self, r):
        r = _arr(r)
        w = self.b - self.a
        inside = np.clip(self.b - r, 0.0, w) ** 2 / (2 * w)
        return _out(np.where(r < self.a, (self.a - r) + w / 2, inside))

    def mrd(self, r):
        r = _arr(r)
        return _out(np.where(r < self.a, _arr(self.tail(r)), np.maximum(self.b - r, 0.0) / 2))

    @property
    def mean(self):
        return (self.a + self.b) / 2

    @property
    def second_moment(self):
        return (self.a**2 + self.a * self.b + self.b**2) / 3

    def to_spec(self):
        return {"family": "uniform", "params": {"a": self.a, "b": self.b}}


@dataclass(frozen=True)
class Gamma(DemandDistribution):
    shape: float
    scale: float

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise ValueError("Gamma shape and scale must be positive")

    @property
    def support(self):
        return SupportBounds(0.0, math.inf)

    def sf(self, r):
        return _out(special.gammaincc(self.shape, np.maximum(_arr(r), 0.0) / self.scale))

    def pdf(self, r):
        r = _arr(r)
        return _out(np.where(r < 0, 0.0, stats.gamma.pdf(np.maximum(r, 0), self.shape, scale=self.scale)))

    def quantile(self, p):
        p = _arr(p)
        lo = special.gammaincinv(self.shape, p)
        hi = special.gammainccinv(self.shape, 1 - p)
        return _out(np.where(p < 0.5, lo, hi) * self.scale)

    def tail(self, r):
        r = _arr(r)
        x = np.maximum(r, 0.0) / self.scale
        above = self.shape * self.scale * special.gammaincc(self.shape + 1, x) \
            - np.maximum(r, 0.0) * special.gammaincc(self.shape, x)
        return _out(np.maximum(np.where(r < 0, self.mean - r, above), 0.0))

    def tail_beyond(self, cut):
        return float(self.tail(cut))

    @property
    def mean(self):
        return self.shape * self.scale

    @property
    def second_moment(self):
        return self.shape * (self.shape + 1) * self.scale**2

    def sample(self, n, rng):
        return rng.gamma(self.shape, self.scale, n)

    def to_spec(self):
        return {"family": "gamma", "params": {"shape": self.shape, "scale": self.scale}}


@dataclass(frozen=True)
class Lognormal(DemandDistribution):
    """``exp(N(mu, sigma^2))``."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("Lognormal sigma must be positive")

    @property
    def support(self):
        return SupportBounds(0.0, math.inf)

    def _z(self, r):
        with np.errstate(divide="ignore"):
            return (np.log(np.maximum(_arr(r), 0.0)) - self.mu) / self.sigma

    def sf(self, r):
        return _out(special.ndtr(-self._z(r)))

    def pdf(self, r):
        r = _arr(r)
        return _out(stats.lognorm.pdf(r, self.sigma, scale=math.exp(self.mu)))

    def quantile(self, p):
        p = _arr(p)
        z = np.where(p < 0.5, special.ndtri(p), -special.ndtri(1 - p))
        return _out(np.exp(self.mu + self.sigma * z))

    def tail(self, r):
        r = _arr(r)
        pos = np.maximum(r, 0.0)
        z = self._z(r)
        above = self.mean * special.ndtr(self.sigma - z) - pos * special.ndtr(-z)
        return _out(np.maximum(np.where(r <= 0, self.mean - r, above), 0.0))

    def tail_beyond(self, cut):
        return float(self.tail(cut))

    @property
    def mean(self):
        return math.exp(self.mu + self.sigma**2 / 2)

    @property
    def second_moment(self):
        return math.exp(2 * self.mu + 2 * self.sigma**2)

    def sample(self, n, rng):
        return rng.lognormal(self.mu, self.sigma, n)

    def to_spec(self):
        return {"family": "lognormal", "params": {"mu": self.mu, "sigma": self.sigma}}


@dataclass(frozen=True)
class Normal(DemandDistribution):
    """Normal demand, truncated at zero and renormalised unless ``truncate=False``.

    The untruncated variant puts mass on negative demand; it exists only for
    side-by-side comparisons of normal families and warns on construction.
    """

    mu: float
    sigma: float
    truncate: bool = True

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("Normal sigma must be positive")
        if not self.truncate:
            warnings.warn("untruncated normal demand can be negative; MRD values for r >= 0 "
                          "use the untruncated law", stacklevel=3)

    @property
    def _mass(self) -> float:
        return float(special.ndtr(self.mu / self.sigma)) if self.truncate else 1.0

    @property
    def support(self):
        return SupportBounds(0.0, math.inf)

    def sf(self, r):
        r = _arr(r)
        s = special.ndtr(-(r - self.mu) / self.sigma) / self._mass
        if self.truncate:
            s = np.where(r < 0, 1.0, s)
        return _out(s)

    def pdf(self, r):
        r = _arr(r)
        dens = stats.norm.pdf(r, self.mu, self.sigma) / self._mass
        if self.truncate:
            dens = np.where(r < 0, 0.0, dens)
        return _out(dens)

    def quantile(self, p):
        p = _arr(p)
        q = (1 - p) * self._mass  # survival level in untruncated units
        return _out(self.mu - self.sigma * special.ndtri(q))

    def tail(self, r):
        r = _arr(r)
        z = (r - self.mu) / self.sigma
        raw = self.sigma * stats.norm.pdf(z) - (r - self.mu) * special.ndtr(-z)
        val = raw / self._mass
        if self.truncate:
            val = np.where(r < 0, float(self._tail0()) - r, val)
        return _out(np.maximum(val, 0.0))

    def _tail0(self):
        z = -self.mu / self.sigma
        return (self.sigma * stats.norm.pdf(z) + self.mu * special.ndtr(-z)) / self._mass

    def tail_beyond(self, cut):
        return float(self.tail(cut))

    @property
    def mean(self):
        if not self.truncate:
            return self.mu
        return float(self._tail0())

    @property
    def second_moment(self):
        if not self.truncate:
            return self.mu**2 + self.sigma**2
        a = -self.mu / self.sigma
        lam = stats.norm.pdf(a) / self._mass
        var = self.sigma**2 * (1 + a * lam - lam**2)
        return var + self.mean**2

    def sample(self, n, rng):
        if not self.truncate:
            return rng.normal(self.mu, self.sigma, n)
        return super().sample(n, rng)

    def to_spec(self):
        spec = {"family": "normal", "params": {"mu": self.mu, "sigma": self.sigma}}
        if not self.truncate:
            spec["params"]["truncate"] = False
        return spec


class PiecewiseLinearCdf(DemandDistribution):
    """Continuous cdf interpolating ``(x, F(x))`` knots linearly.

    Flat stretches (``F`` constant between two knots) are gaps with zero
    density.  The first knot must carry ``F = 0`` and the last ``F = 1``.
    """

    def __init__(self, knots: Sequence[Sequence[float]]):
        k = np.asarray([[float(x), float(f)] for x, f in knots], dtype=float)
        if k.ndim != 2 or k.shape[0] < 2:
            raise ValueError("need at least two knots")
        x, F = k[:, 0], k[:, 1]
        if x[0] < 0 or np.any(np.diff(x) <= 0):
            raise ValueError("knot abscissae must be nonnegative and strictly increasing")
        if np.any(np.diff(F) < 0) or F[0] != 0 or abs(F[-1] - 1) > 1e-12:
            raise ValueError("knot cdf values must be nondecreasing from 0 to 1")
        F = F.copy()
        F[-1] = 1.0
        self._x = x
        self._F = F
        s = 1 - F
        seg = np.diff(x) * (s[:-1] + s[1:]) / 2
        # area of sf from knot i to the last knot
        self._area = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
        self._knots = tuple((float(a), float(b)) for a, b in zip(x, F))

    @property
    def knots(self):
        return self._knots

    @property
    def support(self):
        # drop leading / trailing flat pieces
        F = self._F
        lo = self._x[np.nonzero(F > 0)[0][0] - 1]
        hi = self._x[np.nonzero(F >= 1)[0][0]]
        return SupportBounds(float(lo), float(hi))

    @property
    def breakpoints(self):
        return tuple(float(v) for v in self._x)

    @property
    def has_gaps(self) -> bool:
        lo, hi = self.support
        inside = (self._x[:-1] >= lo) & (self._x[1:] <= hi)
        return bool(np.any((np.diff(self._F) == 0) & inside))

    def at_knot(self, r) -> np.ndarray | bool:
        r = _arr(r)
        hit = np.isin(r, self._x)
        return bool(hit) if hit.ndim == 0 else hit

    def cdf(self, r):
        return _out(np.interp(_arr(r), self._x, self._F, left=0.0, right=1.0))

    def sf(self, r):
        return _out(1.0 - _arr(self.cdf(r)))

    def pdf(self, r):
        """Right-continuous piecewise-constant density."""
        r = _arr(r)
        slopes = np.diff(self._F) / np.diff(self._x)
        i = np.searchsorted(self._x, r, side="right") - 1
        inside = (i >= 0) & (i < len(slopes))
        return _out(np.where(inside, slopes[np.clip(i, 0, len(slopes) - 1)], 0.0))

    def quantile(self, p):
        p = _arr(p)
        F, x = self._F, self._x
        k = np.clip(np.searchsorted(F, p, side="left"), 1, len(F) - 1)
        f0, f1 = F[k - 1], F[k]
        with np.errstate(invalid="ignore", divide="ignore"):
            t = np.where(f1 > f0, (p - f0) / (f1 - f0), 0.0)
        q = x[k - 1] + np.clip(t, 0, 1) * (x[k] - x[k - 1])
        return _out(np.where(p <= 0, self.support.lower, q))

    def tail(self, r):
        r = _arr(r)
        x, area = self._x, self._area
        i = np.clip(np.searchsorted(x, r, side="right") - 1, 0, len(x) - 2)
        s_r = _arr(self.sf(r))
        s_next = 1 - self._F[i + 1]
        seg = (x[i + 1] - r) * (s_r + s_next) / 2 + area[i + 1]
        out = np.where(r < x[0], (x[0] - r) + area[0], np.where(r >= x[-1], 0.0, seg))
        return _out(out)

    @property
    def mean(self):
        return float(self.tail(0.0))

    @property
    def second_moment(self):
        # exact: uniform mixture over each segment
        x, F = self._x, self._F
        w = np.diff(F)
        a, b = x[:-1], x[1:]
        return float(np.sum(w * (a * a + a * b + b * b) / 3))

    def to_spec(self):
        return {"family": "piecewise", "knots": [list(k) for k in self._knots]}

    def __repr__(self):
        return f"PiecewiseLinearCdf(knots={list(self._knots)!r})"

    def __eq__(self, other):
        return isinstance(other, PiecewiseLinearCdf) and self._knots == other._knots

    def __hash__(self):
        return hash(self._knots)


@dataclass(frozen=True)
class Deterministic(DemandDistribution):
    """Point mass at ``alpha``: the full-information benchmark."""

    alpha: float
    has_density = False

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("deterministic demand level must be positive")

    @property
    def support(self):
        return SupportBounds(self.alpha, self.alpha)

    def sf(self, r):
        return _out(np.where(_arr(r) < self.alpha, 1.0, 0.0))

    def quantile(self, p):
        return _out(np.full_like(_arr(p), self.alpha))

    def tail(self, r):
        return _out(np.maximum(self.alpha - _arr(r), 0.0))

    def mrd(self, r):
        return _out(np.maximum(self.alpha - _arr(r), 0.0))

    @property
    def mean(self):
        return self.alpha

    @property
    def second_moment(self):
        return self.alpha**2

    def sample(self, n, rng):
        return np.full(n, float(self.alpha))

    def to_spec(self):
        return {"family": "deterministic", "params": {"alpha": self.alpha}}


# ---------------------------------------------------------------------------
# derived distributions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Affine(DemandDistribution):
    """``shift + scale * base`` with ``shift >= 0`` and ``scale > 0``.

    ``kind`` only affects serialisation ("scale", "affine", "mean_preserving").
    """

    base: DemandDistribution
    shift: float = 0.0
    scale: float = 1.0
    kind: str = "affine"
    kappa: float | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        if self.shift < 0:
            raise ValueError("shift must be nonnegative")

    @property
    def has_density(self):
        return self.base.has_density

    @property
    def support(self):
        lo, hi = self.base.support
        return SupportBounds(self.shift + self.scale * lo, self.shift + self.scale * hi)

    @property
    def breakpoints(self):
        return (self.shift,) + tuple(self.shift + self.scale * b for b in self.base.breakpoints)

    def _inv(self, r):
        return (_arr(r) - self.shift) / self.scale

    def sf(self, r):
        r = _arr(r)
        return _out(np.where(r < self.shift, 1.0, _arr(self.base.sf(np.maximum(self._inv(r), 0.0)))))

    def cdf(self, r):
        r = _arr(r)
        return _out(np.where(r < self.shift, 0.0, _arr(self.base.cdf(np.maximum(self._inv(r), 0.0)))))

    def pdf(self, r):
        r = _arr(r)
        inner = _arr(self.base.pdf(np.maximum(self._inv(r), 0.0))) / self.scale
        return _out(np.where(r < self.shift, 0.0, inner))

    def quantile(self, p):
        return _out(self.shift + self.scale * _arr(self.base.quantile(p)))

    def tail(self, r):
        r = _arr(r)
        below = np.maximum(self.shift - r, 0.0)
        return _out(below + self.scale * _arr(self.base.tail(np.maximum(self._inv(r), 0.0))))

    def tail_beyond(self, cut):
        return float(self.tail(cut))

    def mrd(self, r):
        r = _arr(r)
        inner = self.scale * _arr(self.base.mrd(np.maximum(self._inv(r), 0.0)))
        below = (self.shift - r) + self.scale * self.base.mean
        return _out(np.where(r < self.shift, below, inner))

    @property
    def mean(self):
        return self.shift + self.scale * self.base.mean

    @property
    def second_moment(self):
        m2 = self.base.second_moment
        if math.isinf(m2):
            return math.inf
        return self.shift**2 + 2 * self.shift * self.scale * self.base.mean + self.scale**2 * m2

    def sample(self, n, rng):
        return self.shift + self.scale * self.base.sample(n, rng)

    def to_spec(self):
        if self.kind == "scale":
            return {"transform": "scale", "c": self.scale, "of": self.base.to_spec()}
        if self.kind == "mean_preserving":
            return {"transform": "mean_preserving", "kappa": self.kappa, "of": self.base.to_spec()}
        return {"transform": "affine", "shift": self.shift, "scale": self.scale,
                "of": self.base.to_spec()}


@dataclass(frozen=True)
class Mixture(DemandDistribution):
    """``p * F1 + (1 - p) * F2``."""

    first: DemandDistribution
    second: DemandDistribution
    p: float

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise ValueError("mixture weight must lie in (0, 1)")

    @property
    def has_density(self):
        return self.first.has_density and self.second.has_density

    @property
    def support(self):
        a, b = self.first.support, self.second.support
        return SupportBounds(min(a.lower, b.lower), max(a.upper, b.upper))

    @property
    def breakpoints(self):
        return tuple(sorted(set(self.first.breakpoints) | set(self.second.breakpoints)))

    def sf(self, r):
        return _out(self.p * _arr(self.first.sf(r)) + (1 - self.p) * _arr(self.second.sf(r)))

    def pdf(self, r):
        return _out(self.p * _arr(self.first.pdf(r)) + (1 - self.p) * _arr(self.second.pdf(r)))

    def tail(self, r):
        return _out(self.p * _arr(self.first.tail(r)) + (1 - self.p) * _arr(self.second.tail(r)))

    def tail_beyond(self, cut):
        return float(self.tail(cut))

    def quantile(self, p):
        p = _arr(p)
        lo_all = min(self.first.support.lower, self.second.support.lower)

        def one(q):
            if q <= 0:
                return lo_all
            a = min(float(self.first.quantile(q)), float(self.second.quantile(q)))
            b = max(float(self.first.quantile(q)), float(self.second.quantile(q)))
            if b - a <= 1e-15 * max(1.0, b):
                return b
            g = lambda x: float(self.cdf(x)) - q
            return optimize.brentq(g, a, b, xtol=1e-13, rtol=1e-14)

        return _out(np.array([one(q) for q in p.ravel()]).reshape(p.shape))

    @property
    def mean(self):
        return self.p * self.first.mean + (1 - self.p) * self.second.mean

    @property
    def second_moment(self):
        return self.p * self.first.second_moment + (1 - self.p) * self.second.second_moment

    def sample(self, n, rng):
        pick = rng.random(n) < self.p
        a = self.first.sample(n, rng)
        b = self.second.sample(n, rng)
        return np.where(pick, a, b)

    def to_spec(self):
        return {"transform": "mixture", "p": self.p,
                "of": [self.first.to_spec(), self.second.to_spec()]}


@dataclass(frozen=True)
class ConvexFunction:
    """Increasing convex maps with analytic inverses.

    ``power``: ``x ** gamma`` (gamma >= 1); ``exp``: ``a * (exp(b x) - 1)``;
    ``affine``: ``a + b x`` (a >= 0, b > 0).
    """

    kind: str
    params: tuple[tuple[str, float], ...] = ()

    @classmethod
    def power(cls, gamma: float) -> "ConvexFunction":
        return cls("power", (("gamma", float(gamma)),))

    @classmethod
    def exp(cls, a: float = 1.0, b: float = 1.0) -> "ConvexFunction":
        return cls("exp", (("a", float(a)), ("b", float(b))))

    @classmethod
    def affine(cls, a: float = 0.0, b: float = 1.0) -> "ConvexFunction":
        return cls("affine", (("a", float(a)), ("b", float(b))))

    def __post_init__(self):
        p = dict(self.params)
        if self.kind == "power":
            if p.get("gamma", 0) < 1:
                raise ValueError("power map needs gamma >= 1 to be convex")
        elif self.kind == "exp":
            if not (p.get("a", 0) > 0 and p.get("b", 0) > 0):
                raise ValueError("exp map needs a > 0 and b > 0")
        elif self.kind == "affine":
            if not (p.get("a", -1) >= 0 and p.get("b", 0) > 0):
                raise ValueError("affine map needs a >= 0 and b > 0")
        else:
            raise ValueError(f"convex map {self.kind!r} is not in the whitelist "
                             "(power, exp, affine)")

    @property
    def p(self) -> dict:
        return dict(self.params)

    def __call__(self, x):
        x = _arr(x)
        p = self.p
        if self.kind == "power":
            return _out(x ** p["gamma"])
        if self.kind == "exp":
            with np.errstate(over="ignore"):
                return _out(p["a"] * np.expm1(p["b"] * x))
        return _out(p["a"] + p["b"] * x)

    def inverse(self, y):
        y = _arr(y)
        p = self.p
        if self.kind == "power":
            return _out(np.maximum(y, 0.0) ** (1 / p["gamma"]))
        if self.kind == "exp":
            return _out(np.log1p(np.maximum(y, 0.0) / p["a"]) / p["b"])
        return _out((y - p["a"]) / p["b"])

    def inverse_derivative(self, y):
        y = _arr(y)
        p = self.p
        if self.kind == "power":
            g = p["gamma"]
            with np.errstate(divide="ignore"):
                return _out(np.maximum(y, 0.0) ** (1 / g - 1) / g)
        if self.kind == "exp":
            return _out(1 / (p["b"] * (p["a"] + np.maximum(y, 0.0))))
        return _out(np.full_like(y, 1 / p["b"]))

    def to_spec(self):
        return {"phi": self.kind, **self.p}


class ConvexMap(DemandDistribution):
    """Distribution of ``phi(X)`` for a whitelisted increasing convex ``phi``."""

    def __init__(self, base: DemandDistribution, phi: ConvexFunction):
        self.base = base
        self.phi = phi
        lo, hi = base.support
        with np.errstate(over="ignore"):
            plo, phi_hi = float(phi(lo)), float(phi(hi))
        if math.isfinite(hi) and not math.isfinite(phi_hi):
            raise ValueError("convex map is not invertible on the support (overflow)")
        self._support = SupportBounds(plo, phi_hi)
        try:
            m = numerics.quad_tail(self, 0.0)
        except numerics.QuadratureError as exc:
            raise ValueError("phi(X) has no finite mean") from exc
        if not math.isfinite(m):
            raise ValueError("phi(X) has no finite mean")
        self._mean = m

    @property
    def has_density(self):
        return self.base.has_density

    @property
    def support(self):
        return self._support

    @property
    def breakpoints(self):
        return tuple(float(self.phi(b)) for b in self.base.breakpoints)

    def sf(self, r):
        r = _arr(r)
        inside = r >= self._support.lower
        x = _arr(self.phi.inverse(np.maximum(r, self._support.lower)))
        return _out(np.where(inside, _arr(self.base.sf(x)), 1.0))

    def pdf(self, r):
        r = _arr(r)
        inside = r > self._support.lower
        rr = np.maximum(r, self._support.lower)
        dens = _arr(self.base.pdf(self.phi.inverse(rr))) * _arr(self.phi.inverse_derivative(rr))
        return _out(np.where(inside, dens, 0.0))

    def quantile(self, p):
        return self.phi(self.base.quantile(p))

    @property
    def mean(self):
        return self._mean

    @property
    def second_moment(self):
        if math.isinf(self.base.second_moment):
            return math.inf
        return DemandDistribution.second_moment.fget(self)

    def sample(self, n, rng):
        return _arr(self.phi(self.base.sample(n, rng)))

    def to_spec(self):
        return {"transform": "convex_map", **self.phi.to_spec(), "of": self.base.to_spec()}

    def __repr__(self):
        return f"ConvexMap({self.base!r}, {self.phi!r})"


class Empirical(DemandDistribution):
    """Empirical law of a sample; tail integrals by exact summation."""

    has_density = False

    def __init__(self, samples):
        x = np.sort(np.asarray(samples, dtype=float))
        if x.ndim != 1 or len(x) < 2 or x[0] < 0:
            raise ValueError("need a 1-d sample of nonnegative values")
        self._x = x
        self._n = len(x)
        # suffix sums: _suffix[k] = sum(x[k:])
        self._suffix = np.concatenate([np.cumsum(x[::-1])[::-1], [0.0]])
        self._suffix2 = np.concatenate([np.cumsum((x * x)[::-1])[::-1], [0.0]])

    @property
    def n(self) -> int:
        return self._n

    @property
    def samples(self) -> np.ndarray:
        return self._x

    @property
    def support(self):
        return SupportBounds(float(self._x[0]), float(self._x[-1]))

    def _k(self, r):
        return np.searchsorted(self._x, _arr(r), side="right")

    def sf(self, r):
        return _out((self._n - self._k(r)) / self._n)

    def quantile(self, p):
        return _out(np.quantile(self._x, np.clip(_arr(p), 0, 1), method="inverted_cdf"))

    def tail(self, r):
        r = _arr(r)
        k = self._k(r)
        return _out(np.maximum((self._suffix[k] - (self._n - k) * r) / self._n, 0.0))

    def mrd(self, r):
        r = _arr(r)
        k = self._k(r)
        cnt = self._n - k
        with np.errstate(invalid="ignore", divide="ignore"):
            m = np.where(cnt > 0, (self._suffix[k] - cnt * r) / np.maximum(cnt, 1), 0.0)
        return _out(np.maximum(m, 0.0))

    def mrd_stderr(self, r):
        """Delta-method standard error of the MRD estimate at ``r``."""
        r = _arr(r)
        k = self._k(r)
        cnt = self._n - k
        m = _arr(self.mrd(r))
        # sum over exceedances of (x - r - m)^2
        s1 = self._suffix[k] - cnt * r
        s2 = self._suffix2[k] - 2 * r * self._suffix[k] + cnt * r * r
        ss = s2 - 2 * m * s1 + cnt * m * m
        with np.errstate(invalid="ignore", divide="ignore"):
            se = np.where(cnt > 1, np.sqrt(np.maximum(ss, 0) / np.maximum(cnt - 1, 1) / np.maximum(cnt, 1)), np.inf)
        return _out(se)

    @property
    def mean(self):
        return float(self._suffix[0] / self._n)

    @property
    def second_moment(self):
        return float(self._suffix2[0] / self._n)

    def sample(self, n, rng):
        return self._x[rng.integers(0, self._n, n)]

    def to_spec(self):
        raise TypeError("empirical distributions are not serialisable")

    def __repr__(self):
        return f"Empirical(n={self._n})"


class Convolution(DemandDistribution):
    """Law of ``X + Z`` for independent ``X`` and ``Z``.

    ``method="mc"`` realises it as the empirical law of ``n`` paired draws
    (fixed seed); ``method="grid"`` discretises both laws on a common grid and
    convolves the cell masses, giving a piecewise-linear cdf.  Moments are
    exact in both cases; the second moment is what equilibrium sufficiency
    checks consume.
    """

    def __init__(self, first: DemandDistribution, second: DemandDistribution,
                 method: str = "mc", n: int = 1_000_000, seed: int = DEFAULT_SEED,
                 grid_points: int = 8192):
        self.first = first
        self.second = second
        self.method = method
        self.n = int(n)
        self.seed = int(seed)
        self.grid_points = int(grid_points)
        if method == "mc":
            a = first.sample(self.n, make_rng(seed, 1, 0))
            b = second.sample(self.n, make_rng(seed, 1, 1))
            self._inner: DemandDistribution = Empirical(a + b)
        elif method == "grid":
            self._inner = _grid_convolve(first, second, self.grid_points)
        else:
            raise ValueError("convolution method must be 'mc' or 'grid'")

    @property
    def realisation(self) -> DemandDistribution:
        return self._inner

    @property
    def has_density(self):
        return self._inner.has_density

    @property
    def support(self):
        return self._inner.support

    @property
    def breakpoints(self):
        return self._inner.breakpoints

    def sf(self, r):
        return self._inner.sf(r)

    def cdf(self, r):
        return self._inner.cdf(r)

    def pdf(self, r):
        return self._inner.pdf(r)

    def quantile(self, p):
        return self._inner.quantile(p)

    def tail(self, r):
        return self._inner.tail(r)

    def mrd(self, r):
        return self._inner.mrd(r)

    @property
    def mean(self):
        return self._inner.mean

    @property
    def exact_mean(self) -> float:
        return self.first.mean + self.second.mean

    @property
    def second_moment(self):
        a, b = self.first.second_moment, self.second.second_moment
        if math.isinf(a) or math.isinf(b):
            return math.inf
        return a + 2 * self.first.mean * self.second.mean + b

    def sample(self, n, rng):
        return self.first.sample(n, rng) + self.second.sample(n, rng)

    def to_spec(self):
        spec = {"transform": "convolve", "method": self.method,
                "of": [self.first.to_spec(), self.second.to_spec()]}
        if self.method == "mc":
            spec.update(n=self.n, seed=self.seed)
        else:
            spec.update(grid_points=self.grid_points)
        return spec

    def __repr__(self):
        return f"Convolution({self.first!r}, {self.second!r}, method={self.method!r})"


def _grid_convolve(d1: DemandDistribution, d2: DemandDistribution, n: int) -> PiecewiseLinearCdf:
    def upper(d):
        hi = d.support.upper
        return hi if math.isfinite(hi) else float(d.quantile(1 - 1e-12))

    top = upper(d1) + upper(d2)
    h = top / n
    edges = np.arange(n + 1) * h

    def masses(d):
        c = _arr(d.cdf(edges))
        w = np.diff(c)
        w[-1] += 1 - c[-1]
        return w

    w = np.convolve(masses(d1), masses(d2))
    # cell-midpoint atoms at (i + j + 1) h, smeared over a cell of width h
    F = np.concatenate([[0.0], np.cumsum(w)])
    x = (np.arange(len(F)) + 0.5) * h
    F = np.minimum(F / F[-1], 1.0)
    keep = np.concatenate([[True], np.diff(F) > 0]) | (np.arange(len(F)) == len(F) - 1)
    # collapse runs of identical cdf values to their endpoints
    first_one = int(np.nonzero(F >= 1.0)[0][0])
    x, F = x[: first_one + 1], F[: first_one + 1]
    last_zero = int(np.nonzero(F <= 0.0)[0][-1])
    x, F = x[last_zero:], F[last_zero:]
    del keep
    return PiecewiseLinearCdf(list(zip(x, F)))


# ---------------------------------------------------------------------------
# evaluators
# ---------------------------------------------------------------------------

def cdf(d: DemandDistribution, r):
    if np.any(_arr(r) < 0):
        raise ValueError("demand cdf is queried at r >= 0 only")
    return d.cdf(r)


def survival(d: DemandDistribution, r):
    return d.sf(r)


def mean(d: DemandDistribution) -> float:
    return d.mean


def second_moment(d: DemandDistribution) -> float:
    return d.second_moment


def mrd(d: DemandDistribution, r, flag: bool = False):
    """Mean residual demand ``m(r)``.

    With ``flag=True`` also return a boolean (array) marking points where the
    survival function underflowed below 1e-300 inside the support and 0 was
    returned instead.
    """
    r = _arr(r)
    if np.any(r < 0):
        raise ValueError("mrd requires r >= 0")
    m = d.mrd(r)
    if not flag:
        return m
    s = _arr(d.sf(r))
    under = (s < UNDERFLOW) & (r < d.support.upper)
    m = np.where(under, 0.0, _arr(m))
    return _out(m), (bool(under) if under.ndim == 0 else under)


def gmrd(d: DemandDistribution, r):
    """Generalised mean residual demand ``m(r) / r``."""
    r = _arr(r)
    if np.any(r <= 0):
        raise ValueError("gmrd is defined for r > 0 only")
    return _out(_arr(d.mrd(r)) / r)


def elasticity(d: DemandDistribution, r):
    """Price elasticity of expected demand, ``r / m(r)``."""
    g = _arr(gmrd(d, r))
    with np.errstate(divide="ignore"):
        return _out(np.where(g > 0, 1.0 / np.where(g > 0, g, 1.0), np.inf))


def hazard(d: DemandDistribution, r, flag: bool = False):
    """Failure rate ``f(r) / sf(r)``; ``inf`` where the survival is zero.

    ``flag=True`` additionally reports which points sit on a knot of a
    piecewise-linear cdf (the right-hand density is used there).
    """
    if not d.has_density:
        raise ValueError(f"{d!r} has no density; hazard undefined")
    r = _arr(r)
    f = _arr(d.pdf(r))
    s = _arr(d.sf(r))
    with np.errstate(divide="ignore", invalid="ignore"):
        h = np.where(s > 0, f / np.where(s > 0, s, 1.0), np.inf)
    h = _out(h)
    if not flag:
        return h
    if isinstance(d, PiecewiseLinearCdf):
        return h, d.at_knot(r)
    knot = np.zeros(r.shape, dtype=bool)
    return h, (bool(knot) if knot.ndim == 0 else knot)


def gfr(d: DemandDistribution, r):
    """Generalised failure rate ``r f(r) / sf(r)``."""
    r = _arr(r)
    return _out(r * _arr(hazard(d, r)))


@dataclass(frozen=True)
class ClassificationReport:
    """Grid-certified ageing classes.  ``None`` means "not computable"."""

    ifr: bool | None
    dmrd: bool
    dgmrd: bool
    igfr: bool | None
    dgmrd_strict: bool
    dmrd_strict: bool
    verdicts: dict
    inconsistencies: tuple[str, ...]
    grid: tuple[float, float, int]

    def as_dict(self) -> dict:
        return {
            "IFR": self.ifr, "DMRD": self.dmrd, "DGMRD": self.dgmrd, "IGFR": self.igfr,
            "DGMRD_strict": self.dgmrd_strict, "DMRD_strict": self.dmrd_strict,
            "inconsistencies": list(self.inconsistencies),
            "grid": {"lo": self.grid[0], "hi": self.grid[1], "points": self.grid[2]},
        }


def classification_grid(d: DemandDistribution, n: int = 512) -> np.ndarray:
    """Grid inside the support used for ageing-class checks.

    Lower end at the 1e-6 quantile; upper end at the 0.9999 quantile for
    unbounded support and just below ``H`` otherwise.
    """
    bounded = d.support.bounded
    return numerics.default_grid(d, n, lo_q=1e-6, hi_q=(1 - 1e-9) if bounded else 0.9999)


@dataclass(frozen=True)
class MrdProfile:
    """MRD-derived curves of ``source`` evaluated once on a fixed grid."""

    source: DemandDistribution
    grid: np.ndarray
    m: np.ndarray = field(init=False, repr=False)
    gmrd: np.ndarray = field(init=False, repr=False)
    elasticity: np.ndarray = field(init=False, repr=False)
    hazard: np.ndarray | None = field(init=False, repr=False)
    gfr: np.ndarray | None = field(init=False, repr=False)

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        if g.ndim != 1 or len(g) < 16:
            raise ValueError("profile grid needs at least 16 points")
        if np.any(np.diff(g) <= 0) or g[0] <= 0 or g[-1] >= self.source.support.upper:
            raise ValueError("profile grid must be strictly increasing inside (0, H)")
        g = g.copy()
        g.setflags(write=False)
        m = np.array(_arr(self.source.mrd(g)))
        vals = {"grid": g, "m": m, "gmrd": m / g}
        vals["elasticity"] = np.where(m > 0, g / np.where(m > 0, m, 1.0), np.inf)
        if self.source.has_density and not (
                isinstance(self.source, PiecewiseLinearCdf) and self.source.has_gaps):
            h = np.array(_arr(hazard(self.source, g)))
            vals["hazard"], vals["gfr"] = h, g * h
        else:
            vals["hazard"] = vals["gfr"] = None
        for k, v in vals.items():
            if v is not None:
                v.setflags(write=False)
            object.__setattr__(self, k, v)

    def classify(self, tol: float = MONOTONE_TOL) -> ClassificationReport:
        g = self.grid
        v_m = numerics.monotone_check(self.m, g, tol)
        v_l = numerics.monotone_check(self.gmrd, g, tol)
        verdicts = {"mrd": v_m, "gmrd": v_l}
        ifr = igfr = None
        if self.hazard is not None:
            v_h = numerics.monotone_check(self.hazard, g, tol)
            v_g = numerics.monotone_check(self.gfr, g, tol)
            verdicts.update(hazard=v_h, gfr=v_g)
            ifr, igfr = v_h.nondecreasing, v_g.nondecreasing
        dmrd, dgmrd = v_m.nonincreasing, v_l.nonincreasing
        issues = []
        if ifr and not dmrd:
            issues.append("IFR reported without DMRD: grid artifact")
        if dmrd and not dgmrd:
            issues.append("DMRD reported without DGMRD: grid artifact")
        if ifr and not igfr:
            issues.append("IFR reported without IGFR: grid artifact")
        return ClassificationReport(
            ifr=ifr, dmrd=dmrd, dgmrd=dgmrd, igfr=igfr,
            dgmrd_strict=v_l.verdict == "decreasing" and v_l.strict,
            dmrd_strict=v_m.verdict == "decreasing" and v_m.strict,
            verdicts=verdicts, inconsistencies=tuple(issues),
            grid=(float(g[0]), float(g[-1]), len(g)),
        )


def classify(d: DemandDistribution, grid=None, tol: float = MONOTONE_TOL) -> ClassificationReport:
    """IFR / DMRD / DGMRD / IGFR flags by finite differences on a grid."""
    if grid is None:
        grid = classification_grid(d)
    grid = np.asarray(grid, dtype=float)
    if len(grid) < 16:
        raise ValueError("classification grid needs at least 16 points")
    return MrdProfile(d, grid).classify(tol)


# ---------------------------------------------------------------------------
# JSON specs
# ---------------------------------------------------------------------------

def _num(v) -> float:
    if isinstance(v, str):
        return float(Fraction(v.strip()))
    return float(v)


def _p(params: dict, *names, default=None):
    for name in names:
        if name in params:
            return _num(params[name])
    if default is not None:
        return default
    raise ValueError(f"missing parameter {names[0]!r}")


_FAMILIES: dict[str, Callable[[dict], DemandDistribution]] = {
    "exponential": lambda p: Exponential(_p(p, "lambda", "rate")),
    "pareto": lambda p: Pareto(_p(p, "L", "scale"), _p(p, "k", "shape")),
    "gpareto": lambda p: (GeneralizedPareto.from_epsilon(_p(p, "eps", "epsilon"), _p(p, "mu", default=0.02))
                          if ("eps" in p or "epsilon" in p)
                          else GeneralizedPareto(_p(p, "mu"), _p(p, "sigma"), _p(p, "k"))),
    "kumaraswamy": lambda p: _kumaraswamy(p),
    "uniform": lambda p: Uniform(_p(p, "a", default=0.0), _p(p, "b", default=1.0)),
    "gamma": lambda p: Gamma(_p(p, "shape", "alpha"), _p(p, "scale")),
    "lognormal": lambda p: Lognormal(_p(p, "mu"), _p(p, "sigma")),
    "normal": lambda p: Normal(_p(p, "mu"), _p(p, "sigma"), bool(p.get("truncate", True))),
    "deterministic": lambda p: Deterministic(_p(p, "alpha")),
}
_FAMILIES["generalized_pareto"] = _FAMILIES["gpareto"]
_FAMILIES["beta1"] = _FAMILIES["kumaraswamy"]


def _kumaraswamy(p: dict) -> Kumaraswamy:
    if _p(p, "a", default=1.0) != 1.0:
        raise ValueError("only Kumaraswamy(1, lambda) is supported")
    return Kumaraswamy(_p(p, "lambda", "b"))


def from_spec(spec: dict, *, seed: int | None = None) -> DemandDistribution:
    """Build a distribution from its JSON form.

    ``{"family": "pareto", "params": {"L": 1.0, "k": 3.0}}``,
    ``{"family": "piecewise", "knots": [[0, 0], ["1/3", "7/9"], ...]}`` and
    derived nodes such as ``{"transform": "scale", "c": 2.0, "of": {...}}``.
    """
    if not isinstance(spec, dict):
        raise ValueError("distribution spec must be a JSON object")
    if "transform" in spec:
        return _from_transform(spec, seed)
    family = str(spec.get("family", "")).lower()
    if family == "piecewise":
        knots = spec.get("knots")
        if not knots:
            raise ValueError("piecewise spec needs 'knots'")
        return PiecewiseLinearCdf([(_num(x), _num(f)) for x, f in knots])
    if family not in _FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    params = spec.get("params", {})
    if not isinstance(params, dict):
        raise ValueError("'params' must be an object")
    return _FAMILIES[family](params)


def _from_transform(spec: dict, seed: int | None) -> DemandDistribution:
    kind = spec["transform"]
    of = spec.get("of")
    if of is None:
        raise ValueError(f"transform {kind!r} needs an 'of' operand")
    if kind in ("mixture", "convolve"):
        if not (isinstance(of, list) and len(of) == 2):
            raise ValueError(f"{kind} needs two operands in 'of'")
        a, b = (from_spec(o, seed=seed) for o in of)
        if kind == "mixture":
            return Mixture(a, b, _num(spec["p"]))
        s = int(spec.get("seed", seed if seed is not None else DEFAULT_SEED))
        return Convolution(a, b, method=spec.get("method", "mc"), n=int(spec.get("n", 1_000_000)),
                           seed=s, grid_points=int(spec.get("grid_points", 8192)))
    base = from_spec(of, seed=seed)
    if kind == "scale":
        return Affine(base, 0.0, _num(spec["c"]), kind="scale")
    if kind == "affine":
        return Affine(base, _num(spec.get("shift", 0.0)), _num(spec.get("scale", 1.0)))
    if kind == "mean_preserving":
        from .orders import mean_preserving
        return mean_preserving(base, _num(spec["kappa"]))
    if kind == "convex_map":
        name = spec.get("phi")
        args = {k: _num(v) for k, v in spec.items() if k not in ("transform", "phi", "of")}
        if name == "power":
            phi = ConvexFunction.power(args.get("gamma", 2.0))
        elif name == "exp":
            phi = ConvexFunction.exp(args.get("a", 1.0), args.get("b", 1.0))
        elif name == "affine":
            phi = ConvexFunction.affine(args.get("a", 0.0), args.get("b", 1.0))
        else:
            raise ValueError(f"convex map {name!r} is not in the whitelist")
        return ConvexMap(base, phi)
    raise ValueError(f"unknown transform {kind!r}")


def to_spec(d: DemandDistribution) -> dict:
    return d.to_spec()


def describe(d: DemandDistribution) -> dict[str, Any]:
    lo, hi = d.support
    return {"repr": repr(d), "mean": d.mean, "second_moment": d.second_moment,
            "support": [lo, hi]}
