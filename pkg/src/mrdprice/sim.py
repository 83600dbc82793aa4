"""Monte Carlo oracle for the two-stage pricing game.

Draws are generated in fixed-size chunks, each from its own Philox substream
``(seed, stream, chunk)``, and reduced chunk by chunk in index order, so every
result is identical for any number of workers.  All prices on a grid see the
same demand draws (common random numbers).
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from ._rng import DEFAULT_SEED, make_rng
from .distributions import DemandDistribution
from .equilibrium import expected_profit, optimal_price
from .market import MarketStructure, lambda_M, play

__all__ = [
    "SimConfig",
    "McEstimate",
    "SimReport",
    "sample",
    "mc_expected_profit",
    "mc_two_stage",
    "CHUNK",
]

CHUNK = 1 << 16
MIN_DRAWS = 10_000
STREAM_DEMAND = 0


@dataclass(frozen=True)
class SimConfig:
    seed: int = DEFAULT_SEED
    n_draws: int = 1_000_000
    structure: MarketStructure = field(default_factory=lambda: MarketStructure("cournot_n", n=2))
    price_grid: tuple[float, ...] = ()
    workers: int = 1
    record_draws: int = 0

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.n_draws < MIN_DRAWS:
            raise ValueError(f"n_draws must be at least {MIN_DRAWS}")
        if any(not (r >= 0) for r in self.price_grid):
            raise ValueError("price grid must be nonnegative")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        object.__setattr__(self, "price_grid", tuple(float(r) for r in self.price_grid))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["price_grid"] = list(self.price_grid)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        d = dict(d)
        if "structure" in d and isinstance(d["structure"], dict):
            d["structure"] = MarketStructure.from_dict(d["structure"])
        if "price_grid" in d:
            d["price_grid"] = tuple(d["price_grid"])
        return cls(**d)


def _chunks(n: int) -> list[tuple[int, int]]:
    return [(i, min(CHUNK, n - i * CHUNK)) for i in range(math.ceil(n / CHUNK))]


def _map_chunks(fn, n: int, workers: int):
    parts = _chunks(n)
    if workers == 1:
        return [fn(i, size) for i, size in parts]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(lambda p: fn(*p), parts))


def _draw(d: DemandDistribution, seed: int, chunk: int, size: int) -> np.ndarray:
    return np.asarray(d.sample(size, make_rng(seed, STREAM_DEMAND, chunk)), dtype=float)


def sample(d: DemandDistribution, n_draws: int, seed: int = DEFAULT_SEED,
           workers: int = 1) -> np.ndarray:
    """``n_draws`` reproducible demand realisations."""
    if n_draws < 1:
        raise ValueError("n_draws must be positive")
    parts = _map_chunks(lambda i, s: _draw(d, seed, i, s), n_draws, workers)
    return np.concatenate(parts)


@dataclass(frozen=True)
class McEstimate:
    value: float
    stderr: float

    def agrees(self, target: float, k: float = 4.0) -> bool:
        return abs(self.value - target) <= k * self.stderr + 1e-15 * max(1.0, abs(target))


class _Moments:
    """Chunk-wise sums merged in index order."""

    def __init__(self, width: int):
        self.n = 0
        self.s = np.zeros(width)
        self.ss = np.zeros(width)

    def add(self, x: np.ndarray) -> None:
        self.n += x.shape[0]
        self.s += x.sum(axis=0)
        self.ss += (x * x).sum(axis=0)

    def mean(self) -> np.ndarray:
        return self.s / self.n

    def stderr(self) -> np.ndarray:
        m = self.mean()
        var = np.maximum(self.ss / self.n - m * m, 0.0) * self.n / max(self.n - 1, 1)
        return np.sqrt(var / self.n)


def _excess_moments(d, prices: np.ndarray, config: SimConfig) -> _Moments:
    def work(i, size):
        a = _draw(d, config.seed, i, size)
        return np.maximum(a[:, None] - prices[None, :], 0.0)

    acc = _Moments(len(prices))
    for part in _map_chunks(work, config.n_draws, config.workers):
        acc.add(part)
    return acc


def mc_expected_profit(d: DemandDistribution, r, lambda_M: float = 1.0,
                       config: SimConfig | None = None):
    """Monte Carlo ``lambda_M * r * E(alpha - r)_+`` with its standard error.

    ``r`` may be a scalar (returns one :class:`McEstimate`) or a sequence
    (returns a list, all prices evaluated on the same draws).
    """
    config = config or SimConfig()
    scalar = np.ndim(r) == 0
    prices = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(prices < 0):
        raise ValueError("price must be nonnegative")
    acc = _excess_moments(d, prices, config)
    val = lambda_M * prices * acc.mean()
    se = lambda_M * prices * acc.stderr()
    out = [McEstimate(float(v), float(s)) for v, s in zip(val, se)]
    return out[0] if scalar else out


@dataclass
class SimReport:
    policy: str
    structure: dict
    n_draws: int
    seed: int
    r_star: float | None
    supplier_profit: McEstimate
    retailer_profit: McEstimate
    total_order: McEstimate
    no_trade: McEstimate
    price_grid: list[float] = field(default_factory=list)
    grid_profit: list[McEstimate] = field(default_factory=list)
    empirical_argmax: float | None = None
    profit_table_error: float | None = None
    records: list[dict] = field(default_factory=list)

    def as_dict(self) -> dict:
        est = lambda e: {"value": e.value, "stderr": e.stderr}
        return {
            "policy": self.policy, "structure": self.structure, "n_draws": self.n_draws,
            "seed": self.seed, "r_star": self.r_star,
            "supplier_profit": est(self.supplier_profit),
            "retailer_profit": est(self.retailer_profit),
            "total_order": est(self.total_order),
            "no_trade": est(self.no_trade),
            "grid": [{"r": r, **est(e)} for r, e in zip(self.price_grid, self.grid_profit)],
            "empirical_argmax": self.empirical_argmax,
            "profit_table_error": self.profit_table_error,
            "records": self.records,
        }

    def grid_csv(self, fmt=lambda x: format(x, ".17g")) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "profit", "stderr"])
        for r, e in zip(self.price_grid, self.grid_profit):
            w.writerow([fmt(r), fmt(e.value), fmt(e.stderr)])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


def _cournot_profits(alpha: np.ndarray, r: np.ndarray, n: int):
    ex = np.maximum(alpha - r, 0.0)
    return n / (n + 1) * r * ex, ex * ex / (n + 1) ** 2


def mc_two_stage(d: DemandDistribution, structure: MarketStructure | None = None,
                 r_policy: str = "optimal_stochastic", config: SimConfig | None = None,
                 r_star: float | None = None) -> SimReport:
    """Play the game forward on simulated demand.

    ``optimal_stochastic`` posts the fixed price ``r*`` before demand is seen;
    ``oracle_deterministic`` posts ``alpha / 2`` after seeing it.  Retailers
    then play the second-stage equilibrium computed from the inverse demand.
    """
    config = config or SimConfig()
    structure = structure or config.structure
    if r_policy not in ("optimal_stochastic", "oracle_deterministic"):
        raise ValueError("r_policy must be optimal_stochastic or oracle_deterministic")
    if r_policy == "optimal_stochastic" and r_star is None:
        r_star = optimal_price(d).price
    n = structure.retailers
    check_t3 = structure.kind == "cournot_n" and structure.beta == 1.0

    def work(i, size):
        a = _draw(d, config.seed, i, size)
        r = np.full_like(a, r_star) if r_policy == "optimal_stochastic" else a / 2
        pl = play(structure, a, r)
        cols = np.column_stack([pl.supplier_profit, pl.retailer_profits.mean(axis=1),
                                pl.quantities.sum(axis=1), (a <= r).astype(float)])
        err = 0.0
        if check_t3:
            s3, i3 = _cournot_profits(a, r, n)
            err = float(max(np.max(np.abs(pl.supplier_profit - s3) / (1 + s3)),
                            np.max(np.abs(pl.retailer_profits - i3[:, None]) / (1 + i3[:, None]))))
        rec = None
        if i == 0 and config.record_draws:
            k = min(config.record_draws, size)
            rec = [{"alpha": float(a[j]), "r": float(r[j]),
                    "q": pl.quantities[j].tolist(), "p": pl.prices[j].tolist(),
                    "retailer_profit": pl.retailer_profits[j].tolist(),
                    "supplier_profit": float(pl.supplier_profit[j])} for j in range(k)]
        return cols, err, rec

    acc = _Moments(4)
    max_err = 0.0
    records: list[dict] = []
    for cols, err, rec in _map_chunks(work, config.n_draws, config.workers):
        acc.add(cols)
        max_err = max(max_err, err)
        if rec:
            records = rec
    mean, se = acc.mean(), acc.stderr()
    est = [McEstimate(float(m), float(s)) for m, s in zip(mean, se)]

    grid = list(config.price_grid)
    grid_est: list[McEstimate] = []
    argmax = None
    if grid:
        grid_est = mc_expected_profit(d, grid, lambda_M(structure, aggregate=True), config)
        argmax = float(grid[int(np.argmax([e.value for e in grid_est]))])
    return SimReport(r_policy, structure.to_dict(), config.n_draws, int(config.seed),
                     r_star, est[0], est[1], est[2], est[3], grid, grid_est, argmax,
                     max_err if check_t3 else None, records)


def analytic_grid_profit(d: DemandDistribution, grid: Sequence[float],
                         structure: MarketStructure) -> np.ndarray:
    """Closed-form / quadrature counterpart of the Monte Carlo grid estimates."""
    return np.asarray(expected_profit(d, np.asarray(grid, float), lambda_M(structure, True)))
