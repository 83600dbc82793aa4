"""Command-line entry point: ``mrdprice <command> [options]``.

Every output file carries a run manifest (a ``manifest`` key in JSON, ``#``
header lines in CSV).  Numeric CSV fields are written with 17 significant
digits so identical manifests reproduce byte-identical numbers.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import warnings
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from ._rng import DEFAULT_SEED
from .distributions import (Exponential, Gamma, GeneralizedPareto, Kumaraswamy, classify,
                            from_spec)
from .equilibrium import NoFiniteOptimum, optimal_price, profit_curve, unimodality_report
from .market import (CSV_COLUMNS, MarketStructure, domain_check, no_trade_probability,
                     performance_rows, ratio_analytics)
from .orders import GAP_TOL, GRID_POINTS, check_order, statics_suite
from .sim import SimConfig, mc_two_stage

EXIT_OK, EXIT_INPUT, EXIT_NO_OPTIMUM, EXIT_ORDER_FAILS = 0, 1, 2, 3


class InputError(Exception):
    pass


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


@dataclass(frozen=True)
class RunManifest:
    command: str
    input_digest: str
    seeds: list
    tolerances: dict
    version: str
    timestamp: str

    def header_lines(self) -> str:
        return "".join(f"# {k}: {json.dumps(v, sort_keys=True)}\n" for k, v in asdict(self).items())


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return t.strftime("%Y-%m-%dT%H:%M:%SZ")


def _manifest(command: str, inputs, args) -> RunManifest:
    blob = json.dumps(inputs, sort_keys=True, separators=(",", ":"), default=str)
    tol = {"abs_tol": args.abs_tol, "grid_points": args.grid_points}
    return RunManifest(command, hashlib.sha256(blob.encode()).hexdigest(),
                       [args.seed], tol, __version__, _timestamp())


def _load_json(arg: str | None, what: str):
    if arg is None:
        raise InputError(f"{what} is required")
    text = arg if arg.lstrip().startswith(("{", "[")) else None
    if text is None:
        try:
            text = Path(arg).read_text()
        except OSError as exc:
            raise InputError(f"cannot read {what} {arg!r}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {what}: {exc}") from exc


def _load_dist(arg, what, seed):
    spec = _load_json(arg, what)
    try:
        return spec, from_spec(spec, seed=seed)
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"invalid {what}: {exc}") from exc


def _out_dir(args) -> Path:
    p = Path(args.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _write_json(path: Path, payload: dict, manifest: RunManifest) -> None:
    payload = {"manifest": asdict(manifest), **payload}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, float) and not math.isfinite(o):
        return str(o)
    raise TypeError(f"not serialisable: {type(o).__name__}")


def _write_csv(path: Path, header, rows, manifest: RunManifest) -> None:
    buf = io.StringIO()
    buf.write(manifest.header_lines())
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    path.write_text(buf.getvalue())


def _emit(payload: dict) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True, default=_json_default))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_solve(args) -> int:
    spec, d = _load_dist(args.dist, "--dist", args.seed)
    man = _manifest("solve", spec, args)
    out = _out_dir(args)
    tol = args.abs_tol if args.abs_tol is not None else 1e-10
    try:
        res = optimal_price(d, tol=tol)
    except NoFiniteOptimum as exc:
        _write_json(out / "solve.json", {"no_finite_optimum": True, "message": str(exc)}, man)
        print(f"no finite optimum: {exc}", file=sys.stderr)
        return EXIT_NO_OPTIMUM
    cls = classify(d).as_dict() if _classifiable(d) else None
    uni = unimodality_report(d).as_dict()
    payload = {"distribution": spec, "equilibrium": res.as_dict(), "classification": cls,
               "unimodality": uni, "mean": d.mean, "second_moment": d.second_moment}
    _write_json(out / "solve.json", payload, man)

    lo, hi = d.support
    top = max(list(res.prices) + [p[0] for p in res.plateaus] + [d.mean])
    if math.isfinite(hi):
        r_hi = hi
    else:
        r_hi = max(float(d.quantile(0.999)), 2.5 * top)
    grid = np.linspace(0.0, r_hi, args.grid_points)
    curve = profit_curve(d, 1.0, grid)
    _write_csv(out / "profit_curve.csv", ["r", "profit"], curve.samples, man)
    if res.prices:
        print(f"r* = {', '.join(fmt(p) for p in res.prices)} ({res.boundary_case})")
    for a, b in res.plateaus:
        print(f"flat optimum: m(r) = r on [{fmt(a)}, {fmt(b)}]")
    _emit({"equilibrium": res.as_dict()})
    return EXIT_OK


def _classifiable(d) -> bool:
    try:
        classify(d)
        return True
    except (ValueError, NotImplementedError):
        return False


def cmd_orders(args) -> int:
    spec1, d1 = _load_dist(args.dist, "--dist", args.seed)
    spec2, d2 = _load_dist(args.dist2, "--dist2", args.seed)
    man = _manifest("orders", {"X1": spec1, "X2": spec2, "order": args.order}, args)
    try:
        v = check_order(args.order, d1, d2, n=max(args.grid_points, GRID_POINTS),
                        tol=args.abs_tol if args.abs_tol is not None else GAP_TOL,
                        allow_unequal_means=args.allow_unequal_means)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    _write_json(_out_dir(args) / "orders.json", {"verdict": v.as_dict()}, man)
    _emit(v.as_dict())
    return EXIT_OK if v.holds else EXIT_ORDER_FAILS


def cmd_statics(args) -> int:
    scn = _load_json(args.scenario, "--scenario")
    scenarios = scn if isinstance(scn, list) else [scn]
    man = _manifest("statics", scenarios, args)
    rows = []
    for s in scenarios:
        if not isinstance(s, dict):
            raise InputError("each scenario must be a JSON object")
        s = dict(s)
        s.setdefault("seed", args.seed)
        try:
            rows.extend(statics_suite(s))
        except (ValueError, KeyError, TypeError) as exc:
            raise InputError(f"scenario {s.get('theorem')!r}: {exc}") from exc
    out = _out_dir(args)
    _write_json(out / "statics.json", {"rows": [r.as_dict() for r in rows]}, man)
    _write_csv(out / "statics.csv", ["theorem", "transformation", "hypothesis", "price_relation",
                                     "status"],
               [[r.theorem, r.transformation, r.hypothesis, r.price_relation, r.status]
                for r in rows], man)
    for r in rows:
        prices = ", ".join(f"{k}={v}" for k, v in r.prices.items())
        extra = f" (failed: {r.failed_premise})" if r.failed_premise else ""
        print(f"{r.theorem}: {r.price_relation}: {r.status}{extra} [{prices}]")
    return EXIT_OK


def _parse_alpha_grid(text: str) -> np.ndarray:
    try:
        lo, hi, steps = text.split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError as exc:
        raise InputError("--alpha-grid must look like LO:HI:STEPS") from exc
    if not (0 < lo < hi) or steps < 2:
        raise InputError("--alpha-grid needs 0 < LO < HI and STEPS >= 2")
    return np.linspace(lo, hi, steps)


def _parse_n(text: str) -> list[int]:
    try:
        ns = [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InputError("--n must be a comma-separated list of integers") from exc
    if not ns or any(n < 1 for n in ns):
        raise InputError("--n values must be >= 1")
    return ns


def notrade_sweeps() -> list[tuple]:
    """No-trade probabilities over the three parameter sweeps (exp, Beta(1, l), Pareto II)."""
    rows = []
    for lam in np.round(np.linspace(0.5, 5.0, 10), 10):
        d = Exponential(float(lam))
        rows.append(("exponential", "lambda", float(lam), *_nt(d)))
    for lam in (1, 2, 4, 8, 16, 32, 64, 100, 150, 200):
        rows.append(("kumaraswamy", "lambda", float(lam), *_nt(Kumaraswamy(float(lam)))))
    for eps in (0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0):
        rows.append(("gpareto", "eps", eps, *_nt(GeneralizedPareto.from_epsilon(eps))))
    return rows


def _nt(d):
    rep = no_trade_probability(d)
    return rep.r_star, rep.probability, rep.is_dmrd, rep.bound


def cmd_performance(args) -> int:
    if args.dist:
        spec, d = _load_dist(args.dist, "--dist", args.seed)
    else:
        spec, d = {"family": "gamma", "params": {"shape": 2, "scale": 2}}, Gamma(2.0, 2.0)
    ns = _parse_n(args.n or "2,5,8")
    try:
        r_star = optimal_price(d).price
    except NoFiniteOptimum as exc:
        print(f"no finite optimum: {exc}", file=sys.stderr)
        return EXIT_NO_OPTIMUM
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    alphas = _parse_alpha_grid(args.alpha_grid) if args.alpha_grid else \
        np.linspace(r_star, 6 * r_star, 501)[1:]
    man = _manifest("performance", {"dist": spec, "n": ns,
                                    "alpha": [float(alphas[0]), float(alphas[-1]), len(alphas)]},
                    args)
    out = _out_dir(args)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        rows = performance_rows(d, alphas, ns, r_star)
    _write_csv(out / "performance.csv", CSV_COLUMNS, [r.row() for r in rows], man)
    markers = []
    for n in ns:
        a = ratio_analytics(r_star, n)
        markers.append([n, r_star, a.argmax, a.max_value, a.limit, 2 * r_star,
                        a.gt1_interval[0], a.gt1_interval[1]])
    _write_csv(out / "ratio_markers.csv", ["n", "r_star", "argmax", "max_value", "limit",
                                           "crossing", "gt1_lo", "gt1_hi"], markers, man)
    _write_csv(out / "notrade_sweep.csv", ["family", "parameter", "value", "r_star", "F_r_star",
                                           "is_dmrd", "bound"],
               [[f, p, v, r, F, str(dm).lower(), b] for f, p, v, r, F, dm, b in notrade_sweeps()],
               man)
    notes = domain_check(d, r_star, ns)
    if args.gnuplot:
        (out / "figures.gp").write_text(_gnuplot(ns))
    _write_json(out / "performance.json", {"r_star": r_star, "domain_warnings": notes,
                                           "markers": [dict(zip(["n", "r_star", "argmax",
                                                                 "max_value", "limit",
                                                                 "crossing", "gt1_lo", "gt1_hi"],
                                                                m)) for m in markers]}, man)
    print(f"r* = {fmt(r_star)}; wrote {len(rows)} rows to {out / 'performance.csv'}")
    for w in notes:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


def _gnuplot(ns) -> str:
    lines = ["set datafile separator ','", "set datafile commentschars '#'", "set key autotitle columnhead",
             "set terminal pngcairo size 900,500", "set output 'ratio.png'",
             "set xlabel 'alpha'", "set ylabel 'aggregate ratio'"]
    plots = [f"'performance.csv' using (column('n')=={n} ? column('alpha') : 1/0):'ratio' "
             f"with lines title 'n={n}'" for n in ns]
    lines.append("plot " + ", \\\n     ".join(plots))
    lines += ["set output 'notrade.png'", "set xlabel 'parameter'", "set ylabel 'F(r*)'",
              "plot 'notrade_sweep.csv' using 'value':'F_r_star' with linespoints title 'F(r*)'"]
    return "\n".join(lines) + "\n"


def cmd_simulate(args) -> int:
    spec, d = _load_dist(args.dist, "--dist", args.seed)
    cfg_in = _load_json(args.config, "--config") if args.config else {}
    try:
        cfg_in = dict(cfg_in)
        if "structure" not in cfg_in:
            n = _parse_n(args.n or "2")[0]
            cfg_in["structure"] = {"kind": args.structure, "beta": args.beta, "gamma": args.gamma,
                                   "n": n, "allow_gamma_gt_beta": args.allow_beta_le_gamma}
        cfg_in.setdefault("seed", args.seed)
        cfg_in.setdefault("n_draws", args.draws)
        cfg = SimConfig.from_dict(cfg_in)
    except (ValueError, TypeError) as exc:
        raise InputError(f"invalid simulation config: {exc}") from exc
    r_star = None
    if args.policy == "optimal_stochastic":
        try:
            r_star = optimal_price(d).price
        except NoFiniteOptimum as exc:
            print(f"no finite optimum: {exc}", file=sys.stderr)
            return EXIT_NO_OPTIMUM
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    if not cfg.price_grid:
        centre = r_star if r_star is not None else optimal_price(d).price
        cfg = SimConfig(cfg.seed, cfg.n_draws, cfg.structure,
                        tuple(np.linspace(0.5 * centre, 1.5 * centre, 21)), cfg.workers,
                        cfg.record_draws)
    man = _manifest("simulate", {"dist": spec, "config": cfg.to_dict(), "policy": args.policy},
                    args)
    rep = mc_two_stage(d, cfg.structure, args.policy, cfg, r_star=r_star)
    out = _out_dir(args)
    _write_json(out / "sim.json", {"report": rep.as_dict(), "config": cfg.to_dict()}, man)
    _write_csv(out / "sim_grid.csv", ["r", "profit", "stderr"],
               [[r, e.value, e.stderr] for r, e in zip(rep.price_grid, rep.grid_profit)], man)
    print(f"empirical argmax = {fmt(rep.empirical_argmax)}; no-trade rate = "
          f"{fmt(rep.no_trade.value)} +/- {fmt(rep.no_trade.stderr)}")
    return EXIT_OK


def cmd_notrade(args) -> int:
    spec, d = _load_dist(args.dist, "--dist", args.seed)
    man = _manifest("notrade", spec, args)
    try:
        rep = no_trade_probability(d)
    except NoFiniteOptimum as exc:
        print(f"no finite optimum: {exc}", file=sys.stderr)
        return EXIT_NO_OPTIMUM
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    _write_json(_out_dir(args) / "notrade.json", {"no_trade": rep.as_dict()}, man)
    _emit(rep.as_dict())
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--draws", type=int, default=1_000_000)
    common.add_argument("--abs-tol", type=float, default=None,
                        help="root / order-gap tolerance (module default when omitted)")
    common.add_argument("--grid-points", type=int, default=512)
    common.add_argument("--allow-beta-le-gamma", action="store_true",
                        help="accept gamma > beta in differentiated-product structures")

    p = argparse.ArgumentParser(prog="mrdprice", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="optimal wholesale price")
    s.add_argument("--dist", required=True, help="distribution JSON file (or inline JSON)")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("orders", parents=[common], help="stochastic-order check")
    s.add_argument("--dist", required=True)
    s.add_argument("--dist2", required=True)
    s.add_argument("--order", default="mrl", choices=["st", "hr", "mrl", "cx", "disp", "ew"])
    s.add_argument("--allow-unequal-means", action="store_true",
                   help="run the cx tail comparison even when means differ")
    s.set_defaults(func=cmd_orders)

    s = sub.add_parser("statics", parents=[common], help="comparative-statics scenarios")
    s.add_argument("--scenario", required=True)
    s.set_defaults(func=cmd_statics)

    s = sub.add_parser("performance", parents=[common],
                       help="profit division, aggregate ratio and no-trade sweeps")
    s.add_argument("--dist", default=None)
    s.add_argument("--n", default=None, help="comma-separated retailer counts")
    s.add_argument("--alpha-grid", default=None, help="LO:HI:STEPS")
    s.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script")
    s.set_defaults(func=cmd_performance)

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo two-stage playout")
    s.add_argument("--dist", required=True)
    s.add_argument("--config", default=None, help="SimConfig JSON")
    s.add_argument("--n", default=None, help="retailers for cournot_n")
    s.add_argument("--structure", default="cournot_n")
    s.add_argument("--beta", type=float, default=1.0)
    s.add_argument("--gamma", type=float, default=0.0)
    s.add_argument("--policy", default="optimal_stochastic",
                   choices=["optimal_stochastic", "oracle_deterministic"])
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("notrade", parents=[common], help="no-trade probability F(r*)")
    s.add_argument("--dist", required=True)
    s.set_defaults(func=cmd_notrade)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.grid_points < 16:
        print("error: --grid-points must be at least 16", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
