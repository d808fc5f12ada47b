"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data/I-O error, 3 numerical or
nuisance-estimation failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .ci import CiRequest, adaptive_interval, compute_c_hat, oracle_interval_chernoff, oracle_interval_gaussian
from .limits import LimitParams, SamplerConfig, quantiles_boundary
from .model import BinnedCounts, GridSpec, ObservationSet, bin_observations, locate_anchor, npmle, npmle_via_gcm
from .nuisance import NuisanceError, estimate_nuisance
from .rng import DATA, default_threads, substream
from .sim import (
    CoverageReport,
    PER_REP_FIELDS,
    ScenarioSpec,
    build_grid,
    ecdf_compare,
    generate_dataset,
    load_battery,
    run_coverage,
)

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 1, 2, 3


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(rows, header, path=None) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        vals = [row[h] for h in header] if isinstance(row, dict) else row
        w.writerow([fmt(v) for v in vals])
    _emit(buf.getvalue(), path)


def _emit(text: str, path=None) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _positive(kind):
    def parse(s):
        v = kind(s)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {s}")
        return v
    return parse


def _float_list(s):
    try:
        return [float(x) for x in s.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


# -- data loading ------------------------------------------------------------


def _sidecar(path: Path) -> dict | None:
    side = path.with_suffix(".json")
    if side.exists() and side != path:
        with open(side) as fh:
            return json.load(fh)
    return None


def load_data(path, a=None, b=None, delta=None) -> BinnedCounts:
    """Read ``x,y`` records or ``t,N,Z`` counts and bin them on the grid.

    The grid comes from ``a``/``b``/``delta`` when given, else from the JSON
    sidecar written by ``simulate``, else (for ``t,N,Z`` input) from the
    listed grid points themselves.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError("empty file")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if r]
    if not body:
        raise DataError("no data rows")
    try:
        cols = np.array(body, dtype=float).T
    except ValueError as exc:
        raise DataError(f"malformed CSV: {exc}") from None

    if None in (a, b, delta):
        side = _sidecar(path)
        if side is not None and "grid" in side:
            g = side["grid"]
            a = g["a"] if a is None else a
            b = g["b"] if b is None else b
            delta = g["delta"] if delta is None else delta
    if header == ["t", "N", "Z"]:
        t = cols[0]
        if None in (a, b, delta):
            if t.size < 2:
                raise DataError("cannot infer grid from fewer than two points")
            delta = float(t[1] - t[0]) if delta is None else delta
            a = float(t[0] - delta) if a is None else a
            b = float(t[-1]) if b is None else b
        grid = GridSpec(a, b, delta)
        pos = np.rint((t - grid.a) / grid.delta).astype(int)
        if np.any(np.abs((t - grid.a) / grid.delta - pos) > 1e-9) or np.any((pos < 1) | (pos > grid.K)):
            raise DataError("off-grid observation in binned input")
        N = np.zeros(grid.K, dtype=np.int64)
        Z = np.zeros(grid.K, dtype=np.int64)
        np.add.at(N, pos - 1, cols[1].astype(np.int64))
        np.add.at(Z, pos - 1, cols[2].astype(np.int64))
        return BinnedCounts(grid, N, Z)
    if header == ["x", "y"]:
        if None in (a, b, delta):
            raise UsageError("grid unknown: pass --a, --b and --delta or provide a JSON sidecar")
        try:
            return bin_observations(ObservationSet(cols[0], cols[1]), GridSpec(a, b, delta))
        except ValueError as exc:
            raise DataError(str(exc)) from None
    raise DataError(f"unrecognised header {header!r}; expected x,y or t,N,Z")


def _fit(binned: BinnedCounts):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        est = npmle(binned)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return est


# -- subcommands -------------------------------------------------------------


def cmd_simulate(args) -> int:
    params = {"rate": args.rate} if args.dist == "exp" else {}
    spec = ScenarioSpec(gamma0=args.gamma, c0=args.c, n=args.n, a=args.a, b=args.b, x0=args.x0,
                        F_family={"unif": "uniform", "exp": "exp"}[args.dist], F_params=params,
                        reps=1, seed=args.seed)
    grid = build_grid(spec)
    obs = generate_dataset(spec, substream(args.seed, DATA, 0), grid)
    write_csv(zip(obs.x, obs.y), ["x", "y"], args.output)
    if args.output not in (None, "-"):
        side = Path(args.output).with_suffix(".json")
        side.write_text(json.dumps({"scenario": spec.to_dict(), "grid": grid.to_dict()}, indent=2) + "\n")
    return 0


def cmd_fit(args) -> int:
    binned = load_data(args.input, args.a, args.b, args.delta)
    est = _fit(binned)
    if args.check_gcm:
        other = npmle_via_gcm(binned)
        gap = float(np.max(np.abs(est.levels - other.levels)))
        if gap > 1e-12:
            print(f"error: PAVA and GCM fits differ by {gap:.3g}", file=sys.stderr)
            return EXIT_NUMERIC
        print(f"gcm check ok (max gap {gap:.3g})", file=sys.stderr)
    write_csv(zip(binned.grid.points, est.levels), ["t", "F_hat"], args.output)
    return 0


def _resolve_anchor(args, grid: GridSpec):
    if args.x0 is not None:
        try:
            return locate_anchor(grid, args.x0), False
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if args.tl is None:
        raise UsageError("give --x0 (anchor) or --tl (grid point, anchor-free mode)")
    pos = (args.tl - grid.a) / grid.delta
    l = int(round(pos))
    if abs(pos - l) > 1e-9 or not 1 <= l <= grid.K:
        raise UsageError("--tl is not a grid point")
    return (l, min(l + 1, grid.K), 0.0), True


def cmd_ci(args) -> int:
    binned = load_data(args.input, args.a, args.b, args.delta)
    grid = binned.grid
    anchor, grid_only = _resolve_anchor(args, grid)
    est = _fit(binned)
    n = binned.n
    cfg = SamplerConfig(K_a=args.Ka, B=args.B, seed=args.seed)
    l = anchor[0]
    if args.mode == "adaptive":
        nuis = estimate_nuisance(est, binned, *anchor, threshold_mult=args.threshold_mult, grid_only=grid_only)
        c_hat = compute_c_hat(grid.a, grid.b, grid.K, n)
        res = adaptive_interval(est, nuis, n, c_hat, CiRequest(args.eta, anchor, cfg))
    elif args.mode == "oracle-gaussian":
        if None in (args.alpha, args.c0, args.gamma0):
            raise UsageError("oracle-gaussian needs --alpha, --c0 and --gamma0")
        try:
            res = oracle_interval_gaussian(est, l, args.alpha, args.c0, args.gamma0, n, args.eta)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    else:
        if None in (args.alpha, args.beta):
            raise UsageError("oracle-chernoff needs --alpha and --beta")
        res = oracle_interval_chernoff(est, l, args.alpha, args.beta, n, args.eta, cfg)
    out = res.to_dict()
    out["sampler"] = asdict(cfg)
    out["anchor"] = {"l": anchor[0], "r": anchor[1], "rho": anchor[2], "grid_only": grid_only}
    _emit(json.dumps(out, indent=2) + "\n", args.output)
    return 0


def cmd_coverage(args) -> int:
    try:
        battery = load_battery(args.config)
    except FileNotFoundError:
        raise DataError(f"no such file: {args.config}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise DataError(f"bad config: {exc}") from None
    rows, per_rep = [], []
    for i, spec in enumerate(battery):
        if args.seed is not None:
            spec = ScenarioSpec.from_dict({**spec.to_dict(), "seed": args.seed + i})
        label = spec.name or f"scenario {i}"
        print(f"[{i + 1}/{len(battery)}] {label}", file=sys.stderr)
        try:
            rep = run_coverage(spec, threads=args.threads, keep_per_rep=args.per_rep is not None)
        except (ValueError, ArithmeticError) as exc:
            print(f"  failed: {exc}", file=sys.stderr)
            row = {h: math.nan for h in CoverageReport.CSV_FIELDS}
            row.update(name=spec.name, F_family=spec.F_family, F_params=json.dumps(spec.F_params, sort_keys=True),
                       gamma0=spec.gamma0, c0=spec.c0, n=spec.n, reps=spec.reps, failures=spec.reps, error=str(exc))
            rows.append(row)
            continue
        rows.append({**rep.row(), "error": ""})
        per_rep.extend({"scenario": i, **r} for r in rep.per_rep)
    write_csv(rows, list(CoverageReport.CSV_FIELDS) + ["error"], args.output)
    if args.per_rep is not None:
        write_csv(per_rep, ["scenario", *PER_REP_FIELDS], args.per_rep)
    return 0


def cmd_quantiles(args) -> int:
    try:
        params = LimitParams(args.c, args.alpha, args.beta)
        cfg = SamplerConfig(K_a=args.Ka, B=args.B, seed=args.seed)
        if any(not 0 < p < 1 for p in args.probs) or not args.probs:
            raise ValueError("probabilities must lie in (0, 1)")
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    table = quantiles_boundary(params, args.probs, cfg, threads=args.threads)
    _emit(table.to_json() + "\n", args.output)
    return 0


def cmd_ecdf(args) -> int:
    try:
        for c in args.c_list:
            LimitParams(c, args.alpha, args.beta)
        if args.B < 1000:
            raise ValueError("--B must be at least 1000")
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = ecdf_compare(args.alpha, args.beta, args.c_list, B=args.B, seed=args.seed, K_a=args.Ka,
                        threads=args.threads)
    write_csv(rows, ["c", "KS_to_gaussian", "KS_to_chernoff"], args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gridcs", description="Adaptive inference for current status data on a grid.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    pos_f, pos_i = _positive(float), _positive(int)

    def grid_flags(sp):
        sp.add_argument("--a", type=float, help="left end of the time interval")
        sp.add_argument("--b", type=float, help="right end of the time interval")
        sp.add_argument("--delta", type=pos_f, help="grid spacing")

    def mc_flags(sp, B=3000):
        sp.add_argument("--Ka", type=pos_i, default=300, help="truncation half-width of the boundary process")
        sp.add_argument("--B", type=pos_i, default=B, help="Monte Carlo draws")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=pos_i, default=default_threads())

    s = sub.add_parser("simulate", help="generate a current status dataset on a grid")
    s.add_argument("--dist", choices=["unif", "exp"], default="unif")
    s.add_argument("--rate", type=pos_f, default=1.0, help="exponential rate")
    s.add_argument("--a", type=float, default=0.0)
    s.add_argument("--b", type=float, default=1.0)
    s.add_argument("--x0", type=float, default=None)
    s.add_argument("--gamma", type=float, required=True)
    s.add_argument("--c", type=pos_f, required=True)
    s.add_argument("--n", type=pos_i, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--output", default=None)
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("fit", help="NPMLE of F on the grid")
    f.add_argument("input")
    grid_flags(f)
    f.add_argument("--check-gcm", action="store_true", help="cross-check against the GCM characterisation")
    f.add_argument("-o", "--output", default=None)
    f.set_defaults(func=cmd_fit)

    c = sub.add_parser("ci", help="confidence interval for F at a grid point")
    c.add_argument("input")
    grid_flags(c)
    c.add_argument("--eta", type=float, default=0.05, help="total miscoverage")
    c.add_argument("--x0", type=float, help="anchor point; t_l is the largest grid point <= x0")
    c.add_argument("--tl", type=float, help="target grid point (anchor-free mode)")
    c.add_argument("--mode", choices=["adaptive", "oracle-gaussian", "oracle-chernoff"], default="adaptive")
    c.add_argument("--alpha", type=pos_f, help="true alpha (oracle modes)")
    c.add_argument("--beta", type=pos_f, help="true beta (oracle-chernoff)")
    c.add_argument("--gamma0", type=float, help="true grid exponent (oracle-gaussian)")
    c.add_argument("--c0", type=pos_f, help="true grid scale (oracle-gaussian)")
    c.add_argument("--threshold-mult", type=pos_f, default=1.0)
    mc_flags(c)
    c.add_argument("-o", "--output", default=None)
    c.set_defaults(func=cmd_ci)

    v = sub.add_parser("coverage", help="coverage study over a scenario battery")
    v.add_argument("config")
    v.add_argument("--seed", type=int, default=None, help="override scenario seeds with seed+index")
    v.add_argument("--threads", type=pos_i, default=default_threads())
    v.add_argument("--per-rep", default=None, help="also write per-replication rows here")
    v.add_argument("-o", "--output", default=None)
    v.set_defaults(func=cmd_coverage)

    q = sub.add_parser("quantiles", help="quantile table of the boundary family S_c")
    q.add_argument("--c", type=float, required=True)
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--beta", type=float, required=True)
    q.add_argument("--probs", type=_float_list, default=[0.025, 0.975])
    mc_flags(q)
    q.add_argument("-o", "--output", default=None)
    q.set_defaults(func=cmd_quantiles)

    e = sub.add_parser("ecdf", help="KS distances of S_c to its Gaussian and Chernoff limits")
    e.add_argument("--alpha", type=float, required=True)
    e.add_argument("--beta", type=float, required=True)
    e.add_argument("--c-list", type=_float_list, default=[1, 2, 3, 5, 10])
    mc_flags(e, B=5000)
    e.add_argument("-o", "--output", default=None)
    e.set_defaults(func=cmd_ecdf)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "simulate":
        if not 0 < args.gamma <= 1:
            parser.error("--gamma must lie in (0, 1]")
        if args.x0 is None:
            args.x0 = (args.a + args.b) / 2
    if getattr(args, "eta", None) is not None and not 0 < args.eta < 1:
        parser.error("--eta must lie in (0, 1)")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"gridcs: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"gridcs: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NuisanceError, ArithmeticError) as exc:
        print(f"gridcs: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"gridcs: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
