"""Command line interface.

Exit codes: 0 success, 2 bad input, 3 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import baselines, fitting, harness, separators
from .distributions import DistributionSpec
from .errors import ConvergenceError, TailsepError, TiedThresholdError
from .tail_tests import SortedSample, location_scale_free_test, scale_free_test

EXIT_OK, EXIT_INPUT, EXIT_CONVERGENCE = 0, 2, 3

SEPARATOR_KINDS = ("w-lw", "lw-rv", "exponential", "pareto")


class InputError(TailsepError, ValueError):
    """Malformed input file or arguments."""


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------

def parse_k_grid(text: str) -> list[int]:
    """``"10:1000:10"`` (inclusive) or ``"5,10,20"``."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            start, stop, step = parts
            if step <= 0:
                raise ValueError
            grid = list(range(start, stop + 1, step))
        else:
            grid = [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise InputError(f"bad k grid {text!r}; use start:stop:step or a comma list") from None
    if not grid or min(grid) < 1:
        raise InputError(f"k grid {text!r} must contain positive integers")
    return grid


def parse_floats(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise InputError(f"bad number list {text!r}") from None


def parse_cdf(text: str, b: float | None = None):
    """A separator (``w-lw:1.8``, ``lw-rv:0.6``) or a distribution (``weibull:2/3,1``)."""
    name, _, rest = text.partition(":")
    if name.lower() in SEPARATOR_KINDS:
        par = float(rest) if rest else b
        return separators.make_separator(name, par)
    return DistributionSpec.parse(text)


def read_column(path: str, column: str | None) -> np.ndarray:
    """One numeric column of a headered CSV; empty or non-numeric cells are errors."""
    try:
        fh = sys.stdin if path == "-" else open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    with fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InputError(f"{path} is empty")
    header = [h.strip() for h in rows[0]]
    if column is None:
        idx = 0
    elif column in header:
        idx = header.index(column)
    else:
        try:
            idx = int(column)
        except ValueError:
            raise InputError(f"no column {column!r} in {path} (have {header})") from None
        if not 0 <= idx < len(header):
            raise InputError(f"column index {idx} out of range for {len(header)} columns")
    values = []
    for line, row in enumerate(rows[1:], start=2):
        if not any(cell.strip() for cell in row):
            continue
        cell = row[idx].strip() if idx < len(row) else ""
        try:
            v = float(cell)
        except ValueError:
            v = math.nan
        if not math.isfinite(v):
            raise InputError(f"{path}:{line}: missing or non-numeric value {cell!r}")
        values.append(v)
    if not values:
        raise InputError(f"{path} has no data rows")
    return np.array(values)


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.17g}"
    if isinstance(x, (list, tuple)):
        return ";".join(_fmt(v) for v in x)
    return "" if x is None else str(x)


def write_output(text: str, out: str | None):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _finite(obj):
    """Replace non-finite floats (e.g. the alpha = 1 threshold) by None."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def _json(doc) -> str:
    return json.dumps(_finite(doc), indent=2, allow_nan=False) + "\n"


def _csv_rows(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows([_fmt(v) for v in row] for row in rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# the test pipeline
# ---------------------------------------------------------------------------

def build_sample(values, population_n: int | None = None, threshold: float | None = None):
    """Sorted sample for the tests.

    With ``threshold`` only values above it are kept and the threshold itself
    becomes the next lower order statistic.  With ``population_n`` the kept
    values are the top order statistics of a population of that size.
    """
    x = np.asarray(values, dtype=float)
    if threshold is not None:
        x = np.concatenate([[threshold], x[x > threshold]])
    return SortedSample(x, n=population_n)


def run_tests(sample: SortedSample, k_grid, separator, test="scale-free", alpha=0.05,
              side="right", gamma=None):
    test = test.replace("_", "-")
    kmax = max(k_grid)
    used = sample.values[-min(sample.m, kmax + 1):]
    if used.size > 1 and np.ptp(used) == 0:
        raise TiedThresholdError("the top order statistics are all equal")
    out = []
    for k in k_grid:
        if test == "scale-free":
            out.append(scale_free_test(sample, k, separator, alpha, side))
        elif test == "location-scale-free":
            out.append(location_scale_free_test(sample, k, separator, alpha, side, gamma))
        else:
            raise InputError(f"unknown test {test!r}")
    return out


def _separator_from_args(args, test):
    b = args.b if args.b is not None else separators.default_b(args.separator, test)
    sep = separators.make_separator(args.separator, b)
    if args.gamma is not None:
        sep = sep.with_gamma(args.gamma)
    return sep


def cmd_test(args) -> dict:
    values = read_column(args.input, args.column)
    sample = build_sample(values, args.population_n, args.threshold)
    if args.k is None and args.k_grid is None:
        raise InputError("give --k or --k-grid")
    k_grid = [args.k] if args.k is not None else parse_k_grid(args.k_grid)
    sep = _separator_from_args(args, args.test)
    outcomes = run_tests(sample, k_grid, sep, args.test, args.alpha, args.side, args.gamma)
    doc = {"separator": sep.to_dict(), "observed": sample.m, "n": sample.n,
           "outcomes": [o.to_dict() for o in outcomes]}
    if len(outcomes) >= 10:
        sign = 1.0 if args.side == "right" else -1.0
        scores = [sign * o.score / o.sigma for o in outcomes]
        beh = harness.classify_k_behavior(k_grid, scores, outcomes[0].threshold * sign
                                          / outcomes[0].sigma, args.alpha)
        doc["behavior"] = {"behavior": beh.behavior, "exceed_fraction": beh.exceed_fraction,
                           "trend_stat": beh.trend_stat, "interval": list(beh.interval),
                           "reject": beh.reject}
    return doc


def _test_csv(doc):
    keys = ["k", "n", "statistic", "score", "sigma", "threshold", "p_value", "reject"]
    return _csv_rows(keys, [[o[key] for key in keys] for o in doc["outcomes"]])


# ---------------------------------------------------------------------------
# other subcommands
# ---------------------------------------------------------------------------

_MODELS = {"exponential": fitting.fit_exponential, "weibull": fitting.fit_weibull,
           "gpd": fitting.fit_gpd}


def cmd_fit(args) -> dict:
    x = fitting.exceedances(read_column(args.input, args.column), args.threshold)
    models = list(_MODELS) if args.model == "all" else [args.model]
    fits = [_MODELS[m](x).to_dict() for m in models]
    for f in fits:
        f.pop("extra", None)
    return {"threshold": args.threshold, "n": int(x.size), "mean": float(x.mean()), "fits": fits}


def _fit_csv(doc):
    rows = [[f["model"], name, val, f["loglik"], f["n"]]
            for f in doc["fits"] for name, val in f["params"].items()]
    return _csv_rows(["model", "parameter", "value", "loglik", "n"], rows)


def cmd_qq(args) -> dict:
    x = fitting.exceedances(read_column(args.input, args.column), args.threshold)
    return {key: [float(v) for v in col] for key, col in fitting.qq_table(x).items()}


def _qq_csv(doc):
    keys = list(doc)
    return _csv_rows(keys, list(zip(*(doc[key] for key in keys))))


def _experiment_from_args(args) -> harness.ExperimentSpec:
    preset = harness.PRESETS[args.preset] if args.preset else {}
    n = args.n if args.n is not None else preset.get("n")
    m = args.m if args.m is not None else preset.get("m")
    alpha = args.alpha if args.alpha is not None else preset.get("alpha", 0.05)
    if args.k_grid is not None:
        k_grid = parse_k_grid(args.k_grid)
    elif args.k is not None:
        k_grid = [args.k]
    else:
        k_grid = preset.get("k_grid")
    if n is None or m is None or k_grid is None:
        raise InputError("simulate needs --n, --m and --k-grid (or a --preset)")
    test = args.test.replace("-", "_")
    sep = _separator_from_args(args, test) if test in ("scale_free", "location_scale_free") else None
    return harness.ExperimentSpec(DistributionSpec.parse(args.dist), test, n, m, k_grid, alpha,
                                  args.side, args.seed, sep, args.gamma)


def cmd_simulate(args):
    spec = _experiment_from_args(args)
    return harness.run_rejection_curve(spec, workers=args.workers)


def cmd_check(args) -> dict:
    lighter, heavier = parse_cdf(args.lighter, args.b), parse_cdf(args.heavier, args.b)
    t_grid = np.logspace(*parse_floats(args.t_range), args.n_t) if args.t_range else None
    c_grid = np.logspace(*parse_floats(args.c_range), args.n_c) if args.c_range else None
    if args.condition == "C":
        rep = separators.check_C_delta(lighter, heavier, args.delta, t_grid, c_grid)
    elif args.condition == "prop1":
        rep = separators.check_prop1(lighter, heavier, args.delta, t_grid, c_grid)
    else:
        lo, hi = parse_floats(args.x_range) if args.x_range else (1.0, 50.0)
        rep = separators.check_B_condition(lighter, heavier, args.epsilon,
                                           np.linspace(lo, hi, args.n_t))
    doc = rep.to_dict()
    doc["lighter"], doc["heavier"] = args.lighter, args.heavier
    return doc


def cmd_calibrate(args) -> baselines.CriticalValueTable:
    if args.k_grid is None:
        raise InputError("calibrate needs --k-grid")
    return baselines.calibrate_critical_values(
        args.test.replace("-", "_"), parse_floats(args.alpha), parse_k_grid(args.k_grid),
        args.n, args.m, args.seed, args.side)


def _calibrate_json(table):
    return {"kind": table.kind, "side": table.side, "n": table.n, "m": table.m,
            "seed": table.seed, "alpha": [float(a) for a in table.alpha_levels],
            "k": [int(k) for k in table.k_grid],
            "critical_values": [[float(v) for v in row] for row in table.values]}


# ---------------------------------------------------------------------------
# argument parser
# ---------------------------------------------------------------------------

def _add_input(p):
    p.add_argument("--input", required=True, help="headered CSV file ('-' for stdin)")
    p.add_argument("--column", help="column name or 0-based index (default: first)")
    p.add_argument("--threshold", type=float, help="keep only values above this level")


def _add_separator(p):
    p.add_argument("--separator", default="w-lw", choices=SEPARATOR_KINDS)
    p.add_argument("--b", type=float, help="separator shape (default depends on the test)")
    p.add_argument("--gamma", type=float, help="override the separator's extreme value index")


def _add_output(p, default_fmt):
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default=default_fmt)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tailsep",
                                     description="Tests separating classes of distribution tails.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="run the scale free or location-scale free test on data")
    _add_input(p)
    _add_separator(p)
    p.add_argument("--test", default="scale-free", choices=("scale-free", "location-scale-free"))
    p.add_argument("--k", type=int)
    p.add_argument("--k-grid")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--side", default="right", choices=("right", "left"))
    p.add_argument("--population-n", type=int,
                   help="size of the population the observed values are the top of")
    _add_output(p, "json")

    p = sub.add_parser("fit", help="maximum likelihood tail fits")
    _add_input(p)
    p.add_argument("--model", default="all", choices=("all", *_MODELS))
    _add_output(p, "json")

    p = sub.add_parser("qq", help="Q-Q table against exponential quantiles")
    _add_input(p)
    _add_output(p, "csv")

    p = sub.add_parser("simulate", help="Monte Carlo rejection rates over k")
    p.add_argument("--dist", required=True, help="e.g. weibull:2/3,1 or lognormal:0,1")
    p.add_argument("--test", default="scale-free",
                   choices=("scale-free", "location-scale-free", "hasofer-wang", "ratio"))
    _add_separator(p)
    p.add_argument("--preset", choices=sorted(harness.PRESETS))
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--k-grid")
    p.add_argument("--alpha", type=float)
    p.add_argument("--side", choices=("right", "left"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    _add_output(p, "csv")

    p = sub.add_parser("check-separability", help="grid check of a tail-ordering condition")
    p.add_argument("--lighter", required=True, help="distribution or separator, e.g. weibull:2/3,1")
    p.add_argument("--heavier", required=True, help="distribution or separator, e.g. w-lw:1.8")
    p.add_argument("--condition", default="C", choices=("C", "prop1", "B"))
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--b", type=float, help="separator shape when not given inline")
    p.add_argument("--t-range", help="log10 bounds of the t grid, e.g. 6,12")
    p.add_argument("--n-t", type=int, default=40)
    p.add_argument("--c-range", help="log10 bounds of the c grid, e.g. 0.075,3")
    p.add_argument("--n-c", type=int, default=40)
    p.add_argument("--x-range", help="bounds of the x grid for the B condition, e.g. 1,50")
    _add_output(p, "json")

    p = sub.add_parser("calibrate", help="Monte Carlo critical values of a baseline statistic")
    p.add_argument("--test", default="ratio", choices=("ratio", "hasofer-wang"))
    p.add_argument("--alpha", default="0.01,0.05,0.1")
    p.add_argument("--k-grid")
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--m", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--side", choices=("right", "left"))
    _add_output(p, "csv")
    return parser


def _render(args, result) -> str:
    cmd, fmt = args.command, args.format
    if cmd == "simulate":
        return result.to_json() + "\n" if fmt == "json" else result.to_csv()
    if cmd == "calibrate":
        return _json(_calibrate_json(result)) if fmt == "json" else result.to_csv()
    if fmt == "json":
        return _json(result)
    if cmd == "test":
        return _test_csv(result)
    if cmd == "fit":
        return _fit_csv(result)
    if cmd == "qq":
        return _qq_csv(result)
    return _csv_rows(list(result), [list(result.values())])


COMMANDS = {"test": cmd_test, "fit": cmd_fit, "qq": cmd_qq, "simulate": cmd_simulate,
            "check-separability": cmd_check, "calibrate": cmd_calibrate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = COMMANDS[args.command](args)
        write_output(_render(args, result), args.out)
    except ConvergenceError as exc:
        print(f"tailsep: {exc} (bracket={exc.bracket}, iterations={exc.iterations})",
              file=sys.stderr)
        return EXIT_CONVERGENCE
    except (TailsepError, ValueError, OSError) as exc:
        print(f"tailsep: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
