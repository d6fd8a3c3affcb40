"""Command-line entry point: ``exactstop {theory,mc,bench}``.

Every option may also come from a flat ``key = value`` file given with
``--config``; keys are the long option names with dashes or underscores.
Precedence is command line, then config file, then built-in defaults.

Exit codes: 0 success, 2 usage error, 3 infeasible configuration.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
import tempfile
from typing import Callable, Sequence

from . import __version__
from .benchmark import DEFAULT_N, DEFAULT_P, run_config
from .metrics import DEFAULT_THRESHOLDS, rows_to_csv
from .montecarlo import measure_success_rate, results_to_csv
from .stopping import (
    ConsensusCounts,
    DegenerateInputError,
    approx_probability,
    exact_probability,
    relative_error,
    true_success_rate,
    undersampling_ratio,
)
from .synth import InfeasibleConfigError

EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
CUTOFF = "cutoff"

THEORY_COLUMNS = ("n", "I", "k", "p", "s", "P_a", "P_e", "epsilon", "s_true", "undersampling_pct")

DEFAULTS = {
    "theory": {"n": "50", "k": "5", "s": "0.99", "output": "-"},
    "mc": {"n": "20", "inliers": "6", "k": "5", "s": "0.99", "modes": "approximate,exact",
           "trials": "100000", "seed": "0", "threads": "1", "output": "-"},
    "bench": {"p": ",".join(map(str, DEFAULT_P)), "s": "0.99", "instances": "10000", "seed": "0",
              "threads": "1", "max_iterations": "1000000", "threshold": "3.0",
              "auc_thresholds": ",".join(f"{t:g}" for t in DEFAULT_THRESHOLDS), "output": "-"},
}


class UsageError(ValueError):
    pass


def parse_values(text: str, kind: Callable = float) -> list:
    """Comma list whose items are scalars or inclusive ``start:stop[:step]`` ranges."""
    values = []
    for item in str(text).split(","):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        try:
            if len(parts) == 1:
                values.append(kind(parts[0]))
                continue
            if len(parts) not in (2, 3):
                raise ValueError
            start, stop = kind(parts[0]), kind(parts[1])
            step = kind(parts[2]) if len(parts) == 3 else kind(1)
        except ValueError:
            raise UsageError(f"cannot parse {item!r} as {kind.__name__} value or range") from None
        if step <= 0 or stop < start:
            raise UsageError(f"empty or invalid range {item!r}")
        count = int(round((stop - start) / step))
        if start + count * step > stop + 1e-9 * max(1, abs(stop)):
            count -= 1
        values.extend(kind(start + i * step) for i in range(count + 1))
    if not values:
        raise UsageError(f"no values in {text!r}")
    return values


def read_config(path: str) -> dict:
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    try:
        with open(path) as fh:
            parser.read_string("[config]\n" + fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    except configparser.Error as exc:
        raise UsageError(f"malformed config file {path}: {exc}") from None
    return {key.replace("-", "_"): value for key, value in parser["config"].items()}


def resolve(args: argparse.Namespace) -> dict:
    """Merge command line, config file and defaults into one string-valued mapping."""
    merged = dict(DEFAULTS[args.command])
    if args.config:
        file_values = read_config(args.config)
        known = set(vars(args)) - {"command", "config"}
        unknown = set(file_values) - known
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        merged.update(file_values)
    for key, value in vars(args).items():
        if key not in ("command", "config") and value is not None:
            merged[key] = value
    # an inlier setting on the command line replaces any from the file or defaults
    if getattr(args, "inliers", None) is not None:
        merged.pop("p", None)
    if args.command != "bench" and getattr(args, "p", None) is not None:
        merged.pop("inliers", None)
    return merged


def _positive_int(name: str, text) -> int:
    try:
        value = int(text)
    except ValueError:
        raise UsageError(f"{name} must be an integer, got {text!r}") from None
    if value < 1:
        raise UsageError(f"{name} must be positive, got {value}")
    return value


def _float(name: str, text) -> float:
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"{name} must be a number, got {text!r}") from None


def _target(text) -> float:
    s = _float("s", text)
    if not 0.0 < s < 1.0:
        raise UsageError(f"s must lie strictly between 0 and 1, got {s}")
    return s


def _fmt(value) -> str:
    return repr(float(value)) if isinstance(value, float) else str(value)


def _count_grid(opts: dict) -> list[tuple[int, int, int, float]]:
    """(n, I, k, s) tuples from n and either p or inlier-count lists."""
    ns = [_positive_int("n", v) for v in parse_values(opts["n"], int)]
    ks = [_positive_int("k", v) for v in parse_values(opts["k"], int)]
    ss = [_target(v) for v in parse_values(opts.get("s", "0.99"))]
    use_p = opts.get("p") is not None  # ratios win over counts when both are set
    grid = []
    for n in ns:
        if use_p:
            ps = parse_values(opts["p"])
            if any(not 0.0 <= p <= 1.0 for p in ps):
                raise UsageError("inlier ratios must lie in [0, 1]")
            counts = [int(round(p * n)) for p in ps]
        else:
            counts = parse_values(opts["inliers"], int)
            if any(not 0 <= i <= n for i in counts):
                raise UsageError(f"inlier counts must lie in [0, {n}]")
        for i in counts:
            for k in ks:
                if k > n:
                    raise UsageError(f"sample size {k} exceeds n={n}")
                for s in ss:
                    grid.append((n, i, k, s))
    return grid


def theory_row(n: int, inliers: int, k: int, s: float) -> dict:
    c = ConsensusCounts(n, inliers, k)
    p_a, p_e = approx_probability(c), exact_probability(c)
    row = {"n": n, "I": inliers, "k": k, "p": c.p, "s": s, "P_a": p_a, "P_e": p_e}
    row["epsilon"] = relative_error(c) if inliers > 0 else CUTOFF
    if inliers == n:
        # one iteration suffices under either criterion
        row["s_true"], row["undersampling_pct"] = 1.0, 0.0
    elif inliers < k:
        row["s_true"] = true_success_rate(c, s) if inliers > 0 else CUTOFF
        row["undersampling_pct"] = CUTOFF
    else:
        row["s_true"] = true_success_rate(c, s)
        row["undersampling_pct"] = 100.0 * undersampling_ratio(c, s)
    return row


def _csv(columns: Sequence[str], rows: Sequence[dict]) -> str:
    lines = [",".join(columns)]
    lines += [",".join(_fmt(row[c]) for c in columns) for row in rows]
    return "\n".join(lines) + "\n"


def cmd_theory(opts: dict) -> tuple[str, list[dict]]:
    rows = [theory_row(*point) for point in _count_grid(opts)]
    return _csv(THEORY_COLUMNS, rows), rows


def cmd_mc(opts: dict) -> tuple[str, list[dict]]:
    trials = _positive_int("trials", opts["trials"])
    if trials < 100:
        raise UsageError(f"trials must be at least 100, got {trials}")
    modes = [m.strip() for m in str(opts["modes"]).split(",") if m.strip()]
    if not modes or any(m not in ("approximate", "exact") for m in modes):
        raise UsageError(f"modes must be approximate and/or exact, got {opts['modes']!r}")
    seed = int(opts["seed"])
    threads = _positive_int("threads", opts["threads"])
    results = []
    for n, inliers, k, s in _count_grid(opts):
        if inliers < k:
            raise InfeasibleConfigError(f"n={n}, I={inliers}, k={k}: no all-inlier sample exists")
        for mode in modes:
            results.append(measure_success_rate(n, inliers, k, s, mode, trials, seed=seed, threads=threads))
    return results_to_csv(results), [r.row() for r in results]


def cmd_bench(opts: dict) -> tuple[str, list[dict]]:
    family = opts["family"]
    n = _positive_int("n", opts["n"]) if opts.get("n") is not None else DEFAULT_N[family]
    ps = parse_values(opts["p"])
    s = _target(opts["s"])
    instances = _positive_int("instances", opts["instances"])
    threads = _positive_int("threads", opts["threads"])
    max_iter = _positive_int("max_iterations", opts["max_iterations"])
    threshold = _float("threshold", opts["threshold"])
    if not threshold > 0:
        raise UsageError("threshold must be positive")
    auc_thresholds = parse_values(opts["auc_thresholds"])
    if any(t <= 0 for t in auc_thresholds):
        raise UsageError("AUC thresholds must be positive")
    seed = int(opts["seed"])
    rows = [
        run_config(family, n, p, instances, seed=seed, s=s, threads=threads, max_iterations=max_iter,
                   inlier_threshold=threshold, thresholds=auc_thresholds)
        for p in ps
    ]
    return rows_to_csv(rows), [r.as_dict() for r in rows]


COMMANDS = {"theory": cmd_theory, "mc": cmd_mc, "bench": cmd_bench}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="exactstop", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grid=True):
        p.add_argument("--config", help="flat key=value file of option defaults")
        p.add_argument("--output", "-o", help="CSV output path ('-' for stdout)")
        p.add_argument("--json", help="also write a JSON document with a run manifest")
        if grid:
            p.add_argument("--n", help="measurement counts, e.g. 20,50 or 10:500:10")
            group = p.add_mutually_exclusive_group()
            group.add_argument("--p", help="inlier ratios (I = round(p n))")
            group.add_argument("--inliers", help="inlier counts")
            p.add_argument("--k", help="sample sizes")
            p.add_argument("--s", help="target success probabilities")

    theory = sub.add_parser("theory", help="closed-form probability and iteration analysis grid")
    common(theory)

    mc = sub.add_parser("mc", help="Monte-Carlo success rates of both criteria")
    common(mc)
    mc.add_argument("--modes", help="approximate,exact")
    mc.add_argument("--trials", help="trials per grid point and mode (>= 100)")
    mc.add_argument("--seed")
    mc.add_argument("--threads")

    bench = sub.add_parser("bench", help="synthetic line/ellipse RANSAC benchmark")
    bench.add_argument("family", choices=sorted(DEFAULT_N))
    common(bench, grid=False)
    bench.add_argument("--n", help="measurements per instance (default 50 line, 100 ellipse)")
    bench.add_argument("--p", help="inlier ratios, comma separated")
    bench.add_argument("--s", help="target success probability")
    bench.add_argument("--instances")
    bench.add_argument("--seed")
    bench.add_argument("--threads")
    bench.add_argument("--max-iterations", dest="max_iterations")
    bench.add_argument("--threshold", help="whitened inlier threshold")
    bench.add_argument("--auc-thresholds", dest="auc_thresholds", help="AUC@X thresholds")
    return parser


def _write_atomic(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".exactstop-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = resolve(args)
        if args.command != "bench" and opts.get("p") is None and opts.get("inliers") is None:
            opts["p"] = "0.2"
        text, rows = COMMANDS[args.command](opts)
        _write_atomic(opts["output"], text)
        if opts.get("json"):
            flags = {k: v for k, v in opts.items() if k not in ("output", "json")}
            doc = {
                "manifest": {"command": args.command, "version": __version__,
                             "seed": opts.get("seed"), "flags": flags},
                "rows": rows,
            }
            _write_atomic(opts["json"], json.dumps(doc, indent=2) + "\n")
    except UsageError as exc:
        print(f"exactstop {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InfeasibleConfigError, DegenerateInputError) as exc:
        print(f"exactstop {args.command}: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return 0


if __name__ == "__main__":
    sys.exit(main())
