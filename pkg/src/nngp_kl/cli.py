"""Command-line entry point.

Exit codes: 0 success, 2 invalid arguments, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict

from .covariance import FAMILIES, KernelSpec, ThreePointCorr, read_locations_csv
from .divergence import toy_example
from .exceptions import InvalidCorrelation, NngpError, NotPositiveDefinite
from .experiments import (
    DEFAULT_PHI,
    ShrinkageConfig,
    ThreePointGrid,
    record_row,
    run_random_study,
    run_shrinkage_study,
    run_three_point,
    shrinkage_grid,
    sweep_three_point,
)

EXIT_USAGE = 2
EXIT_NUMERICAL = 3

SWEEP_COLUMNS = ["rho12", "rho13", "rho23", "delta2", "kl_response", "kl_latent", "winner"]
SHRINKAGE_COLUMNS = [
    "n",
    "m",
    "delta2",
    "kernel",
    "norm_e",
    "norm_b",
    "norm_delta",
    "norm_remainder",
    "ratio_shrink",
    "ratio_remainder",
    "norm_k_error",
    "bound_holds",
]


class UsageError(Exception):
    pass


def fmt(value) -> str:
    """Render a scalar for CSV output; floats get 17 significant digits."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    if value is None:
        return ""
    return str(value)


def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with floats at 17 significant digits (non-finite -> null)."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + to_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return f"{obj:.17g}" if math.isfinite(obj) else "null"
    if isinstance(obj, int):
        return str(obj)
    return json.dumps(str(obj))


def write_csv(rows, columns, out) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(row.get(c)) for c in columns])
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def _positive_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return v


def _load_locations(args):
    if getattr(args, "locations", None) is None:
        return None
    try:
        return read_locations_csv(args.locations)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read locations: {exc}") from exc


def cmd_toy(args) -> int:
    rep = toy_example("one" if args.variant == "1" else "two").as_dict()
    if args.format == "json":
        print(to_json(rep))
    else:
        write_csv([rep], list(rep), None)
    return 0


def cmd_three_point(args) -> int:
    try:
        c = ThreePointCorr(args.rho12, args.rho13, args.rho23)
        res = run_three_point(c, args.sigma2, args.delta2)
    except (InvalidCorrelation, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    print(to_json(asdict(res)))
    return 0


def cmd_sweep(args) -> int:
    grid = ThreePointGrid()
    if args.grid_file:
        try:
            with open(args.grid_file) as fh:
                grid = ThreePointGrid.from_dict(json.load(fh))
        except (OSError, ValueError, TypeError) as exc:
            raise UsageError(f"bad grid file: {exc}") from exc
    try:
        results, skipped = sweep_three_point(grid)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    write_csv([asdict(r) for r in results], SWEEP_COLUMNS, args.out)
    print(f"evaluated {len(results)} grid points, skipped {skipped} invalid", file=sys.stderr)
    return 0


def cmd_random_study(args) -> int:
    locs = _load_locations(args)
    try:
        kernel = KernelSpec(args.kernel, args.sigma2, args.phi)
        summary, rows = run_random_study(
            args.n, args.m, kernel, args.tau2, args.seeds, args.seed0, locations=locs
        )
    except NotPositiveDefinite:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.out:
        write_csv([asdict(r) for r in rows], ["seed", "kl_response", "kl_latent", "winner"], args.out)
    print(to_json(asdict(summary)))
    return 0


def cmd_shrinkage(args) -> int:
    locs = _load_locations(args)
    try:
        if args.ensemble:
            configs = shrinkage_grid()
        else:
            n = locs.n if locs is not None else args.n
            cfg = ShrinkageConfig(
                n=n,
                m=args.m,
                delta2=args.tau2 / args.sigma2,
                kernel=args.kernel,
                sigma2=args.sigma2,
                phi=args.phi,
                seed=args.seed,
            )
            cfg.kernel_spec()
            configs = [cfg]
        if args.tau2 < 0 or args.m < 0:
            raise ValueError("tau2 and m must be non-negative")
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    records = run_shrinkage_study(configs, workers=args.workers, locations=locs)
    write_csv([record_row(r) for r in records], SHRINKAGE_COLUMNS, args.out)
    failed = [r for r in records if not r.ok]
    for r in failed:
        print(f"failed configuration {r.config}: {r.error}", file=sys.stderr)
    return EXIT_NUMERICAL if failed else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="nngp-kl", description="Response vs latent NNGP models compared by KL divergence."
    )
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("toy", help="hierarchical toy example, joint vs collapsed KL")
    t.add_argument("--variant", choices=["1", "2"], required=True)
    t.add_argument("--format", choices=["csv", "json"], default="json")
    t.set_defaults(func=cmd_toy)

    tp = sub.add_parser("three-point", help="three-location closed-form comparison")
    tp.add_argument("--rho12", type=float, required=True)
    tp.add_argument("--rho13", type=float, required=True)
    tp.add_argument("--rho23", type=float, required=True)
    tp.add_argument("--delta2", type=float, required=True)
    tp.add_argument("--sigma2", type=float, default=1.0)
    tp.set_defaults(func=cmd_three_point)

    sw = sub.add_parser("sweep", help="three-point comparison over a grid")
    sw.add_argument("--grid-file", help="JSON object with lists rho12, rho13, rho23, delta2")
    sw.add_argument("--out", help="CSV path (default: standard output)")
    sw.set_defaults(func=cmd_sweep)

    rs = sub.add_parser("random-study", help="KL comparison on random designs in the unit square")
    rs.add_argument("--n", type=_positive_int, default=100)
    rs.add_argument("--m", type=_positive_int, default=5)
    rs.add_argument("--kernel", choices=FAMILIES, default="exponential")
    rs.add_argument("--sigma2", type=float, default=1.0)
    rs.add_argument("--phi", type=float, default=0.3)
    rs.add_argument("--tau2", type=float, default=0.1)
    rs.add_argument("--seeds", type=_positive_int, default=50)
    rs.add_argument("--seed0", type=int, default=0)
    rs.add_argument("--locations", help="CSV of locations (header x1..xd); replaces random designs")
    rs.add_argument("--out", help="per-seed CSV path")
    rs.set_defaults(func=cmd_random_study)

    sh = sub.add_parser("shrinkage", help="error shrinkage of the latent model")
    sh.add_argument("--n", type=_positive_int, default=50)
    sh.add_argument("--m", type=_positive_int, default=3)
    sh.add_argument("--tau2", type=float, default=0.5)
    sh.add_argument("--kernel", choices=FAMILIES, default="exponential")
    sh.add_argument("--sigma2", type=float, default=1.0)
    sh.add_argument(
        "--phi", type=float, default=None, help=f"range (default per family: {DEFAULT_PHI})"
    )
    sh.add_argument("--seed", type=int, default=0, help="seed of the random design")
    sh.add_argument("--locations", help="CSV of locations (header x1..xd)")
    sh.add_argument("--ensemble", action="store_true", help="run the full default grid")
    sh.add_argument("--workers", type=int, default=1)
    sh.add_argument("--out", help="CSV path (default: standard output)")
    sh.set_defaults(func=cmd_shrinkage)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NngpError as exc:
        print(f"numerical failure in {args.command} {vars_summary(args)}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def vars_summary(args) -> str:
    skip = {"func", "command"}
    return " ".join(f"{k}={v}" for k, v in sorted(vars(args).items()) if k not in skip)


if __name__ == "__main__":
    sys.exit(main())
