"""Command line interface: ``build``, ``eval`` and ``plot`` subcommands."""

from __future__ import annotations

import argparse
import sys

from .evaluate import l1_error, make_reference
from .io import export_plot_data, load_histogram
from .pipeline import RunConfig, run_pipeline


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rphist",
        description="Adaptive multivariate histograms on regular paving trees.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="estimate a density from CSV points")
    b.add_argument("--input", required=True, help="CSV file of points")
    b.add_argument("--dim", type=int, required=True, help="point dimension")
    b.add_argument("--shards", type=int, default=1)
    b.add_argument("--workers", type=int, default=1,
                   help="worker threads for the sharded builder")
    b.add_argument("--carve-leaves", type=int, default=None,
                   help="leaf budget of the carving chain (default maxlvs/10)")
    b.add_argument("--tributaries", type=int, default=5)
    b.add_argument("--maxpts", default="50,500,1500",
                   help="comma-separated SEB stopping thresholds")
    b.add_argument("--maxlvs", type=int, default=None,
                   help="leaf budget per tributary (default unlimited)")
    b.add_argument("--tau-min", type=float, default=0.1)
    b.add_argument("--tau-max", type=float, default=1e5)
    b.add_argument("--tau-steps", type=int, default=30)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", required=True, help="histogram JSON output path")
    b.add_argument("--pad", type=float, default=1e-9,
                   help="relative root-box padding per side")
    b.add_argument("--max-depth", type=int, default=1000)
    b.add_argument("--sequential", action="store_true",
                   help="use the sequential chain instead of the sharded builder")
    b.add_argument("--strict", action="store_true",
                   help="fail on malformed rows or out-of-box points")
    b.add_argument("--deterministic-ties", action="store_true",
                   help="break priority ties by lowest label instead of at random")

    e = sub.add_parser("eval", help="L1 error of a histogram vs a reference")
    e.add_argument("--hist", required=True, help="histogram JSON file")
    e.add_argument("--reference", required=True, choices=["gaussian", "uniform"],
                   help="gaussian: standard normal; uniform: over the root box")
    e.add_argument("--mc", type=int, default=256, help="Monte Carlo draws per leaf")
    e.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("plot", help="export leaf rectangles (2-D) or a leaf table")
    p.add_argument("--hist", required=True, help="histogram JSON file")
    p.add_argument("--out", required=True, help="CSV output path")
    return parser


def _cmd_build(args) -> int:
    cfg = RunConfig(
        input_path=args.input,
        dim=args.dim,
        shards=args.shards,
        workers=args.workers,
        pad=args.pad,
        carve_leaves=args.carve_leaves,
        tributaries=args.tributaries,
        maxpts=tuple(int(p) for p in args.maxpts.split(",") if p.strip()),
        maxlvs=args.maxlvs,
        tau_min=args.tau_min,
        tau_max=args.tau_max,
        tau_steps=args.tau_steps,
        seed=args.seed,
        out=args.out,
        strict=args.strict,
        sequential=args.sequential,
        tie_break="lowest_label" if args.deterministic_ties else "random",
        max_depth=args.max_depth,
    )
    hist, estimate = run_pipeline(cfg)
    print(f"n={hist.n} leaves={hist.leaf_count} tau={estimate.tau:.6g} "
          f"cv={estimate.cv_score:.6g} -> {args.out}")
    return 0


def _cmd_eval(args) -> int:
    hist = load_histogram(args.hist)
    reference = make_reference(args.reference, hist.root_box.dim, hist.root_box)
    report = l1_error(hist, reference, mc_per_leaf=args.mc, seed=args.seed)
    print(f"l1={report.l1_estimate:.6f} +/- {report.l1_std_error:.6f} "
          f"(outside_mass={report.outside_mass:.6f}, "
          f"mc_per_leaf={report.samples_per_leaf})")
    return 0


def _cmd_plot(args) -> int:
    hist = load_histogram(args.hist)
    mode = export_plot_data(hist, args.out)
    if mode == "table":
        print(f"dimension {hist.root_box.dim} != 2: wrote a leaf table instead "
              f"of rectangles -> {args.out}")
    else:
        print(f"wrote {hist.leaf_count} rectangles -> {args.out}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "build":
        return _cmd_build(args)
    if args.command == "eval":
        return _cmd_eval(args)
    return _cmd_plot(args)


if __name__ == "__main__":
    sys.exit(main())
