#!/usr/bin/env python3
"""Command-line front end. Indices printed here are 1-based; files stay 0-based."""
from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from .channel import ChannelParams, end_to_end_measure, z_channel_sample
from .config import settings
from .construction import ConstructionParams, is_disjunct, sample_contact_matrix
from .decoder import distance_decode
from .design import DesignResult, DesignSpec, Strategy, design, evaluate_point, theorem_preset, warn_if_dense
from .experiments.sweeps import (
    bench_frame,
    sweep_design_surface,
    sweep_tests_vs_failure,
    write_csv,
)
from .experiments.trials import SupportMode, TrialConfig, run_trials, sweep_success_vs_tests
from .matrix_io import format_outcome, load_outcome, read_matrix, read_support, write_matrix


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_OVERSIZE = 2
EXIT_INPUT_ERROR = 3

DRAW_ONCE = "draw"


def _cmd_gen_matrix(args: argparse.Namespace) -> int:
    params = ConstructionParams(rows=args.rows, cols=args.cols, density=args.density, seed=args.seed)
    write_matrix(sample_contact_matrix(params), args.out)
    return EXIT_OK


def _cmd_verify_disjunct(args: argparse.Namespace) -> int:
    m = read_matrix(args.matrix)
    report = is_disjunct(m, args.k, args.e, force=args.force)
    if report.is_disjunct:
        print(f"disjunct: ({args.k}, {args.e})")
        return EXIT_OK
    w = report.witness
    print(f"column {w.column + 1}; subset {','.join(str(j + 1) for j in w.subset)}")
    return EXIT_VIOLATED


def _cmd_simulate(args: argparse.Namespace) -> int:
    m = read_matrix(args.matrix)
    x = read_support(args.support, m.cols)
    cp = ChannelParams(p=args.p, seed=args.seed)
    if args.emit_sampling:
        write_matrix(z_channel_sample(m, cp), args.emit_sampling)
    print(format_outcome(end_to_end_measure(m, x, cp)))
    return EXIT_OK


def _cmd_decode(args: argparse.Namespace) -> int:
    m = read_matrix(args.matrix)
    y = load_outcome(args.outcome)
    result = distance_decode(m, y, args.e, k=args.k)
    if args.diagnostics:
        frame = pd.DataFrame({
            "column": np.arange(1, m.cols + 1),
            "deficit": result.deficits,
            "detected": result.deficits <= result.threshold,
        })
        write_csv(frame, args.diagnostics)
    for i in result.detected:
        print(i + 1)
    if result.oversize_flag:
        logger.warning("%d items detected, more than K=%d", len(result.detected), args.k)
        return EXIT_OVERSIZE
    return EXIT_OK


def _spec_from_args(args: argparse.Namespace, **overrides) -> DesignSpec:
    values = dict(
        n=args.n,
        k=args.k,
        p=getattr(args, "p", None),
        pf1=getattr(args, "pf1", None),
        pf2=getattr(args, "pf2", None),
        strategy=Strategy(args.strategy),
        alpha_min=args.alpha_min,
        alpha_max=args.alpha_max,
        alpha_step=args.alpha_step,
        delta_step=args.delta_step,
        chernoff_mode=args.chernoff_mode,
    )
    values.update(overrides)
    return DesignSpec(**values)


def _print_design(result: DesignResult) -> None:
    print(
        f"M={result.m} alpha={result.alpha:.4g} q={result.q:.6g} delta={result.delta:.4g} "
        f"e={result.e:.3f} threshold={result.threshold} "
        f"pf1={result.predicted_pf1:.4g} pf2={result.predicted_pf2:.4g}"
    )


def _cmd_design(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args)
    if args.preset == "theorem":
        alpha, delta = theorem_preset(spec.p)
        point = evaluate_point(spec, alpha, delta)
        if point.m is None:
            print(f"infeasible: {point.reason}")
            return EXIT_VIOLATED
        print(
            f"M={point.m} alpha={alpha:.4g} q={point.q:.6g} delta={delta:.4g} e={point.e:.3f} "
            f"pf1={point.pf1:.4g} pf2={point.pf2:.4g} meets_pf1={point.feasible}"
        )
        return EXIT_OK

    result = design(spec)
    if args.emit_surface:
        surface, _ = sweep_design_surface(spec, [spec.p])
        write_csv(surface, args.emit_surface)
    if not result.feasible:
        print("infeasible: no (alpha, delta) on the grid meets both targets")
        return EXIT_VIOLATED
    _print_design(result)
    if spec.k >= 2:
        warn_if_dense(result.q, result.m, spec.n, spec.k, result.delta)
    return EXIT_OK


def _cmd_bench(args: argparse.Namespace) -> int:
    matrix = None
    if args.fixed_matrix and args.fixed_matrix != DRAW_ONCE:
        matrix = read_matrix(args.fixed_matrix)
    support = read_support(args.support, args.n, args.k) if args.support else None
    cfg = TrialConfig(
        n=args.n,
        k=args.k,
        p=args.p,
        m=args.m[0],
        alpha=args.alpha,
        e=args.e,
        trials=args.trials,
        seed=args.seed,
        support_mode=SupportMode.FIXED if args.fixed_support or support else SupportMode.RANDOM,
        support=support,
        fixed_matrix=bool(args.fixed_matrix),
        matrix=matrix,
    )
    if matrix is not None:
        reports = [run_trials(cfg, workers=args.workers)]
    else:
        reports = sweep_success_vs_tests(cfg, args.m, workers=args.workers)
    frame = bench_frame(reports)
    write_csv(frame, args.out or settings.output_path("bench.csv"))
    print(frame.to_string(index=False))
    return EXIT_OK


def _cmd_sweep_failure(args: argparse.Namespace) -> int:
    spec = _spec_from_args(args, pf1=0.5, pf2=0.5)
    frame = sweep_tests_vs_failure(spec, args.targets)
    write_csv(frame, args.out or settings.output_path("failure_sweep.csv"))
    print(frame.to_string(index=False))
    return EXIT_OK


def _cmd_surface(args: argparse.Namespace) -> int:
    p_values = args.p or np.round(np.arange(args.p_min, args.p_max + 1e-9, args.p_step), 10)
    spec = _spec_from_args(args, p=float(p_values[0]))
    surface, minima = sweep_design_surface(spec, p_values)
    write_csv(surface, args.out or settings.output_path("surface.csv"))
    if args.minima_out:
        write_csv(minima, args.minima_out)
    print(minima.to_string(index=False))
    return EXIT_OK


def _add_grid_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n", type=int, required=True, help="Population size N.")
    parser.add_argument("--k", type=int, required=True, help="Sparsity bound K.")
    parser.add_argument(
        "--strategy",
        choices=[s.value for s in Strategy],
        default=Strategy.PER_INSTANCE.value,
        help="Design strategy (default: per-instance).",
    )
    parser.add_argument("--alpha-min", type=float, default=None, help="Smallest alpha on the grid.")
    parser.add_argument("--alpha-max", type=float, default=None, help="Largest alpha on the grid.")
    parser.add_argument("--alpha-step", type=float, default=None, help="Alpha grid step.")
    parser.add_argument("--delta-step", type=float, default=None, help="Delta scan step.")
    parser.add_argument(
        "--chernoff-mode",
        choices=["exact", "simplified"],
        default=None,
        help="Flip-overflow bound: exact product form or simplified union bound.",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grouptest",
        description="Non-adaptive group testing with unreliable activations.",
    )
    parser.add_argument("--log-level", default=None, help=f"Logging level (default: {settings.log_level}).")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-matrix", help="Sample a Bernoulli(q) contact matrix.")
    p.add_argument("--rows", type=int, required=True, help="Number of tests M.")
    p.add_argument("--cols", type=int, required=True, help="Number of items N.")
    p.add_argument("--density", type=float, required=True, help="Entry probability q.")
    p.add_argument("--seed", type=int, default=settings.seed, help="Generator seed.")
    p.add_argument("--out", required=True, help="Output matrix file.")
    p.set_defaults(func=_cmd_gen_matrix)

    p = sub.add_parser(
        "verify-disjunct",
        help="Exhaustive (K, e)-disjunctness check; exit 1 and print the witness on violation.",
    )
    p.add_argument("--matrix", required=True, help="Matrix file.")
    p.add_argument("--k", type=int, required=True, help="Subset size K.")
    p.add_argument("--e", type=int, required=True, help="Error parameter e.")
    p.add_argument("--force", action="store_true", help="Run even above the configured size guard.")
    p.set_defaults(func=_cmd_verify_disjunct)

    p = sub.add_parser("simulate", help="Measure a support through the activation channel.")
    p.add_argument("--matrix", required=True, help="Contact matrix file.")
    p.add_argument("--support", required=True, help="Support file, one 0-based index per line.")
    p.add_argument("--p", type=float, required=True, help="Activation probability p.")
    p.add_argument("--seed", type=int, default=settings.seed, help="Channel seed.")
    p.add_argument("--emit-sampling", default=None, help="Also write the full sampling matrix here.")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("decode", help="Distance decoding; exit 2 when more than K items are detected.")
    p.add_argument("--matrix", required=True, help="Contact matrix file.")
    p.add_argument("--outcome", required=True, help="Outcome as a 0/1 string or a file holding one.")
    p.add_argument("--e", type=float, required=True, help="Decoder threshold (floored).")
    p.add_argument("--k", type=int, default=None, help="Sparsity bound for the oversize check.")
    p.add_argument("--diagnostics", default=None, help="CSV with columns column, deficit, detected.")
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("design", help="Fewest tests meeting the two failure targets.")
    _add_grid_args(p)
    p.add_argument("--p", type=float, required=True, help="Activation probability p.")
    p.add_argument("--pf1", type=float, default=0.001, help="Flip-overflow failure target.")
    p.add_argument("--pf2", type=float, default=0.001, help="Disjunctness failure target.")
    p.add_argument(
        "--preset",
        choices=["theorem"],
        default=None,
        help="Evaluate alpha=p/8, delta=p/2 instead of sweeping.",
    )
    p.add_argument(
        "--emit-surface",
        default=None,
        help="CSV with columns alpha, p, M, delta, e, pf1, pf2, feasible.",
    )
    p.set_defaults(func=_cmd_design)

    p = sub.add_parser("bench", help="Monte Carlo exact-recovery rate for one or more M.")
    p.add_argument("--n", type=int, required=True, help="Population size N.")
    p.add_argument("--k", type=int, required=True, help="Number of defectives K.")
    p.add_argument("--p", type=float, required=True, help="Activation probability p.")
    p.add_argument("--m", type=int, nargs="+", required=True, help="Number(s) of tests M.")
    p.add_argument("--alpha", type=float, required=True, help="Density parameter (q = alpha / K).")
    p.add_argument("--e", type=float, required=True, help="Decoder threshold (floored).")
    p.add_argument("--trials", type=int, default=settings.trials, help="Trials per M.")
    p.add_argument("--seed", type=int, default=settings.seed, help="Master seed.")
    p.add_argument(
        "--fixed-matrix",
        nargs="?",
        const=DRAW_ONCE,
        default=None,
        help="Reuse one matrix for all trials: read FILE, or draw one when no file is given.",
    )
    p.add_argument("--support", default=None, help="Fixed support file (0-based indices).")
    p.add_argument("--fixed-support", action="store_true", help="Draw one support and reuse it.")
    p.add_argument("--workers", type=int, default=1, help="Worker threads.")
    p.add_argument("--out", default=None, help="Output CSV (default: bench.csv under output_dir; see FORMATS.md).")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("sweep-failure", help="Designed M as a function of the failure target.")
    _add_grid_args(p)
    p.add_argument("--p", type=float, required=True, help="Activation probability p.")
    p.add_argument(
        "--targets",
        type=float,
        nargs="+",
        default=[0.001, 0.005, 0.01, 0.05, 0.1, 0.25, 0.5],
        help="Failure targets (used for both pf1 and pf2).",
    )
    p.add_argument(
        "--out",
        default=None,
        help="CSV with columns target, M, alpha, delta, e, pf1, pf2, feasible (default: failure_sweep.csv under output_dir).",
    )
    p.set_defaults(func=_cmd_sweep_failure)

    p = sub.add_parser("surface", help="Designed M over the (alpha, p) grid plus the per-p minima.")
    _add_grid_args(p)
    p.add_argument("--pf1", type=float, default=0.001, help="Flip-overflow failure target.")
    p.add_argument("--pf2", type=float, default=0.001, help="Disjunctness failure target.")
    p.add_argument("--p", type=float, nargs="+", default=None, help="Explicit p values.")
    p.add_argument("--p-min", type=float, default=0.3, help="Smallest p (default 0.3).")
    p.add_argument("--p-max", type=float, default=1.0, help="Largest p (default 1.0).")
    p.add_argument("--p-step", type=float, default=0.05, help="p grid step (default 0.05).")
    p.add_argument("--out", default=None, help="Surface CSV (default: surface.csv under output_dir).")
    p.add_argument("--minima-out", default=None, help="CSV of the per-p minimum (p, alpha, M, ...).")
    p.set_defaults(func=_cmd_surface)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=(args.log_level or settings.log_level).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
