#!/usr/bin/env python3
import argparse
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from grouptest.config import settings
from grouptest.design import DesignSpec, Strategy
from grouptest.experiments.sweeps import (
    sweep_design_surface,
    sweep_tests_vs_failure,
    valley_by_p,
    write_csv,
)


@dataclass(frozen=True)
class ParameterSet:
    name: str
    n: int
    k: int
    p: float


PARAMETER_SETS = [
    ParameterSet(name="n1e5_k10", n=100_000, k=10, p=0.8),
    ParameterSet(name="n1e8_k500", n=100_000_000, k=500, p=0.8),
]

FAILURE_TARGETS = [0.001, 0.005, 0.01, 0.05, 0.1, 0.25, 0.5]


def export_parameter_set(
    params: ParameterSet,
    output_dir: Path,
    p_values: np.ndarray,
    strategy: Strategy,
) -> dict[str, int]:
    spec = DesignSpec(n=params.n, k=params.k, p=params.p, pf1=0.001, pf2=0.001, strategy=strategy)
    surface, minima = sweep_design_surface(spec, p_values)
    failure = sweep_tests_vs_failure(spec, FAILURE_TARGETS)

    stem = f"{params.name}_{strategy.value}"
    write_csv(surface, output_dir / f"{stem}_surface.csv")
    write_csv(minima, output_dir / f"{stem}_minima.csv")
    write_csv(failure, output_dir / f"{stem}_failure.csv")

    valleys = valley_by_p(surface)
    if not valleys.all():
        logging.warning("%s: M(alpha) is not a single valley for p in %s", stem, list(valleys[~valleys].index))

    return {
        f"{stem}_surface": len(surface),
        f"{stem}_minima": len(minima),
        f"{stem}_failure": len(failure),
    }


def main() -> None:
    parser = argparse.ArgumentParser(
        description=(
            "Export the designed-M surfaces, per-p minima and failure sweeps for the "
            "reference parameter sets into CSV files."
        )
    )
    parser.add_argument(
        "--output-dir",
        default=None,
        help="Output directory for the CSVs (default: surfaces/ under output_dir from config.yaml).",
    )
    parser.add_argument(
        "--strategy",
        choices=[s.value for s in Strategy],
        nargs="+",
        default=[s.value for s in Strategy],
        help="Design strategies to export (default: both).",
    )
    parser.add_argument("--p-min", type=float, default=0.3, help="Smallest p (default: 0.3).")
    parser.add_argument("--p-max", type=float, default=1.0, help="Largest p (default: 1.0).")
    parser.add_argument("--p-step", type=float, default=0.05, help="p grid step (default: 0.05).")
    args = parser.parse_args()

    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    p_values = np.round(np.arange(args.p_min, args.p_max + 1e-9, args.p_step), 10)
    if not p_values.size:
        raise SystemExit("Empty p grid: check --p-min, --p-max and --p-step.")

    output_dir = Path(args.output_dir) if args.output_dir else settings.output_path("surfaces")
    counts: dict[str, int] = {}
    for params in PARAMETER_SETS:
        for strategy in args.strategy:
            counts.update(export_parameter_set(params, output_dir, p_values, Strategy(strategy)))

    print("Export completed.")
    for name, count in counts.items():
        print(f"{name}: {count}")


if __name__ == "__main__":
    main()
