from __future__ import annotations

import logging
from dataclasses import replace
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np
import pandas as pd

from ..design import DesignSpec, design
from .trials import TrialReport


logger = logging.getLogger(__name__)

SURFACE_COLUMNS = ["alpha", "p", "M", "delta", "e", "pf1", "pf2", "feasible"]
MINIMA_COLUMNS = ["p", "alpha", "M", "delta", "e", "pf1", "pf2", "feasible"]
FAILURE_COLUMNS = ["target", "M", "alpha", "delta", "e", "pf1", "pf2", "feasible"]
BENCH_COLUMNS = ["M", "trials", "successes", "success_rate", "ci_low", "ci_high",
                 "flip_overflows", "oversize", "missed_items", "extra_items", "wall_time"]


def sweep_tests_vs_failure(spec: DesignSpec, targets: Iterable[float]) -> pd.DataFrame:
    """Designed M for each target, with pf1 = pf2 = target."""
    rows = []
    for target in sorted(float(t) for t in targets):
        result = design(replace(spec, pf1=target, pf2=target))
        rows.append({
            "target": target,
            "M": result.m,
            "alpha": result.alpha,
            "delta": result.delta,
            "e": result.e,
            "pf1": result.predicted_pf1,
            "pf2": result.predicted_pf2,
            "feasible": result.feasible,
        })
    return pd.DataFrame(rows, columns=FAILURE_COLUMNS)


def sweep_design_surface(spec: DesignSpec, p_values: Iterable[float]) -> tuple[pd.DataFrame, pd.DataFrame]:
    """The (alpha, p) -> M surface and, per p, the alpha with the fewest tests."""
    cells = []
    minima = []
    for p in sorted(float(v) for v in p_values):
        result = design(replace(spec, p=p))
        for diag in result.diagnostics:
            cells.append({
                "alpha": diag.alpha,
                "p": p,
                "M": diag.m,
                "delta": diag.delta,
                "e": diag.e,
                "pf1": diag.pf1,
                "pf2": diag.pf2,
                "feasible": diag.feasible,
            })
        minima.append({
            "p": p,
            "alpha": result.alpha,
            "M": result.m,
            "delta": result.delta,
            "e": result.e,
            "pf1": result.predicted_pf1,
            "pf2": result.predicted_pf2,
            "feasible": result.feasible,
        })
    return pd.DataFrame(cells, columns=SURFACE_COLUMNS), pd.DataFrame(minima, columns=MINIMA_COLUMNS)


def is_single_valley(values: Sequence[float], rel_tol: float = 0.005) -> bool:
    """True if ``values`` falls to one minimum and then rises.

    NaN cells (infeasible designs) are skipped. Steps smaller than
    ``rel_tol`` times the minimum count as flat, which absorbs the jitter of the
    discrete delta scan.
    """
    arr = np.asarray(values, dtype=np.float64)
    arr = arr[~np.isnan(arr)]
    if arr.size <= 2:
        return True
    slack = rel_tol * float(arr.min())
    low = int(np.argmin(arr))
    falling = np.diff(arr[: low + 1])
    rising = np.diff(arr[low:])
    return bool((falling <= slack).all() and (rising >= -slack).all())


def valley_by_p(surface: pd.DataFrame) -> pd.Series:
    """Per p, whether M over the alpha grid is a single valley."""
    ordered = surface.sort_values(["p", "alpha"])
    return ordered.groupby("p")["M"].apply(lambda m: is_single_valley(m.to_numpy(dtype=np.float64)))


def bench_frame(reports: Sequence[TrialReport]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "M": r.m,
                "trials": r.trials,
                "successes": r.successes,
                "success_rate": r.success_rate,
                "ci_low": r.ci_low,
                "ci_high": r.ci_high,
                "flip_overflows": r.flip_overflows,
                "oversize": r.oversize,
                "missed_items": r.missed_items,
                "extra_items": r.extra_items,
                "wall_time": r.wall_time,
            }
            for r in reports
        ],
        columns=BENCH_COLUMNS,
    )


def write_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False)
    logger.info("wrote %d rows to %s", len(frame), path)
    return path
