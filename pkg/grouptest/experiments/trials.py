from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, List, Optional

from scipy.stats import binomtest

from ..channel import ChannelParams, measure_with_erasures
from ..construction import ConstructionParams, sample_contact_matrix
from ..decoder import decoder_threshold, distance_decode
from ..design import warn_if_dense
from ..errors import DimensionError, GroupTestError
from ..model import ContactMatrix, SupportSet
from ..seeding import STREAM_CHANNEL, STREAM_MATRIX, STREAM_SUPPORT, check_seed, derive_seed, stream


logger = logging.getLogger(__name__)

FIXED_TRIAL = 0


class SupportMode(str, Enum):
    FIXED = "fixed-support"
    RANDOM = "random-support"


@dataclass(frozen=True)
class TrialConfig:
    n: int
    k: int
    p: float
    m: int
    alpha: float
    e: float
    trials: int = 200
    seed: int = 0
    support_mode: SupportMode = SupportMode.RANDOM
    support: Optional[SupportSet] = None
    fixed_matrix: bool = False
    matrix: Optional[ContactMatrix] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "support_mode", SupportMode(self.support_mode))
        if self.trials < 1:
            raise GroupTestError("trials must be at least 1")
        if not 1 <= self.k < self.n:
            raise GroupTestError(f"need 1 <= K < N, got K={self.k}, N={self.n}")
        if not 0.0 < self.p <= 1.0:
            raise GroupTestError(f"p must lie in (0, 1], got {self.p}")
        if self.m < 1:
            raise GroupTestError("the number of tests M must be at least 1")
        if not 0.0 < self.q <= 1.0:
            raise GroupTestError(f"alpha / K must lie in (0, 1], got {self.q}")
        decoder_threshold(self.e)
        check_seed(self.seed)
        if self.support is not None:
            if self.support.n != self.n or len(self.support) > self.k:
                raise DimensionError("fixed support does not fit N and K")
            object.__setattr__(self, "support_mode", SupportMode.FIXED)
        if self.matrix is not None:
            if (self.matrix.rows, self.matrix.cols) != (self.m, self.n):
                raise DimensionError(
                    f"fixed matrix is {self.matrix.rows}x{self.matrix.cols}, expected {self.m}x{self.n}"
                )
            object.__setattr__(self, "fixed_matrix", True)

    @property
    def q(self) -> float:
        return self.alpha / self.k


@dataclass(frozen=True)
class FailureRecord:
    trial: int
    missed: int
    extra: int
    flip_overflow: bool
    oversize: bool


@dataclass(frozen=True)
class TrialReport:
    successes: int
    trials: int
    wall_time: float
    ci_low: float
    ci_high: float
    flip_overflows: int = 0
    oversize: int = 0
    failures: tuple[FailureRecord, ...] = field(default=(), repr=False)
    m: Optional[int] = None

    @property
    def success_rate(self) -> float:
        return self.successes / self.trials

    @property
    def missed_items(self) -> int:
        return sum(f.missed for f in self.failures)

    @property
    def extra_items(self) -> int:
        return sum(f.extra for f in self.failures)


@dataclass(frozen=True)
class _TrialOutcome:
    trial: int
    success: bool
    missed: int
    extra: int
    flip_overflow: bool
    oversize: bool


def _matrix_for(cfg: TrialConfig, trial: int) -> ContactMatrix:
    if cfg.matrix is not None:
        return cfg.matrix
    params = ConstructionParams(
        rows=cfg.m, cols=cfg.n, density=cfg.q, seed=derive_seed(cfg.seed, trial, STREAM_MATRIX)
    )
    return sample_contact_matrix(params)


def _support_for(cfg: TrialConfig, trial: int) -> SupportSet:
    if cfg.support is not None:
        return cfg.support
    return SupportSet.random(cfg.n, cfg.k, stream(cfg.seed, trial, STREAM_SUPPORT))


def _run_one(cfg: TrialConfig, trial: int) -> _TrialOutcome:
    matrix = _matrix_for(cfg, trial)
    support = _support_for(cfg, trial)
    channel = ChannelParams(cfg.p, derive_seed(cfg.seed, trial, STREAM_CHANNEL))
    y, erased = measure_with_erasures(matrix, support, channel)
    result = distance_decode(matrix, y, cfg.e, k=cfg.k)
    return _TrialOutcome(
        trial=trial,
        success=result.matches(support),
        missed=result.missed(support),
        extra=result.extra(support),
        flip_overflow=bool((erased > result.threshold).any()),
        oversize=result.oversize_flag,
    )


def _resolve_fixed(cfg: TrialConfig) -> TrialConfig:
    """Draw the shared matrix and support once for the fixed modes."""
    if cfg.fixed_matrix and cfg.matrix is None:
        cfg = replace(cfg, matrix=_matrix_for(cfg, FIXED_TRIAL))
    if cfg.support_mode is SupportMode.FIXED and cfg.support is None:
        cfg = replace(cfg, support=_support_for(cfg, FIXED_TRIAL))
    return cfg


def run_trials(cfg: TrialConfig, *, workers: int = 1) -> TrialReport:
    """Monte Carlo estimate of the exact-recovery probability.

    Every trial derives its own matrix, support and channel seeds from
    ``(cfg.seed, trial)``, so the report does not depend on ``workers``.
    """
    if cfg.k >= 2:
        warn_if_dense(cfg.q, cfg.m, cfg.n, cfg.k)
    cfg = _resolve_fixed(cfg)

    start = time.perf_counter()
    indices = range(cfg.trials)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda t: _run_one(cfg, t), indices))
    else:
        outcomes = [_run_one(cfg, t) for t in indices]
    outcomes.sort(key=lambda o: o.trial)
    elapsed = time.perf_counter() - start

    successes = sum(o.success for o in outcomes)
    failures = tuple(
        FailureRecord(o.trial, o.missed, o.extra, o.flip_overflow, o.oversize)
        for o in outcomes
        if not o.success
    )
    for f in failures:
        logger.debug("trial %d failed: missed=%d extra=%d", f.trial, f.missed, f.extra)
    ci = binomtest(successes, cfg.trials).proportion_ci(confidence_level=0.95, method="wilson")

    report = TrialReport(
        successes=successes,
        trials=cfg.trials,
        wall_time=elapsed,
        ci_low=float(ci.low),
        ci_high=float(ci.high),
        flip_overflows=sum(o.flip_overflow for o in outcomes),
        oversize=sum(o.oversize for o in outcomes),
        failures=failures,
        m=cfg.m,
    )
    logger.info(
        "M=%d: %d/%d exact recoveries (%.3f, 95%% CI %.3f-%.3f) in %.1fs",
        cfg.m, successes, cfg.trials, report.success_rate, report.ci_low, report.ci_high, elapsed,
    )
    return report


def sweep_success_vs_tests(cfg: TrialConfig, m_values: Iterable[int], *, workers: int = 1) -> List[TrialReport]:
    """Recovery rate for several test counts, everything else fixed."""
    if cfg.matrix is not None:
        raise GroupTestError("a fixed matrix file pins M; sweep M with generated matrices instead")
    return [run_trials(replace(cfg, m=int(m)), workers=workers) for m in m_values]
