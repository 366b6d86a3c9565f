"""Test-count design: sweep alpha and delta for the fewest tests meeting both failure targets.

All logarithms are natural. For a density ``q = alpha / K`` and Chernoff slack
``delta`` the error parameter is ``e = (1 + delta)(1 - p) q M`` and the
good-row mean is ``mu = q (1 - q)^K M``; ``delta < delta_max`` keeps ``e < mu``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy.special import betaln

from .config import CHERNOFF_MODES, settings
from .errors import GroupTestError, InfeasibleDesignError


logger = logging.getLogger(__name__)


class Strategy(str, Enum):
    PER_INSTANCE = "per-instance"
    UNIVERSAL = "universal"


def _ceil(value: float) -> int:
    # absorbs float noise such as log(e) = 1.0000000000000002
    return max(1, math.ceil(value - 1e-9 * max(1.0, abs(value))))


def log_binom(n: int, k: int) -> float:
    """ln C(n, k) without forming the binomial."""
    if not 0 <= k <= n:
        raise GroupTestError(f"log_binom needs 0 <= k <= n, got n={n}, k={k}")
    return float(-math.log(n + 1) - betaln(n - k + 1, k + 1))


def delta_max(q: float, k: int, p: float) -> float:
    if p >= 1.0:
        return math.inf
    return (1.0 - q) ** k / (1.0 - p) - 1.0


def _eta_values(q: float, k: int, p: float, delta: np.ndarray) -> np.ndarray:
    base = (1.0 - q) ** k
    return q * (base - (1.0 - p) * (1.0 + delta)) ** 2 / (2.0 * base)


def eta(q: float, k: int, p: float, delta: float) -> float:
    """Exponent rate of the disjunctness-failure bound exp(-M eta)."""
    if delta >= delta_max(q, k, p):
        raise InfeasibleDesignError(
            f"delta={delta} is not below delta_max={delta_max(q, k, p):.6g} for q={q}, K={k}, p={p}"
        )
    return float(_eta_values(q, k, p, np.float64(delta)))


def _log_union(n: int, k: int, strategy: Strategy) -> float:
    if Strategy(strategy) is Strategy.UNIVERSAL:
        return math.log(n) + log_binom(n, k)
    return math.log(n)


def tests_required(eta_value: float, n: int, k: int, pf2: float, strategy: Strategy) -> int:
    if eta_value <= 0:
        raise InfeasibleDesignError(f"eta must be positive, got {eta_value}")
    if not 0.0 < pf2 < 1.0:
        raise GroupTestError(f"pf2 must lie in (0, 1), got {pf2}")
    return _ceil((_log_union(n, k, strategy) - math.log(pf2)) / eta_value)


tests_required.__test__ = False  # type: ignore[attr-defined]


def _pf1_values(q, p, delta, m, count, mode: str):
    delta = np.asarray(delta, dtype=np.float64)
    m = np.asarray(m, dtype=np.float64)
    if p >= 1.0:
        return np.zeros(np.broadcast(delta, m).shape)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if mode == "simplified":
            exponent = delta**2 * (1.0 - p) * q * m / (2.0 + delta)
            return np.minimum(1.0, count * np.exp(-exponent))
        exponent = (1.0 - p) * q * m * ((1.0 + delta) * np.log1p(delta) - delta)
        return -np.expm1(count * np.log1p(-np.exp(-exponent)))


def pf1_bound(q: float, p: float, delta: float, m: float, count: int, mode: str = "exact") -> float:
    """Probability that some of ``count`` columns suffers more than e erasures.

    ``exact`` is the product form over independent columns with the exact
    Chernoff exponent; ``simplified`` is the union bound with the
    delta^2 / (2 + delta) exponent.
    """
    if mode not in CHERNOFF_MODES:
        raise GroupTestError(f"mode must be one of {sorted(CHERNOFF_MODES)}")
    if delta < 0:
        raise GroupTestError(f"delta must be non-negative, got {delta}")
    return float(_pf1_values(q, p, delta, m, count, mode))


def pf2_bound(eta_value: float, n: int, k: int, m: float, strategy: Strategy) -> float:
    return float(min(1.0, math.exp(_log_union(n, k, strategy) - m * eta_value)))


def gamma_rate(alpha: float, p: float, delta: float) -> float:
    """Relaxed rate with exp(-M gamma / K) >= exp(-M eta), valid for alpha in [0, 1]."""
    return alpha / 2.0 * ((1.0 - 2.0 * alpha) - (1.0 - p) * (1.0 + delta)) ** 2


def theorem_preset(p: float) -> tuple[float, float]:
    """(alpha, delta) = (p/8, p/2): the constants behind the asymptotic test count."""
    return p / 8.0, p / 2.0


def density_ceiling(m: int, n: int, k: int, delta: float = 0.0) -> float:
    """Density above which a random M x N matrix is unlikely to be (K, e)-disjunct."""
    if k < 2:
        return math.inf
    ratio = m * (1.0 + delta) / math.log(n)
    if ratio <= 0:
        return -math.inf
    return math.log(ratio) / (k - 1)


def warn_if_dense(q: float, m: int, n: int, k: int, delta: float = 0.0) -> bool:
    ceiling = density_ceiling(m, n, k, delta)
    if q > ceiling:
        logger.warning(
            "density q=%.4g exceeds %.4g for M=%d, N=%d, K=%d; disjunctness is unlikely",
            q, ceiling, m, n, k,
        )
        return True
    return False


@dataclass(frozen=True)
class DesignSpec:
    n: int
    k: int
    p: float
    pf1: float
    pf2: float
    strategy: Strategy = Strategy.PER_INSTANCE
    alpha_min: Optional[float] = None
    alpha_max: Optional[float] = None
    alpha_step: Optional[float] = None
    delta_step: Optional[float] = None
    chernoff_mode: Optional[str] = None

    def __post_init__(self) -> None:
        defaults = {
            "alpha_min": settings.alpha_min,
            "alpha_max": settings.alpha_max,
            "alpha_step": settings.alpha_step,
            "delta_step": settings.delta_step,
            "chernoff_mode": settings.chernoff_mode,
        }
        for name, value in defaults.items():
            if getattr(self, name) is None:
                object.__setattr__(self, name, value)
        object.__setattr__(self, "strategy", Strategy(self.strategy))

        if not 1 <= self.k < self.n:
            raise GroupTestError(f"need 1 <= K < N, got K={self.k}, N={self.n}")
        if not 0.0 < self.p <= 1.0:
            raise GroupTestError(f"p must lie in (0, 1], got {self.p}")
        for name in ("pf1", "pf2"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise GroupTestError(f"{name} must lie in (0, 1), got {getattr(self, name)}")
        if not 0.0 < self.alpha_min <= self.alpha_max:
            raise GroupTestError("alpha grid requires 0 < alpha_min <= alpha_max")
        if self.alpha_step <= 0 or self.delta_step <= 0:
            raise GroupTestError("alpha_step and delta_step must be positive")
        if self.chernoff_mode not in CHERNOFF_MODES:
            raise GroupTestError(f"chernoff_mode must be one of {sorted(CHERNOFF_MODES)}")

    @property
    def flip_columns(self) -> int:
        """Columns whose erasures must stay within e: the support, or every column."""
        return self.k if self.strategy is Strategy.PER_INSTANCE else self.n

    def alpha_grid(self) -> np.ndarray:
        count = int(math.floor((self.alpha_max - self.alpha_min) / self.alpha_step + 1e-9)) + 1
        return np.round(self.alpha_min + self.alpha_step * np.arange(count), 10)


@dataclass(frozen=True)
class AlphaDiagnostic:
    alpha: float
    q: float
    feasible: bool
    m: Optional[int] = None
    delta: Optional[float] = None
    e: Optional[float] = None
    pf1: Optional[float] = None
    pf2: Optional[float] = None
    reason: str = ""


@dataclass(frozen=True)
class DesignResult:
    feasible: bool
    strategy: Strategy
    m: Optional[int] = None
    alpha: Optional[float] = None
    q: Optional[float] = None
    delta: Optional[float] = None
    e: Optional[float] = None
    predicted_pf1: Optional[float] = None
    predicted_pf2: Optional[float] = None
    diagnostics: tuple[AlphaDiagnostic, ...] = field(default=(), repr=False)

    @property
    def threshold(self) -> Optional[int]:
        """Integer decoder threshold floor(e)."""
        return None if self.e is None else int(math.floor(self.e))


def design_for_alpha(spec: DesignSpec, alpha: float) -> AlphaDiagnostic:
    """Scan delta upward from 0 for one alpha; accept the first delta meeting pf1."""
    q = alpha / spec.k
    if q >= 1.0:
        return AlphaDiagnostic(alpha, q, False, reason="density q >= 1")
    dmax = delta_max(q, spec.k, spec.p)
    if dmax <= 0:
        return AlphaDiagnostic(alpha, q, False, reason="delta_max <= 0")

    if math.isinf(dmax):
        deltas = np.zeros(1)
    else:
        deltas = np.arange(0.0, dmax, spec.delta_step)
        deltas = deltas[deltas < dmax]

    log_term = _log_union(spec.n, spec.k, spec.strategy) - math.log(spec.pf2)
    with np.errstate(divide="ignore"):
        m_real = log_term / _eta_values(q, spec.k, spec.p, deltas)
    pf1 = _pf1_values(q, spec.p, deltas, m_real, spec.flip_columns, spec.chernoff_mode)
    accepted = np.flatnonzero((pf1 <= spec.pf1) & np.isfinite(m_real))
    if not accepted.size:
        return AlphaDiagnostic(alpha, q, False, reason="pf1 target not met below delta_max")

    idx = int(accepted[0])
    delta = float(deltas[idx])
    rate = float(_eta_values(q, spec.k, spec.p, np.float64(delta)))
    m = _ceil(float(m_real[idx]))
    e = (1.0 + delta) * (1.0 - spec.p) * q * m
    return AlphaDiagnostic(
        alpha=alpha,
        q=q,
        feasible=True,
        m=m,
        delta=delta,
        e=e,
        pf1=pf1_bound(q, spec.p, delta, m, spec.flip_columns, spec.chernoff_mode),
        pf2=pf2_bound(rate, spec.n, spec.k, m, spec.strategy),
    )


def evaluate_point(spec: DesignSpec, alpha: float, delta: float) -> AlphaDiagnostic:
    """Test count and bounds at a fixed (alpha, delta), e.g. the theorem preset."""
    q = alpha / spec.k
    try:
        rate = eta(q, spec.k, spec.p, delta)
    except InfeasibleDesignError as exc:
        return AlphaDiagnostic(alpha, q, False, delta=delta, reason=str(exc))
    m = tests_required(rate, spec.n, spec.k, spec.pf2, spec.strategy)
    pf1 = pf1_bound(q, spec.p, delta, m, spec.flip_columns, spec.chernoff_mode)
    return AlphaDiagnostic(
        alpha=alpha,
        q=q,
        feasible=pf1 <= spec.pf1,
        m=m,
        delta=delta,
        e=(1.0 + delta) * (1.0 - spec.p) * q * m,
        pf1=pf1,
        pf2=pf2_bound(rate, spec.n, spec.k, m, spec.strategy),
        reason="" if pf1 <= spec.pf1 else "pf1 target not met at this delta",
    )


def design(spec: DesignSpec) -> DesignResult:
    grid = spec.alpha_grid()
    if not grid.size:
        return DesignResult(feasible=False, strategy=spec.strategy)

    diagnostics = tuple(design_for_alpha(spec, float(alpha)) for alpha in grid)
    best: Optional[AlphaDiagnostic] = None
    for diag in diagnostics:
        logger.debug("alpha=%.4g feasible=%s M=%s %s", diag.alpha, diag.feasible, diag.m, diag.reason)
        if diag.feasible and (best is None or diag.m < best.m):
            best = diag

    if best is None:
        logger.info("no feasible design for N=%d K=%d p=%g (%s)", spec.n, spec.k, spec.p, spec.strategy.value)
        return DesignResult(feasible=False, strategy=spec.strategy, diagnostics=diagnostics)

    logger.info(
        "%s design: M=%d alpha=%.4g delta=%.4g e=%.2f",
        spec.strategy.value, best.m, best.alpha, best.delta, best.e,
    )
    return DesignResult(
        feasible=True,
        strategy=spec.strategy,
        m=best.m,
        alpha=best.alpha,
        q=best.q,
        delta=best.delta,
        e=best.e,
        predicted_pf1=best.pf1,
        predicted_pf2=best.pf2,
        diagnostics=diagnostics,
    )
