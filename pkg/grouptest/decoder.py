"""Distance decoder: item i is declared defective iff |supp(c_i) minus supp(y)| <= e."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionError, GroupTestError
from .model import ContactMatrix, SupportSet, TestOutcome


logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DecodeResult:
    detected: tuple[int, ...]
    deficits: np.ndarray
    threshold: int
    oversize_flag: bool = False

    def matches(self, truth: SupportSet) -> bool:
        """Exact support identification; oversize results never match."""
        return not self.oversize_flag and self.detected == truth.indices

    def missed(self, truth: SupportSet) -> int:
        return len(set(truth.indices) - set(self.detected))

    def extra(self, truth: SupportSet) -> int:
        return len(set(self.detected) - set(truth.indices))


def decoder_threshold(e: float) -> int:
    """Integer threshold for a real error parameter (floored)."""
    if e < 0 or math.isnan(e):
        raise GroupTestError(f"error parameter e must be non-negative, got {e}")
    return int(math.floor(e))


def column_deficits(m: ContactMatrix, y: TestOutcome) -> np.ndarray:
    if y.length != m.rows:
        raise DimensionError(f"outcome has length {y.length}, matrix has {m.rows} rows")
    return np.bitwise_count(m.words & ~y.words).sum(axis=1, dtype=np.int64)


def distance_decode(
    m: ContactMatrix,
    y: TestOutcome,
    e: float,
    *,
    k: Optional[int] = None,
) -> DecodeResult:
    threshold = decoder_threshold(e)
    deficits = column_deficits(m, y)
    detected = tuple(int(i) for i in np.flatnonzero(deficits <= threshold))
    oversize = k is not None and len(detected) > k
    if oversize:
        logger.debug("decoder reported %d items, more than K=%d", len(detected), k)
    return DecodeResult(detected=detected, deficits=deficits, threshold=threshold, oversize_flag=oversize)


def classical_decode(m: ContactMatrix, y: TestOutcome, *, k: Optional[int] = None) -> DecodeResult:
    """Columns whose support lies entirely inside the positive tests."""
    return distance_decode(m, y, 0, k=k)
