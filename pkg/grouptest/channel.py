"""Activation channel: each 1-entry of the contact matrix survives with probability p."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, GroupTestError
from .model import ContactMatrix, SamplingMatrix, SupportSet, TestOutcome, pack_bits
from .seeding import check_seed, stream


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ChannelParams:
    p: float
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.p <= 1.0:
            raise GroupTestError(f"activation probability p must lie in (0, 1], got {self.p}")
        check_seed(self.seed)


def sample_columns(m: ContactMatrix, columns: Sequence[int], cp: ChannelParams) -> np.ndarray:
    """Channel realizations of the selected columns only.

    Column ``i`` always draws from the stream keyed ``(cp.seed, i)``, so a
    column comes out the same whether or not the rest of the matrix is sampled.
    """
    columns = [int(i) for i in columns]
    if any(not 0 <= i < m.cols for i in columns):
        raise DimensionError(f"column index outside [0, {m.cols})")
    picked = np.array(m.words[columns], copy=True)
    if cp.p >= 1.0 or not columns:
        return picked
    for row, i in enumerate(columns):
        keep = stream(cp.seed, i).random(m.rows) < cp.p
        picked[row] &= pack_bits(keep, m.rows)
    return picked


def z_channel_sample(m: ContactMatrix, cp: ChannelParams) -> SamplingMatrix:
    words = sample_columns(m, range(m.cols), cp)
    return SamplingMatrix(rows=m.rows, cols=m.cols, words=words, parent=m)


def measure_with_erasures(
    m: ContactMatrix, x: SupportSet, cp: ChannelParams
) -> tuple[TestOutcome, np.ndarray]:
    """Outcome for ``x`` plus the number of erased entries in each of its columns."""
    if x.indices and x.indices[-1] >= m.cols:
        raise DimensionError(f"support index {x.indices[-1]} outside [0, {m.cols})")
    if not x.indices:
        return TestOutcome.zeros(m.rows), np.zeros(0, dtype=np.int64)
    sampled = sample_columns(m, x.indices, cp)
    erased = (
        np.bitwise_count(m.words[list(x.indices)]).sum(axis=1, dtype=np.int64)
        - np.bitwise_count(sampled).sum(axis=1, dtype=np.int64)
    )
    return TestOutcome(m.rows, np.bitwise_or.reduce(sampled, axis=0)), erased


def end_to_end_measure(m: ContactMatrix, x: SupportSet, cp: ChannelParams) -> TestOutcome:
    """Outcome of measuring ``x`` through a fresh channel realization.

    Only the columns in ``x`` are sampled; the result equals
    ``boolean_measure(z_channel_sample(m, cp), x)`` bit for bit.
    """
    return measure_with_erasures(m, x, cp)[0]


def flip_counts(contact: ContactMatrix, sampling: SamplingMatrix) -> np.ndarray:
    """Per-column number of erased entries."""
    if (contact.rows, contact.cols) != (sampling.rows, sampling.cols):
        raise DimensionError("contact and sampling matrices differ in shape")
    return contact.column_weights() - sampling.column_weights()
