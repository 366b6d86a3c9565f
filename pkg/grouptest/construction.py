"""Random contact matrices and the exhaustive (K, e)-disjunctness oracle."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Optional

import numpy as np

from .config import settings
from .errors import AdversaryBudgetError, DimensionError, GroupTestError, InstanceTooLargeError
from .model import ContactMatrix, SamplingMatrix, n_words, pack_bits, unpack_bits
from .seeding import check_seed, stream


logger = logging.getLogger(__name__)

_MAX_CHUNK = 1 << 22


@dataclass(frozen=True)
class ConstructionParams:
    rows: int
    cols: int
    density: float
    seed: int = 0

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise DimensionError(f"need rows >= 1 and cols >= 1, got {self.rows}x{self.cols}")
        if not 0.0 < self.density <= 1.0:
            raise GroupTestError(f"density q must lie in (0, 1], got {self.density}")
        check_seed(self.seed)

    @classmethod
    def from_alpha(cls, rows: int, cols: int, alpha: float, k: int, seed: int = 0) -> "ConstructionParams":
        return cls(rows=rows, cols=cols, density=alpha / k, seed=seed)


def bernoulli_words(rows: int, cols: int, q: float, rng: np.random.Generator) -> np.ndarray:
    """Packed ``(cols, n_words(rows))`` bitsets with i.i.d. Bernoulli(q) entries.

    Walks the column-major entry sequence with geometric gaps between ones,
    which has the same law as one Bernoulli draw per entry but costs O(ones).
    """
    width = n_words(rows)
    if q >= 1.0:
        return pack_bits(np.ones((cols, rows), dtype=bool), rows)

    total = rows * cols
    words = np.zeros(cols * width, dtype=np.uint64)
    chunk = int(min(max(q * total * 1.05 + 64, 1024), _MAX_CHUNK))
    position = -1
    while position < total - 1:
        flat = position + np.cumsum(rng.geometric(q, size=chunk))
        position = int(flat[-1])
        flat = flat[flat < total]
        if not flat.size:
            continue
        col, row = np.divmod(flat, rows)
        word_idx = col * width + (row >> 6)
        values = np.left_shift(np.uint64(1), (row & 63).astype(np.uint64))
        starts = np.flatnonzero(np.r_[True, word_idx[1:] != word_idx[:-1]])
        words[word_idx[starts]] |= np.bitwise_or.reduceat(values, starts)
    return words.reshape(cols, width)


def sample_contact_matrix(params: ConstructionParams) -> ContactMatrix:
    rng = stream(params.seed)
    words = bernoulli_words(params.rows, params.cols, params.density, rng)
    m = ContactMatrix(rows=params.rows, cols=params.cols, words=words)
    logger.debug(
        "sampled %dx%d contact matrix, q=%.4g, realized density=%.4g",
        m.rows, m.cols, params.density, m.density(),
    )
    return m


@dataclass(frozen=True)
class Witness:
    """Column ``column`` keeps only ``residual`` private rows against ``subset``."""

    column: int
    subset: tuple[int, ...]
    residual: int


@dataclass(frozen=True)
class DisjunctReport:
    is_disjunct: bool
    k: int
    e: int
    witness: Optional[Witness] = None

    def __post_init__(self) -> None:
        if self.is_disjunct and self.witness is not None:
            raise GroupTestError("a disjunct report cannot carry a witness")
        if not self.is_disjunct and (self.witness is None or self.witness.residual > self.e):
            raise GroupTestError("a violation report needs a witness with residual <= e")


def _column_ints(m: ContactMatrix) -> list[int]:
    raw = np.ascontiguousarray(m.words, dtype="<u8")
    return [int.from_bytes(raw[i].tobytes(), "little") for i in range(m.cols)]


def is_disjunct(
    m: ContactMatrix,
    k: int,
    e: int,
    *,
    force: bool = False,
    max_cols: Optional[int] = None,
    max_k: Optional[int] = None,
) -> DisjunctReport:
    """Exhaustively test (K, e)-disjunctness.

    Visits columns in ascending order and, for each, subsets of the other
    columns by size 0..K and lexicographically within a size; the first
    violation found is reported.
    """
    if k < 0 or e < 0:
        raise GroupTestError("K and e must be non-negative")
    if k >= m.cols:
        raise GroupTestError(f"K={k} must be smaller than the number of columns {m.cols}")
    max_cols = settings.disjunct_max_cols if max_cols is None else max_cols
    max_k = settings.disjunct_max_k if max_k is None else max_k
    if not force and (m.cols > max_cols or k > max_k):
        raise InstanceTooLargeError(
            f"exhaustive check limited to N <= {max_cols} and K <= {max_k} "
            f"(got N={m.cols}, K={k}); pass force=True to run it anyway"
        )

    columns = _column_ints(m)
    for i, target in enumerate(columns):
        others = [j for j in range(m.cols) if j != i]
        for size in range(k + 1):
            for subset in combinations(others, size):
                covered = 0
                for j in subset:
                    covered |= columns[j]
                residual = (target & ~covered).bit_count()
                if residual <= e:
                    logger.debug("disjunctness violated: column %d against %s", i, subset)
                    return DisjunctReport(False, k, e, Witness(i, subset, residual))
    return DisjunctReport(True, k, e)


def adversarial_flip(
    m: ContactMatrix,
    flips: Mapping[int, Iterable[int]],
    e: int,
) -> SamplingMatrix:
    """Clear the given support entries; at most ``e`` per column."""
    words = np.array(m.words, copy=True)
    for col, rows in flips.items():
        rows = sorted(set(int(r) for r in rows))
        if not 0 <= col < m.cols:
            raise DimensionError(f"flip column {col} outside [0, {m.cols})")
        if len(rows) > e:
            raise AdversaryBudgetError(f"column {col}: {len(rows)} flips exceed the budget e={e}")
        support = set(m.column_support(col))
        outside = [r for r in rows if r not in support]
        if outside:
            raise AdversaryBudgetError(f"column {col}: rows {outside} are not in the column support")
        for r in rows:
            words[col, r >> 6] &= ~np.uint64(1 << (r & 63))
    return SamplingMatrix(rows=m.rows, cols=m.cols, words=words, parent=m)


def witness_flips(m: ContactMatrix, report: DisjunctReport) -> dict[int, tuple[int, ...]]:
    """Flips on the witness column that make S and S + {i} indistinguishable."""
    if report.is_disjunct or report.witness is None:
        raise GroupTestError("a disjunct matrix has no colliding flip pattern")
    w = report.witness
    covered = np.zeros_like(m.column(w.column))
    for j in w.subset:
        covered |= m.column(j)
    residual = m.column(w.column) & ~covered
    return {w.column: tuple(int(r) for r in np.flatnonzero(unpack_bits(residual, m.rows)))}
