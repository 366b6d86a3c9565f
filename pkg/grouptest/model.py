"""Boolean data model shared by every module.

Matrices are stored column-wise as packed 64-bit words: bit ``r % 64`` of word
``r // 64`` in column ``i`` is the entry ``(r, i)``. Padding bits above the last
row are always zero. Indices are 0-based throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .errors import DimensionError, GroupTestError


WORD_BITS = 64


def n_words(rows: int) -> int:
    return (rows + WORD_BITS - 1) // WORD_BITS


def _tail_mask(rows: int) -> np.uint64:
    valid = rows - WORD_BITS * (n_words(rows) - 1)
    if valid == WORD_BITS:
        return np.uint64(0xFFFF_FFFF_FFFF_FFFF)
    return np.uint64((1 << valid) - 1)


def pack_bits(bits: np.ndarray, rows: int) -> np.ndarray:
    """Pack a ``(..., rows)`` boolean array into ``(..., n_words(rows))`` uint64 words."""
    bits = np.asarray(bits, dtype=bool)
    packed = np.packbits(bits, axis=-1, bitorder="little")
    out = np.zeros(bits.shape[:-1] + (n_words(rows) * 8,), dtype=np.uint8)
    out[..., : packed.shape[-1]] = packed
    return out.view("<u8").astype(np.uint64)


def unpack_bits(words: np.ndarray, rows: int) -> np.ndarray:
    """Inverse of :func:`pack_bits`."""
    raw = np.ascontiguousarray(words, dtype="<u8").view(np.uint8)
    return np.unpackbits(raw, axis=-1, count=rows, bitorder="little").astype(bool)


def _frozen(words: np.ndarray) -> np.ndarray:
    words = np.array(words, dtype=np.uint64, copy=True)
    words.setflags(write=False)
    return words


@dataclass(frozen=True, eq=False)
class ContactMatrix:
    """M x N boolean design matrix, one packed bitset per column."""

    rows: int
    cols: int
    words: np.ndarray

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise DimensionError(f"matrix needs rows >= 1 and cols >= 1, got {self.rows}x{self.cols}")
        words = _frozen(self.words)
        if words.shape != (self.cols, n_words(self.rows)):
            raise DimensionError(
                f"word array has shape {words.shape}, expected {(self.cols, n_words(self.rows))}"
            )
        if np.any(words[:, -1] & ~_tail_mask(self.rows)):
            raise DimensionError(f"column bitsets reference rows beyond {self.rows}")
        object.__setattr__(self, "words", words)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ContactMatrix):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and np.array_equal(self.words, other.words)
        )

    __hash__ = None  # type: ignore[assignment]

    @classmethod
    def from_dense(cls, dense: np.ndarray) -> "ContactMatrix":
        dense = np.atleast_2d(np.asarray(dense, dtype=bool))
        rows, cols = dense.shape
        return cls(rows=rows, cols=cols, words=pack_bits(dense.T, rows))

    @classmethod
    def from_columns(cls, rows: int, supports: Sequence[Iterable[int]]) -> "ContactMatrix":
        dense = np.zeros((rows, len(supports)), dtype=bool)
        for col, support in enumerate(supports):
            idx = list(support)
            if any(r < 0 or r >= rows for r in idx):
                raise DimensionError(f"column {col} references a row outside [0, {rows})")
            dense[idx, col] = True
        return cls.from_dense(dense)

    @classmethod
    def identity(cls, size: int) -> "ContactMatrix":
        return cls.from_dense(np.eye(size, dtype=bool))

    def to_dense(self) -> np.ndarray:
        return unpack_bits(self.words, self.rows).T

    def column(self, i: int) -> np.ndarray:
        self._check_column(i)
        return self.words[i]

    def column_support(self, i: int) -> tuple[int, ...]:
        bits = unpack_bits(self.column(i), self.rows)
        return tuple(int(r) for r in np.flatnonzero(bits))

    def column_weights(self) -> np.ndarray:
        return np.bitwise_count(self.words).sum(axis=1, dtype=np.int64)

    def ones(self) -> int:
        return int(self.column_weights().sum())

    def density(self) -> float:
        return self.ones() / (self.rows * self.cols)

    def _check_column(self, i: int) -> None:
        if not 0 <= i < self.cols:
            raise DimensionError(f"column {i} outside [0, {self.cols})")


@dataclass(frozen=True, eq=False)
class SamplingMatrix(ContactMatrix):
    """Realized matrix after the channel; entrywise dominated by ``parent``."""

    parent: Optional[ContactMatrix] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        super().__post_init__()
        if self.parent is None:
            return
        if (self.parent.rows, self.parent.cols) != (self.rows, self.cols):
            raise DimensionError("sampling matrix shape differs from its contact matrix")
        if np.any(self.words & ~self.parent.words):
            raise GroupTestError("sampling matrix has an entry its contact matrix does not")

    @classmethod
    def noiseless(cls, contact: ContactMatrix) -> "SamplingMatrix":
        return cls(rows=contact.rows, cols=contact.cols, words=contact.words, parent=contact)


@dataclass(frozen=True)
class SupportSet:
    """Sorted defective-item indices in ``[0, n)``, at most ``k`` of them when k is set."""

    indices: tuple[int, ...]
    n: int
    k: Optional[int] = None

    def __post_init__(self) -> None:
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise GroupTestError(f"support indices must be strictly increasing: {idx}")
        if idx and (idx[0] < 0 or idx[-1] >= self.n):
            raise DimensionError(f"support index outside [0, {self.n}): {idx}")
        if self.k is not None and len(idx) > self.k:
            raise GroupTestError(f"support has {len(idx)} items, more than K={self.k}")

    @classmethod
    def of(cls, indices: Iterable[int], n: int, k: Optional[int] = None) -> "SupportSet":
        idx = [int(i) for i in indices]
        if len(set(idx)) != len(idx):
            raise GroupTestError(f"support contains duplicates: {sorted(idx)}")
        return cls(tuple(sorted(idx)), n, k)

    @classmethod
    def random(cls, n: int, k: int, rng: np.random.Generator) -> "SupportSet":
        """Uniform K-subset of ``[0, n)`` drawn without replacement."""
        picked = rng.choice(n, size=k, replace=False)
        return cls(tuple(sorted(int(i) for i in picked)), n, k)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self) -> Iterator[int]:
        return iter(self.indices)

    def __contains__(self, item: object) -> bool:
        return item in self.indices

    def union(self, other: "SupportSet") -> "SupportSet":
        return SupportSet(tuple(sorted(set(self.indices) | set(other.indices))), max(self.n, other.n))


@dataclass(frozen=True, eq=False)
class TestOutcome:
    """Length-M boolean vector of pool results, packed like a matrix column."""

    __test__ = False

    length: int
    words: np.ndarray

    def __post_init__(self) -> None:
        words = _frozen(np.atleast_1d(self.words))
        if words.shape != (n_words(self.length),):
            raise DimensionError(f"outcome words have shape {words.shape} for length {self.length}")
        if np.any(words[-1] & ~_tail_mask(self.length)):
            raise DimensionError(f"outcome has bits beyond length {self.length}")
        object.__setattr__(self, "words", words)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TestOutcome):
            return NotImplemented
        return self.length == other.length and np.array_equal(self.words, other.words)

    __hash__ = None  # type: ignore[assignment]

    def __or__(self, other: "TestOutcome") -> "TestOutcome":
        if self.length != other.length:
            raise DimensionError(f"outcome lengths differ: {self.length} vs {other.length}")
        return TestOutcome(self.length, self.words | other.words)

    def __le__(self, other: "TestOutcome") -> bool:
        """Bitwise domination."""
        if self.length != other.length:
            raise DimensionError(f"outcome lengths differ: {self.length} vs {other.length}")
        return not np.any(self.words & ~other.words)

    @classmethod
    def zeros(cls, length: int) -> "TestOutcome":
        return cls(length, np.zeros(n_words(length), dtype=np.uint64))

    @classmethod
    def all_ones(cls, length: int) -> "TestOutcome":
        return cls.from_bits(np.ones(length, dtype=bool))

    @classmethod
    def from_bits(cls, bits: Sequence[int] | np.ndarray) -> "TestOutcome":
        bits = np.asarray(bits, dtype=bool)
        return cls(int(bits.shape[0]), pack_bits(bits, int(bits.shape[0])))

    @property
    def bits(self) -> np.ndarray:
        return unpack_bits(self.words, self.length)

    def support(self) -> tuple[int, ...]:
        return tuple(int(r) for r in np.flatnonzero(self.bits))

    def popcount(self) -> int:
        return int(np.bitwise_count(self.words).sum())


def boolean_measure(s: ContactMatrix, x: SupportSet) -> TestOutcome:
    """OR of the columns of ``s`` selected by ``x``."""
    if x.indices and x.indices[-1] >= s.cols:
        raise DimensionError(f"support index {x.indices[-1]} outside [0, {s.cols})")
    if not x.indices:
        return TestOutcome.zeros(s.rows)
    words = np.bitwise_or.reduce(s.words[list(x.indices)], axis=0)
    return TestOutcome(s.rows, words)


def support_deficit(column: np.ndarray, y: TestOutcome, rows: Optional[int] = None) -> int:
    """Number of rows where ``column`` has a 1 and ``y`` has a 0.

    ``rows`` is the column's length when known; without it, a set bit at or
    beyond ``y.length`` is still reported as a length mismatch.
    """
    if rows is not None and rows != y.length:
        raise DimensionError(f"column has {rows} rows, outcome has length {y.length}")
    column = np.atleast_1d(np.asarray(column, dtype=np.uint64))
    if column.shape != y.words.shape:
        raise DimensionError(f"column has {column.shape[0]} words, outcome has {y.words.shape[0]}")
    if column[-1] & ~_tail_mask(y.length):
        raise DimensionError(f"column has entries beyond row {y.length - 1} of the outcome")
    return int(np.bitwise_count(column & ~y.words).sum())
