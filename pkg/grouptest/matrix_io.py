"""Text formats for matrices, support sets and outcomes (see FORMATS.md)."""
from __future__ import annotations

import logging
import re
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import MatrixFormatError
from .model import ContactMatrix, SupportSet, TestOutcome


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

_HEADER_RE = re.compile(r"^(\d+) (\d+)$")
_ZERO = ord("0")


def _parse_bits(line: str, width: int, line_no: int) -> np.ndarray:
    if len(line) != width:
        raise MatrixFormatError(f"expected {width} characters, found {len(line)}", line_no)
    raw = np.frombuffer(line.encode("ascii", errors="replace"), dtype=np.uint8) - _ZERO
    if np.any(raw > 1):
        bad = line[int(np.argmax(raw > 1))]
        raise MatrixFormatError(f"unexpected character {bad!r}; only 0 and 1 are allowed", line_no)
    return raw.astype(bool)


def _read_ascii(path: Path) -> str:
    raw = path.read_bytes()
    try:
        return raw.decode("ascii")
    except UnicodeDecodeError as exc:
        line_no = raw.count(b"\n", 0, exc.start) + 1
        raise MatrixFormatError(
            f"non-ASCII byte 0x{raw[exc.start]:02x}; only 0 and 1 are allowed", line_no
        ) from None


def parse_matrix(text: str) -> ContactMatrix:
    if not text:
        raise MatrixFormatError("empty matrix file", 1)
    lines = text.split("\n")
    if lines[-1] != "":
        raise MatrixFormatError("missing trailing newline", len(lines))
    lines = lines[:-1]

    match = _HEADER_RE.match(lines[0])
    if not match:
        raise MatrixFormatError(f"malformed header {lines[0]!r}; expected 'M N'", 1)
    rows, cols = int(match.group(1)), int(match.group(2))
    if rows < 1 or cols < 1:
        raise MatrixFormatError(f"header declares an empty {rows}x{cols} matrix", 1)

    body = lines[1:]
    if len(body) < rows:
        raise MatrixFormatError(f"expected {rows} rows, file ends after {len(body)}", len(lines) + 1)
    if len(body) > rows:
        raise MatrixFormatError(f"unexpected extra line after {rows} rows", rows + 2)

    dense = np.empty((rows, cols), dtype=bool)
    for r, line in enumerate(body):
        dense[r] = _parse_bits(line, cols, r + 2)
    return ContactMatrix.from_dense(dense)


def format_matrix(m: ContactMatrix) -> str:
    dense = m.to_dense().astype(np.uint8) + _ZERO
    body = "\n".join(row.tobytes().decode("ascii") for row in dense)
    return f"{m.rows} {m.cols}\n{body}\n"


def read_matrix(path: PathLike) -> ContactMatrix:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Matrix file not found at {path}")
    m = parse_matrix(_read_ascii(path))
    logger.debug("read %dx%d matrix from %s", m.rows, m.cols, path)
    return m


def write_matrix(m: ContactMatrix, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="ascii", newline="\n") as handle:
        handle.write(format_matrix(m))
    logger.info("wrote %dx%d matrix to %s", m.rows, m.cols, path)
    return path


def read_support(path: PathLike, n: int, k: Optional[int] = None) -> SupportSet:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Support file not found at {path}")
    indices = []
    for line_no, line in enumerate(_read_ascii(path).splitlines(), start=1):
        token = line.strip()
        if not token:
            continue
        if not token.isdigit():
            raise MatrixFormatError(f"support index {token!r} is not a non-negative integer", line_no)
        indices.append(int(token))
    return SupportSet.of(indices, n, k)


def write_support(x: SupportSet, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(f"{i}\n" for i in x), encoding="ascii")
    return path


def parse_outcome(text: str) -> TestOutcome:
    token = text.strip()
    if not token:
        raise MatrixFormatError("empty outcome string", 1)
    return TestOutcome.from_bits(_parse_bits(token, len(token), 1))


def format_outcome(y: TestOutcome) -> str:
    return (y.bits.astype(np.uint8) + _ZERO).tobytes().decode("ascii")


def load_outcome(value: str) -> TestOutcome:
    """Accept either a literal 0/1 string or the path of a file holding one."""
    if value and set(value.strip()) <= {"0", "1"}:
        return parse_outcome(value)
    path = Path(value)
    if not path.exists():
        raise FileNotFoundError(f"Outcome file not found at {path}")
    return parse_outcome(_read_ascii(path))
