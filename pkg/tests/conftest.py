from pathlib import Path

import numpy as np
import pytest

from grouptest.model import ContactMatrix

SAMPLE_DIR = Path(__file__).resolve().parent.parent / "sample" / "example1"

# Three pools over six items: {1,3,5}, {2,4,6}, {2,3,5,6} (1-based).
EXAMPLE1_ROWS = ["101010", "010101", "011011"]
EXAMPLE1_TEXT = "3 6\n" + "\n".join(EXAMPLE1_ROWS) + "\n"


def dense(rows):
    return np.array([[c == "1" for c in row] for row in rows], dtype=bool)


@pytest.fixture
def example1() -> ContactMatrix:
    return ContactMatrix.from_dense(dense(EXAMPLE1_ROWS))


@pytest.fixture
def example1_file() -> Path:
    return SAMPLE_DIR / "contact.txt"


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
