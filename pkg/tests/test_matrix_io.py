import numpy as np
import pytest

from grouptest.errors import GroupTestError, MatrixFormatError
from grouptest.matrix_io import (
    format_matrix,
    format_outcome,
    load_outcome,
    parse_matrix,
    parse_outcome,
    read_matrix,
    read_support,
    write_matrix,
    write_support,
)
from grouptest.model import ContactMatrix, SupportSet

from .conftest import EXAMPLE1_TEXT


def test_reads_example1_column_supports(example1_file, example1):
    m = read_matrix(example1_file)
    assert m == example1
    assert [m.column_support(i) for i in range(6)] == [(0,), (1, 2), (0, 2), (1,), (0, 2), (1, 2)]


def test_write_then_read(tmp_path, rng):
    m = ContactMatrix.from_dense(rng.random((67, 5)) < 0.5)
    path = write_matrix(m, tmp_path / "nested" / "m.txt")
    assert read_matrix(path) == m
    assert path.read_text().endswith("\n")


def test_format_matches_file_layout(example1):
    assert format_matrix(example1) == EXAMPLE1_TEXT


@pytest.mark.parametrize(
    "text, line_no",
    [
        ("2 3\n101\n10\n", 3),
        ("2 3\n101\n1x1\n", 3),
        ("2  3\n101\n101\n", 1),
        ("2 3\n101\n101", 3),
        ("2 3\n101\n", 3),
        ("2 3\n101\n101\n111\n", 4),
        ("", 1),
    ],
)
def test_malformed_files_report_line(text, line_no):
    with pytest.raises(MatrixFormatError) as info:
        parse_matrix(text)
    assert info.value.line_no == line_no
    assert str(info.value).startswith(f"line {line_no}:")


def test_missing_matrix_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_matrix(tmp_path / "absent.txt")


def test_non_ascii_row_reports_line(tmp_path):
    path = tmp_path / "m.txt"
    path.write_bytes("2 3\n101\n1é1\n".encode("utf-8"))
    with pytest.raises(MatrixFormatError) as info:
        read_matrix(path)
    assert info.value.line_no == 3
    assert "line 3" in str(info.value)


def test_non_ascii_support_reports_line(tmp_path):
    path = tmp_path / "x.txt"
    path.write_bytes("1\n2\n³\n".encode("utf-8"))
    with pytest.raises(MatrixFormatError) as info:
        read_support(path, 10)
    assert info.value.line_no == 3


def test_support_files(tmp_path):
    path = write_support(SupportSet.of([7, 2], 10), tmp_path / "x.txt")
    assert path.read_text() == "2\n7\n"
    assert read_support(path, 10, 2).indices == (2, 7)
    with pytest.raises(GroupTestError):
        read_support(path, 10, 1)


def test_support_file_rejects_garbage(tmp_path):
    path = tmp_path / "x.txt"
    path.write_text("1\n-3\n")
    with pytest.raises(MatrixFormatError) as info:
        read_support(path, 10)
    assert info.value.line_no == 2


def test_outcome_string_and_file(tmp_path):
    y = parse_outcome("0100")
    assert y.support() == (1,)
    assert format_outcome(y) == "0100"
    path = tmp_path / "y.txt"
    path.write_text("0100\n")
    assert load_outcome(str(path)) == y
    assert load_outcome("0100") == y
    assert np.array_equal(y.bits, [False, True, False, False])


def test_outcome_rejects_other_characters():
    with pytest.raises(MatrixFormatError):
        parse_outcome("01a")
    with pytest.raises(MatrixFormatError):
        parse_outcome("   ")
