import math

import numpy as np
import pandas as pd
import pytest

from grouptest.construction import DisjunctReport, Witness
from grouptest.design import Strategy
from grouptest.utils.payloads import snake_to_camel, to_payload


@pytest.mark.parametrize(
    "key, expected",
    [
        ("predicted_pf1", "predictedPf1"),
        ("is_disjunct", "isDisjunct"),
        ("m", "m"),
        ("M", "M"),
        ("_private_name", "_privateName"),
    ],
)
def test_snake_to_camel(key, expected):
    assert snake_to_camel(key) == expected


def test_dataclasses_are_converted_recursively():
    report = DisjunctReport(False, 1, 0, Witness(column=0, subset=(2,), residual=0))
    assert to_payload(report) == {
        "isDisjunct": False,
        "k": 1,
        "e": 0,
        "witness": {"column": 0, "subset": [2], "residual": 0},
    }


def test_numpy_pandas_and_enums():
    frame = pd.DataFrame({"ci_low": [0.1, np.nan], "M": [10, 20]})
    payload = to_payload({"rows": frame, "counts": np.array([1, 2]), "mode": Strategy.UNIVERSAL})
    assert payload["rows"] == [{"ciLow": 0.1, "M": 10}, {"ciLow": None, "M": 20}]
    assert payload["counts"] == [1, 2]
    assert payload["mode"] == "universal"
    assert isinstance(to_payload(np.int64(3)), int)
    assert to_payload(math.inf) is None
