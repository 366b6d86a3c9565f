from __future__ import annotations

import dataclasses
import math
from enum import Enum
from typing import Any

import numpy as np
import pandas as pd


def snake_to_camel(s: str) -> str:
    """``predicted_pf1`` -> ``predictedPf1``; leading/trailing underscores are kept."""
    core = s.strip("_")
    if "_" not in core:
        return s
    head, *rest = [part for part in core.split("_") if part]
    lead = s[: len(s) - len(s.lstrip("_"))]
    trail = s[len(s.rstrip("_")):]
    return lead + head + "".join(part[:1].upper() + part[1:] for part in rest) + trail


def to_payload(obj: Any) -> Any:
    """JSON-ready copy of ``obj`` with camelCase keys.

    Handles dataclasses, enums, numpy scalars/arrays, DataFrames and tuples.
    Non-finite floats become ``None``.
    """
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return to_payload({f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)})
    if isinstance(obj, pd.DataFrame):
        return to_payload(obj.to_dict(orient="records"))
    if isinstance(obj, dict):
        return {
            snake_to_camel(key) if isinstance(key, str) else key: to_payload(value)
            for key, value in obj.items()
        }
    if isinstance(obj, (list, tuple)):
        return [to_payload(value) for value in obj]
    if isinstance(obj, np.ndarray):
        return to_payload(obj.tolist())
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, np.generic):
        return to_payload(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj
