"""Counter-based seed derivation.

A stream is identified by the master seed plus a tuple of counters, e.g.
``(trial, STREAM_CHANNEL, column)``. The mix is numpy's ``SeedSequence`` with
the counters as ``spawn_key``, so streams are reproducible and independent no
matter in which order (or on which worker) they are created.
"""
from __future__ import annotations

import numpy as np

STREAM_MATRIX = 0
STREAM_SUPPORT = 1
STREAM_CHANNEL = 2

MAX_SEED = 2**64


def check_seed(seed: int) -> int:
    if not 0 <= int(seed) < MAX_SEED:
        raise ValueError(f"seed must be in [0, 2**64), got {seed}")
    return int(seed)


def derive_seed(master: int, *counters: int) -> int:
    seq = np.random.SeedSequence(check_seed(master), spawn_key=tuple(int(c) for c in counters))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def stream(master: int, *counters: int) -> np.random.Generator:
    seq = np.random.SeedSequence(check_seed(master), spawn_key=tuple(int(c) for c in counters))
    return np.random.default_rng(seq)
