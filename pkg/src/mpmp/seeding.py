"""Deterministic per-unit random streams.

Every random decision derives from the master seed through
``SeedSequence(master_seed, spawn_key=(kind_code, *indices))``; the kind
codes below are frozen so results never depend on scheduling or thread
count.
"""
from __future__ import annotations

import numpy as np

KIND_CODES = {
    "paths": 1,
    "uplink_noise": 2,
    "baseline_noise": 3,
    "velocity": 4,
    "theory": 5,
    "instance": 6,
}


def substream(master_seed: int, kind: str, *indices: int) -> np.random.Generator:
    code = KIND_CODES[kind]
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(code, *map(int, indices)))
    return np.random.default_rng(ss)
