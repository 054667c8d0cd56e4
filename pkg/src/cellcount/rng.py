"""Seeded, splittable random streams.

Every randomized entry point takes an integer seed; sub-streams are derived
from (seed, *path) so that independent workers/iterations never share state.
"""
from __future__ import annotations

import random

import numpy as np


def derive_seed(seed: int, *path: int) -> int:
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *[int(p) for p in path]])
    return int.from_bytes(ss.generate_state(2, dtype=np.uint64).tobytes(), "little")


def make_rng(seed: int, *path: int) -> random.Random:
    return random.Random(derive_seed(seed, *path))


def fresh_seed() -> int:
    return random.SystemRandom().getrandbits(63)
