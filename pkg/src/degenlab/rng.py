"""Deterministic, splittable random streams.

Every randomized routine draws from generators derived from
``SeedSequence(seed, spawn_key=(stream, block))`` where ``block`` is the
index of a fixed-size block of trials. Results therefore depend only on
``(seed, stream, trial index)`` and never on how blocks are scheduled.
"""
from __future__ import annotations

import zlib

import numpy as np

BLOCK = 1024


def stream_id(name: str) -> int:
    return zlib.crc32(name.encode())


def generator(seed: int, stream: str, index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(stream_id(stream), int(index)))
    return np.random.Generator(np.random.PCG64(ss))


def blocks(seed: int, stream: str, total: int, block: int = BLOCK):
    """Yield ``(start, stop, rng)`` covering ``range(total)``."""
    for b, start in enumerate(range(0, total, block)):
        yield start, min(start + block, total), generator(seed, stream, b)


def log_uniform(rng: np.random.Generator, lo: float, hi: float, size=None):
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size))
