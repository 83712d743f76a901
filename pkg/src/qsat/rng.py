"""Deterministic, splittable random streams.

Every piece of randomness in the package derives from one master seed through
``child_rng``. Each consumer names its stream with a path of labels (strings
or small integers); the path is mapped to a ``SeedSequence`` spawn key, so
streams are independent, stable across runs and platforms, and never depend
on call order or thread count.
"""

from __future__ import annotations

import zlib

import numpy as np


def _key_part(part) -> int:
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError("stream path integers must be non-negative")
        return int(part)
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    raise TypeError(f"stream path parts must be str or int, got {type(part)!r}")


def child_rng(master_seed: int, *path) -> np.random.Generator:
    """Generator for the stream named by ``path`` under ``master_seed``."""
    key = tuple(_key_part(p) for p in path)
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=key))


def child_seed(master_seed: int, *path) -> int:
    """A derived 63-bit integer seed for the stream named by ``path``."""
    seq = np.random.SeedSequence(master_seed, spawn_key=tuple(_key_part(p) for p in path))
    return int(seq.generate_state(1, dtype=np.uint64)[0] >> 1)
