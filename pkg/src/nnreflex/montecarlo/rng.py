"""Reproducible random streams.

Every unit of simulation work (a replicate, or one background with its
relabelings) draws from its own Philox stream keyed by
``(seed, spec index, unit index)``. Results are therefore identical however
the units are spread over workers.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["SEED_ENV", "default_seed", "check_seed", "stream", "as_generator"]

SEED_ENV = "NNREFLEX_SEED"
_MASK64 = (1 << 64) - 1


def default_seed() -> int:
    """Seed from the ``NNREFLEX_SEED`` environment variable, else 0."""
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return 0
    return check_seed(int(raw, 0))


def check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed <= _MASK64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent Philox generator for the work unit identified by ``key``."""
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def as_generator(rng) -> np.random.Generator:
    """Accept a generator, an integer seed or ``None`` (seed 0)."""
    if isinstance(rng, np.random.Generator):
        return rng
    return stream(0 if rng is None else int(rng))
