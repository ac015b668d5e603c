"""Deterministic random streams.

Every random draw in the package flows from a single u64 seed. Each consumer
gets its own named substream so that adding draws to one module never shifts
the values another module sees.
"""

from __future__ import annotations

import hashlib

import numpy as np


def substream(seed: int, name: str) -> np.random.Generator:
    """Generator for the substream `name` under `seed`.

    The stream key is derived from sha256 of the name, so streams are stable
    across runs and platforms and distinct names never collide in practice.
    """
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    key = int.from_bytes(digest[:8], "little")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, key])))
