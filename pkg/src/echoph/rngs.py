"""Counter-based random streams.

Every stochastic component draws from a stream keyed by (master_seed, *path),
so results never depend on execution order or parallelism degree. String key
parts are hashed with crc32 to keep keys integral.
"""

from __future__ import annotations

import zlib

import numpy as np


def stream(master_seed: int, *key) -> np.random.Generator:
    parts = tuple(
        zlib.crc32(p.encode("utf-8")) if isinstance(p, str) else int(p) for p in key
    )
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=parts)
    return np.random.default_rng(ss)
