"""Deterministic random streams built on the counter-based Philox generator.

Every stochastic routine in the package draws from a stream keyed by
``(master_seed, stream_index)``.  Streams with different indices are
statistically independent, so ensembles can be evaluated in any order (or in
parallel) and still reproduce bit-identical results.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Return the generator for sub-stream ``index`` of master ``seed``."""
    if seed < 0 or index < 0:
        raise ValueError("seed and stream index must be non-negative")
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def ensemble_streams(seed: int, count: int, base: int = 0):
    """Yield ``count`` independent generators, one per ensemble member."""
    for i in range(count):
        yield stream(seed, base + i)
