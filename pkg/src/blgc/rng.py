"""Seeded random streams.

Every random draw in the package comes from numpy's PCG64 bit generator,
keyed by a 64-bit seed plus an optional tuple of stream identifiers
(sweep index, purpose tag, ...).  Equal keys give equal streams.
"""

import numpy as np

SEED_MASK = (1 << 64) - 1


def make_rng(seed, *stream):
    """Return a ``numpy.random.Generator`` over PCG64 for ``(seed, *stream)``."""
    key = [int(seed) & SEED_MASK] + [int(s) & SEED_MASK for s in stream]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key)))
