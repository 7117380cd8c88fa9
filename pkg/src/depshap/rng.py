"""Seeded, splittable random streams.

All randomness in the library flows through :func:`substream`, which derives
an independent counter-based (Philox) generator from a 64-bit seed and an
integer key path. Distinct paths give statistically independent streams, and
the mapping is stable across runs and platforms, so every sampler in the
library is reproducible from ``(seed, path)`` alone. Uniform and Bernoulli
draws come straight from the stream; Gaussian draws use the generator's
native transform, so cross-implementation comparisons should be statistical
rather than byte-exact.

Stream key constants are centralised here so call sites cannot collide.
"""

from __future__ import annotations

import numpy as np

# Top-level stream keys. Each consumer owns one key and appends its own
# sub-indices (column index, resample index, ...) after it.
STREAM_DGP_QUADRATIC = 1
STREAM_DGP_XOR = 2
STREAM_DGP_DRIFT = 3
STREAM_DGP_INTERACTION = 4
STREAM_MC_PERMUTATIONS = 20
STREAM_BOOTSTRAP = 30


def substream(seed: int, *path: int) -> np.random.Generator:
    """Independent Philox generator for the given seed and key path."""
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(seq))
