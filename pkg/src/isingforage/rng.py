"""Seed-stream derivation.

Every experiment consumes randomness through child generators derived from a
single root seed.  A child stream is identified by a tuple of small integers
(the "stream key"), so fanning runs out across workers or resuming from a
checkpoint never changes which numbers a given piece of work sees.
"""

from __future__ import annotations

import numpy as np

# Stream ids for the first key component.  Keys are (STREAM, *indices), e.g.
# (STREAM_LIFETIME, replicate, generation).
STREAM_INIT = 0
STREAM_LIFETIME = 1
STREAM_EVOLVE = 2
STREAM_CRITICALITY = 3
STREAM_BENCHMARK = 4
STREAM_ANALYSIS = 5


def child_rng(root_seed: int, *key: int) -> np.random.Generator:
    """Derive a generator for the stream identified by `key`."""
    ss = np.random.SeedSequence(entropy=int(root_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def rand_permutation(rng: np.random.Generator, n: int) -> np.ndarray:
    """Uniform permutation of range(n) by Fisher-Yates.

    Implemented explicitly (rather than rng.permutation) so that compiled
    kernels and pure-python reference code consume the identical sequence of
    rng.integers draws: one draw per i from n-1 down to 1.
    """
    idx = np.arange(n, dtype=np.int64)
    for i in range(n - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        idx[i], idx[j] = idx[j], idx[i]
    return idx
