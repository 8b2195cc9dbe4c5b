"""
Reproducible random streams.

Every stream is a Philox generator (counter-based) keyed by a SeedSequence
built from the root seed and an index path such as (replicate, path). Draw j of
a stream is then a pure function of (seed, indices, j), so results do not depend
on the order in which streams are consumed.
"""

from typing import Tuple

import numpy as np

from .errors import DomainError

SEED_LIMIT = 2**64


def check_seed(seed: int) -> int:
    if not 0 <= int(seed) < SEED_LIMIT:
        raise DomainError(f"seed must be a 64-bit unsigned integer, got {seed}")
    return int(seed)


def seed_sequence(seed: int, *indices: int) -> np.random.SeedSequence:
    entropy: Tuple[int, ...] = (check_seed(seed),) + tuple(int(i) for i in indices)
    if any(i < 0 for i in entropy):
        raise DomainError(f"stream indices must be nonnegative, got {indices}")
    return np.random.SeedSequence(entropy)


def substream(seed: int, *indices: int) -> np.random.Generator:
    """Generator for the sub-stream (seed, *indices)."""
    return np.random.Generator(np.random.Philox(seed_sequence(seed, *indices)))


def derive_seed(seed: int, *indices: int) -> int:
    """64-bit root seed for the child keyed by indices, e.g. one Monte Carlo replicate."""
    return int(seed_sequence(seed, *indices).generate_state(1, dtype=np.uint64)[0])
