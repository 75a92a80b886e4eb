# dlab/utils/seeding.py

import numpy as np

# Stream tags keep unrelated consumers of one seed apart
STREAM_PRIMES = 1
STREAM_TRIALS = 2
STREAM_TORUS = 3
STREAM_FIELD = 4
STREAM_SIDON = 5


def derive_seed(seed: int, *path: int) -> int:
    """Derive a 64-bit child seed for ``path`` below ``seed``"""
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=tuple(path))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def philox_generator(seed: int, *path: int) -> np.random.Generator:
    """
    Counter-based generator for the stream at ``path`` below ``seed``

    Draws from a Philox stream are positional: the k-th double depends only
    on the key and k, so a longer draw extends a shorter one without
    changing its prefix.
    """
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=tuple(path))
    key = sequence.generate_state(2, dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
