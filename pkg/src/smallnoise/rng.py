"""Reproducible random streams for parallel Monte Carlo.

Every stream is keyed by ``(master_seed, replication, stream)`` and backed by
the counter-based Philox generator, so a replication's draws never depend on
how many other replications ran, or in which worker.
"""

import numpy as np

# stream identifiers
DIFFUSION = 0
VOLATILITY = 1
JUMPS = 2
NOISE = 3
COMPONENT_STRIDE = 16  # per-component offset for multivariate paths

SEED_MASK = (1 << 64) - 1


def seed_sequence(seed, *key):
    """Child seed sequence for ``seed`` at spawn key ``key``.

    ``seed`` is a non-negative integer (reduced mod 2**64) or an existing
    ``SeedSequence``, whose own spawn key is extended.
    """
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=tuple(seed.spawn_key) + tuple(key))
    if int(seed) < 0:
        raise ValueError("seed must be non-negative")
    return np.random.SeedSequence(int(seed) & SEED_MASK, spawn_key=tuple(int(k) for k in key))


def generator(seed, *key):
    """Philox-backed ``Generator`` for the stream ``key`` under ``seed``."""
    return np.random.Generator(np.random.Philox(seed_sequence(seed, *key)))


def replication_seed(master_seed, replication):
    """Seed object for one Monte Carlo replication."""
    return seed_sequence(master_seed, replication)
