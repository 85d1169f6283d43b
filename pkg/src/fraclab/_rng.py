"""Deterministic seed derivation for Monte Carlo replications.

Every replication draws from its own generator derived from (seed, key...),
so results never depend on execution order or worker count.
"""

import numpy as np


def child_rng(seed: int, *key: int) -> np.random.Generator:
    """Generator for a (seed, key...) slot, independent of all other slots."""
    if seed < 0:
        raise ValueError("need seed >= 0, got %d" % seed)
    return np.random.default_rng(np.random.SeedSequence((int(seed),) + tuple(int(k) for k in key)))
