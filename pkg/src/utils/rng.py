"""Deterministic random streams.

Streams are keyed by ``(seed, *keys)`` instead of being drawn from one
shared generator, so the same instance always sees the same random start
regardless of batch composition or evaluation order.
"""

import numpy as np


def stream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for ``seed`` and a tuple of integer keys."""
    sequence = np.random.SeedSequence(
        entropy=seed, spawn_key=tuple(int(k) for k in keys)
    )
    return np.random.default_rng(sequence)


def uniform_box(
    seed: int,
    instance_ids: np.ndarray,
    dim: int,
    radius: float,
    *keys: int,
) -> np.ndarray:
    """One ``U(-radius, radius)^dim`` draw per instance, keyed by its id."""
    out = np.empty((len(instance_ids), dim))
    for row, instance_id in enumerate(instance_ids):
        rng = stream(seed, *keys, int(instance_id))
        out[row] = rng.uniform(-radius, radius, size=dim)
    return out
