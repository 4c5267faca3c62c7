"""
Counter-based random streams.

Every draw is addressed by (experiment seed, sample index, step index, stream),
so a path produces the same numbers whichever worker runs it and in whatever
order. Within one address the k-th normal variate belongs to mode k.
"""
from typing import NamedTuple

import numpy as np

MASK32 = (1 << 32) - 1
MASK64 = (1 << 64) - 1

# Stream words keep independent consumers of one (seed, sample, step) apart
NOISE_STREAM = 0
INITIAL_STREAM = 1
BOOTSTRAP_STREAM = 2
PROPERTY_STREAM = 3


class SeedCoords(NamedTuple):
    seed: int
    sample: int
    step: int
    stream: int = NOISE_STREAM


def make_generator(coords: SeedCoords) -> np.random.Generator:
    """
    Build a Philox generator keyed on the coordinates.

    Args:
        coords: (seed, sample, step, stream) address of the draw block

    Returns:
        A numpy Generator positioned at the start of the block
    """
    key = np.array(
        [coords.seed & MASK64, ((coords.sample & MASK32) << 32) | (coords.step & MASK32)],
        dtype=np.uint64,
    )
    counter = np.array([0, 0, 0, coords.stream & MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def standard_normals(coords: SeedCoords, count: int) -> np.ndarray:
    """The first `count` standard normal variates of the block at `coords`"""
    if count <= 0:
        return np.zeros(0)
    return make_generator(coords).standard_normal(count)


def bootstrap_generator(seed: int, salt: int = 0) -> np.random.Generator:
    """Sequential generator for bootstrap resampling, one per (seed, salt)"""
    return make_generator(SeedCoords(seed, MASK32, salt, BOOTSTRAP_STREAM))


def property_generator(seed: int, suite: int = 0) -> np.random.Generator:
    """Generator for random test fields in the property suites"""
    return make_generator(SeedCoords(seed, MASK32, suite, PROPERTY_STREAM))
