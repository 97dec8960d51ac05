"""Seed streams.

Every stochastic routine in the package draws from a generator derived from
``(seed, *keys)`` with :class:`numpy.random.SeedSequence`, so results depend
only on the seed and the logical position of the draw (trial index, sweep,
edge index), never on iteration order or worker count.
"""

import numpy as np


def _check_seed(seed):
    if seed is None:
        raise ValueError("a seed is required for stochastic operations")
    seed = int(seed)
    if seed < 0:
        raise ValueError(f"seed must be nonnegative, got {seed}")
    return seed


def seed_sequence(seed, *keys):
    return np.random.SeedSequence([_check_seed(seed), *[int(k) for k in keys]])


def generator(seed, *keys):
    """Philox generator keyed by ``(seed, *keys)``."""
    return np.random.Generator(np.random.Philox(seed_sequence(seed, *keys)))


def indexed_uniforms(seed, count, *keys):
    """Uniforms ``u[i]`` that are a function of ``(seed, keys, i)`` alone.

    The array is always produced from the start of a fresh counter stream, so
    entry ``i`` does not depend on ``count`` beyond ``i < count``.  Thresholding
    the same array at two levels ``p < p'`` gives monotonically coupled samples.
    """
    return generator(seed, *keys).random(count)


def word_seed(seed, *keys):
    """A 64-bit unsigned seed for the compiled samplers."""
    return seed_sequence(seed, *keys).generate_state(1, np.uint64)[0]
