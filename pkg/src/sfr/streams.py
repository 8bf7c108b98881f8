"""Counter-based random streams.

Every random quantity in the package is addressed by a tuple of integers
(``seed``, purpose, index, ...) instead of being drawn from a shared,
stateful generator.  Work item ``i`` therefore sees the same numbers whether
it runs first, last, or on another thread.
"""

from __future__ import annotations

import numpy as np

_WORDS_PER_BLOCK = 4  # Philox4x64 emits four 64-bit words per counter step

# Purpose tags keep streams for different jobs disjoint under one user seed.
SUBSAMPLE = 1
BOOTSTRAP = 2
REPLICATE = 3
RANSAC = 4
SIMULATION = 5


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    return seed


def derive_seed(seed: int, *keys: int) -> int:
    """Hash ``(seed, *keys)`` into a fresh 63-bit seed."""
    ss = np.random.SeedSequence([_check_seed(seed), *map(int, keys)])
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def generator(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for the stream ``(seed, *keys)``."""
    ss = np.random.SeedSequence([_check_seed(seed), *map(int, keys)])
    return np.random.Generator(np.random.Philox(ss))


def block_uniforms(seed: int, keys: tuple[int, ...], start: int, stop: int, width: int) -> np.ndarray:
    """Uniforms on [0, 1) for work items ``start..stop-1``, ``width`` per item.

    Row ``i`` depends only on ``(seed, keys, start + i)``: each item owns a
    fixed window of the Philox counter, so any sub-range can be generated
    without producing the items before it.
    """
    blocks = -(-width // _WORDS_PER_BLOCK)
    ss = np.random.SeedSequence([_check_seed(seed), *map(int, keys)])
    bitgen = np.random.Philox(key=ss.generate_state(2, np.uint64))
    if start:
        bitgen.advance(start * blocks)
    raw = bitgen.random_raw((stop - start) * blocks * _WORDS_PER_BLOCK)
    raw = raw.reshape(stop - start, blocks * _WORDS_PER_BLOCK)[:, :width]
    return (raw >> np.uint64(11)).astype(np.float64) * 2.0**-53


def partial_fisher_yates(u: np.ndarray, n: int) -> np.ndarray:
    """Row-wise partial Fisher-Yates draws without replacement from ``range(n)``.

    ``u`` has shape (m, size) with entries in [0, 1); row ``i`` of the result
    holds the first ``size`` entries of a shuffle of ``range(n)`` driven by
    ``u[i]``.  Only swapped positions are tracked, so the cost is
    O(m * size**2) rather than O(m * n).
    """
    m, size = u.shape
    if size > n:
        raise ValueError(f"cannot draw {size} items from {n}")
    rows = np.arange(m)
    targets = np.empty((m, size), dtype=np.int64)
    stored = np.empty((m, size), dtype=np.int64)
    out = np.empty((m, size), dtype=np.int64)

    def lookup(pos: np.ndarray, upto: int) -> np.ndarray:
        value = pos.copy()
        for t in range(upto):
            hit = targets[:, t] == pos
            value[hit] = stored[hit, t]
        return value

    for j in range(size):
        r = j + np.minimum((u[:, j] * (n - j)).astype(np.int64), n - j - 1)
        at_j = lookup(np.full(m, j, dtype=np.int64), j)
        out[:, j] = lookup(r, j)
        targets[:, j] = r
        stored[rows, j] = at_j
    return out
