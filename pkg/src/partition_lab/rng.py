"""Seeded random streams.

All randomness goes through :class:`numpy.random.Generator` over PCG64
(period 2**128). Streams are derived from ``(seed, index)`` with
:class:`numpy.random.SeedSequence` spawn keys, so chunk ``i`` of an
experiment sees the same draws whichever worker runs it.
"""

from __future__ import annotations

import numpy as np

_U64 = np.uint64


def make_rng(seed: int | None = None, *stream) -> np.random.Generator:
    """Generator for ``seed``; extra integers select an independent substream."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.PCG64(ss))


def as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return make_rng(rng)


def randbelow(rng: np.random.Generator, bound: int) -> int:
    """Uniform integer in ``[0, bound)`` for a Python int of any size."""
    if bound <= 0:
        raise ValueError("bound must be positive")
    if bound <= 1 << 62:
        return int(rng.integers(0, bound))
    bits = bound.bit_length()
    words = (bits + 63) // 64
    excess = 64 * words - bits
    while True:
        raw = rng.integers(0, np.iinfo(_U64).max, size=words, dtype=_U64, endpoint=True)
        x = int.from_bytes(raw.tobytes(), "little") >> excess
        if x < bound:
            return x


def randbelow_many(rng: np.random.Generator, bound: int, size: int) -> list[int]:
    """``size`` independent draws of :func:`randbelow`."""
    if bound <= 1 << 62:
        return [int(x) for x in rng.integers(0, bound, size=size)]
    return [randbelow(rng, bound) for _ in range(size)]
