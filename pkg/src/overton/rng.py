"""Platform-independent random streams.

Streams are counter-based SplitMix64: draw ``k`` of a stream with seed ``s``
is ``mix64(s + k * 0x9E3779B97F4A7C15)`` (mod 2**64). Sweep cells derive
their seeds from ``(base_seed, K, t_delta, replicate)`` by chained mixing, so
any cell can be reproduced without running the others.
"""

from __future__ import annotations

import numpy as np

from . import kernels

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """The SplitMix64 finalizer on a Python int (wraps to 64 bits)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(base_seed: int, *coords: int) -> int:
    """Seed for the stream at integer coordinates under ``base_seed``.

    Each coordinate is folded in as ``s = mix64(s ^ mix64(c + (i+1)*gamma))``
    after an initial ``s = mix64(base_seed + gamma)``. Coordinates are
    position-sensitive: ``(5, 10)`` and ``(10, 5)`` give different seeds.
    """
    s = mix64((base_seed & MASK64) + GOLDEN_GAMMA)
    for i, c in enumerate(coords):
        if c < 0:
            raise ValueError(f"stream coordinates must be non-negative, got {c}")
        s = mix64(s ^ mix64(c + (i + 1) * GOLDEN_GAMMA))
    return s


class SplitMix64:
    """A SplitMix64 stream: a seed plus a count of consumed draws.

    The counter is the only mutable state; the kernels advance it when they
    consume partner draws so a stream can be handed back and forth between
    Python and compiled code.
    """

    __slots__ = ("seed", "counter")

    def __init__(self, seed: int, counter: int = 0):
        self.seed = seed & MASK64
        self.counter = counter

    def __repr__(self) -> str:
        return f"SplitMix64(seed={self.seed:#018x}, counter={self.counter})"

    def next_u64(self) -> int:
        self.counter += 1
        return mix64(self.seed + self.counter * GOLDEN_GAMMA)

    def u64(self, n: int) -> np.ndarray:
        out = kernels.splitmix_u64(self.seed, self.counter, n)
        self.counter += n
        return out

    def uniforms(self, n: int) -> np.ndarray:
        """``n`` doubles in [0, 1) with 53 random bits each."""
        out = kernels.splitmix_uniforms(self.seed, self.counter, n)
        self.counter += n
        return out

    def spawn(self, *coords: int) -> "SplitMix64":
        return SplitMix64(derive_seed(self.seed, *coords))
