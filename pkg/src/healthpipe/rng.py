"""Deterministic 64-bit PRNG used everywhere randomness is needed.

The platform RNG is never used for anything that ends up in an artifact:
splits, shuffles, weight initialization, and synthetic data all draw from the
SplitMix64 generator below, so artifacts are reproducible across runs,
platforms, and implementations.

SplitMix64 recurrence (all arithmetic mod 2**64):

    state    += 0x9E3779B97F4A7C15
    z         = state
    z         = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z         = (z ^ (z >> 27)) * 0x94D049BB133111EB
    output    = z ^ (z >> 31)
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 stream seeded with a 64-bit integer (wider seeds are masked)."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Float in [0, 1) with 53 random mantissa bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def bounded(self, n: int) -> int:
        """Unbiased integer in [0, n) via rejection sampling."""
        if n <= 0:
            raise ValueError(f"bounded() requires n >= 1, got {n}")
        threshold = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next_u64()
            if r < threshold:
                return r % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.bounded(i + 1)
            items[i], items[j] = items[j], items[i]

    def uniform_range(self, low: float, high: float) -> float:
        return low + (high - low) * self.uniform()
