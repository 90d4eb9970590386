"""Deterministic counter-based value generator for property-style tests.

There is no RNG anywhere in this package: "random" draws in verification
suites come from this SplitMix64-style mixer, keyed by an explicit seed and
an implicit call counter, so every run of every suite sees bit-identical
inputs on every platform.
"""

from __future__ import annotations

from fractions import Fraction

_MASK = (1 << 64) - 1


class DetRand:
    """SplitMix64 sequence; same seed, same machine-independent stream."""

    def __init__(self, seed: int = 0x9E3779B97F4A7C15):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        return lo + (hi - lo) * (self.next_u64() >> 11) / float(1 << 53)

    def fraction(self, lo: int = -12, hi: int = 12, max_den: int = 4) -> Fraction:
        """A small exact rational, for the exact-arithmetic algebra suites."""
        num = lo + self.next_u64() % (hi - lo + 1)
        den = 1 + self.next_u64() % max_den
        return Fraction(num, den)

    def su2_fraction_triple(self, **kw) -> tuple:
        return (self.fraction(**kw), self.fraction(**kw), self.fraction(**kw))
