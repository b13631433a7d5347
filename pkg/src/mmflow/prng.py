"""SplitMix64, the pinned generator behind every random instance.

The stream is fully specified so corpora can be regenerated in any language:

* state: one unsigned 64-bit integer, initialised to the seed
* ``next_u64``: ``state += 0x9E3779B97F4A7C15``, then
  ``z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9``,
  ``z = (z ^ (z >> 27)) * 0x94D049BB133111EB``, return ``z ^ (z >> 31)``
  (all arithmetic mod ``2**64``)
* ``uniform()``: ``(next_u64 >> 11) * 2**-53`` in ``[0, 1)``
* ``integer(lo, hi)``: ``lo + next_u64 % (hi - lo + 1)``
* ``split()``: a new generator seeded with ``next_u64``.
"""

from __future__ import annotations

MASK = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed: int):
        if not 0 <= int(seed) <= MASK:
            raise ValueError("seed must be an unsigned 64-bit integer")
        self.state = int(seed)

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        return lo + (hi - lo) * ((self.next_u64() >> 11) * 2.0**-53)

    def integer(self, lo: int, hi: int) -> int:
        """Uniform integer in the closed range ``[lo, hi]`` (modulo reduction)."""
        return lo + self.next_u64() % (hi - lo + 1)

    def split(self) -> "SplitMix64":
        return SplitMix64(self.next_u64())
