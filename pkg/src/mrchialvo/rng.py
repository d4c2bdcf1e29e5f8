"""SplitMix64 pseudo-random generator.

SplitMix64 (Steele, Lea & Flood, 2014) is used for every random draw in the
package so that a given integer seed reproduces the same stream in any
language. The reference algorithm is::

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)

all arithmetic modulo 2**64. Doubles in [0, 1) are ``(next() >> 11) * 2**-53``.

Test vector: seed 1234567 yields 6457827717110365317, 3203168211198807973,
9817491932198370423, 4593380528125082431, 16408922859458223821.
"""

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed: int):
        self.state = int(seed) & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def random(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform(self, low: float, high: float, size: int) -> np.ndarray:
        """``size`` draws from [low, high), in stream order."""
        u = np.array([self.random() for _ in range(size)], dtype=np.float64)
        return low + (high - low) * u
