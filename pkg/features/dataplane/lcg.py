"""
Linear congruential generator for slot nonces.

Numerical Recipes constants (a = 1664525, c = 1013904223, m = 2^32). The nonce uses the
top bits of the state, which are the ones with the longest period.
"""
from dataclasses import dataclass

from lib.constants import NONCE_BITS

LCG_A = 1664525
LCG_C = 1013904223
LCG_M = 1 << 32


@dataclass
class Lcg:
    state: int = 0

    def __post_init__(self):
        self.state %= LCG_M

    def next(self) -> int:
        """Advance and return the 32-bit state."""
        self.state = (LCG_A * self.state + LCG_C) % LCG_M
        return self.state

    def nonce(self, bits: int = NONCE_BITS) -> int:
        """Return a fresh nonce of the given width."""
        return self.next() >> (32 - bits)
