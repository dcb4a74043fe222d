"""Deterministic 32-bit PCG generator shared by every annealing backend.

The compiled kernel and the pure-Python engine must produce bit-identical
runs, so both consume the exact same stream: PCG-XSH-RR with a 64-bit
state, the classic bounded-rejection scheme for integer draws, and
``u32 * 2**-32`` for uniforms.  Any change here changes every seeded
annealing result.
"""

from __future__ import annotations

_MULT = 6364136223846793005
_MASK64 = (1 << 64) - 1
_DEFAULT_SEQ = 0xDA3E39CB94B95BDB
# Exactly representable double; uniform() must stay in [0, 1).
_TWO_NEG32 = 2.0**-32


class Pcg32:
    """PCG-XSH-RR generator with a fixed stream-selection constant.

    ``seed`` is the user-facing knob; the sequence constant is frozen so a
    seed alone reproduces a run.
    """

    __slots__ = ("state", "inc")

    def __init__(self, seed: int, seq: int = _DEFAULT_SEQ) -> None:
        self.inc = ((seq << 1) | 1) & _MASK64
        self.state = 0
        self.next_u32()
        self.state = (self.state + (seed & _MASK64)) & _MASK64
        self.next_u32()

    def next_u32(self) -> int:
        old = self.state
        self.state = (old * _MULT + self.inc) & _MASK64
        xorshifted = (((old >> 18) ^ old) >> 27) & 0xFFFFFFFF
        rot = old >> 59
        return ((xorshifted >> rot) | (xorshifted << ((32 - rot) & 31))) & 0xFFFFFFFF

    def bounded(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection, bias-free."""
        if n <= 0:
            raise ValueError("bound must be positive")
        threshold = ((1 << 32) - n) % n
        while True:
            r = self.next_u32()
            if r >= threshold:
                return r % n

    def uniform(self) -> float:
        """Uniform double in ``[0, 1)``."""
        return self.next_u32() * _TWO_NEG32
