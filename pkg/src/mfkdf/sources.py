"""Injectable randomness and time sources.

Every algorithm in this package receives its random bytes and its notion of
"now" through these interfaces. Nothing below reads the wall clock or an
ambient RNG, which makes every derivation replayable in tests.
"""

from __future__ import annotations

import random
import secrets
import time


class RandomSource:
    """Produces uniformly random byte strings of a requested length."""

    def bytes(self, n: int) -> bytes:
        raise NotImplementedError

    def randbelow(self, bound: int) -> int:
        """Uniform integer in [0, bound) via rejection sampling."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        if bound == 1:
            return 0
        nbits = (bound - 1).bit_length()
        nbytes = (nbits + 7) // 8
        shift = nbytes * 8 - nbits
        while True:
            value = int.from_bytes(self.bytes(nbytes), "big") >> shift
            if value < bound:
                return value


class SystemRandomSource(RandomSource):
    """Cryptographically secure randomness from the operating system."""

    def bytes(self, n: int) -> bytes:
        return secrets.token_bytes(n)


class SeededRandomSource(RandomSource):
    """Deterministic stream for tests and reproducible setups. Not secure."""

    def __init__(self, seed: int):
        self._rng = random.Random(seed)

    def bytes(self, n: int) -> bytes:
        return self._rng.randbytes(n)


class ClockSource:
    """Supplies the current UNIX time in seconds."""

    def now(self) -> float:
        raise NotImplementedError


class SystemClock(ClockSource):
    def now(self) -> float:
        return time.time()


class FixedClock(ClockSource):
    """Fully controllable clock for tests; advances only when told to."""

    def __init__(self, start: float):
        self._now = float(start)

    def now(self) -> float:
        return self._now

    def advance(self, seconds: float) -> None:
        self._now += seconds

    def set(self, timestamp: float) -> None:
        self._now = float(timestamp)
