"""Byte-wise Shamir secret sharing over GF(256).

Each byte of the secret gets its own random polynomial over the AES field
(x^8 + x^4 + x^3 + x + 1), so shares are exactly as long as the secret and
up to 255 of them can be issued. Combining is plain Lagrange interpolation
at x=0 and deliberately carries no integrity check: inconsistent shares
produce garbage bytes, never an error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import ParameterError
from .sources import RandomSource

# log/exp tables for the AES polynomial, generator 3
_EXP = [0] * 512
_LOG = [0] * 256


def _build_tables() -> None:
    x = 1
    for i in range(255):
        _EXP[i] = x
        _LOG[x] = i
        # multiply by the generator 0x03 = x * 2 ^ x
        double = (x << 1) ^ (0x11B if x & 0x80 else 0)
        x = (double ^ x) & 0xFF
    for i in range(255, 512):
        _EXP[i] = _EXP[i - 255]


_build_tables()


def _mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return _EXP[_LOG[a] + _LOG[b]]


def _div(a: int, b: int) -> int:
    if b == 0:
        raise ZeroDivisionError("division by zero in GF(256)")
    if a == 0:
        return 0
    return _EXP[(_LOG[a] - _LOG[b]) % 255]


@dataclass(frozen=True)
class Share:
    """One share: field index x in [1, 255] and one evaluation per secret byte."""

    x: int
    y: bytes


def _check_share_set(shares: Sequence[Share], threshold: int) -> None:
    if threshold < 1:
        raise ParameterError(f"threshold must be at least 1, got {threshold}")
    if len(shares) < threshold:
        raise ParameterError(f"need at least {threshold} shares, got {len(shares)}")
    xs = [s.x for s in shares]
    if len(set(xs)) != len(xs):
        raise ParameterError("share indices must be distinct")
    for s in shares:
        if not 1 <= s.x <= 255:
            raise ParameterError(f"share index {s.x} out of range [1, 255]")
    lengths = {len(s.y) for s in shares}
    if len(lengths) != 1:
        raise ParameterError("shares must all have the same length")


def shamir_split(secret: bytes, threshold: int, count: int, rng: RandomSource) -> list[Share]:
    """Split ``secret`` into ``count`` shares, any ``threshold`` of which recover it.

    Shares are issued at x = 1..count. Fewer than ``threshold`` shares reveal
    nothing about the secret (per byte, information-theoretically).
    """
    if not secret:
        raise ParameterError("secret must be non-empty")
    if not 1 <= threshold <= count <= 255:
        raise ParameterError(f"need 1 <= threshold <= count <= 255, got t={threshold}, n={count}")
    # coefficient rows: polys[b] = [secret[b], c1, ..., c_{t-1}]
    polys = [bytes([s]) + rng.bytes(threshold - 1) for s in secret]
    shares = []
    for x in range(1, count + 1):
        y = bytearray(len(secret))
        for b, poly in enumerate(polys):
            acc = 0
            for coeff in reversed(poly):
                acc = _mul(acc, x) ^ coeff
            y[b] = acc
        shares.append(Share(x, bytes(y)))
    return shares


def _interpolate_at(shares: Sequence[Share], x0: int) -> bytes:
    """Lagrange-evaluate the polynomial through all given shares at x0."""
    n = len(shares[0].y)
    out = bytearray(n)
    # basis[i] = prod_{j != i} (x0 - x_j) / (x_i - x_j); subtraction is XOR here
    basis = []
    for i, si in enumerate(shares):
        num, den = 1, 1
        for j, sj in enumerate(shares):
            if i == j:
                continue
            num = _mul(num, x0 ^ sj.x)
            den = _mul(den, si.x ^ sj.x)
        basis.append(_div(num, den))
    for b in range(n):
        acc = 0
        for i, s in enumerate(shares):
            acc ^= _mul(basis[i], s.y[b])
        out[b] = acc
    return bytes(out)


def shamir_combine(shares: Sequence[Share], threshold: int) -> bytes:
    """Recover the candidate secret from at least ``threshold`` shares.

    All provided shares participate in the interpolation, so a single
    corrupted share corrupts the result instead of being masked. There is no
    way to tell a wrong result apart from a right one here, by design.
    """
    _check_share_set(shares, threshold)
    return _interpolate_at(shares, 0)


def shamir_recover_share(shares: Sequence[Share], threshold: int, x_target: int) -> Share:
    """Evaluate the shared polynomial at ``x_target``.

    Given ``threshold`` consistent shares this reproduces the share originally
    issued at that index, which lets a replacement factor take over an existing
    slot without re-splitting.
    """
    if not 1 <= x_target <= 255:
        raise ParameterError(f"target index {x_target} out of range [1, 255]")
    _check_share_set(shares, threshold)
    return Share(x_target, _interpolate_at(shares, x_target))
