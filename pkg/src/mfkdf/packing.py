"""Fixed-width bit packing for OTP offset tables.

A d-digit offset needs ceil(d * log2(10)) bits; at d=6 that is 20 bits per
entry instead of 32 or 64, which is what keeps month-long TOTP windows at a
few hundred kilobytes.
"""

from __future__ import annotations

import math
from typing import Sequence

from .errors import FormatError, RangeError


def offset_bits(digits: int) -> int:
    """Bits needed to store one offset in [0, 10^digits)."""
    return math.ceil(digits * math.log2(10))


def packed_size(count: int, digits: int) -> int:
    """Exact packed size in bytes for ``count`` offsets."""
    return (count * offset_bits(digits) + 7) // 8


def pack_offsets(offsets: Sequence[int], digits: int) -> bytes:
    """Pack offsets big-endian at ``offset_bits(digits)`` bits each, zero-padded
    to a byte boundary."""
    width = offset_bits(digits)
    bound = 10 ** digits
    out = bytearray()
    acc = 0
    nbits = 0
    for i, value in enumerate(offsets):
        if not 0 <= value < bound:
            raise RangeError(f"offset #{i} is {value}, outside [0, {bound})")
        acc = (acc << width) | value
        nbits += width
        while nbits >= 8:
            nbits -= 8
            out.append((acc >> nbits) & 0xFF)
        acc &= (1 << nbits) - 1
    if nbits:
        out.append((acc << (8 - nbits)) & 0xFF)
    return bytes(out)


def unpack_offsets(data: bytes, digits: int, count: int) -> list[int]:
    """Inverse of :func:`pack_offsets` for exactly ``count`` entries."""
    expected = packed_size(count, digits)
    if len(data) != expected:
        raise FormatError(f"packed offsets must be {expected} bytes for {count} entries, got {len(data)}")
    width = offset_bits(digits)
    bound = 10 ** digits
    out = []
    acc = 0
    nbits = 0
    pos = 0
    for i in range(count):
        while nbits < width:
            acc = (acc << 8) | data[pos]
            pos += 1
            nbits += 8
        nbits -= width
        value = acc >> nbits
        acc &= (1 << nbits) - 1
        if value >= bound:
            raise FormatError(f"packed offset #{i} decodes to {value}, outside [0, {bound})")
        out.append(value)
    return out


def unpack_offset_at(data: bytes, digits: int, count: int, index: int) -> int:
    """Read a single offset without unpacking the whole table."""
    if not 0 <= index < count:
        raise RangeError(f"offset index {index} outside [0, {count})")
    expected = packed_size(count, digits)
    if len(data) != expected:
        raise FormatError(f"packed offsets must be {expected} bytes for {count} entries, got {len(data)}")
    width = offset_bits(digits)
    start = index * width
    first, last = start // 8, (start + width - 1) // 8
    chunk = int.from_bytes(data[first:last + 1], "big")
    spare = (last + 1) * 8 - (start + width)
    value = (chunk >> spare) & ((1 << width) - 1)
    if value >= 10 ** digits:
        raise FormatError(f"packed offset #{index} decodes to {value}, outside [0, {10 ** digits})")
    return value
