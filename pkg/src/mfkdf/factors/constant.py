"""Constant factors: passwords, security answers, recovery codes, device secrets.

These need no parameter updates — the witness itself is the material, after
an optional normalizing transform. Typical-entropy defaults: passwords ~40
bits, security answers ~10, a UUIDv4 recovery code exactly 122, a persisted
device secret the full 256 bits it stores.
"""

from __future__ import annotations

import re
import unicodedata

from ..errors import ConfigError, FormatError
from ..sources import RandomSource
from .base import EmptyParams, FactorInstance, FactorKind, FactorMaterial

PASSWORD_ENTROPY_DEFAULT = 40.0
QUESTION_ENTROPY_DEFAULT = 10.0
UUID_ENTROPY = 122.0
DEVICE_SECRET_LEN = 32

_UUID_RE = re.compile(r"^[0-9a-f]{8}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{12}$")


def normalize_answer(text: str) -> str:
    """Canonicalize a security answer: NFKC, lowercase, collapsed whitespace."""
    return " ".join(unicodedata.normalize("NFKC", text).lower().split())


def uuid_to_material(text: str) -> FactorMaterial:
    """Extract the 122 random bits of a canonical UUIDv4.

    The version nibble and the two variant bits carry no entropy and are
    stripped; the result is left-aligned in 16 bytes with 6 trailing zero bits.
    """
    s = text.strip().lower()
    if not _UUID_RE.match(s):
        raise FormatError(f"not a canonical 8-4-4-4-12 UUID: {text!r}")
    digits = s.replace("-", "")
    if digits[12] != "4":
        raise FormatError(f"not a version-4 UUID (version nibble {digits[12]!r})")
    variant = int(digits[16], 16)
    if variant & 0b1100 != 0b1000:
        raise FormatError(f"UUID variant bits must be 10, got nibble {digits[16]!r}")
    value = int(digits, 16)
    # bit positions from the top: 0-47 keep, 48-51 version, 52-63 keep,
    # 64-65 variant, 66-127 keep
    top = value >> 80  # 48 bits
    mid = (value >> 64) & 0xFFF  # 12 bits between version and variant
    low = value & ((1 << 62) - 1)  # 62 bits (variant's low 2 bits + final 60)
    packed = (((top << 12) | mid) << 62) | low  # 122 bits
    return FactorMaterial((packed << 6).to_bytes(16, "big"), UUID_ENTROPY)


def _constant(id: str, kind: FactorKind, material: FactorMaterial) -> FactorInstance:
    return FactorInstance(id, kind, material, lambda key: EmptyParams())


def password_setup(id: str, secret: str, *, entropy_bits: float = PASSWORD_ENTROPY_DEFAULT) -> FactorInstance:
    if not isinstance(secret, str):
        raise ConfigError("password must be text")
    return _constant(id, FactorKind.PASSWORD, FactorMaterial(secret.encode(), entropy_bits))


def password_derive(id: str, witness: str, *, entropy_bits: float = PASSWORD_ENTROPY_DEFAULT) -> FactorInstance:
    return password_setup(id, witness, entropy_bits=entropy_bits)


def question_setup(id: str, answer: str, *, entropy_bits: float = QUESTION_ENTROPY_DEFAULT) -> FactorInstance:
    if not isinstance(answer, str):
        raise ConfigError("security answer must be text")
    material = FactorMaterial(normalize_answer(answer).encode(), entropy_bits)
    return _constant(id, FactorKind.QUESTION, material)


def question_derive(id: str, witness: str, *, entropy_bits: float = QUESTION_ENTROPY_DEFAULT) -> FactorInstance:
    return question_setup(id, witness, entropy_bits=entropy_bits)


def uuid_setup(id: str, value: str) -> FactorInstance:
    return _constant(id, FactorKind.UUID, uuid_to_material(value))


def uuid_derive(id: str, witness: str) -> FactorInstance:
    return uuid_setup(id, witness)


def random_uuid(rng: RandomSource) -> str:
    """Fresh canonical UUIDv4 text from an injected source."""
    raw = bytearray(rng.bytes(16))
    raw[6] = (raw[6] & 0x0F) | 0x40
    raw[8] = (raw[8] & 0x3F) | 0x80
    h = raw.hex()
    return f"{h[:8]}-{h[8:12]}-{h[12:16]}-{h[16:20]}-{h[20:]}"


def device_setup(id: str, secret: bytes | None = None, *, rng: RandomSource | None = None) -> FactorInstance:
    """Persisted-device factor: 256 random bits stored verbatim on the device."""
    if secret is None:
        if rng is None:
            raise ConfigError("device factor needs either a secret or a random source")
        secret = rng.bytes(DEVICE_SECRET_LEN)
    if len(secret) != DEVICE_SECRET_LEN:
        raise ConfigError(f"device secret must be {DEVICE_SECRET_LEN * 8} bits, got {len(secret) * 8}")
    return _constant(id, FactorKind.DEVICE, FactorMaterial(bytes(secret), 256.0))


def device_derive(id: str, witness: bytes) -> FactorInstance:
    return device_setup(id, witness)
