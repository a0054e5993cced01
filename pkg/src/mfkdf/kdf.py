"""Key derivation: HKDF expansion and the configurable slow KDF.

Two speeds exist on purpose. The slow KDF (Argon2id or PBKDF2) is applied
exactly once, to the combined key material, so brute-force cost lands on the
whole factor combination. Everything internal (pad expansion, sub-keys,
stacked keys) uses plain HKDF-SHA256.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.kdf.argon2 import Argon2id
from cryptography.hazmat.primitives.kdf.hkdf import HKDF

from .errors import ConfigError, LengthError

HKDF_MAX_BITS = 255 * 256  # RFC 5869 bound for SHA-256
KEY_BITS_CHOICES = (128, 192, 256)

ALG_ARGON2ID = "argon2id"
ALG_PBKDF2_SHA256 = "pbkdf2-sha256"
ALG_HKDF_SHA256 = "hkdf-sha256"
_ALGORITHMS = (ALG_ARGON2ID, ALG_PBKDF2_SHA256, ALG_HKDF_SHA256)


def hkdf(ikm: bytes, salt: bytes = b"", info: bytes = b"", length_bits: int = 256) -> bytes:
    """Expand ``ikm`` to exactly ``length_bits`` bits with HKDF-SHA256.

    Trailing bits of the final byte are zeroed when the length is not a
    multiple of 8, so the output carries exactly the requested bits.
    """
    if length_bits <= 0 or length_bits > HKDF_MAX_BITS:
        raise LengthError(f"hkdf output length must be in (0, {HKDF_MAX_BITS}] bits, got {length_bits}")
    nbytes = (length_bits + 7) // 8
    out = HKDF(hashes.SHA256(), nbytes, salt or None, info).derive(ikm)
    spare = nbytes * 8 - length_bits
    if spare:
        out = out[:-1] + bytes([out[-1] & (0xFF << spare) & 0xFF])
    return out


@dataclass(frozen=True)
class KdfConfig:
    """Slow-KDF selection, cost parameters, and output key length in bits."""

    algorithm: str
    key_bits: int = 256
    iterations: int = 1
    memory_kib: int = 1
    parallelism: int = 1

    def __post_init__(self):
        if self.algorithm not in _ALGORITHMS:
            raise ConfigError(f"unknown KDF algorithm {self.algorithm!r}")
        if self.key_bits not in KEY_BITS_CHOICES:
            raise ConfigError(f"key length must be one of {KEY_BITS_CHOICES} bits, got {self.key_bits}")
        if self.iterations <= 0 or self.memory_kib <= 0 or self.parallelism <= 0:
            raise ConfigError("KDF cost parameters must be strictly positive")

    @property
    def key_bytes(self) -> int:
        return self.key_bits // 8

    @classmethod
    def argon2id(cls, key_bits: int = 256, *, iterations: int = 3,
                 memory_kib: int = 64 * 1024, parallelism: int = 4) -> "KdfConfig":
        return cls(ALG_ARGON2ID, key_bits, iterations, memory_kib, parallelism)

    @classmethod
    def pbkdf2(cls, key_bits: int = 256, *, iterations: int = 100_000) -> "KdfConfig":
        return cls(ALG_PBKDF2_SHA256, key_bits, iterations)

    @classmethod
    def fast(cls, key_bits: int = 256) -> "KdfConfig":
        """HKDF profile: no intentional slowdown, for tests and benchmarks."""
        return cls(ALG_HKDF_SHA256, key_bits)


def slow_kdf(material: bytes, salt: bytes, cfg: KdfConfig) -> bytes:
    """Derive the final key from combined material under ``cfg``.

    The salt must be exactly ``cfg.key_bits`` long; identical inputs always
    produce the identical key.
    """
    if len(salt) * 8 != cfg.key_bits:
        raise ConfigError(f"salt must be {cfg.key_bits} bits, got {len(salt) * 8}")
    if cfg.algorithm == ALG_HKDF_SHA256:
        return hkdf(material, salt, b"", cfg.key_bits)
    if cfg.algorithm == ALG_PBKDF2_SHA256:
        return hashlib.pbkdf2_hmac("sha256", material, salt, cfg.iterations, cfg.key_bytes)
    return Argon2id(
        salt=salt,
        length=cfg.key_bytes,
        iterations=cfg.iterations,
        lanes=cfg.parallelism,
        memory_cost=cfg.memory_kib,
    ).derive(material)
