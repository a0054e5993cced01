"""Unauthenticated AES-256-CTR with a random per-message IV.

No MAC, no checksum — on purpose. An integrity tag over factor ciphertexts
would hand an attacker an offline test for individual factor guesses.
Decrypting with the wrong key must succeed and return plausible garbage of
the right length.
"""

from __future__ import annotations

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from .errors import FormatError, LengthError
from .kdf import hkdf
from .sources import RandomSource

IV_LEN = 16
KEY_LEN = 32


def xor_bytes(a: bytes, b: bytes) -> bytes:
    if len(a) != len(b):
        raise LengthError(f"cannot XOR {len(a)} bytes with {len(b)} bytes")
    return bytes(x ^ y for x, y in zip(a, b))


def cipher_key(key_material: bytes) -> bytes:
    """Fit arbitrary-length key material to the 256-bit cipher key size."""
    if len(key_material) == KEY_LEN:
        return key_material
    return hkdf(key_material, b"", b"", KEY_LEN * 8)


def stream_encrypt(key: bytes, plaintext: bytes, rng: RandomSource) -> bytes:
    """Encrypt under a fresh random IV; returns the ``iv || body`` envelope."""
    if len(key) != KEY_LEN:
        raise LengthError(f"cipher key must be {KEY_LEN * 8} bits, got {len(key) * 8}")
    iv = rng.bytes(IV_LEN)
    enc = Cipher(algorithms.AES(key), modes.CTR(iv)).encryptor()
    return iv + enc.update(plaintext) + enc.finalize()


def stream_decrypt(key: bytes, ciphertext: bytes) -> bytes:
    """Decrypt an envelope. Any 256-bit key succeeds; only the envelope shape
    is checked."""
    if len(key) != KEY_LEN:
        raise LengthError(f"cipher key must be {KEY_LEN * 8} bits, got {len(key) * 8}")
    if len(ciphertext) < IV_LEN:
        raise FormatError(f"ciphertext envelope too short: {len(ciphertext)} bytes")
    iv, body = ciphertext[:IV_LEN], ciphertext[IV_LEN:]
    dec = Cipher(algorithms.AES(key), modes.CTR(iv)).decryptor()
    return dec.update(body) + dec.finalize()
