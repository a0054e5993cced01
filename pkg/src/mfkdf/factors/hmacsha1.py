"""HMAC-SHA1 challenge-response factor (YubiKey-style hardware tokens).

The token's HMAC key is the factor material. Responses to random challenges
are effectively one-time pads, so each round stores a fresh challenge plus
``pad = response XOR key``; presenting the response to the stored challenge
unmasks the key: ``key = response XOR pad``.

FIDO/U2F devices are out: their signatures include a device nonce and are
nondeterministic even with the secret in hand.
"""

from __future__ import annotations

import hashlib
import hmac

from ..cipher import xor_bytes
from ..errors import ConfigError, RangeError
from ..sources import RandomSource
from .base import FactorInstance, FactorKind, FactorMaterial, HmacSha1Params

RESPONSE_LEN = 20  # SHA-1 output, fixes the factor at 160 bits


def hmacsha1_response(key: bytes, challenge: bytes) -> bytes:
    """What the token computes. Also serves as the token simulator in tests."""
    return hmac.new(key, challenge, hashlib.sha1).digest()


def hmacsha1_setup(id: str, key: bytes, *, rng: RandomSource) -> FactorInstance:
    if len(key) != RESPONSE_LEN:
        raise ConfigError(f"HMAC key must be {RESPONSE_LEN * 8} bits, got {len(key) * 8}")
    challenge = rng.bytes(RESPONSE_LEN)
    pad = xor_bytes(hmacsha1_response(key, challenge), key)
    material = FactorMaterial(key, float(RESPONSE_LEN * 8))
    return FactorInstance(id, FactorKind.HMACSHA1, material,
                          lambda derived_key: HmacSha1Params(challenge, pad))


def hmacsha1_derive(id: str, witness: bytes, params: HmacSha1Params, *, rng: RandomSource) -> FactorInstance:
    """Unmask the key with the token's response and roll a fresh challenge.

    A wrong response unmasks a wrong key; the new pad is then self-consistently
    wrong too. No check exists here to notice, by design.
    """
    if not isinstance(witness, (bytes, bytearray)) or len(witness) != RESPONSE_LEN:
        raise RangeError(f"response witness must be {RESPONSE_LEN * 8} bits")
    key = xor_bytes(bytes(witness), params.pad)
    next_challenge = rng.bytes(RESPONSE_LEN)
    next_pad = xor_bytes(hmacsha1_response(key, next_challenge), key)
    material = FactorMaterial(key, float(RESPONSE_LEN * 8))
    return FactorInstance(id, FactorKind.HMACSHA1, material,
                          lambda derived_key: HmacSha1Params(next_challenge, next_pad))
