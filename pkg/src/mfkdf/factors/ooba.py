"""Out-of-band authentication factor (email/SMS-style code delivery).

The next login's code is chosen locally, blinded into an offset against a
fixed target exactly like HOTP/TOTP, and stored pre-encrypted under the
*channel's* public key (RSA-OAEP-SHA256). At login the ciphertext is handed
to the channel, which alone can decrypt and deliver the code to the user.
The channel learns codes, never the target — this factor trades perfect
trustlessness for compatibility with email and SMS.

No key feedback is needed: the channel key does all the hiding.
"""

from __future__ import annotations

from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric import padding, rsa

from ..errors import ConfigError, FormatError
from ..sources import RandomSource
from .base import FactorInstance, FactorKind, FactorMaterial, OobaParams
from .otp import ENTROPY_PER_DIGIT, _check_digits, _check_witness, otp_offset, otp_recover

RSA_BITS = 2048

_OAEP = padding.OAEP(mgf=padding.MGF1(hashes.SHA256()), algorithm=hashes.SHA256(), label=None)


def _load_public_key(der: bytes):
    try:
        key = serialization.load_der_public_key(der)
    except Exception as exc:
        raise FormatError(f"invalid channel public key: {exc}") from exc
    if not isinstance(key, rsa.RSAPublicKey):
        raise FormatError("channel public key must be RSA")
    return key


def _encrypt_code(public_der: bytes, code: int, digits: int) -> bytes:
    return _load_public_key(public_der).encrypt(str(code).zfill(digits).encode(), _OAEP)


def ooba_setup(id: str, public_key_der: bytes, *, digits: int = 6, rng: RandomSource) -> FactorInstance:
    _check_digits(digits)
    _load_public_key(public_key_der)
    target = rng.randbelow(10 ** digits)
    code0 = rng.randbelow(10 ** digits)
    offset0 = otp_offset(target, code0, digits)
    ct0 = _encrypt_code(public_key_der, code0, digits)
    material = FactorMaterial(target.to_bytes(4, "big"), digits * ENTROPY_PER_DIGIT)
    return FactorInstance(id, FactorKind.OOBA, material,
                          lambda derived_key: OobaParams(digits, public_key_der, offset0, ct0))


def ooba_derive(id: str, witness: int, params: OobaParams, *, rng: RandomSource) -> FactorInstance:
    digits = params.digits
    target = otp_recover(params.offset, _check_witness(witness, digits), digits)
    next_code = rng.randbelow(10 ** digits)
    next_offset = otp_offset(target, next_code, digits)
    next_ct = _encrypt_code(params.public_key, next_code, digits)
    material = FactorMaterial(target.to_bytes(4, "big"), digits * ENTROPY_PER_DIGIT)
    return FactorInstance(id, FactorKind.OOBA, material,
                          lambda derived_key: OobaParams(digits, params.public_key, next_offset, next_ct))


class ChannelSimulator:
    """Stands in for the semi-trusted channel: holds the private key and
    reveals delivered codes. Tests and the CLI demo use this; production
    deployments point at a real S/MIME-style recipient instead."""

    def __init__(self, private_key: rsa.RSAPrivateKey):
        self._private = private_key

    @classmethod
    def create(cls) -> "ChannelSimulator":
        return cls(rsa.generate_private_key(public_exponent=65537, key_size=RSA_BITS))

    @classmethod
    def from_pem(cls, pem: bytes) -> "ChannelSimulator":
        key = serialization.load_pem_private_key(pem, password=None)
        if not isinstance(key, rsa.RSAPrivateKey):
            raise ConfigError("channel private key must be RSA")
        return cls(key)

    def private_pem(self) -> bytes:
        return self._private.private_bytes(
            serialization.Encoding.PEM,
            serialization.PrivateFormat.PKCS8,
            serialization.NoEncryption(),
        )

    def public_der(self) -> bytes:
        return self._private.public_key().public_bytes(
            serialization.Encoding.DER,
            serialization.PublicFormat.SubjectPublicKeyInfo,
        )

    def read_code(self, ct: bytes) -> int:
        """Decrypt a delivery: the d-digit code the user would receive."""
        try:
            return int(self._private.decrypt(ct, _OAEP).decode())
        except Exception as exc:
            raise FormatError(f"channel could not decrypt delivery: {exc}") from exc
