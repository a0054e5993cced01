"""Core factor model: static material, public parameters, deferred updates.

A factor construction turns whatever the user presents at login (a password,
a 6-digit code, a token response) into *material* that is identical on every
login, plus a deferred producer of next-login public parameters. The producer
runs only after the final key is known — that feedback is what lets one-time
factors hide their secrets inside their own public parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Callable, Mapping, Union

from ..errors import MfkdfError

if TYPE_CHECKING:
    from ..core import CoreKeyPolicy
    from ..threshold import ThresholdKeyPolicy


class FactorKind(str, Enum):
    PASSWORD = "password"
    QUESTION = "question"
    UUID = "uuid"
    HOTP = "hotp"
    TOTP = "totp"
    HMACSHA1 = "hmacsha1"
    OOBA = "ooba"
    STACK = "stack"
    DEVICE = "persisted-device"


@dataclass(frozen=True)
class FactorMaterial:
    """The static secret recovered from any valid witness, with its entropy."""

    data: bytes
    entropy_bits: float


@dataclass(frozen=True)
class EmptyParams:
    """Constant factors store no public parameters."""


@dataclass(frozen=True)
class HotpParams:
    digits: int
    counter: int
    offset: int
    ct: bytes  # HOTP key encrypted under the derived key


@dataclass(frozen=True)
class TotpParams:
    digits: int
    window: int
    counter: int
    offsets: bytes  # bit-packed, one entry per window slot
    ct: bytes  # TOTP key encrypted under the derived key


@dataclass(frozen=True)
class HmacSha1Params:
    challenge: bytes  # 160 bits, presented to the token at next login
    pad: bytes  # 160 bits, response XOR key


@dataclass(frozen=True)
class OobaParams:
    digits: int
    public_key: bytes  # channel public key, DER SubjectPublicKeyInfo
    offset: int
    ct: bytes  # next code, encrypted to the channel


@dataclass(frozen=True)
class StackParams:
    policy: "CoreKeyPolicy | ThresholdKeyPolicy"


FactorParams = Union[EmptyParams, HotpParams, TotpParams, HmacSha1Params, OobaParams, StackParams]

# What the user presents: text for constants, an integer code for OTP kinds,
# a 160-bit response for hmacsha1, a nested id->witness map for stacks.
Witness = Union[str, int, bytes, Mapping[str, "Witness"]]


@dataclass
class FactorInstance:
    """One setup or derivation of a factor.

    ``produce_params`` may be invoked once per derivation, with the final
    derived key. The result is cached so that a factor shared between several
    policy subtrees hands out the same parameters to each of them.
    """

    id: str
    kind: FactorKind
    material: FactorMaterial
    param_producer: Callable[[bytes], FactorParams]
    _produced: tuple[bytes, FactorParams] | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if not self.id or not isinstance(self.id, str):
            raise MfkdfError("factor id must be a non-empty string")

    def produce_params(self, key: bytes) -> FactorParams:
        if self._produced is not None:
            cached_key, cached = self._produced
            if cached_key != key:
                raise MfkdfError(f"factor {self.id!r}: parameters already produced for a different key")
            return cached
        params = self.param_producer(key)
        self._produced = (key, params)
        return params
