"""HOTP and TOTP factor constructions.

A one-time code changes every login, so it cannot be key material by itself.
Instead, setup fixes a random ``target`` in [0, 10^d) and publishes only the
modular difference ``offset = (target - otp) % 10^d``. The offset is uniform
for an unknown code, so it reveals nothing, yet the correct code recovers the
target exactly: ``target = (offset + otp) % 10^d``.

Keeping offsets current requires knowing what the next code will be, which
requires the OTP key. That key rides along inside the public parameters,
encrypted under the derived key — usable during the update step of a
successful derivation and opaque to everyone else.

Witnesses are exactly what a stock authenticator app displays; no app-side
changes are involved.
"""

from __future__ import annotations

import hashlib
import hmac
import struct

from ..cipher import cipher_key, stream_decrypt, stream_encrypt
from ..errors import ConfigError, RangeError, WindowExhaustedError
from ..packing import pack_offsets, unpack_offset_at, unpack_offsets
from ..sources import ClockSource, RandomSource
from .base import FactorInstance, FactorKind, FactorMaterial, HotpParams, TotpParams

DIGITS_MIN = 4
DIGITS_MAX = 9
OTP_KEY_LEN = 20
TOTP_STEP = 30  # seconds per time slot; epoch starts at 0
TOTP_WINDOW_DEFAULT = 2920  # 24 hours of 30-second slots
ENTROPY_PER_DIGIT = 3.321928094887362  # log2(10)


def _check_digits(digits: int) -> None:
    if not DIGITS_MIN <= digits <= DIGITS_MAX:
        raise ConfigError(f"digits must be in [{DIGITS_MIN}, {DIGITS_MAX}], got {digits}")


def _check_key(key: bytes) -> None:
    if len(key) != OTP_KEY_LEN:
        raise ConfigError(f"OTP key must be {OTP_KEY_LEN * 8} bits, got {len(key) * 8}")


def hotp(key: bytes, counter: int, digits: int = 6) -> int:
    """RFC 4226 HMAC-based one-time password (SHA-1, dynamic truncation)."""
    mac = hmac.new(key, struct.pack(">Q", counter), hashlib.sha1).digest()
    start = mac[-1] & 0x0F
    code = struct.unpack(">L", mac[start:start + 4])[0] & 0x7FFFFFFF
    return code % 10 ** digits


def totp(key: bytes, timestamp: float, digits: int = 6, step: int = TOTP_STEP) -> int:
    """RFC 6238 time-based code at the given UNIX time."""
    return hotp(key, int(timestamp) // step, digits)


def otp_offset(target: int, otp_value: int, digits: int) -> int:
    """Blinding offset: ``(target - otp) % 10^digits``."""
    modulus = 10 ** digits
    if not 0 <= target < modulus:
        raise RangeError(f"target {target} outside [0, {modulus})")
    if not 0 <= otp_value < modulus:
        raise RangeError(f"otp {otp_value} outside [0, {modulus})")
    return (target - otp_value) % modulus


def otp_recover(offset: int, witness: int, digits: int) -> int:
    """Recover the target from a stored offset and a presented code."""
    modulus = 10 ** digits
    if not 0 <= offset < modulus:
        raise RangeError(f"offset {offset} outside [0, {modulus})")
    if not 0 <= witness < modulus:
        raise RangeError(f"witness {witness} outside [0, {modulus})")
    return (offset + witness) % modulus


def totp_window_offsets(key: bytes, target: int, start_counter: int, window: int, digits: int) -> bytes:
    """Packed offsets for ``window`` consecutive counters from ``start_counter``."""
    if window < 1:
        raise ConfigError(f"window must be at least 1, got {window}")
    offsets = [otp_offset(target, hotp(key, start_counter + j, digits), digits) for j in range(window)]
    return pack_offsets(offsets, digits)


def _target_material(target: int, digits: int) -> FactorMaterial:
    return FactorMaterial(target.to_bytes(4, "big"), digits * ENTROPY_PER_DIGIT)


def hotp_setup(id: str, key: bytes, *, digits: int = 6, rng: RandomSource) -> FactorInstance:
    """Establish an HOTP factor; the app-side counter starts at 1."""
    _check_digits(digits)
    _check_key(key)
    target = rng.randbelow(10 ** digits)
    offset0 = otp_offset(target, hotp(key, 1, digits), digits)

    def produce(derived_key: bytes) -> HotpParams:
        ct = stream_encrypt(cipher_key(derived_key), key, rng)
        return HotpParams(digits, 1, offset0, ct)

    return FactorInstance(id, FactorKind.HOTP, _target_material(target, digits), produce)


def hotp_derive(id: str, witness: int, params: HotpParams, *, rng: RandomSource) -> FactorInstance:
    """Recover the target from this login's code and advance the counter.

    A wrong in-range code recovers a wrong target — silently. The update step
    then unwraps garbage and emits a garbage offset, which is fine: nothing
    derived from a wrong key is usable anyway.
    """
    digits = params.digits
    target = otp_recover(params.offset, _check_witness(witness, digits), digits)
    next_counter = params.counter + 1

    def produce(derived_key: bytes) -> HotpParams:
        otp_key = stream_decrypt(cipher_key(derived_key), params.ct)
        offset = otp_offset(target, hotp(otp_key, next_counter, digits), digits)
        return HotpParams(digits, next_counter, offset, params.ct)

    return FactorInstance(id, FactorKind.HOTP, _target_material(target, digits), produce)


def totp_setup(id: str, key: bytes, *, digits: int = 6, window: int = TOTP_WINDOW_DEFAULT,
               rng: RandomSource, clock: ClockSource) -> FactorInstance:
    """Establish a TOTP factor covering ``window`` slots from the current time."""
    _check_digits(digits)
    _check_key(key)
    if window < 1:
        raise ConfigError(f"window must be at least 1, got {window}")
    target = rng.randbelow(10 ** digits)
    counter0 = int(clock.now()) // TOTP_STEP

    def produce(derived_key: bytes) -> TotpParams:
        # Deferred: the material is already out, so the window computation
        # happens after key derivation rather than on its critical path.
        offsets = totp_window_offsets(key, target, counter0, window, digits)
        ct = stream_encrypt(cipher_key(derived_key), key, rng)
        return TotpParams(digits, window, counter0, offsets, ct)

    return FactorInstance(id, FactorKind.TOTP, _target_material(target, digits), produce)


def totp_derive(id: str, witness: int, params: TotpParams, *,
                clock: ClockSource, rng: RandomSource) -> FactorInstance:
    """Recover the target using the offset slot for the current time.

    Raises only when the clock falls outside the stored window; the witness
    value itself can never trigger an error.
    """
    digits = params.digits
    now_counter = int(clock.now()) // TOTP_STEP
    index = now_counter - params.counter
    if index < 0 or index >= params.window:
        raise WindowExhaustedError(
            f"time slot {now_counter} outside stored window [{params.counter}, {params.counter + params.window})")
    offset = unpack_offset_at(params.offsets, digits, params.window, index)
    target = otp_recover(offset, _check_witness(witness, digits), digits)

    def produce(derived_key: bytes) -> TotpParams:
        # Slots shared with the old window keep their offsets; only the tail
        # beyond it needs fresh codes from the unwrapped key.
        otp_key = stream_decrypt(cipher_key(derived_key), params.ct)
        old = unpack_offsets(params.offsets, digits, params.window)
        kept = old[index:]
        fresh = [
            otp_offset(target, hotp(otp_key, now_counter + j, digits), digits)
            for j in range(len(kept), params.window)
        ]
        offsets = pack_offsets(kept + fresh, digits)
        return TotpParams(digits, params.window, now_counter, offsets, params.ct)

    return FactorInstance(id, FactorKind.TOTP, _target_material(target, digits), produce)


def _check_witness(witness: int, digits: int) -> int:
    if not isinstance(witness, int) or isinstance(witness, bool):
        raise RangeError(f"OTP witness must be an integer, got {type(witness).__name__}")
    if not 0 <= witness < 10 ** digits:
        raise RangeError(f"witness {witness} outside [0, {10 ** digits})")
    return witness


def otpauth_uri(kind: FactorKind, key: bytes, label: str, *, digits: int = 6,
                issuer: str = "mfkdf", counter: int = 1) -> str:
    """Provisioning URI accepted by stock authenticator apps."""
    import base64
    import urllib.parse

    secret = base64.b32encode(key).decode().rstrip("=")
    label_q = urllib.parse.quote(label)
    if kind is FactorKind.HOTP:
        return f"otpauth://hotp/{label_q}?secret={secret}&issuer={issuer}&digits={digits}&counter={counter}"
    if kind is FactorKind.TOTP:
        return f"otpauth://totp/{label_q}?secret={secret}&issuer={issuer}&digits={digits}&period={TOTP_STEP}"
    raise ConfigError(f"no provisioning URI for factor kind {kind.value!r}")
