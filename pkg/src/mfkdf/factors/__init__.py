"""Factor constructions and the kind-tagged dispatch used by policies and the CLI."""

from __future__ import annotations

from typing import Mapping

from ..errors import ConfigError, FormatError, PolicyMismatchError
from ..sources import ClockSource, RandomSource
from .base import (
    EmptyParams,
    FactorInstance,
    FactorKind,
    FactorMaterial,
    FactorParams,
    HmacSha1Params,
    HotpParams,
    OobaParams,
    StackParams,
    TotpParams,
    Witness,
)
from .constant import (
    device_derive,
    device_setup,
    normalize_answer,
    password_derive,
    password_setup,
    question_derive,
    question_setup,
    random_uuid,
    uuid_derive,
    uuid_setup,
    uuid_to_material,
)
from .hmacsha1 import hmacsha1_derive, hmacsha1_response, hmacsha1_setup
from .ooba import ChannelSimulator, ooba_derive, ooba_setup
from .otp import (
    hotp,
    hotp_derive,
    hotp_setup,
    otp_offset,
    otp_recover,
    otpauth_uri,
    totp,
    totp_derive,
    totp_setup,
    totp_window_offsets,
)
from .stack import stack_derive, stack_setup

__all__ = [
    "ChannelSimulator", "EmptyParams", "FactorInstance", "FactorKind",
    "FactorMaterial", "FactorParams", "HmacSha1Params", "HotpParams",
    "OobaParams", "StackParams", "TotpParams", "Witness",
    "device_derive", "device_setup", "factor_derive", "factor_setup",
    "hmacsha1_derive", "hmacsha1_response", "hmacsha1_setup", "hotp",
    "hotp_derive", "hotp_setup", "normalize_answer", "ooba_derive",
    "ooba_setup", "otp_offset", "otp_recover", "otpauth_uri",
    "password_derive", "password_setup", "question_derive", "question_setup",
    "random_uuid", "stack_derive", "stack_setup", "totp", "totp_derive",
    "totp_setup", "totp_window_offsets", "uuid_derive", "uuid_setup",
    "uuid_to_material",
]


def factor_setup(kind: FactorKind, id: str, cfg: Mapping, *, rng: RandomSource,
                 clock: ClockSource) -> FactorInstance:
    """Set up a factor of any kind from a plain config mapping.

    Expected keys per kind — password/question: ``secret`` (text, optional
    ``entropy_bits``); uuid: ``value``; persisted-device: optional ``secret``
    bytes; hotp/totp: ``key`` (20 bytes), optional ``digits``/``window``;
    hmacsha1: ``key`` (20 bytes); ooba: ``public_key`` (DER), optional
    ``digits``; stack: ``factors`` (inner instances), optional
    ``threshold``/``key_bits``.
    """
    kind = FactorKind(kind)
    try:
        if kind is FactorKind.PASSWORD:
            return password_setup(id, cfg["secret"],
                                  **_opt(cfg, "entropy_bits"))
        if kind is FactorKind.QUESTION:
            return question_setup(id, cfg["secret"],
                                  **_opt(cfg, "entropy_bits"))
        if kind is FactorKind.UUID:
            return uuid_setup(id, cfg["value"])
        if kind is FactorKind.DEVICE:
            return device_setup(id, cfg.get("secret"), rng=rng)
        if kind is FactorKind.HOTP:
            return hotp_setup(id, cfg["key"], rng=rng, **_opt(cfg, "digits"))
        if kind is FactorKind.TOTP:
            return totp_setup(id, cfg["key"], rng=rng, clock=clock,
                              **_opt(cfg, "digits", "window"))
        if kind is FactorKind.HMACSHA1:
            return hmacsha1_setup(id, cfg["key"], rng=rng)
        if kind is FactorKind.OOBA:
            return ooba_setup(id, cfg["public_key"], rng=rng, **_opt(cfg, "digits"))
        if kind is FactorKind.STACK:
            return stack_setup(id, cfg["factors"], rng=rng,
                               **_opt(cfg, "key_bits"),
                               inner_threshold=cfg.get("threshold"))
    except KeyError as exc:
        raise ConfigError(f"factor {id!r} ({kind.value}): missing config key {exc}") from exc
    raise ConfigError(f"unsupported factor kind {kind.value!r}")


def factor_derive(kind: FactorKind, id: str, witness: Witness, params: FactorParams, *,
                  rng: RandomSource, clock: ClockSource) -> FactorInstance:
    """Derive a factor of any kind from its witness and stored parameters."""
    kind = FactorKind(kind)
    if kind is FactorKind.PASSWORD:
        _expect(params, EmptyParams, id)
        return password_derive(id, witness)
    if kind is FactorKind.QUESTION:
        _expect(params, EmptyParams, id)
        return question_derive(id, witness)
    if kind is FactorKind.UUID:
        _expect(params, EmptyParams, id)
        return uuid_derive(id, witness)
    if kind is FactorKind.DEVICE:
        _expect(params, EmptyParams, id)
        return device_derive(id, witness)
    if kind is FactorKind.HOTP:
        return hotp_derive(id, witness, _expect(params, HotpParams, id), rng=rng)
    if kind is FactorKind.TOTP:
        return totp_derive(id, witness, _expect(params, TotpParams, id),
                           clock=clock, rng=rng)
    if kind is FactorKind.HMACSHA1:
        return hmacsha1_derive(id, witness, _expect(params, HmacSha1Params, id), rng=rng)
    if kind is FactorKind.OOBA:
        return ooba_derive(id, witness, _expect(params, OobaParams, id), rng=rng)
    if kind is FactorKind.STACK:
        return _stack_derive_witnesses(id, witness, _expect(params, StackParams, id),
                                       rng=rng, clock=clock)
    raise ConfigError(f"unsupported factor kind {kind.value!r}")


def _stack_derive_witnesses(id: str, witnesses: Mapping[str, Witness],
                            params: StackParams, *, rng: RandomSource,
                            clock: ClockSource) -> FactorInstance:
    """Derive a stacked factor from a nested id -> witness map."""
    if not isinstance(witnesses, Mapping):
        raise FormatError(f"stack factor {id!r} expects an id->witness mapping")
    instances = []
    for entry in params.policy.factors:
        if entry.id in witnesses:
            instances.append(factor_derive(entry.kind, entry.id, witnesses[entry.id],
                                           entry.params, rng=rng, clock=clock))
    if not instances:
        raise PolicyMismatchError(f"stack factor {id!r}: no witnesses for its inner factors")
    return stack_derive(id, instances, params.policy)


def _opt(cfg: Mapping, *keys: str) -> dict:
    return {k: cfg[k] for k in keys if k in cfg and cfg[k] is not None}


def _expect(params, cls, id):
    if not isinstance(params, cls):
        raise FormatError(
            f"factor {id!r}: expected {cls.__name__}, got {type(params).__name__}")
    return params
