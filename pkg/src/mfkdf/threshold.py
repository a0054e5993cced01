"""t-of-n threshold multi-factor key derivation, recovery, and reconstitution.

The key is derived from a random secret rather than from the factors
directly. That secret is Shamir-split, and each share is stored one-time-pad
style: ``pad = share XOR HKDF(factor material)``. Any t factors unmask t
shares and recombine the secret; the missing factors are simply never needed.

Because the secret — not the factor set — determines the key, the factor set
can change while the key stays fixed: replace a forgotten factor by re-padding
its share slot, or re-split the same secret for add/remove/re-threshold.
Both require a live session that actually derived the secret; there is no
back door.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Mapping, Sequence

from .cipher import xor_bytes
from .core import DerivedKey, FactorEntry
from .errors import ConfigError, MfkdfError, PolicyMismatchError
from .factors.base import FactorInstance
from .kdf import KdfConfig, hkdf, slow_kdf
from .shamir import Share, shamir_combine, shamir_recover_share, shamir_split
from .sources import RandomSource, SystemRandomSource


@dataclass(frozen=True)
class ThresholdFactorEntry(FactorEntry):
    share_index: int
    pad: bytes  # share XOR HKDF-expanded factor material, key_bits long


@dataclass(frozen=True)
class ThresholdKeyPolicy:
    threshold: int
    key_bits: int
    salt: bytes
    kdf: KdfConfig
    factors: tuple[ThresholdFactorEntry, ...]

    @property
    def factor_ids(self) -> tuple[str, ...]:
        return tuple(f.id for f in self.factors)


class SecretHandle:
    """In-session holder of the shared secret and the shares that proved it.

    Reconstitution needs these; nothing else does. ``release`` zeroizes the
    buffers (best effort — Python copies bytes freely) and bars further use.
    """

    def __init__(self, secret: bytes, shares: Sequence[Share]):
        self._secret = bytearray(secret)
        self._shares = [(s.x, bytearray(s.y)) for s in shares]
        self._released = False

    @property
    def secret(self) -> bytes:
        self._check()
        return bytes(self._secret)

    @property
    def shares(self) -> list[Share]:
        self._check()
        return [Share(x, bytes(y)) for x, y in self._shares]

    def release(self) -> None:
        for _, y in self._shares:
            y[:] = bytes(len(y))
        self._secret[:] = bytes(len(self._secret))
        self._shares.clear()
        self._released = True

    def _check(self) -> None:
        if self._released:
            raise MfkdfError("secret handle already released")


def _expand(material: bytes, key_bits: int) -> bytes:
    return hkdf(material, b"", b"", key_bits)


ThresholdBuilder = Callable[[bytes], ThresholdKeyPolicy]


def setup_deferred(factors: Sequence[FactorInstance], threshold: int, kdf: KdfConfig,
                   rng: RandomSource) -> tuple[bytes, SecretHandle, ThresholdBuilder]:
    n = len(factors)
    if not 1 <= threshold <= n:
        raise ConfigError(f"threshold must be in [1, {n}], got {threshold}")
    if n > 255:
        raise ConfigError(f"at most 255 factors are supported, got {n}")
    ids = [f.id for f in factors]
    if len(set(ids)) != len(ids):
        raise ConfigError(f"factor ids must be unique, got {ids}")

    secret = rng.bytes(kdf.key_bytes)
    salt = rng.bytes(kdf.key_bytes)
    key = slow_kdf(secret, salt, kdf)
    shares = shamir_split(secret, threshold, n, rng)

    def build(feedback_key: bytes) -> ThresholdKeyPolicy:
        entries = tuple(
            ThresholdFactorEntry(
                f.id, f.kind, 0, f.produce_params(feedback_key),
                share.x, xor_bytes(share.y, _expand(f.material.data, kdf.key_bits)),
            )
            for f, share in zip(factors, shares)
        )
        return ThresholdKeyPolicy(threshold, kdf.key_bits, salt, kdf, entries)

    return key, SecretHandle(secret, shares), build


def derive_deferred(instances: Sequence[FactorInstance],
                    policy: ThresholdKeyPolicy) -> tuple[bytes, SecretHandle, ThresholdBuilder]:
    if len(instances) < policy.threshold:
        raise PolicyMismatchError(
            f"{policy.threshold} factors required, got {len(instances)}")
    ids = [i.id for i in instances]
    if len(set(ids)) != len(ids):
        raise PolicyMismatchError(f"duplicate factor ids presented: {ids}")
    by_id = {e.id: e for e in policy.factors}
    shares = []
    for inst in instances:
        entry = by_id.get(inst.id)
        if entry is None:
            raise PolicyMismatchError(f"factor {inst.id!r} is not part of this policy")
        if entry.kind != inst.kind:
            raise PolicyMismatchError(
                f"factor {inst.id!r} is {entry.kind.value}, got {inst.kind.value}")
        expanded = _expand(inst.material.data, policy.key_bits)
        shares.append(Share(entry.share_index, xor_bytes(entry.pad, expanded)))

    # Every presented share participates, so one wrong witness corrupts the
    # result instead of being quietly outvoted.
    secret = shamir_combine(shares, policy.threshold)
    key = slow_kdf(secret, policy.salt, policy.kdf)
    presented = {inst.id: inst for inst in instances}

    def build(feedback_key: bytes) -> ThresholdKeyPolicy:
        entries = []
        for entry in policy.factors:
            inst = presented.get(entry.id)
            if inst is None:
                entries.append(entry)  # absent factors stay at their generation
            else:
                entries.append(replace(
                    entry, generation=entry.generation + 1,
                    params=inst.produce_params(feedback_key)))
        return ThresholdKeyPolicy(policy.threshold, policy.key_bits, policy.salt,
                                  policy.kdf, tuple(entries))

    return key, SecretHandle(secret, shares), build


def threshold_setup(factors: Sequence[FactorInstance], threshold: int, *,
                    kdf: KdfConfig | None = None,
                    rng: RandomSource | None = None) -> DerivedKey:
    """Establish a t-of-n key over ``factors``."""
    kdf = kdf or KdfConfig.argon2id()
    rng = rng or SystemRandomSource()
    key, handle, build = setup_deferred(factors, threshold, kdf, rng)
    return DerivedKey(key, build(key), handle)


def threshold_derive(instances: Sequence[FactorInstance],
                     policy: ThresholdKeyPolicy) -> DerivedKey:
    """Derive from any ``threshold`` or more of the enrolled factors.

    Presented factors' parameters advance; absent factors are left exactly as
    stored. Wrong witnesses give a wrong key, never an error.
    """
    key, handle, build = derive_deferred(instances, policy)
    return DerivedKey(key, build(key), handle)


def reconstitute(policy: ThresholdKeyPolicy, session: DerivedKey, *,
                 replace_factors: Mapping[str, FactorInstance] | None = None,
                 add: Sequence[FactorInstance] = (),
                 remove: Sequence[str] = (),
                 threshold: int | None = None,
                 rng: RandomSource | None = None) -> ThresholdKeyPolicy:
    """Change the factor set without changing the key.

    ``session`` must be a live threshold derivation of this same policy —
    its secret handle supplies the shared secret and enough shares to pin the
    sharing polynomial. Pure replacement keeps the polynomial and re-pads the
    replaced slot; add/remove/re-threshold re-split the same secret fresh.
    """
    replace_factors = dict(replace_factors or {})
    add = list(add)
    remove = list(remove)
    rng = rng or SystemRandomSource()

    handle = session.material
    if handle is None:
        raise ConfigError("reconstitution requires a threshold-derived session")
    if not isinstance(session.policy, ThresholdKeyPolicy) or session.policy.salt != policy.salt:
        raise ConfigError("session does not belong to this policy")
    secret = handle.secret
    if len(secret) * 8 != policy.key_bits:
        raise ConfigError("session secret does not match the policy key length")

    by_id = {e.id: e for e in policy.factors}
    for old_id in replace_factors:
        if old_id not in by_id:
            raise ConfigError(f"cannot replace unknown factor {old_id!r}")
    for old_id in remove:
        if old_id not in by_id:
            raise ConfigError(f"cannot remove unknown factor {old_id!r}")
        if old_id in replace_factors:
            raise ConfigError(f"factor {old_id!r} cannot be both replaced and removed")

    old_t = policy.threshold
    session_shares = handle.shares
    if len(session_shares) < old_t:
        raise ConfigError("session does not hold enough shares to reconstitute")

    new_t = old_t if threshold is None else threshold
    resplit = bool(add or remove or new_t != old_t)

    new_ids = []
    for entry in policy.factors:
        if entry.id in remove:
            continue
        inst = replace_factors.get(entry.id)
        new_ids.append(entry.id if inst is None else inst.id)
    for inst in add:
        new_ids.append(inst.id)
    if len(set(new_ids)) != len(new_ids):
        raise ConfigError(f"factor ids must remain unique, got {new_ids}")
    n_new = len(new_ids)
    if not 1 <= new_t <= n_new <= 255:
        raise ConfigError(f"need 1 <= threshold <= {n_new} factors, got threshold {new_t}")

    if not resplit:
        # Same polynomial: only the replaced slots get new pads, everything
        # else is untouched and the key is bit-identical.
        entries = []
        for entry in policy.factors:
            if entry.id in replace_factors:
                inst = replace_factors[entry.id]
                old_share = _recovered_share(session_shares, old_t, entry.share_index)
                pad = xor_bytes(old_share, _expand(inst.material.data, policy.key_bits))
                entries.append(ThresholdFactorEntry(
                    inst.id, inst.kind, 0, inst.produce_params(session.key),
                    entry.share_index, pad))
            else:
                entries.append(entry)
        return ThresholdKeyPolicy(old_t, policy.key_bits, policy.salt, policy.kdf,
                                  tuple(entries))

    # Re-split the same secret under the new parameters. Retained factors'
    # expanded material is recovered from their old pad and old share, so no
    # witness is needed for factors that were not presented this session.
    new_shares = shamir_split(secret, new_t, n_new, rng)
    entries = []
    slot = 0
    for entry in policy.factors:
        if entry.id in remove:
            continue
        share = new_shares[slot]
        if entry.id in replace_factors:
            inst = replace_factors[entry.id]
            pad = xor_bytes(share.y, _expand(inst.material.data, policy.key_bits))
            entries.append(ThresholdFactorEntry(
                inst.id, inst.kind, 0, inst.produce_params(session.key), share.x, pad))
        else:
            old_share = _recovered_share(session_shares, old_t, entry.share_index)
            expanded = xor_bytes(entry.pad, old_share)
            entries.append(ThresholdFactorEntry(
                entry.id, entry.kind, entry.generation, entry.params, share.x,
                xor_bytes(share.y, expanded)))
        slot += 1
    for inst in add:
        share = new_shares[slot]
        pad = xor_bytes(share.y, _expand(inst.material.data, policy.key_bits))
        entries.append(ThresholdFactorEntry(
            inst.id, inst.kind, 0, inst.produce_params(session.key), share.x, pad))
        slot += 1
    return ThresholdKeyPolicy(new_t, policy.key_bits, policy.salt, policy.kdf,
                              tuple(entries))


def _recovered_share(session_shares: Sequence[Share], threshold: int, index: int) -> bytes:
    for share in session_shares:
        if share.x == index:
            return share.y
    return shamir_recover_share(session_shares, threshold, index).y
