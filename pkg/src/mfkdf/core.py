"""n-of-n multi-factor key derivation.

Factor material is concatenated (length-prefixed, so distinct splits can
never collide), run through the slow KDF with a per-key salt, and the
resulting key is fed back to every factor's parameter producer to mint the
next generation of public parameters.

Setup and derive both come in a deferred flavor that returns the key plus a
policy builder instead of invoking the producers immediately. Stacked keys
need this: when a key serves as a factor of an outer key, only the *final*
derived key is fed back, so parameter production must wait until that key
exists.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Callable, Sequence

from .errors import ConfigError, PolicyMismatchError
from .factors.base import FactorInstance, FactorKind, FactorParams
from .kdf import KdfConfig, slow_kdf
from .sources import RandomSource, SystemRandomSource

if TYPE_CHECKING:
    from .threshold import SecretHandle, ThresholdKeyPolicy


@dataclass(frozen=True)
class FactorEntry:
    """Public per-factor state inside a key policy."""

    id: str
    kind: FactorKind
    generation: int
    params: FactorParams


@dataclass(frozen=True)
class CoreKeyPolicy:
    """Everything needed (besides the witnesses) to re-derive an n-of-n key."""

    key_bits: int
    salt: bytes
    kdf: KdfConfig
    factors: tuple[FactorEntry, ...]

    @property
    def factor_ids(self) -> tuple[str, ...]:
        return tuple(f.id for f in self.factors)


@dataclass
class DerivedKey:
    """A derived key together with the policy for the *next* derivation.

    ``material`` is only populated for threshold keys: it is the in-session
    handle over the shared secret that reconstitution requires.
    """

    key: bytes
    policy: "CoreKeyPolicy | ThresholdKeyPolicy | object"
    material: "SecretHandle | None" = None


PolicyBuilder = Callable[[bytes], CoreKeyPolicy]


def combine_material(factors: Sequence[FactorInstance]) -> bytes:
    """Length-prefixed concatenation of factor material, in factor order."""
    parts = []
    for f in factors:
        data = f.material.data
        parts.append(struct.pack(">I", len(data)))
        parts.append(data)
    return b"".join(parts)


def _check_factor_list(factors: Sequence[FactorInstance]) -> None:
    if not factors:
        raise ConfigError("at least one factor is required")
    ids = [f.id for f in factors]
    if len(set(ids)) != len(ids):
        raise ConfigError(f"factor ids must be unique, got {ids}")


def setup_deferred(factors: Sequence[FactorInstance], kdf: KdfConfig,
                   rng: RandomSource) -> tuple[bytes, PolicyBuilder]:
    """Derive a fresh key; parameter production waits for the builder call."""
    _check_factor_list(factors)
    salt = rng.bytes(kdf.key_bytes)
    key = slow_kdf(combine_material(factors), salt, kdf)

    def build(feedback_key: bytes) -> CoreKeyPolicy:
        entries = tuple(
            FactorEntry(f.id, f.kind, 0, f.produce_params(feedback_key))
            for f in factors
        )
        return CoreKeyPolicy(kdf.key_bits, salt, kdf, entries)

    return key, build


def derive_deferred(instances: Sequence[FactorInstance],
                    policy: CoreKeyPolicy) -> tuple[bytes, PolicyBuilder]:
    """Re-derive the key; all factors must be presented in setup order."""
    _check_factor_list(instances)
    expected = [(e.id, e.kind) for e in policy.factors]
    got = [(i.id, i.kind) for i in instances]
    if expected != got:
        raise PolicyMismatchError(f"factor set mismatch: policy has {expected}, got {got}")
    key = slow_kdf(combine_material(instances), policy.salt, policy.kdf)

    def build(feedback_key: bytes) -> CoreKeyPolicy:
        entries = tuple(
            replace(entry, generation=entry.generation + 1,
                    params=inst.produce_params(feedback_key))
            for entry, inst in zip(policy.factors, instances)
        )
        return CoreKeyPolicy(policy.key_bits, policy.salt, policy.kdf, entries)

    return key, build


def mfkdf_setup(factors: Sequence[FactorInstance], *, kdf: KdfConfig | None = None,
                rng: RandomSource | None = None) -> DerivedKey:
    """Establish an n-of-n key over ``factors``. Defaults to Argon2id at 256 bits."""
    kdf = kdf or KdfConfig.argon2id()
    rng = rng or SystemRandomSource()
    key, build = setup_deferred(factors, kdf, rng)
    return DerivedKey(key, build(key))


def mfkdf_derive(instances: Sequence[FactorInstance], policy: CoreKeyPolicy) -> DerivedKey:
    """Derive the key from a full factor set and advance every factor's
    parameters. Wrong witnesses yield a wrong key, never an error."""
    key, build = derive_deferred(instances, policy)
    return DerivedKey(key, build(key))
