"""Key stacking: a whole derived key becomes one factor of another key.

The inner key's material is the outer factor's material, and the inner key
policy rides inside the outer policy as this factor's public parameters.
Inner derivations always use the fast KDF — brute-force hardening belongs to
the outermost derivation only, applied once over the whole combination.

Parameter production is deferred all the way down: only the final (outermost)
derived key is ever fed back to the leaf factors' producers.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Sequence

from ..errors import FormatError
from ..kdf import KdfConfig
from ..sources import RandomSource
from .base import FactorInstance, FactorKind, FactorMaterial, StackParams

if TYPE_CHECKING:
    from ..core import CoreKeyPolicy
    from ..threshold import ThresholdKeyPolicy


def stack_setup(id: str, factors: Sequence[FactorInstance], *, key_bits: int = 256,
                rng: RandomSource, inner_threshold: int | None = None) -> FactorInstance:
    """Set up an inner key over ``factors`` and wrap it as a factor.

    ``inner_threshold`` of None builds an n-of-n inner key; otherwise a
    t-of-n threshold inner key.
    """
    from .. import core, threshold  # deferred: those modules depend on this package

    kdf = KdfConfig.fast(key_bits)
    if inner_threshold is None:
        key, build = core.setup_deferred(factors, kdf, rng)
    else:
        key, _handle, build = threshold.setup_deferred(factors, inner_threshold, kdf, rng)
    material = FactorMaterial(key, float(key_bits))
    return FactorInstance(id, FactorKind.STACK, material,
                          lambda final_key: StackParams(build(final_key)))


def stack_derive(id: str, instances: Sequence[FactorInstance],
                 policy: "CoreKeyPolicy | ThresholdKeyPolicy") -> FactorInstance:
    """Derive the inner key from already-derived inner factor instances."""
    from .. import core, threshold

    if isinstance(policy, threshold.ThresholdKeyPolicy):
        key, _handle, build = threshold.derive_deferred(instances, policy)
    elif isinstance(policy, core.CoreKeyPolicy):
        key, build = core.derive_deferred(instances, policy)
    else:
        raise FormatError(f"not a key policy: {type(policy).__name__}")
    material = FactorMaterial(key, float(len(key) * 8))
    return FactorInstance(id, FactorKind.STACK, material,
                          lambda final_key: StackParams(build(final_key)))
