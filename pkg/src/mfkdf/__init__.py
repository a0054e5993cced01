"""Multi-factor key derivation.

Derive symmetric encryption keys from combinations of authentication factors
— passwords, security answers, recovery codes, HOTP/TOTP codes, HMAC-SHA1
hardware tokens, out-of-band codes — instead of from a password alone.
Supports t-of-n threshold derivation with client-side recovery and
reconstitution, arbitrary policy trees via key stacking, and derived-key
authentication with data/auth sub-key separation.
"""

from .auth import Challenge, SubKeys, Verifier, VerifyResult, prove, split_subkeys
from .cipher import stream_decrypt, stream_encrypt
from .core import CoreKeyPolicy, DerivedKey, FactorEntry, mfkdf_derive, mfkdf_setup
from .errors import (
    ConfigError,
    FormatError,
    LengthError,
    MfkdfError,
    ParameterError,
    PolicyMismatchError,
    RangeError,
    StorageError,
    VersionError,
    WindowExhaustedError,
)
from .factors import (
    ChannelSimulator,
    FactorInstance,
    FactorKind,
    FactorMaterial,
    factor_derive,
    factor_setup,
)
from .kdf import KdfConfig, hkdf, slow_kdf
from .packing import pack_offsets, unpack_offsets
from .persistence import PolicyDocument, atomic_update, parse_policy, serialize_policy
from .policy import (
    AllOf,
    AnyOf,
    AtLeast,
    Leaf,
    PolicyKeyDocument,
    all_of,
    any_of,
    at_least,
    compile_policy,
    default_factor_entropy,
    enumerate_allowed,
    estimate_crack_time,
    leaf,
    policy_derive,
    policy_entropy,
)
from .shamir import Share, shamir_combine, shamir_recover_share, shamir_split
from .sources import (
    ClockSource,
    FixedClock,
    RandomSource,
    SeededRandomSource,
    SystemClock,
    SystemRandomSource,
)
from .threshold import (
    SecretHandle,
    ThresholdFactorEntry,
    ThresholdKeyPolicy,
    reconstitute,
    threshold_derive,
    threshold_setup,
)

__version__ = "0.1.0"
