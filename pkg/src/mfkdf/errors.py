"""Exception types shared across the package.

A deliberate rule applies everywhere: an *incorrect but well-formed* witness
never raises. Wrong guesses silently produce a wrong key, so nothing in this
hierarchy can be used as a per-factor test oracle. Errors are reserved for
malformed inputs, bad configuration, and unsatisfiable policies.
"""


class MfkdfError(Exception):
    """Base class for all library errors."""


class ConfigError(MfkdfError):
    """Invalid setup configuration: bad sizes, duplicate ids, bad thresholds."""


class RangeError(MfkdfError):
    """Numeric operand outside its permitted range."""


class LengthError(MfkdfError):
    """Requested or supplied length outside the supported range."""


class ParameterError(MfkdfError):
    """Invalid secret-sharing parameters or share sets."""


class FormatError(MfkdfError):
    """Malformed serialized data, envelope, or factor parameters."""


class VersionError(FormatError):
    """Unknown policy document schema version."""


class PolicyMismatchError(MfkdfError):
    """The provided factor set cannot satisfy the stored policy."""


class WindowExhaustedError(MfkdfError):
    """Stored time-based OTP offsets no longer cover the current time."""


class StorageError(MfkdfError):
    """Filesystem failure while persisting a policy document."""
