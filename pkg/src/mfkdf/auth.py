"""Sub-key establishment and challenge-response authentication.

A derived key does double duty: it protects data and it proves that the user
presented a valid factor combination. Handing the key itself to a server
would break the first use, so two independent sub-keys are split off — the
verifier only ever sees ``auth_key``, and compromising it reveals nothing
about ``data_key`` or the root key.

Authentication is symmetric unilateral challenge-response: the verifier
issues a single-use random nonce, the prover MACs it together with its
identity, the verifier recomputes and compares in constant time.
"""

from __future__ import annotations

import hashlib
import hmac
import threading
from dataclasses import dataclass
from enum import Enum

from .kdf import hkdf
from .sources import ClockSource, RandomSource, SystemClock, SystemRandomSource

SUBKEY_BITS = 256
DATA_CONTEXT = b"mfkdf:data"
AUTH_CONTEXT = b"mfkdf:auth"
PROOF_CONTEXT = b"mfkdf:unilateral"
CHALLENGE_TTL_DEFAULT = 120.0  # seconds
NONCE_LEN = 32


@dataclass(frozen=True)
class SubKeys:
    data_key: bytes
    auth_key: bytes


def split_subkeys(key: bytes) -> SubKeys:
    """Derive the data/authentication sub-key pair from a derived key."""
    return SubKeys(
        data_key=hkdf(key, b"", DATA_CONTEXT, SUBKEY_BITS),
        auth_key=hkdf(key, b"", AUTH_CONTEXT, SUBKEY_BITS),
    )


@dataclass(frozen=True)
class Challenge:
    nonce: bytes
    issued_at: float


def prove(auth_key: bytes, challenge: Challenge, identity: bytes) -> bytes:
    """Prover side: MAC over nonce, identity, and the protocol context."""
    return hmac.new(auth_key, challenge.nonce + identity + PROOF_CONTEXT,
                    hashlib.sha256).digest()


class VerifyResult(Enum):
    ACCEPTED = "accepted"
    REJECTED_PROOF = "rejected: proof mismatch"
    REJECTED_REPLAY = "rejected: nonce unknown or already used"
    REJECTED_EXPIRED = "rejected: challenge expired"


class Verifier:
    """Holds only the auth sub-key plus outstanding nonces.

    Each challenge is consumed by its first verification attempt, whatever
    the outcome, so a captured proof cannot be replayed. The nonce table is
    guarded by a lock; concurrent attempts race to a single atomic take.
    """

    def __init__(self, auth_key: bytes, *, rng: RandomSource | None = None,
                 clock: ClockSource | None = None, ttl: float = CHALLENGE_TTL_DEFAULT):
        self._auth_key = auth_key
        self._rng = rng or SystemRandomSource()
        self._clock = clock or SystemClock()
        self._ttl = ttl
        self._pending: dict[bytes, float] = {}
        self._lock = threading.Lock()

    def issue_challenge(self) -> Challenge:
        nonce = self._rng.bytes(NONCE_LEN)
        issued = self._clock.now()
        with self._lock:
            self._pending[nonce] = issued
        return Challenge(nonce, issued)

    def verify(self, challenge: Challenge, identity: bytes, proof: bytes) -> VerifyResult:
        with self._lock:
            issued = self._pending.pop(challenge.nonce, None)
        if issued is None:
            return VerifyResult.REJECTED_REPLAY
        if self._clock.now() - issued > self._ttl:
            return VerifyResult.REJECTED_EXPIRED
        expected = prove(self._auth_key, Challenge(challenge.nonce, issued), identity)
        if not hmac.compare_digest(expected, proof):
            return VerifyResult.REJECTED_PROOF
        return VerifyResult.ACCEPTED
