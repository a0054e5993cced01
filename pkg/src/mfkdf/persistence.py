"""Canonical serialization of key-policy documents and atomic file updates.

Documents hold only public parameters — salts, offsets, pads, ciphertexts —
and are safe to store anywhere, including public storage. The wire form is
canonical JSON: sorted keys, two-space indent, binary fields base64url
without padding, one trailing newline. Parsing then re-serializing any
document is byte-identical.
"""

from __future__ import annotations

import base64
import binascii
import json
import os
import shutil
from dataclasses import dataclass
from pathlib import Path

from .core import CoreKeyPolicy, FactorEntry
from .errors import FormatError, StorageError, VersionError
from .factors.base import (
    EmptyParams,
    FactorKind,
    FactorParams,
    HmacSha1Params,
    HotpParams,
    OobaParams,
    StackParams,
    TotpParams,
)
from .kdf import KdfConfig
from .policy import AllOf, AnyOf, AtLeast, Leaf, PolicyExpr, PolicyKeyDocument
from .threshold import ThresholdFactorEntry, ThresholdKeyPolicy

SCHEMA_VERSION = "mfkdf/v1"


@dataclass(frozen=True)
class PolicyDocument:
    """Top-level persisted unit: a key policy plus the optional opt-in key
    check value (itself derived, never secret material)."""

    policy: "CoreKeyPolicy | ThresholdKeyPolicy | PolicyKeyDocument"
    check: bytes | None = None


def _b64(data: bytes) -> str:
    return base64.urlsafe_b64encode(data).decode().rstrip("=")


def _unb64(text: str, path: str) -> bytes:
    if not isinstance(text, str):
        raise FormatError(f"{path}: expected base64url text")
    pad = "=" * (-len(text) % 4)
    try:
        raw = base64.urlsafe_b64decode(text + pad)
    except (binascii.Error, ValueError) as exc:
        raise FormatError(f"{path}: invalid base64url ({exc})") from exc
    if _b64(raw) != text:
        raise FormatError(f"{path}: non-canonical base64url encoding")
    return raw


def _need(obj: dict, keys: set[str], path: str) -> None:
    if not isinstance(obj, dict):
        raise FormatError(f"{path}: expected an object")
    missing = keys - set(obj)
    extra = set(obj) - keys
    if missing:
        raise FormatError(f"{path}: missing field(s) {sorted(missing)}")
    if extra:
        raise FormatError(f"{path}: unexpected field(s) {sorted(extra)}")


def _int(obj: dict, key: str, path: str, minimum: int = 0) -> int:
    value = obj.get(key)
    if not isinstance(value, int) or isinstance(value, bool):
        raise FormatError(f"{path}.{key}: expected an integer")
    if value < minimum:
        raise FormatError(f"{path}.{key}: must be at least {minimum}, got {value}")
    return value


# -- object building ---------------------------------------------------------

def _kdf_to_obj(cfg: KdfConfig) -> dict:
    return {
        "algorithm": cfg.algorithm,
        "key_bits": cfg.key_bits,
        "iterations": cfg.iterations,
        "memory_kib": cfg.memory_kib,
        "parallelism": cfg.parallelism,
    }


def _kdf_from_obj(obj: dict, path: str) -> KdfConfig:
    _need(obj, {"algorithm", "key_bits", "iterations", "memory_kib", "parallelism"}, path)
    if not isinstance(obj["algorithm"], str):
        raise FormatError(f"{path}.algorithm: expected text")
    try:
        return KdfConfig(obj["algorithm"], _int(obj, "key_bits", path, 1),
                         _int(obj, "iterations", path, 1),
                         _int(obj, "memory_kib", path, 1),
                         _int(obj, "parallelism", path, 1))
    except Exception as exc:
        raise FormatError(f"{path}: {exc}") from exc


def _params_to_obj(params: FactorParams) -> dict:
    if isinstance(params, EmptyParams):
        return {}
    if isinstance(params, HotpParams):
        return {"digits": params.digits, "counter": params.counter,
                "offset": params.offset, "ct": _b64(params.ct)}
    if isinstance(params, TotpParams):
        return {"digits": params.digits, "window": params.window,
                "counter": params.counter, "offsets": _b64(params.offsets),
                "ct": _b64(params.ct)}
    if isinstance(params, HmacSha1Params):
        return {"challenge": _b64(params.challenge), "pad": _b64(params.pad)}
    if isinstance(params, OobaParams):
        return {"digits": params.digits, "public_key": _b64(params.public_key),
                "offset": params.offset, "ct": _b64(params.ct)}
    if isinstance(params, StackParams):
        return {"policy": _policy_to_obj(params.policy)}
    raise FormatError(f"cannot serialize params of type {type(params).__name__}")


def _params_from_obj(kind: FactorKind, obj: dict, path: str) -> FactorParams:
    if kind in (FactorKind.PASSWORD, FactorKind.QUESTION, FactorKind.UUID, FactorKind.DEVICE):
        _need(obj, set(), path)
        return EmptyParams()
    if kind is FactorKind.HOTP:
        _need(obj, {"digits", "counter", "offset", "ct"}, path)
        digits = _int(obj, "digits", path, 1)
        offset = _int(obj, "offset", path)
        if offset >= 10 ** digits:
            raise FormatError(f"{path}.offset: {offset} outside [0, 10^{digits})")
        return HotpParams(digits, _int(obj, "counter", path), offset,
                          _unb64(obj["ct"], f"{path}.ct"))
    if kind is FactorKind.TOTP:
        _need(obj, {"digits", "window", "counter", "offsets", "ct"}, path)
        return TotpParams(_int(obj, "digits", path, 1), _int(obj, "window", path, 1),
                          _int(obj, "counter", path),
                          _unb64(obj["offsets"], f"{path}.offsets"),
                          _unb64(obj["ct"], f"{path}.ct"))
    if kind is FactorKind.HMACSHA1:
        _need(obj, {"challenge", "pad"}, path)
        challenge = _unb64(obj["challenge"], f"{path}.challenge")
        pad = _unb64(obj["pad"], f"{path}.pad")
        if len(challenge) != 20 or len(pad) != 20:
            raise FormatError(f"{path}: challenge and pad must be 160 bits")
        return HmacSha1Params(challenge, pad)
    if kind is FactorKind.OOBA:
        _need(obj, {"digits", "public_key", "offset", "ct"}, path)
        digits = _int(obj, "digits", path, 1)
        offset = _int(obj, "offset", path)
        if offset >= 10 ** digits:
            raise FormatError(f"{path}.offset: {offset} outside [0, 10^{digits})")
        return OobaParams(digits, _unb64(obj["public_key"], f"{path}.public_key"),
                          offset, _unb64(obj["ct"], f"{path}.ct"))
    if kind is FactorKind.STACK:
        _need(obj, {"policy"}, path)
        return StackParams(_policy_from_obj(obj["policy"], f"{path}.policy"))
    raise FormatError(f"{path}: unsupported factor kind {kind.value!r}")


def _entry_to_obj(entry: FactorEntry) -> dict:
    obj = {
        "id": entry.id,
        "kind": entry.kind.value,
        "generation": entry.generation,
        "params": _params_to_obj(entry.params),
    }
    if isinstance(entry, ThresholdFactorEntry):
        obj["share_index"] = entry.share_index
        obj["pad"] = _b64(entry.pad)
    return obj


def _entry_from_obj(obj: dict, path: str, threshold_entry: bool) -> FactorEntry:
    keys = {"id", "kind", "generation", "params"}
    if threshold_entry:
        keys |= {"share_index", "pad"}
    _need(obj, keys, path)
    if not isinstance(obj["id"], str) or not obj["id"]:
        raise FormatError(f"{path}.id: expected a non-empty string")
    try:
        kind = FactorKind(obj["kind"])
    except ValueError:
        raise FormatError(f"{path}.kind: unknown factor kind {obj['kind']!r}") from None
    generation = _int(obj, "generation", path)
    params = _params_from_obj(kind, obj["params"], f"{path}.params")
    if not threshold_entry:
        return FactorEntry(obj["id"], kind, generation, params)
    share_index = _int(obj, "share_index", path, 1)
    if share_index > 255:
        raise FormatError(f"{path}.share_index: {share_index} outside [1, 255]")
    return ThresholdFactorEntry(obj["id"], kind, generation, params,
                                share_index, _unb64(obj["pad"], f"{path}.pad"))


def _expr_to_obj(expr: PolicyExpr):
    if isinstance(expr, Leaf):
        return expr.factor
    if isinstance(expr, AllOf):
        return {"all": [_expr_to_obj(c) for c in expr.children]}
    if isinstance(expr, AnyOf):
        return {"any": [_expr_to_obj(c) for c in expr.children]}
    return {"atleast": {"threshold": expr.threshold,
                        "of": [_expr_to_obj(c) for c in expr.children]}}


def _expr_from_obj(obj, path: str) -> PolicyExpr:
    if isinstance(obj, str):
        if not obj:
            raise FormatError(f"{path}: factor name must be non-empty")
        return Leaf(obj)
    if not isinstance(obj, dict) or len(obj) != 1:
        raise FormatError(f"{path}: expected a factor name or a single-key node object")
    tag, value = next(iter(obj.items()))
    if tag in ("all", "any"):
        if not isinstance(value, list) or not value:
            raise FormatError(f"{path}.{tag}: expected a non-empty list")
        children = tuple(_expr_from_obj(c, f"{path}.{tag}[{i}]") for i, c in enumerate(value))
        return AllOf(children) if tag == "all" else AnyOf(children)
    if tag == "atleast":
        _need(value, {"threshold", "of"}, f"{path}.atleast")
        if not isinstance(value["of"], list) or not value["of"]:
            raise FormatError(f"{path}.atleast.of: expected a non-empty list")
        children = tuple(_expr_from_obj(c, f"{path}.atleast.of[{i}]")
                         for i, c in enumerate(value["of"]))
        return AtLeast(_int(value, "threshold", f"{path}.atleast", 1), children)
    raise FormatError(f"{path}: unknown policy node {tag!r}")


def _policy_to_obj(policy) -> dict:
    if isinstance(policy, ThresholdKeyPolicy):
        return {
            "kind": "threshold",
            "threshold": policy.threshold,
            "key_bits": policy.key_bits,
            "salt": _b64(policy.salt),
            "kdf": _kdf_to_obj(policy.kdf),
            "factors": [_entry_to_obj(e) for e in policy.factors],
        }
    if isinstance(policy, CoreKeyPolicy):
        return {
            "kind": "core",
            "key_bits": policy.key_bits,
            "salt": _b64(policy.salt),
            "kdf": _kdf_to_obj(policy.kdf),
            "factors": [_entry_to_obj(e) for e in policy.factors],
        }
    if isinstance(policy, PolicyKeyDocument):
        return {
            "kind": "policy-tree",
            "expr": _expr_to_obj(policy.expr),
            "root": _policy_to_obj(policy.root),
        }
    raise FormatError(f"cannot serialize policy of type {type(policy).__name__}")


def _policy_from_obj(obj: dict, path: str):
    if not isinstance(obj, dict):
        raise FormatError(f"{path}: expected an object")
    kind = obj.get("kind")
    if kind == "core" or kind == "threshold":
        keys = {"kind", "key_bits", "salt", "kdf", "factors"}
        if kind == "threshold":
            keys.add("threshold")
        _need(obj, keys, path)
        key_bits = _int(obj, "key_bits", path, 1)
        salt = _unb64(obj["salt"], f"{path}.salt")
        if len(salt) * 8 != key_bits:
            raise FormatError(f"{path}.salt: must be {key_bits} bits, got {len(salt) * 8}")
        kdf = _kdf_from_obj(obj["kdf"], f"{path}.kdf")
        if kdf.key_bits != key_bits:
            raise FormatError(f"{path}.kdf.key_bits: {kdf.key_bits} != key_bits {key_bits}")
        if not isinstance(obj["factors"], list) or not obj["factors"]:
            raise FormatError(f"{path}.factors: expected a non-empty list")
        entries = tuple(
            _entry_from_obj(e, f"{path}.factors[{i}]", kind == "threshold")
            for i, e in enumerate(obj["factors"])
        )
        ids = [e.id for e in entries]
        if len(set(ids)) != len(ids):
            raise FormatError(f"{path}.factors: duplicate factor ids")
        if kind == "core":
            return CoreKeyPolicy(key_bits, salt, kdf, entries)
        threshold = _int(obj, "threshold", path, 1)
        if threshold > len(entries):
            raise FormatError(f"{path}.threshold: {threshold} exceeds factor count {len(entries)}")
        indices = [e.share_index for e in entries]
        if len(set(indices)) != len(indices):
            raise FormatError(f"{path}.factors: duplicate share indices")
        for i, e in enumerate(entries):
            if len(e.pad) * 8 != key_bits:
                raise FormatError(f"{path}.factors[{i}].pad: must be {key_bits} bits")
        return ThresholdKeyPolicy(threshold, key_bits, salt, kdf, entries)
    if kind == "policy-tree":
        _need(obj, {"kind", "expr", "root"}, path)
        expr = _expr_from_obj(obj["expr"], f"{path}.expr")
        root = _policy_from_obj(obj["root"], f"{path}.root")
        if isinstance(root, PolicyKeyDocument):
            raise FormatError(f"{path}.root: policy trees cannot nest directly")
        return PolicyKeyDocument(expr, root)
    raise FormatError(f"{path}.kind: expected core, threshold, or policy-tree, got {kind!r}")


# -- public API ---------------------------------------------------------------

def serialize_policy(document) -> bytes:
    """Serialize a policy or :class:`PolicyDocument` to canonical JSON bytes."""
    if not isinstance(document, PolicyDocument):
        document = PolicyDocument(document)
    obj = {"version": SCHEMA_VERSION, **_policy_to_obj(document.policy)}
    if document.check is not None:
        obj["check"] = _b64(document.check)
    return (json.dumps(obj, sort_keys=True, indent=2) + "\n").encode()


def parse_policy(data: bytes) -> PolicyDocument:
    """Parse canonical JSON bytes back into a :class:`PolicyDocument`."""
    try:
        obj = json.loads(data.decode() if isinstance(data, (bytes, bytearray)) else data)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"document is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise FormatError("document root must be an object")
    version = obj.pop("version", None)
    if version != SCHEMA_VERSION:
        raise VersionError(f"unsupported document version {version!r}, expected {SCHEMA_VERSION!r}")
    check_text = obj.pop("check", None)
    check = None if check_text is None else _unb64(check_text, "check")
    return PolicyDocument(_policy_from_obj(obj, "$"), check)


BACKUP_SUFFIX = ".bak"


def atomic_update(path: str | Path, document) -> None:
    """Replace ``path`` with the serialized document, atomically.

    The previous generation (if any) is kept at ``<path>.bak`` so an
    interrupted OTP-factor update cannot strand the user between generations.
    On any failure the original file is left intact.
    """
    path = Path(path)
    data = document if isinstance(document, (bytes, bytearray)) else serialize_policy(document)
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        if path.exists():
            shutil.copy2(path, path.with_name(path.name + BACKUP_SUFFIX))
        os.replace(tmp, path)
    except OSError as exc:
        try:
            tmp.unlink(missing_ok=True)
        except OSError:
            pass
        raise StorageError(f"{path}: {exc}") from exc
