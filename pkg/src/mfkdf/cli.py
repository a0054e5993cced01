"""Command-line front end: set up vaults, derive keys, recover factors,
audit entropy, and benchmark.

Exit codes: 0 success, 2 malformed policy or configuration, 3 unsatisfiable
factor set or exhausted TOTP window, 4 filesystem failure.
"""

from __future__ import annotations

import functools
import json
import statistics
import sys
import time
from itertools import combinations
from pathlib import Path

import click

from . import core, threshold
from .errors import (
    ConfigError,
    FormatError,
    MfkdfError,
    PolicyMismatchError,
    StorageError,
    WindowExhaustedError,
)
from .factors import (
    ChannelSimulator,
    FactorKind,
    StackParams,
    factor_derive,
    factor_setup,
    hmacsha1_response,
    hotp,
    otpauth_uri,
    random_uuid,
)
from .kdf import KdfConfig, hkdf
from .persistence import PolicyDocument, atomic_update, parse_policy, serialize_policy
from .policy import (
    PolicyKeyDocument,
    compile_policy,
    default_factor_entropy,
    enumerate_allowed,
    estimate_crack_time,
    format_duration,
    policy_derive,
    selected_ids,
    validate_expr,
)
from .persistence import _expr_from_obj  # config files share the expression syntax
from .sources import FixedClock, SeededRandomSource, SystemClock, SystemRandomSource
from .threshold import reconstitute as threshold_reconstitute

VERIFY_CONTEXT = b"mfkdf:verify"
DETERMINISTIC_CLOCK_DEFAULT = 1_700_000_000

EXIT_CONFIG = 2
EXIT_UNSATISFIABLE = 3
EXIT_STORAGE = 4

_GENERATED_KEY_KINDS = (FactorKind.HOTP, FactorKind.TOTP)


def _exits(func):
    """Map library errors onto the documented exit codes."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (PolicyMismatchError, WindowExhaustedError) as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(EXIT_UNSATISFIABLE)
        except (StorageError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(EXIT_STORAGE)
        except MfkdfError as exc:
            click.echo(f"error: {exc}", err=True)
            raise SystemExit(EXIT_CONFIG)

    return wrapper


@click.group()
def cli():
    """Derive encryption keys from combinations of authentication factors."""


def main():
    cli()


# -- shared helpers -----------------------------------------------------------

def _sources(deterministic, test_vault, clock_at):
    if deterministic is not None:
        if not test_vault:
            raise ConfigError("--deterministic is for reproducible tests only; "
                              "pass --test-vault to confirm this is not a production vault")
        rng = SeededRandomSource(deterministic)
        clock = FixedClock(clock_at if clock_at is not None else DETERMINISTIC_CLOCK_DEFAULT)
    else:
        rng = SystemRandomSource()
        clock = FixedClock(clock_at) if clock_at is not None else SystemClock()
    return rng, clock


def _parse_kv(pairs, what):
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"{what} must look like id=value, got {pair!r}")
        fid, value = pair.split("=", 1)
        if fid in out:
            raise ConfigError(f"duplicate {what} for {fid!r}")
        out[fid] = value
    return out


def _load_config(path):
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise StorageError(f"{path}: {exc}") from exc
    try:
        cfg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(cfg, dict) or not isinstance(cfg.get("factors"), dict) or not cfg["factors"]:
        raise ConfigError(f"{path}: config must contain a non-empty 'factors' object")
    return cfg


def _load_document(path):
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise StorageError(f"{path}: {exc}") from exc
    return parse_policy(raw)


def _kdf_from_config(cfg):
    key_bits = cfg.get("key_bits", 256)
    kdf_obj = dict(cfg.get("kdf") or {"algorithm": "argon2id"})
    algorithm = kdf_obj.pop("algorithm", "argon2id")
    defaults = {
        "argon2id": KdfConfig.argon2id,
        "pbkdf2-sha256": KdfConfig.pbkdf2,
        "hkdf-sha256": KdfConfig.fast,
    }.get(algorithm)
    if defaults is None:
        raise ConfigError(f"unknown KDF algorithm {algorithm!r}")
    try:
        return defaults(key_bits, **{k: v for k, v in kdf_obj.items() if v is not None})
    except TypeError as exc:
        raise ConfigError(f"bad kdf options for {algorithm!r}: {exc}") from exc


def _witness_from_text(kind, text, digits=None):
    """Convert CLI text to the witness type a factor expects."""
    kind = FactorKind(kind)
    if kind in (FactorKind.PASSWORD, FactorKind.QUESTION, FactorKind.UUID):
        return text
    if kind in (FactorKind.HOTP, FactorKind.TOTP, FactorKind.OOBA):
        try:
            code = int(text, 10)
        except ValueError:
            raise FormatError(f"expected a numeric code, got {text!r}") from None
        return code
    if kind in (FactorKind.HMACSHA1, FactorKind.DEVICE):
        try:
            return bytes.fromhex(text)
        except ValueError:
            raise FormatError(f"expected hex, got {text!r}") from None
    raise ConfigError(f"cannot accept a witness for factor kind {kind.value!r}")


def _leaf_info(policy, info=None):
    """id -> (kind, params) for every non-stack factor, depth-first."""
    if info is None:
        info = {}
    root = policy.root if isinstance(policy, PolicyKeyDocument) else policy
    for entry in root.factors:
        if isinstance(entry.params, StackParams):
            _leaf_info(entry.params.policy, info)
        elif entry.id not in info:
            info[entry.id] = (entry.kind, entry.params)
    return info


def _emit_key(key, key_out):
    if key_out == "hex":
        click.echo(key.hex())
    else:
        Path(key_out).write_text(key.hex() + "\n")
        click.echo(f"key written to {key_out}", err=True)


def _check_value(key):
    return hkdf(key, b"", VERIFY_CONTEXT, 256)


def _channel_sim_path(policy_path):
    return Path(str(policy_path) + ".channel.pem")


# -- setup --------------------------------------------------------------------

@cli.command("setup")
@click.option("--config", "config_path", required=True, type=click.Path(),
              help="JSON config naming factor kinds and the policy shape.")
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Policy file to create.")
@click.option("--key-out", default="hex", show_default=True,
              help="'hex' prints the key once; anything else is a file path.")
@click.option("--factor", "factor_values", multiple=True, metavar="ID=VALUE",
              help="Provide a factor secret non-interactively.")
@click.option("--verify", "store_check", is_flag=True,
              help="Store a key check value. Enables wrong-witness detection at "
                   "derive time, at the cost of an offline whole-key test oracle.")
@click.option("--deterministic", type=int, default=None, metavar="SEED",
              help="Seeded RNG and fixed clock; test use only.")
@click.option("--test-vault", is_flag=True, help="Marks the output as a test vault.")
@click.option("--clock", "clock_at", type=float, default=None,
              help="Fix the current UNIX time (for tests).")
@_exits
def cmd_setup(config_path, out_path, key_out, factor_values, store_check,
              deterministic, test_vault, clock_at):
    """Establish a key and write its public policy file."""
    rng, clock = _sources(deterministic, test_vault, clock_at)
    cfg = _load_config(config_path)
    provided = _parse_kv(factor_values, "--factor")
    kdf = _kdf_from_config(cfg)

    instances = {}
    for fid, fcfg in cfg["factors"].items():
        if not isinstance(fcfg, dict) or "kind" not in fcfg:
            raise ConfigError(f"factor {fid!r}: config must be an object with a 'kind'")
        instances[fid] = _setup_factor_from_config(
            fid, fcfg, provided.get(fid), rng, clock, out_path)

    if "policy" in cfg:
        expr = _expr_from_obj(cfg["policy"], "policy")
        validate_expr(expr, set(instances))
        derived = compile_policy(expr, instances, kdf=kdf, rng=rng)
    elif "threshold" in cfg:
        t = cfg["threshold"]
        if not isinstance(t, int) or isinstance(t, bool):
            raise ConfigError("threshold must be an integer")
        derived = threshold.threshold_setup(list(instances.values()), t, kdf=kdf, rng=rng)
    else:
        derived = core.mfkdf_setup(list(instances.values()), kdf=kdf, rng=rng)

    check = _check_value(derived.key) if store_check else None
    atomic_update(out_path, PolicyDocument(derived.policy, check))
    click.echo(f"policy written to {out_path}", err=True)
    _emit_key(derived.key, key_out)


def _setup_factor_from_config(fid, fcfg, provided, rng, clock, out_path):
    """Resolve secrets (prompted, provided, or generated) and build the factor."""
    kind = FactorKind(fcfg["kind"])
    opts = {k: v for k, v in fcfg.items() if k != "kind"}

    if kind in (FactorKind.PASSWORD, FactorKind.QUESTION):
        secret = provided
        if secret is None:
            secret = click.prompt(f"secret for {fid!r} ({kind.value})", hide_input=True)
        opts["secret"] = secret
    elif kind is FactorKind.UUID:
        value = provided
        if value is None:
            value = random_uuid(rng)
            click.echo(f"recovery code for {fid!r}: {value}", err=True)
        opts["value"] = value
    elif kind is FactorKind.DEVICE:
        if provided is not None:
            opts["secret"] = bytes.fromhex(provided)
        else:
            secret = rng.bytes(32)
            opts["secret"] = secret
            click.echo(f"device secret for {fid!r} (persist on the device): {secret.hex()}", err=True)
    elif kind in _GENERATED_KEY_KINDS:
        key = bytes.fromhex(provided) if provided is not None else rng.bytes(20)
        opts["key"] = key
        uri = otpauth_uri(kind, key, fid, digits=opts.get("digits", 6))
        click.echo(f"enroll {fid!r} in an authenticator app: {uri}", err=True)
    elif kind is FactorKind.HMACSHA1:
        if provided is not None:
            opts["key"] = bytes.fromhex(provided)
        else:
            key = rng.bytes(20)
            opts["key"] = key
            click.echo(f"program this key into the {fid!r} token: {key.hex()}", err=True)
    elif kind is FactorKind.OOBA:
        pem = opts.pop("public_key_pem", None)
        if pem is not None:
            from cryptography.hazmat.primitives import serialization
            pub = serialization.load_pem_public_key(pem.encode())
            opts["public_key"] = pub.public_bytes(
                serialization.Encoding.DER, serialization.PublicFormat.SubjectPublicKeyInfo)
        else:
            sim = ChannelSimulator.create()
            sim_path = _channel_sim_path(out_path)
            sim_path.write_bytes(sim.private_pem())
            opts["public_key"] = sim.public_der()
            click.echo(f"channel simulator key for {fid!r} written to {sim_path} "
                       "(test use only; a real deployment uses the recipient's key)", err=True)
    elif kind is FactorKind.STACK:
        raise ConfigError("stack factors are built from the 'policy' tree, not configured directly")

    return factor_setup(kind, fid, opts, rng=rng, clock=clock)


# -- derive -------------------------------------------------------------------

@cli.command("derive")
@click.option("--policy", "policy_path", required=True, type=click.Path())
@click.option("--witness", "witness_values", multiple=True, metavar="ID=VALUE")
@click.option("--key-out", default="hex", show_default=True)
@click.option("--verify", "do_verify", is_flag=True,
              help="Compare against the stored check value; exit 3 on mismatch "
                   "instead of emitting a wrong key.")
@click.option("--no-input", is_flag=True, help="Never prompt; rely on --witness only.")
@click.option("--deterministic", type=int, default=None, metavar="SEED")
@click.option("--test-vault", is_flag=True)
@click.option("--clock", "clock_at", type=float, default=None)
@_exits
def cmd_derive(policy_path, witness_values, key_out, do_verify, no_input,
               deterministic, test_vault, clock_at):
    """Derive the key from a satisfying set of factor witnesses."""
    rng, clock = _sources(deterministic, test_vault, clock_at)
    document = _load_document(policy_path)
    if do_verify and document.check is None:
        raise ConfigError("policy was not set up with --verify; no check value stored")

    info = _leaf_info(document.policy)
    provided = _parse_kv(witness_values, "--witness")
    unknown = set(provided) - set(info)
    if unknown:
        raise PolicyMismatchError(f"unknown factor id(s): {sorted(unknown)}")

    needed = _plan_factors(document.policy, set(provided), info,
                           interactive=not no_input and sys.stdin.isatty())
    witnesses = {}
    for fid in needed:
        kind, params = info[fid]
        if fid in provided:
            text = provided[fid]
        else:
            _show_factor_hints(fid, kind, params, policy_path)
            text = click.prompt(f"witness for {fid!r} ({kind.value})", hide_input=True)
        witnesses[fid] = _witness_from_text(kind, text)

    derived = _derive_document(document.policy, witnesses, info, clock, rng)

    if do_verify and _check_value(derived.key) != document.check:
        click.echo("error: derived key failed verification (wrong witness?)", err=True)
        raise SystemExit(EXIT_UNSATISFIABLE)

    atomic_update(policy_path, PolicyDocument(derived.policy, document.check))
    _emit_key(derived.key, key_out)


def _plan_factors(policy, provided, info, *, interactive):
    """Which factor ids this derivation will consume."""
    if isinstance(policy, PolicyKeyDocument):
        have = frozenset(info) if interactive else frozenset(provided)
        chosen = selected_ids(policy.expr, frozenset(provided)) or selected_ids(policy.expr, have)
        if chosen is None:
            raise PolicyMismatchError(
                f"witnesses {sorted(provided)} cannot satisfy the policy")
        return [fid for fid in info if fid in chosen]  # stable document order
    ids = list(policy.factor_ids)
    if isinstance(policy, threshold.ThresholdKeyPolicy):
        usable = [fid for fid in ids if fid in provided]
        if len(usable) >= policy.threshold:
            return usable
        if not interactive:
            raise PolicyMismatchError(
                f"{policy.threshold} witnesses required, got {len(usable)}")
        extra = [fid for fid in ids if fid not in provided]
        return usable + extra[: policy.threshold - len(usable)]
    missing = [fid for fid in ids if fid not in provided]
    if missing and not interactive:
        raise PolicyMismatchError(f"missing witnesses for: {missing}")
    return ids


def _show_factor_hints(fid, kind, params, policy_path):
    """Interactive aids: token challenges and simulated channel deliveries."""
    if kind is FactorKind.HMACSHA1:
        click.echo(f"challenge for {fid!r}: {params.challenge.hex()}", err=True)
    elif kind is FactorKind.OOBA:
        sim_path = _channel_sim_path(policy_path)
        if sim_path.exists():
            sim = ChannelSimulator.from_pem(sim_path.read_bytes())
            code = sim.read_code(params.ct)
            click.echo(f"[channel simulator] code for {fid!r}: "
                       f"{str(code).zfill(params.digits)}", err=True)


def _derive_document(policy, witnesses, info, clock, rng):
    if isinstance(policy, PolicyKeyDocument):
        return policy_derive(witnesses, policy, clock=clock, rng=rng)
    instances = []
    for entry in policy.factors:
        if entry.id in witnesses:
            instances.append(factor_derive(entry.kind, entry.id, witnesses[entry.id],
                                           entry.params, rng=rng, clock=clock))
    if isinstance(policy, threshold.ThresholdKeyPolicy):
        return threshold.threshold_derive(instances, policy)
    return core.mfkdf_derive(instances, policy)


# -- reconstitute ---------------------------------------------------------------

@cli.command("reconstitute")
@click.option("--policy", "policy_path", required=True, type=click.Path())
@click.option("--replace", "replace_id", required=True, metavar="ID",
              help="Factor to replace (typically the forgotten one).")
@click.option("--with", "new_kind", required=True, metavar="KIND",
              help="Kind of the replacement factor.")
@click.option("--new-id", default=None, help="Id for the replacement (default: same id).")
@click.option("--factor", "factor_values", multiple=True, metavar="ID=VALUE",
              help="Secret for the replacement factor.")
@click.option("--witness", "witness_values", multiple=True, metavar="ID=VALUE",
              help="Witnesses for a qualifying derivation with the remaining factors.")
@click.option("--deterministic", type=int, default=None, metavar="SEED")
@click.option("--test-vault", is_flag=True)
@click.option("--clock", "clock_at", type=float, default=None)
@_exits
def cmd_reconstitute(policy_path, replace_id, new_kind, new_id, factor_values,
                     witness_values, deterministic, test_vault, clock_at):
    """Replace a factor without changing the key, after a qualifying derive."""
    rng, clock = _sources(deterministic, test_vault, clock_at)
    document = _load_document(policy_path)
    if not isinstance(document.policy, threshold.ThresholdKeyPolicy):
        raise ConfigError("reconstitution requires a threshold policy file")
    policy = document.policy
    if replace_id not in policy.factor_ids:
        raise ConfigError(f"cannot replace unknown factor {replace_id!r}")

    info = _leaf_info(policy)
    provided = _parse_kv(witness_values, "--witness")
    witnesses = {fid: _witness_from_text(info[fid][0], text)
                 for fid, text in provided.items() if fid in info}
    if len(witnesses) < policy.threshold:
        raise PolicyMismatchError(
            f"{policy.threshold} witnesses required to reconstitute, got {len(witnesses)}")

    session = _derive_document(policy, witnesses, info, clock, rng)
    new_id = new_id or replace_id
    new_values = _parse_kv(factor_values, "--factor")
    new_inst = _setup_factor_from_config(
        new_id, {"kind": new_kind}, new_values.get(new_id), rng, clock, policy_path)

    new_policy = threshold_reconstitute(
        session.policy, session, replace_factors={replace_id: new_inst}, rng=rng)
    session.material.release()
    atomic_update(policy_path, PolicyDocument(new_policy, document.check))
    click.echo(f"replaced {replace_id!r} with {new_id!r} ({new_kind}); key unchanged", err=True)


# -- entropy ------------------------------------------------------------------

@cli.command("entropy")
@click.option("--policy", "policy_path", required=True, type=click.Path())
@click.option("--rate", default=1e12, show_default=True,
              help="Attacker guess rate in hashes/second.")
@click.option("--kdf-cost", default=1e5, show_default=True,
              help="Hashes per key-derivation guess.")
@click.option("--assume", "assumed", multiple=True, metavar="ID=BITS",
              help="Override the entropy estimate for a factor.")
@_exits
def cmd_entropy(policy_path, rate, kdf_cost, assumed, **_ignored):
    """Per-combination entropy and full-keyspace crack-time table."""
    document = _load_document(policy_path)
    policy = document.policy
    info = _leaf_info(policy)

    bits_by_id = {}
    for fid, (kind, params) in info.items():
        digits = getattr(params, "digits", 6)
        bits_by_id[fid] = default_factor_entropy(kind, digits)
    for fid, text in _parse_kv(assumed, "--assume").items():
        if fid not in bits_by_id:
            raise ConfigError(f"--assume names unknown factor {fid!r}")
        bits_by_id[fid] = float(text)

    combos = _combinations_for(policy)
    click.echo(f"{'combination':40s} {'entropy':>14s}  crack time (rate {rate:g}/s, cost {kdf_cost:g})")
    weakest = None
    for combo in sorted(combos, key=lambda c: (len(c), sorted(c))):
        bits = sum(bits_by_id[fid] for fid in combo)
        weakest = bits if weakest is None else min(weakest, bits)
        label = "+".join(sorted(combo))
        seconds = estimate_crack_time(bits, rate, kdf_cost)
        click.echo(f"{label:40s} {round(bits):>6d} bits ({bits:6.2f})  {format_duration(seconds)}")
    click.echo(f"{'weakest combination':40s} {round(weakest):>6d} bits ({weakest:6.2f})  "
               f"{format_duration(estimate_crack_time(weakest, rate, kdf_cost))}")


def _combinations_for(policy):
    if isinstance(policy, PolicyKeyDocument):
        return enumerate_allowed(policy.expr)
    ids = list(policy.factor_ids)
    if isinstance(policy, threshold.ThresholdKeyPolicy):
        return [frozenset(c) for c in combinations(ids, policy.threshold)]
    return [frozenset(ids)]


# -- bench --------------------------------------------------------------------

REFERENCE_MS = {
    "3-of-3 setup": 3.84,
    "3-of-3 derive": 10.52,
    "2-of-3 setup": 8.83,
    "2-of-3 derive": 11.90,
}


@cli.command("bench")
@click.option("--profile", type=click.Choice(["fast", "paper"]), default="fast",
              show_default=True, help="'paper' runs the full N=100 loops.")
@_exits
def cmd_bench(profile):
    """Benchmark setup/derive timings against the published reference numbers."""
    from .factors import (
        device_setup,
        hmacsha1_setup,
        hotp_setup,
        password_setup,
        question_setup,
        stack_setup,
        totp_setup,
        uuid_setup,
    )
    from .packing import packed_size

    n_iter = 100 if profile == "paper" else 20
    rng = SeededRandomSource(1)
    clock = FixedClock(DETERMINISTIC_CLOCK_DEFAULT)
    kdf = KdfConfig.fast()
    key20 = bytes(range(20))
    uuid_text = random_uuid(rng)

    def triple():
        return [password_setup("pw", "benchmark-password"),
                hotp_setup("otp", key20, rng=rng),
                uuid_setup("rc", uuid_text)]

    def time_loop(fn, n=n_iter):
        samples = []
        for _ in range(n):
            start = time.perf_counter()
            fn()
            samples.append((time.perf_counter() - start) * 1000)
        return statistics.fmean(samples)

    click.echo(f"profile={profile}, N={n_iter}, fast KDF (reference values in parentheses)")

    setup_ms = time_loop(lambda: core.mfkdf_setup(triple(), kdf=kdf, rng=rng))
    _report("3-of-3 setup", setup_ms)

    state = {"dk": core.mfkdf_setup(triple(), kdf=kdf, rng=rng), "ctr": 1}

    def derive_3of3():
        policy = state["dk"].policy
        witnesses = {"pw": "benchmark-password", "otp": hotp(key20, state["ctr"]), "rc": uuid_text}
        instances = [factor_derive(e.kind, e.id, witnesses[e.id], e.params, rng=rng, clock=clock)
                     for e in policy.factors]
        state["dk"] = core.mfkdf_derive(instances, policy)
        state["ctr"] += 1

    _report("3-of-3 derive", time_loop(derive_3of3))

    _report("2-of-3 setup", time_loop(
        lambda: threshold.threshold_setup(triple(), 2, kdf=kdf, rng=rng)))

    tstate = {"dk": threshold.threshold_setup(triple(), 2, kdf=kdf, rng=rng)}

    def derive_2of3():
        policy = tstate["dk"].policy
        witnesses = {"pw": "benchmark-password", "rc": uuid_text}
        instances = [factor_derive(e.kind, e.id, witnesses[e.id], e.params, rng=rng, clock=clock)
                     for e in policy.factors if e.id in witnesses]
        tstate["dk"] = threshold.threshold_derive(instances, policy)

    _report("2-of-3 derive", time_loop(derive_2of3))

    click.echo("\nper-factor setup/derive means (ms):")
    sim = ChannelSimulator.create()
    factory = {
        "password": lambda: password_setup("f", "benchmark-password"),
        "question": lambda: question_setup("f", "Fluffy the cat"),
        "uuid": lambda: uuid_setup("f", uuid_text),
        "persisted-device": lambda: device_setup("f", rng=rng),
        "hotp": lambda: hotp_setup("f", key20, rng=rng),
        "hmacsha1": lambda: hmacsha1_setup("f", key20, rng=rng),
        "ooba": lambda: ooba_bench_setup(sim, rng),
        "stack": lambda: stack_setup("f", [password_setup("in", "x")], rng=rng),
    }
    for name, make in factory.items():
        s_ms = time_loop(make, n=min(n_iter, 20))
        d_ms = time_loop(_factor_derive_loop(make, rng, clock, sim), n=min(n_iter, 20))
        click.echo(f"  {name:18s} setup {s_ms:8.3f}   derive {d_ms:8.3f}")

    click.echo("\nTOTP window profile:")
    for window in (2920, 87600):
        reps = 1 if window == 87600 or profile == "fast" else 3
        start = time.perf_counter()
        for _ in range(reps):
            inst = totp_setup("f", key20, window=window, rng=rng, clock=clock)
            params = inst.produce_params(b"\x00" * 32)
        ms = (time.perf_counter() - start) * 1000 / reps
        size = packed_size(window, 6)
        assert len(params.offsets) == size
        click.echo(f"  window={window:6d}  setup {ms:9.1f} ms   storage {size:,} bytes")


def ooba_bench_setup(sim, rng):
    from .factors import ooba_setup

    return ooba_setup("f", sim.public_der(), rng=rng)


def _factor_derive_loop(make, rng, clock, sim):
    """Build a closure deriving one factor generation from a fresh setup."""
    inst = make()
    params = inst.produce_params(b"\x00" * 32)
    kind = inst.kind
    key20 = bytes(range(20))
    uuid_text = None
    if kind is FactorKind.UUID:
        uuid_text = "unused"

    def run():
        if kind in (FactorKind.PASSWORD, FactorKind.QUESTION):
            witness = "benchmark-password" if kind is FactorKind.PASSWORD else "Fluffy the cat"
        elif kind is FactorKind.UUID:
            witness = random_uuid(SeededRandomSource(2))
        elif kind is FactorKind.DEVICE:
            witness = inst.material.data
        elif kind is FactorKind.HOTP:
            witness = hotp(key20, params.counter)
        elif kind is FactorKind.HMACSHA1:
            witness = hmacsha1_response(inst.material.data, params.challenge)
        elif kind is FactorKind.OOBA:
            witness = sim.read_code(params.ct)
        elif kind is FactorKind.STACK:
            witness = {"in": "x"}
        else:
            raise AssertionError(kind)
        factor_derive(kind, inst.id, witness, params, rng=rng, clock=clock)

    return run


def _report(label, measured_ms):
    ref = REFERENCE_MS.get(label)
    suffix = f"  (reference {ref:.2f} ms)" if ref else ""
    click.echo(f"{label:14s} mean {measured_ms:8.3f} ms{suffix}")


if __name__ == "__main__":
    main()
