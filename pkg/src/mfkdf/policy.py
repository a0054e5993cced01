"""Policy trees: compile "who may derive this key" into stacked threshold keys.

An expression over named factors — all(...), any(...), at_least(t, ...) —
compiles recursively: all-nodes become n-of-n keys, any/at-least nodes become
threshold keys, and every non-leaf child is wrapped as a stacked key factor.
Only the root applies the slow KDF. The result enforces the policy
cryptographically: a factor subset derives the root key if and only if it
contains an allowed combination.

Also here: entropy accounting over a policy (the key is only as strong as the
weakest allowed combination) and full-keyspace crack-time estimation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from itertools import combinations
from typing import Mapping, Sequence, Union

from . import core, threshold
from .errors import ConfigError, PolicyMismatchError
from .factors import factor_derive
from .factors.base import FactorInstance, FactorKind, StackParams, Witness
from .kdf import KdfConfig
from .sources import ClockSource, RandomSource, SystemClock, SystemRandomSource

STACK_ID_PREFIX = "stack:"


@dataclass(frozen=True)
class Leaf:
    factor: str


@dataclass(frozen=True)
class AllOf:
    children: tuple["PolicyExpr", ...]


@dataclass(frozen=True)
class AnyOf:
    children: tuple["PolicyExpr", ...]


@dataclass(frozen=True)
class AtLeast:
    threshold: int
    children: tuple["PolicyExpr", ...]


PolicyExpr = Union[Leaf, AllOf, AnyOf, AtLeast]


def leaf(factor: str) -> Leaf:
    return Leaf(factor)


def all_of(*children: PolicyExpr | str) -> AllOf:
    return AllOf(tuple(_coerce(c) for c in children))


def any_of(*children: PolicyExpr | str) -> AnyOf:
    return AnyOf(tuple(_coerce(c) for c in children))


def at_least(threshold: int, *children: PolicyExpr | str) -> AtLeast:
    return AtLeast(threshold, tuple(_coerce(c) for c in children))


def _coerce(node: PolicyExpr | str) -> PolicyExpr:
    return Leaf(node) if isinstance(node, str) else node


def leaf_ids(expr: PolicyExpr) -> frozenset[str]:
    if isinstance(expr, Leaf):
        return frozenset((expr.factor,))
    out: set[str] = set()
    for child in expr.children:
        out |= leaf_ids(child)
    return frozenset(out)


def validate_expr(expr: PolicyExpr, bound_ids: set[str] | None = None) -> None:
    """Structural checks: non-empty children, sane thresholds, no factor
    required twice within one combination, all leaves bound."""
    if isinstance(expr, Leaf):
        if bound_ids is not None and expr.factor not in bound_ids:
            raise ConfigError(f"policy references unbound factor {expr.factor!r}")
        if expr.factor.startswith(STACK_ID_PREFIX):
            raise ConfigError(f"factor ids may not start with {STACK_ID_PREFIX!r}")
        return
    if not isinstance(expr, (AllOf, AnyOf, AtLeast)):
        raise ConfigError(f"not a policy expression: {type(expr).__name__}")
    if not expr.children:
        raise ConfigError("policy nodes must have at least one child")
    if isinstance(expr, AtLeast) and not 1 <= expr.threshold <= len(expr.children):
        raise ConfigError(
            f"at-least threshold {expr.threshold} outside [1, {len(expr.children)}]")
    if isinstance(expr, (AllOf, AtLeast)):
        # children that may be combined must not demand the same factor twice
        seen: set[str] = set()
        for child in expr.children:
            ids = leaf_ids(child)
            dup = seen & ids
            if dup:
                raise ConfigError(f"factor(s) {sorted(dup)} appear in sibling "
                                  "subtrees that would be combined")
            seen |= ids
    for child in expr.children:
        validate_expr(child, bound_ids)


def enumerate_allowed(expr: PolicyExpr) -> frozenset[frozenset[str]]:
    """The minimal factor-id sets that satisfy the tree."""
    validate_expr(expr)
    return frozenset(_minimize(_enumerate(expr)))


def _enumerate(expr: PolicyExpr) -> set[frozenset[str]]:
    if isinstance(expr, Leaf):
        return {frozenset((expr.factor,))}
    child_sets = [_enumerate(c) for c in expr.children]
    if isinstance(expr, AnyOf):
        return set().union(*child_sets)
    if isinstance(expr, AllOf):
        return _cross(child_sets)
    out: set[frozenset[str]] = set()  # AtLeast: every way of picking t children
    for picked in combinations(child_sets, expr.threshold):
        out |= _cross(picked)
    return out


def _cross(groups: Sequence[set[frozenset[str]]]) -> set[frozenset[str]]:
    acc: set[frozenset[str]] = {frozenset()}
    for group in groups:
        acc = {a | b for a in acc for b in group}
    return acc


def _minimize(sets: set[frozenset[str]]) -> set[frozenset[str]]:
    return {s for s in sets if not any(other < s for other in sets)}


def satisfied_by(expr: PolicyExpr, have: frozenset[str]) -> bool:
    """Truth-table evaluation: does this id set satisfy the tree?"""
    if isinstance(expr, Leaf):
        return expr.factor in have
    hits = sum(satisfied_by(c, have) for c in expr.children)
    if isinstance(expr, AllOf):
        return hits == len(expr.children)
    if isinstance(expr, AnyOf):
        return hits >= 1
    return hits >= expr.threshold


def selected_ids(expr: PolicyExpr, have: frozenset[str]) -> frozenset[str] | None:
    """The factor ids the canonical (first-satisfiable) derivation would use,
    or None if ``have`` cannot satisfy the tree."""
    if isinstance(expr, Leaf):
        return frozenset((expr.factor,)) if expr.factor in have else None
    if isinstance(expr, AllOf):
        out: frozenset[str] = frozenset()
        for child in expr.children:
            ids = selected_ids(child, have)
            if ids is None:
                return None
            out |= ids
        return out
    need = 1 if isinstance(expr, AnyOf) else expr.threshold
    out = frozenset()
    taken = 0
    for child in expr.children:
        if taken == need:
            break
        ids = selected_ids(child, have)
        if ids is not None:
            out |= ids
            taken += 1
    return out if taken == need else None


@dataclass(frozen=True)
class PolicyKeyDocument:
    """A compiled policy: the expression plus the root key policy whose stack
    factors mirror the tree's internal nodes."""

    expr: PolicyExpr
    root: "core.CoreKeyPolicy | threshold.ThresholdKeyPolicy"


def compile_policy(expr: PolicyExpr, factors: Mapping[str, FactorInstance], *,
                   kdf: KdfConfig | None = None,
                   rng: RandomSource | None = None) -> core.DerivedKey:
    """Establish the key enforcing ``expr`` over pre-built factor instances.

    A factor named in several subtrees is the same instance everywhere and
    receives one set of parameters. Returns the key and a
    :class:`PolicyKeyDocument`.
    """
    kdf = kdf or KdfConfig.argon2id()
    rng = rng or SystemRandomSource()
    validate_expr(expr, set(factors))
    for fid, inst in factors.items():
        if fid != inst.id:
            raise ConfigError(f"factor map key {fid!r} does not match instance id {inst.id!r}")

    key, build = _setup_node(expr, factors, kdf, rng, path=())
    return core.DerivedKey(key, PolicyKeyDocument(expr, build(key)))


def _stack_id(path: tuple[int, ...]) -> str:
    return STACK_ID_PREFIX + ".".join(str(i) for i in path)


def _setup_node(node: PolicyExpr, factors: Mapping[str, FactorInstance],
                kdf: KdfConfig, rng: RandomSource, path: tuple[int, ...]):
    """Recursive compilation; returns (key, policy builder) for this node."""
    from .core import setup_deferred as core_setup
    from .threshold import setup_deferred as threshold_setup_deferred

    if isinstance(node, Leaf):
        # degenerate tree: a single-factor n-of-n key
        return core_setup([factors[node.factor]], kdf, rng)

    elements = []
    for i, child in enumerate(node.children):
        if isinstance(child, Leaf):
            elements.append(factors[child.factor])
        else:
            inner_kdf = KdfConfig.fast(kdf.key_bits)
            inner_key, inner_build = _setup_node(child, factors, inner_kdf, rng, path + (i,))
            stack_inst = FactorInstance(
                _stack_id(path + (i,)), FactorKind.STACK,
                _stack_material(inner_key),
                (lambda b: lambda final_key: StackParams(b(final_key)))(inner_build),
            )
            elements.append(stack_inst)

    if isinstance(node, AllOf):
        return core_setup(elements, kdf, rng)
    t = 1 if isinstance(node, AnyOf) else node.threshold
    key, _handle, build = threshold_setup_deferred(elements, t, kdf, rng)
    return key, build


def _stack_material(inner_key: bytes):
    from .factors.base import FactorMaterial

    return FactorMaterial(inner_key, float(len(inner_key) * 8))


def policy_derive(witnesses: Mapping[str, Witness], document: PolicyKeyDocument, *,
                  clock: ClockSource | None = None,
                  rng: RandomSource | None = None) -> core.DerivedKey:
    """Derive the root key from witnesses covering some allowed combination.

    The first satisfiable subtree in left-to-right order is used, so repeated
    logins with the same witnesses walk the same stacks. Presented factors'
    parameters advance in *every* subtree that contains them; everything else
    is untouched.
    """
    clock = clock or SystemClock()
    rng = rng or SystemRandomSource()
    have = frozenset(witnesses)
    if not satisfied_by(document.expr, have):
        raise PolicyMismatchError(
            f"witnesses {sorted(have)} do not satisfy the policy")

    derived: dict[str, FactorInstance] = {}
    key = _derive_node(document.expr, document.root, witnesses, have, derived,
                       clock, rng)

    updates = {fid: inst.produce_params(key) for fid, inst in derived.items()}
    new_root = _rewrite_policy(document.root, updates)
    return core.DerivedKey(key, PolicyKeyDocument(document.expr, new_root))


def _derive_node(node: PolicyExpr, node_policy, witnesses: Mapping[str, Witness],
                 have: frozenset[str], derived: dict[str, FactorInstance],
                 clock: ClockSource, rng: RandomSource) -> bytes:
    """Derive one node's key along the chosen satisfiable children."""
    entries = {e.id: e for e in node_policy.factors}

    def element(child: PolicyExpr, index: int) -> FactorInstance:
        if isinstance(child, Leaf):
            fid = child.factor
            if fid not in derived:
                entry = entries[fid]
                derived[fid] = factor_derive(entry.kind, fid, witnesses[fid],
                                             entry.params, rng=rng, clock=clock)
            return derived[fid]
        entry = entries[_stack_id_for(node_policy, index)]
        inner_key = _derive_node(child, entry.params.policy, witnesses, have,
                                 derived, clock, rng)
        return FactorInstance(entry.id, FactorKind.STACK, _stack_material(inner_key),
                              lambda final_key: entry.params)

    if isinstance(node, Leaf):
        inst = element(node, 0)
        key, _build = core.derive_deferred([inst], node_policy)
        return key

    chosen: list[FactorInstance] = []
    if isinstance(node, AllOf):
        for i, child in enumerate(node.children):
            chosen.append(element(child, i))
        key, _build = core.derive_deferred(chosen, node_policy)
        return key

    need = 1 if isinstance(node, AnyOf) else node.threshold
    for i, child in enumerate(node.children):
        if len(chosen) == need:
            break
        if satisfied_by(child, have):
            chosen.append(element(child, i))
    key, _handle, _build = threshold.derive_deferred(chosen, node_policy)
    return key


def _stack_id_for(node_policy, index: int) -> str:
    # the compiled entry id at this child position; entries and children
    # share ordering by construction
    return node_policy.factors[index].id


def _rewrite_policy(policy, updates: Mapping[str, object]):
    """Replace presented factors' params throughout the nested document."""
    changed = False
    entries = []
    for entry in policy.factors:
        if entry.id in updates:
            entries.append(replace(entry, generation=entry.generation + 1,
                                   params=updates[entry.id]))
            changed = True
        elif isinstance(entry.params, StackParams):
            inner = _rewrite_policy(entry.params.policy, updates)
            if inner is not entry.params.policy:
                entries.append(replace(entry, generation=entry.generation + 1,
                                       params=StackParams(inner)))
                changed = True
            else:
                entries.append(entry)
        else:
            entries.append(entry)
    if not changed:
        return policy
    return replace(policy, factors=tuple(entries))


# -- analysis ---------------------------------------------------------------

TABLE_ENTROPY = {
    FactorKind.PASSWORD: 40.0,  # typical; callers should supply an estimate
    FactorKind.QUESTION: 10.0,
    FactorKind.UUID: 122.0,
    FactorKind.HMACSHA1: 160.0,
    FactorKind.DEVICE: 256.0,
}


def default_factor_entropy(kind: FactorKind, digits: int = 6) -> float:
    """Per-factor entropy defaults; OTP kinds carry digits/log10(2) bits."""
    kind = FactorKind(kind)
    if kind in (FactorKind.HOTP, FactorKind.TOTP, FactorKind.OOBA):
        return digits / math.log10(2)
    if kind in TABLE_ENTROPY:
        return TABLE_ENTROPY[kind]
    raise ConfigError(f"no entropy default for factor kind {kind.value!r}")


def policy_entropy(expr: PolicyExpr, entropies: Mapping[str, float]) -> float:
    """Effective entropy of the weakest allowed combination, in bits."""
    validate_expr(expr)
    return _entropy(expr, entropies)


def _entropy(expr: PolicyExpr, entropies: Mapping[str, float]) -> float:
    if isinstance(expr, Leaf):
        try:
            return float(entropies[expr.factor])
        except KeyError:
            raise ConfigError(f"no entropy assigned to factor {expr.factor!r}") from None
    values = [_entropy(c, entropies) for c in expr.children]
    if isinstance(expr, AllOf):
        return sum(values)
    if isinstance(expr, AnyOf):
        return min(values)
    return sum(sorted(values)[:expr.threshold])


def estimate_crack_time(bits: float, rate: float, kdf_cost: float) -> float:
    """Seconds to sweep a full 2^bits keyspace at ``rate`` hashes/second with
    ``kdf_cost`` hashes per guess."""
    if bits < 0 or rate <= 0 or kdf_cost <= 0:
        raise ConfigError("entropy must be >= 0 and rate/cost positive")
    return (2.0 ** bits) * kdf_cost / rate


SECONDS_PER_YEAR = 365.25 * 86400


def format_duration(seconds: float) -> str:
    """Human-scale rendering used by the analysis CLI."""
    if seconds >= SECONDS_PER_YEAR:
        years = seconds / SECONDS_PER_YEAR
        return f"{years:,.0f} years" if years >= 100 else f"{years:,.1f} years"
    if seconds >= 86400:
        return f"{seconds / 86400:.2f} days"
    if seconds >= 3600:
        return f"{seconds / 3600:.2f} hours"
    if seconds >= 60:
        return f"{seconds / 60:.2f} minutes"
    if seconds >= 1:
        return f"{seconds:.2f} seconds"
    return f"{seconds:.3g} seconds"
