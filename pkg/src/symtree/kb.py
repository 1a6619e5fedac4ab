"""Core knowledge-base types: terms, atoms, rules, facts, theories.

A Theory is the interchange unit for the whole toolkit: the generator
emits one, the solvers consume one, the renaming and rendering layers
transform one.  Serialization is a versioned JSON document (FORMAT_VERSION)
so artifacts stay replayable.

Conventions baked into the format:
  * rule atoms carry variables only (kinship rules are constant-free),
  * fact atoms carry entity ids; display names live in the entity table,
    which is what renaming rewrites,
  * labels (F1.., L1..) are stable identifiers and survive every transform.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import MalformedRule, SchemaViolation, UnboundVariable, UnknownSymbol

FORMAT_VERSION = 1

# Distinctness policies for rule matching.  The closed-world kinship
# semantics needs all-distinct (a child is not her own sister), but the
# policy stays an explicit parameter everywhere.
DISTINCT_NONE = "none"
DISTINCT_HEAD = "head-vars-distinct"
DISTINCT_ALL = "all-vars-pairwise-distinct"
DISTINCTNESS_POLICIES = (DISTINCT_NONE, DISTINCT_HEAD, DISTINCT_ALL)

# Relation kinds.
KIND_BASE = "base"          # observed: genders and the parent relation
KIND_DERIVED = "derived"    # heads of rules
KIND_INVERSE = "inverse"    # bookkeeping twin of a base relation

_VAR_ALPHABET = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


@dataclass(frozen=True, order=True)
class Var:
    """A rule variable."""

    name: str


@dataclass(frozen=True, order=True)
class Const:
    """A ground term referencing an entity id."""

    ref: str


Term = Var | Const


@dataclass(frozen=True)
class Atom:
    """relation applied to a tuple of terms; hashable so closures are sets."""

    rel: str
    args: tuple[Term, ...]

    def variables(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.args if isinstance(t, Var))

    def is_ground(self) -> bool:
        return all(isinstance(t, Const) for t in self.args)

    def key(self) -> tuple:
        """Deterministic sort key for ground atoms."""
        return (self.rel,) + tuple(t.ref if isinstance(t, Const) else t.name for t in self.args)

    def __repr__(self) -> str:  # compact, used in error messages only
        inner = ", ".join(t.ref if isinstance(t, Const) else t.name for t in self.args)
        return f"{self.rel}({inner})"


def ground(rel: str, *refs: str) -> Atom:
    return Atom(rel, tuple(Const(r) for r in refs))


def pattern(rel: str, *names: str) -> Atom:
    return Atom(rel, tuple(Var(n) for n in names))


@dataclass(frozen=True)
class Fact:
    """A labeled ground atom (F-number)."""

    label: str
    atom: Atom


@dataclass(frozen=True)
class Rule:
    """A labeled Horn rule (L-number): body atoms -> head atom."""

    label: str
    body: tuple[Atom, ...]
    head: Atom

    def variables(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for atom in self.body + (self.head,):
            for name in atom.variables():
                seen.setdefault(name)
        return tuple(seen)


@dataclass(frozen=True)
class Relation:
    """Schema entry.  The name doubles as the stable identifier."""

    name: str
    arity: int
    kind: str = KIND_BASE
    inverse_of: str | None = None


@dataclass(frozen=True)
class Entity:
    """id is opaque and stable; name is the display surface renaming rewrites."""

    id: str
    name: str


# Bindings map variable names to entity ids.
Binding = dict[str, str]


@dataclass
class Theory:
    """Schema + entities + labeled facts + labeled rules."""

    relations: dict[str, Relation]
    entities: list[Entity]
    facts: list[Fact]
    rules: list[Rule]

    def __post_init__(self) -> None:
        self.validate()

    # -- lookups ------------------------------------------------------

    def entity_by_id(self, ref: str) -> Entity:
        ent = self._entity_index().get(ref)
        if ent is None:
            raise UnknownSymbol(f"unknown entity id {ref!r}")
        return ent

    def entity_by_name(self, name: str) -> Entity:
        for ent in self.entities:
            if ent.name == name:
                return ent
        raise UnknownSymbol(f"unknown entity name {name!r}")

    def relation(self, name: str) -> Relation:
        rel = self.relations.get(name)
        if rel is None:
            raise UnknownSymbol(f"unknown relation {name!r}")
        return rel

    def fact_atoms(self) -> set[Atom]:
        return {f.atom for f in self.facts}

    def fact_label(self, atom: Atom) -> str | None:
        return {f.atom: f.label for f in self.facts}.get(atom)

    def base_relations(self) -> list[Relation]:
        return [r for r in self.relations.values() if r.kind == KIND_BASE]

    def derived_relations(self) -> list[Relation]:
        return [r for r in self.relations.values() if r.kind == KIND_DERIVED]

    def gender_relations(self) -> list[Relation]:
        return [r for r in self.relations.values() if r.kind == KIND_BASE and r.arity == 1]

    def parent_relation(self) -> Relation:
        binary = [r for r in self.relations.values() if r.kind == KIND_BASE and r.arity == 2]
        if len(binary) != 1:
            raise SchemaViolation(f"expected exactly one binary base relation, found {len(binary)}")
        return binary[0]

    def inverse_relation(self, base_name: str) -> Relation:
        for rel in self.relations.values():
            if rel.kind == KIND_INVERSE and rel.inverse_of == base_name:
                return rel
        raise UnknownSymbol(f"no inverse relation declared for {base_name!r}")

    def _entity_index(self) -> dict[str, Entity]:
        return {e.id: e for e in self.entities}

    # -- validation -----------------------------------------------------

    def validate(self) -> None:
        ids = [e.id for e in self.entities]
        if len(set(ids)) != len(ids):
            raise SchemaViolation("entity ids must be unique")
        names = [e.name for e in self.entities]
        if len(set(names)) != len(names):
            raise SchemaViolation("entity display names must be unique")
        if any(not e.name for e in self.entities):
            raise SchemaViolation("entity display names must be non-empty")
        for rel in self.relations.values():
            if rel.arity not in (1, 2):
                raise SchemaViolation(f"relation {rel.name!r} has unsupported arity {rel.arity}")
            if rel.kind == KIND_INVERSE:
                target = self.relations.get(rel.inverse_of or "")
                if target is None or target.kind != KIND_BASE or target.arity != 2:
                    raise SchemaViolation(f"inverse relation {rel.name!r} must reference a binary base relation")
        known_ids = set(ids)
        seen_flabels: set[str] = set()
        for fact in self.facts:
            if fact.label in seen_flabels:
                raise SchemaViolation(f"duplicate fact label {fact.label!r}")
            seen_flabels.add(fact.label)
            self._check_atom(fact.atom)
            if not fact.atom.is_ground():
                raise SchemaViolation(f"fact {fact.label} is not ground")
            for term in fact.atom.args:
                if term.ref not in known_ids:
                    raise SchemaViolation(f"fact {fact.label} references unknown entity id {term.ref!r}")
        head_rels = {rule.head.rel for rule in self.rules}
        seen_llabels: set[str] = set()
        for rule in self.rules:
            if rule.label in seen_llabels:
                raise SchemaViolation(f"duplicate rule label {rule.label!r}")
            seen_llabels.add(rule.label)
            validate_rule(rule, self.relations)
            # depth-0 stratification: no rule may consume what rules produce
            for atom in rule.body:
                if atom.rel in head_rels:
                    raise SchemaViolation(f"rule {rule.label} body uses derived relation {atom.rel!r}")

    def _check_atom(self, atom: Atom) -> None:
        rel = self.relations.get(atom.rel)
        if rel is None:
            raise SchemaViolation(f"atom references unknown relation {atom.rel!r}")
        if len(atom.args) != rel.arity:
            raise SchemaViolation(f"atom {atom!r} does not match arity {rel.arity} of {rel.name!r}")

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "version": FORMAT_VERSION,
            "relations": [
                {"name": r.name, "arity": r.arity, "kind": r.kind, "inverse_of": r.inverse_of}
                for r in self.relations.values()
            ],
            "entities": [{"id": e.id, "name": e.name} for e in self.entities],
            "facts": [
                {"label": f.label, "rel": f.atom.rel, "args": [t.ref for t in f.atom.args]}
                for f in self.facts
            ],
            "rules": [
                {
                    "label": r.label,
                    "body": [_atom_to_dict(a) for a in r.body],
                    "head": _atom_to_dict(r.head),
                }
                for r in self.rules
            ],
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "Theory":
        if not isinstance(doc, Mapping):
            raise SchemaViolation("theory document must be an object")
        if doc.get("version") != FORMAT_VERSION:
            raise SchemaViolation(f"unsupported theory format version {doc.get('version')!r}")
        try:
            relations = {
                r["name"]: Relation(r["name"], int(r["arity"]), r.get("kind", KIND_BASE), r.get("inverse_of"))
                for r in doc["relations"]
            }
            entities = [Entity(e["id"], e["name"]) for e in doc["entities"]]
            facts = [
                Fact(f["label"], ground(f["rel"], *f["args"]))
                for f in doc["facts"]
            ]
            rules = [
                Rule(
                    r["label"],
                    tuple(_atom_from_dict(a) for a in r["body"]),
                    _atom_from_dict(r["head"]),
                )
                for r in doc["rules"]
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaViolation(f"malformed theory document: {exc}") from exc
        return cls(relations=relations, entities=entities, facts=facts, rules=rules)


def _atom_to_dict(atom: Atom) -> dict:
    return {
        "rel": atom.rel,
        "args": [{"var": t.name} if isinstance(t, Var) else {"ent": t.ref} for t in atom.args],
    }


def _atom_from_dict(doc: Mapping) -> Atom:
    args: list[Term] = []
    for item in doc["args"]:
        if "var" in item:
            args.append(Var(item["var"]))
        elif "ent" in item:
            args.append(Const(item["ent"]))
        else:
            raise SchemaViolation(f"atom argument {item!r} is neither a variable nor an entity")
    return Atom(doc["rel"], tuple(args))


def validate_rule(rule: Rule, relations: Mapping[str, Relation] | None = None) -> None:
    """Structural checks: safety, arity, non-empty body."""
    if not rule.body:
        raise MalformedRule(f"rule {rule.label!r} has an empty body")
    body_vars = {name for atom in rule.body for name in atom.variables()}
    for name in rule.head.variables():
        if name not in body_vars:
            raise MalformedRule(f"rule {rule.label!r} head variable {name!r} is unsafe")
    if relations is not None:
        for atom in rule.body + (rule.head,):
            rel = relations.get(atom.rel)
            if rel is None:
                raise MalformedRule(f"rule {rule.label!r} references unknown relation {atom.rel!r}")
            if len(atom.args) != rel.arity:
                raise MalformedRule(f"rule {rule.label!r} atom {atom!r} breaks arity of {rel.name!r}")


# --------------------------------------------------------------------------
# substitution and matching
# --------------------------------------------------------------------------

def apply_substitution(atom: Atom, binding: Mapping[str, str]) -> Atom:
    """Replace every variable with its bound entity id.

    Raises UnboundVariable if the binding misses one of the atom's variables.
    """
    args: list[Term] = []
    for term in atom.args:
        if isinstance(term, Const):
            args.append(term)
        else:
            ref = binding.get(term.name)
            if ref is None:
                raise UnboundVariable(f"variable {term.name!r} is not bound")
            args.append(Const(ref))
    return Atom(atom.rel, tuple(args))


def _distinct_ok(values: Iterable[str]) -> bool:
    vals = list(values)
    return len(set(vals)) == len(vals)


def match_rule(
    rule: Rule,
    facts: Iterable[Atom],
    distinctness: str = DISTINCT_ALL,
) -> list[Binding]:
    """All bindings under which every body atom is among the given facts.

    Results come back sorted lexicographically by variable name then bound
    entity id, so matching is deterministic regardless of fact order.
    """
    if distinctness not in DISTINCTNESS_POLICIES:
        raise ValueError(f"unknown distinctness policy {distinctness!r}")
    validate_rule(rule)

    index: dict[str, list[tuple[str, ...]]] = {}
    for atom in facts:
        if not atom.is_ground():
            raise UnboundVariable(f"fact {atom!r} is not ground")
        index.setdefault(atom.rel, []).append(tuple(t.ref for t in atom.args))

    all_distinct = distinctness == DISTINCT_ALL
    results: list[Binding] = []

    def extend(i: int, binding: Binding, used: set[str]) -> None:
        if i == len(rule.body):
            results.append(dict(binding))
            return
        atom = rule.body[i]
        for row in index.get(atom.rel, ()):
            added: list[str] = []
            ok = True
            for term, ref in zip(atom.args, row):
                if isinstance(term, Const):
                    if term.ref != ref:
                        ok = False
                        break
                    continue
                bound = binding.get(term.name)
                if bound is None:
                    if all_distinct and ref in used:
                        ok = False
                        break
                    binding[term.name] = ref
                    used.add(ref)
                    added.append(term.name)
                elif bound != ref:
                    ok = False
                    break
            if ok:
                extend(i + 1, binding, used)
            for name in added:
                used.discard(binding.pop(name))

    extend(0, {}, set())

    if distinctness == DISTINCT_HEAD:
        head_vars = list(dict.fromkeys(rule.head.variables()))
        results = [b for b in results if _distinct_ok(b[v] for v in head_vars)]

    var_order = sorted({v for atom in rule.body for v in atom.variables()})
    results.sort(key=lambda b: tuple(b[v] for v in var_order))
    return results


# --------------------------------------------------------------------------
# canonical rule form
# --------------------------------------------------------------------------

def canonicalize_rule(rule: Rule) -> str:
    """Canonical text form; two rules are equal iff these strings are equal.

    Body atoms are grouped by relation name (ascending); within a group every
    ordering is tried, variables are renamed in first-appearance order, and
    the lexicographically smallest rendering wins.  That makes the form
    invariant under variable renaming and body reordering, and idempotent.
    """
    validate_rule(rule)
    groups: dict[str, list[Atom]] = {}
    for atom in rule.body:
        groups.setdefault(atom.rel, []).append(atom)
    group_names = sorted(groups)
    for name in group_names:
        if len(groups[name]) > 8:
            raise MalformedRule(f"cannot canonicalize: {len(groups[name])} atoms share relation {name!r}")

    best: str | None = None
    perms_per_group = [itertools.permutations(groups[name]) for name in group_names]
    for combo in itertools.product(*perms_per_group):
        ordered = [atom for grp in combo for atom in grp]
        renaming: dict[str, str] = {}
        for atom in ordered:
            for var in atom.variables():
                if var not in renaming:
                    renaming[var] = _VAR_ALPHABET[len(renaming)]
        parts = [_render_canonical_atom(a, renaming) for a in ordered]
        text = " & ".join(parts) + " -> " + _render_canonical_atom(rule.head, renaming)
        if best is None or text < best:
            best = text
    assert best is not None
    return best


def _render_canonical_atom(atom: Atom, renaming: Mapping[str, str]) -> str:
    inner = ",".join(renaming[t.name] if isinstance(t, Var) else t.ref for t in atom.args)
    return f"{atom.rel}({inner})"


_CANONICAL_ATOM_RE = re.compile(r"\s*([A-Za-z0-9_]+)\(([^)]*)\)\s*")


def rule_from_canonical(text: str, label: str = "") -> Rule:
    """Parse the canonical text form back into a Rule (for round-trips)."""
    if "->" not in text:
        raise MalformedRule(f"no '->' in rule text {text!r}")
    body_text, head_text = text.rsplit("->", 1)
    body_atoms = [_parse_canonical_atom(part) for part in body_text.split("&")]
    head = _parse_canonical_atom(head_text)
    return Rule(label=label, body=tuple(body_atoms), head=head)


def _parse_canonical_atom(text: str) -> Atom:
    m = _CANONICAL_ATOM_RE.fullmatch(text)
    if not m:
        raise MalformedRule(f"cannot parse atom {text.strip()!r}")
    rel = m.group(1)
    raw = [a.strip() for a in m.group(2).split(",") if a.strip()]
    # single capital letters are variables in canonical form
    args: list[Term] = [Var(a) if re.fullmatch(r"[A-Z]", a) else Const(a) for a in raw]
    return Atom(rel, tuple(args))


def sort_atoms(atoms: Iterable[Atom]) -> list[Atom]:
    """Deterministic order for ground atom collections."""
    return sorted(atoms, key=Atom.key)


def label_number(label: str) -> int:
    """Numeric part of labels like F12 / L7 / G3 (for sorting)."""
    m = re.search(r"(\d+)$", label)
    if not m:
        raise ValueError(f"label {label!r} has no numeric suffix")
    return int(m.group(1))
