"""Exact solvers over kinship theories.

forward_closure computes every derivable fact together with full
provenance (every rule + binding that derives it), which makes the
other three reasoning modes cheap:

  * deduction   - membership in basic facts or closure,
  * abduction   - enumerate the recorded derivations as proofs over
                  basic-fact labels,
  * induction   - exhaustively fill a chain-shaped rule template and keep
                  the filling that reproduces the target facts exactly.

Rules are depth-0 (bodies only mention base relations; Theory.validate
enforces it), so semi-naive evaluation reaches the fixpoint after the
first delta pass.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import (
    NoConsistentRule,
    NotChainable,
    NoTargetFacts,
    SchemaViolation,
    UnknownSymbol,
)
from .kb import (
    DISTINCT_ALL,
    KIND_INVERSE,
    Atom,
    Binding,
    Const,
    Fact,
    Rule,
    Theory,
    Var,
    apply_substitution,
    canonicalize_rule,
    label_number,
    match_rule,
    sort_atoms,
)

# Variable names used when instantiating rule templates.
TEMPLATE_VARS = ("x", "y", "z", "w", "v", "u", "t", "s")


@dataclass(frozen=True)
class Derivation:
    """One way a rule fired: the rule label plus the full binding."""

    rule: str
    binding: tuple[tuple[str, str], ...]  # sorted (variable, entity id) pairs

    def binding_dict(self) -> Binding:
        return dict(self.binding)


@dataclass(frozen=True)
class Proof:
    """A derivation projected onto basic-fact labels (what abduction emits)."""

    rule: str
    facts: tuple[str, ...]  # F-labels sorted numerically
    binding: tuple[tuple[str, str], ...]

    def selection(self) -> tuple[str, frozenset[str]]:
        return (self.rule, frozenset(self.facts))


@dataclass
class Closure:
    """Derived atoms with provenance, in a deterministic order."""

    theory: Theory
    derivations: dict[Atom, tuple[Derivation, ...]]
    distinctness: str = DISTINCT_ALL

    def atoms(self) -> set[Atom]:
        return set(self.derivations)

    def ordered_atoms(self) -> list[Atom]:
        return sort_atoms(self.derivations)

    def atoms_of(self, relation: str) -> list[Atom]:
        return [a for a in self.ordered_atoms() if a.rel == relation]

    def labeled_facts(self) -> list[Fact]:
        """Inferred facts labeled G1.. in deterministic order."""
        return [Fact(f"G{i}", atom) for i, atom in enumerate(self.ordered_atoms(), start=1)]

    def proofs_for(self, atom: Atom) -> list[Proof]:
        return [self._to_proof(d) for d in self.derivations.get(atom, ())]

    def _to_proof(self, derivation: Derivation) -> Proof:
        rule = next(r for r in self.theory.rules if r.label == derivation.rule)
        binding = derivation.binding_dict()
        label_index = {f.atom: f.label for f in self.theory.facts}
        labels = []
        for atom in rule.body:
            grounded = apply_substitution(atom, binding)
            labels.append(_support_label(self.theory, label_index, grounded))
        labels = sorted(set(labels), key=label_number)
        return Proof(rule=derivation.rule, facts=tuple(labels), binding=derivation.binding)

    def to_dict(self) -> dict:
        items = []
        for i, atom in enumerate(self.ordered_atoms(), start=1):
            items.append(
                {
                    "label": f"G{i}",
                    "rel": atom.rel,
                    "args": [t.ref for t in atom.args],
                    "proofs": [
                        {"rule": p.rule, "facts": list(p.facts), "binding": dict(p.binding)}
                        for p in self.proofs_for(atom)
                    ],
                }
            )
        return {"version": 1, "distinctness": self.distinctness, "inferred": items}


def _support_label(theory: Theory, label_index: Mapping[Atom, str], atom: Atom) -> str:
    """F-label of the basic fact supporting a ground body atom."""
    rel = theory.relation(atom.rel)
    if rel.kind == KIND_INVERSE:
        base = Atom(rel.inverse_of, (atom.args[1], atom.args[0]))
        label = label_index.get(base)
    else:
        label = label_index.get(atom)
    if label is None:
        raise SchemaViolation(f"body atom {atom!r} is not supported by a basic fact")
    return label


def materialize_inverses(theory: Theory, atoms: Iterable[Atom]) -> set[Atom]:
    """Base atoms plus the inverse twin of every binary base fact."""
    out = set(atoms)
    inverses = {r.inverse_of: r.name for r in theory.relations.values() if r.kind == KIND_INVERSE}
    for atom in list(out):
        twin = inverses.get(atom.rel)
        if twin is not None:
            out.add(Atom(twin, (atom.args[1], atom.args[0])))
    return out


def forward_closure(theory: Theory, distinctness: str = DISTINCT_ALL) -> Closure:
    """All derivable facts with every (rule, binding) that derives them."""
    base = materialize_inverses(theory, theory.fact_atoms())
    derivations: dict[Atom, list[Derivation]] = {}

    # Semi-naive loop; with depth-0 rules the second pass contributes nothing,
    # but the loop keeps the evaluator honest about reaching a fixpoint.
    frontier = set(base)
    known = set(base)
    while frontier:
        new_frontier: set[Atom] = set()
        for rule in theory.rules:
            if not any(atom.rel in {f.rel for f in frontier} for atom in rule.body):
                continue
            for binding in match_rule(rule, known, distinctness):
                head = apply_substitution(rule.head, binding)
                entry = Derivation(rule.label, tuple(sorted(binding.items())))
                bucket = derivations.setdefault(head, [])
                if entry not in bucket:
                    bucket.append(entry)
                if head not in known:
                    known.add(head)
                    new_frontier.add(head)
        frontier = new_frontier

    ordered: dict[Atom, tuple[Derivation, ...]] = {}
    for atom in sort_atoms(derivations):
        entries = sorted(
            derivations[atom], key=lambda d: (label_number(d.rule), d.binding)
        )
        ordered[atom] = tuple(entries)
    return Closure(theory=theory, derivations=ordered, distinctness=distinctness)


def _check_query_atom(theory: Theory, atom: Atom) -> None:
    rel = theory.relations.get(atom.rel)
    if rel is None:
        raise UnknownSymbol(f"unknown relation {atom.rel!r}")
    if len(atom.args) != rel.arity:
        raise SchemaViolation(f"query {atom!r} breaks arity of {atom.rel!r}")
    ids = {e.id for e in theory.entities}
    for term in atom.args:
        if not isinstance(term, Const):
            raise SchemaViolation(f"query {atom!r} must be ground")
        if term.ref not in ids:
            raise UnknownSymbol(f"unknown entity id {term.ref!r}")


def classify_hypothesis(
    theory: Theory,
    atom: Atom,
    closure: Closure | None = None,
    distinctness: str = DISTINCT_ALL,
) -> bool:
    """Closed-world truth of a ground atom: entailed or not."""
    _check_query_atom(theory, atom)
    if closure is None:
        closure = forward_closure(theory, distinctness)
    return atom in theory.fact_atoms() or atom in closure.derivations


def classify_by_proof(
    theory: Theory,
    atom: Atom,
    closure: Closure | None = None,
    distinctness: str = DISTINCT_ALL,
) -> bool:
    """Path-based variant of classify_hypothesis; must agree with it."""
    _check_query_atom(theory, atom)
    if closure is None:
        closure = forward_closure(theory, distinctness)
    return atom in theory.fact_atoms() or bool(closure.proofs_for(atom))


def abduce_proofs(
    theory: Theory,
    observation: Atom,
    closure: Closure | None = None,
    distinctness: str = DISTINCT_ALL,
) -> list[Proof]:
    """Every explanation of the observation over basic-fact labels."""
    _check_query_atom(theory, observation)
    if closure is None:
        closure = forward_closure(theory, distinctness)
    proofs = closure.proofs_for(observation)
    return sorted(proofs, key=lambda p: (label_number(p.rule), tuple(map(label_number, p.facts))))


# --------------------------------------------------------------------------
# chain normalization
# --------------------------------------------------------------------------

def chain_normalize(theory: Theory, rule: Rule) -> Rule:
    """Rewrite the body as one variable chain from head subject to object.

    Backward parent edges become the inverse relation, variables are renamed
    A, B, C.. along the chain, and the single gender atom (always on the head
    subject) moves to the end.  Raises NotChainable when the body is not one
    simple chain using every binary atom exactly once.
    """
    parent = theory.parent_relation()
    inverse = theory.inverse_relation(parent.name)

    unary = [a for a in rule.body if len(a.args) == 1]
    binary = [a for a in rule.body if len(a.args) == 2]
    if len(unary) != 1 or len(unary[0].args) != 1:
        raise NotChainable(f"rule {rule.label!r} needs exactly one gender atom")
    gender_atom = unary[0]
    head_subject, head_object = (t.name for t in rule.head.args)
    if gender_atom.args[0] != Var(head_subject):
        raise NotChainable(f"rule {rule.label!r} gender atom must constrain the head subject")

    # Interpret all binary atoms as directed parent edges.
    edges: list[tuple[str, str]] = []
    for atom in binary:
        u, v = (t.name for t in atom.args)
        if atom.rel == parent.name:
            edges.append((u, v))
        elif atom.rel == inverse.name:
            edges.append((v, u))
        else:
            raise NotChainable(f"rule {rule.label!r} body uses non-chain relation {atom.rel!r}")

    chain = _find_chain(head_subject, head_object, edges)
    if chain is None:
        raise NotChainable(f"rule {rule.label!r} body is not a single chain")

    alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
    renaming = {head_subject: "A"}
    atoms: list[Atom] = []
    current = head_subject
    for parent_edge, forward in chain:
        nxt = parent_edge[1] if forward else parent_edge[0]
        if nxt not in renaming:
            renaming[nxt] = alphabet[len(renaming)]
        rel_name = parent.name if forward else inverse.name
        atoms.append(Atom(rel_name, (Var(renaming[current]), Var(renaming[nxt]))))
        current = nxt
    atoms.append(Atom(gender_atom.rel, (Var("A"),)))
    head = Atom(rule.head.rel, (Var("A"), Var(renaming[head_object])))
    return Rule(label=rule.label, body=tuple(atoms), head=head)


def _find_chain(
    start: str, goal: str, edges: list[tuple[str, str]]
) -> list[tuple[tuple[str, str], bool]] | None:
    """Order the edges into a simple path start..goal; None if impossible.

    Each step records (edge, forward?) where forward means the edge is
    traversed parent->child.
    """

    def walk(current: str, remaining: list[tuple[str, str]], visited: set[str]):
        if not remaining:
            return [] if current == goal else None
        for i, edge in enumerate(remaining):
            for forward in (True, False):
                u, v = edge if forward else (edge[1], edge[0])
                if u != current or v in visited:
                    continue
                rest = remaining[:i] + remaining[i + 1 :]
                tail = walk(v, rest, visited | {v})
                if tail is not None:
                    return [(edge, forward)] + tail
        return None

    return walk(start, [], set()) if not edges else walk(start, edges, {start})


# --------------------------------------------------------------------------
# template induction
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RuleTemplate:
    """Chain-shaped rule skeleton: k relation slots plus one gender slot.

    Slot i links variable i to variable i+1; the gender slot constrains the
    first variable; the head relates the first and last variables.
    """

    head_rel: str
    length: int

    def variables(self) -> tuple[str, ...]:
        if self.length + 1 > len(TEMPLATE_VARS):
            raise SchemaViolation(f"template for {self.head_rel!r} is too long")
        return TEMPLATE_VARS[: self.length + 1]

    def instantiate(self, relation_slots: Sequence[str], gender_slot: str) -> Rule:
        if len(relation_slots) != self.length:
            raise SchemaViolation(
                f"template for {self.head_rel!r} needs {self.length} relation slots"
            )
        vs = self.variables()
        body = tuple(
            Atom(rel, (Var(vs[i]), Var(vs[i + 1]))) for i, rel in enumerate(relation_slots)
        )
        body += (Atom(gender_slot, (Var(vs[0]),)),)
        head = Atom(self.head_rel, (Var(vs[0]), Var(vs[-1])))
        return Rule(label="", body=body, head=head)


@dataclass(frozen=True)
class InducedRule:
    rule: Rule
    canonical: str
    support: int
    exact: bool


def make_template(theory: Theory, relation_name: str) -> RuleTemplate:
    """Template sized from the chain form of the relation's defining rule."""
    for rule in theory.rules:
        if rule.head.rel == relation_name:
            chain = chain_normalize(theory, rule)
            return RuleTemplate(head_rel=relation_name, length=len(chain.body) - 1)
    raise UnknownSymbol(f"no rule defines relation {relation_name!r}")


def enumerate_fillings(theory: Theory, template: RuleTemplate) -> list[Rule]:
    """All candidate rules: every relation-slot and gender-slot assignment."""
    parent = theory.parent_relation()
    inverse = theory.inverse_relation(parent.name)
    genders = [r.name for r in theory.gender_relations()]
    candidates = []
    for combo in itertools.product((parent.name, inverse.name), repeat=template.length):
        for gender in genders:
            candidates.append(template.instantiate(combo, gender))
    return candidates


def induce_rule(
    theory: Theory,
    targets: Sequence[Atom],
    template: RuleTemplate,
    distinctness: str = DISTINCT_ALL,
) -> InducedRule:
    """The unique filling that derives exactly the target facts.

    A candidate is exact when it entails every target and nothing else (the
    targets are the complete closed-world extension of the head relation).
    Ties break by canonical-form order.
    """
    if not targets:
        raise NoTargetFacts(f"no target facts for {template.head_rel!r}")
    target_set = set(targets)
    for atom in target_set:
        if atom.rel != template.head_rel:
            raise SchemaViolation(f"target {atom!r} does not match template head {template.head_rel!r}")
    base = materialize_inverses(theory, theory.fact_atoms())
    exact: list[tuple[str, Rule]] = []
    for candidate in enumerate_fillings(theory, template):
        derived = {
            apply_substitution(candidate.head, binding)
            for binding in match_rule(candidate, base, distinctness)
        }
        if derived == target_set:
            exact.append((canonicalize_rule(candidate), candidate))
    if not exact:
        raise NoConsistentRule(f"no exact filling for {template.head_rel!r}")
    exact.sort(key=lambda pair: pair[0])
    canonical, rule = exact[0]
    return InducedRule(rule=rule, canonical=canonical, support=len(target_set), exact=True)
