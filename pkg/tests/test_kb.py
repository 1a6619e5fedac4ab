"""Core term, rule, and theory behaviour."""

from __future__ import annotations

import itertools
import random

import pytest

from symtree.errors import MalformedRule, SchemaViolation, UnboundVariable, UnknownSymbol
from symtree.kb import (
    Atom,
    Const,
    Fact,
    Rule,
    Theory,
    Var,
    canonicalize_rule,
    ground,
    label_number,
    match_rule,
    pattern,
    rule_from_canonical,
    validate_rule,
)
from symtree.kb import DISTINCT_ALL, DISTINCT_HEAD, DISTINCT_NONE
from symtree.reasoner import materialize_inverses
from symtree.schema import kinship_rules


def test_terms_are_hashable_and_distinct():
    assert Var("X") == Var("X")
    assert Var("X") != Const("X")
    assert len({Var("X"), Var("Y"), Const("X")}) == 3


def test_atom_ground_and_pattern():
    assert ground("parentOf", "anna", "bert").is_ground()
    assert not pattern("parentOf", "X", "Y").is_ground()
    mixed = Atom("parentOf", (Var("X"), Const("bert")))
    assert not mixed.is_ground()
    assert mixed.variables() == ("X",)


def test_validate_rule_rejects_unsafe_head_variable():
    body = (pattern("parentOf", "X", "Y"),)
    head = pattern("childOf", "Y", "Z")
    with pytest.raises(MalformedRule):
        validate_rule(Rule("L1", body, head))


def test_match_rule_rejects_open_facts():
    rule = Rule("L1", (pattern("parentOf", "X", "Y"),), pattern("childOf", "Y", "X"))
    with pytest.raises(UnboundVariable):
        match_rule(rule, [pattern("parentOf", "A", "B")])


def test_validate_rule_rejects_empty_body():
    with pytest.raises(MalformedRule):
        validate_rule(Rule("L1", (), pattern("p", "X", "Y")))


def make_rule(body_rels, head_rel="targetOf"):
    """Chain rule over the given body relations, head spanning the chain."""
    atoms = tuple(
        pattern(rel, f"V{i}", f"V{i + 1}") for i, rel in enumerate(body_rels)
    )
    head = pattern(head_rel, "V0", f"V{len(body_rels)}")
    return Rule("L1", atoms, head)


def test_canonical_form_invariant_under_body_order_and_renaming():
    base = make_rule(["parentOf", "parentOf", "parentOf"])
    want = canonicalize_rule(base)
    names = ["A", "B", "C", "Q", "Z", "M"]
    rng = random.Random(7)
    for perm in itertools.permutations(base.body):
        rng.shuffle(names)
        mapping: dict[str, str] = {}
        renamed = []
        for atom in perm:
            args = []
            for term in atom.args:
                if term.name not in mapping:
                    mapping[term.name] = names[len(mapping)]
                args.append(Var(mapping[term.name]))
            renamed.append(Atom(atom.rel, tuple(args)))
        head = Atom(base.head.rel, tuple(Var(mapping[t.name]) for t in base.head.args))
        twisted = Rule("L9", tuple(renamed), head)
        assert canonicalize_rule(twisted) == want


def test_canonical_form_separates_inequivalent_rules():
    left = make_rule(["parentOf", "inverse_parentOf", "parentOf"])
    right = make_rule(["inverse_parentOf", "parentOf", "parentOf"])
    assert canonicalize_rule(left) != canonicalize_rule(right)


def test_rule_from_canonical_round_trip_on_all_kinship_rules():
    for rule in kinship_rules():
        text = canonicalize_rule(rule)
        back = rule_from_canonical(text, rule.label)
        assert canonicalize_rule(back) == text
        assert back.label == rule.label


def test_label_number_ordering():
    labels = ["L10", "L2", "L1"]
    assert sorted(labels, key=label_number) == ["L1", "L2", "L10"]


def test_theory_lookup_and_round_trip(example_theory):
    doc = example_theory.to_dict()
    back = Theory.from_dict(doc)
    assert back.to_dict() == doc
    assert back.parent_relation().name == "parentOf"
    inverse = back.inverse_relation("parentOf")
    assert inverse.inverse_of == "parentOf"
    assert {r.name for r in back.gender_relations()} == {"male", "female"}


def test_theory_rejects_unknown_relation_in_fact():
    with pytest.raises((SchemaViolation, UnknownSymbol)):
        Theory(
            relations={},
            entities=(),
            facts=(Fact("F1", ground("mystery", "a")),),
            rules=(),
        )


def test_match_rule_counts_monotone_under_distinctness(example_theory):
    facts = materialize_inverses(example_theory, example_theory.fact_atoms())
    rule = next(r for r in example_theory.rules if r.head.rel == "brotherOf")
    none = match_rule(rule, facts, DISTINCT_NONE)
    head = match_rule(rule, facts, DISTINCT_HEAD)
    strict = match_rule(rule, facts, DISTINCT_ALL)
    assert len(none) >= len(head) >= len(strict) > 0
    as_sets = lambda rows: {tuple(sorted(b.items())) for b in rows}
    assert as_sets(strict) <= as_sets(none)
    assert as_sets(head) <= as_sets(none)


def test_match_rule_bindings_ground_the_body(example_theory):
    facts = materialize_inverses(example_theory, example_theory.fact_atoms())
    rule = next(r for r in example_theory.rules if r.head.rel == "motherOf")
    rows = match_rule(rule, facts, DISTINCT_ALL)
    assert rows
    for binding in rows:
        for atom in rule.body:
            grounded = Atom(atom.rel, tuple(Const(binding[t.name]) for t in atom.args))
            assert grounded in facts
