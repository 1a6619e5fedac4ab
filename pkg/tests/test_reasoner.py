"""Exact solving: closure, classification, abduction, induction."""

from __future__ import annotations

import pytest

from oracles import closure_oracle, rule_bindings_oracle
from symtree.errors import NotChainable, NoTargetFacts, UnknownSymbol
from symtree.kb import (
    Atom,
    Const,
    DISTINCT_ALL,
    DISTINCT_NONE,
    Rule,
    Theory,
    canonicalize_rule,
    ground,
    match_rule,
    pattern,
)
from symtree.kb import KIND_DERIVED
from symtree.reasoner import (
    RuleTemplate,
    abduce_proofs,
    chain_normalize,
    classify_by_proof,
    classify_hypothesis,
    enumerate_fillings,
    forward_closure,
    induce_rule,
    make_template,
    materialize_inverses,
)
from symtree.schema import build_theory, example_tree
from symtree.treegen import TreeConfig, generate_tree

FROZEN_EXAMPLE_COUNTS = {
    "auntOf": 16,
    "brotherOf": 24,
    "sisterOf": 12,
    "motherOf": 18,
    "fatherOf": 18,
    "grandmotherOf": 16,
    "grandfatherOf": 16,
    "sonOf": 22,
    "daughterOf": 14,
}

MISSING_IN_EXAMPLE = {"boySecondCousinOf", "girlSecondCousinOf", "secondAuntOf"}


def derived_relations(theory):
    return sorted(
        name for name, rel in theory.relations.items() if rel.kind == KIND_DERIVED
    )


def test_example_closure_size_and_relation_counts(example_theory, example_closure):
    atoms = example_closure.atoms()
    assert len(atoms) == 308
    for rel, count in FROZEN_EXAMPLE_COUNTS.items():
        assert len(example_closure.atoms_of(rel)) == count, rel
    present = {a.rel for a in atoms}
    assert MISSING_IN_EXAMPLE.isdisjoint(present)
    assert MISSING_IN_EXAMPLE < set(derived_relations(example_theory))


def test_example_closure_matches_brute_force_oracle(example_theory, example_closure):
    got = {a.key() for a in example_closure.atoms()}
    want = closure_oracle(example_theory)
    assert got == want


def test_closure_matches_oracle_on_small_trees():
    for seed in range(1, 6):
        config = TreeConfig(
            seed=seed,
            entity_count=10,
            closure_band=None,
            require_all_relations=False,
        )
        tree = generate_tree(config)
        got = {a.key() for a in tree.closure.atoms()}
        assert got == closure_oracle(tree.theory), f"seed {seed}"


def test_closure_under_no_distinctness_is_superset(example_theory, example_closure):
    loose = forward_closure(example_theory, DISTINCT_NONE)
    assert example_closure.atoms() <= loose.atoms()
    assert {a.key() for a in loose.atoms()} == closure_oracle(
        example_theory, DISTINCT_NONE
    )


def test_rule_bindings_match_oracle(example_theory):
    facts = materialize_inverses(example_theory, example_theory.fact_atoms())
    for label in ("L1", "L5", "L9"):
        rule = next(r for r in example_theory.rules if r.label == label)
        got = match_rule(rule, facts, DISTINCT_ALL)
        want = rule_bindings_oracle(example_theory, label)
        assert sorted(tuple(sorted(b.items())) for b in got) == sorted(
            tuple(sorted(b.items())) for b in want
        )


def test_every_derivation_replays_against_base_facts(example_theory, example_closure):
    base = materialize_inverses(example_theory, example_theory.fact_atoms())
    rules = {r.label: r for r in example_theory.rules}
    checked = 0
    for atom in example_closure.atoms():
        proofs = example_closure.proofs_for(atom)
        assert proofs, atom
        for proof in proofs:
            rule = rules[proof.rule]
            binding = dict(proof.binding)
            for body_atom in rule.body:
                grounded = Atom(
                    body_atom.rel,
                    tuple(Const(binding[t.name]) for t in body_atom.args),
                )
                assert grounded in base
            head = Atom(
                rule.head.rel, tuple(Const(binding[t.name]) for t in rule.head.args)
            )
            assert head == atom
            checked += 1
    assert checked >= len(example_closure.atoms())


def test_classify_agrees_with_proof_search(example_theory, example_closure):
    entities = [e.id for e in example_theory.entities]
    positives = list(example_closure.ordered_atoms())[:40]
    for atom in positives:
        assert classify_hypothesis(example_theory, atom, example_closure)
        assert classify_by_proof(example_theory, atom)
    for atom in positives[:10]:
        other = next(
            e
            for e in entities
            if e != atom.args[1].ref
            and Atom(atom.rel, (atom.args[0], Const(e))) not in example_closure.atoms()
        )
        negative = Atom(atom.rel, (atom.args[0], Const(other)))
        assert not classify_hypothesis(example_theory, negative, example_closure)
        assert not classify_by_proof(example_theory, negative)


def test_classify_rejects_unknown_symbols(example_theory):
    with pytest.raises(UnknownSymbol):
        classify_hypothesis(example_theory, ground("nonRelation", "david", "lea"))
    entity = example_theory.entities[0].id
    with pytest.raises(UnknownSymbol):
        classify_hypothesis(example_theory, ground("auntOf", entity, "nobody"))


def test_abduce_returns_replayable_proofs(example_theory, example_closure):
    base = materialize_inverses(example_theory, example_theory.fact_atoms())
    rules = {r.label: r for r in example_theory.rules}
    label_of = {f.atom: f.label for f in example_theory.facts}
    for atom in list(example_closure.ordered_atoms())[:30]:
        proofs = abduce_proofs(example_theory, atom, example_closure)
        assert proofs
        for proof in proofs:
            rule = rules[proof.rule]
            binding = dict(proof.binding)
            head = Atom(
                rule.head.rel,
                tuple(Const(binding[t.name]) for t in rule.head.args),
            )
            assert head == atom
            for label in proof.facts:
                assert any(f.label == label for f in example_theory.facts)
            # every body atom is a base fact or the inverse twin of one
            for body_atom in rule.body:
                grounded = Atom(
                    body_atom.rel,
                    tuple(Const(binding[t.name]) for t in body_atom.args),
                )
                assert grounded in base


def test_abduce_on_underivable_atom_is_empty(example_theory, example_closure):
    entities = [e.id for e in example_theory.entities]
    atom = ground("auntOf", entities[0], entities[0])
    assert abduce_proofs(example_theory, atom, example_closure) == []


def test_chain_normalize_every_kinship_rule(example_theory):
    parent = example_theory.parent_relation().name
    inverse = example_theory.inverse_relation(parent).name
    genders = {r.name for r in example_theory.gender_relations()}
    for rule in example_theory.rules:
        chain = chain_normalize(example_theory, rule)
        assert chain.head.rel == rule.head.rel
        body_rels = [a.rel for a in chain.body]
        assert body_rels[-1] in genders
        assert set(body_rels[:-1]) <= {parent, inverse}
        assert len(chain.body) == len(rule.body)


def test_chain_normalized_rules_preserve_the_closure(example_theory, example_closure):
    chained = tuple(chain_normalize(example_theory, r) for r in example_theory.rules)
    twin = Theory(
        relations=example_theory.relations,
        entities=example_theory.entities,
        facts=example_theory.facts,
        rules=chained,
    )
    assert forward_closure(twin).atoms() == example_closure.atoms()


def test_chain_normalize_rejects_non_chain_rule(example_theory):
    bad = Rule(
        "L99",
        (pattern("parentOf", "A", "B"), pattern("parentOf", "A", "C")),
        pattern("auntOf", "B", "C"),
    )
    with pytest.raises(NotChainable):
        chain_normalize(example_theory, bad)


def test_template_shape_and_candidate_count(example_theory):
    template = make_template(example_theory, "auntOf")
    assert template.head_rel == "auntOf"
    assert template.length == 3
    candidates = enumerate_fillings(example_theory, template)
    assert len(candidates) == 2**3 * 2
    assert len({canonicalize_rule(r) for r in candidates}) == len(candidates)

    short = make_template(example_theory, "motherOf")
    assert short.length == 1
    assert len(enumerate_fillings(example_theory, short)) == 2 * 2


def test_induce_recovers_every_defining_rule(example_theory, example_closure):
    by_head = {r.head.rel: r for r in example_theory.rules}
    for rel in derived_relations(example_theory):
        targets = example_closure.atoms_of(rel)
        if not targets:
            continue
        template = make_template(example_theory, rel)
        result = induce_rule(example_theory, targets, template)
        want = canonicalize_rule(chain_normalize(example_theory, by_head[rel]))
        assert result.exact, rel
        assert result.canonical == want, rel
        assert result.support == len(targets)


def test_induce_requires_targets(example_theory):
    template = make_template(example_theory, "auntOf")
    with pytest.raises(NoTargetFacts):
        induce_rule(example_theory, [], template)


def test_small_hand_built_tree_closure():
    # two parents, two children; brother/sister facts are forced
    from symtree.kb import Entity

    entities = [Entity(x, x.upper()) for x in ("m", "f", "s", "d")]
    genders = [("m", "male"), ("f", "female"), ("s", "male"), ("d", "female")]
    edges = [("m", "s"), ("m", "d"), ("f", "s"), ("f", "d")]
    theory = build_theory(entities, genders, edges)
    closure = forward_closure(theory)
    keys = {a.key() for a in closure.atoms()}
    assert ("brotherOf", "s", "d") in keys
    assert ("sisterOf", "d", "s") in keys
    assert ("motherOf", "f", "s") in keys
    assert ("fatherOf", "m", "d") in keys
    assert ("sonOf", "s", "m") in keys
    assert ("daughterOf", "d", "f") in keys
    assert keys == closure_oracle(theory)
