"""Generator invariants, determinism, and frozen reference values."""

from __future__ import annotations

import pytest

from symtree.errors import ExhaustedCorruptions, InfeasibleConfig
from symtree.kb import KIND_DERIVED
from symtree.treegen import (
    DatasetInstance,
    TreeConfig,
    assemble_dataset,
    dataset_from_dict,
    generate_tree,
    sample_negatives,
)

# closure sizes and tree depths for the default configuration, seeds 1..10
FROZEN_SIZES = [309, 357, 282, 330, 314, 294, 244, 324, 284, 332]
FROZEN_DEPTHS = [4, 4, 4, 3, 4, 3, 5, 4, 4, 4]


def test_generation_is_deterministic():
    a = assemble_dataset(TreeConfig(seed=3))
    b = assemble_dataset(TreeConfig(seed=3))
    assert a.to_dict() == b.to_dict()


def test_different_seeds_give_different_trees():
    a = generate_tree(TreeConfig(seed=1))
    b = generate_tree(TreeConfig(seed=2))
    assert a.theory.to_dict() != b.theory.to_dict()


def test_frozen_sizes_and_depths(default_datasets):
    sizes = [len(default_datasets[s].tree.closure.atoms()) for s in range(1, 11)]
    depths = [default_datasets[s].tree.depth for s in range(1, 11)]
    assert sizes == FROZEN_SIZES
    assert depths == FROZEN_DEPTHS


def test_default_trees_satisfy_config_bounds(default_datasets):
    for seed, dataset in default_datasets.items():
        tree = dataset.tree
        config = tree.config
        assert len(tree.theory.entities) == config.entity_count == 26
        assert tree.depth <= config.max_depth == 5
        lo, hi = config.closure_band
        assert lo <= len(tree.closure.atoms()) <= hi, seed


def test_default_trees_cover_every_derived_relation(default_datasets):
    for seed in (1, 2, 3):
        tree = default_datasets[seed].tree
        derived = {
            name
            for name, rel in tree.theory.relations.items()
            if rel.kind == KIND_DERIVED
        }
        present = {a.rel for a in tree.closure.atoms()}
        assert derived <= present, seed


def test_questions_are_balanced_and_disjoint(default_datasets):
    for seed, dataset in default_datasets.items():
        positives = [q for q in dataset.questions if q.label]
        negatives = [q for q in dataset.questions if not q.label]
        closure_atoms = dataset.tree.closure.atoms()
        assert len(positives) == len(negatives)
        assert len(positives) == len(closure_atoms)
        assert {q.atom for q in positives} == closure_atoms
        basics = set(dataset.tree.theory.fact_atoms())
        for q in negatives:
            assert q.atom not in closure_atoms
            assert q.atom not in basics
        assert len({q.atom for q in negatives}) == len(negatives)
        # ids run q1.. with positives first
        assert [q.id for q in dataset.questions] == [
            f"q{i}" for i in range(1, len(dataset.questions) + 1)
        ]
        assert dataset.questions[0].label is True
        assert dataset.questions[-1].label is False


def test_negatives_are_single_argument_corruptions(default_datasets):
    dataset = default_datasets[1]
    positives = {q.atom for q in dataset.questions if q.label}
    for q in dataset.questions:
        if q.label:
            continue
        assert any(
            p.rel == q.atom.rel
            and sum(a != b for a, b in zip(p.args, q.atom.args)) == 1
            for p in positives
        ), q.atom


def test_sample_negatives_custom_count(default_datasets):
    tree = default_datasets[1].tree
    negatives = sample_negatives(tree, count=7)
    assert len(negatives) == 7
    closure_atoms = tree.closure.atoms()
    for atom in negatives:
        assert atom not in closure_atoms


def test_dataset_round_trip(default_datasets):
    doc = default_datasets[2].to_dict()
    assert doc["version"] == 1
    assert doc["source"] == "treegen"
    back = dataset_from_dict(doc)
    assert isinstance(back, DatasetInstance)
    assert back.to_dict() == doc


def test_infeasible_configs_fail_fast():
    with pytest.raises(InfeasibleConfig):
        generate_tree(TreeConfig(entity_count=1))
    with pytest.raises(InfeasibleConfig):
        generate_tree(TreeConfig(children_min=3, children_max=1))
    with pytest.raises(InfeasibleConfig):
        generate_tree(
            TreeConfig(entity_count=6, closure_band=(500, 600), max_restarts=5)
        )


def test_small_tree_without_band_is_feasible():
    tree = generate_tree(
        TreeConfig(seed=9, entity_count=8, closure_band=None, require_all_relations=False)
    )
    assert len(tree.theory.entities) == 8
    assert tree.depth <= 5


def test_exhausted_corruptions_surface():
    tree = generate_tree(
        TreeConfig(seed=4, entity_count=8, closure_band=None, require_all_relations=False)
    )
    with pytest.raises(ExhaustedCorruptions):
        sample_negatives(tree, count=10_000)
