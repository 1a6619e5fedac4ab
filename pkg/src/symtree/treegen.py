"""Random family-tree generation under the closed-world kinship schema.

Trees grow top-down, one generation per level: a founding couple has
children, each child may pair up with a fresh spouse, couples have
children in turn, until the entity budget is spent.  A draw that cannot
spend the exact budget, exceeds the depth limit, or (by default) leaves
some derived relation without a single instance is discarded and
retried with a reseeded stream; a bounded number of restarts guards
against infeasible configurations.

Negative examples corrupt one argument of a sampled inferred fact and
are checked against the closed world, so every negative is genuinely
False under the CWA.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, asdict
from typing import Iterable

from .errors import ExhaustedCorruptions, InfeasibleConfig
from .kb import DISTINCT_ALL, Atom, Const, Entity, Theory, sort_atoms
from .reasoner import Closure, forward_closure
from . import schema


@dataclass(frozen=True)
class TreeConfig:
    seed: int = 1
    entity_count: int = 26
    max_depth: int = 5
    children_min: int = 1
    children_max: int = 3
    couple_probability: float = 0.5
    negative_count: int | None = None  # None: match the positive count
    require_all_relations: bool = True
    closure_band: tuple[int, int] | None = (240, 360)
    distinctness: str = DISTINCT_ALL
    max_restarts: int = 200

    def validate(self) -> None:
        if self.entity_count < 2:
            raise InfeasibleConfig("need at least a founding couple")
        if self.max_depth < 1:
            raise InfeasibleConfig("max_depth must be at least 1")
        if not (1 <= self.children_min <= self.children_max):
            raise InfeasibleConfig("children range must satisfy 1 <= min <= max")
        if not 0.0 <= self.couple_probability <= 1.0:
            raise InfeasibleConfig("couple_probability must be within [0, 1]")
        if self.closure_band is not None:
            low, high = self.closure_band
            if low > high:
                raise InfeasibleConfig("closure_band must be (low, high) with low <= high")

    def to_dict(self) -> dict:
        doc = asdict(self)
        if self.closure_band is not None:
            doc["closure_band"] = list(self.closure_band)
        return doc


@dataclass
class TreeInstance:
    theory: Theory
    closure: Closure
    config: TreeConfig
    depth: int

    def positives(self) -> list[Atom]:
        return self.closure.ordered_atoms()


@dataclass(frozen=True)
class Question:
    """One benchmark item: a ground atom with its closed-world label."""

    id: str
    atom: Atom
    label: bool


@dataclass
class DatasetInstance:
    tree: TreeInstance
    questions: list[Question]

    def to_dict(self) -> dict:
        clo = self.tree.closure
        items = []
        for q in self.questions:
            entry = {
                "id": q.id,
                "rel": q.atom.rel,
                "args": [t.ref for t in q.atom.args],
                "label": q.label,
                "proofs": [
                    {"rule": p.rule, "facts": list(p.facts), "binding": dict(p.binding)}
                    for p in (clo.proofs_for(q.atom) if q.label else ())
                ],
            }
            items.append(entry)
        return {
            "version": 1,
            "source": "treegen",
            "seed": self.tree.config.seed,
            "config": self.tree.config.to_dict(),
            "depth": self.tree.depth,
            "theory": self.tree.theory.to_dict(),
            "questions": items,
        }


class _NamePool:
    def __init__(self, rng: random.Random):
        self._rng = rng
        self._female = list(schema.FEMALE_NAMES)
        self._male = list(schema.MALE_NAMES)
        self._serial = 0

    def draw(self, gender: str) -> str:
        pool = self._female if gender == schema.FEMALE else self._male
        if pool:
            return pool.pop(self._rng.randrange(len(pool)))
        self._serial += 1
        return f"Person{self._serial}"


def generate_tree(config: TreeConfig) -> TreeInstance:
    """Sample a tree satisfying the config, restarting on infeasible draws."""
    config.validate()
    for attempt in range(config.max_restarts):
        # integer-only seed derivation: stable across processes
        rng = random.Random(1_000_003 * config.seed + attempt)
        built = _attempt(rng, config)
        if built is None:
            continue
        theory, depth = built
        closure = forward_closure(theory, config.distinctness)
        if config.require_all_relations:
            present = {a.rel for a in closure.derivations}
            if any(r.name not in present for r in theory.derived_relations()):
                continue
        if config.closure_band is not None:
            low, high = config.closure_band
            if not low <= len(closure.derivations) <= high:
                continue
        return TreeInstance(theory=theory, closure=closure, config=config, depth=depth)
    raise InfeasibleConfig(
        f"no feasible tree for seed {config.seed} within {config.max_restarts} restarts"
    )


def _attempt(rng: random.Random, config: TreeConfig) -> tuple[Theory, int] | None:
    pool = _NamePool(rng)
    genders: list[tuple[str, str]] = []
    gender_of: dict[str, str] = {}
    edges: list[tuple[str, str]] = []
    entities: list[Entity] = []
    levels: dict[str, int] = {}

    def new_person(gender: str, level: int) -> str:
        ref = f"p{len(entities) + 1}"
        entities.append(Entity(ref, pool.draw(gender)))
        genders.append((ref, gender))
        gender_of[ref] = gender
        levels[ref] = level
        return ref

    budget = config.entity_count
    mother = new_person(schema.FEMALE, 0)
    father = new_person(schema.MALE, 0)
    budget -= 2
    couples: list[tuple[str, str]] = [(mother, father)]

    level = 0
    while couples and budget > 0 and level < config.max_depth:
        children: list[str] = []
        for pair in couples:
            count = rng.randint(config.children_min, config.children_max)
            for _ in range(count):
                if budget == 0:
                    break
                gender = rng.choice((schema.FEMALE, schema.MALE))
                child = new_person(gender, level + 1)
                budget -= 1
                edges.append((pair[0], child))
                edges.append((pair[1], child))
                children.append(child)
        next_couples: list[tuple[str, str]] = []
        for child in children:
            if budget == 0:
                break
            if level + 1 < config.max_depth and rng.random() < config.couple_probability:
                spouse_gender = schema.MALE if gender_of[child] == schema.FEMALE else schema.FEMALE
                spouse = new_person(spouse_gender, level + 1)
                budget -= 1
                if gender_of[child] == schema.FEMALE:
                    next_couples.append((child, spouse))
                else:
                    next_couples.append((spouse, child))
        couples = next_couples
        level += 1

    if budget != 0:
        return None
    depth = max(levels.values())
    if depth > config.max_depth:
        return None
    theory = schema.build_theory(entities, genders, edges)
    return theory, depth


def sample_negatives(
    tree: TreeInstance,
    count: int | None = None,
    rng: random.Random | None = None,
) -> list[Atom]:
    """Closed-world negatives: corrupt one argument of a sampled positive.

    Each negative keeps the relation of its source positive, differs from it
    in exactly one argument, lies outside basic facts and closure, and the
    batch contains no duplicates.
    """
    positives = tree.positives()
    if count is None:
        count = len(positives)
    if rng is None:
        rng = random.Random(1_000_003 * tree.config.seed + 999_983)
    closed_world = tree.theory.fact_atoms() | tree.closure.atoms()
    ids = [e.id for e in tree.theory.entities]
    negatives: list[Atom] = []
    seen: set[Atom] = set()
    attempts = 0
    limit = max(1000, 200 * count)
    while len(negatives) < count:
        attempts += 1
        if attempts > limit:
            raise ExhaustedCorruptions(
                f"could not sample {count} negatives within {limit} attempts"
            )
        source = positives[rng.randrange(len(positives))]
        position = rng.randrange(len(source.args))
        replacement = ids[rng.randrange(len(ids))]
        args = list(source.args)
        if args[position].ref == replacement:
            continue
        args[position] = Const(replacement)
        corrupted = Atom(source.rel, tuple(args))
        if corrupted in closed_world or corrupted in seen:
            continue
        negatives.append(corrupted)
        seen.add(corrupted)
    return negatives


def assemble_dataset(config: TreeConfig) -> DatasetInstance:
    """Generate a tree and its question set (positives first, then negatives)."""
    tree = generate_tree(config)
    rng = random.Random(1_000_003 * config.seed + 999_983)
    negatives = sample_negatives(tree, config.negative_count, rng)
    questions: list[Question] = []
    for atom in tree.positives():
        questions.append(Question(id=f"q{len(questions) + 1}", atom=atom, label=True))
    for atom in negatives:
        questions.append(Question(id=f"q{len(questions) + 1}", atom=atom, label=False))
    return DatasetInstance(tree=tree, questions=questions)


def dataset_from_dict(doc: dict) -> DatasetInstance:
    """Rebuild a treegen dataset document (the closure is recomputed)."""
    if doc.get("version") != 1 or doc.get("source") != "treegen":
        raise InfeasibleConfig("not a treegen dataset document")
    cfg_doc = dict(doc["config"])
    if cfg_doc.get("closure_band") is not None:
        cfg_doc["closure_band"] = tuple(cfg_doc["closure_band"])
    config = TreeConfig(**cfg_doc)
    theory = Theory.from_dict(doc["theory"])
    closure = forward_closure(theory, config.distinctness)
    depth = int(doc.get("depth", 0))
    tree = TreeInstance(theory=theory, closure=closure, config=config, depth=depth)
    questions = [
        Question(
            id=q["id"],
            atom=Atom(q["rel"], tuple(Const(a) for a in q["args"])),
            label=bool(q["label"]),
        )
        for q in doc["questions"]
    ]
    return DatasetInstance(tree=tree, questions=questions)
