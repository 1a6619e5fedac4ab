"""Bijective symbol renamings that decouple semantics from structure.

A SymbolMap renames relation names and/or entity display names while
leaving labels, ids and logical structure untouched, so closures commute
with renaming and every experiment stays replayable from the serialized
map.  Modes:

  identity             no-op baseline (the plain semantic setting)
  id-symbols           r1, r2, ... under one of the published numbering
                       presets; optionally e1.. for entities too
  garbled              random 4-8 letter lowercase strings per relation
  single-token         short tokenizer-friendly fragments from a wordlist
  counter-commonsense  permute semantic relation names onto each other
                       (no derived relation keeps its name)
  entity-ids           e1, e2, ... for entities only
"""

from __future__ import annotations

import random
import string
from dataclasses import dataclass

from .errors import InfeasibleConfig, SchemaViolation, UnmappedName
from .kb import KIND_BASE, KIND_DERIVED, KIND_INVERSE, Atom, Entity, Fact, Relation, Rule, Theory, label_number
from .schema import ID_PRESETS

MODES = ("identity", "id-symbols", "garbled", "single-token", "counter-commonsense", "entity-ids")

# Short subword fragments for the single-token mode; callers may pass their
# own list.  Deliberately semantics-free.
DEFAULT_SINGLE_TOKENS: tuple[str, ...] = (
    "iance", "inely", "atis", "lesai", "ntoea", "yufevh", "nyheg", "phnd",
    "uitka", "reib", "icers", "indr", "antly", "enthe", "orith", "ianed",
    "elsey", "ounde", "astin", "ormer", "illin", "anced", "entia", "ropri",
    "essar", "ictio", "ploye", "nganis", "ertain", "omple", "indin", "ateve",
    "erest", "ingly", "ssion", "ediate",
)


@dataclass(frozen=True)
class SymbolMap:
    mode: str
    seed: int
    relation_map: dict[str, str] | None = None
    entity_map: dict[str, str] | None = None

    def __post_init__(self) -> None:
        for mapping, what in ((self.relation_map, "relation"), (self.entity_map, "entity")):
            if mapping is None:
                continue
            values = list(mapping.values())
            if len(set(values)) != len(values):
                raise SchemaViolation(f"{what} map is not injective")

    def rename_relation(self, name: str) -> str:
        if self.relation_map is None:
            return name
        if name not in self.relation_map:
            raise UnmappedName(f"relation {name!r} is outside the map's domain")
        return self.relation_map[name]

    def rename_entity(self, name: str) -> str:
        if self.entity_map is None:
            return name
        if name not in self.entity_map:
            raise UnmappedName(f"entity {name!r} is outside the map's domain")
        return self.entity_map[name]

    def inverse(self) -> "SymbolMap":
        return SymbolMap(
            mode=f"inverse({self.mode})",
            seed=self.seed,
            relation_map={v: k for k, v in self.relation_map.items()} if self.relation_map else None,
            entity_map={v: k for k, v in self.entity_map.items()} if self.entity_map else None,
        )

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "mode": self.mode,
            "seed": self.seed,
            "relations": self.relation_map,
            "entities": self.entity_map,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SymbolMap":
        if doc.get("version") != 1:
            raise SchemaViolation(f"unsupported symbol map version {doc.get('version')!r}")
        return cls(
            mode=doc["mode"],
            seed=int(doc.get("seed", 0)),
            relation_map=dict(doc["relations"]) if doc.get("relations") else None,
            entity_map=dict(doc["entities"]) if doc.get("entities") else None,
        )


def build_symbol_map(
    theory: Theory,
    mode: str,
    seed: int = 0,
    preset: str = "deduction",
    wordlist: tuple[str, ...] | None = None,
    include_genders: bool = True,
    rename_entities: bool = False,
) -> SymbolMap:
    """Construct a renaming for the theory's symbols.

    preset selects the id-symbols numbering; include_genders controls whether
    counter-commonsense also swaps the gender names; rename_entities extends
    id-symbols with an e1.. entity map (entity-ids mode does entities only).
    """
    if mode not in MODES:
        raise InfeasibleConfig(f"unknown transform mode {mode!r}")
    rng = random.Random(1_000_003 * seed + hashless(mode))

    if mode == "identity":
        return SymbolMap(mode=mode, seed=seed)

    if mode == "entity-ids":
        entity_map = {e.name: f"e{i}" for i, e in enumerate(theory.entities, start=1)}
        return SymbolMap(mode=mode, seed=seed, entity_map=entity_map)

    if mode == "id-symbols":
        relation_map = _preset_map(theory, preset)
        entity_map = None
        if rename_entities:
            entity_map = {e.name: f"e{i}" for i, e in enumerate(theory.entities, start=1)}
        return SymbolMap(mode=mode, seed=seed, relation_map=relation_map, entity_map=entity_map)

    if mode == "garbled":
        return SymbolMap(mode=mode, seed=seed, relation_map=_garbled_map(theory, rng))

    if mode == "single-token":
        tokens = tuple(wordlist) if wordlist is not None else DEFAULT_SINGLE_TOKENS
        return SymbolMap(mode=mode, seed=seed, relation_map=_wordlist_map(theory, tokens, rng))

    return SymbolMap(
        mode=mode, seed=seed, relation_map=_counter_commonsense_map(theory, rng, include_genders)
    )


def hashless(text: str) -> int:
    """Process-stable small integer from a string (hash() is randomized)."""
    value = 0
    for ch in text:
        value = (value * 131 + ord(ch)) % 1_000_000_007
    return value


def _preset_map(theory: Theory, preset: str) -> dict[str, str]:
    spec = ID_PRESETS.get(preset)
    if spec is None:
        raise InfeasibleConfig(f"unknown id-symbols preset {preset!r}")
    mapping: dict[str, str] = {}
    for name, rel in theory.relations.items():
        if rel.kind != KIND_DERIVED:
            if name not in spec:
                raise UnmappedName(f"preset {preset!r} does not cover relation {name!r}")
            mapping[name] = spec[name]
    offset = spec["derived_offset"]
    for rule in sorted(theory.rules, key=lambda r: label_number(r.label)):
        mapping[rule.head.rel] = f"r{label_number(rule.label) + offset}"
    return mapping


def _garbled_map(theory: Theory, rng: random.Random) -> dict[str, str]:
    taken = set(theory.relations) | {e.name for e in theory.entities}
    mapping: dict[str, str] = {}
    for name in theory.relations:
        while True:
            token = "".join(rng.choice(string.ascii_lowercase) for _ in range(rng.randint(4, 8)))
            if token not in taken:
                break
        taken.add(token)
        mapping[name] = token
    return mapping


def _wordlist_map(theory: Theory, tokens: tuple[str, ...], rng: random.Random) -> dict[str, str]:
    if len(set(tokens)) != len(tokens):
        raise InfeasibleConfig("single-token wordlist contains duplicates")
    names = list(theory.relations)
    if len(tokens) < len(names):
        raise InfeasibleConfig(
            f"single-token wordlist has {len(tokens)} entries for {len(names)} relations"
        )
    drawn = rng.sample(list(tokens), len(names))
    return dict(zip(names, drawn))


def _counter_commonsense_map(
    theory: Theory, rng: random.Random, include_genders: bool
) -> dict[str, str]:
    """Permute names within arity classes; derived relations never stay put."""
    binary = [
        name
        for name, rel in theory.relations.items()
        if rel.arity == 2 and rel.kind in (KIND_BASE, KIND_DERIVED)
    ]
    # Sattolo's algorithm: one full cycle, hence no fixed points at all.
    images = list(binary)
    for i in range(len(images) - 1, 0, -1):
        j = rng.randrange(i)
        images[i], images[j] = images[j], images[i]
    mapping = dict(zip(binary, images))

    genders = [r.name for r in theory.gender_relations()]
    if include_genders and len(genders) == 2:
        mapping[genders[0]], mapping[genders[1]] = genders[1], genders[0]
    else:
        for g in genders:
            mapping[g] = g

    for name, rel in theory.relations.items():
        if rel.kind == KIND_INVERSE:
            mapping[name] = f"inverse_{mapping[rel.inverse_of]}"
    return mapping


def apply_map(theory: Theory, smap: SymbolMap) -> Theory:
    """Transport a theory across a renaming; labels and entity ids survive."""
    relations: dict[str, Relation] = {}
    for name, rel in theory.relations.items():
        new_name = smap.rename_relation(name)
        inverse_of = smap.rename_relation(rel.inverse_of) if rel.inverse_of else None
        relations[new_name] = Relation(new_name, rel.arity, rel.kind, inverse_of)
    entities = [Entity(e.id, smap.rename_entity(e.name)) for e in theory.entities]
    facts = [Fact(f.label, Atom(smap.rename_relation(f.atom.rel), f.atom.args)) for f in theory.facts]
    rules = [
        Rule(
            r.label,
            tuple(Atom(smap.rename_relation(a.rel), a.args) for a in r.body),
            Atom(smap.rename_relation(r.head.rel), r.head.args),
        )
        for r in theory.rules
    ]
    return Theory(relations=relations, entities=entities, facts=facts, rules=rules)


def apply_map_to_atoms(atoms, smap: SymbolMap) -> set[Atom]:
    """Rename the relation names of ground atoms (entity ids are untouched)."""
    return {Atom(smap.rename_relation(a.rel), a.args) for a in atoms}
