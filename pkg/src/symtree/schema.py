"""The closed-world kinship schema and its worked-example tree.

The schema is fixed: two unary gender relations, one binary parent
relation plus its inverse twin, and 28 derived relations defined by
depth-0 Horn rules L1..L28 (female/male variants of 14 body shapes).
Rule bodies reference only the base relations, so the closure of any
tree is computable in one stratum.
"""

from __future__ import annotations

from .errors import SchemaViolation
from .kb import (
    KIND_BASE,
    KIND_DERIVED,
    KIND_INVERSE,
    Atom,
    Entity,
    Fact,
    Relation,
    Rule,
    Theory,
    Var,
    ground,
)

FEMALE = "female"
MALE = "male"
PARENT = "parentOf"
INVERSE_PARENT = "inverse_parentOf"

# Derived relations in rule order: (name, gender of the head subject).
DERIVED_ROWS: tuple[tuple[str, str], ...] = (
    ("sisterOf", FEMALE),
    ("brotherOf", MALE),
    ("motherOf", FEMALE),
    ("fatherOf", MALE),
    ("grandmotherOf", FEMALE),
    ("grandfatherOf", MALE),
    ("greatGrandmotherOf", FEMALE),
    ("greatGrandfatherOf", MALE),
    ("auntOf", FEMALE),
    ("uncleOf", MALE),
    ("greatAuntOf", FEMALE),
    ("greatUncleOf", MALE),
    ("secondAuntOf", FEMALE),
    ("secondUncleOf", MALE),
    ("girlCousinOf", FEMALE),
    ("boyCousinOf", MALE),
    ("girlSecondCousinOf", FEMALE),
    ("boySecondCousinOf", MALE),
    ("girlFirstCousinOnceRemovedOf", FEMALE),
    ("boyFirstCousinOnceRemovedOf", MALE),
    ("daughterOf", FEMALE),
    ("sonOf", MALE),
    ("granddaughterOf", FEMALE),
    ("grandsonOf", MALE),
    ("greatGranddaughterOf", FEMALE),
    ("greatGrandsonOf", MALE),
    ("nieceOf", FEMALE),
    ("nephewOf", MALE),
)

# Body shapes keyed by the female-variant rule number.  Each entry lists the
# parent atoms as (parent, child) variable pairs in presentation order; the
# gender atom always constrains the head subject A and is appended last.
_BODY_SHAPES: dict[int, tuple[tuple[tuple[str, str], ...], tuple[str, str]]] = {
    1: ((("B", "A"), ("B", "C")), ("A", "C")),
    3: ((("A", "B"),), ("A", "B")),
    5: ((("A", "B"), ("B", "C")), ("A", "C")),
    7: ((("A", "B"), ("B", "C"), ("C", "D")), ("A", "D")),
    9: ((("B", "A"), ("B", "C"), ("C", "D")), ("A", "D")),
    11: ((("B", "A"), ("B", "C"), ("C", "D"), ("D", "E")), ("A", "E")),
    13: ((("B", "A"), ("C", "B"), ("C", "D"), ("D", "E"), ("E", "F")), ("A", "F")),
    15: ((("B", "A"), ("C", "B"), ("C", "D"), ("D", "E")), ("A", "E")),
    17: ((("B", "A"), ("C", "B"), ("D", "C"), ("D", "E"), ("E", "F"), ("F", "G")), ("A", "G")),
    19: ((("B", "A"), ("C", "B"), ("D", "C"), ("D", "E"), ("E", "F")), ("A", "F")),
    21: ((("B", "A"),), ("A", "B")),
    23: ((("B", "A"), ("C", "B")), ("A", "C")),
    25: ((("B", "A"), ("C", "B"), ("D", "C")), ("A", "D")),
    27: ((("B", "A"), ("C", "B"), ("C", "D")), ("A", "D")),
}


def kinship_relations() -> dict[str, Relation]:
    relations: dict[str, Relation] = {
        FEMALE: Relation(FEMALE, 1, KIND_BASE),
        MALE: Relation(MALE, 1, KIND_BASE),
        PARENT: Relation(PARENT, 2, KIND_BASE),
        INVERSE_PARENT: Relation(INVERSE_PARENT, 2, KIND_INVERSE, inverse_of=PARENT),
    }
    for name, _gender in DERIVED_ROWS:
        relations[name] = Relation(name, 2, KIND_DERIVED)
    return relations


def kinship_rules() -> list[Rule]:
    rules: list[Rule] = []
    for index, (name, gender) in enumerate(DERIVED_ROWS, start=1):
        shape_key = index if index % 2 == 1 else index - 1
        pairs, head_args = _BODY_SHAPES[shape_key]
        body = tuple(Atom(PARENT, (Var(p), Var(c))) for p, c in pairs)
        body += (Atom(gender, (Var(head_args[0]),)),)
        head = Atom(name, (Var(head_args[0]), Var(head_args[1])))
        rules.append(Rule(label=f"L{index}", body=body, head=head))
    return rules


def build_theory(
    entities: list[Entity],
    genders: list[tuple[str, str]],
    edges: list[tuple[str, str]],
) -> Theory:
    """Assemble a kinship theory from gender assignments and parent edges.

    genders: (entity id, relation name) in fact order; edges: (parent id,
    child id) in fact order.  Facts are numbered F1.. with genders first,
    matching the presentation order used everywhere in the toolkit.
    """
    if len(genders) != len(entities):
        raise SchemaViolation("every entity needs exactly one gender fact")
    facts: list[Fact] = []
    for i, (ref, gender) in enumerate(genders, start=1):
        if gender not in (FEMALE, MALE):
            raise SchemaViolation(f"unknown gender relation {gender!r}")
        facts.append(Fact(f"F{i}", ground(gender, ref)))
    offset = len(genders)
    for j, (parent, child) in enumerate(edges, start=1):
        facts.append(Fact(f"F{offset + j}", ground(PARENT, parent, child)))
    return Theory(
        relations=kinship_relations(),
        entities=entities,
        facts=facts,
        rules=kinship_rules(),
    )


# --------------------------------------------------------------------------
# worked example: a 27-person tree used by docs, demos and golden tests
# --------------------------------------------------------------------------

_EXAMPLE_GENDERS: tuple[tuple[str, str], ...] = (
    ("Laura", FEMALE), ("Elias", MALE), ("Fabian", MALE), ("Claudia", FEMALE),
    ("Elena", FEMALE), ("Thomas", MALE), ("Amelie", FEMALE), ("Luisa", FEMALE),
    ("Patrick", MALE), ("Emilia", FEMALE), ("Samuel", MALE), ("Alina", FEMALE),
    ("Jonathan", MALE), ("Philipp", MALE), ("Nico", MALE), ("David", MALE),
    ("Emily", FEMALE), ("Konstantin", MALE), ("Florian", MALE), ("Helga", FEMALE),
    ("Nina", FEMALE), ("Lea", FEMALE), ("Felix", MALE), ("Leonie", FEMALE),
    ("Stefan", MALE), ("Gabriel", MALE), ("Tobias", MALE),
)

_EXAMPLE_EDGES: tuple[tuple[str, str], ...] = (
    ("Laura", "Fabian"), ("Laura", "Felix"), ("Laura", "Claudia"),
    ("Elias", "Fabian"), ("Elias", "Felix"), ("Elias", "Claudia"),
    ("Alina", "David"), ("Alina", "Lea"),
    ("Nico", "David"), ("Nico", "Lea"),
    ("Emily", "Nico"), ("Konstantin", "Nico"),
    ("Fabian", "Thomas"), ("Fabian", "Amelie"),
    ("Nina", "Tobias"),
    ("Leonie", "Emily"), ("Stefan", "Emily"),
    ("Gabriel", "Tobias"),
    ("Elena", "Thomas"), ("Elena", "Amelie"),
    ("Thomas", "Helga"), ("Thomas", "Nina"), ("Thomas", "Patrick"),
    ("Luisa", "Helga"), ("Luisa", "Nina"), ("Luisa", "Patrick"),
    ("Patrick", "Samuel"), ("Patrick", "Alina"), ("Patrick", "Jonathan"),
    ("Patrick", "Philipp"), ("Patrick", "Florian"),
    ("Emilia", "Samuel"), ("Emilia", "Alina"), ("Emilia", "Jonathan"),
    ("Emilia", "Philipp"), ("Emilia", "Florian"),
)


def example_tree() -> Theory:
    """The fixed 27-person, 36-edge family tree used as the worked example."""
    entities = [Entity(name, name) for name, _ in _EXAMPLE_GENDERS]
    return build_theory(entities, list(_EXAMPLE_GENDERS), list(_EXAMPLE_EDGES))


# --------------------------------------------------------------------------
# id-symbol numbering presets
# --------------------------------------------------------------------------

# Two deliberately different published numberings exist; both ship.
#   deduction:  r1=male, r2=female, r3=parentOf, k-th derived head -> r(k+3).
#               The inverse relation never surfaces in deduction prompts, so
#               it gets the next free slot (r32) to keep the map total.
#   induction:  r1=parentOf, k-th derived head -> r(k+1), r43=male,
#               r44=female, r45=inverse of the parent relation.
ID_PRESETS: dict[str, dict] = {
    "deduction": {MALE: "r1", FEMALE: "r2", PARENT: "r3", INVERSE_PARENT: "r32", "derived_offset": 3},
    "induction": {MALE: "r43", FEMALE: "r44", PARENT: "r1", INVERSE_PARENT: "r45", "derived_offset": 1},
}

# Default preset per task, matching published usage.
TASK_PRESETS = {"deduce": "deduction", "induce": "induction", "abduce": "induction"}


# --------------------------------------------------------------------------
# name pools for the generator
# --------------------------------------------------------------------------

FEMALE_NAMES: tuple[str, ...] = (
    "Laura", "Claudia", "Elena", "Amelie", "Luisa", "Emilia", "Alina", "Emily",
    "Helga", "Nina", "Lea", "Leonie", "Anna", "Clara", "Eva", "Greta", "Ida",
    "Karla", "Mara", "Olivia", "Paula", "Rosa", "Sophie", "Theresa", "Vera",
    "Wanda", "Xenia", "Zoe", "Marie", "Johanna", "Frieda", "Charlotte",
    "Mathilda", "Ronja", "Selma", "Tilda", "Una", "Viktoria", "Yara", "Elsa",
)

MALE_NAMES: tuple[str, ...] = (
    "Elias", "Fabian", "Thomas", "Patrick", "Samuel", "Jonathan", "Philipp",
    "Nico", "David", "Konstantin", "Florian", "Felix", "Stefan", "Gabriel",
    "Tobias", "Ben", "Daniel", "Finn", "Henry", "Jakob", "Liam", "Noah",
    "Oskar", "Paul", "Rafael", "Simon", "Ulrich", "Viktor", "Wilhelm",
    "Yannick", "Anton", "Bruno", "Carl", "Emil", "Gustav", "Hannes", "Igor",
    "Jonas", "Karl", "Lennard",
)
