"""Independent brute-force oracle for rule closures.

Deliberately shares nothing with symtree.reasoner: facts are plain
(relation, args) tuples and matching is a nested loop over entity
assignments, one variable at a time, checking every body atom as soon
as its variables are assigned.  Logically this enumerates all entity
tuples; the early checks only skip assignments that are already dead,
so the result set is identical to full enumeration.
"""

from __future__ import annotations

GroundAtom = tuple  # (relation, arg, ...) as plain strings


def theory_to_tuples(theory) -> tuple[list[str], set[GroundAtom], list[dict]]:
    """Project a Theory onto primitive structures the oracle works with."""
    entities = [e.id for e in theory.entities]
    facts: set[GroundAtom] = set()
    for fact in theory.facts:
        facts.add((fact.atom.rel, *[t.ref for t in fact.atom.args]))
    # inverse twins, read straight off the relation table
    for rel in theory.relations.values():
        if rel.kind == "inverse" and rel.inverse_of:
            for atom in list(facts):
                if atom[0] == rel.inverse_of and len(atom) == 3:
                    facts.add((rel.name, atom[2], atom[1]))
    rules = []
    for rule in theory.rules:
        body = []
        seen_vars: list[str] = []
        for atom in rule.body:
            names = [t.name for t in atom.args]
            body.append((atom.rel, tuple(names)))
            for n in names:
                if n not in seen_vars:
                    seen_vars.append(n)
        head_vars = tuple(t.name for t in rule.head.args)
        rules.append({"label": rule.label, "vars": seen_vars, "body": body, "head": (rule.head.rel, head_vars)})
    return entities, facts, rules


def closure_oracle(theory, distinctness: str = "all-vars-pairwise-distinct") -> set[GroundAtom]:
    """Every derivable ground atom, by exhaustive assignment enumeration."""
    entities, facts, rules = theory_to_tuples(theory)
    derived: set[GroundAtom] = set()
    for rule in rules:
        derived |= _rule_heads(rule, entities, facts, distinctness)
    return derived


def rule_bindings_oracle(theory, label: str, distinctness: str = "all-vars-pairwise-distinct") -> list[dict]:
    """All satisfying assignments of one rule, as variable->entity dicts."""
    entities, facts, rules = theory_to_tuples(theory)
    rule = next(r for r in rules if r["label"] == label)
    out: list[dict] = []
    _enumerate(rule, entities, facts, distinctness, 0, {}, lambda b: out.append(dict(b)))
    out.sort(key=lambda b: tuple(b[v] for v in sorted(b)))
    return out


def _rule_heads(rule, entities, facts, distinctness) -> set[GroundAtom]:
    heads: set[GroundAtom] = set()

    def emit(binding):
        rel, head_vars = rule["head"]
        if distinctness == "head-vars-distinct":
            vals = [binding[v] for v in dict.fromkeys(head_vars)]
            if len(set(vals)) != len(vals):
                return
        heads.add((rel, *[binding[v] for v in head_vars]))

    _enumerate(rule, entities, facts, distinctness, 0, {}, emit)
    return heads


def _enumerate(rule, entities, facts, distinctness, index, binding, emit) -> None:
    variables = rule["vars"]
    if index == len(variables):
        emit(binding)
        return
    var = variables[index]
    for ent in entities:
        if distinctness == "all-vars-pairwise-distinct" and ent in binding.values():
            continue
        binding[var] = ent
        if _partial_ok(rule, binding, facts):
            _enumerate(rule, entities, facts, distinctness, index + 1, binding, emit)
        del binding[var]


def _partial_ok(rule, binding, facts) -> bool:
    for rel, names in rule["body"]:
        if all(n in binding for n in names):
            if (rel, *[binding[n] for n in names]) not in facts:
                return False
    return True
