"""Answer parsing and scoring: accuracy, precision, proof accuracy, filtered MRR."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Collection, Sequence

from .errors import GoldMissing, LengthMismatch, NoRuleFound, NoSelectionFound
from .kb import Atom, Rule, Theory, Var, canonicalize_rule
from .reasoner import RuleTemplate

TRUE = "True"
FALSE = "False"
UNDETERMINED = "Undetermined"

DEDUCE = "deduce"
INDUCE = "induce"
ABDUCE = "abduce"

# markers scanned case-insensitively; the LAST hit in the completion wins,
# since chain-of-thought text mentions both labels mid-reasoning
_BOOLEAN_MARKERS = re.compile(
    r"cannot\s+be\s+determined|can't\s+be\s+determined|\btrue\b|\bfalse\b|\byes\b|\bno\b",
    re.IGNORECASE,
)
_TRUE_WORDS = frozenset({"true", "yes"})
_FALSE_WORDS = frozenset({"false", "no"})


def parse_boolean_answer(text: str) -> str:
    """Total function: maps any completion to True/False/Undetermined."""
    last = None
    for match in _BOOLEAN_MARKERS.finditer(text):
        last = match.group(0).lower()
    if last is None:
        return UNDETERMINED
    if last in _TRUE_WORDS:
        return TRUE
    if last in _FALSE_WORDS:
        return FALSE
    return UNDETERMINED


_ARROW = re.compile(r"→|->|=>")
_LOGIC_ATOM = re.compile(r"([\w#+]+)\s*\(([^()]*)\)")
_NATURAL_RULE = re.compile(r"\bif\s+(.+?),?\s+then\s+(.+?)(?:\.|$)", re.IGNORECASE)
_BINARY_CLAUSE = re.compile(r"^(\w+)\s+is\s+([\w#+]+)\s+of\s+(\w+)$", re.IGNORECASE)
_POSSESSIVE_CLAUSE = re.compile(r"^(\w+)\s+is\s+(\w+)'s\s+([\w#+]+)$", re.IGNORECASE)
_UNARY_CLAUSE = re.compile(r"^(\w+)\s+is\s+([\w#+]+)$", re.IGNORECASE)


def _term(token: str):
    # induction answers quantify over template variables, so every argument
    # is treated as a variable; canonicalization renames them anyway
    return Var(token)


def _atom_from_logic(name: str, argtext: str) -> Atom | None:
    if "#" in name or "+" in name:
        return None  # unfilled template placeholder
    args = [a.strip() for a in argtext.split(",") if a.strip()]
    if not args:
        return None
    return Atom(name, tuple(_term(a) for a in args))


def _resolve_relation(token: str, theory: Theory | None) -> str:
    """Natural style writes the display stem ('parent' for parentOf); map it
    back to a relation name when the theory is known."""
    if theory is None:
        return token
    if token in theory.relations:
        return token
    if token + "Of" in theory.relations:
        return token + "Of"
    return token


def _clause_atom(clause: str, theory: Theory | None) -> Atom | None:
    clause = clause.strip().rstrip(".").strip()
    m = _BINARY_CLAUSE.match(clause)
    if m:
        rel = _resolve_relation(m.group(2), theory)
        if "#" in rel or "+" in rel:
            return None
        return Atom(rel, (_term(m.group(1)), _term(m.group(3))))
    m = _POSSESSIVE_CLAUSE.match(clause)
    if m:
        rel = _resolve_relation(m.group(3), theory)
        if "#" in rel or "+" in rel:
            return None
        return Atom(rel, (_term(m.group(1)), _term(m.group(2))))
    m = _UNARY_CLAUSE.match(clause)
    if m:
        rel = _resolve_relation(m.group(2), theory)
        if "#" in rel or "+" in rel:
            return None
        return Atom(rel, (_term(m.group(1)),))
    return None


def _parse_logic_rule(line: str) -> Rule | None:
    pieces = _ARROW.split(line)
    if len(pieces) != 2:
        return None
    body_atoms = []
    for name, argtext in _LOGIC_ATOM.findall(pieces[0]):
        atom = _atom_from_logic(name, argtext)
        if atom is None:
            return None
        body_atoms.append(atom)
    heads = _LOGIC_ATOM.findall(pieces[1])
    if not body_atoms or len(heads) != 1:
        return None
    head = _atom_from_logic(*heads[0])
    if head is None:
        return None
    return Rule(label="", body=tuple(body_atoms), head=head)


def _parse_natural_rule(line: str, theory: Theory | None) -> Rule | None:
    m = _NATURAL_RULE.search(line)
    if not m:
        return None
    body_atoms = []
    for clause in re.split(r"\s+and\s+", m.group(1), flags=re.IGNORECASE):
        atom = _clause_atom(clause, theory)
        if atom is None:
            return None
        body_atoms.append(atom)
    head = _clause_atom(m.group(2), theory)
    if head is None or not body_atoms:
        return None
    return Rule(label="", body=tuple(body_atoms), head=head)


def parse_rule_answer(
    text: str, template: RuleTemplate, theory: Theory | None = None
) -> Rule:
    """Extract the filled rule template from a completion, logic or natural
    form; the last well-formed rule whose head matches the template wins.
    Rules still containing ##/++ placeholders are skipped."""
    found: Rule | None = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        rule = _parse_logic_rule(line)
        if rule is None:
            rule = _parse_natural_rule(line, theory)
        if rule is None:
            continue
        if rule.head.rel != template.head_rel:
            continue
        if len(rule.body) != template.length + 1:
            continue
        found = rule
    if found is None:
        raise NoRuleFound(f"no filled template for {template.head_rel!r} in completion")
    return found


@dataclass(frozen=True)
class ProofAnswer:
    """One selected rule label plus the supporting fact labels."""

    rule: str
    facts: frozenset[str]

    def to_dict(self) -> dict:
        return {"rule": self.rule, "facts": sorted(self.facts, key=_label_key)}


def _label_key(label: str) -> tuple[str, int]:
    m = re.match(r"([A-Za-z]+)(\d+)$", label)
    return (m.group(1), int(m.group(2))) if m else (label, 0)


_SELECTION = re.compile(
    r"\bL(\d+)\b((?:(?:\s|,|;|:|\band\b|\bor\b|\bwith\b|\bfacts?\b)+F\d+\b)+)",
    re.IGNORECASE,
)
_FACT_LABEL = re.compile(r"F(\d+)", re.IGNORECASE)


def parse_proof_answer(text: str) -> ProofAnswer:
    """Extract the last stated rule-plus-facts selection; fact order and the
    separators (commas, 'and', 'or') are ignored."""
    last = None
    for match in _SELECTION.finditer(text):
        last = match
    if last is None:
        raise NoSelectionFound("no rule-and-facts selection in completion")
    facts = frozenset(f"F{n}" for n in _FACT_LABEL.findall(last.group(2)))
    return ProofAnswer(rule=f"L{last.group(1)}", facts=facts)


def _require_aligned(parsed: Sequence, gold: Sequence) -> None:
    if len(parsed) != len(gold):
        raise LengthMismatch(f"{len(parsed)} answers vs {len(gold)} gold entries")


def deduction_accuracy(parsed: Sequence[str], gold: Sequence[bool]) -> float:
    """Percentage of boolean questions answered correctly; Undetermined is
    never correct."""
    _require_aligned(parsed, gold)
    if not gold:
        raise LengthMismatch("cannot score an empty batch")
    hits = 0
    for answer, label in zip(parsed, gold):
        want = TRUE if label else FALSE
        if answer == want:
            hits += 1
    return 100.0 * hits / len(gold)


def induction_precision(
    parsed: Sequence[Rule | None], gold: Sequence[str]
) -> float:
    """Percentage of target relations whose generated rule equals the ground
    truth up to canonical form; unparseable answers count as wrong."""
    _require_aligned(parsed, gold)
    if not gold:
        raise LengthMismatch("cannot score an empty batch")
    hits = 0
    for rule, canonical in zip(parsed, gold):
        if rule is not None and canonicalize_rule(rule) == canonical:
            hits += 1
    return 100.0 * hits / len(gold)


def proof_accuracy(
    parsed: Sequence[ProofAnswer | None],
    gold: Sequence[Collection[tuple[str, frozenset[str]]]],
) -> float:
    """Percentage of observations whose parsed proof exactly matches one of
    the gold proofs (rule label plus fact-label set)."""
    _require_aligned(parsed, gold)
    if not gold:
        raise LengthMismatch("cannot score an empty batch")
    hits = 0
    for answer, proofs in zip(parsed, gold):
        if answer is None:
            continue
        if any(answer.rule == r and answer.facts == set(fs) for r, fs in proofs):
            hits += 1
    return 100.0 * hits / len(gold)


def score(task: str, parsed: Sequence, gold: Sequence) -> float:
    if task == DEDUCE:
        return deduction_accuracy(parsed, gold)
    if task == INDUCE:
        return induction_precision(parsed, gold)
    if task == ABDUCE:
        return proof_accuracy(parsed, gold)
    raise ValueError(f"unknown task: {task!r}")


def filtered_mrr(
    rankings: Sequence[Sequence[str]],
    gold: Sequence[str | Collection[str]],
    known_true_tails: Sequence[Collection[str]],
) -> float:
    """Mean reciprocal rank with the filter protocol: other known-true tails
    are removed from each ranking before the gold's rank is read off.  When a
    query has several golds, the best-ranked one counts."""
    _require_aligned(rankings, gold)
    _require_aligned(rankings, known_true_tails)
    if not rankings:
        raise LengthMismatch("cannot score an empty batch")
    total = 0.0
    for ranking, golds, truths in zip(rankings, gold, known_true_tails):
        gold_set = {golds} if isinstance(golds, str) else set(golds)
        if not gold_set & set(ranking):
            raise GoldMissing(f"none of {sorted(gold_set)} among candidates")
        drop = set(truths) - gold_set
        best = None
        rank = 0
        for cand in ranking:
            if cand in drop:
                continue
            rank += 1
            if cand in gold_set:
                best = rank
                break
        total += 1.0 / best
    return total / len(rankings)
