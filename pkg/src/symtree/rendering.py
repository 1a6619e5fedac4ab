"""Text rendering: theory listings, rule templates and chat prompt assembly."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources

from .errors import EmptyDemoBank, MalformedRule, MissingTemplate, NoTargetFacts
from .kb import Atom, Rule, Theory, Var
from .reasoner import Closure, RuleTemplate

LOGIC = "logic"
NATURAL = "natural"
STYLES = (LOGIC, NATURAL)

ZERO_SHOT = "zero-shot"
ZERO_SHOT_COT = "zero-shot-cot"
FEW_SHOT_COT = "few-shot-cot"
ZERO_PLUS_FEW_SHOT_COT = "zero-plus-few-shot-cot"
REGIMES = (ZERO_SHOT, ZERO_SHOT_COT, FEW_SHOT_COT, ZERO_PLUS_FEW_SHOT_COT)

DEDUCE = "deduce"
INDUCE = "induce"
ABDUCE = "abduce"
TASKS = (DEDUCE, INDUCE, ABDUCE)

COT_SUFFIX = "Let's think step by step."

DEDUCE_SYSTEM = "You are a helpful assistant with deductive reasoning abilities."
DEDUCE_COT_SYSTEM = (
    DEDUCE_SYSTEM
    + " Please select one single logical rule and a few facts to predict"
    " True/False of the following statement."
)
INDUCE_SYSTEM = (
    "You are a helpful assistant with inductive reasoning abilities. Please"
    " generate one single rule to match the template and logically entail the"
    " facts."
)
ABDUCE_SYSTEM = (
    "You are a helpful assistant with abductive reasoning abilities. Please"
    " select one single logical rule and a few facts to explain the following"
    " statement."
)

# relation names assigned by the id-symbols transform, e.g. "r3"
_SYMBOL_NAME = re.compile(r"^r\d+$")


@dataclass(frozen=True)
class Message:
    role: str
    content: str

    def to_dict(self) -> dict:
        return {"role": self.role, "content": self.content}


Messages = tuple[Message, ...]


def make_messages(system: str, user: str) -> Messages:
    return (Message("system", system), Message("user", user))


def messages_to_text(messages: Messages) -> str:
    return "\n".join(f"{m.role}: {m.content}" for m in messages)


def messages_to_dicts(messages: Messages) -> list[dict]:
    return [m.to_dict() for m in messages]


def messages_from_dicts(docs: list[dict]) -> Messages:
    return tuple(Message(d["role"], d["content"]) for d in docs)


def relation_stem(name: str) -> str:
    """Phrase form of a relation name: trailing 'Of' dropped, rest verbatim."""
    return name[:-2] if name.endswith("Of") else name


def _display(theory: Theory | None, ref: str) -> str:
    if theory is None:
        return ref
    return theory.entity_by_id(ref).name


def _atom_logic(atom: Atom, theory: Theory | None, spaced: bool) -> str:
    sep = ", " if spaced else ","
    args = sep.join(
        arg.name if isinstance(arg, Var) else _display(theory, arg.ref)
        for arg in atom.args
    )
    return f"{atom.rel}({args})"


def _is_possessive(atom: Atom) -> bool:
    return (
        len(atom.args) == 2
        and atom.rel.endswith("Of")
        and atom.rel != "parentOf"
        and not atom.rel.startswith("inverse_")
    )


def render_fact(atom: Atom, style: str, theory: Theory | None = None) -> str:
    """One ground atom as text.

    Natural style phrases semantic kinship relations possessively
    ("Alice is Bob's mother."); every other relation keeps the plain
    "X is name of Y." form that also appears in theory listings.
    """
    _check_style(style)
    if style == LOGIC:
        return _atom_logic(atom, theory, spaced=True)
    names = [
        arg.name if isinstance(arg, Var) else _display(theory, arg.ref)
        for arg in atom.args
    ]
    if len(names) == 1:
        return f"{names[0]} is {atom.rel}."
    if len(names) == 2:
        if _is_possessive(atom):
            return f"{names[0]} is {names[1]}'s {relation_stem(atom.rel)}."
        return f"{names[0]} is {relation_stem(atom.rel)} of {names[1]}."
    raise MissingTemplate(f"no natural phrasing for arity {len(names)}: {atom.rel}")


def render_statement(atom: Atom, style: str, theory: Theory | None = None) -> str:
    """One ground atom as a prompt statement line.

    Unlike render_fact this never uses the possessive idiom; statement
    lines in prompts keep the "X is name of Y." form for every relation.
    """
    _check_style(style)
    if style == LOGIC:
        return _atom_logic(atom, theory, spaced=True)
    names = [
        arg.name if isinstance(arg, Var) else _display(theory, arg.ref)
        for arg in atom.args
    ]
    if len(names) == 1:
        return f"{names[0]} is {atom.rel}."
    if len(names) == 2:
        return f"{names[0]} is {relation_stem(atom.rel)} of {names[1]}."
    raise MissingTemplate(f"no natural phrasing for arity {len(names)}: {atom.rel}")


def _natural_body_atom(atom: Atom) -> str:
    names = [arg.name if isinstance(arg, Var) else arg.ref for arg in atom.args]
    if len(names) == 1:
        return f"{names[0]} is {atom.rel}"
    if len(names) == 2:
        return f"{names[0]} is {relation_stem(atom.rel)} of {names[1]}"
    raise MissingTemplate(f"no natural phrasing for arity {len(names)}: {atom.rel}")


def _fresh_letter(rule: Rule) -> str:
    top = max(rule.variables())
    if len(top) != 1 or not ("A" <= top <= "Y"):
        raise MalformedRule(f"no fresh variable letter after {top!r}")
    return chr(ord(top) + 1)


def render_rule(rule: Rule, style: str) -> str:
    """One rule as text.

    Logic style: "forall vars: body -> head" with spaced body atoms; the
    head atom is spaced only for id-symbol relation names (matching how
    each listing prints).  Natural style restates the head with a fresh
    tail variable ("..., then A is sister of D.") when the rule is written
    over single capital-letter variables; template-filled rules with
    lowercase variables keep their true head.
    """
    _check_style(style)
    if not rule.body:
        raise MalformedRule(f"rule {rule.label} has an empty body")
    upper = all(len(v) == 1 and v.isupper() for v in rule.variables())
    if style == LOGIC:
        quant = ",".join(sorted(rule.variables()))
        if upper:
            body = " ∧ ".join(_atom_logic(a, None, spaced=True) for a in rule.body)
            head = _atom_logic(rule.head, None, spaced=bool(_SYMBOL_NAME.match(rule.head.rel)))
        else:
            body = " ∧ ".join(_atom_logic(a, None, spaced=False) for a in rule.body)
            head = _atom_logic(rule.head, None, spaced=False)
        return f"∀{quant}: {body} → {head}"
    body = " and ".join(_natural_body_atom(a) for a in rule.body)
    head_args = [
        arg.name if isinstance(arg, Var) else arg.ref for arg in rule.head.args
    ]
    if len(head_args) == 1:
        return f"If {body}, then {head_args[0]} is {rule.head.rel}."
    if len(head_args) != 2:
        raise MissingTemplate(f"no natural phrasing for head of {rule.label}")
    tail = _fresh_letter(rule) if upper else head_args[1]
    stem = relation_stem(rule.head.rel)
    return f"If {body}, then {head_args[0]} is {stem} of {tail}."


def render_template(template: RuleTemplate, style: str) -> str:
    """A rule template with '##' relation slots and a '++' gender slot."""
    _check_style(style)
    vars_ = template.variables()
    if style == LOGIC:
        quant = ",".join(vars_)
        atoms = [f"##({vars_[i]},{vars_[i + 1]})" for i in range(template.length)]
        atoms.append(f"++({vars_[0]})")
        head = f"{template.head_rel}({vars_[0]},{vars_[-1]})"
        return f"∀{quant}: " + " ∧ ".join(atoms) + f" → {head}"
    parts = [f"{vars_[i]} is ## of {vars_[i + 1]}" for i in range(template.length)]
    parts.append(f"{vars_[0]} is ++")
    stem = relation_stem(template.head_rel)
    return "If " + " and ".join(parts) + f", then {vars_[0]} is {stem} of {vars_[-1]}."


def ensure_renderable(theory: Theory, style: str) -> None:
    """Fail fast if some relation cannot be phrased in the given style."""
    _check_style(style)
    if style == LOGIC:
        return
    for rel in theory.relations.values():
        if rel.arity not in (1, 2):
            raise MissingTemplate(f"no natural phrasing for arity {rel.arity}: {rel.name}")


def _check_style(style: str) -> None:
    if style not in STYLES:
        raise ValueError(f"unknown style: {style!r}")


def rules_block(theory: Theory, style: str) -> str:
    return "\n".join(f"{r.label}: {render_rule(r, style)}" for r in theory.rules)


def facts_block(theory: Theory, style: str, labels: set[str] | None = None) -> str:
    lines = []
    for fact in theory.facts:
        if labels is not None and fact.label not in labels:
            continue
        lines.append(f"{fact.label}: {render_statement(fact.atom, style, theory)}")
    return "\n".join(lines)


def inferred_block(atoms: list[Atom], style: str, theory: Theory) -> str:
    return "\n".join(
        f"G{i}: {render_statement(atom, style, theory)}"
        for i, atom in enumerate(atoms, start=1)
    )


@dataclass(frozen=True)
class Demo:
    statement: str
    answer: str


@dataclass(frozen=True)
class DemoBank:
    """Few-shot demonstrations for one task, as ready-rendered text."""

    task: str
    style: str
    naming: str
    demos: tuple[Demo, ...]

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "task": self.task,
            "style": self.style,
            "naming": self.naming,
            "demos": [{"statement": d.statement, "answer": d.answer} for d in self.demos],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "DemoBank":
        return cls(
            task=doc["task"],
            style=doc["style"],
            naming=doc["naming"],
            demos=tuple(Demo(d["statement"], d["answer"]) for d in doc["demos"]),
        )


def load_demo_bank(task: str) -> DemoBank:
    """Load the packaged demonstration bank for a task."""
    if task not in (DEDUCE, ABDUCE):
        raise EmptyDemoBank(f"no packaged demonstrations for task {task!r}")
    name = f"demos_{task}.json"
    with resources.files("symtree.data").joinpath(name).open("r", encoding="utf-8") as fh:
        return DemoBank.from_dict(json.load(fh))


def _demo_block(bank: DemoBank, query_label: str) -> str:
    if not bank.demos:
        raise EmptyDemoBank(f"demo bank for {bank.task!r} has no demonstrations")
    return "\n\n".join(
        f"{query_label}: {d.statement}\nAnswer: {d.answer}" for d in bank.demos
    )


def _proof_fact_labels(closure: Closure, atom: Atom) -> set[str]:
    labels: set[str] = set()
    for proof in closure.proofs_for(atom):
        labels.update(proof.facts)
    return labels


def build_prompt(
    task: str,
    theory: Theory,
    question,
    regime: str,
    style: str,
    demo_bank: DemoBank | None = None,
    *,
    closure: Closure | None = None,
    variant: int = 1,
    after_selection: bool = False,
    remove_rules: bool = False,
) -> Messages:
    """Assemble the chat prompt for one task query.

    question: a ground Atom for deduce/abduce, or (relation name,
    RuleTemplate) for induce.  after_selection restricts the fact block to
    facts used by some proof of the query (closure required); remove_rules
    drops the rule block from the deduce zero-shot prompt entirely.
    """
    if task not in TASKS:
        raise ValueError(f"unknown task: {task!r}")
    if regime not in REGIMES:
        raise ValueError(f"unknown regime: {regime!r}")
    _check_style(style)
    ensure_renderable(theory, style)
    if variant != 1 and (task != DEDUCE or regime != ZERO_SHOT):
        raise ValueError("prompt variants apply to the deduce zero-shot regime only")
    if remove_rules and (task != DEDUCE or regime != ZERO_SHOT):
        raise ValueError("remove_rules applies to the deduce zero-shot regime only")
    if regime in (FEW_SHOT_COT, ZERO_PLUS_FEW_SHOT_COT):
        if demo_bank is None or not demo_bank.demos:
            raise EmptyDemoBank(f"regime {regime!r} needs a demonstration bank")
    if task == DEDUCE:
        return _deduce_prompt(
            theory, question, regime, style, demo_bank,
            closure=closure, variant=variant,
            after_selection=after_selection, remove_rules=remove_rules,
        )
    if task == INDUCE:
        return _induce_prompt(
            theory, question, regime, style, demo_bank,
            closure=closure, after_selection=after_selection,
        )
    return _abduce_prompt(
        theory, question, regime, style, demo_bank,
        closure=closure, after_selection=after_selection,
    )


def _fact_subset(
    theory: Theory, closure: Closure | None, atoms: list[Atom], enabled: bool
) -> set[str] | None:
    if not enabled:
        return None
    if closure is None:
        raise ValueError("after_selection needs the closure for proof provenance")
    labels: set[str] = set()
    for atom in atoms:
        labels.update(_proof_fact_labels(closure, atom))
    return labels


def _deduce_prompt(
    theory, question, regime, style, demo_bank, *,
    closure, variant, after_selection, remove_rules,
) -> Messages:
    labels = _fact_subset(theory, closure, [question], after_selection)
    rules = rules_block(theory, style)
    facts = facts_block(theory, style, labels)
    stmt = render_statement(question, style, theory)
    n = len(theory.rules)
    m = len(theory.facts)
    if regime == ZERO_SHOT:
        if remove_rules:
            user = (
                f"I will provide a set of facts F1 to F{m}. Please select a few"
                f" facts from F1 to F{m} to predict True/False of the unknown"
                " fact using deductive reasoning.\n"
                f"Facts:\n{facts}\n"
                f"Unknown fact: {stmt}\n"
                "The answer (True or False) is:"
            )
            return make_messages(DEDUCE_SYSTEM, user)
        if variant == 1:
            user = (
                f"I will provide a set of logical rules L1 to L{n} and facts F1"
                f" to F{m}. Please select one single logical rule from L1 to"
                f" L{n} and a few facts from F1 to F{m} to predict True/False"
                " of the unknown fact using deductive reasoning.\n"
                f"Logical rules:\n{rules}\n"
                f"Facts:\n{facts}\n"
                f"Unknown fact: {stmt}\n"
                "The answer (True or False) is:"
            )
        elif variant == 2:
            user = (
                f"I will provide a set of logical rules L1 to L{n} and facts F1"
                f" to F{m}. Please predict True/False of the unknown fact using"
                " deductive reasoning.\n"
                f"Logical rules:\n{rules}\n"
                f"Facts:\n{facts}\n"
                f"Unknown fact: {stmt}\n"
                "The answer (True or False) is:"
            )
        elif variant == 3:
            user = (
                "Given a set of rules and facts, you have to reason whether a"
                " statement is True or False.\n"
                f"Here are some rules:\n{rules}\n"
                f"Here are some facts:\n{facts}\n"
                f'Does it imply that the statement "{stmt}" is True?\n'
                "The answer (YES or NO) is:"
            )
        else:
            raise ValueError(f"unknown zero-shot variant: {variant}")
        return make_messages(DEDUCE_SYSTEM, user)
    if regime == ZERO_SHOT_COT:
        user = (
            f"I will provide a set of logical rules L1 to L{n} and facts F1 to"
            f" F{m}. Please select one single logical rule from L1 to L{n} and"
            f" a few facts from F1 to F{m} to predict True/False of the"
            " following statement using deductive reasoning.\n"
            f"Logical rules:\n{rules}\n"
            f"Facts:\n{facts}\n"
            f"Statement: {stmt}\n"
            f"Answer with True or False? {COT_SUFFIX}"
        )
        return make_messages(DEDUCE_COT_SYSTEM, user)
    demos = _demo_block(demo_bank, "Statement")
    user = (
        f"I will provide a set of logical rules L1 to L{n} and facts F1 to"
        f" F{m}.\n"
        f"Logical rules:\n{rules}\n"
        f"Facts:\n{facts}\n"
        f"Please select one single logical rule from L1 to L{n} and a few"
        f" facts from F1 to F{m} to predict True/False of the following"
        " statement using deductive reasoning.\n"
        f"{demos}\n"
        f"Statement: {stmt}\n"
        "Answer:"
    )
    if regime == ZERO_PLUS_FEW_SHOT_COT:
        user += f" {COT_SUFFIX}"
    return make_messages(DEDUCE_COT_SYSTEM, user)


def induction_note(theory: Theory, style: str) -> str:
    """The template-filling note naming the legal slot values."""
    _check_style(style)
    parent = theory.parent_relation().name
    inverse = theory.inverse_relation(parent).name
    genders = sorted(rel.name for rel in theory.gender_relations())
    if style == NATURAL:
        parent = relation_stem(parent)
        inverse = relation_stem(inverse)
        genders = sorted(relation_stem(g) for g in genders)
    return (
        f"Note that the symbol '##' in the template should be filled with"
        f" either '{parent}' or '{inverse}', while the symbol '++' should be"
        f" filled with either '{genders[0]}' or '{genders[1]}'."
    )


def _induce_prompt(
    theory, question, regime, style, demo_bank, *, closure, after_selection
) -> Messages:
    relation, template = question
    if closure is None:
        raise ValueError("induce prompts need the closure for inferred facts")
    targets = closure.atoms_of(relation)
    if not targets:
        raise NoTargetFacts(f"closure holds no facts for relation {relation!r}")
    labels = _fact_subset(theory, closure, targets, after_selection)
    facts = facts_block(theory, style, labels)
    glines = inferred_block(targets, style, theory)
    note = induction_note(theory, style)
    system = f"{INDUCE_SYSTEM} {note}"
    m = len(theory.facts)
    g = len(targets)
    terminator = "After filling in the template, the generated rule is:"
    if regime == ZERO_SHOT_COT:
        terminator += f" {COT_SUFFIX}"
    tmpl = render_template(template, style)
    if regime in (ZERO_SHOT, ZERO_SHOT_COT):
        user = (
            f"I will give you a set of facts F1 to F{m}, facts G1 to G{g} and a"
            " template for a logical rule. Please generate one single rule to"
            f" match the template and logically entail the facts G1 to G{g}"
            f" based on facts F1 to F{m}.\n"
            f"Facts:\n{facts}\n{glines}\n"
            f"Template: {tmpl}\n"
            f"{note}\n"
            f"{terminator}"
        )
        return make_messages(system, user)
    demos = _demo_block(demo_bank, "Template")
    user = (
        f"I will give you a set of facts F1 to F{m}, facts G1 to G{g} and a"
        " template for a logical rule. Please generate one single rule to"
        f" match the template and logically entail the facts G1 to G{g} based"
        f" on facts F1 to F{m}.\n"
        f"Facts:\n{facts}\n{glines}\n"
        f"{demos}\n"
        f"Template: {tmpl}\n"
        f"{note}\n"
        "After filling in the template, the generated rule is:"
    )
    if regime == ZERO_PLUS_FEW_SHOT_COT:
        user += f" {COT_SUFFIX}"
    return make_messages(system, user)


def _abduce_prompt(
    theory, question, regime, style, demo_bank, *, closure, after_selection
) -> Messages:
    labels = _fact_subset(theory, closure, [question], after_selection)
    rules = rules_block(theory, style)
    facts = facts_block(theory, style, labels)
    stmt = render_statement(question, style, theory)
    n = len(theory.rules)
    m = len(theory.facts)
    if regime in (ZERO_SHOT, ZERO_SHOT_COT):
        terminator = (
            "Answer with the numbers of the selected rule and facts. The"
            " selected rule and facts are:"
        )
        if regime == ZERO_SHOT_COT:
            terminator += f" {COT_SUFFIX}"
        user = (
            f"I will provide a set of logical rules L1 to L{n} and facts F1 to"
            f" F{m}. Please select one single logical rule from L1 to L{n} and"
            f" a few facts from F1 to F{m} to explain the following"
            " statement.\n"
            f"Rules:\n{rules}\n"
            f"Facts:\n{facts}\n"
            f"Statement: {stmt}\n"
            f"{terminator}"
        )
        return make_messages(ABDUCE_SYSTEM, user)
    demos = _demo_block(demo_bank, "Statement")
    user = (
        f"I will provide a set of logical rules L1 to L{n} and facts F1 to"
        f" F{m}. Please select one single logical rule from L1 to L{n} and a"
        f" few facts from F1 to F{m} to explain the following statement.\n"
        f"Rules:\n{rules}\n"
        f"Facts:\n{facts}\n"
        f"{demos}\n"
        f"Statement: {stmt}\n"
        "Answer:"
    )
    if regime == ZERO_PLUS_FEW_SHOT_COT:
        user += f" {COT_SUFFIX}"
    return make_messages(ABDUCE_SYSTEM, user)


def build_context_prompt(context: list[str], statement: str, regime: str = ZERO_SHOT) -> Messages:
    """Prompt for sentence-context datasets (rulebases ingested as text)."""
    if regime == ZERO_SHOT:
        terminator = "The answer (True or False) is:"
    elif regime == ZERO_SHOT_COT:
        terminator = f"Answer with True or False? {COT_SUFFIX}"
    else:
        raise ValueError(f"context prompts support zero-shot regimes only, not {regime!r}")
    body = "\n".join(context)
    user = (
        f"{body}\n"
        f'Does it imply that the statement "{statement}" is True?\n'
        f"{terminator}"
    )
    return make_messages(DEDUCE_SYSTEM, user)
