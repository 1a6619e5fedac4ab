"""Shared construction of the golden prompt matrix.

One fixed query per task over the worked-example tree, rendered with the
id-symbols naming each task's prompts use.  Golden files under
golden/prompts/ freeze the exact bytes; tests re-render through this module
and compare.
"""

from __future__ import annotations

from symtree.kb import Theory, ground
from symtree.reasoner import Closure, forward_closure, induce_rule, make_template
from symtree.rendering import (
    REGIMES,
    STYLES,
    Demo,
    DemoBank,
    build_prompt,
    load_demo_bank,
    messages_to_text,
    render_rule,
    render_template,
)
from symtree.schema import example_tree
from symtree.transforms import apply_map, build_symbol_map

DEDUCE_QUERY = ("r9", "Thomas", "Claudia")
ABDUCE_QUERY = ("r11", "Gabriel", "Lea")
INDUCE_RELATION = "r10"
# relations whose solver-recovered rules serve as induce few-shot demos
INDUCE_DEMO_RELATIONS = ("r6", "r23")


def _symbolized(preset: str) -> tuple[Theory, Closure]:
    base = example_tree()
    smap = build_symbol_map(base, "id-symbols", preset=preset)
    theory = apply_map(base, smap)
    return theory, forward_closure(theory)


def induce_demo_bank(theory: Theory, closure: Closure, style: str) -> DemoBank:
    demos = []
    for rel in INDUCE_DEMO_RELATIONS:
        template = make_template(theory, rel)
        induced = induce_rule(theory, closure.atoms_of(rel), template)
        demos.append(
            Demo(
                statement=render_template(template, style),
                answer=render_rule(induced.rule, style),
            )
        )
    return DemoBank(task="induce", style=style, naming="induction", demos=tuple(demos))


def build_golden_prompts() -> dict[str, str]:
    """filename stem -> serialized messages, for every task/regime/style."""
    ded_theory, ded_closure = _symbolized("deduction")
    ind_theory, ind_closure = _symbolized("induction")
    banks = {"deduce": load_demo_bank("deduce"), "abduce": load_demo_bank("abduce")}
    out: dict[str, str] = {}
    for task in ("deduce", "induce", "abduce"):
        theory = ded_theory if task == "deduce" else ind_theory
        closure = ded_closure if task == "deduce" else ind_closure
        if task == "deduce":
            question = ground(*DEDUCE_QUERY)
        elif task == "abduce":
            question = ground(*ABDUCE_QUERY)
        for regime in REGIMES:
            for style in STYLES:
                if task == "induce":
                    question = (INDUCE_RELATION, make_template(ind_theory, INDUCE_RELATION))
                    bank = induce_demo_bank(ind_theory, ind_closure, style)
                else:
                    bank = banks[task]
                messages = build_prompt(
                    task, theory, question, regime, style,
                    demo_bank=bank, closure=closure,
                )
                out[f"{task}_{regime}_{style}"] = messages_to_text(messages)
    return out
