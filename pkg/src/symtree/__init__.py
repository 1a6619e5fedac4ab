"""symtree: closed-world kinship reasoning benchmark toolkit."""

__version__ = "0.1.0"

from .errors import ToolkitError
from .kb import (
    Atom,
    Binding,
    Const,
    Entity,
    Fact,
    Relation,
    Rule,
    Theory,
    Var,
    apply_substitution,
    canonicalize_rule,
    match_rule,
)
from .reasoner import (
    Closure,
    Proof,
    abduce_proofs,
    chain_normalize,
    classify_hypothesis,
    forward_closure,
    induce_rule,
    make_template,
)
from .schema import example_tree

__all__ = [
    "Atom",
    "Binding",
    "Closure",
    "Const",
    "Entity",
    "Fact",
    "Proof",
    "Relation",
    "Rule",
    "Theory",
    "ToolkitError",
    "Var",
    "abduce_proofs",
    "apply_substitution",
    "canonicalize_rule",
    "chain_normalize",
    "classify_hypothesis",
    "example_tree",
    "forward_closure",
    "induce_rule",
    "make_template",
    "match_rule",
    "__version__",
]
