"""Exception hierarchy shared across the toolkit.

Every error the library raises on bad input or an unsatisfiable request
derives from ToolkitError, so the service layer can map the whole family
to one HTTP status and the CLI can print them uniformly.
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


# --- knowledge base -------------------------------------------------------

class UnboundVariable(ToolkitError):
    """A substitution left a variable without a value."""


class MalformedRule(ToolkitError):
    """A rule violates structural requirements (unsafe head, bad arity, ...)."""


class SchemaViolation(ToolkitError):
    """A theory document contradicts its own schema or the format version."""


class UnknownSymbol(ToolkitError):
    """A query referenced a relation or entity the theory does not define."""


# --- reasoning ------------------------------------------------------------

class NotChainable(ToolkitError):
    """A rule body cannot be rewritten as a single variable chain."""


class NoTargetFacts(ToolkitError):
    """Induction was asked to explain an empty set of target facts."""


class NoConsistentRule(ToolkitError):
    """No template filling entails the targets without false positives."""


# --- generation -----------------------------------------------------------

class InfeasibleConfig(ToolkitError):
    """A generator configuration cannot be satisfied (even after restarts)."""


class ExhaustedCorruptions(ToolkitError):
    """Negative sampling ran out of candidate corruptions."""


# --- renaming -------------------------------------------------------------

class UnmappedName(ToolkitError):
    """apply_map hit a relation or entity name outside the map's domain."""


# --- rendering ------------------------------------------------------------

class MissingTemplate(ToolkitError):
    """Natural-style rendering found no phrase template for a relation."""


class EmptyDemoBank(ToolkitError):
    """A few-shot regime was requested without any demonstrations."""


# --- external data --------------------------------------------------------

class ParseError(ToolkitError):
    """An input record or a model completion could not be parsed."""


# --- gateway --------------------------------------------------------------

class CacheMiss(ToolkitError):
    """Replay mode found no transcript for the request fingerprint."""


class EndpointError(ToolkitError):
    """The completion endpoint kept failing after bounded retries."""


class Timeout(ToolkitError):
    """The completion endpoint did not answer within the deadline."""


class ScorerUnavailable(ToolkitError):
    """Candidate ranking was requested without a usable scorer."""


# --- answer parsing and metrics -------------------------------------------

class NoRuleFound(ToolkitError):
    """A completion contained no recognizable rule."""


class NoSelectionFound(ToolkitError):
    """A completion contained no recognizable rule-and-facts selection."""


class LengthMismatch(ToolkitError):
    """Predictions and gold labels differ in length."""


class GoldMissing(ToolkitError):
    """A ranking does not contain the gold candidate."""
