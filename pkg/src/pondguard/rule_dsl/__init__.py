"""Rule programs for the collision-avoidance controller."""

from .analysis import Diagnostic, Severity, ValidationFailed, has_errors, validate
from .ast import (
    BELIEF_FIELDS,
    BOOLEAN_FIELDS,
    HOLD_COURSE,
    NUMERIC_FIELDS,
    REVERSE,
    STOP,
    TURN_AWAY,
    Action,
    ActionKind,
    Always,
    And,
    Atom,
    Compare,
    Condition,
    Not,
    Or,
    Rule,
    RuleSet,
    evaluate,
)
from .cells import CellSpace, Piece, partition_percepts
from .parser import (
    DuplicateRuleId,
    RuleDslError,
    RuleSyntaxError,
    UnknownField,
    parse,
    pretty_print,
)
from .tree import BoolTest, DecisionTree, Leaf, Split, compile_decision_tree


def load(path) -> RuleSet:
    """Parse a ``.rbr`` file; the rule set is named after the file stem."""
    from pathlib import Path

    p = Path(path)
    return parse(p.read_text(encoding="utf-8"), name=p.stem)


__all__ = [
    "Action", "ActionKind", "Always", "And", "Atom", "BELIEF_FIELDS", "BOOLEAN_FIELDS",
    "BoolTest", "CellSpace", "Compare", "Condition", "DecisionTree", "Diagnostic",
    "DuplicateRuleId", "HOLD_COURSE", "Leaf", "NUMERIC_FIELDS", "Not", "Or", "Piece",
    "REVERSE", "Rule", "RuleDslError", "RuleSet", "RuleSyntaxError", "STOP", "Severity",
    "Split", "TURN_AWAY", "UnknownField", "ValidationFailed", "compile_decision_tree",
    "evaluate", "has_errors", "load", "parse", "partition_percepts", "pretty_print", "validate",
]
