"""Static checks on rule programs."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .ast import Always, RuleSet, evaluate
from .cells import partition_percepts


class Severity(str, enum.Enum):
    ERROR = "ERROR"
    WARN = "WARN"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    rule_id: str | None
    message: str

    def __str__(self) -> str:
        where = f" [{self.rule_id}]" if self.rule_id else ""
        return f"{self.severity.value} {self.code}{where}: {self.message}"


class ValidationFailed(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics))


def first_match_per_cell(rs: RuleSet) -> list[int | None]:
    """Index of the first rule true at each cell representative (None if none is)."""
    space = partition_percepts(rs)
    out: list[int | None] = []
    for cell in space:
        facts = space.representative(cell)
        out.append(next((i for i, r in enumerate(rs.rules) if evaluate(r.condition, facts)), None))
    return out


def validate(rs: RuleSet) -> list[Diagnostic]:
    """Diagnostics in rule order; within a rule, MissingCatchAll before ShadowedRule."""
    winners = set(first_match_per_cell(rs))
    diags: list[Diagnostic] = []
    last = len(rs.rules) - 1
    for i, rule in enumerate(rs.rules):
        if i == last and not isinstance(rule.condition, Always):
            diags.append(
                Diagnostic(
                    Severity.ERROR,
                    "MissingCatchAll",
                    rule.id,
                    "last rule must be 'when always' so some rule always fires",
                )
            )
        if i not in winners:
            diags.append(
                Diagnostic(
                    Severity.WARN,
                    "ShadowedRule",
                    rule.id,
                    f"rule {i + 1} never fires: its region is covered by earlier rules",
                )
            )
    return diags


def has_errors(diags: list[Diagnostic]) -> bool:
    return any(d.severity is Severity.ERROR for d in diags)


def require_valid(rs: RuleSet) -> list[Diagnostic]:
    diags = validate(rs)
    if has_errors(diags):
        raise ValidationFailed([d for d in diags if d.severity is Severity.ERROR])
    return diags
