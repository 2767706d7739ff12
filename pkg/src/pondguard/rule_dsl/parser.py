"""Recursive-descent parser for ``.rbr`` rule programs.

Grammar (one rule per line, ``#`` comments)::

    program := rule+
    rule    := "rule" IDENT ":" "when" expr "do" action NEWLINE
    expr    := term ("or" term)*
    term    := factor ("and" factor)*
    factor  := "not" factor | "(" expr ")" | IDENT | IDENT CMP NUMBER | "always"
    action  := "stop" | "reverse" | "turn_away" | "hold_course"
             | "set_thrust" "(" NUMBER "," NUMBER ")"
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

from .ast import (
    BOOLEAN_FIELDS,
    COMPARISON_OPS,
    NUMERIC_FIELDS,
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
)

KEYWORDS = frozenset({"rule", "when", "do", "and", "or", "not", "always"})
SIMPLE_ACTIONS = ("stop", "reverse", "turn_away", "hold_course")


class RuleDslError(Exception):
    """Base class for rule-program errors."""


class RuleSyntaxError(RuleDslError):
    def __init__(self, message: str, line: int, column: int, expected: tuple[str, ...] = ()):
        self.line = line
        self.column = column
        self.expected = tuple(expected)
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{line}:{column}: {message}{detail}")


class UnknownField(RuleDslError):
    def __init__(self, identifier: str, line: int, column: int):
        self.identifier = identifier
        self.line = line
        self.column = column
        super().__init__(f"{line}:{column}: unknown percept field {identifier!r}")


class DuplicateRuleId(RuleDslError):
    def __init__(self, rule_id: str, line: int):
        self.rule_id = rule_id
        self.line = line
        super().__init__(f"{line}: duplicate rule id {rule_id!r}")


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT NUMBER OP NEWLINE EOF
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<number>-?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[a-z_][a-z0-9_]*)
  | (?P<op><=|>=|<|>|:|\(|\)|,)
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> Iterator[Token]:
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise RuleSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind == "newline":
            yield Token("NEWLINE", "\n", line, col)
            line += 1
            line_start = m.end()
        elif kind == "number":
            yield Token("NUMBER", m.group(), line, col)
        elif kind == "ident":
            yield Token("IDENT", m.group(), line, col)
        elif kind == "op":
            yield Token("OP", m.group(), line, col)
        pos = m.end()
    yield Token("NEWLINE", "\n", line, pos - line_start + 1)
    yield Token("EOF", "", line, pos - line_start + 1)


def _describe(tok: Token) -> str:
    if tok.kind == "EOF":
        return "end of input"
    if tok.kind == "NEWLINE":
        return "end of line"
    return repr(tok.text)


class _Parser:
    def __init__(self, text: str):
        self.toks = list(tokenize(text))
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, expected: tuple[str, ...]) -> RuleSyntaxError:
        t = self.tok
        return RuleSyntaxError(f"unexpected {_describe(t)}", t.line, t.column, expected)

    def is_word(self, word: str) -> bool:
        return self.tok.kind == "IDENT" and self.tok.text == word

    def is_op(self, op: str) -> bool:
        return self.tok.kind == "OP" and self.tok.text == op

    def expect_word(self, word: str) -> Token:
        if not self.is_word(word):
            raise self.fail((repr(word),))
        return self.advance()

    def expect_op(self, op: str) -> Token:
        if not self.is_op(op):
            raise self.fail((repr(op),))
        return self.advance()

    def expect_number(self) -> float:
        if self.tok.kind != "NUMBER":
            raise self.fail(("NUMBER",))
        return float(self.advance().text)

    def skip_blank_lines(self) -> None:
        while self.tok.kind == "NEWLINE":
            self.advance()

    # program := rule+
    def program(self, name: str) -> RuleSet:
        rules: list[Rule] = []
        seen: set[str] = set()
        self.skip_blank_lines()
        if self.tok.kind == "EOF":
            raise self.fail(("'rule'",))
        while self.tok.kind != "EOF":
            line = self.tok.line
            rule = self.rule()
            if rule.id in seen:
                raise DuplicateRuleId(rule.id, line)
            seen.add(rule.id)
            rules.append(rule)
            self.skip_blank_lines()
        return RuleSet(name, tuple(rules))

    def rule(self) -> Rule:
        self.expect_word("rule")
        if self.tok.kind != "IDENT" or self.tok.text in KEYWORDS:
            raise self.fail(("IDENT",))
        rule_id = self.advance().text
        self.expect_op(":")
        self.expect_word("when")
        cond = self.expr()
        if not self.is_word("do"):
            raise self.fail(("'and'", "'or'", "'do'"))
        self.advance()
        action = self.action()
        if self.tok.kind != "NEWLINE":
            raise self.fail(("end of line",))
        self.advance()
        return Rule(rule_id, cond, action)

    def expr(self) -> Condition:
        items = [self.term()]
        while self.is_word("or"):
            self.advance()
            items.append(self.term())
        return items[0] if len(items) == 1 else Or(tuple(items))

    def term(self) -> Condition:
        items = [self.factor()]
        while self.is_word("and"):
            self.advance()
            items.append(self.factor())
        return items[0] if len(items) == 1 else And(tuple(items))

    def factor(self) -> Condition:
        tok = self.tok
        if self.is_word("not"):
            self.advance()
            return Not(self.factor())
        if self.is_word("always"):
            self.advance()
            return Always()
        if self.is_op("("):
            self.advance()
            inner = self.expr()
            if not self.is_op(")"):
                raise self.fail(("'and'", "'or'", "')'"))
            self.advance()
            return inner
        if tok.kind == "IDENT" and tok.text not in KEYWORDS:
            self.advance()
            name = tok.text
            if name not in NUMERIC_FIELDS and name not in BOOLEAN_FIELDS:
                raise UnknownField(name, tok.line, tok.column)
            if self.tok.kind == "OP" and self.tok.text in COMPARISON_OPS:
                if name not in NUMERIC_FIELDS:
                    raise RuleSyntaxError(
                        f"boolean field {name!r} cannot be compared",
                        self.tok.line,
                        self.tok.column,
                        ("'and'", "'or'", "'do'", "')'"),
                    )
                op = self.advance().text
                return Compare(name, op, self.expect_number())
            if name in NUMERIC_FIELDS:
                raise self.fail(tuple(repr(op) for op in COMPARISON_OPS))
            return Atom(name)
        raise self.fail(("'not'", "'('", "'always'", "IDENT"))

    def action(self) -> Action:
        tok = self.tok
        if tok.kind == "IDENT" and tok.text in SIMPLE_ACTIONS:
            self.advance()
            return Action(ActionKind(tok.text))
        if self.is_word("set_thrust"):
            self.advance()
            self.expect_op("(")
            left = self.expect_number()
            self.expect_op(",")
            right = self.expect_number()
            self.expect_op(")")
            return Action(ActionKind.SET_THRUST, left, right)
        raise self.fail(tuple(repr(a) for a in SIMPLE_ACTIONS) + ("'set_thrust'",))


def parse(text: str, name: str = "rules") -> RuleSet:
    """Parse rule-program source into a :class:`RuleSet`."""
    return _Parser(text).program(name)


def pretty_print(rs: RuleSet) -> str:
    return rs.canonical_text()
