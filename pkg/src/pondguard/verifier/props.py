"""Temporal properties over controller model states, and the ``.prop`` file format.

One property per line::

    name : G( expr )

    expr  := or ["->" expr]
    or    := and ("|" and)*
    and   := unary ("&" unary)*
    unary := "!" unary | "X" or | "F<=" INT or | "(" expr ")" | atom
    atom  := "action=" ACTION | "contact" | "voted_trip" | "trip_latched" | "wdt>" INT

``X`` and ``F<=k`` scope over a whole disjunction, so
``voted_trip -> F<=2 action=stop | action=reverse`` reads as bounded response
to either action.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence, Union

from ..rbr_engine import Percept
from ..rule_dsl.ast import ActionKind

STATE_FLAGS = ("contact", "voted_trip", "trip_latched")


@dataclass(frozen=True)
class ActionIs:
    kind: ActionKind

    def __str__(self) -> str:
        return f"action={self.kind.value}"


@dataclass(frozen=True)
class Flag:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class WdtAbove:
    n: int

    def __str__(self) -> str:
        return f"wdt>{self.n}"


@dataclass(frozen=True)
class PNot:
    f: "Formula"

    def __str__(self) -> str:
        return f"!{_wrap(self.f)}"


@dataclass(frozen=True)
class PAnd:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"{_wrap(self.left)} & {_wrap(self.right)}"


@dataclass(frozen=True)
class POr:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"{_wrap(self.left)} | {_wrap(self.right)}"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"{_wrap(self.left)} -> {_wrap(self.right)}"


@dataclass(frozen=True)
class Next:
    f: "Formula"

    def __str__(self) -> str:
        return f"X {_wrap(self.f)}"


@dataclass(frozen=True)
class Within:
    """Bounded eventually: ``f`` holds at some step in 0..k."""

    k: int
    f: "Formula"

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("bounded response needs k >= 1")

    def __str__(self) -> str:
        return f"F<={self.k} {_wrap(self.f)}"


@dataclass(frozen=True)
class Globally:
    body: "Formula"

    def __str__(self) -> str:
        return f"G( {self.body} )"


Formula = Union[ActionIs, Flag, WdtAbove, PNot, PAnd, POr, Implies, Next, Within]
_ATOMS = (ActionIs, Flag, WdtAbove)


def _wrap(f: Formula) -> str:
    return str(f) if isinstance(f, _ATOMS) else f"({f})"


@dataclass(frozen=True)
class Property:
    name: str
    formula: Globally

    def __str__(self) -> str:
        return f"{self.name} : {self.formula}"


def temporal_depth(f: Formula) -> int:
    if isinstance(f, _ATOMS):
        return 0
    if isinstance(f, PNot):
        return temporal_depth(f.f)
    if isinstance(f, (PAnd, POr, Implies)):
        return max(temporal_depth(f.left), temporal_depth(f.right))
    if isinstance(f, Next):
        return 1 + temporal_depth(f.f)
    if isinstance(f, Within):
        return f.k + temporal_depth(f.f)
    raise TypeError(f)


def is_state_formula(f: Formula) -> bool:
    return temporal_depth(f) == 0


def eval_state(f: Formula, state, percept: Percept) -> bool:
    """Evaluate a non-temporal formula on one model state."""
    if isinstance(f, ActionIs):
        return state.last_action.kind is f.kind
    if isinstance(f, Flag):
        if f.name == "trip_latched":
            return state.beliefs.trip_latched
        return bool(getattr(percept, f.name))
    if isinstance(f, WdtAbove):
        return state.wdt_counter > f.n
    if isinstance(f, PNot):
        return not eval_state(f.f, state, percept)
    if isinstance(f, PAnd):
        return eval_state(f.left, state, percept) and eval_state(f.right, state, percept)
    if isinstance(f, POr):
        return eval_state(f.left, state, percept) or eval_state(f.right, state, percept)
    if isinstance(f, Implies):
        return (not eval_state(f.left, state, percept)) or eval_state(f.right, state, percept)
    raise ValueError(f"temporal operator in state formula: {f}")


def eval_path(f: Formula, path: Sequence[tuple], pos: int = 0) -> bool:
    """Linear-time evaluation along a finite path of (state, percept) pairs.

    The path must extend at least ``temporal_depth(f)`` steps past ``pos``.
    """
    if isinstance(f, _ATOMS):
        state, percept = path[pos]
        return eval_state(f, state, percept)
    if isinstance(f, PNot):
        return not eval_path(f.f, path, pos)
    if isinstance(f, PAnd):
        return eval_path(f.left, path, pos) and eval_path(f.right, path, pos)
    if isinstance(f, POr):
        return eval_path(f.left, path, pos) or eval_path(f.right, path, pos)
    if isinstance(f, Implies):
        return (not eval_path(f.left, path, pos)) or eval_path(f.right, path, pos)
    if isinstance(f, Next):
        if pos + 1 >= len(path):
            raise IndexError("path too short for X")
        return eval_path(f.f, path, pos + 1)
    if isinstance(f, Within):
        if pos + f.k >= len(path):
            raise IndexError("path too short for F<=k")
        return any(eval_path(f.f, path, pos + j) for j in range(f.k + 1))
    raise TypeError(f)


# -- parsing ------------------------------------------------------------------


class PropertySyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


_TOK = re.compile(r"\s*(?:(F<=)|(->)|([!&|():=>])|(\d+)|([A-Za-z_][A-Za-z0-9_]*))")


class _PropParser:
    def __init__(self, text: str, line: int):
        self.line = line
        self.toks: list[tuple[str, int]] = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOK.match(text, pos)
            if m is None or m.end() == pos:
                col = pos + 1 + (len(text[pos:]) - len(text[pos:].lstrip()))
                raise PropertySyntaxError(f"unexpected character {text[col - 1]!r}", line, col)
            tok = next(g for g in m.groups() if g is not None)
            self.toks.append((tok, m.start(m.lastindex) + 1))
            pos = m.end()
        self.toks.append(("", len(text) + 1))
        self.i = 0

    @property
    def tok(self) -> str:
        return self.toks[self.i][0]

    def fail(self, what: str) -> PropertySyntaxError:
        tok, col = self.toks[self.i]
        found = repr(tok) if tok else "end of line"
        return PropertySyntaxError(f"expected {what}, found {found}", self.line, col)

    def eat(self, tok: str) -> None:
        if self.tok != tok:
            raise self.fail(repr(tok))
        self.i += 1

    def int_(self) -> int:
        if not self.tok.isdigit():
            raise self.fail("an integer")
        v = int(self.tok)
        self.i += 1
        return v

    def property(self) -> Property:
        name = self.tok
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name or "-"):
            raise self.fail("a property name")
        self.i += 1
        self.eat(":")
        self.eat("G")
        self.eat("(")
        body = self.expr()
        self.eat(")")
        if self.tok != "":
            raise self.fail("end of line")
        return Property(name, Globally(body))

    def expr(self) -> Formula:
        left = self.or_()
        if self.tok == "->":
            self.i += 1
            return Implies(left, self.expr())
        return left

    def or_(self) -> Formula:
        f = self.and_()
        while self.tok == "|":
            self.i += 1
            f = POr(f, self.and_())
        return f

    def and_(self) -> Formula:
        f = self.unary()
        while self.tok == "&":
            self.i += 1
            f = PAnd(f, self.unary())
        return f

    def unary(self) -> Formula:
        tok = self.tok
        if tok == "!":
            self.i += 1
            return PNot(self.unary())
        if tok == "X":
            self.i += 1
            return Next(self.or_())
        if tok == "F<=":
            self.i += 1
            k = self.int_()
            if k < 1:
                self.i -= 1
                raise self.fail("a bound k >= 1")
            return Within(k, self.or_())
        if tok == "(":
            self.i += 1
            f = self.expr()
            self.eat(")")
            return f
        if tok == "action":
            self.i += 1
            self.eat("=")
            try:
                kind = ActionKind(self.tok)
            except ValueError:
                raise self.fail("an action name") from None
            self.i += 1
            return ActionIs(kind)
        if tok == "wdt":
            self.i += 1
            self.eat(">")
            return WdtAbove(self.int_())
        if tok in STATE_FLAGS:
            self.i += 1
            return Flag(tok)
        raise self.fail("an atom, '!', 'X', 'F<=' or '('")


def parse_property(text: str, line: int = 1) -> Property:
    return _PropParser(text, line).property()


def parse_properties(text: str) -> list[Property]:
    """Parse a ``.prop`` file; blank lines and ``#`` comments are skipped."""
    props = []
    for n, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if body.strip():
            props.append(parse_property(body, n))
    names = [p.name for p in props]
    dupes = {x for x in names if names.count(x) > 1}
    if dupes:
        raise PropertySyntaxError(f"duplicate property name(s) {sorted(dupes)}", 0, 0)
    return props
