"""Finite partition of the percept space induced by a rule program's literals."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .ast import (
    BOOLEAN_FIELDS,
    FIELD_ORDER,
    NUMERIC_FIELDS,
    Compare,
    RuleSet,
    walk,
)

# Where the threshold point itself goes. "<" and ">=" cannot tell t from
# values just above it, so the point joins the upper interval; "<=" and ">"
# put it in the lower one. Mixed use needs a point cell of its own.
_UP_OPS = frozenset({"<", ">="})
_DOWN_OPS = frozenset({"<=", ">"})


@dataclass(frozen=True)
class Piece:
    """One interval of a numeric axis."""

    lo: float
    hi: float
    lo_closed: bool
    hi_closed: bool

    def contains(self, x: float) -> bool:
        above = x >= self.lo if self.lo_closed else x > self.lo
        below = x <= self.hi if self.hi_closed else x < self.hi
        return above and below

    @property
    def representative(self) -> float:
        if self.lo == self.hi:
            return self.lo
        if self.lo == -math.inf and self.hi == math.inf:
            return 0.0
        if self.lo == -math.inf:
            return self.hi - 1.0
        if self.hi == math.inf:
            return self.lo + 1.0
        return (self.lo + self.hi) / 2.0

    def sample(self, rng: np.random.Generator) -> float:
        if self.lo == self.hi:
            return self.lo
        while True:
            if self.lo == -math.inf and self.hi == math.inf:
                x = float(rng.normal(0.0, 10.0))
            elif self.lo == -math.inf:
                x = self.hi - float(rng.exponential(1.0))
            elif self.hi == math.inf:
                x = self.lo + float(rng.exponential(1.0))
            else:
                x = float(rng.uniform(self.lo, self.hi))
            if self.contains(x):
                return x

    def __str__(self) -> str:
        if self.lo == self.hi:
            return f"{{{self.lo!r}}}"
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo!r}, {self.hi!r}{right}"


@dataclass(frozen=True)
class Axis:
    field: str
    pieces: tuple[Piece, ...] = ()  # empty for boolean axes

    @property
    def is_boolean(self) -> bool:
        return not self.pieces

    def __len__(self) -> int:
        return 2 if self.is_boolean else len(self.pieces)

    def value(self, index: int) -> float | bool:
        return bool(index) if self.is_boolean else self.pieces[index].representative

    def locate(self, value: float | bool) -> int:
        if self.is_boolean:
            return int(bool(value))
        for i, p in enumerate(self.pieces):
            if p.contains(value):
                return i
        raise ValueError(f"{value!r} outside every piece of {self.field}")


def numeric_pieces(thresholds: Iterable[tuple[str, float]]) -> tuple[Piece, ...]:
    """Interval partition for a set of (op, threshold) literals on one field."""
    modes: dict[float, set[str]] = {}
    for op, t in thresholds:
        modes.setdefault(float(t), set()).add("up" if op in _UP_OPS else "down")
    pieces: list[Piece] = []
    lo, lo_closed = -math.inf, False
    for t in sorted(modes):
        kinds = modes[t]
        if kinds == {"up"}:
            pieces.append(Piece(lo, t, lo_closed, False))
            lo, lo_closed = t, True
        elif kinds == {"down"}:
            pieces.append(Piece(lo, t, lo_closed, True))
            lo, lo_closed = t, False
        else:
            pieces.append(Piece(lo, t, lo_closed, False))
            pieces.append(Piece(t, t, True, True))
            lo, lo_closed = t, False
    pieces.append(Piece(lo, math.inf, lo_closed, False))
    return tuple(pieces)


class CellSpace:
    """Cross product of per-field axes, enumerated in row-major order."""

    def __init__(self, axes: Sequence[Axis]):
        self.axes = tuple(axes)
        self._sizes = tuple(len(a) for a in self.axes)

    @property
    def fields(self) -> tuple[str, ...]:
        return tuple(a.field for a in self.axes)

    def axis(self, field: str) -> Axis:
        for a in self.axes:
            if a.field == field:
                return a
        raise KeyError(field)

    def __len__(self) -> int:
        return math.prod(self._sizes)

    def __iter__(self) -> Iterator[int]:
        return iter(range(len(self)))

    def coords(self, cell: int) -> tuple[int, ...]:
        if not 0 <= cell < len(self):
            raise IndexError(cell)
        out = []
        for size in reversed(self._sizes):
            cell, r = divmod(cell, size)
            out.append(r)
        return tuple(reversed(out))

    def index(self, coords: Sequence[int]) -> int:
        cell = 0
        for c, size in zip(coords, self._sizes):
            cell = cell * size + c
        return cell

    def representative(self, cell: int) -> dict[str, float | bool]:
        return {a.field: a.value(c) for a, c in zip(self.axes, self.coords(cell))}

    def sample(self, cell: int, rng: np.random.Generator) -> dict[str, float | bool]:
        out: dict[str, float | bool] = {}
        for a, c in zip(self.axes, self.coords(cell)):
            out[a.field] = bool(c) if a.is_boolean else a.pieces[c].sample(rng)
        return out

    def locate(self, values: Mapping[str, float | bool]) -> int:
        return self.index([a.locate(values[a.field]) for a in self.axes])

    def all_coords(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(*(range(s) for s in self._sizes))


def thresholds_by_field(rs: RuleSet) -> dict[str, list[tuple[str, float]]]:
    out: dict[str, list[tuple[str, float]]] = {}
    for rule in rs.rules:
        for node in walk(rule.condition):
            if isinstance(node, Compare):
                out.setdefault(node.field, []).append((node.op, node.value))
    return out


def partition_percepts(
    rs: RuleSet,
    *,
    extra_thresholds: Mapping[str, Iterable[tuple[str, float]]] | None = None,
    extra_booleans: Iterable[str] = (),
    exclude: Iterable[str] = (),
) -> CellSpace:
    """Cell space over every field ``rs`` mentions.

    Numeric fields are cut at each literal threshold; boolean fields add a
    two-valued axis. ``extra_*`` add axes/cuts the rules themselves do not
    mention (the verifier needs the belief-clearing threshold, for instance).
    """
    thresholds = thresholds_by_field(rs)
    for f, extra in (extra_thresholds or {}).items():
        thresholds.setdefault(f, []).extend(extra)
    booleans = {f for f in rs.fields() if f in BOOLEAN_FIELDS} | set(extra_booleans)
    skip = set(exclude)
    axes = []
    for f in FIELD_ORDER:
        if f in skip:
            continue
        if f in NUMERIC_FIELDS and f in thresholds:
            axes.append(Axis(f, numeric_pieces(thresholds[f])))
        elif f in booleans:
            axes.append(Axis(f))
    return CellSpace(axes)
