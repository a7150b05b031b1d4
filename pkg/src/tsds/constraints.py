"""Constraint-expression mini-language: projection, selections, one filter.

Grammar (EBNF, also documented in the README):

    constraint  = [ projection ] , { "&" , clause } ;
    projection  = identifier , { "," , identifier } ;
    clause      = selection | filter-call ;
    selection   = identifier , op , literal ;
    op          = "<=" | ">=" | "==" | "!=" | "<" | ">" ;
    literal     = number | timestamp ;            (* timestamp: ISO-8601 subset *)
    filter-call = identifier , "(" , [ args ] , ")" ;

A string may also start directly with a clause (empty projection), with or
without a leading "&". Literal lexemes are preserved verbatim so that
``render(parse(s)) == s``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

from .errors import (
    ArityError,
    ConstraintSyntaxError,
    MultipleFilters,
    UnknownFilter,
)
from .timecodec import parse_timestamp

OPS = ("<=", ">=", "==", "!=", "<", ">")

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_FILTER_RE = re.compile(r"(?P<name>[A-Za-z_][A-Za-z0-9_]*)\((?P<args>.*)\)\Z")
_SELECTION_RE = re.compile(
    r"(?P<operand>[A-Za-z_][A-Za-z0-9_]*)(?P<op><=|>=|==|!=|<|>)(?P<literal>.+)\Z")
_TIME_LITERAL_RE = re.compile(r"\d{4}-\d{2}-\d{2}(T.*)?\Z")
_NUMBER_RE = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?\Z")
_INT_RE = re.compile(r"[+-]?\d+\Z")


@dataclass(frozen=True)
class Literal:
    """A selection literal; the lexeme is kept exactly as written."""

    lexeme: str
    kind: str  # "number" | "time"

    @property
    def number(self) -> float:
        return float(self.lexeme)

    @property
    def is_time(self) -> bool:
        return self.kind == "time"


@dataclass(frozen=True)
class Selection:
    operand: str
    op: str
    literal: Literal

    def render(self) -> str:
        return f"{self.operand}{self.op}{self.literal.lexeme}"


# name -> (argument kinds, human description of the signature)
FILTER_SIGNATURES: dict[str, tuple[tuple[str, ...], str]] = {
    "stride": (("posint",), "stride(n) with integer n >= 1"),
    "thin": (("posint",), "thin(n) with integer n >= 1"),
    "replace_missing": (("double_or_nan",), "replace_missing(v) with a number or NaN"),
    "exclude_missing": ((), "exclude_missing()"),
    "binavg": (("poswidth",), "binavg(width) with width > 0 in dataset time units"),
    "binmin": (("poswidth",), "binmin(width) with width > 0 in dataset time units"),
    "binmax": (("poswidth",), "binmax(width) with width > 0 in dataset time units"),
    "bincount": (("poswidth",), "bincount(width) with width > 0 in dataset time units"),
}


@dataclass(frozen=True)
class FilterSpec:
    name: str
    arg_lexemes: tuple[str, ...] = ()

    @property
    def args(self) -> tuple[float, ...]:
        kinds, _ = FILTER_SIGNATURES[self.name]
        return tuple(
            math.nan if lex.lower() == "nan" else float(lex)
            for lex, _k in zip(self.arg_lexemes, kinds)
        )

    def render(self) -> str:
        return f"{self.name}({','.join(self.arg_lexemes)})"


Clause = Union[Selection, FilterSpec]


@dataclass(frozen=True)
class ConstraintExpression:
    """Projection plus ordered clauses; clause order is preserved for rendering
    but carries no meaning (selection/filter roles are fixed by the pipeline)."""

    projection: tuple[str, ...] = ()
    clauses: tuple[Clause, ...] = ()
    leading_amp: bool = False

    @property
    def selections(self) -> tuple[Selection, ...]:
        return tuple(c for c in self.clauses if isinstance(c, Selection))

    @property
    def filter(self) -> FilterSpec | None:
        for c in self.clauses:
            if isinstance(c, FilterSpec):
                return c
        return None

    def render(self) -> str:
        parts = [",".join(self.projection)]
        if self.leading_amp and not self.projection:
            pass  # keep the empty first segment => leading '&'
        elif not self.projection and self.clauses:
            parts = []  # clauses start immediately, no leading '&'
        parts.extend(c.render() for c in self.clauses)
        return "&".join(parts)


def _validate_filter_args(name: str, lexemes: tuple[str, ...], position: int) -> None:
    kinds, signature = FILTER_SIGNATURES[name]
    if len(lexemes) != len(kinds):
        raise ArityError(
            f"{name}() takes {len(kinds)} argument(s), got {len(lexemes)}; expected {signature}",
            position=position)
    for lex, kind in zip(lexemes, kinds):
        if kind == "posint":
            if not _INT_RE.match(lex) or int(lex) < 1:
                raise ArityError(f"{name}() needs {signature}, got {lex!r}", position=position)
        elif kind == "poswidth":
            if not _NUMBER_RE.match(lex) or not float(lex) > 0:
                raise ArityError(f"{name}() needs {signature}, got {lex!r}", position=position)
        elif kind == "double_or_nan":
            if lex.lower() != "nan" and not _NUMBER_RE.match(lex):
                raise ArityError(f"{name}() needs {signature}, got {lex!r}", position=position)


def _parse_clause(piece: str, position: int) -> Clause:
    m = _FILTER_RE.match(piece)
    if m:
        name = m.group("name")
        if name not in FILTER_SIGNATURES:
            raise UnknownFilter(f"unknown filter {name!r}", position=position)
        args_text = m.group("args").strip()
        lexemes = tuple(a.strip() for a in args_text.split(",")) if args_text else ()
        _validate_filter_args(name, lexemes, position)
        return FilterSpec(name, lexemes)

    m = _SELECTION_RE.match(piece)
    if m:
        lex = m.group("literal")
        literal_pos = position + len(m.group("operand")) + len(m.group("op"))
        if _TIME_LITERAL_RE.match(lex):
            try:
                parse_timestamp(lex)
            except Exception:
                raise ConstraintSyntaxError(
                    f"bad timestamp literal {lex!r}", position=literal_pos) from None
            literal = Literal(lex, "time")
        elif _NUMBER_RE.match(lex):
            literal = Literal(lex, "number")
        else:
            raise ConstraintSyntaxError(
                f"bad literal {lex!r} (number or ISO-8601 timestamp expected)",
                position=literal_pos)
        return Selection(m.group("operand"), m.group("op"), literal)

    raise ConstraintSyntaxError(
        f"cannot parse clause {piece!r} (expected 'name OP literal' or 'filter(args)')",
        position=position)


def _looks_like_clause(piece: str) -> bool:
    return bool(_FILTER_RE.match(piece)) or any(op in piece for op in ("<", ">", "=", "!"))


def parse_constraint(s: str) -> ConstraintExpression:
    """Parse a percent-decoded URL query string into a ConstraintExpression."""
    if s == "":
        return ConstraintExpression()

    pieces = s.split("&")
    positions = []
    pos = 0
    for piece in pieces:
        positions.append(pos)
        pos += len(piece) + 1

    projection: tuple[str, ...] = ()
    leading_amp = False
    first_clause = 0
    head = pieces[0]
    if head == "":
        leading_amp = True
        first_clause = 1
    elif _looks_like_clause(head):
        first_clause = 0
    else:
        names = head.split(",")
        for offset_base, name in zip(_csv_positions(head, positions[0]), names):
            if not _IDENT_RE.match(name):
                raise ConstraintSyntaxError(
                    f"bad variable name {name!r} in projection", position=offset_base)
        projection = tuple(names)
        first_clause = 1

    clauses: list[Clause] = []
    seen_filter = False
    for piece, position in zip(pieces[first_clause:], positions[first_clause:]):
        if piece == "":
            raise ConstraintSyntaxError("empty clause", position=position)
        clause = _parse_clause(piece, position)
        if isinstance(clause, FilterSpec):
            if seen_filter:
                raise MultipleFilters(
                    "only one filter may be applied per request", position=position)
            seen_filter = True
        clauses.append(clause)

    return ConstraintExpression(projection, tuple(clauses), leading_amp)


def _csv_positions(text: str, base: int) -> list[int]:
    out = [base]
    for i, ch in enumerate(text):
        if ch == ",":
            out.append(base + i + 1)
    return out


def render_constraint(ce: ConstraintExpression) -> str:
    return ce.render()
