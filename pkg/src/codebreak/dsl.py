"""Predicate DSL over three-digit codes.

A code is an ordered triple of digits 1-5 (blue, yellow, purple); there are
exactly 125 of them. Every verifier rule is a small closed predicate over one
code, expressed in a line-oriented DSL (grammar below), parsed to an AST, and
given meaning by brute-force evaluation over the full code space. Semantic
questions (equivalence, uniqueness, redundancy) are all decided through
``extension``: the subset of the 125 codes a predicate accepts.

Grammar::

    expr  := cmp | agg
    cmp   := COLOR OP (COLOR | INT)
    agg   := "SUM" OP INT
           | "PARITY" "(" (COLOR | "SUM") ")" "=" ("EVEN" | "ODD")
           | "COUNT" "(" INT ")" OP INT
           | "COUNT_EVEN" OP INT
           | ("MAX" | "MIN") "=" COLOR ["STRICT"]
           | "REPEATS" OP INT
           | "ORDER" "=" ("ASC" | "DESC" | "NONE")
    COLOR := "BLUE" | "YELLOW" | "PURPLE"
    OP    := "<" | "=" | ">" | "<=" | ">=" | "!="
    INT   := 0..15

Semantics notes:
  - REPEATS counts duplicated digits: 3 minus the number of distinct digits
    (triple -> 2, one pair -> 1, all distinct -> 0).
  - MAX/MIN without STRICT means the color ties for the extreme; STRICT means
    it beats both other digits outright.
  - ORDER=ASC / ORDER=DESC are strict runs (blue < yellow < purple, resp. >);
    NONE is everything else.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import NamedTuple, Union


class Code(NamedTuple):
    blue: int
    yellow: int
    purple: int

    def text(self) -> str:
        return f"BLUE={self.blue}, YELLOW={self.yellow}, PURPLE={self.purple}"


DIGITS = (1, 2, 3, 4, 5)

ALL_CODES: tuple[Code, ...] = tuple(
    Code(b, y, p) for b in DIGITS for y in DIGITS for p in DIGITS
)

FULL_MASK = (1 << len(ALL_CODES)) - 1


def enumerate_codes() -> list[Code]:
    """All 125 codes in lexicographic (blue, yellow, purple) order."""
    return list(ALL_CODES)


def code_index(code: Code) -> int:
    return (code.blue - 1) * 25 + (code.yellow - 1) * 5 + (code.purple - 1)


class Color(str, Enum):
    BLUE = "BLUE"
    YELLOW = "YELLOW"
    PURPLE = "PURPLE"

    def digit(self, code: Code) -> int:
        if self is Color.BLUE:
            return code.blue
        if self is Color.YELLOW:
            return code.yellow
        return code.purple


class Op(str, Enum):
    LT = "<"
    EQ = "="
    GT = ">"
    LE = "<="
    GE = ">="
    NE = "!="

    def apply(self, a: int, b: int) -> bool:
        if self is Op.LT:
            return a < b
        if self is Op.EQ:
            return a == b
        if self is Op.GT:
            return a > b
        if self is Op.LE:
            return a <= b
        if self is Op.GE:
            return a >= b
        return a != b


ALL_COLORS = (Color.BLUE, Color.YELLOW, Color.PURPLE)


@dataclass(frozen=True)
class Compare:
    """One color's digit against another color or a constant."""

    left: Color
    op: Op
    right: Union[Color, int]


@dataclass(frozen=True)
class SumCompare:
    """Sum of the given colors' digits against a constant.

    The surface grammar only produces the full three-color sum; the narrower
    forms exist for programmatic use and cannot be rendered back to DSL text.
    """

    op: Op
    value: int
    colors: tuple[Color, ...] = ALL_COLORS


@dataclass(frozen=True)
class Parity:
    """Evenness of one digit or of the full sum."""

    target: Union[Color, str]  # a Color or the literal "SUM"
    even: bool


@dataclass(frozen=True)
class CountValue:
    """How many digits equal ``value``, compared to ``count``."""

    value: int
    op: Op
    count: int


@dataclass(frozen=True)
class CountEven:
    """How many digits are even, compared to ``count``."""

    op: Op
    count: int


@dataclass(frozen=True)
class Extremum:
    """Whether a color holds the max/min digit (strict = beats both others)."""

    kind: str  # "MAX" | "MIN"
    color: Color
    strict: bool = False


@dataclass(frozen=True)
class Repeats:
    """Number of duplicated digits (3 - distinct count), compared to ``count``."""

    op: Op
    count: int


@dataclass(frozen=True)
class Ordering:
    """Strictly ascending / strictly descending / neither."""

    direction: str  # "ASC" | "DESC" | "NONE"


PredicateExpr = Union[
    Compare, SumCompare, Parity, CountValue, CountEven, Extremum, Repeats, Ordering
]


def evaluate(expr: PredicateExpr, code: Code) -> bool:
    """True iff ``code`` satisfies the predicate. Pure, no side effects."""
    if isinstance(expr, Compare):
        left = expr.left.digit(code)
        right = expr.right.digit(code) if isinstance(expr.right, Color) else expr.right
        return expr.op.apply(left, right)
    if isinstance(expr, SumCompare):
        return expr.op.apply(sum(c.digit(code) for c in expr.colors), expr.value)
    if isinstance(expr, Parity):
        value = sum(code) if expr.target == "SUM" else expr.target.digit(code)
        return (value % 2 == 0) == expr.even
    if isinstance(expr, CountValue):
        return expr.op.apply(sum(1 for d in code if d == expr.value), expr.count)
    if isinstance(expr, CountEven):
        return expr.op.apply(sum(1 for d in code if d % 2 == 0), expr.count)
    if isinstance(expr, Extremum):
        mine = expr.color.digit(code)
        others = [c.digit(code) for c in ALL_COLORS if c is not expr.color]
        if expr.kind == "MAX":
            return all(mine > o for o in others) if expr.strict else all(mine >= o for o in others)
        return all(mine < o for o in others) if expr.strict else all(mine <= o for o in others)
    if isinstance(expr, Repeats):
        return expr.op.apply(3 - len(set(code)), expr.count)
    if isinstance(expr, Ordering):
        asc = code.blue < code.yellow < code.purple
        desc = code.blue > code.yellow > code.purple
        if expr.direction == "ASC":
            return asc
        if expr.direction == "DESC":
            return desc
        return not asc and not desc
    raise TypeError(f"not a predicate expression: {expr!r}")


@lru_cache(maxsize=None)
def extension_mask(expr: PredicateExpr) -> int:
    """Bitmask over ALL_CODES of the codes the predicate accepts."""
    mask = 0
    for i, code in enumerate(ALL_CODES):
        if evaluate(expr, code):
            mask |= 1 << i
    return mask


def extension(expr: PredicateExpr) -> frozenset[Code]:
    """The subset of the 125 codes satisfying ``expr``."""
    mask = extension_mask(expr)
    return frozenset(code for i, code in enumerate(ALL_CODES) if mask >> i & 1)


def mask_to_codes(mask: int) -> list[Code]:
    return [code for i, code in enumerate(ALL_CODES) if mask >> i & 1]


def equivalent(a: PredicateExpr, b: PredicateExpr) -> bool:
    """Extensional equality over the full code space."""
    return extension_mask(a) == extension_mask(b)


def render(expr: PredicateExpr) -> str:
    """Canonical DSL text for ``expr``; inverse of parse_rule up to equality."""
    if isinstance(expr, Compare):
        right = expr.right.value if isinstance(expr.right, Color) else expr.right
        return f"{expr.left.value} {expr.op.value} {right}"
    if isinstance(expr, SumCompare):
        if tuple(expr.colors) != ALL_COLORS:
            raise ValueError("only the full three-color sum is expressible in the grammar")
        return f"SUM {expr.op.value} {expr.value}"
    if isinstance(expr, Parity):
        target = expr.target if expr.target == "SUM" else expr.target.value
        return f"PARITY({target}) = {'EVEN' if expr.even else 'ODD'}"
    if isinstance(expr, CountValue):
        return f"COUNT({expr.value}) {expr.op.value} {expr.count}"
    if isinstance(expr, CountEven):
        return f"COUNT_EVEN {expr.op.value} {expr.count}"
    if isinstance(expr, Extremum):
        suffix = " STRICT" if expr.strict else ""
        return f"{expr.kind} = {expr.color.value}{suffix}"
    if isinstance(expr, Repeats):
        return f"REPEATS {expr.op.value} {expr.count}"
    if isinstance(expr, Ordering):
        return f"ORDER = {expr.direction}"
    raise TypeError(f"not a predicate expression: {expr!r}")


class ParseError(ValueError):
    """Rule text rejected, with the offending token's position."""

    def __init__(self, message: str, position: int, token_index: int):
        super().__init__(f"{message} at token {token_index} (char {position})")
        self.position = position
        self.token_index = token_index


_TOKEN_RE = re.compile(
    r"(?P<name>[A-Za-z_]+)|(?P<int>\d+)|(?P<op><=|>=|!=|<|=|>)|(?P<lparen>\()|(?P<rparen>\))"
)

_COLORS = {c.value: c for c in Color}
_OPS = {o.value: o for o in Op}


class _Token(NamedTuple):
    kind: str
    text: str
    position: int
    index: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, len(tokens) + 1)
        kind = match.lastgroup or ""
        tokens.append(_Token(kind, match.group(), pos, len(tokens) + 1))
        pos = match.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.cursor = 0

    def _fail(self, message: str) -> ParseError:
        if self.cursor < len(self.tokens):
            token = self.tokens[self.cursor]
            return ParseError(message, token.position, token.index)
        return ParseError(message, len(self.text), len(self.tokens) + 1)

    def _peek(self) -> _Token | None:
        return self.tokens[self.cursor] if self.cursor < len(self.tokens) else None

    def _take(self, kind: str, message: str) -> _Token:
        token = self._peek()
        if token is None or token.kind != kind:
            raise self._fail(message)
        self.cursor += 1
        return token

    def _take_op(self) -> Op:
        token = self._take("op", "expected a comparison operator")
        return _OPS[token.text]

    def _take_int(self) -> int:
        token = self._take("int", "expected an integer")
        value = int(token.text)
        if not 0 <= value <= 15:
            raise ParseError(f"integer {value} outside 0-15", token.position, token.index)
        return value

    def _take_color(self) -> Color:
        token = self._take("name", "expected a color")
        if token.text not in _COLORS:
            raise ParseError(f"unknown color {token.text!r}", token.position, token.index)
        return _COLORS[token.text]

    def _take_word(self, *choices: str) -> str:
        token = self._take("name", f"expected one of {', '.join(choices)}")
        if token.text not in choices:
            raise ParseError(
                f"expected one of {', '.join(choices)}, got {token.text!r}",
                token.position,
                token.index,
            )
        return token.text

    def parse(self) -> PredicateExpr:
        head = self._peek()
        if head is None:
            raise self._fail("empty rule")
        if head.kind != "name":
            raise self._fail("rule must start with a keyword or color")
        expr = self._dispatch(head)
        if self.cursor != len(self.tokens):
            raise self._fail("unexpected trailing input")
        return expr

    def _dispatch(self, head: _Token) -> PredicateExpr:
        word = head.text
        if word in _COLORS:
            self.cursor += 1
            op = self._take_op()
            nxt = self._peek()
            if nxt is None:
                raise self._fail("expected a color or integer")
            if nxt.kind == "int":
                return Compare(_COLORS[word], op, self._take_int())
            return Compare(_COLORS[word], op, self._take_color())
        if word == "SUM":
            self.cursor += 1
            return SumCompare(self._take_op(), self._take_int())
        if word == "PARITY":
            self.cursor += 1
            self._take("lparen", "expected '('")
            token = self._take("name", "expected a color or SUM")
            if token.text == "SUM":
                target: Union[Color, str] = "SUM"
            elif token.text in _COLORS:
                target = _COLORS[token.text]
            else:
                raise ParseError(
                    f"unknown parity target {token.text!r}", token.position, token.index
                )
            self._take("rparen", "expected ')'")
            op = self._take_op()
            if op is not Op.EQ:
                raise self._fail("parity only supports '='")
            return Parity(target, self._take_word("EVEN", "ODD") == "EVEN")
        if word == "COUNT":
            self.cursor += 1
            self._take("lparen", "expected '('")
            value = self._take_int()
            self._take("rparen", "expected ')'")
            return CountValue(value, self._take_op(), self._take_int())
        if word == "COUNT_EVEN":
            self.cursor += 1
            return CountEven(self._take_op(), self._take_int())
        if word in ("MAX", "MIN"):
            self.cursor += 1
            op = self._take_op()
            if op is not Op.EQ:
                raise self._fail("extremum only supports '='")
            color = self._take_color()
            strict = False
            if self._peek() is not None and self._peek().kind == "name":
                self._take_word("STRICT")
                strict = True
            return Extremum(word, color, strict)
        if word == "REPEATS":
            self.cursor += 1
            return Repeats(self._take_op(), self._take_int())
        if word == "ORDER":
            self.cursor += 1
            op = self._take_op()
            if op is not Op.EQ:
                raise self._fail("ordering only supports '='")
            return Ordering(self._take_word("ASC", "DESC", "NONE"))
        raise ParseError(f"unknown keyword {word!r}", head.position, head.index)


def parse_rule(text: str) -> PredicateExpr:
    """Parse one rule in the DSL grammar; raises ParseError otherwise."""
    return _Parser(text).parse()
