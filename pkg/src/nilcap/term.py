"""Commutator expressions: syntax tree, parser and printer.

Grammar (factors of a product are separated by whitespace or end at a
bracket, so "x1x2" is a syntax error while "x1[x2,x1]" has two factors)::

    expr      := factor { factor }
    factor    := atom [ "^" int ]
    atom      := "e" | generator | "[" expr { "," expr }1.. "]" | "(" expr ")"
    generator := "x" unsigned-int
    int       := ["-"] unsigned-int

Commutators use the convention [x,y] = x^-1 y^-1 x y, and entries of a
multi-entry commutator are read left-normed: [a,b,c] = [[a,b],c].
"""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from typing import Protocol, TypeVar, Union

import pyparsing as pp

from nilcap.exceptions import ExprSyntaxError, GeneratorIndexError, PreconditionError


@dataclass(frozen=True)
class Identity:
    """The literal e."""


@dataclass(frozen=True)
class Generator:
    index: int


@dataclass(frozen=True)
class Product:
    """Two or more factors; a single factor is written as itself."""

    factors: tuple[WordExpr, ...]

    def __post_init__(self) -> None:
        if len(self.factors) < 2:
            raise PreconditionError("a product needs at least two factors")


@dataclass(frozen=True)
class Power:
    base: WordExpr
    exponent: int


@dataclass(frozen=True)
class Commutator:
    """Left-normed commutator of two or more entries."""

    entries: tuple[WordExpr, ...]

    def __post_init__(self) -> None:
        if len(self.entries) < 2:
            raise PreconditionError("a commutator needs at least two entries")


WordExpr = Union[Identity, Generator, Product, Power, Commutator]


# ── Grammar ──

def _build_grammar() -> pp.ParserElement:
    expr = pp.Forward()
    integer = pp.Regex(r"-?\d+(?!\w)").set_parse_action(lambda t: int(t[0]))
    generator = pp.Regex(r"x(?P<index>\d+)(?!\w)").set_parse_action(
        lambda t: Generator(int(t["index"]))
    )
    identity = pp.Keyword("e").set_parse_action(lambda: Identity())
    commutator = (
        pp.Suppress("[") + expr + pp.OneOrMore(pp.Suppress(",") + expr) + pp.Suppress("]")
    ).set_parse_action(lambda t: Commutator(tuple(t)))
    group = pp.Suppress("(") + expr + pp.Suppress(")")
    atom = identity | generator | commutator | group
    factor = (atom + pp.Optional(pp.Suppress("^") + integer)).set_parse_action(
        lambda t: Power(t[0], t[1]) if len(t) == 2 else t[0]
    )
    expr <<= pp.OneOrMore(factor).set_parse_action(
        lambda t: t[0] if len(t) == 1 else Product(tuple(t))
    )
    return expr


_GRAMMAR = _build_grammar()


def generators_of(e: WordExpr) -> Iterator[int]:
    """Yield every generator index occurring in e."""
    if isinstance(e, Generator):
        yield e.index
    elif isinstance(e, Product):
        for f in e.factors:
            yield from generators_of(f)
    elif isinstance(e, Power):
        yield from generators_of(e.base)
    elif isinstance(e, Commutator):
        for f in e.entries:
            yield from generators_of(f)


def check_generators(e: WordExpr, r: int) -> None:
    """Raise GeneratorIndexError if e mentions a generator outside x1..xr."""
    for index in generators_of(e):
        if not 1 <= index <= r:
            raise GeneratorIndexError(index, r)


def parse_expr(text: str, r: int) -> WordExpr:
    """Parse an expression over x1..xr.

    Args:
        text: Expression text.
        r: Number of generators in scope.

    Returns:
        The syntax tree.

    Raises:
        ExprSyntaxError: If the text does not match the grammar.
        GeneratorIndexError: If a generator index is 0 or exceeds r.
    """
    try:
        result = _GRAMMAR.parse_string(text, parse_all=True)[0]
    except pp.ParseException as exc:
        raise ExprSyntaxError(text, exc.loc, exc.msg) from None
    check_generators(result, r)
    return result


def _format_factor(e: WordExpr) -> str:
    if isinstance(e, (Product, Power)):
        return f"({format_expr(e)})"
    return format_expr(e)


def format_expr(e: WordExpr) -> str:
    """Print an expression so that parse_expr reads back the same tree."""
    if isinstance(e, Identity):
        return "e"
    if isinstance(e, Generator):
        return f"x{e.index}"
    if isinstance(e, Commutator):
        return "[" + ",".join(format_expr(f) for f in e.entries) + "]"
    if isinstance(e, Power):
        return f"{_format_factor(e.base)}^{e.exponent}"
    return " ".join(_format_factor(f) for f in e.factors)


def left_normed(base: WordExpr, tail: Sequence[WordExpr]) -> WordExpr:
    """Return [[..[base,t1],t2],..,tm] as nested binary commutators."""
    if not tail:
        raise PreconditionError("left_normed needs a non-empty tail")
    result = base
    for t in tail:
        result = Commutator((result, t))
    return result


# ── Evaluation ──

T = TypeVar("T")


class GroupArithmetic(Protocol[T]):
    """Operations needed to evaluate an expression in a concrete group."""

    def identity(self) -> T: ...

    def generator(self, index: int) -> T: ...

    def multiply(self, a: T, b: T) -> T: ...

    def inverse(self, a: T) -> T: ...

    def power(self, a: T, n: int) -> T: ...

    def commutator(self, a: T, b: T) -> T: ...


def evaluate(e: WordExpr, group: GroupArithmetic[T]) -> T:
    """Evaluate an expression with the given group operations."""
    if isinstance(e, Identity):
        return group.identity()
    if isinstance(e, Generator):
        return group.generator(e.index)
    if isinstance(e, Power):
        return group.power(evaluate(e.base, group), e.exponent)
    if isinstance(e, Commutator):
        result = evaluate(e.entries[0], group)
        for f in e.entries[1:]:
            result = group.commutator(result, evaluate(f, group))
        return result
    result = evaluate(e.factors[0], group)
    for f in e.factors[1:]:
        result = group.multiply(result, evaluate(f, group))
    return result
