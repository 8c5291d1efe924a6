"""Hall bases of basic commutators and the shove operation [u<-v].

Basic commutators are ordered by weight first. Generators compare by index.
Composite commutators of equal weight compare by right entry first, then by
left entry, recursively. Under this order a commutator [u,v] with u, v basic
is basic iff u > v and, when u = [a,b], b <= v.
"""

from __future__ import annotations

import functools
import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field

from sympy import divisors
from sympy.functions.combinatorial.numbers import mobius

from nilcap.config import load_settings
from nilcap.exceptions import NotBasicError, PreconditionError, ResourceLimitError, ShoveUndefinedError
from nilcap.term import Commutator, Generator, WordExpr, format_expr

logger = logging.getLogger(__name__)


@functools.total_ordering
class BasicCommutator:
    """A generator x_i or a bracket [left, right] of two commutators.

    Instances are immutable and hashable; equality is structural.
    Construction does not check the Hall conditions, see is_basic().
    """

    def __init__(
        self,
        generator: int | None = None,
        left: BasicCommutator | None = None,
        right: BasicCommutator | None = None,
    ):
        if generator is not None:
            if left is not None or right is not None:
                raise PreconditionError("a generator leaf has no entries")
            weight = 1
            key: tuple = (1, generator)
            spine: tuple[BasicCommutator, ...] = (self,)
        else:
            if left is None or right is None:
                raise PreconditionError("a bracket needs both entries")
            weight = left.weight + right.weight
            key = (weight, right.key, left.key)
            spine = left.spine + (right,)
        object.__setattr__(self, "generator", generator)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)
        object.__setattr__(self, "weight", weight)
        object.__setattr__(self, "key", key)
        object.__setattr__(self, "spine", spine)
        object.__setattr__(self, "_hash", hash(key))

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("BasicCommutator is immutable")

    @classmethod
    def leaf(cls, index: int) -> BasicCommutator:
        return cls(generator=index)

    @classmethod
    def node(cls, left: BasicCommutator, right: BasicCommutator) -> BasicCommutator:
        return cls(left=left, right=right)

    @property
    def is_generator(self) -> bool:
        return self.generator is not None

    @property
    def smallest_generator(self) -> int:
        """Smallest generator index occurring in the commutator."""
        return min(self.generators())

    def generators(self) -> Iterator[int]:
        if self.generator is not None:
            yield self.generator
        else:
            yield from self.left.generators()
            yield from self.right.generators()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BasicCommutator):
            return NotImplemented
        return self.key == other.key

    def __lt__(self, other: BasicCommutator) -> bool:
        return self.key < other.key

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"BasicCommutator({self})"

    def __str__(self) -> str:
        return format_expr(to_expr(self))


def compare(a: BasicCommutator, b: BasicCommutator) -> int:
    """Return -1, 0 or 1 as a is less than, equal to, or greater than b."""
    if a.key == b.key:
        return 0
    return -1 if a.key < b.key else 1


def right_entry(c: BasicCommutator) -> BasicCommutator:
    if c.is_generator:
        raise PreconditionError(f"{c} has no right entry")
    return c.right


def is_basic(c: BasicCommutator) -> bool:
    """Check the Hall conditions at every node of c."""
    if c.is_generator:
        return True
    u, v = c.left, c.right
    if not (is_basic(u) and is_basic(v) and u > v):
        return False
    return u.is_generator or u.right <= v


def from_spine(entries: Sequence[BasicCommutator]) -> BasicCommutator:
    """Build the left-normed commutator [c1, c2, ..., cn]."""
    result = entries[0]
    for c in entries[1:]:
        result = BasicCommutator.node(result, c)
    return result


def to_expr(c: BasicCommutator) -> WordExpr:
    if c.is_generator:
        return Generator(c.generator)
    return Commutator(tuple(to_expr(s) for s in c.spine))


def from_expr(e: WordExpr) -> BasicCommutator:
    """Convert a generator or commutator expression into a basic commutator.

    Raises:
        NotBasicError: If e is not a commutator of generators satisfying
            the Hall conditions.
    """
    c = _tree_of(e)
    if c is None or not is_basic(c):
        raise NotBasicError(format_expr(e))
    return c


def _tree_of(e: WordExpr) -> BasicCommutator | None:
    if isinstance(e, Generator):
        return BasicCommutator.leaf(e.index)
    if isinstance(e, Commutator):
        parts = [_tree_of(f) for f in e.entries]
        if any(p is None for p in parts):
            return None
        return from_spine(parts)
    return None


# ── Bases ──

@dataclass(frozen=True, eq=False)
class BasisTable:
    """All basic commutators on x1..xr of weight <= k, ascending."""

    r: int
    k: int
    elements: tuple[BasicCommutator, ...]
    _positions: dict[BasicCommutator, int] = field(repr=False, default_factory=dict)

    def __post_init__(self) -> None:
        self._positions.update({c: i for i, c in enumerate(self.elements)})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BasisTable):
            return NotImplemented
        return (self.r, self.k) == (other.r, other.k)

    def __hash__(self) -> int:
        return hash((self.r, self.k))

    def __len__(self) -> int:
        return len(self.elements)

    def __getitem__(self, i: int) -> BasicCommutator:
        return self.elements[i]

    def __iter__(self) -> Iterator[BasicCommutator]:
        return iter(self.elements)

    def __contains__(self, c: object) -> bool:
        return c in self._positions

    def position(self, c: BasicCommutator) -> int:
        try:
            return self._positions[c]
        except KeyError:
            raise NotBasicError(f"{c} (not in basis r={self.r}, k={self.k})") from None

    def weight(self, i: int) -> int:
        return self.elements[i].weight

    def smallest_generator(self, i: int) -> int:
        return self.elements[i].smallest_generator

    def layer(self, w: int) -> range:
        """Positions of the weight-w entries."""
        positions = [i for i, c in enumerate(self.elements) if c.weight == w]
        if not positions:
            return range(0)
        return range(positions[0], positions[-1] + 1)

    def describe(self) -> str:
        return f"basis(r={self.r}, k={self.k})"


def witt_count(r: int, w: int) -> int:
    """Number of basic commutators of weight exactly w on r generators."""
    if r < 1 or w < 1:
        raise PreconditionError("witt_count needs r >= 1 and w >= 1")
    total = sum(int(mobius(d)) * r ** (w // d) for d in divisors(w))
    return total // w


@functools.lru_cache(maxsize=64)
def _generate(r: int, k: int, cap: int) -> BasisTable:
    by_weight: dict[int, list[BasicCommutator]] = {1: [BasicCommutator.leaf(i) for i in range(1, r + 1)]}
    count = r
    for w in range(2, k + 1):
        layer: list[BasicCommutator] = []
        for wu in range(w - 1, 0, -1):
            wv = w - wu
            if wv > wu:
                break
            for u in by_weight[wu]:
                for v in by_weight[wv]:
                    if u > v and (u.is_generator or u.right <= v):
                        layer.append(BasicCommutator.node(u, v))
        count += len(layer)
        if count > cap:
            raise ResourceLimitError(f"Hall basis r={r}, k={k}", count, cap)
        layer.sort()
        by_weight[w] = layer
        logger.debug("basis r=%d: %d commutators of weight %d", r, len(layer), w)
    elements = tuple(c for w in range(1, k + 1) for c in by_weight[w])
    return BasisTable(r=r, k=k, elements=elements)


def generate_basis(r: int, k: int) -> BasisTable:
    """All Hall-valid basic commutators of weight <= k on x1..xr, sorted.

    Raises:
        PreconditionError: If r < 1 or k < 1.
        ResourceLimitError: If the basis would exceed the configured cap.
    """
    if r < 1 or k < 1:
        raise PreconditionError("generate_basis needs r >= 1 and k >= 1")
    return _generate(r, k, load_settings().max_basis)


# ── Shoving ──

def shove(u: BasicCommutator, v: BasicCommutator) -> BasicCommutator:
    """[u<-v]: insert the smaller argument into the spine of the larger."""
    if u == v:
        raise ShoveUndefinedError(f"[{u}<-{v}]")
    if v > u:
        u, v = v, u
    if u.is_generator:
        return BasicCommutator.node(u, v)
    entries = list(u.spine)
    if entries[1] > v:
        return from_spine([entries[0], v, *entries[1:]])
    j = max(i for i, c in enumerate(entries) if i > 0 and c <= v)
    return from_spine([*entries[: j + 1], v, *entries[j + 1 :]])


def shove_recursive(u: BasicCommutator, v: BasicCommutator) -> BasicCommutator:
    """[u<-v] by the three-clause recursive definition."""
    if u == v:
        raise ShoveUndefinedError(f"[{u}<-{v}]")
    if v > u:
        return shove_recursive(v, u)
    if not u.is_generator and u.right > v:
        return BasicCommutator.node(shove_recursive(u.left, v), u.right)
    return BasicCommutator.node(u, v)
