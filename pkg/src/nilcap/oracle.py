"""Brute-force ground truth, independent of the collection engine.

- free_word_coordinates: Hall coordinates of a free word read off its
  truncated Magnus series x_i -> 1 + X_i, solved layer by layer.
- enumerate / full_table_check: exhaustive walks over a pc presentation.
- dihedral_model: the class-k quotient of <x, y | x^2, y^2> as permutations.
- generator_isomorphic: does x_i -> y_i extend to an isomorphism?
"""

from __future__ import annotations

import itertools
import logging
import random
from collections.abc import Hashable, Iterator, Sequence
from dataclasses import dataclass, field
from typing import Protocol, TypeVar

from sympy import Matrix
from sympy.combinatorics import Permutation

from nilcap.collect import Vector
from nilcap.config import load_settings
from nilcap.exceptions import ConsistencyError, GeneratorIndexError, OutOfRangeError, ResourceLimitError
from nilcap.hall import BasicCommutator, BasisTable
from nilcap.nilprod import PcElement, PcPresentation, enumerate_vectors

logger = logging.getLogger(__name__)

E = TypeVar("E", bound=Hashable)


class FiniteGroup(Protocol[E]):
    """Enough of a group to walk its Cayley graph."""

    def identity(self) -> E: ...

    def generator(self, index: int) -> E: ...

    def multiply(self, a: E, b: E) -> E: ...


def _check_cap(what: str, size: int) -> None:
    cap = load_settings().max_enum
    if size > cap:
        raise ResourceLimitError(what, size, cap)


# ── Free words and the Magnus embedding ──

def free_reduce(word: Sequence[int]) -> list[int]:
    """Cancel adjacent x_i x_i^-1 pairs; letters are +-i for x_i^{+-1}."""
    stack: list[int] = []
    for letter in word:
        if letter == 0:
            raise GeneratorIndexError(0, 0)
        if stack and stack[-1] == -letter:
            stack.pop()
        else:
            stack.append(letter)
    return stack


Series = dict[tuple[int, ...], int]


class _Magnus:
    """Z<<X_1..X_r>> modulo monomials of degree > k."""

    def __init__(self, r: int, k: int):
        self.r = r
        self.k = k

    def one(self) -> Series:
        return {(): 1}

    def mul(self, a: Series, b: Series) -> Series:
        out: Series = {}
        for ma, ca in a.items():
            room = self.k - len(ma)
            for mb, cb in b.items():
                if len(mb) <= room:
                    m = ma + mb
                    out[m] = out.get(m, 0) + ca * cb
        return {m: c for m, c in out.items() if c}

    def letter(self, signed: int) -> Series:
        i = abs(signed)
        if not 1 <= i <= self.r:
            raise GeneratorIndexError(i, self.r)
        if signed > 0:
            return {(): 1, (i,): 1}
        # (1 + X)^-1 = sum (-X)^n
        return {(i,) * n: (-1) ** n for n in range(self.k + 1)}

    def inverse(self, a: Series) -> Series:
        t = {m: c for m, c in a.items() if m}
        neg = {m: -c for m, c in t.items()}
        out, term = self.one(), self.one()
        for _ in range(self.k):
            term = self.mul(term, neg)
            for m, c in term.items():
                out[m] = out.get(m, 0) + c
        return {m: c for m, c in out.items() if c}

    def commutator(self, a: Series, b: Series) -> Series:
        return self.mul(self.mul(self.inverse(a), self.inverse(b)), self.mul(a, b))

    def power(self, a: Series, n: int) -> Series:
        base = a if n >= 0 else self.inverse(a)
        out = self.one()
        for _ in range(abs(n)):
            out = self.mul(out, base)
        return out

    def word(self, letters: Sequence[int]) -> Series:
        out = self.one()
        for letter in letters:
            out = self.mul(out, self.letter(letter))
        return out


def _commutator_series(alg: _Magnus, c: BasicCommutator, memo: dict[BasicCommutator, Series]) -> Series:
    if c not in memo:
        if c.is_generator:
            memo[c] = alg.letter(c.generator)
        else:
            memo[c] = alg.commutator(_commutator_series(alg, c.left, memo), _commutator_series(alg, c.right, memo))
    return memo[c]


def free_word_coordinates(word: Sequence[int], basis: BasisTable) -> Vector:
    """Collected exponent vector of a free word, without collection.

    The series of the word is peeled one weight at a time: its lowest
    nonconstant layer is a combination of the leading terms of the weight-w
    basic commutators, solved exactly, and the matching product of
    commutator powers is divided off on the left.

    Raises:
        ConsistencyError: If a layer has no integral solution.
    """
    alg = _Magnus(basis.r, basis.k)
    memo: dict[BasicCommutator, Series] = {}
    current = alg.word(free_reduce(word))
    result: Vector = {}
    for w in range(1, basis.k + 1):
        positions = list(basis.layer(w))
        if not positions:
            continue
        target = {m: c for m, c in current.items() if len(m) == w}
        if not target:
            continue
        columns = [_commutator_series(alg, basis[i], memo) for i in positions]
        monomials = sorted({m for col in columns for m in col if len(m) == w} | set(target))
        a = Matrix([[col.get(m, 0) for col in columns] for m in monomials])
        b = Matrix([target.get(m, 0) for m in monomials])
        try:
            solution, params = a.gauss_jordan_solve(b)
        except ValueError:
            raise ConsistencyError(f"weight-{w} layer outside the span of basic commutators") from None
        if params.shape[0]:
            raise ConsistencyError(f"weight-{w} basic commutators are dependent")
        layer_product = alg.one()
        for i, col, x in zip(positions, columns, solution):
            if not x.is_integer:
                raise ConsistencyError(f"non-integral coordinate on {basis[i]}", x)
            x = int(x)
            if x:
                result[i] = x
                layer_product = alg.mul(layer_product, alg.power(col, x))
        current = alg.mul(alg.inverse(layer_product), current)
    return result


# ── Exhaustive walks ──

def enumerate(g: PcPresentation) -> Iterator[PcElement]:
    """Every element of g once, in lexicographic exponent order."""
    _check_cap("enumeration", g.order)
    for exponents in enumerate_vectors(g):
        yield PcElement(g, exponents)


@dataclass
class TableReport:
    order: int
    checks: int = 0
    sampled: bool = False
    passed: bool = True
    failure: str | None = None
    witness: tuple | None = None

    def fail(self, failure: str, *witness: object) -> TableReport:
        self.passed = False
        self.failure = failure
        self.witness = tuple(str(w) for w in witness)
        return self

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "checks": self.checks,
            "sampled": self.sampled,
            "passed": self.passed,
            "failure": self.failure,
            "witness": list(self.witness) if self.witness is not None else None,
        }


EXHAUSTIVE_TRIPLES_UP_TO = 2**6
TABLE_UP_TO = 2**8
SAMPLED_TRIPLES = 20_000


def full_table_check(g: PcPresentation, seed: int = 0) -> TableReport:
    """Closure, identity, inverses and associativity of the multiplication table.

    Associativity runs over all triples up to order 64, then over a seeded
    sample. Groups above order 256 skip the tabulated identity and inverse
    checks and sample products directly.
    """
    elements = list(enumerate(g))
    n = len(elements)
    report = TableReport(order=n, sampled=n > EXHAUSTIVE_TRIPLES_UP_TO)
    rng = random.Random(seed)
    orders = g.relative_orders

    def reduced(x: PcElement) -> bool:
        report.checks += 1
        return all(0 <= b < d for b, d in zip(x.exponents, orders))

    if n <= TABLE_UP_TO:
        index = {a: i for i, a in zip(range(n), elements)}
        table = []
        for a in elements:
            row = []
            for b in elements:
                ab = g.multiply(a, b)
                if not reduced(ab) or ab not in index:
                    return report.fail("closure", a, b)
                row.append(index[ab])
            table.append(row)
        identities = [i for i in range(n) if table[i] == list(range(n))]
        if len(identities) != 1:
            return report.fail("identity is not unique", *(elements[i] for i in identities))
        e = identities[0]
        for i in range(n):
            if table[i].count(e) != 1:
                return report.fail("inverse is not unique", elements[i])
        triples = (
            itertools.product(range(n), repeat=3)
            if not report.sampled
            else ((rng.randrange(n), rng.randrange(n), rng.randrange(n)) for _ in range(SAMPLED_TRIPLES))
        )
        for a, b, c in triples:
            report.checks += 1
            if table[table[a][b]][c] != table[a][table[b][c]]:
                return report.fail("associativity", elements[a], elements[b], elements[c])
        return report
    for _ in range(SAMPLED_TRIPLES // 10):
        a, b, c = (elements[rng.randrange(n)] for _ in range(3))
        ab, bc = g.multiply(a, b), g.multiply(b, c)
        if not (reduced(ab) and reduced(bc)):
            return report.fail("closure", a, b, c)
        if g.multiply(ab, c) != g.multiply(a, bc):
            return report.fail("associativity", a, b, c)
        if not g.multiply(a, g.inverse(a)).is_identity:
            return report.fail("inverse", a)
    return report


# ── Dihedral model ──

@dataclass(frozen=True)
class DihedralModel:
    """Class-k quotient of <x, y | x^2, y^2>: the dihedral group of order 2^{k+1}.

    x and y act as the reflections i -> -i and i -> 1 - i on Z/2^k, so that
    z = xy is a rotation of order 2^k.
    """

    k: int
    x: Permutation = field(repr=False)
    y: Permutation = field(repr=False)

    @property
    def degree(self) -> int:
        return 2**self.k

    def identity(self) -> Permutation:
        return Permutation(list(range(self.degree)))

    def generator(self, index: int) -> Permutation:
        if index not in (1, 2):
            raise GeneratorIndexError(index, 2)
        return self.x if index == 1 else self.y

    def multiply(self, a: Permutation, b: Permutation) -> Permutation:
        return a * b

    def rotation(self) -> Permutation:
        return self.x * self.y

    def elements(self) -> list[Permutation]:
        return closure(self, 2)

    def center(self) -> list[Permutation]:
        return [a for a in self.elements() if all(a * s == s * a for s in (self.x, self.y))]


def dihedral_model(alpha1: int, alpha2: int, k: int) -> DihedralModel:
    """Reference model of C_2 *^{N_k} C_2 (orders 2^alpha1, 2^alpha2).

    Raises:
        OutOfRangeError: Unless alpha1 = alpha2 = 1 and k >= 2.
    """
    if (alpha1, alpha2) != (1, 1):
        raise OutOfRangeError("alphas", (alpha1, alpha2), "the dihedral model covers alphas (1,1) only")
    if k < 2:
        raise OutOfRangeError("k", k, "the permutation model is faithful from k = 2")
    n = 2**k
    x = Permutation([(-i) % n for i in range(n)])
    y = Permutation([(1 - i) % n for i in range(n)])
    return DihedralModel(k, x, y)


# ── Cayley-graph comparisons ──

def closure(group: FiniteGroup[E], r: int) -> list[E]:
    """All elements reachable from the identity by right multiplication by x1..xr."""
    gens = [group.generator(i) for i in range(1, r + 1)]
    start = group.identity()
    seen = {start}
    order = [start]
    frontier = [start]
    cap = load_settings().max_enum
    while frontier:
        nxt = []
        for a in frontier:
            for s in gens:
                b = group.multiply(a, s)
                if b not in seen:
                    seen.add(b)
                    order.append(b)
                    nxt.append(b)
                    if len(seen) > cap:
                        raise ResourceLimitError("Cayley graph walk", len(seen), cap)
        frontier = nxt
    return order


def generator_isomorphic(a: FiniteGroup, b: FiniteGroup, r: int) -> bool:
    """Whether x_i -> y_i (i = 1..r) extends to an isomorphism a -> b.

    Walks the Cayley graph of a breadth first, transporting each edge to b;
    the map is a homomorphism iff every revisited vertex lands on the same
    image, and an isomorphism iff it is also injective and both groups have
    the same order.
    """
    gens_a = [a.generator(i) for i in range(1, r + 1)]
    gens_b = [b.generator(i) for i in range(1, r + 1)]
    image = {a.identity(): b.identity()}
    frontier = [a.identity()]
    while frontier:
        nxt = []
        for u in frontier:
            for s, t in zip(gens_a, gens_b):
                v = a.multiply(u, s)
                w = b.multiply(image[u], t)
                if v in image:
                    if image[v] != w:
                        logger.debug("generator map is not a homomorphism at %s", v)
                        return False
                else:
                    image[v] = w
                    nxt.append(v)
        frontier = nxt
    if len(set(image.values())) != len(image):
        return False
    return len(closure(b, r)) == len(image)

