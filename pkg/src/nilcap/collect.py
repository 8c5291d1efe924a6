"""Collection in free nilpotent groups F/F_{k+1}.

Elements are exponent vectors over a Hall basis: g = c_1^{e_1} c_2^{e_2} ...
in ascending basis order, with every commutator of weight > k discarded.

The collector multiplies by moving one generator power g_j^e at a time past
the part of the left factor that sits above position j:

    (h * t) g_j^e = h g_j^e * t^(g_j^e)

where h is supported on positions <= j and t on positions > j. Conjugation
by g_j^e is applied to t as an automorphism of the tail subgroup, using
memoized images of single pc generators under conjugation by g_j^(+-2^s).
The same engine drives the finite presentations in nilcap.nilprod, which
only supply different relative orders and conjugation relations.
"""

from __future__ import annotations

import functools
import logging
from abc import ABC, abstractmethod
from collections.abc import Iterable, Mapping
from dataclasses import dataclass

from nilcap.cache import RelationCache
from nilcap.exceptions import (
    BasisMismatchError,
    ConsistencyError,
    PreconditionError,
    ShoveUndefinedError,
)
from nilcap.hall import BasicCommutator, BasisTable, generate_basis, to_expr
from nilcap.term import Identity, Power, Product, WordExpr, check_generators, evaluate, format_expr

logger = logging.getLogger(__name__)

Vector = dict[int, int]


class Collector(ABC):
    """Collection from the left over a polycyclic sequence g_0, ..., g_{n-1}.

    Subclasses describe the sequence: relative orders (None for infinite),
    power relations g_i^{d_i}, and conjugates g_m^{g_j} for m > j.
    Vectors are plain dicts from position to nonzero exponent.
    """

    def __init__(self, size: int):
        self.size = size
        self._images: RelationCache[Vector] = RelationCache()

    @abstractmethod
    def relative_order(self, i: int) -> int | None:
        """Relative order of g_i, or None if infinite."""

    @abstractmethod
    def power_relation(self, i: int) -> Vector:
        """g_i^{d_i}, supported on positions > i."""

    @abstractmethod
    def conjugate_relation(self, m: int, j: int, sign: int) -> Vector:
        """g_m conjugated by g_j^sign, for m > j and sign = +-1."""

    def commutes(self, m: int, j: int) -> bool:
        """Whether g_m and g_j commute; subclasses may answer without collecting."""
        return self._image(m, j, 1, 0) == {m: 1}

    # ── conjugation images ──

    def _image(self, m: int, j: int, sign: int, s: int) -> Vector:
        """g_m under conjugation by g_j^(sign * 2^s)."""
        key = (m, j, sign, s)
        cached = self._images.get(key)
        if cached is not None:
            return cached
        if s == 0:
            value = self.conjugate_relation(m, j, sign)
        else:
            half = self._image(m, j, sign, s - 1)
            value = self._apply(half, j, sign, s - 1)
        return self._images.put(key, value)

    def _apply(self, h: Mapping[int, int], j: int, sign: int, s: int) -> Vector:
        result: Vector = {}
        for m in sorted(h):
            if self.commutes(m, j):
                image: Vector = {m: 1}
            else:
                image = self._image(m, j, sign, s)
            result = self.multiply(result, self.power(image, h[m]))
        return result

    def _conjugate_tail(self, tail: Vector, j: int, e: int) -> Vector:
        if all(self.commutes(m, j) for m in tail):
            return tail
        sign = 1 if e > 0 else -1
        n, s = abs(e), 0
        while n:
            if n & 1:
                tail = self._apply(tail, j, sign, s)
            n >>= 1
            s += 1
        return tail

    # ── arithmetic ──

    def multiply_generator(self, a: Mapping[int, int], j: int, e: int) -> Vector:
        """a * g_j^e."""
        if e == 0:
            return dict(a)
        d = self.relative_order(j)
        if d is not None and e < 0:
            q, rem = divmod(e, d)
            return self.multiply(self.multiply_generator(a, j, rem), self.power(self.power_relation(j), q))
        head = {i: x for i, x in a.items() if i <= j}
        tail = {i: x for i, x in a.items() if i > j}
        if tail:
            tail = self._conjugate_tail(tail, j, e)
        x = head.get(j, 0) + e
        if d is not None and x >= d:
            q, x = divmod(x, d)
            tail = self.multiply(self.power(self.power_relation(j), q), tail)
        if x:
            head[j] = x
        else:
            head.pop(j, None)
        head.update(tail)
        return head

    def multiply(self, a: Mapping[int, int], b: Mapping[int, int]) -> Vector:
        if not b:
            return dict(a)
        if not a:
            return dict(b)
        if max(a) < min(b):
            return {**a, **b}
        result = dict(a)
        for j in sorted(b):
            result = self.multiply_generator(result, j, b[j])
        return result

    def inverse(self, a: Mapping[int, int]) -> Vector:
        w = dict(a)
        b: Vector = {}
        while w:
            pos = min(w)
            d = self.relative_order(pos)
            y = -w[pos] if d is None else d - w[pos]
            w = self.multiply_generator(w, pos, y)
            b = self.multiply_generator(b, pos, y)
        return b

    def power(self, a: Mapping[int, int], n: int) -> Vector:
        if n < 0:
            a, n = self.inverse(a), -n
        result: Vector = {}
        base = dict(a)
        while n:
            if n & 1:
                result = self.multiply(result, base)
            n >>= 1
            if n:
                base = self.multiply(base, base)
        return result

    def commutator(self, a: Mapping[int, int], b: Mapping[int, int]) -> Vector:
        """[a,b] = a^-1 b^-1 a b = (ba)^-1 (ab)."""
        return self.multiply(self.inverse(self.multiply(b, a)), self.multiply(a, b))


class FreeCollector(Collector):
    """Collector for F/F_{k+1} over the Hall basis; all relative orders infinite."""

    def __init__(self, basis: BasisTable):
        super().__init__(len(basis))
        self.basis = basis

    def relative_order(self, i: int) -> int | None:
        return None

    def power_relation(self, i: int) -> Vector:
        raise PreconditionError("free nilpotent groups have no power relations")

    def commutes(self, m: int, j: int) -> bool:
        return self.basis.weight(m) + self.basis.weight(j) > self.basis.k or super().commutes(m, j)

    def conjugate_relation(self, m: int, j: int, sign: int) -> Vector:
        if sign < 0:
            return self._inverse_conjugate(m, j)
        basis = self.basis
        u, v = basis[m], basis[j]
        if u.is_generator or u.right <= v:
            bracket = BasicCommutator.node(u, v)
            if bracket.weight > basis.k:
                return {m: 1}
            return {m: 1, basis.position(bracket): 1}
        # [a,b]^g = [a^g, b^g] with a > b > g
        a = self._image(basis.position(u.left), j, 1, 0)
        b = self._image(basis.position(u.right), j, 1, 0)
        return self.commutator(a, b)

    def _inverse_conjugate(self, m: int, j: int) -> Vector:
        target = {m: 1}
        y: Vector = {m: 1}
        for _ in range(self.basis.k + 1):
            image = self._apply(y, j, 1, 0)
            if image == target:
                return y
            y = self.multiply(y, self.multiply(self.inverse(image), target))
        raise ConsistencyError("inverse conjugation did not converge", (m, j))


# ── Elements ──

@dataclass(frozen=True)
class FreeNilElement:
    """An element of F/F_{k+1}: ascending (position, exponent) pairs, no zeros."""

    basis: BasisTable
    exponents: tuple[tuple[int, int], ...] = ()

    @classmethod
    def from_vector(cls, basis: BasisTable, vector: Mapping[int, int]) -> FreeNilElement:
        return cls(basis, tuple(sorted((i, x) for i, x in vector.items() if x)))

    @property
    def vector(self) -> Vector:
        return dict(self.exponents)

    @property
    def is_identity(self) -> bool:
        return not self.exponents

    def exponent(self, c: BasicCommutator) -> int:
        return self.vector.get(self.basis.position(c), 0) if c in self.basis else 0

    def items(self) -> list[tuple[BasicCommutator, int]]:
        return [(self.basis[i], x) for i, x in self.exponents]

    def weights(self) -> set[int]:
        return {self.basis.weight(i) for i, _ in self.exponents}

    def layer(self, w: int) -> FreeNilElement:
        """The weight-w part of the exponent vector."""
        return FreeNilElement(self.basis, tuple((i, x) for i, x in self.exponents if self.basis.weight(i) == w))

    def to_expr(self) -> WordExpr:
        factors = [to_expr(c) if x == 1 else Power(to_expr(c), x) for c, x in self.items()]
        if not factors:
            return Identity()
        if len(factors) == 1:
            return factors[0]
        return Product(tuple(factors))

    def to_dict(self) -> dict[str, int]:
        return {str(c): x for c, x in self.items()}

    def __str__(self) -> str:
        return format_expr(self.to_expr())


@dataclass(frozen=True)
class RewriteResult:
    """[u,v] = leading^epsilon * tail modulo F_{k+1}, k = wt(u) + wt(v)."""

    epsilon: int
    leading: BasicCommutator
    tail: FreeNilElement


class FreeNilpotentGroup:
    """Arithmetic in F/F_{k+1} on x1..xr."""

    def __init__(self, basis: BasisTable):
        self.basis = basis
        self.collector = FreeCollector(basis)

    def _check(self, *elements: FreeNilElement) -> None:
        for g in elements:
            if g.basis != self.basis:
                raise BasisMismatchError(g.basis.describe(), self.basis.describe())

    def _wrap(self, vector: Vector) -> FreeNilElement:
        return FreeNilElement.from_vector(self.basis, vector)

    def identity(self) -> FreeNilElement:
        return FreeNilElement(self.basis)

    def generator(self, index: int) -> FreeNilElement:
        return self.element(BasicCommutator.leaf(index))

    def element(self, c: BasicCommutator) -> FreeNilElement:
        """The basis element c, or the identity if wt(c) > k."""
        if c.weight > self.basis.k:
            return self.identity()
        return FreeNilElement(self.basis, ((self.basis.position(c), 1),))

    def multiply(self, a: FreeNilElement, b: FreeNilElement) -> FreeNilElement:
        self._check(a, b)
        return self._wrap(self.collector.multiply(a.vector, b.vector))

    def inverse(self, a: FreeNilElement) -> FreeNilElement:
        self._check(a)
        return self._wrap(self.collector.inverse(a.vector))

    def power(self, a: FreeNilElement, n: int) -> FreeNilElement:
        self._check(a)
        return self._wrap(self.collector.power(a.vector, n))

    def commutator(self, a: FreeNilElement, b: FreeNilElement) -> FreeNilElement:
        self._check(a, b)
        return self._wrap(self.collector.commutator(a.vector, b.vector))

    def embed(self, e: WordExpr) -> FreeNilElement:
        check_generators(e, self.basis.r)
        return evaluate(e, self)

    def product(self, items: Iterable[tuple[BasicCommutator, int]]) -> FreeNilElement:
        """Ordered product of commutator powers, lifted into this group."""
        result = self.identity()
        for c, x in items:
            result = self.multiply(result, self.power(self.element(c), x))
        return result


@functools.lru_cache(maxsize=32)
def free_group(r: int, k: int) -> FreeNilpotentGroup:
    """Shared FreeNilpotentGroup for (r, k); its relation cache persists."""
    return FreeNilpotentGroup(generate_basis(r, k))


def _group_of(g: FreeNilElement) -> FreeNilpotentGroup:
    return free_group(g.basis.r, g.basis.k)


# ── Module-level operations ──

def identity(basis: BasisTable) -> FreeNilElement:
    return FreeNilElement(basis)


def embed(e: WordExpr, basis: BasisTable) -> FreeNilElement:
    """Collected normal form of e in F/F_{k+1}."""
    return free_group(basis.r, basis.k).embed(e)


def multiply(a: FreeNilElement, b: FreeNilElement) -> FreeNilElement:
    return _group_of(a).multiply(a, b)


def inverse(a: FreeNilElement) -> FreeNilElement:
    return _group_of(a).inverse(a)


def power(a: FreeNilElement, n: int) -> FreeNilElement:
    return _group_of(a).power(a, n)


def commutator(a: FreeNilElement, b: FreeNilElement) -> FreeNilElement:
    return _group_of(a).commutator(a, b)


def truncate(g: FreeNilElement, k: int) -> FreeNilElement:
    """Image of g under F/F_{K+1} -> F/F_{k+1}, k <= K."""
    if k > g.basis.k:
        raise PreconditionError(f"cannot truncate class {g.basis.k} to {k}")
    target = generate_basis(g.basis.r, k)
    return FreeNilElement(target, tuple((target.position(c), x) for c, x in g.items() if c.weight <= k))


def rewrite_basic_pair(u: BasicCommutator, v: BasicCommutator, r: int | None = None) -> RewriteResult:
    """Top layer of the collected [u,v] in F/F_{k+1}, k = wt(u) + wt(v).

    The leading commutator is [u<-v] with exponent +1 when u > v and -1
    when u < v; every other commutator in the layer is larger.

    Raises:
        ShoveUndefinedError: If u = v.
        ConsistencyError: If the collected value is not homogeneous of
            weight k or its leading exponent is not +-1.
    """
    if u == v:
        raise ShoveUndefinedError(f"[{u},{v}]")
    if u < v:
        swapped = rewrite_basic_pair(v, u, r)
        negated = FreeNilElement(swapped.tail.basis, tuple((i, -x) for i, x in swapped.tail.exponents))
        return RewriteResult(-swapped.epsilon, swapped.leading, negated)
    r = r or max(*u.generators(), *v.generators())
    k = u.weight + v.weight
    group = free_group(r, k)
    value = group.commutator(group.element(u), group.element(v))
    if value.is_identity or value.weights() - {k}:
        raise ConsistencyError(f"[{u},{v}] has terms below weight {k}", str(value))
    (lead_pos, epsilon), *rest = value.exponents
    if abs(epsilon) != 1:
        raise ConsistencyError(f"leading exponent of [{u},{v}] is {epsilon}", str(value))
    logger.debug("[%s,%s] = %s", u, v, value)
    return RewriteResult(epsilon, group.basis[lead_pos], FreeNilElement(group.basis, tuple(rest)))


def commutate_with(g: FreeNilElement, a: BasicCommutator) -> FreeNilElement:
    """[g, a] modulo F_{k+1} for g homogeneous of weight k - wt(a).

    Raises:
        PreconditionError: If g has terms of more than one weight.
    """
    weights = g.weights()
    if not weights:
        return g
    if len(weights) > 1:
        raise PreconditionError(f"{g} is not homogeneous")
    k = weights.pop() + a.weight
    group = free_group(max(g.basis.r, *a.generators()), k)
    lifted = group.product(g.items())
    return group.commutator(lifted, group.element(a))


def power_commutator_expansion(p: int) -> FreeNilElement:
    """[x2^p, x1] collected in F/F_{p+2} on two generators."""
    group = free_group(2, p + 1)
    return group.commutator(group.power(group.generator(2), p), group.generator(1))
