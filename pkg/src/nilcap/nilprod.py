"""k-nilpotent products of cyclic p-groups, k <= p+1.

G = C_1 * ... * C_r / gamma_{k+1}, with C_i = <x_i> of order p^{alpha_i}, is
built as the quotient of the free nilpotent group F/F_{k+1} by the normal
closure H of the powers x_i^{p^{alpha_i}}. H is held as an induced sequence
(one pivot per Hall position, echelon form), which gives a first pc
presentation of G over the Hall basis.

The presentation handed out is over the distinguished basis instead: the
Hall basis with moduli N_i, where at class p+1 the commutators
[x_j,_p x_i] and [x_j,x_i,_{p-1} x_j] are replaced by v' = [x_j,x_i^p] and
v'' = [x_j^p,x_i]. Its relative orders are the N_i, so a reduced exponent
vector is exactly the Struik normal form.
"""

from __future__ import annotations

import functools
import itertools
import logging
import os
import random
import tempfile
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from sympy import binomial, isprime
from sympy.core.intfunc import igcdex

from nilcap.cache import RelationCache
from nilcap.collect import Collector, FreeNilpotentGroup, Vector, free_group
from nilcap.config import load_settings
from nilcap.exceptions import (
    BasisMismatchError,
    CacheFormatError,
    ConsistencyError,
    OutOfRangeError,
    PreconditionError,
    ResourceLimitError,
)
from nilcap.hall import BasicCommutator, generate_basis, to_expr
from nilcap.term import (
    Commutator,
    Generator,
    Identity,
    Power,
    Product,
    WordExpr,
    check_generators,
    evaluate,
    format_expr,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GroupSpec:
    """Parameters of C_1 *^{N_k} ... *^{N_k} C_r with |C_i| = p^{alpha_i}.

    Args:
        p: Prime.
        k: Nilpotency class bound, at least 1.
        alphas: Exponents alpha_1 <= ... <= alpha_r, each at least 1.
    """

    p: int
    k: int
    alphas: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "alphas", tuple(self.alphas))
        if not isprime(self.p):
            raise OutOfRangeError("p", self.p, "must be prime")
        if self.k < 1:
            raise OutOfRangeError("k", self.k, "must be at least 1")
        if not self.alphas or min(self.alphas) < 1:
            raise OutOfRangeError("alphas", self.alphas, "need at least one exponent, all >= 1")
        if list(self.alphas) != sorted(self.alphas):
            raise OutOfRangeError("alphas", self.alphas, "must be non-decreasing")

    @property
    def r(self) -> int:
        return len(self.alphas)

    def order_of_generator(self, i: int) -> int:
        return self.p ** self.alphas[i - 1]

    def describe(self) -> str:
        return f"p={self.p} k={self.k} alphas={','.join(map(str, self.alphas))}"


def _require_supported(spec: GroupSpec) -> None:
    if spec.k > spec.p + 1:
        raise OutOfRangeError("k", spec.k, f"normal forms need k <= p+1 = {spec.p + 1}")


# ── Distinguished basis ──

class EntryKind(str, Enum):
    BASIC = "basic"
    V_PRIME = "v'"
    V_DOUBLE_PRIME = "v''"


@dataclass(frozen=True)
class DistinguishedEntry:
    """One factor of the Struik normal form.

    ``commutator`` is the Hall basic commutator whose slot the entry
    occupies; for v' and v'' it is the replaced commutator.
    """

    commutator: BasicCommutator
    kind: EntryKind
    modulus: int
    expr: WordExpr

    @property
    def name(self) -> str:
        return format_expr(self.expr)


@dataclass(frozen=True)
class DistinguishedBasis:
    spec: GroupSpec
    entries: tuple[DistinguishedEntry, ...]

    @property
    def order(self) -> int:
        return functools.reduce(lambda a, e: a * e.modulus, self.entries, 1)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[DistinguishedEntry]:
        return iter(self.entries)


def _replacement(c: BasicCommutator, p: int) -> tuple[EntryKind, int, int] | None:
    """Detect [x_j,_p x_i] and [x_j,x_i,_{p-1} x_j]; return (kind, j, i)."""
    spine = c.spine
    if len(spine) != p + 1 or any(not s.is_generator for s in spine):
        return None
    j, i = spine[0].generator, spine[1].generator
    rest = [s.generator for s in spine[2:]]
    if all(g == i for g in rest):
        return EntryKind.V_PRIME, j, i
    if all(g == j for g in rest):
        return EntryKind.V_DOUBLE_PRIME, j, i
    return None


def modulus_table(spec: GroupSpec) -> DistinguishedBasis:
    """The distinguished basis with its moduli N_i.

    For k <= p every basic commutator c gets p^{alpha_s}, s the smallest
    generator index in c. For k = p+1: x_i gets p^{alpha_i}; [x_j,x_i] gets
    p^{alpha_i + 1}; v'_{ji} gets p^{alpha_i - 1}; v''_{ji} gets
    p^{alpha_i - 1} if alpha_i = alpha_j and p^{alpha_i} otherwise; every
    other commutator gets p^{alpha_s}.

    Raises:
        OutOfRangeError: If k > p+1.
    """
    _require_supported(spec)
    p, alphas = spec.p, spec.alphas
    entries = []
    for c in generate_basis(spec.r, spec.k):
        kind, expr = EntryKind.BASIC, to_expr(c)
        modulus = p ** alphas[c.smallest_generator - 1]
        if spec.k == p + 1 and c.weight == 2:
            modulus = p ** (alphas[c.right.generator - 1] + 1)
        elif spec.k == p + 1 and c.weight == p + 1 and (found := _replacement(c, p)) is not None:
            kind, j, i = found
            ai, aj = alphas[i - 1], alphas[j - 1]
            if kind is EntryKind.V_PRIME:
                expr = Commutator((Generator(j), Power(Generator(i), p)))
                modulus = p ** (ai - 1)
            else:
                expr = Commutator((Power(Generator(j), p), Generator(i)))
                modulus = p ** (ai - 1) if ai == aj else p**ai
        entries.append(DistinguishedEntry(c, kind, modulus, expr))
    return DistinguishedBasis(spec, tuple(entries))


def binom_reduction(alpha: int, p: int) -> int:
    """C(p^alpha, p) mod p^alpha; equals p^(alpha-1)."""
    if alpha < 1:
        raise PreconditionError("binom_reduction needs alpha >= 1")
    n = p**alpha
    return int(binomial(n, p)) % n


# ── Kernel of F/F_{k+1} -> G ──

class _Kernel:
    """Induced sequence for a normal subgroup of a free nilpotent group."""

    def __init__(self, free: FreeNilpotentGroup):
        self.collector = free.collector
        self.pivots: dict[int, Vector] = {}

    def sift(self, h: Vector) -> bool:
        """Add h to the subgroup; return True if the pivots changed."""
        col = self.collector
        changed = False
        queue = [h]
        while queue:
            h = queue.pop()
            while h:
                pos = min(h)
                e = h[pos]
                q = self.pivots.get(pos)
                if q is None:
                    self.pivots[pos] = h if e > 0 else col.inverse(h)
                    changed = True
                    break
                d = q[pos]
                if e % d == 0:
                    h = col.multiply(h, col.power(q, -(e // d)))
                    continue
                s, t, _ = igcdex(d, e)
                combined = col.multiply(col.power(q, int(s)), col.power(h, int(t)))
                if combined[pos] < 0:
                    combined = col.inverse(combined)
                self.pivots[pos] = combined
                queue.extend([q, h])
                changed = True
                break
        return changed

    def close(self, generators: Sequence[Vector]) -> None:
        """Close under conjugation by the generators and under commutators."""
        col = self.collector
        rounds = 0
        while True:
            rounds += 1
            changed = False
            current = list(self.pivots.values())
            for q in current:
                for x in generators:
                    changed |= self.sift(col.commutator(q, x))
            for a, b in itertools.combinations(current, 2):
                changed |= self.sift(col.commutator(a, b))
            if not changed:
                logger.debug("kernel closed after %d rounds, %d pivots", rounds, len(self.pivots))
                return

    def reduce(self, h: Mapping[int, int]) -> Vector:
        """Canonical representative of the coset hH."""
        col = self.collector
        h = dict(h)
        for pos in range(col.size):
            x = h.get(pos, 0)
            if not x:
                continue
            pivot = self.pivots[pos]
            q = x // pivot[pos]
            if q:
                h = col.multiply(h, col.power(pivot, -q))
        return h


# ── Presentation ──

class PcCollector(Collector):
    """Collector for a finite consistent pc presentation."""

    def __init__(
        self,
        relative_orders: Sequence[int],
        powers: Sequence[Mapping[int, int]],
        conjugates: Mapping[tuple[int, int], Mapping[int, int]],
    ):
        super().__init__(len(relative_orders))
        self.relative_orders = tuple(relative_orders)
        self.powers = tuple(dict(v) for v in powers)
        self.conjugates = {key: dict(v) for key, v in conjugates.items()}

    def relative_order(self, i: int) -> int | None:
        return self.relative_orders[i]

    def power_relation(self, i: int) -> Vector:
        return self.powers[i]

    def commutes(self, m: int, j: int) -> bool:
        conj = self.conjugates.get((m, j))
        return conj is None or conj == {m: 1}

    def conjugate_relation(self, m: int, j: int, sign: int) -> Vector:
        if sign < 0:
            raise PreconditionError("finite presentations conjugate by positive powers only")
        return self.conjugates.get((m, j), {m: 1})


class _Subgroup:
    """Induced sequence of a subgroup of a finite pc group, in echelon form.

    Each pivot has a leading exponent dividing the relative order at its
    depth, so the subgroup order is the product of the quotients.
    """

    def __init__(self, collector: PcCollector, pivots: Mapping[int, Vector] | None = None):
        self.collector = collector
        self.pivots: dict[int, Vector] = dict(pivots or {})

    def copy(self) -> _Subgroup:
        return _Subgroup(self.collector, self.pivots)

    @property
    def order(self) -> int:
        col = self.collector
        return functools.reduce(lambda a, item: a * (col.relative_orders[item[0]] // item[1][item[0]]), self.pivots.items(), 1)

    def sift(self, h: Vector) -> bool:
        col = self.collector
        changed = False
        queue = [h]
        while queue:
            h = queue.pop()
            while h:
                pos = min(h)
                e, d = h[pos], col.relative_orders[pos]
                q = self.pivots.get(pos)
                if q is None:
                    s, _, lead = igcdex(e, d)
                    if lead == e:
                        self.pivots[pos] = h
                    else:
                        self.pivots[pos] = col.power(h, int(s))
                        queue.append(h)
                    changed = True
                    break
                lead = q[pos]
                if e % lead == 0:
                    h = col.multiply(h, col.power(q, -(e // lead)))
                    continue
                s, t, _ = igcdex(lead, e)
                self.pivots[pos] = col.multiply(col.power(q, int(s)), col.power(h, int(t)))
                queue.extend([q, h])
                changed = True
                break
        return changed

    def close(self) -> None:
        """Close under pivot powers and commutators of pivots."""
        col = self.collector
        while True:
            changed = False
            current = list(self.pivots.items())
            for pos, q in current:
                changed |= self.sift(col.power(q, col.relative_orders[pos] // q[pos]))
            for (_, a), (_, b) in itertools.combinations(current, 2):
                changed |= self.sift(col.commutator(a, b))
            if not changed:
                return

    def contains(self, h: Mapping[int, int]) -> bool:
        col = self.collector
        h = dict(h)
        while h:
            pos = min(h)
            q = self.pivots.get(pos)
            if q is None or h[pos] % q[pos]:
                return False
            h = col.multiply(h, col.power(q, -(h[pos] // q[pos])))
        return True


@dataclass(frozen=True, eq=False)
class PcElement:
    """Normal form prod c_i^{b_i}, 0 <= b_i < N_i, over the distinguished basis."""

    presentation: PcPresentation
    exponents: tuple[int, ...]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PcElement):
            return NotImplemented
        if self.exponents != other.exponents:
            return False
        return self.presentation is other.presentation or self.presentation == other.presentation

    def __hash__(self) -> int:
        return hash((self.presentation.spec, self.exponents))

    def __lt__(self, other: PcElement) -> bool:
        return self.exponents < other.exponents

    @property
    def vector(self) -> Vector:
        return {i: x for i, x in enumerate(self.exponents) if x}

    @property
    def is_identity(self) -> bool:
        return not any(self.exponents)

    def to_expr(self) -> WordExpr:
        entries = self.presentation.distinguished.entries
        factors = [entries[i].expr if x == 1 else Power(entries[i].expr, x) for i, x in enumerate(self.exponents) if x]
        if not factors:
            return Identity()
        return factors[0] if len(factors) == 1 else Product(tuple(factors))

    def to_dict(self) -> dict[str, int]:
        entries = self.presentation.distinguished.entries
        return {entries[i].name: x for i, x in enumerate(self.exponents) if x}

    def __str__(self) -> str:
        return format_expr(self.to_expr())


class PcPresentation:
    """Consistent pc presentation of a nilpotent product over its distinguished basis.

    Pc generator i is the i-th entry of ``modulus_table(spec)``.

    Args:
        spec: Group parameters.
        relative_orders: N_i for each pc generator (1 for redundant ones).
        powers: g_i^{N_i} as vectors on positions > i.
        conjugates: g_m^{g_j} for m > j, both with N > 1.
    """

    def __init__(
        self,
        spec: GroupSpec,
        relative_orders: Sequence[int],
        powers: Sequence[Mapping[int, int]],
        conjugates: Mapping[tuple[int, int], Mapping[int, int]],
    ):
        self.spec = spec
        self.distinguished = modulus_table(spec)
        if len(relative_orders) != len(self.distinguished):
            raise PreconditionError(f"expected {len(self.distinguished)} relative orders, got {len(relative_orders)}")
        self.collector = PcCollector(relative_orders, powers, conjugates)
        self._images: RelationCache[PcElement] = RelationCache()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PcPresentation):
            return NotImplemented
        if other is self:
            return True
        return self.spec == other.spec and self.relations() == other.relations()

    def __hash__(self) -> int:
        return hash(self.spec)

    def __repr__(self) -> str:
        return f"PcPresentation({self.spec.describe()}, order={self.order})"

    def __len__(self) -> int:
        return len(self.distinguished)

    @property
    def relative_orders(self) -> tuple[int, ...]:
        return self.collector.relative_orders

    @property
    def order(self) -> int:
        return functools.reduce(lambda a, d: a * d, self.relative_orders, 1)

    @property
    def active(self) -> list[int]:
        """Positions with relative order > 1."""
        return [i for i, d in enumerate(self.relative_orders) if d > 1]

    def relations(self) -> tuple:
        col = self.collector
        return (col.relative_orders, col.powers, tuple(sorted((k, tuple(sorted(v.items()))) for k, v in col.conjugates.items())))

    # ── element plumbing ──

    def wrap(self, vector: Mapping[int, int]) -> PcElement:
        exponents = [0] * len(self)
        for i, x in vector.items():
            exponents[i] = x
        return PcElement(self, tuple(exponents))

    def _check(self, *elements: PcElement) -> None:
        for a in elements:
            if a.presentation is not self and a.presentation != self:
                raise BasisMismatchError(a.presentation.spec.describe(), self.spec.describe())

    def identity(self) -> PcElement:
        return PcElement(self, (0,) * len(self))

    def commutator_element(self, c: BasicCommutator) -> PcElement:
        """Image of the basic commutator c (identity if wt(c) > k)."""
        if c.weight > self.spec.k:
            return self.identity()
        return self._images.get_or_compute(c, lambda: evaluate(to_expr(c), self))

    def generator(self, index: int) -> PcElement:
        return self.pc_generator(index - 1)

    def pc_generator(self, i: int) -> PcElement:
        return self.wrap(self.collector.multiply_generator({}, i, 1))

    def multiply(self, a: PcElement, b: PcElement) -> PcElement:
        self._check(a, b)
        return self.wrap(self.collector.multiply(a.vector, b.vector))

    def inverse(self, a: PcElement) -> PcElement:
        self._check(a)
        return self.wrap(self.collector.inverse(a.vector))

    def power(self, a: PcElement, n: int) -> PcElement:
        self._check(a)
        return self.wrap(self.collector.power(a.vector, n))

    def commutator(self, a: PcElement, b: PcElement) -> PcElement:
        self._check(a, b)
        return self.wrap(self.collector.commutator(a.vector, b.vector))

    def from_exponents(self, exponents: Sequence[int]) -> PcElement:
        if len(exponents) != len(self):
            raise PreconditionError(f"expected {len(self)} exponents, got {len(exponents)}")
        for x, d in zip(exponents, self.relative_orders):
            if not 0 <= x < d:
                raise PreconditionError(f"exponent {x} outside [0, {d})")
        return PcElement(self, tuple(exponents))

    def with_power_relation(self, i: int, vector: Mapping[int, int]) -> PcPresentation:
        """Copy of this presentation with g_i^{N_i} replaced."""
        col = self.collector
        powers = list(col.powers)
        powers[i] = dict(vector)
        return PcPresentation(self.spec, col.relative_orders, powers, col.conjugates)

    def distinguished_elements(self) -> list[PcElement]:
        """The entries of the distinguished basis, evaluated from their expressions."""
        return [evaluate(entry.expr, self) for entry in self.distinguished]


# ── Bootstrap ──

def _hall_quotient(spec: GroupSpec) -> tuple[PcCollector, list[Vector]]:
    """Pc presentation of G over the Hall basis, plus the distinguished entries in it.

    v' and v'' are expanded by collection in F/F_{k+1} and then reduced
    modulo the kernel.
    """
    free = free_group(spec.r, spec.k)
    col = free.collector
    basis = free.basis
    gens = [free.generator(i).vector for i in range(1, spec.r + 1)]
    kernel = _Kernel(free)
    for i, x in enumerate(gens, start=1):
        kernel.sift(col.power(x, spec.order_of_generator(i)))
    kernel.close(gens)
    missing = [str(basis[i]) for i in range(len(basis)) if i not in kernel.pivots]
    if missing:
        raise ConsistencyError("commutators of infinite order in the quotient", missing)
    orders = [kernel.pivots[i][i] for i in range(len(basis))]
    powers = [kernel.reduce({i: d}) for i, d in enumerate(orders)]
    active = [i for i, d in enumerate(orders) if d > 1]
    conjugates = {
        (m, j): kernel.reduce(col.conjugate_relation(m, j, 1))
        for j, m in itertools.combinations(active, 2)
        if not col.commutes(m, j)
    }
    logger.debug("%s: Hall relative orders %s", spec.describe(), orders)
    entries = []
    for entry in modulus_table(spec):
        if entry.kind is EntryKind.BASIC:
            entries.append(kernel.reduce({basis.position(entry.commutator): 1}))
        else:
            entries.append(kernel.reduce(free.embed(entry.expr).vector))
    return PcCollector(orders, powers, conjugates), entries


def _rebase(
    hall: PcCollector, elements: Sequence[Vector], moduli: Sequence[int]
) -> tuple[list[Vector], dict[tuple[int, int], Vector]]:
    """Relations of G over a new polycyclic sequence with the given moduli.

    Tail i is the subgroup generated by elements[i:]; each must have index
    moduli[i] over tail i+1. Exponents of an element are then found tail by
    tail: b_i is the least b with c_i^{-b} a in tail i+1.
    """
    n = len(elements)
    tails = [_Subgroup(hall)]
    for i in reversed(range(n)):
        tail = tails[0].copy()
        tail.sift(elements[i])
        tail.close()
        if tail.order != moduli[i] * tails[0].order:
            raise ConsistencyError("distinguished sequence does not match its moduli", (i + 1, tail.order // tails[0].order, moduli[i]))
        tails.insert(0, tail)
    inverses = [hall.inverse(c) for c in elements]

    def coordinates(a: Vector) -> Vector:
        beta: Vector = {}
        for i in range(n):
            for x in range(moduli[i]):
                if tails[i + 1].contains(a):
                    break
                a = hall.multiply(inverses[i], a)
            else:
                raise ConsistencyError("element outside the distinguished sequence", (i + 1,))
            if x:
                beta[i] = x
        return beta

    def after(vector: Vector, i: int, what: str) -> Vector:
        if vector and min(vector) <= i:
            raise ConsistencyError(f"{what} leaves the tail subgroup", (i + 1, min(vector) + 1))
        return vector

    powers = [after(coordinates(hall.power(c, d)), i, "power relation") for i, (c, d) in enumerate(zip(elements, moduli))]
    active = [i for i, d in enumerate(moduli) if d > 1]
    conjugates = {}
    for j, m in itertools.combinations(active, 2):
        conj = coordinates(hall.multiply(inverses[j], hall.multiply(elements[m], elements[j])))
        if conj != {m: 1}:
            conjugates[(m, j)] = after(conj, j, "conjugate relation")
    return powers, conjugates


@functools.lru_cache(maxsize=64)
def _build(spec: GroupSpec) -> PcPresentation:
    hall, elements = _hall_quotient(spec)
    moduli = [entry.modulus for entry in modulus_table(spec)]
    if spec.k <= spec.p and list(hall.relative_orders) == moduli:
        return PcPresentation(spec, moduli, hall.powers, hall.conjugates)
    if spec.k <= spec.p:
        logger.warning("%s: Hall relative orders %s differ from the moduli", spec.describe(), list(hall.relative_orders))
    powers, conjugates = _rebase(hall, elements, moduli)
    logger.debug("%s: rebased onto the distinguished basis, %d conjugate relations", spec.describe(), len(conjugates))
    return PcPresentation(spec, moduli, powers, conjugates)


def build_group(spec: GroupSpec) -> PcPresentation:
    """Consistent pc presentation of the k-nilpotent product.

    Relative orders are the moduli N_i of ``modulus_table(spec)``.

    Raises:
        OutOfRangeError: If k > p+1.
        ConsistencyError: If the quotient is not finite or the distinguished
            basis does not give a normal form.
    """
    _require_supported(spec)
    return _build(spec)


# ── Element operations ──

def normal_form(e: WordExpr, g: PcPresentation) -> PcElement:
    check_generators(e, g.spec.r)
    return evaluate(e, g)


def pc_multiply(a: PcElement, b: PcElement, g: PcPresentation) -> PcElement:
    return g.multiply(a, b)


def pc_inverse(a: PcElement, g: PcPresentation) -> PcElement:
    return g.inverse(a)


def pc_power(a: PcElement, n: int, g: PcPresentation) -> PcElement:
    return g.power(a, n)


def order_of(a: PcElement, g: PcPresentation) -> int:
    """Least n >= 1 with a^n = e; a power of p."""
    n, x = 1, a
    while not x.is_identity:
        x = g.power(x, g.spec.p)
        n *= g.spec.p
    return n


def lcs_layer(g: PcPresentation, m: int) -> list[PcElement]:
    """Generators of G_m: the nontrivial images of basic commutators of weight >= m.

    Up to class p these are the pc generators of weight >= m. At class p+1
    v' and v'' need not lie in G_{p+1}, so the Hall commutators are used.
    """
    if not 1 <= m <= g.spec.k + 1:
        raise OutOfRangeError("m", m, f"lower central layers run from 1 to {g.spec.k + 1}")
    layer: list[PcElement] = []
    for c in generate_basis(g.spec.r, g.spec.k):
        if c.weight < m:
            continue
        a = g.commutator_element(c)
        if not a.is_identity and a not in layer:
            layer.append(a)
    return layer


def enumerate_vectors(g: PcPresentation) -> Iterator[tuple[int, ...]]:
    """All reduced exponent vectors in lexicographic order."""
    return itertools.product(*(range(d) for d in g.relative_orders))


# ── Struik coordinates ──

def struik_evaluate(beta: Sequence[int], g: PcPresentation) -> PcElement:
    """prod c_i^{beta_i} over the distinguished basis, in order, by collection."""
    if len(beta) != len(g.distinguished):
        raise PreconditionError(f"expected {len(g.distinguished)} exponents, got {len(beta)}")
    result = g.identity()
    for element, x in zip(g.distinguished_elements(), beta):
        if x:
            result = g.multiply(result, g.power(element, x))
    return result


def struik_form(a: PcElement, g: PcPresentation) -> tuple[int, ...]:
    """Exponents of a over the distinguished basis, 0 <= beta_i < N_i."""
    g._check(a)
    return a.exponents


# ── Consistency ──

class CheckLevel(str, Enum):
    SAMPLED = "sampled"
    FULL = "full"


@dataclass
class ConsistencyReport:
    level: CheckLevel
    checks: int = 0
    passed: bool = True
    failure: str | None = None
    witness: tuple | None = None
    enumerated: int | None = None
    order: int = 0
    modulus_product: int = 0

    def fail(self, failure: str, witness: tuple) -> ConsistencyReport:
        self.passed = False
        self.failure = failure
        self.witness = witness
        return self

    def to_dict(self) -> dict:
        return {
            "level": self.level.value,
            "passed": self.passed,
            "checks": self.checks,
            "failure": self.failure,
            "witness": list(self.witness) if self.witness is not None else None,
            "enumerated": self.enumerated,
            "order": self.order,
            "modulus_product": self.modulus_product,
        }


_SAMPLE_TRIPLES = 300


def verify_consistency(g: PcPresentation, level: CheckLevel | str = CheckLevel.SAMPLED) -> ConsistencyReport:
    """Re-collect the defining relations in different association orders.

    Checks, in order: each relative order is the modulus N_i; each g_i
    commutes with its stored power g_i^{N_i}; the overlaps g_j^{N_j} g_i and
    g_j g_i^{N_i}; associativity of generator triples (all at full level, a
    seeded sample otherwise). At full level the group is also enumerated
    from x1..xr and its size compared with the product of the N_i.

    Returns:
        A report carrying the first failing check and its witness triple.
    """
    level = CheckLevel(level)
    col = g.collector
    report = ConsistencyReport(level=level, order=g.order, modulus_product=g.distinguished.order)
    active = g.active
    one = {i: {i: 1} for i in active}

    def same(left: Vector, right: Vector) -> bool:
        report.checks += 1
        return left == right

    for i, (entry, d) in enumerate(zip(g.distinguished, g.relative_orders)):
        report.checks += 1
        if entry.modulus != d:
            return report.fail(f"relative order {d} of {entry.name} is not its modulus {entry.modulus}", (i, i, i))
    for i in active:
        power = col.power_relation(i)
        if not same(col.multiply(one[i], power), col.multiply(power, one[i])):
            return report.fail("generator does not commute with its power", (i, i, i))
    for i, j in itertools.combinations(active, 2):
        dj, di = col.relative_order(j), col.relative_order(i)
        left = col.multiply(col.power(one[j], dj - 1), col.multiply(one[j], one[i]))
        if not same(left, col.multiply(col.power_relation(j), one[i])):
            return report.fail("power overlap g_j^d g_i", (j, j, i))
        left = col.multiply(col.multiply(one[j], one[i]), col.power(one[i], di - 1))
        if not same(left, col.multiply(one[j], col.power_relation(i))):
            return report.fail("power overlap g_j g_i^d", (j, i, i))
    triples = list(itertools.combinations(active, 3))
    if level is CheckLevel.SAMPLED and len(triples) > _SAMPLE_TRIPLES:
        triples = random.Random(0).sample(triples, _SAMPLE_TRIPLES)
    for i, j, m in triples:
        left = col.multiply(col.multiply(one[m], one[j]), one[i])
        right = col.multiply(one[m], col.multiply(one[j], one[i]))
        if not same(left, right):
            return report.fail("associativity", (m, j, i))
    if level is CheckLevel.FULL:
        cap = load_settings().max_enum
        if g.order > cap:
            raise ResourceLimitError("full consistency enumeration", g.order, cap)
        seen = _closure_size(g)
        report.enumerated = seen
        if seen != g.order:
            return report.fail("enumerated size differs from the product of the moduli", (seen, g.order))
    logger.debug("%s: %d consistency checks passed (%s)", g.spec.describe(), report.checks, level.value)
    return report


def _closure_size(g: PcPresentation) -> int:
    gens = [g.generator(i).vector for i in range(1, g.spec.r + 1)]
    start: tuple[int, ...] = ()
    seen = {start}
    frontier = [dict()]
    while frontier:
        nxt = []
        for v in frontier:
            for x in gens:
                w = g.collector.multiply(v, x)
                key = tuple(sorted(w.items()))
                if key not in seen:
                    seen.add(key)
                    nxt.append(w)
        frontier = nxt
    return len(seen)


# ── Presentation cache ──

def cache_filename(spec: GroupSpec) -> str:
    return f"p{spec.p}_k{spec.k}_a{'_'.join(map(str, spec.alphas))}.pc"


def _format_vector(vector: Mapping[int, int]) -> str:
    return " ".join(f"{i + 1}:{x}" for i, x in sorted(vector.items()) if x)


def dump_presentation(g: PcPresentation) -> str:
    """Text form: header, one line "index name modulus" per pc generator, then relations."""
    spec, col = g.spec, g.collector
    lines = [" ".join(map(str, (spec.p, spec.k, *spec.alphas)))]
    for i, entry in enumerate(g.distinguished):
        lines.append(f"{i + 1} {entry.name} {col.relative_orders[i]}")
    for i, d in enumerate(col.relative_orders):
        lines.append(f"{i + 1}^{d} = {_format_vector(col.powers[i])}".rstrip())
    for (m, j), conj in sorted(col.conjugates.items()):
        swap = {j: 1, **conj}
        lines.append(f"{m + 1} {j + 1} = {_format_vector(swap)}")
    return "\n".join(lines) + "\n"


def _parse_vector(text: str, path: str, line: int) -> Vector:
    vector: Vector = {}
    for token in text.split():
        index, sep, exponent = token.partition(":")
        if not sep:
            raise CacheFormatError(path, line, f"bad vector entry {token!r}")
        try:
            vector[int(index) - 1] = int(exponent)
        except ValueError:
            raise CacheFormatError(path, line, f"bad vector entry {token!r}") from None
    return vector


def load_presentation_text(text: str, path: str = "<string>") -> PcPresentation:
    """Inverse of dump_presentation.

    Raises:
        CacheFormatError: On malformed input or a generator list that does
            not match the distinguished basis of the header's parameters.
    """
    lines = text.splitlines()
    if not lines:
        raise CacheFormatError(path, 1, "empty file")
    try:
        p, k, *alphas = map(int, lines[0].split())
    except ValueError:
        raise CacheFormatError(path, 1, "header must be integers 'p k alpha1..alphar'") from None
    spec = GroupSpec(p, k, tuple(alphas))
    entries = modulus_table(spec).entries
    n = len(entries)
    if len(lines) < 1 + 2 * n:
        raise CacheFormatError(path, len(lines), "truncated file")
    orders = [entry.modulus for entry in entries]
    for offset, entry in enumerate(entries):
        line = 2 + offset
        expected = f"{offset + 1} {entry.name} {entry.modulus}"
        if lines[line - 1].split() != expected.split():
            raise CacheFormatError(path, line, f"expected generator {expected!r}")
    powers: list[Vector] = []
    for offset in range(n):
        line = 2 + n + offset
        lhs, sep, rhs = lines[line - 1].partition("=")
        if not sep or lhs.strip() != f"{offset + 1}^{orders[offset]}":
            raise CacheFormatError(path, line, f"expected power relation for generator {offset + 1}")
        powers.append(_parse_vector(rhs, path, line))
    conjugates: dict[tuple[int, int], Vector] = {}
    for line in range(2 + 2 * n, len(lines) + 1):
        lhs, sep, rhs = lines[line - 1].partition("=")
        if not lhs.strip():
            continue
        try:
            m, j = (int(x) - 1 for x in lhs.split())
        except ValueError:
            raise CacheFormatError(path, line, "expected swap relation 'j i = vector'") from None
        swap = _parse_vector(rhs, path, line)
        if not sep or swap.pop(j, None) != 1:
            raise CacheFormatError(path, line, "swap relation must start with the smaller generator")
        conjugates[(m, j)] = swap
    return PcPresentation(spec, orders, powers, conjugates)


def save_presentation(g: PcPresentation, path: Path) -> None:
    """Write the presentation through a temporary file in the same directory.

    Readers see either the previous file or the complete new one.
    """
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(dump_presentation(g))
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def load_presentation(path: Path) -> PcPresentation:
    return load_presentation_text(path.read_text(), str(path))


def cached_build_group(spec: GroupSpec, use_cache: bool = True, cache_dir: Path | None = None) -> PcPresentation:
    """build_group backed by the on-disk presentation cache."""
    if not use_cache:
        return build_group(spec)
    _require_supported(spec)
    directory = cache_dir or load_settings().cache_dir
    path = directory / cache_filename(spec)
    if path.exists():
        logger.debug("presentation cache hit: %s", path)
        g = load_presentation(path)
        if g.spec != spec:
            raise CacheFormatError(str(path), 1, f"header describes {g.spec.describe()}")
        return g
    g = build_group(spec)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        save_presentation(g, path)
    except OSError as exc:
        logger.warning("could not write presentation cache %s: %s", path, exc)
    return g
