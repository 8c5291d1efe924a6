"""Centers and capability of nilpotent products of cyclic p-groups."""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import Enum

from nilcap.config import load_settings
from nilcap.exceptions import OutOfRangeError, PreconditionError, ResourceLimitError
from nilcap.nilprod import GroupSpec, PcElement, PcPresentation, build_group, lcs_layer
from nilcap import oracle
from nilcap.term import evaluate

logger = logging.getLogger(__name__)


# ── Centers ──

@dataclass(frozen=True)
class CenterFormula:
    """Z(G) = <x_r^exponent, G_layer>."""

    spec: GroupSpec
    exponent: int
    layer: int

    def describe(self) -> str:
        return f"<x{self.spec.r}^{self.exponent}, G_{self.layer}>"

    def generators(self, g: PcPresentation) -> list[PcElement]:
        head = g.power(g.generator(self.spec.r), self.exponent)
        return [head, *lcs_layer(g, self.layer)]


def center_formula(spec: GroupSpec) -> CenterFormula:
    """The center as given by the class-k (k <= p) and class-(p+1) formulas.

    Raises:
        OutOfRangeError: If r < 2 or k > p+1.
    """
    if spec.r < 2:
        raise OutOfRangeError("alphas", spec.alphas, "the center formula needs r >= 2")
    if spec.k > spec.p + 1:
        raise OutOfRangeError("k", spec.k, f"no center formula beyond k = p+1 = {spec.p + 1}")
    a = spec.alphas[-2]
    if spec.k == spec.p + 1:
        return CenterFormula(spec, spec.p ** (a + 1), spec.k)
    return CenterFormula(spec, spec.p**a, spec.k)


def is_central(a: PcElement, g: PcPresentation) -> bool:
    """True iff a commutes with every generator x1..xr."""
    for i in range(1, g.spec.r + 1):
        x = g.generator(i)
        if g.multiply(a, x) != g.multiply(x, a):
            return False
    return True


def subgroup_closure(elements: Iterable[PcElement], g: PcPresentation) -> list[PcElement]:
    """All products of the given elements, sorted by exponent vector."""
    gens = [a for a in elements if not a.is_identity]
    cap = load_settings().max_enum
    start = g.identity()
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for a in frontier:
            for s in gens:
                b = g.multiply(a, s)
                if b not in seen:
                    seen.add(b)
                    nxt.append(b)
        if len(seen) > cap:
            raise ResourceLimitError("subgroup closure", len(seen), cap)
        frontier = nxt
    return sorted(seen)


def center_bruteforce(g: PcPresentation) -> list[PcElement]:
    """Every element commuting with all generators, in enumeration order."""
    return [a for a in oracle.enumerate(g) if is_central(a, g)]


@dataclass
class CenterReport:
    formula: CenterFormula
    formula_elements: list[PcElement]
    brute: list[PcElement] | None = None

    @property
    def match(self) -> bool | None:
        if self.brute is None:
            return None
        return self.brute == self.formula_elements

    def to_dict(self) -> dict:
        return {
            "formula": self.formula.describe(),
            "formula_order": len(self.formula_elements),
            "brute_order": None if self.brute is None else len(self.brute),
            "match": self.match,
            "elements": [str(a) for a in (self.brute if self.brute is not None else self.formula_elements)],
        }


def center_report(g: PcPresentation, brute: bool = False) -> CenterReport:
    formula = center_formula(g.spec)
    report = CenterReport(formula, subgroup_closure(formula.generators(g), g))
    if brute:
        report.brute = center_bruteforce(g)
        if not report.match:
            logger.warning("%s: center formula disagrees with enumeration", g.spec.describe())
    return report


# ── Non-centrality of x_r^{p^alpha_{r-1}} at class p+1 ──

@dataclass(frozen=True)
class NotCentralReport:
    """[y^{p^a}, x] against [y^p, x]^{p^(a-1)} in <x> *^{N_{p+1}} <y>."""

    spec: GroupSpec
    value: PcElement
    equality: bool
    expansion_equality: bool

    @property
    def nontrivial(self) -> bool:
        return not self.value.is_identity

    @property
    def passed(self) -> bool:
        return self.equality and self.expansion_equality and self.nontrivial


def check_notcentral_identity(p: int, alpha: int, beta: int) -> NotCentralReport:
    """Verify [y^{p^alpha}, x] = [y^p, x]^{p^(alpha-1)} != e.

    Here |x| = p^alpha < |y| = p^beta at class p+1. Also checks the
    expansion [y^p, x]^{p^(alpha-1)} = [y,x]^{p^alpha} [y,x,_{p-1} y]^{p^(alpha-1)}.
    """
    if alpha >= beta:
        raise PreconditionError(f"need alpha < beta, got {alpha} >= {beta}")
    g = build_group(GroupSpec(p, p + 1, (alpha, beta)))
    x, y = g.generator(1), g.generator(2)
    lhs = g.commutator(g.power(y, p**alpha), x)
    rhs = g.power(g.commutator(g.power(y, p), x), p ** (alpha - 1))
    yx = g.commutator(y, x)
    long = yx
    for _ in range(p - 1):
        long = g.commutator(long, y)
    expansion = g.multiply(g.power(yx, p**alpha), g.power(long, p ** (alpha - 1)))
    return NotCentralReport(g.spec, lhs, lhs == rhs, rhs == expansion)


# ── Capability ──

def _sorted(alphas: Sequence[int]) -> list[int]:
    if not alphas:
        raise PreconditionError("need at least one cyclic factor")
    return sorted(alphas)


def capability_necessary(p: int, k: int, alphas: Sequence[int]) -> bool:
    """r > 1 and alpha_r <= alpha_{r-1} + floor((k-1)/(p-1))."""
    a = _sorted(alphas)
    return len(a) > 1 and a[-1] <= a[-2] + (k - 1) // (p - 1)


def capability_decide(p: int, alphas: Sequence[int]) -> bool:
    """The p-nilpotent product is capable iff r > 1 and alpha_r <= alpha_{r-1} + 1."""
    a = _sorted(alphas)
    return len(a) > 1 and a[-1] <= a[-2] + 1


class Rule(str, Enum):
    CYCLIC = "cyclic"
    CLASS_P = "class-p criterion"
    SMALL_CLASS = "small-class criterion"
    NECESSARY = "necessary condition"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class Verdict:
    capable: bool | None
    rule: Rule

    def describe(self) -> str:
        shown = "unknown" if self.capable is None else str(self.capable).lower()
        return f"capable: {shown} ({self.rule.value})"


def capability_verdict(p: int, k: int, alphas: Sequence[int]) -> Verdict:
    """Capability of the k-nilpotent product, with the rule that settles it."""
    a = _sorted(alphas)
    if len(a) == 1:
        return Verdict(False, Rule.CYCLIC)
    if k == p:
        return Verdict(capability_decide(p, a), Rule.CLASS_P)
    necessary = capability_necessary(p, k, a)
    if k < p:
        return Verdict(necessary, Rule.SMALL_CLASS)
    if not necessary:
        return Verdict(False, Rule.NECESSARY)
    return Verdict(None, Rule.UNDECIDED)


@dataclass
class WitnessReport:
    """K = (p+1)-nilpotent product with K/Z(K) checked against G = p-nilpotent product."""

    p: int
    alphas: tuple[int, ...]
    order_k: int
    center_order: int
    quotient_order: int
    power_trivial: bool
    center_is_layer: bool
    quotient_matches: bool
    failures: list[str] = field(default_factory=list)

    @property
    def verified(self) -> bool:
        return self.power_trivial and self.center_is_layer and self.quotient_matches

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "alphas": list(self.alphas),
            "order_k": self.order_k,
            "center_order": self.center_order,
            "quotient_order": self.quotient_order,
            "power_trivial": self.power_trivial,
            "center_is_layer": self.center_is_layer,
            "quotient_matches": self.quotient_matches,
            "verified": self.verified,
            "failures": self.failures,
        }


def projection_images(k: PcPresentation, g: PcPresentation) -> list[PcElement]:
    """Images in G of the pc generators of K, read off their expressions."""
    return [evaluate(entry.expr, g) for entry in k.distinguished]


def project(
    a: PcElement, k: PcPresentation, g: PcPresentation, images: Sequence[PcElement] | None = None
) -> PcElement:
    """Image of a under K -> K/K_{c+1} = G, c the class of G."""
    images = images if images is not None else projection_images(k, g)
    result = g.identity()
    for i, x in sorted(a.vector.items()):
        result = g.multiply(result, g.power(images[i], x))
    return result


def capability_witness(p: int, alphas: Sequence[int]) -> WitnessReport:
    """Exhibit G as K/Z(K) with K the (p+1)-nilpotent product.

    Checks by enumeration that Z(K) = K_{p+1}, that the projection K -> G
    has exactly Z(K) as kernel, and that it respects products of pc
    generators of K.

    Raises:
        PreconditionError: If the class-p criterion says G is not capable.
        ResourceLimitError: If K is too large to enumerate.
    """
    if not capability_decide(p, alphas):
        raise PreconditionError(f"the {p}-nilpotent product with alphas {tuple(alphas)} is not capable")
    spec = tuple(_sorted(alphas))
    big = build_group(GroupSpec(p, p + 1, spec))
    small = build_group(GroupSpec(p, p, spec))
    failures = []

    power = big.power(big.generator(big.spec.r), p ** (spec[-2] + 1))
    if not power.is_identity:
        failures.append(f"x{big.spec.r}^{p ** (spec[-2] + 1)} is not trivial")
    center = center_bruteforce(big)
    layer = subgroup_closure(lcs_layer(big, p + 1), big)
    if center != layer:
        failures.append("Z(K) differs from K_{p+1}")

    central = set(center)
    images = projection_images(big, small)
    kernel_ok = all(project(a, big, small, images).is_identity == (a in central) for a in oracle.enumerate(big))
    if not kernel_ok:
        failures.append("kernel of K -> G differs from Z(K)")
    gens = [big.pc_generator(i) for i in big.active]
    table_ok = all(
        project(big.multiply(a, b), big, small, images)
        == small.multiply(project(a, big, small, images), project(b, big, small, images))
        for a in gens
        for b in gens
    )
    if not table_ok:
        failures.append("projection does not respect products of pc generators")
    quotient_order = big.order // len(center)
    if quotient_order != small.order:
        failures.append(f"|K/Z(K)| = {quotient_order} but |G| = {small.order}")
    logger.debug("witness p=%d alphas=%s: %s", p, spec, failures or "verified")
    return WitnessReport(
        p=p,
        alphas=spec,
        order_k=big.order,
        center_order=len(center),
        quotient_order=quotient_order,
        power_trivial=power.is_identity,
        center_is_layer=center == layer,
        quotient_matches=kernel_ok and table_ok and quotient_order == small.order,
        failures=failures,
    )
