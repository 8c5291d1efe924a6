"""Tests for collection in free nilpotent groups."""

import itertools
import random
from concurrent.futures import ThreadPoolExecutor

import pytest

from nilcap.collect import (
    commutate_with,
    embed,
    free_group,
    power_commutator_expansion,
    rewrite_basic_pair,
    truncate,
)
from nilcap.exceptions import BasisMismatchError, GeneratorIndexError, PreconditionError, ShoveUndefinedError
from nilcap.hall import BasicCommutator, from_expr, generate_basis, shove
from nilcap.oracle import free_word_coordinates
from nilcap.term import Generator, Power, Product, parse_expr


def c(text: str) -> BasicCommutator:
    return from_expr(parse_expr(text, 3))


def word_expr(letters):
    factors = tuple(Generator(a) if a > 0 else Power(Generator(-a), -1) for a in letters)
    return factors[0] if len(factors) == 1 else Product(factors)


def random_word(rng: random.Random, r: int, length: int) -> list[int]:
    return [rng.choice([1, -1]) * rng.randint(1, r) for _ in range(length)]


class TestEmbed:
    def test_swap_generators(self):
        basis = generate_basis(2, 3)
        g = embed(parse_expr("x2 x1", 2), basis)
        assert g.to_dict() == {"x1": 1, "x2": 1, "[x2,x1]": 1}
        assert str(g) == "x1 x2 [x2,x1]"

    def test_commutator_is_basis_element(self):
        basis = generate_basis(2, 3)
        assert embed(parse_expr("[x2,x1]", 2), basis).to_dict() == {"[x2,x1]": 1}
        assert embed(parse_expr("[x1,x2]", 2), basis).to_dict() == {"[x2,x1]": -1}

    def test_weight_above_class_vanishes(self):
        basis = generate_basis(2, 2)
        assert embed(parse_expr("[x2,x1,x1]", 2), basis).is_identity

    def test_identity_and_inverse(self):
        basis = generate_basis(2, 4)
        assert embed(parse_expr("x2 x1 [x2,x1]^-1 x2^-1 x1^-1", 2), basis).is_identity
        assert embed(parse_expr("e", 2), basis).is_identity

    def test_generator_out_of_range(self):
        with pytest.raises(GeneratorIndexError):
            embed(parse_expr("x3", 3), generate_basis(2, 2))

    def test_mixed_bases_rejected(self):
        a = free_group(2, 2).generator(1)
        b = free_group(2, 3).generator(1)
        with pytest.raises(BasisMismatchError):
            free_group(2, 2).multiply(a, b)


class TestGroupAxioms:
    @pytest.mark.parametrize("r,k", [(2, 4), (3, 3)])
    def test_random_triples(self, r, k):
        group = free_group(r, k)
        rng = random.Random(r * 10 + k)
        for _ in range(1000):
            a, b, d = (group.embed(word_expr(random_word(rng, r, rng.randint(1, 6)))) for _ in range(3))
            assert group.multiply(group.multiply(a, b), d) == group.multiply(a, group.multiply(b, d))
            assert group.multiply(a, group.inverse(a)).is_identity
            assert group.multiply(group.inverse(a), a).is_identity

    def test_power_laws(self):
        group = free_group(2, 4)
        a = group.embed(parse_expr("x1 x2^2 [x2,x1]", 2))
        assert group.power(a, 5) == group.multiply(group.power(a, 2), group.power(a, 3))
        assert group.power(a, -3) == group.inverse(group.power(a, 3))

    def test_shared_memo_independent_of_interleaving(self):
        rng = random.Random(5)
        words = [word_expr(random_word(rng, 3, rng.randint(2, 8))) for _ in range(40)]

        def products(group):
            elements = [group.embed(w) for w in words]
            return [group.multiply(a, b).vector for a, b in zip(elements, reversed(elements))]

        free_group.cache_clear()
        shared = free_group(3, 4)
        with ThreadPoolExecutor(max_workers=8) as pool:
            results = list(pool.map(lambda _: products(shared), range(8)))
        free_group.cache_clear()
        expected = products(free_group(3, 4))
        assert all(result == expected for result in results)


class TestGradedStructure:
    @pytest.mark.parametrize("r,k", [(2, 5), (3, 4)])
    def test_commutator_of_layers_lands_in_the_sum_of_weights(self, r, k):
        group = free_group(r, k)
        basis = group.basis
        for u, v in itertools.product(basis, repeat=2):
            value = group.commutator(group.element(u), group.element(v))
            if u.weight + v.weight > k:
                assert value.is_identity, (u, v)
            else:
                assert min(value.weights(), default=k + 1) >= u.weight + v.weight, (u, v)

    def test_commutator_of_products_in_deep_layers(self):
        group = free_group(3, 5)
        rng = random.Random(11)
        layer = {w: [group.basis[i] for i in group.basis.layer(w)] for w in range(1, 6)}

        def element_of_weight(i):
            items = [(rng.choice(layer[w]), rng.randint(-2, 2)) for w in range(i, 6) for _ in range(2)]
            return group.product(items)

        for _ in range(200):
            i, j = rng.randint(1, 3), rng.randint(1, 3)
            value = group.commutator(element_of_weight(i), element_of_weight(j))
            assert min(value.weights(), default=6) >= i + j


class TestTruncationHomomorphism:
    @pytest.mark.parametrize("r,k", [(2, 4), (3, 3)])
    def test_truncate_respects_products(self, r, k):
        group = free_group(r, k)
        lower = free_group(r, k - 1)
        rng = random.Random(k)
        for _ in range(300):
            a, b = (group.embed(word_expr(random_word(rng, r, rng.randint(1, 6)))) for _ in range(2))
            assert truncate(group.multiply(a, b), k - 1) == lower.multiply(truncate(a, k - 1), truncate(b, k - 1))


class TestMagnusOracle:
    @pytest.mark.parametrize("k", [2, 3, 4])
    def test_collector_matches_series(self, k):
        basis = generate_basis(2, k)
        rng = random.Random(k)
        for _ in range(34):
            letters = random_word(rng, 2, rng.randint(1, 8))
            assert embed(word_expr(letters), basis).vector == free_word_coordinates(letters, basis), letters

    def test_three_generators(self):
        basis = generate_basis(3, 3)
        rng = random.Random(7)
        for _ in range(20):
            letters = random_word(rng, 3, rng.randint(1, 7))
            assert embed(word_expr(letters), basis).vector == free_word_coordinates(letters, basis), letters


class TestRewriteBasicPair:
    def test_jacobi_instance(self):
        result = rewrite_basic_pair(c("[x3,x2]"), c("x1"))
        assert result.epsilon == 1
        assert result.leading == c("[x3,x1,x2]")
        assert result.tail.to_dict() == {"[x2,x1,x3]": -1}

    def test_smaller_first_flips_sign(self):
        result = rewrite_basic_pair(c("x1"), c("x2"))
        assert result.epsilon == -1
        assert result.leading == c("[x2,x1]")
        assert result.tail.is_identity

    def test_equal_arguments(self):
        with pytest.raises(ShoveUndefinedError):
            rewrite_basic_pair(c("x1"), c("x1"))

    @pytest.mark.parametrize("r,max_weight", [(2, 6), (3, 6)])
    def test_leading_term_is_shove(self, r, max_weight):
        basis = generate_basis(r, max_weight - 1)
        for u, v in itertools.permutations(basis, 2):
            if u.weight + v.weight > max_weight:
                continue
            result = rewrite_basic_pair(u, v)
            assert result.leading == shove(u, v), (u, v)
            assert result.epsilon == (1 if u > v else -1), (u, v)
            assert all(b > result.leading for b, _ in result.tail.items()), (u, v)


class TestCommutateWith:
    def test_coefficient_carries_over(self):
        g = free_group(2, 2).power(free_group(2, 2).element(c("[x2,x1]")), 3)
        value = commutate_with(g, c("x2"))
        assert value.basis.k == 3
        assert value.to_dict() == {"[x2,x1,x2]": 3}

    def test_smaller_entry_on_the_right(self):
        g = free_group(2, 2).power(free_group(2, 2).element(c("[x2,x1]")), 2)
        assert commutate_with(g, c("x1")).to_dict() == {"[x2,x1,x1]": 2}

    def test_rejects_mixed_weights(self):
        g = free_group(2, 3).embed(parse_expr("x1 [x2,x1]", 2))
        with pytest.raises(PreconditionError, match="homogeneous"):
            commutate_with(g, c("x1"))


class TestTruncate:
    def test_drops_high_weights(self):
        g = embed(parse_expr("x2 x1 [x2,x1,x2]", 2), generate_basis(2, 3))
        t = truncate(g, 2)
        assert t.basis.k == 2
        assert t.to_dict() == {"x1": 1, "x2": 1, "[x2,x1]": 1}

    def test_cannot_raise_class(self):
        with pytest.raises(PreconditionError):
            truncate(embed(parse_expr("x1", 2), generate_basis(2, 2)), 3)


class TestPowerCommutatorExpansion:
    @pytest.mark.parametrize("p", [2, 3])
    def test_leading_coefficients(self, p):
        expansion = power_commutator_expansion(p)
        long = from_expr(parse_expr("[x2,x1" + ",x2" * (p - 1) + "]", 2))
        assert expansion.exponent(c("[x2,x1]")) == p
        assert expansion.exponent(long) == 1
        assert expansion.exponent(c("x1")) == 0
        assert expansion.exponent(c("x2")) == 0

    def test_class_two_prime_exact(self):
        assert power_commutator_expansion(2).to_dict() == {"[x2,x1]": 2, "[x2,x1,x2]": 1}
