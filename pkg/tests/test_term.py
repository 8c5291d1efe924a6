"""Tests for the expression grammar."""

import random

import pytest

from nilcap.exceptions import ExprSyntaxError, GeneratorIndexError, PreconditionError
from nilcap.term import (
    Commutator,
    Generator,
    Identity,
    Power,
    Product,
    format_expr,
    left_normed,
    parse_expr,
)


class TestParseExpr:
    def test_generator(self):
        assert parse_expr("x2", 2) == Generator(2)

    def test_identity(self):
        assert parse_expr("e", 1) == Identity()

    def test_left_normed_commutator(self):
        assert parse_expr("[x2,x1,x1]", 2) == Commutator((Generator(2), Generator(1), Generator(1)))

    def test_product_and_powers(self):
        e = parse_expr("[x2,x1]^2 x1^-1", 2)
        assert e == Product(
            (
                Power(Commutator((Generator(2), Generator(1))), 2),
                Power(Generator(1), -1),
            )
        )

    def test_parenthesised_product(self):
        e = parse_expr("(x1 x2)^3", 2)
        assert e == Power(Product((Generator(1), Generator(2))), 3)

    def test_nested_commutator_entries(self):
        e = parse_expr("[[x3,x2],x1]", 3)
        assert e == Commutator((Commutator((Generator(3), Generator(2))), Generator(1)))

    def test_single_entry_bracket_rejected(self):
        with pytest.raises(ExprSyntaxError):
            parse_expr("[x1]", 2)

    def test_unbalanced_rejected(self):
        with pytest.raises(ExprSyntaxError, match="Syntax error") as info:
            parse_expr("[x1,x2", 2)
        assert info.value.text == "[x1,x2"

    def test_generator_out_of_range(self):
        with pytest.raises(GeneratorIndexError) as info:
            parse_expr("[x3,x1]", 2)
        assert info.value.index == 3
        assert info.value.r == 2

    def test_generator_zero_rejected(self):
        with pytest.raises(GeneratorIndexError):
            parse_expr("x0", 2)

    @pytest.mark.parametrize("text", ["x1x2", "x1^2x2", "[x2,x1]^2x1", "x1e"])
    def test_factors_need_a_separator(self, text):
        with pytest.raises(ExprSyntaxError):
            parse_expr(text, 2)

    def test_bracket_ends_a_factor(self):
        assert parse_expr("x1[x2,x1]", 2) == Product((Generator(1), Commutator((Generator(2), Generator(1)))))


class TestFormatExpr:
    def test_reads_back(self):
        for text in ["x1", "e", "[x2,x1,x2]", "[x2,x1]^2 x1^-1", "(x1 x2)^3", "[[x3,x2],x1]"]:
            e = parse_expr(text, 3)
            assert parse_expr(format_expr(e), 3) == e

    def test_power_of_commutator(self):
        assert format_expr(Power(Commutator((Generator(2), Generator(1))), 4)) == "[x2,x1]^4"

    @pytest.mark.parametrize("seed", range(4))
    def test_random_trees_read_back(self, seed):
        rng = random.Random(seed)
        for _ in range(250):
            r = rng.randint(1, 4)
            e = random_tree(rng, r, rng.randint(0, 6))
            text = format_expr(e)
            assert parse_expr(text, r) == e, text


class TestProduct:
    def test_single_factor_rejected(self):
        with pytest.raises(PreconditionError, match="two factors"):
            Product((Generator(1),))

    def test_empty_rejected(self):
        with pytest.raises(PreconditionError):
            Product(())


class TestLeftNormed:
    def test_nests_binary(self):
        e = left_normed(Generator(2), [Generator(1), Generator(1)])
        assert e == Commutator((Commutator((Generator(2), Generator(1))), Generator(1)))

    def test_empty_tail(self):
        with pytest.raises(PreconditionError):
            left_normed(Generator(1), [])


def random_tree(rng, r, depth):
    if depth == 0 or rng.random() < 0.25:
        return Identity() if rng.random() < 0.1 else Generator(rng.randint(1, r))
    width = rng.randint(2, 3)
    kind = rng.choice(["product", "power", "commutator"])
    if kind == "product":
        return Product(tuple(random_tree(rng, r, depth - 1) for _ in range(width)))
    if kind == "power":
        return Power(random_tree(rng, r, depth - 1), rng.randint(-3, 4))
    return Commutator(tuple(random_tree(rng, r, depth - 1) for _ in range(width)))
