"""Tests for nilpotent products of cyclic p-groups."""

import random

import pytest

from nilcap import nilprod
from nilcap.exceptions import (
    BasisMismatchError,
    CacheFormatError,
    GeneratorIndexError,
    OutOfRangeError,
    ResourceLimitError,
)
from nilcap.nilprod import (
    CheckLevel,
    EntryKind,
    GroupSpec,
    PcPresentation,
    binom_reduction,
    build_group,
    cache_filename,
    cached_build_group,
    dump_presentation,
    lcs_layer,
    load_presentation,
    load_presentation_text,
    modulus_table,
    normal_form,
    order_of,
    pc_inverse,
    pc_multiply,
    pc_power,
    save_presentation,
    struik_evaluate,
    struik_form,
    verify_consistency,
)
from nilcap.oracle import enumerate as enumerate_group
from nilcap.term import parse_expr


def nf(text, g):
    return normal_form(parse_expr(text, g.spec.r), g)


class TestGroupSpec:
    def test_rejects_composite_p(self):
        with pytest.raises(OutOfRangeError, match="prime"):
            GroupSpec(4, 2, (1, 1))

    def test_rejects_unsorted_alphas(self):
        with pytest.raises(OutOfRangeError, match="non-decreasing"):
            GroupSpec(2, 2, (2, 1))

    def test_rejects_zero_alpha(self):
        with pytest.raises(OutOfRangeError):
            GroupSpec(3, 2, (0, 1))

    def test_class_beyond_p_plus_one(self):
        with pytest.raises(OutOfRangeError, match="k <= p\\+1"):
            build_group(GroupSpec(2, 4, (1, 1)))


class TestModulusTable:
    def test_class_at_most_p(self):
        table = modulus_table(GroupSpec(3, 3, (1, 2)))
        assert [e.modulus for e in table] == [3, 9, 3, 3, 3]
        assert table.order == 3**6

    def test_class_p_plus_one_equal_exponents(self):
        table = modulus_table(GroupSpec(2, 3, (1, 1)))
        assert [e.modulus for e in table] == [2, 2, 4, 1, 1]
        assert [e.kind for e in table][3:] == [EntryKind.V_PRIME, EntryKind.V_DOUBLE_PRIME]
        assert [e.name for e in table][3:] == ["[x2,x1^2]", "[x2^2,x1]"]

    def test_class_p_plus_one_unequal_exponents(self):
        table = modulus_table(GroupSpec(2, 3, (1, 2)))
        assert [e.modulus for e in table] == [2, 4, 4, 1, 2]
        assert table.order == 64

    def test_class_four_at_three(self):
        table = modulus_table(GroupSpec(3, 4, (1, 2)))
        assert table.order == 3**9
        kinds = {e.name: e.kind for e in table}
        assert kinds["[x2,x1^3]"] is EntryKind.V_PRIME
        assert kinds["[x2^3,x1]"] is EntryKind.V_DOUBLE_PRIME


class TestBuildGroup:
    @pytest.mark.parametrize(
        "p,k,alphas,order",
        [
            (2, 1, (1, 1), 4),
            (2, 2, (1, 1), 8),
            (2, 3, (1, 1), 16),
            (2, 3, (1, 2), 64),
            (2, 3, (2, 2), 512),
            (3, 3, (1, 1), 243),
            (3, 4, (1, 2), 3**9),
            (5, 2, (1,), 5),
        ],
    )
    def test_orders(self, p, k, alphas, order):
        g = build_group(GroupSpec(p, k, alphas))
        assert g.order == order
        assert g.order == g.distinguished.order

    @pytest.mark.parametrize(
        "spec", [GroupSpec(3, 3, (1, 1)), GroupSpec(2, 3, (1, 1)), GroupSpec(2, 3, (2, 3)), GroupSpec(3, 4, (1, 2))]
    )
    def test_relative_orders_are_the_moduli(self, spec):
        g = build_group(spec)
        assert list(g.relative_orders) == [e.modulus for e in g.distinguished]

    def test_dihedral_relative_orders(self, d16):
        assert d16.relative_orders == (2, 2, 4, 1, 1)
        assert d16.active == [0, 1, 2]

    def test_large_box_builds_without_enumeration(self):
        g = build_group(GroupSpec(2, 3, (5, 5)))
        assert g.order == 2**24
        assert nf("x2 x1", g).exponents == (1, 1, 1, 0, 0)

    def test_generators_have_prescribed_orders(self, g64):
        assert order_of(g64.generator(1), g64) == 2
        assert order_of(g64.generator(2), g64) == 4


class TestElementOperations:
    def test_swap(self, d16):
        assert nf("x2 x1", d16).exponents == (1, 1, 1, 0, 0)
        assert str(nf("x2 x1", d16)) == "x1 x2 [x2,x1]"

    def test_power_relation(self, d16):
        assert nf("x1^2", d16).is_identity
        assert nf("x1 x1^-1 x2 x2", d16).is_identity

    def test_rotation_has_order_eight(self, d16):
        assert order_of(nf("x1 x2", d16), d16) == 8

    def test_commutator_of_order_four(self, d16):
        assert order_of(nf("[x2,x1]", d16), d16) == 4

    def test_inverse_and_power(self, g64):
        a = nf("x1 x2^3 [x2,x1]", g64)
        assert pc_multiply(a, pc_inverse(a, g64), g64).is_identity
        assert pc_power(a, 3, g64) == pc_multiply(a, pc_multiply(a, a, g64), g64)
        assert pc_power(a, -1, g64) == pc_inverse(a, g64)

    def test_associativity_sample(self, g243):
        elements = [nf(t, g243) for t in ["x1", "x2^2", "[x2,x1]", "x2 x1^2", "[x2,x1,x2]^2 x1"]]
        for a in elements:
            for b in elements:
                for d in elements:
                    left = pc_multiply(pc_multiply(a, b, g243), d, g243)
                    assert left == pc_multiply(a, pc_multiply(b, d, g243), g243)

    def test_generator_out_of_range(self, d16):
        with pytest.raises(GeneratorIndexError):
            normal_form(parse_expr("x3", 3), d16)

    def test_mixed_presentations_rejected(self, d8, d16):
        with pytest.raises(BasisMismatchError):
            pc_multiply(d8.generator(1), d16.generator(1), d16)


class TestLcsLayer:
    def test_top_layer_of_d16(self, d16):
        layer = lcs_layer(d16, 3)
        assert len(layer) == 1
        assert order_of(layer[0], d16) == 2

    def test_pc_generators_up_to_class_p(self, g243):
        assert lcs_layer(g243, 2) == [g243.pc_generator(i) for i in g243.active[2:]]

    def test_top_layer_is_central(self, g64):
        top = lcs_layer(g64, 3)
        assert top
        for a in top:
            for i in (1, 2):
                x = g64.generator(i)
                assert pc_multiply(a, x, g64) == pc_multiply(x, a, g64)

    def test_bounds(self, d16):
        assert lcs_layer(d16, 4) == []
        assert {d16.generator(1), d16.generator(2)} <= set(lcs_layer(d16, 1))
        with pytest.raises(OutOfRangeError):
            lcs_layer(d16, 5)
        with pytest.raises(OutOfRangeError):
            lcs_layer(d16, 0)


class TestStruikForm:
    def test_distinguished_orders_equal_moduli(self, d16, g64):
        for g in (d16, g64):
            for entry, element in zip(g.distinguished, g.distinguished_elements()):
                assert order_of(element, g) == entry.modulus, entry.name

    def test_double_prime_has_order_two(self, g64):
        names = [e.name for e in g64.distinguished]
        v2 = g64.distinguished_elements()[names.index("[x2^2,x1]")]
        assert order_of(v2, g64) == 2

    @pytest.mark.parametrize("alphas", [(1, 1), (1, 2)])
    def test_evaluate_inverts_form(self, alphas):
        g = build_group(GroupSpec(2, 3, alphas))
        for a in enumerate_group(g):
            beta = struik_form(a, g)
            assert all(0 <= b < e.modulus for b, e in zip(beta, g.distinguished))
            assert struik_evaluate(beta, g) == a

    @pytest.mark.parametrize(
        "spec", [GroupSpec(2, 3, (1, 1)), GroupSpec(2, 3, (1, 2)), GroupSpec(2, 3, (2, 2)), GroupSpec(3, 4, (1, 2))]
    )
    def test_pc_generators_are_the_named_entries(self, spec):
        g = build_group(spec)
        for i, element in enumerate(g.distinguished_elements()):
            assert element == g.pc_generator(i), g.distinguished.entries[i].name

    def test_forms_are_the_pc_exponents(self, monkeypatch, g64):
        monkeypatch.setenv("NILCAP_MAX_ENUM", "10")
        a = nf("x2 x1 x2 [x2^2,x1]", g64)
        assert struik_form(a, g64) == a.exponents
        assert struik_evaluate(a.exponents, g64) == a

    def test_names_follow_the_distinguished_basis(self, g64):
        assert str(nf("[x2^2,x1]", g64)) == "[x2^2,x1]"
        assert nf("[x2^2,x1] x1", g64).to_dict() == {"x1": 1, "[x2^2,x1]": 1}


class TestBinomReduction:
    @pytest.mark.parametrize("p,alpha", [(2, 1), (2, 3), (3, 2), (5, 2), (7, 1)])
    def test_equals_p_to_alpha_minus_one(self, p, alpha):
        assert binom_reduction(alpha, p) == p ** (alpha - 1)


class TestVerifyConsistency:
    def test_full_pass(self, d16):
        report = verify_consistency(d16, "full")
        assert report.passed
        assert report.enumerated == 16
        assert report.modulus_product == 16

    @pytest.mark.parametrize(
        "spec,order",
        [
            (GroupSpec(2, 3, (1, 2)), 64),
            (GroupSpec(2, 3, (2, 3)), 2**11),
            (GroupSpec(3, 4, (1, 1)), 3**7),
            (GroupSpec(3, 4, (1, 2)), 3**9),
        ],
    )
    def test_full_pass_at_class_p_plus_one(self, spec, order):
        report = verify_consistency(build_group(spec), CheckLevel.FULL)
        assert report.passed, report.failure
        assert report.enumerated == order

    @pytest.mark.parametrize("spec", [GroupSpec(3, 3, (1, 1)), GroupSpec(2, 3, (2, 2)), GroupSpec(3, 4, (1, 2))])
    def test_sampled_pass(self, spec):
        assert verify_consistency(build_group(spec)).passed

    def test_corrupted_power_relation(self, d16):
        # x1^2 = [x2,x1] does not commute with x1
        bad = d16.with_power_relation(0, {2: 1})
        report = verify_consistency(bad, "full")
        assert not report.passed
        assert report.witness == (0, 0, 0)

    def test_relative_order_other_than_modulus(self, d16):
        col = d16.collector
        bad = PcPresentation(d16.spec, (2, 2, 2, 1, 1), col.powers, col.conjugates)
        report = verify_consistency(bad)
        assert not report.passed
        assert "modulus 4" in report.failure
        assert report.witness == (2, 2, 2)

    def test_enumeration_cap(self, monkeypatch, g243):
        monkeypatch.setenv("NILCAP_MAX_ENUM", "100")
        with pytest.raises(ResourceLimitError):
            verify_consistency(g243, "full")


class TestPresentationCache:
    def test_dump_and_load(self, g64):
        text = dump_presentation(g64)
        assert text.splitlines()[0] == "2 3 1 2"
        loaded = load_presentation_text(text)
        assert loaded == g64
        a = nf("x2 x1 x2", loaded)
        assert a.exponents == nf("x2 x1 x2", g64).exponents

    def test_cached_build_writes_file(self, tmp_path):
        spec = GroupSpec(2, 3, (1, 1))
        g = cached_build_group(spec, cache_dir=tmp_path)
        path = tmp_path / cache_filename(spec)
        assert path.name == "p2_k3_a1_1.pc"
        assert path.exists()
        again = cached_build_group(spec, cache_dir=tmp_path)
        assert again == g

    def test_save_and_load_file(self, tmp_path, g243):
        path = tmp_path / cache_filename(g243.spec)
        save_presentation(g243, path)
        assert load_presentation(path) == g243

    def test_no_cache_leaves_directory_alone(self, tmp_path):
        cached_build_group(GroupSpec(2, 2, (1, 1)), use_cache=False, cache_dir=tmp_path)
        assert list(tmp_path.iterdir()) == []

    def test_wrong_generator_line(self, d8):
        lines = dump_presentation(d8).splitlines()
        lines[1] = "1 x2 2"
        with pytest.raises(CacheFormatError, match=":2:"):
            load_presentation_text("\n".join(lines))

    def test_truncated(self, d8):
        with pytest.raises(CacheFormatError, match="truncated"):
            load_presentation_text(dump_presentation(d8).splitlines()[0])

    def test_bad_vector(self, d8):
        text = dump_presentation(d8).replace("1^2 =", "1^2 = 3-1")
        with pytest.raises(CacheFormatError, match="bad vector entry"):
            load_presentation_text(text)

    def test_header_mismatch(self, tmp_path, d8):
        spec = GroupSpec(2, 2, (1, 2))
        (tmp_path / cache_filename(spec)).write_text(dump_presentation(d8))
        with pytest.raises(CacheFormatError, match="header"):
            cached_build_group(spec, cache_dir=tmp_path)


    def test_generator_lines_carry_name_and_modulus(self, d16):
        lines = dump_presentation(d16).splitlines()
        assert lines[1:6] == ["1 x1 2", "2 x2 2", "3 [x2,x1] 4", "4 [x2,x1^2] 1", "5 [x2^2,x1] 1"]
        assert load_presentation_text("\n".join(lines)) == d16

    def test_wrong_modulus(self, d16):
        lines = dump_presentation(d16).splitlines()
        lines[3] = "3 [x2,x1] 2"
        with pytest.raises(CacheFormatError, match=":4:"):
            load_presentation_text("\n".join(lines))

    def test_save_overwrites_without_leftovers(self, tmp_path, d8, d16):
        path = tmp_path / "group.pc"
        save_presentation(d8, path)
        save_presentation(d16, path)
        assert load_presentation(path) == d16
        assert [p.name for p in tmp_path.iterdir()] == ["group.pc"]

    def test_failed_save_keeps_previous_file(self, tmp_path, monkeypatch, d8, d16):
        path = tmp_path / "group.pc"
        save_presentation(d8, path)

        def broken(src, dst):
            raise OSError("disk full")

        monkeypatch.setattr(nilprod.os, "replace", broken)
        with pytest.raises(OSError, match="disk full"):
            save_presentation(d16, path)
        assert load_presentation(path) == d8
        assert [p.name for p in tmp_path.iterdir()] == ["group.pc"]


def random_word(rng, r, length):
    letters = [f"x{rng.randint(1, r)}^{rng.choice([-2, -1, 1, 2, 3])}" for _ in range(length)]
    letters.append(f"[x{rng.randint(1, r)},x{rng.randint(1, r)}]")
    rng.shuffle(letters)
    return " ".join(letters)


class TestQuotientCompatibility:
    @pytest.mark.parametrize("alphas", [(1, 1), (1, 2)])
    @pytest.mark.parametrize("k", [2, 3])
    def test_dropping_the_top_layer(self, alphas, k):
        big = build_group(GroupSpec(3, k, alphas))
        small = build_group(GroupSpec(3, k - 1, alphas))
        top = [i for i, e in enumerate(big.distinguished) if e.commutator.weight == k]
        rng = random.Random(k)
        for _ in range(100):
            text = random_word(rng, 2, 6)
            a, b = nf(text, big), nf(text, small)
            kept = tuple(x for i, x in enumerate(a.exponents) if i not in top)
            assert kept == b.exponents, text
