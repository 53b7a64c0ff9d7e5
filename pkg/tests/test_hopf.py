import itertools
from fractions import Fraction

import numpy as np
import pytest

from helpers import (all_forests, cherry, forests_up_to,
                     random_rational_character, trig_channels)
from roughlift.hopf import (EMPTY, Character, HopfError, HopfVector,
                            ShuffleVector, TensorVector, antipode,
                            antipode_expanded, compose_with_antipode,
                            convolve, coproduct, counit, f_rational,
                            linear_extensions, project_pi, sh_antipode,
                            sh_coproduct, shuffle_product, trunk_to_word,
                            word_to_trunk)
from roughlift.quadrature import tree_integral_quad
from roughlift.trees import DecoratedForest, forest_product, single, trunk


def hv(forest, c=1):
    return HopfVector.of(forest, c)


def tensor(*pairs):
    return TensorVector({(a, b): c for a, b, c in pairs})


class TestCoproduct:
    def test_single_vertex(self):
        dot = single(7)
        assert coproduct(dot) == tensor((EMPTY, dot, 1), (dot, EMPTY, 1))

    def test_trunk2(self):
        t = trunk(2, [1, 2])
        expected = tensor((EMPTY, t, 1), (t, EMPTY, 1), (single(1), single(2), 1))
        assert coproduct(t) == expected

    def test_cherry(self):
        t = cherry()
        expected = tensor(
            (EMPTY, t, 1), (t, EMPTY, 1),
            (trunk(2, [1, 2]), single(3), 1),
            (trunk(2, [1, 3]), single(2), 1),
            (single(1), forest_product(single(2), single(3)), 1),
        )
        assert coproduct(t) == expected

    def test_unit(self):
        assert coproduct(HopfVector.unit()) == tensor((EMPTY, EMPTY, 1))


def triple_left(forest):
    out = {}
    for (a, b), c in coproduct(forest).terms.items():
        inner = coproduct(a) if a.n else TensorVector({(EMPTY, EMPTY): 1})
        for (a1, a2), c2 in inner.terms.items():
            key = (a1, a2, b)
            out[key] = out.get(key, 0) + c * c2
    return {k: v for k, v in out.items() if v}


def triple_right(forest):
    out = {}
    for (a, b), c in coproduct(forest).terms.items():
        inner = coproduct(b) if b.n else TensorVector({(EMPTY, EMPTY): 1})
        for (b1, b2), c2 in inner.terms.items():
            key = (a, b1, b2)
            out[key] = out.get(key, 0) + c * c2
    return {k: v for k, v in out.items() if v}


class TestCoassociativity:
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_exhaustive(self, n):
        for forest in all_forests(n):
            assert triple_left(forest) == triple_right(forest)

    def test_repeated_labels(self):
        for forest in all_forests(3, distinct_labels=False):
            assert triple_left(forest) == triple_right(forest)


class TestAntipode:
    def test_single_vertex(self):
        dot = single(4)
        assert antipode(dot) == -1 * hv(dot)

    def test_trunk2(self):
        t = trunk(2, [1, 2])
        expected = -1 * hv(t) + hv(forest_product(single(1), single(2)))
        assert antipode(t) == expected

    def test_trunk3_expanded_by_hand(self):
        t = trunk(3, [1, 2, 3])
        expected = (-1 * hv(t)
                    + hv(forest_product(single(1), trunk(2, [2, 3])))
                    + hv(forest_product(trunk(2, [1, 2]), single(3)))
                    - hv(forest_product(single(1), single(2), single(3))))
        assert antipode(t) == expected
        assert antipode_expanded(t) == expected

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_recursive_equals_expanded(self, n):
        for forest in all_forests(n):
            assert antipode(forest) == antipode_expanded(forest)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_counit_identity(self, n):
        # m (S (x) id) coproduct = counit * unit
        for forest in all_forests(n):
            total = HopfVector.zero()
            for (a, b), c in coproduct(forest).terms.items():
                total = total + c * (antipode(a) * hv(b))
            assert total == HopfVector.zero()

    def test_counit_identity_on_unit(self):
        total = HopfVector.zero()
        for (a, b), c in coproduct(HopfVector.unit()).terms.items():
            total = total + c * (antipode(a) * hv(b))
        assert total == HopfVector.unit()

    def test_antipode_multiplicative(self):
        f1, f2 = trunk(2, [1, 2]), cherry()
        assert antipode(hv(f1) * hv(f2)) == antipode(f1) * antipode(f2)


class TestConvolution:
    def test_single_vertex(self):
        chi1 = random_rational_character(1)
        chi2 = random_rational_character(2)
        dot = single(3)
        assert convolve(chi1, chi2, dot) == chi1(dot) + chi2(dot)

    @pytest.mark.parametrize("seed", [1, 2, 3])
    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_convolution_inverse(self, seed, n):
        chi = random_rational_character(seed)
        chi_s = compose_with_antipode(chi)
        for forest in all_forests(n):
            assert convolve(chi, chi_s, forest) == 0

    def test_tree_chen_quadrature(self):
        # iterated-integral characters of a smooth path satisfy
        # I^{ts} = I^{tu} * I^{us} up to quadrature error
        m = 2048
        _, channels = trig_channels(3, m)
        s, u, t = m // 4, m // 2, (3 * m) // 4
        trees = [trunk(3, [1, 2, 3]), cherry(), trunk(2, [2, 3])]
        for tree in trees:
            samples = {v: channels[tree.label(v) - 1] for v in tree.vertices}

            def char(upper, lower):
                return Character(lambda f: tree_integral_quad(f, samples, lower, upper))

            lhs = convolve(char(t, u), char(u, s), tree)
            rhs = tree_integral_quad(tree, samples, s, t)
            assert abs(lhs - rhs) < 1e-6 * (1.0 + abs(rhs))


class TestShuffle:
    def test_two_letters(self):
        assert shuffle_product((1,), (2,)) == ShuffleVector({(1, 2): 1, (2, 1): 1})

    def test_three_letters(self):
        got = shuffle_product((1, 2), (3,))
        assert got == ShuffleVector({(1, 2, 3): 1, (1, 3, 2): 1, (3, 1, 2): 1})

    def test_term_count(self):
        got = shuffle_product((1, 2), (3, 4))
        assert sum(got.terms.values()) == 6

    def test_repeated_letters_accumulate(self):
        assert shuffle_product((1,), (1,)) == ShuffleVector({(1, 1): 2})

    def test_sh_antipode(self):
        assert sh_antipode((5,)) == ShuffleVector({(5,): -1})
        assert sh_antipode((1, 2, 3)) == ShuffleVector({(3, 2, 1): -1})
        assert sh_antipode(()) == ShuffleVector({(): 1})

    def test_word_trunk_round_trip(self):
        w = (3, 1, 2)
        assert trunk_to_word(word_to_trunk(w)) == w


class TestProjection:
    def test_trunk_fixed(self):
        t = trunk(3, [3, 1, 2])
        assert project_pi(t) == ShuffleVector({(3, 1, 2): 1})

    def test_cherry(self):
        assert project_pi(cherry()) == ShuffleVector({(1, 2, 3): 1, (1, 3, 2): 1})

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_coproduct_compatibility(self, n):
        # deconcatenation of Pi(F) equals (Pi (x) Pi) of the forest coproduct
        for forest in all_forests(n):
            lhs = {}
            for w, c in project_pi(forest).terms.items():
                for (w1, w2), c2 in sh_coproduct(w).items():
                    lhs[(w1, w2)] = lhs.get((w1, w2), 0) + c * c2
            rhs = {}
            for (a, b), c in coproduct(forest).terms.items():
                pa = project_pi(a) if a.n else ShuffleVector({(): 1})
                pb = project_pi(b) if b.n else ShuffleVector({(): 1})
                for w1, c1 in pa.terms.items():
                    for w2, c2 in pb.terms.items():
                        rhs[(w1, w2)] = rhs.get((w1, w2), 0) + c * c1 * c2
            assert {k: v for k, v in lhs.items() if v} == {k: v for k, v in rhs.items() if v}

    def test_algebra_map(self):
        # products of total size <= 5 map to shuffle products
        pieces = [single(1), trunk(2, [2, 3]), cherry(), trunk(2, [1, 1])]
        for f1, f2 in itertools.combinations(pieces, 2):
            if f1.n + f2.n > 5:
                continue
            lhs = project_pi(hv(f1) * hv(f2))
            rhs = ShuffleVector()
            for w1, c1 in project_pi(f1).terms.items():
                for w2, c2 in project_pi(f2).terms.items():
                    rhs = rhs + (c1 * c2) * shuffle_product(w1, w2)
            assert lhs == rhs

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_antipode_compatibility_on_trunks(self, n):
        # Pi(S(T_w)) = sh_antipode(w): the two antipodes agree through Pi
        for word in itertools.product((1, 2), repeat=n):
            t = word_to_trunk(word)
            assert project_pi(antipode(t)) == sh_antipode(word)

    def test_linear_extensions_count(self):
        # forest of two chains of lengths 2 and 1: binomial(3,1) interleavings
        f = forest_product(trunk(2, [1, 2]), single(3))
        assert len(linear_extensions(f)) == 3


class TestRationalOracle:
    def test_single_vertex(self):
        assert f_rational(single(9), {1: 2}) == Fraction(1, 2)

    def test_trunk2(self):
        t = trunk(2, [1, 2])
        assert f_rational(t, {1: 1, 2: 2}) == Fraction(1, 6)

    def test_multiplicative_over_components(self):
        f = forest_product(trunk(2, [1, 2]), single(3))
        xi = {1: 1, 2: 2, 3: 5}
        assert f_rational(f, xi) == Fraction(1, 6) * Fraction(1, 5)

    def test_vanishing_denominator_reports_vertex(self):
        t = trunk(2, [1, 2])
        with pytest.raises(HopfError, match="vertex 1"):
            f_rational(t, {1: -2, 2: 2})

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_separates_ordered_forests(self, n):
        # distinct canonical forests with order-compatible bijective labels
        # get distinct value vectors over 50 random rational points
        import random
        rng = random.Random(7)
        forests = all_forests(n)
        draws = []
        for _ in range(50):
            draws.append({lab: Fraction(rng.randint(1, 60), rng.randint(1, 9))
                          for lab in range(1, n + 1)})
        vectors = []
        for f in forests:
            vec = tuple(f_rational(f, {v: xi[f.label(v)] for v in f.vertices})
                        for xi in draws)
            vectors.append(vec)
        assert len(set(vectors)) == len(forests)


class TestAlgebraBasics:
    def test_product_commutative_associative(self):
        a, b, c = hv(single(1)), hv(trunk(2, [2, 3])), hv(cherry())
        assert a * b == b * a
        assert (a * b) * c == a * (b * c)
        assert HopfVector.unit() * a == a

    def test_zero_coefficients_dropped(self):
        v = hv(single(1)) - hv(single(1))
        assert not v.terms and v == HopfVector.zero()

    def test_counit(self):
        assert counit(HopfVector.unit()) == 1
        assert counit(hv(single(1))) == 0
