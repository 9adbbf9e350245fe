"""Multitwist matrices: representation, classification, projective coding."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from multitwist.mobius import (
    ALL_DIRECTIONS,
    MobiusClass,
    ProjectiveDirection,
    TwistWord,
    brenner_check,
    classify,
    eigendirections,
    generator,
    reduce_letters,
    renormalizable,
    rho,
)


def random_reduced_word(rng, alphabet, max_len):
    letters = []
    while len(letters) < max_len:
        choices = [x for x in alphabet if not letters or x != -letters[-1]]
        letters.append(rng.choice(choices))
        if rng.random() < 1 / max_len:
            break
    return TwistWord.make(tuple(letters))


class TestWords:
    def test_parse_and_str(self):
        w = TwistWord.make("aBa")
        assert w.letters == (1, -2, 1)
        assert str(w) == "aBa"
        assert w.positive_semigroup

    def test_not_reduced_rejected(self):
        with pytest.raises(ValueError, match="reduced"):
            TwistWord.make("aA")

    def test_reduce_letters(self):
        assert reduce_letters((1, -1, 2)) == (2,)
        assert reduce_letters((1, 2, -2, -1)) == ()


class TestRho:
    def test_empty_word_is_identity(self):
        assert rho(TwistWord.make(""), 2).is_identity()

    def test_product_ab(self):
        m = rho(TwistWord.make("ab"), 2)
        # class representative of [[-3, 2], [-2, 1]]
        assert m.entries() == (Fraction(3), Fraction(-2), Fraction(2), Fraction(-1))
        assert abs(m.trace()) == 2

    def test_product_aB_lambda3(self):
        m = rho(TwistWord.make("aB"), 3)
        assert m.entries() == (Fraction(10), Fraction(3), Fraction(3), Fraction(1))
        assert m.trace() == 11

    def test_trace_formulas(self):
        for lam in (2, 3, Fraction(5, 2)):
            assert abs(rho(TwistWord.make("ab"), lam).trace()) == abs(2 - lam * lam)
            assert abs(rho(TwistWord.make("aB"), lam).trace()) == 2 + lam * lam

    @given(st.integers(1, 400))
    @settings(max_examples=40, deadline=None)
    def test_homomorphism_up_to_sign(self, seed):
        rng = random.Random(seed)
        w1 = random_reduced_word(rng, (1, -1, 2, -2), 6)
        w2 = random_reduced_word(rng, (1, -1, 2, -2), 6)
        prod = TwistWord.make(reduce_letters(w1.letters + w2.letters))
        lhs = rho(prod, 3)
        rhs = rho(w1, 3) * rho(w2, 3)
        assert lhs == rhs  # sign-normalized classes agree

    @given(st.integers(1, 400))
    @settings(max_examples=40, deadline=None)
    def test_determinant_one(self, seed):
        rng = random.Random(seed)
        w = random_reduced_word(rng, (1, -1, 2, -2), 8)
        a, b, c, d = rho(w, Fraction(5, 2)).entries()
        assert a * d - b * c == 1


class TestClassify:
    def test_generators_parabolic(self):
        for lam in (2, 3):
            assert classify(rho(TwistWord.make("a"), lam)) == "parabolic"
            assert classify(rho(TwistWord.make("b"), lam)) == "parabolic"

    def test_ab_transition(self):
        assert classify(rho(TwistWord.make("ab"), 2)) == "parabolic"
        assert classify(rho(TwistWord.make("ab"), 3)) == "hyperbolic"

    def test_identity(self):
        assert classify(MobiusClass.identity()) == "identity"

    def test_elliptic(self):
        m = MobiusClass.make(Fraction(0), Fraction(-1), Fraction(1), Fraction(0))
        assert classify(m) == "elliptic"

    @given(st.integers(1, 300))
    @settings(max_examples=30, deadline=None)
    def test_conjugation_invariance(self, seed):
        rng = random.Random(seed)
        w = random_reduced_word(rng, (1, -1, 2, -2), 6)
        gword = random_reduced_word(rng, (1, -1, 2, -2), 5)
        m = rho(w, 3)
        g = rho(gword, 3)
        assert classify(g * m * g.inverse()) == classify(m)

    def test_positive_semigroup_hyperbolic(self):
        rng = random.Random(7)
        for _ in range(200):
            w = random_reduced_word(rng, (1, -2), 12)
            if len(set(w.letters)) < 2:
                continue
            for lam in (2, 3):
                m = rho(w, lam)
                assert classify(m) == "hyperbolic"
                assert abs(m.trace()) > 2


class TestBrenner:
    def test_identity_vacuous(self):
        rep = brenner_check(MobiusClass.identity(), 3)
        assert rep.in_form and rep.ks == (0, 0, 0, 0) and rep.vacuous

    def test_aB_lambda3(self):
        rep = brenner_check(rho(TwistWord.make("aB"), 3), 3)
        assert rep.ks == (1, 1, 1, 0)
        assert rep.interval_ok
        t = (3 + 5 ** 0.5) / 2
        assert not (1 / t < float(rep.ratio) < t)

    def test_random_words_match_form(self):
        rng = random.Random(20)
        for _ in range(200):
            w = random_reduced_word(rng, (1, -1, 2, -2), 8)
            rep = brenner_check(rho(w, 3), 3)
            assert rep.in_form, str(w)
            assert rep.interval_ok, str(w)

    def test_rejects_non_group_matrix(self):
        m = MobiusClass.make(Fraction(2), Fraction(1), Fraction(1), Fraction(1))
        assert not brenner_check(m, 3).in_form


class TestEigendirections:
    def test_unipotent_fixes_horizontal(self):
        (d,) = eigendirections(generator(1, 2))
        assert d.close_to(ProjectiveDirection.make(1, 0))

    def test_ab_lambda2(self):
        (d,) = eigendirections(rho(TwistWord.make("ab"), 2))
        assert d.close_to(ProjectiveDirection.make(1, 1))

    def test_aB_lambda3_slopes(self):
        exp, con = eigendirections(rho(TwistWord.make("aB"), 3))
        # slope (sqrt(117) - 9)/6 and conjugate; expanding one in the open
        # positive quadrant
        want = (117 ** 0.5 - 9) / 6
        assert float(exp.y) / float(exp.x) == pytest.approx(want)
        assert float(exp.x) > 0 and float(exp.y) > 0
        assert float(con.y) / float(con.x) == pytest.approx((-(117 ** 0.5) - 9) / 6)

    def test_identity_sentinel(self):
        assert eigendirections(MobiusClass.identity()) is ALL_DIRECTIONS

    def test_elliptic_has_none(self):
        m = MobiusClass.make(Fraction(0), Fraction(-1), Fraction(1), Fraction(0))
        assert eigendirections(m) == []

    @given(st.integers(1, 200))
    @settings(max_examples=25, deadline=None)
    def test_positive_words_expand_in_positive_quadrant(self, seed):
        rng = random.Random(seed)
        w = random_reduced_word(rng, (1, -2), 9)
        if len(set(w.letters)) < 2:
            return
        exp = eigendirections(rho(w, 3))[0]
        assert float(exp.x) >= 0 and float(exp.y) >= 0


class TestRenormalizable:
    def test_horizontal_is_excluded(self):
        v = renormalizable(ProjectiveDirection.make(1, 0), 3, 30)
        assert v.verdict == "no"

    def test_diagonal_excluded_at_two(self):
        v = renormalizable(ProjectiveDirection.make(1, 1), 2, 30)
        assert v.verdict == "no"

    def test_expanding_fixed_point_survives(self):
        exp = eigendirections(rho(TwistWord.make("aB"), 3))[0]
        v = renormalizable(exp, 3, 30)
        assert v.verdict == "yes"

    def test_generic_rational_exits(self):
        v = renormalizable(ProjectiveDirection.make(Fraction(11, 10), 1), 3, 50)
        assert v.verdict == "no"

    def test_rejects_lambda_below_two(self):
        with pytest.raises(ValueError):
            renormalizable(ProjectiveDirection.make(1, 1), Fraction(3, 2), 5)

    def test_monotone_no_stays_no(self):
        d = ProjectiveDirection.make(1, 0)
        for depth in (1, 5, 20):
            assert renormalizable(d, 3, depth).verdict == "no"

    def test_hyperbolic_fixed_points_at_lambda2_are_renormalizable(self):
        exp = eigendirections(rho(TwistWord.make("aB"), 2))[0]
        v = renormalizable(exp, 2, 40)
        assert v.verdict == "yes"
