import itertools
import math
from fractions import Fraction

import pytest

from profilium.errors import ResourceCapError, ValidationError
from profilium.words import (
    ModelParams,
    Word,
    all_words,
    correlation_decay_sums,
    correlation_poly,
    maximal_overlap,
    pair_stats,
    pro,
)

P7 = ModelParams(p=0.7)


def W(text):
    return Word.from_text(text)


class TestModelParams:
    def test_q_complement(self):
        assert P7.q == pytest.approx(0.3)
        assert P7.q_exact == Fraction(3, 10)

    def test_rejects_symmetric_and_inverted(self):
        with pytest.raises(ValidationError):
            ModelParams(p=0.5)
        with pytest.raises(ValidationError):
            ModelParams(p=0.3)
        with pytest.raises(ValidationError):
            ModelParams(p=1.0)

    def test_k_from_alpha(self):
        mp = ModelParams(p=0.7, n=65536, alpha=1.4)
        assert mp.k == round(1.4 * math.log(65536)) == 16

    def test_alpha_from_k(self):
        mp = ModelParams(p=0.7, n=65536, k=16)
        assert mp.alpha == pytest.approx(16 / math.log(65536))

    def test_k_at_least_one(self):
        mp = ModelParams(p=0.7, n=2, alpha=0.1)
        assert mp.k == 1


class TestWord:
    def test_roundtrip(self):
        for text in ("a", "b", "ab", "ba", "aabab", "b" * 12):
            assert Word.from_text(text).to_text() == text

    def test_packing_msb_first(self):
        assert W("ab").code == 0b10
        assert W("ba").code == 0b01
        assert W("aab").code == 0b110

    def test_prefix_suffix_tail(self):
        u = W("aabab")
        assert u.prefix(2).to_text() == "aa"
        assert u.suffix(3).to_text() == "bab"
        assert u.tail(2).to_text() == "bab"
        assert u.prefix(2).concat(u.tail(2)).code == u.code

    def test_counts(self):
        u = W("aabab")
        assert u.a_count == 3 and u.b_count == 2


class TestPro:
    def test_hand_value(self):
        assert pro(W("aab"), P7) == pytest.approx(0.147)

    def test_single_letter_power(self):
        for m in range(1, 8):
            assert pro(W("a" * m), P7) == pytest.approx(0.7 ** m)

    def test_normalization_k3(self):
        assert sum(pro(u, P7) for u in all_words(3)) == pytest.approx(1.0)

    def test_exact_mode(self):
        assert pro(W("aab"), P7, exact=True) == Fraction(147, 1000)

    def test_empty_word_rejected(self):
        with pytest.raises(ValidationError):
            pro(Word(0, 0), P7)


class TestCorrelationPoly:
    def test_aa_self(self):
        c = correlation_poly(W("aa"), W("aa"), P7)
        assert c.coefficients == pytest.approx({0: 1.0, 1: 0.7})

    def test_ab_self_trivial(self):
        c = correlation_poly(W("ab"), W("ab"), P7)
        assert c.coefficients == pytest.approx({0: 1.0})

    def test_ab_ba_cross(self):
        c = correlation_poly(W("ab"), W("ba"), P7)
        assert c.coefficients == pytest.approx({1: 0.7})

    def test_constant_term_rule(self):
        # constant term 1 iff u == v (equal lengths)
        for k in (2, 3):
            for u in all_words(k):
                for v in all_words(k):
                    c = correlation_poly(u, v, P7).coefficients
                    if u.code == v.code:
                        assert c.get(0) == pytest.approx(1.0)
                    else:
                        assert 0 not in c

    def test_autocorrelation_at_one_bounds(self):
        # 1 <= C_{u,u}(1) < 1/(1-p)
        for k in range(1, 7):
            for u in all_words(k):
                val = correlation_poly(u, u, P7).at_one()
                assert 1.0 <= val < 1.0 / (1.0 - 0.7) + 1e-12

    def test_overlap_exponents_match_brute_scan(self):
        # degree set corresponds to overlap lengths, both directions, k <= 5
        for k in (2, 3, 4, 5):
            for u in all_words(k):
                for v in all_words(k):
                    su, sv = u.to_text(), v.to_text()
                    expected = {
                        k - l
                        for l in range(1, k + 1)
                        if su[k - l :] == sv[:l] and (l < k or su == sv)
                    }
                    got = set(correlation_poly(u, v, P7).coefficients)
                    assert got == expected

    def test_exact_mode_weights(self):
        c = correlation_poly(W("aa"), W("aa"), P7, exact=True)
        assert c.coefficients == {0: Fraction(1), 1: Fraction(7, 10)}


class TestMaximalOverlap:
    def test_ab_ba(self):
        d = maximal_overlap(W("ab"), W("ba"))
        assert (d.sigma.to_text(), d.w.to_text(), d.theta.to_text()) == ("a", "b", "a")
        assert d.ell == 1 and d.r == 0.5

    def test_aa_ab(self):
        d = maximal_overlap(W("aa"), W("ab"))
        assert (d.sigma.to_text(), d.w.to_text(), d.theta.to_text()) == ("a", "a", "b")

    def test_ab_aa_none(self):
        assert maximal_overlap(W("ab"), W("aa")) is None

    def test_equal_words_rejected(self):
        with pytest.raises(ValidationError):
            maximal_overlap(W("ab"), W("ab"))

    def test_reconstruction(self):
        for k in (2, 3, 4):
            for u in all_words(k):
                for v in all_words(k):
                    if u.code == v.code:
                        continue
                    d = maximal_overlap(u, v)
                    if d is None:
                        continue
                    assert d.sigma.concat(d.w).code == u.code
                    assert d.w.concat(d.theta).code == v.code
                    assert 1 <= d.ell <= k - 1

    def test_factorization_through_shared_block(self):
        # pro(u) C_{u,v}(1) == pro(sigma) pro(w) pro(theta) C_{w,w}(1);
        # equality without the C_{w,w} factor iff w has no self-overlap.
        for k in (3, 4, 5):
            for u in all_words(k):
                for v in all_words(k):
                    if u.code == v.code:
                        continue
                    d = maximal_overlap(u, v)
                    if d is None:
                        continue
                    lhs = pro(u, P7) * correlation_poly(u, v, P7).at_one()
                    base = pro(d.sigma, P7) * pro(d.w, P7) * pro(d.theta, P7)
                    cww = correlation_poly(d.w, d.w, P7).at_one()
                    assert lhs == pytest.approx(base * cww, rel=1e-12)
                    assert lhs >= base - 1e-15
                    if cww == pytest.approx(1.0):
                        assert lhs == pytest.approx(base, rel=1e-12)


class TestPairStats:
    def test_theta_hand(self):
        s = pair_stats(W("ab"), W("ba"), P7)
        assert s.Theta_uv == pytest.approx(0.21)

    def test_p_sum(self):
        s = pair_stats(W("ab"), W("ba"), P7)
        assert s.P_uv == pytest.approx(0.42)

    def test_k_term(self):
        s = pair_stats(W("ab"), W("ba"), P7)
        assert s.K_uv == pytest.approx((2 * 2 - 1) * 0.21 * 0.21)

    def test_overlap_fields(self):
        s = pair_stats(W("ab"), W("ba"), P7)
        assert s.Q_st == pytest.approx(0.7 + 0.7)
        assert s.T_st == pytest.approx(0.49)
        assert s.T_st <= (s.Q_st / 2) ** 2 + 1e-15

    def test_non_overlapping_pair(self):
        s = pair_stats(W("ab"), W("aa"), P7)
        assert s.Q_st is None and s.T_st is None


class TestDecaySums:
    @staticmethod
    def _brute(k, params):
        words = all_words(k)
        c1 = lambda u, v: correlation_poly(u, v, params).at_one()
        s1 = sum(pro(u, params) * (c1(u, u) - 1.0) for u in words)
        s2 = sum(
            pro(u, params) * c1(u, v) * c1(v, u)
            for u in words
            for v in words
            if u.code != v.code
        )
        return s1, s2

    def test_k1_zero(self):
        assert correlation_decay_sums(1, P7) == (0.0, 0.0)

    def test_k2_hand(self):
        s1, s2 = correlation_decay_sums(2, P7)
        assert s1 == pytest.approx(0.37)

    @pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
    @pytest.mark.parametrize("pval", [0.6, 0.7, 0.8])
    def test_matches_brute_force(self, k, pval):
        params = ModelParams(p=pval)
        b = self._brute(k, params)
        f = correlation_decay_sums(k, params)
        assert f[0] == pytest.approx(b[0], rel=1e-11)
        assert f[1] == pytest.approx(b[1], rel=1e-11)

    def test_normalized_sums_bounded(self):
        # both sums stay <= Const * p^{k/2} with a single fitted constant
        vals = {k: correlation_decay_sums(k, P7) for k in range(4, 17)}
        norm1 = [v[0] / 0.7 ** (k / 2) for k, v in vals.items()]
        norm2 = [v[1] / 0.7 ** (k / 2) for k, v in vals.items()]
        assert max(norm1) < 1.0
        assert max(norm2) < 2.0

    def test_cap(self):
        with pytest.raises(ResourceCapError):
            correlation_decay_sums(19, P7)
