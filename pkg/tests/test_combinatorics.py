import itertools
import random
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weylwalk.amplitude import Amplitude, Chirality
from weylwalk.combinatorics import (
    BitString,
    BudgetExceeded,
    _rotl,
    _w_fast,
    apply_permutation,
    c_coefficient,
    c_coefficient_bruteforce,
    canonicalize,
    compositions,
    dfunc,
    f_sum,
    iota,
    is_canonical,
    shift,
    triple_tally,
    u_count,
    w_factor,
    weight_class,
)


def _enum_c(t, K1, K2, K3, a, b, c):
    """Literal triple sum over string triples, one term at a time."""
    total = Amplitude(0)
    for w1, w2, w3 in itertools.product(weight_class(t, K1), weight_class(t, K2), weight_class(t, K3)):
        if w1.first != a or w2.last != b:
            continue
        sign = -1 if iota((w1 ^ shift(w1)) & w2) & 1 else 1
        total = total + c.phase(iota(w1 ^ w2 ^ w3)) * sign
    return total


# -- bit strings -----------------------------------------------------------------


def test_iota_examples():
    assert iota(BitString.parse("0000")) == 0
    assert iota(BitString.parse("1111")) == 4
    assert iota(BitString.parse("0110")) == 2


def test_bit_indexing_is_one_based():
    w = BitString.parse("1000")
    assert w[1] == 1 and w[4] == 0
    assert w.first == 1 and w.last == 0
    assert str(w) == "1000"
    assert list(BitString.parse("0110")) == [0, 1, 1, 0]


def test_shift_examples():
    assert shift(BitString.parse("100")) == BitString.parse("001")
    assert shift(BitString.parse("111")) == BitString.parse("111")
    w = BitString.parse("1101000")
    s = w
    for _ in range(len(w)):
        s = shift(s)
    assert s == w


def test_canonical_examples():
    assert is_canonical(BitString.parse("1100"))
    assert not is_canonical(BitString.parse("1010"))
    canon, perm = canonicalize(BitString.parse("0101"))
    assert canon == BitString.parse("1100")
    assert perm[1] == 1 and perm[3] == 2
    assert apply_permutation(perm, BitString.parse("0101")) == canon


@given(st.integers(min_value=1, max_value=40).flatmap(lambda t: st.tuples(st.just(t), st.integers(0, 2**t - 1))))
def test_canonicalize_preserves_weight(args):
    t, v = args
    w = BitString(t, v)
    canon, perm = canonicalize(w)
    assert is_canonical(canon) and iota(canon) == iota(w)
    assert sorted(perm) == list(range(1, t + 1))


# -- counting functions ---------------------------------------------------------------


def test_dfunc_examples():
    assert dfunc(2, 1, 1, 0) == 1
    assert dfunc(4, 2, 2, 1) == 4
    assert dfunc(5, 3, 1, 2) == 0
    assert dfunc(3, -1, 2, 0) == 0
    assert dfunc(400, 200, 200, 100) == comb(200, 100) ** 2


def test_compositions_examples():
    assert compositions(5, 2) == 4
    assert compositions(0, 0) == 1
    assert compositions(3, 5) == 0
    assert compositions(4, 0) == 0
    for K in range(1, 9):
        for n in range(1, K + 1):
            direct = sum(1 for parts in itertools.product(range(1, K + 1), repeat=n) if sum(parts) == K)
            assert compositions(K, n) == direct


def test_f_sum_examples():
    for c in Chirality:
        for t in range(6):
            for K in range(t + 1):
                assert f_sum(t, K, 0, c) == c.phase(K)
            for H in range(t + 1):
                assert f_sum(t, 0, H, c) == c.phase(H) * comb(t, H)
    assert f_sum(2, 1, 1, Chirality.PLUS) == 0


@pytest.mark.parametrize("t", range(9))
def test_f_sum_against_every_v(t):
    for c in Chirality:
        for K, H in itertools.product(range(t + 1), repeat=2):
            for v in weight_class(t, K):
                direct = Amplitude(0)
                for w in weight_class(t, H):
                    direct = direct + c.phase(iota(v ^ w))
                assert direct == f_sum(t, K, H, c)


def test_u_count_examples():
    assert u_count(3, 1, 0, 0, 1) == 1
    assert u_count(3, 1, 1, 0, 1) == 1
    for t in range(1, 7):
        for a, a_last, n in itertools.product((0, 1), (0, 1), range(t + 1)):
            expected = 1 if (a, a_last, n) == (1, 1, 0) else 0
            assert u_count(t, t, a, a_last, n) == expected


@pytest.mark.parametrize("t", range(1, 11))
def test_u_count_against_enumeration(t):
    seen = {}
    for v in range(1 << t):
        key = (v.bit_count(), v & 1, v >> (t - 1) & 1, (v ^ _rotl(v, t)).bit_count() // 2)
        seen[key] = seen.get(key, 0) + 1
    for K, a, a_last, n in itertools.product(range(t + 1), (0, 1), (0, 1), range(t + 1)):
        assert u_count(t, K, a, a_last, n) == seen.get((K, a, a_last, n), 0)


def test_w_factor_trivial_cases():
    from weylwalk.combinatorics import _kappa_eta_gamma

    below = at_gamma = 0
    for t in range(2, 9):
        for K1, K2, J in itertools.product(range(t + 1), range(t + 1), range(t + 1)):
            for s, a, a_last, b in itertools.product((0, 1), repeat=4):
                kappa, _, gamma = _kappa_eta_gamma(t, K1, K2, s, a, a_last, b, J)
                for n in range(gamma):
                    assert w_factor(t, K1, K2, s, a, a_last, b, n, J) == 0
                    below += 1
                if kappa < 0:
                    assert w_factor(t, K1, K2, s, a, a_last, b, gamma, J) == 0
                    at_gamma += 1
    assert below and at_gamma


@pytest.mark.parametrize("t", range(2, 8))
def test_w_factor_against_class_enumeration(t):
    """For each first string v the signed count of second strings in one
    interference class factorises into the two block factors."""
    for v in range(1 << t):
        K1 = v.bit_count()
        a, a_last = v & 1, v >> (t - 1) & 1
        sv = v ^ _rotl(v, t)
        n = sv.bit_count() // 2
        for K2, b in itertools.product(range(t + 1), (0, 1)):
            acc = {}
            for w in range(1 << t):
                if w.bit_count() != K2 or (w >> (t - 1)) & 1 != b:
                    continue
                J = ((v ^ w).bit_count() - abs(K1 - K2)) // 2
                acc[J] = acc.get(J, 0) + (-1) ** ((sv & w).bit_count())
            for J in range(K2 + 1):
                w0 = w_factor(t, K1, K2, 0, a, a_last, b, n, J)
                w1 = w_factor(t, K1, K2, 1, a, a_last, b, n, J)
                assert acc.get(J, 0) == w0 * w1
                assert _w_fast(t, K1, K2, 0, a, a_last, b, n, J) == w0


def test_w_factor_fixed_instance():
    t, K1, K2, a, a_last, b, n, J = 4, 2, 1, 0, 0, 0, 1, 1
    # strings of weight 2 starting and ending in 0 with two boundaries: only 0110
    v = 0b0110
    sv = v ^ _rotl(v, t)
    direct = sum(
        (-1) ** ((sv & w).bit_count())
        for w in range(1 << t)
        if w.bit_count() == K2 and not (w >> 3) & 1 and (v ^ w).bit_count() == abs(K1 - K2) + 2 * J
    )
    assert direct == w_factor(t, K1, K2, 0, a, a_last, b, n, J) * w_factor(t, K1, K2, 1, a, a_last, b, n, J)


# -- coefficients -------------------------------------------------------------------


def test_coefficient_examples():
    for t in range(2, 7):
        for K1, K3, a in itertools.product(range(t + 1), range(t + 1), (0, 1)):
            assert c_coefficient(t, K1, 0, K3, a, 1) == 0
    t = 5
    for K2, K3 in itertools.product(range(t + 1), repeat=2):
        for b in (0, 1):
            assert c_coefficient(t, t, K2, K3, 0, b) == 0
    assert c_coefficient_bruteforce(1, 1, 1, 1, 1, 1, Chirality.PLUS) == Amplitude(0, 1)
    assert c_coefficient_bruteforce(1, 1, 1, 1, 1, 1, Chirality.MINUS) == Amplitude(0, -1)
    assert c_coefficient_bruteforce(1, 1, 0, 0, 0, 0) == 0
    assert c_coefficient_bruteforce(1, 0, 0, 0, 1, 0) == 0


def test_coefficients_t2_against_literal_sum():
    for a, b in itertools.product((0, 1), repeat=2):
        for c in Chirality:
            expected = _enum_c(2, 1, 1, 1, a, b, c)
            assert c_coefficient(2, 1, 1, 1, a, b, c) == expected
            assert c_coefficient_bruteforce(2, 1, 1, 1, a, b, c) == expected


@pytest.mark.parametrize("t", [3, 4])
def test_bruteforce_against_literal_sum(t):
    # the vectorised tally is itself checked against one-term-at-a-time enumeration
    for K1, K2, K3, a, b in itertools.product(range(t + 1), range(t + 1), range(t + 1), (0, 1), (0, 1)):
        assert c_coefficient_bruteforce(t, K1, K2, K3, a, b) == _enum_c(t, K1, K2, K3, a, b, Chirality.PLUS)


@settings(max_examples=60, deadline=None)
@given(
    st.integers(min_value=2, max_value=9).flatmap(
        lambda t: st.tuples(
            st.just(t), st.integers(0, t), st.integers(0, t), st.integers(0, t), st.integers(0, 1), st.integers(0, 1)
        )
    ),
    st.sampled_from(list(Chirality)),
)
def test_closed_form_matches_bruteforce_random(q, c):
    assert c_coefficient(*q, c) == c_coefficient_bruteforce(*q, c, budget=10**7)


def test_closed_form_rejects_bad_queries():
    with pytest.raises(ValueError):
        c_coefficient(1, 1, 1, 1, 0, 0)
    with pytest.raises(ValueError):
        c_coefficient(4, 5, 1, 1, 0, 0)
    with pytest.raises(ValueError):
        c_coefficient(4, 1, 1, 1, 2, 0)


def test_large_t_values_are_big_integers():
    z = c_coefficient(120, 60, 61, 59, 0, 1)
    assert isinstance(z.re, int) and (abs(z.re) + abs(z.im)).bit_length() > 64


def test_triple_tally_budget():
    with pytest.raises(BudgetExceeded):
        triple_tally(12, 6, 6, 6, budget=1000)
    tally = triple_tally(4, 2, 2, 2)
    assert tally.sum() == comb(4, 2) ** 3
    tally[0, 0, 0, 0] += 1  # callers get a private copy
    assert triple_tally(4, 2, 2, 2).sum() == comb(4, 2) ** 3


def test_bruteforce_sum_rule():
    # every admissible triple is counted exactly once across (a, b, sign, phase)
    rng = random.Random(1)
    for _ in range(20):
        t = rng.randint(1, 8)
        K = [rng.randint(0, t) for _ in range(3)]
        assert triple_tally(t, *K).sum() == comb(t, K[0]) * comb(t, K[1]) * comb(t, K[2])
