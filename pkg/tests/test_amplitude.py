import pickle

import pytest
from hypothesis import given
from hypothesis import strategies as st

from weylwalk.amplitude import I, ONE, ZERO, Amplitude, Chirality, SpinMatrix

ints = st.integers(min_value=-(10**30), max_value=10**30)
dens = st.integers(min_value=0, max_value=80)
amps = st.builds(Amplitude, ints, ints, dens)


def _canonical(z: Amplitude) -> bool:
    return z.d == 0 or (z.re & 1) == 1 or (z.im & 1) == 1


def test_reduction_to_canonical_form():
    z = Amplitude(4, 8, 3)
    assert (z.re, z.im, z.d) == (1, 2, 1)
    assert Amplitude(0, 0, 7).d == 0
    assert Amplitude(3, 0, -2) == Amplitude(12)


def test_zeta_modulus_is_one_eighth():
    for c in Chirality:
        assert c.zeta.abs2() == Amplitude(1, 0, 3)
        assert c.zeta * c.zeta.conjugate() == Amplitude(1, 0, 3)


def test_zeta_ratio_matches_chirality_phase():
    # zeta = (c i) zeta*
    for c in Chirality:
        assert c.zeta == c.zeta.conjugate() * c.phase(1)


@given(amps, amps)
def test_ring_operations_stay_canonical(x, y):
    for z in (x + y, x - y, x * y, x.conjugate(), -x, x.times_i(3)):
        assert _canonical(z)


@given(amps, amps, amps)
def test_ring_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert x * (y + z) == x * y + x * z
    assert x * y == y * x
    assert x - x == ZERO


@given(amps)
def test_conjugation_involution_and_json_round_trip(x):
    assert x.conjugate().conjugate() == x
    assert Amplitude.from_json(x.to_json()) == x
    assert pickle.loads(pickle.dumps(x)) == x


@given(amps, st.integers(min_value=-3, max_value=7))
def test_times_i_matches_product(x, k):
    assert x.times_i(k) == x * Amplitude.i_power(k)


def test_immutability():
    with pytest.raises(AttributeError):
        ONE.re = 2
    with pytest.raises(AttributeError):
        SpinMatrix.identity().a = ZERO


def test_from_json_rejects_bad_denominator():
    with pytest.raises(ValueError):
        Amplitude.from_json({"re": "1", "im": "0", "log2_den": -1})
    with pytest.raises(ValueError):
        Amplitude.from_json({"re": "x", "im": "0", "log2_den": 0})


def test_float_view_of_huge_values():
    z = Amplitude(3 * 2**2000, 0, 2001)
    assert z.real_float() == 1.5
    assert complex(I) == 1j


def test_spin_matrix_algebra():
    m = SpinMatrix(((1, I), (0, Amplitude(1, 1, 1))))
    assert m @ SpinMatrix.identity() == m
    assert m.dagger().dagger() == m
    assert (m @ m).dagger() == m.dagger() @ m.dagger()
    assert SpinMatrix.from_json(m.to_json()) == m
    assert pickle.loads(pickle.dumps(m)) == m
    assert m.apply(ONE, ZERO) == (ONE, ZERO)


def test_chirality_parse():
    assert Chirality.parse("+") is Chirality.PLUS
    assert Chirality.parse("-") is Chirality.MINUS
    with pytest.raises(ValueError):
        Chirality.parse("0")
    assert Chirality.MINUS.phase(1) == Amplitude(0, -1)
    assert Chirality.MINUS.zeta == Chirality.PLUS.zeta.conjugate()
