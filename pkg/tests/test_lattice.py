import itertools

import pytest

from weylwalk.combinatorics import BitString, iota
from weylwalk.lattice import (
    ORIGIN,
    STEPS,
    LatticeError,
    Site,
    cone_displacements,
    decode_step,
    in_past_cone,
    past_causal_cone,
    path_endpoint,
    step_code,
    step_vector,
    string_counts,
)


def test_step_vectors():
    assert step_vector(1) == (1, 1, 1)
    assert step_vector(4) == (-1, -1, 1)
    assert step_vector(-2) == (-1, 1, 1)
    assert sum(map(lambda l: step_vector(l)[0], STEPS)) == 0
    with pytest.raises(ValueError):
        step_vector(0)


def test_step_codes():
    assert step_code(1) == (0, 1, 1)
    assert step_code(-4) == (1, 1, 1)
    assert decode_step((0, 0, 0)) == 4
    assert sorted(step_code(l) for l in STEPS) == sorted(itertools.product((0, 1), repeat=3))
    for l in STEPS:
        assert decode_step(step_code(l)) == l


def test_site_parity():
    assert Site(1, -1, 3).parity == 1
    with pytest.raises(LatticeError):
        Site(1, 0, 0)
    with pytest.raises(LatticeError):
        Site.parse("1,0,0")
    with pytest.raises(ValueError):
        Site.parse("1,1")
    assert Site.parse(" -2, 0 ,4") == Site(-2, 0, 4)


def test_path_endpoint_examples():
    end, n = path_endpoint(ORIGIN, ())
    assert end == ORIGIN and n.total == 0
    end, n = path_endpoint(ORIGIN, (1, 1))
    assert end == Site(2, 2, 2) and n[1] == 2 and n.total == 2
    end, n = path_endpoint(ORIGIN, (1, -1))
    assert end == ORIGIN and n[1] == 1 and n[-1] == 1
    end, n = path_endpoint(Site(1, 1, 1), (3, -2, 4, 4))
    assert tuple(end[i] - 1 for i in range(3)) == n.displacement()


def test_string_counts_examples():
    assert string_counts(ORIGIN, ORIGIN, 2)[1:] == (1, 1, 1)
    assert string_counts(ORIGIN, Site(3, 3, 3), 3)[1:] == (3, 0, 0)
    assert string_counts(ORIGIN, Site(1, 1, 1), 0) is None
    assert string_counts(ORIGIN, Site(4, 0, 0), 2) is None
    assert string_counts(Site(1, 1, 1), Site(0, 0, 2), 1) is not None


def test_past_cone_examples():
    assert past_causal_cone(ORIGIN, 0) == {ORIGIN}
    assert past_causal_cone(ORIGIN, 1) == {Site(*step_vector(l)) for l in STEPS}
    two = past_causal_cone(ORIGIN, 2)
    assert len(two) == 27
    assert two == {Site(*v) for v in itertools.product((-2, 0, 2), repeat=3)}
    # the same set arises from all 64 two-step paths
    assert two == {path_endpoint(ORIGIN, p)[0] for p in itertools.product(STEPS, repeat=2)}


@pytest.mark.parametrize("t", range(9))
def test_cone_matches_string_counts_on_box(t):
    x = Site(1, -1, 1)
    cone = past_causal_cone(x, t)
    assert len(cone) == (t + 1) ** 3
    assert len(cone_displacements(t)) == (t + 1) ** 3
    box = range(-t - 3, t + 4)
    for a, b, c in itertools.product(box, repeat=3):
        if (a - b) % 2 or (b - c) % 2:
            continue
        src = Site(x.x1 + a, x.x2 + b, x.x3 + c)
        assert (src in cone) == (string_counts(src, x, t) is not None)
        assert (src in cone) == in_past_cone(src, x, t)


@pytest.mark.parametrize("t", range(7))
def test_inverse_step_strings_carry_the_counts(t):
    # every path's inverse-step codes have exactly the predicted set-bit counts
    start = Site(0, 2, -2)
    for steps in itertools.product(STEPS, repeat=t):
        end, _ = path_endpoint(start, steps)
        for coord in range(3):
            assert (end[coord] - start[coord]) % 2 == t % 2
        _, K1, K2, K3 = string_counts(start, end, t)
        codes = [step_code(-l) for l in steps]
        for j, K in enumerate((K1, K2, K3)):
            assert iota(BitString.from_bits(c[j] for c in codes)) == K
