import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptlab.bruteforce import ORACLE_CHECK_PROPERTIES, check_property
from ptlab.properties import (
    CapabilityError,
    GenerationError,
    distinct_elements_completion_distance,
    distinct_elements_contains,
    distinct_elements_distance,
    exact_distance,
    get_property,
    lifted_distance,
    lipschitz_distance,
    sample_far,
    sample_member,
    sortedness_contains,
    sortedness_distance,
    ww_contains,
    ww_distance,
    ww_partner,
    zero_string_distance,
)
from ptlab.strings import concatenate_repetitions, relative_hamming_distance

SMALL_SPECS = [
    "zero-string",
    "distinct-elements:tau=2",
    "ww",
    "sortedness:sigma=3",
    "lipschitz:sigma=3",
    "repetition-code:m=2:sigma=3",
    "lift:zero-string:r=2",
    "lift:ww:r=2",
]


def test_distinct_elements_examples():
    assert distinct_elements_contains([5, 5, 5, 5], 1)
    assert not distinct_elements_contains([1, 2, 3], 2)
    assert distinct_elements_contains([1, 1, 2, 2, 3, 3], 3)
    assert distinct_elements_distance([1, 1, 1, 2, 2, 3], 2) == Fraction(1, 6)
    assert distinct_elements_distance([4, 4, 9], 2) == 0
    assert distinct_elements_distance([1, 2, 3, 4], 1) == Fraction(3, 4)


def test_completion_distance_ignores_erasures():
    assert distinct_elements_completion_distance([1, None, 2, None], 1) == Fraction(1, 4)
    assert distinct_elements_completion_distance([None, None], 1) == 0


def test_ww_examples():
    x = [0, 1, 1, 0, 0, 1, 1, 0]
    assert ww_contains(x) and ww_distance(x) == 0
    assert ww_distance([0, 1, 1, 0, 0, 1, 0, 0]) == Fraction(1, 8)
    assert ww_distance([0, 1]) == Fraction(1, 2)
    with pytest.raises(ValueError):
        ww_distance([0, 1, 0])


def test_ww_partner_mirrors_halves():
    # 0-based: index 2 of the first half pairs with index 6 when k = 4
    assert ww_partner(2, 8) == 6
    assert ww_partner(6, 8) == 2
    assert all(ww_partner(ww_partner(p, 10), 10) == p for p in range(10))


def test_sortedness_and_lipschitz_examples():
    assert sortedness_contains([1, 2, 2, 5]) and sortedness_distance([1, 2, 2, 5]) == 0
    assert sortedness_distance([3, 1, 2]) == Fraction(1, 3)
    assert lipschitz_distance([0, 2, 0]) == Fraction(1, 3)


def test_zero_string_examples():
    assert zero_string_distance([0, 0, 0]) == 0
    assert zero_string_distance([1, 1]) == 1
    assert zero_string_distance([0, 1, 0, 0]) == Fraction(1, 4)


def test_lifted_examples():
    prop = get_property("lift:zero-string:r=2")
    lifted = prop.params["lifted"]
    assert lifted_distance([0, 0, 0, 0], lifted) == 0
    assert lifted_distance([0, 1, 0, 1], lifted) == Fraction(1, 2)
    assert lifted_distance([0, 1, 1, 0], lifted) == Fraction(1, 2)


@given(st.lists(st.integers(0, 1), min_size=1, max_size=8), st.integers(1, 5))
def test_lift_preserves_distance_of_codewords(x, r):
    prop = get_property(f"lift:zero-string:r={r}")
    assert prop.distance(concatenate_repetitions(x, r)) == zero_string_distance(x)


def test_lifted_distance_capability_error():
    prop = get_property("lift:ww:r=2")
    s = np.zeros(60, dtype=np.int64)
    s[0] = 1
    with pytest.raises(CapabilityError):
        prop.distance(s)


@pytest.mark.parametrize("spec", SMALL_SPECS)
def test_contains_iff_distance_zero(spec):
    prop = get_property(spec)
    rng = np.random.default_rng(7)
    lengths = [n for n in range(2, 9) if prop.valid_length(n)]
    for trial in range(10_000 // len(SMALL_SPECS)):
        n = lengths[trial % len(lengths)]
        x = rng.integers(0, min(3, prop.alphabet(n)), size=n)
        assert bool(prop.contains(x)) == (prop.distance(x) == 0)


@pytest.mark.parametrize("spec", SMALL_SPECS)
def test_distance_agrees_with_bfs_on_short_strings(spec):
    prop = get_property(spec)
    for n in range(1, 7):
        if prop.valid_length(n):
            sigma = min(3, prop.alphabet(n))
            assert check_property(prop, n, sigma).mismatches == 0


def test_oracle_check_list_parses():
    for spec in ORACLE_CHECK_PROPERTIES:
        assert get_property(spec).name


def _brute_force_distance(prop, x, sigma):
    n = len(x)
    return min(relative_hamming_distance(x, y) for y in itertools.product(range(sigma), repeat=n) if prop.contains(np.array(y)))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(SMALL_SPECS[:6]), st.data())
def test_distance_is_a_minimum_over_members(spec, data):
    prop = get_property(spec)
    n = data.draw(st.sampled_from([n for n in range(2, 7) if prop.valid_length(n)]))
    sigma = min(3, prop.alphabet(n))
    x = np.array(data.draw(st.lists(st.integers(0, sigma - 1), min_size=n, max_size=n)))
    assert exact_distance(prop, x) == _brute_force_distance(prop, x, sigma)


@pytest.mark.parametrize("spec,n,eps", [
    ("zero-string", 4, "1/2"),
    ("distinct-elements:tau=2", 6, "1/6"),
    ("repetition-code:m=2:sigma=3", 6, "1/6"),
    ("ww", 100, "0.2"),
    ("distinct-elements:tau=5", 10_000, "0.3"),
    ("repetition-code:m=50:sigma=2", 1000, "0.25"),
    ("lift:zero-string:r=100", 6400, "0.5"),
    ("lift:distinct-elements:tau=3:r=10", 1000, "0.25"),
])
def test_sample_far_is_certified(spec, n, eps):
    prop = get_property(spec)
    rng = np.random.default_rng(3)
    for _ in range(5):
        z = sample_far(prop, n, eps, rng)
        assert len(z) == n
        assert exact_distance(prop, z) >= Fraction(eps)


def test_far_examples_from_the_definitions():
    rng = np.random.default_rng(0)
    z = sample_far(get_property("zero-string"), 4, Fraction(1, 2), rng)
    assert zero_string_distance(z) == Fraction(1, 2)
    z = sample_far(get_property("distinct-elements:tau=2"), 6, Fraction(1, 6), rng)
    assert distinct_elements_distance(z, 2) >= Fraction(1, 6)


def test_sample_member_is_member():
    rng = np.random.default_rng(1)
    for spec in SMALL_SPECS + ["repetition-code:m=50:sigma=3", "lift:distinct-elements:tau=3:r=4"]:
        prop = get_property(spec)
        n = next(n for n in range(8, 400) if prop.valid_length(n))
        assert prop.contains(sample_member(prop, n, rng))


def test_unreachable_far_instances_raise():
    rng = np.random.default_rng(0)
    with pytest.raises(GenerationError):
        sample_far(get_property("ww"), 10, "0.6", rng)
    # at most three symbols fit into length 3, so a 2/3-far tau=2 string cannot exist
    with pytest.raises(GenerationError):
        sample_far(get_property("distinct-elements:tau=2"), 3, "2/3", rng, retries=4)
    with pytest.raises(ValueError):
        sample_far(get_property("zero-string"), 4, 0, rng)


def test_registry_errors():
    with pytest.raises(ValueError):
        get_property("no-such-property")
    with pytest.raises(ValueError):
        get_property("distinct-elements:tau")
    with pytest.raises(ValueError):
        get_property("lift:zero-string")
    with pytest.raises(ValueError):
        get_property("ww").check_length(5)
