import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptlab.strings import (
    RepetitionStructure,
    as_fraction,
    concatenate_repetitions,
    distance_to_repetition_code,
    plurality_decode,
    relative_hamming_distance,
)

A, B, C = 0, 1, 2


def strings_of(n, sigma=3):
    return st.lists(st.integers(0, sigma - 1), min_size=n, max_size=n)


def test_hamming_examples():
    assert relative_hamming_distance([1, 2, 3], [1, 2, 3]) == 0
    assert relative_hamming_distance([0, 0, 0], [0, 1, 0]) == Fraction(1, 3)
    assert relative_hamming_distance([0, 1], [1, 0]) == 1


def test_hamming_errors():
    with pytest.raises(ValueError):
        relative_hamming_distance([0, 1], [0])
    with pytest.raises(ValueError):
        relative_hamming_distance([], [])


@given(st.integers(1, 12).flatmap(lambda n: st.tuples(strings_of(n), strings_of(n), strings_of(n))))
def test_hamming_is_a_metric(xyz):
    x, y, z = xyz
    d = relative_hamming_distance
    assert d(x, x) == 0
    assert d(x, y) == d(y, x)
    assert 0 <= d(x, y) <= 1
    assert d(x, z) <= d(x, y) + d(y, z)
    assert (d(x, y) == 0) == (x == y)


def test_concatenate_examples():
    assert concatenate_repetitions([0, 1], 3).tolist() == [0, 1, 0, 1, 0, 1]
    assert concatenate_repetitions([4, 2], 1).tolist() == [4, 2]
    assert concatenate_repetitions([7], 4).tolist() == [7] * 4
    with pytest.raises(ValueError):
        concatenate_repetitions([0], 0)


@given(strings_of(5), st.integers(1, 6))
def test_concatenate_blocks_round_trip(w, r):
    struct = RepetitionStructure(len(w), r)
    s = concatenate_repetitions(w, r)
    assert len(s) == struct.n
    assert all(block.tolist() == w for block in struct.blocks(s))
    assert plurality_decode(s, struct).tolist() == w
    assert distance_to_repetition_code(s, struct) == 0


@given(st.integers(1, 6), st.integers(1, 6))
def test_index_split_bijection(m, r):
    struct = RepetitionStructure(m, r)
    seen = {struct.index(rho, mu) for rho in range(r) for mu in range(m)}
    assert seen == set(range(struct.n))
    assert all(struct.index(*struct.split(i)) == i for i in range(struct.n))


def test_structure_rejects_bad_addresses():
    struct = RepetitionStructure(2, 3)
    with pytest.raises(IndexError):
        struct.index(3, 0)
    with pytest.raises(IndexError):
        struct.split(6)
    with pytest.raises(ValueError):
        struct.blocks([0] * 5)
    with pytest.raises(ValueError):
        RepetitionStructure(0, 3)


def test_plurality_examples():
    struct = RepetitionStructure(2, 3)
    s = [A, B, A, B, C, B]
    assert plurality_decode(s, struct).tolist() == [A, B]
    assert distance_to_repetition_code(s, struct) == Fraction(1, 6)
    # tie between a and b goes to the lowest symbol
    assert plurality_decode([A, B], RepetitionStructure(1, 2)).tolist() == [A]
    assert distance_to_repetition_code([A, B], RepetitionStructure(1, 2)) == Fraction(1, 2)


def test_plurality_tie_break_large_alphabet():
    struct = RepetitionStructure(1, 4)
    assert plurality_decode([900, 70, 900, 70], struct).tolist() == [70]


def _brute_force_code_distance(s, struct, sigma):
    return min(
        relative_hamming_distance(s, concatenate_repetitions(w, struct.r))
        for w in itertools.product(range(sigma), repeat=struct.m)
    )


@settings(max_examples=200)
@given(st.sampled_from([(1, 2), (2, 3), (3, 2), (2, 4), (4, 3), (3, 4), (6, 2), (2, 6)]).flatmap(
    lambda mr: st.tuples(st.just(mr), strings_of(mr[0] * mr[1]))))
def test_distance_matches_brute_force(case):
    (m, r), s = case
    struct = RepetitionStructure(m, r)
    assert distance_to_repetition_code(s, struct) == _brute_force_code_distance(s, struct, 3)


@given(st.sampled_from([(2, 3), (3, 3), (4, 2)]).flatmap(lambda mr: st.tuples(st.just(mr), strings_of(mr[0] * mr[1]))))
def test_plurality_decoding_attains_the_minimum(case):
    (m, r), s = case
    struct = RepetitionStructure(m, r)
    w = plurality_decode(s, struct)
    assert relative_hamming_distance(s, concatenate_repetitions(w, r)) == distance_to_repetition_code(s, struct)


def test_as_fraction_is_exact():
    assert as_fraction(0.3) == Fraction(3, 10)
    assert as_fraction("1/3") == Fraction(1, 3)
    assert as_fraction(Fraction(2, 7)) == Fraction(2, 7)
    assert as_fraction(np.float64(0.05)) == Fraction(1, 20)
