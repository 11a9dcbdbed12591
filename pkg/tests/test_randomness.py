import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import chisquare

from ptlab.randomness import CountedBitSource, RandomnessExhausted, trial_generator, trial_seed_sequence


def test_seed_bits_are_handed_out_lsb_first():
    src = CountedBitSource.from_seed(0b1101, 4)
    assert [src.bit() for _ in range(4)] == [1, 0, 1, 1]
    with pytest.raises(RandomnessExhausted):
        src.bit()


def test_seed_must_fit():
    with pytest.raises(ValueError):
        CountedBitSource.from_seed(16, 4)
    assert CountedBitSource.from_seed(0, 0).bits_consumed == 0


@given(st.integers(1, 40), st.integers(0, 2**32))
def test_uniform_stays_in_range_and_counts_bits(k, seed):
    src = CountedBitSource.stream(seed)
    draws = [src.uniform(k) for _ in range(20)]
    assert all(0 <= v < k for v in draws)
    width = (k - 1).bit_length()
    assert src.bits_consumed % max(width, 1) == 0 or width == 0
    assert src.bits_consumed >= 20 * width


def test_uniform_is_uniform():
    src = CountedBitSource.stream(123)
    counts = np.bincount([src.uniform(5) for _ in range(20_000)], minlength=5)
    assert chisquare(counts).pvalue > 1e-3


def test_uniform_of_one_uses_no_bits():
    src = CountedBitSource.from_seed(0, 0)
    assert src.uniform(1) == 0 and src.bits_consumed == 0
    with pytest.raises(ValueError):
        src.uniform(0)


def test_stream_budget():
    src = CountedBitSource.stream(1, budget=3)
    src.bits(3)
    with pytest.raises(RandomnessExhausted):
        src.bit()


def test_streams_are_reproducible_and_separated():
    a = CountedBitSource.stream(trial_seed_sequence(5, 7))
    b = CountedBitSource.stream(trial_seed_sequence(5, 7))
    c = CountedBitSource.stream(trial_seed_sequence(5, 8))
    xs, ys, zs = a.bits(64), b.bits(64), c.bits(64)
    assert xs == ys and xs != zs
    assert trial_generator(0, 1, 1).integers(1 << 30) != trial_generator(0, 1, 2).integers(1 << 30)
