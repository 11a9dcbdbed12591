from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import binom

from ptlab.oracles import Mode, OracleSession, make_offline_erased
from ptlab.properties import get_property, sample_far
from ptlab.randomness import CountedBitSource, trial_seed_sequence
from ptlab.strings import RepetitionStructure, concatenate_repetitions
from ptlab.testers import (
    DistinctElementsTester,
    Halt,
    LiftedTester,
    QueryBudgetExceeded,
    QueryFunction,
    RepTest,
    SeededTester,
    Verdict,
    WWEstimator,
    ZeroStringTester,
    amplify,
    base_tester,
    distinct_elements_test,
    drive,
    majority_failure,
    majority_repetitions,
    make_tester,
    next_action,
    rep_test,
    ww_distance_estimate,
    zero_string_test,
)
from ptlab.adversaries import MirrorAdversary


def bits(i=0):
    return CountedBitSource.stream(trial_seed_sequence(0, i))


def test_query_counts():
    assert ZeroStringTester(10, 0.3).queries == 7
    assert RepTest(RepetitionStructure(5, 4), 0.25).query_budget == 16
    assert DistinctElementsTester(100, 5, 0.5).samples == 36
    assert WWEstimator(100, 0.05).pairs == 800


def test_majority_matches_scipy():
    k = majority_repetitions()
    assert k % 2 == 1
    for j in range(1, k + 1, 2):
        tail = binom.sf((j - 1) // 2, j, 1 / 3)
        assert float(majority_failure(j)) == pytest.approx(tail, rel=1e-12)
        if j < k:
            assert tail > 1 / 12
    assert binom.sf((k - 1) // 2, k, 1 / 3) <= 1 / 12


def test_amplification_bounds():
    one = amplify(ZeroStringTester(8, 0.5), one_sided=True)
    assert one.repetitions == 3 and one.failure_bound <= Fraction(1, 12)
    two = amplify(ZeroStringTester(8, 0.5), one_sided=False)
    assert two.repetitions == majority_repetitions() and two.failure_bound <= Fraction(1, 12)


def test_lifted_sample_count_and_budget():
    t = make_tester("lifted:base=zero-string", n=64 * 100, m=64, eps=0.5)
    # base queries ceil(2/(1/4)) = 8 at eps/2, c1 = 72, d = ceil(log2 576) = 10
    assert t.d == 10
    assert t.qf.c1 == 72
    assert t.query_budget == 16 + 3 * 8 * 10


def test_lifted_rejects_unamplified_base():
    qf = QueryFunction(lambda m, eps: 4, c0=1)
    with pytest.raises(ValueError):
        # unamplified at eps/2 = 1/4 the base fails with probability (3/4)^8 > 1/12
        LiftedTester(RepetitionStructure(4, 4), 0.5, lambda m, eps: ZeroStringTester(m, eps), qf)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_replay_is_deterministic(seed):
    struct = RepetitionStructure(4, 8)
    x = np.random.default_rng(seed).integers(0, 2, size=32)
    tester = make_tester("lifted:base=zero-string", n=32, m=4, eps=0.5)
    runs = []
    for _ in range(2):
        s = OracleSession(x)
        out = drive(tester, s, CountedBitSource.stream(seed))
        runs.append((out.outcome, out.bits_consumed, [e.index for e in s.transcript]))
    assert runs[0] == runs[1]
    # next_action replays the same path, query by query, then halts with the same verdict
    queries = runs[0][2]
    answers = [int(x[i]) for i in queries]
    for k in range(0, len(queries), 7):
        assert next_action(tester, CountedBitSource.stream(seed), answers[:k]) == queries[k]
    assert next_action(tester, CountedBitSource.stream(seed), answers) == Halt(runs[0][0])
    assert struct.n == len(x)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=3, max_size=6), st.integers(2, 6), st.integers(0, 1000))
def test_one_sided_testers_accept_members(w, r, seed):
    struct = RepetitionStructure(len(w), r)
    s = concatenate_repetitions(w, r)
    assert rep_test(OracleSession(s), struct, 0.3, bits(seed)) is Verdict.ACCEPT
    assert zero_string_test(OracleSession([0] * 9), 9, 0.3, bits(seed)) is Verdict.ACCEPT
    assert distinct_elements_test(OracleSession(s), len(s), 3, 0.5, bits(seed)) is Verdict.ACCEPT
    lifted = make_tester("lifted:base=zero-string", n=len(w) * r, m=len(w), eps=0.5)
    zero = concatenate_repetitions([0] * len(w), r)
    assert drive(lifted, OracleSession(zero), bits(seed)).outcome is Verdict.ACCEPT


def test_rep_test_rejects_mismatch():
    struct = RepetitionStructure(1, 2)
    # eps = 1 gives 2 iterations; a single comparison of the two unequal blocks rejects
    outcomes = {rep_test(OracleSession([0, 1]), struct, 1, bits(i)) for i in range(50)}
    assert Verdict.REJECT in outcomes


def test_erasures_never_cause_rejection():
    x = [1] * 20
    erased = make_offline_erased(x, range(20), 1)
    assert zero_string_test(OracleSession.offline(erased), 20, 0.2, bits()) is Verdict.ACCEPT
    assert distinct_elements_test(OracleSession.offline(erased), 20, 1, 0.5, bits()) is Verdict.ACCEPT


def test_distinct_elements_rejects_far_string():
    x = np.arange(1000)
    assert distinct_elements_test(OracleSession(x), 1000, 2, 0.5, bits()) is Verdict.REJECT


def test_ww_estimator_is_unbiased_enough():
    rng = np.random.default_rng(2)
    x = sample_far(get_property("ww"), 2000, Fraction(1, 10), rng)
    est = [ww_distance_estimate(OracleSession(x), 2000, 0.1, bits(i)) for i in range(200)]
    assert abs(float(np.mean(est)) - 0.1) < 0.01


def test_ww_estimator_refuses_online_sessions():
    s = OracleSession([0, 1, 0, 1], Mode.ONLINE_ERASE, 1, MirrorAdversary())
    with pytest.raises(ValueError):
        ww_distance_estimate(s, 4, 0.5, bits())


def test_query_budget_is_enforced():
    class Greedy(SeededTester):
        query_budget = 2

        def run(self, bits):
            while True:
                yield 0

    with pytest.raises(QueryBudgetExceeded):
        drive(Greedy(), OracleSession([0]), bits())


def test_make_tester_errors():
    with pytest.raises(ValueError):
        make_tester("nope", n=4, eps=0.5)
    with pytest.raises(ValueError):
        make_tester("lifted:zero-string", n=4, m=2, eps=0.5)
    with pytest.raises(ValueError):
        base_tester("ww")
    with pytest.raises(ValueError):
        make_tester("rep-test", n=10, eps=0.5)


def test_de_base_for_lifting():
    t = make_tester("lifted:base=de:tau=2", n=30 * 50, m=30, eps=0.5)
    assert t.base.failure_bound <= Fraction(1, 12)
    members = concatenate_repetitions(np.array([0, 1] * 15), 50)
    assert drive(t, OracleSession(members), bits()).outcome is Verdict.ACCEPT
