"""Testers as seeded, replayable coroutines.

A tester's :meth:`SeededTester.run` is a generator: it yields query indices,
receives the oracle's answers (``None`` for an erased cell) and returns its
outcome, usually a :class:`Verdict`.  All randomness comes from the
:class:`~ptlab.randomness.CountedBitSource` passed in, so the sequence of
actions is a pure function of (seed bits, answers so far).  That is what lets
the seed-elimination adversary replay a tester on every candidate seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Generator, Optional

from .oracles import OracleSession
from .randomness import CountedBitSource
from .strings import Cell, RepetitionStructure, as_fraction

TesterRun = Generator[int, Cell, Any]


class Verdict(str, Enum):
    ACCEPT = "accept"
    REJECT = "reject"


class QueryBudgetExceeded(RuntimeError):
    pass


def ceil_log2(k: int) -> int:
    return (k - 1).bit_length()


def _ceil(q: Fraction) -> int:
    return math.ceil(q)


class SeededTester:
    """Base class: subclasses implement ``run`` and set ``query_budget``.

    ``rbits`` is the hard randomness budget when the tester is driven from a
    finite seed (``None``: unbounded stream).  ``failure_bound`` is the error
    probability the construction guarantees in the standard model.
    """

    name = "tester"
    query_budget: int = 0
    rbits: Optional[int] = None
    failure_bound: Optional[Fraction] = None
    one_sided = False

    def run(self, bits: CountedBitSource) -> TesterRun:
        raise NotImplementedError

    def with_rbits(self, rbits: Optional[int]) -> "SeededTester":
        self.rbits = rbits
        return self


@dataclass
class TesterRunResult:
    outcome: Any
    queries: int
    bits_consumed: int


def drive(tester: SeededTester, session: OracleSession, bits: CountedBitSource) -> TesterRunResult:
    """Run ``tester`` against ``session`` to completion, enforcing its query budget."""
    start = session.queries
    gen = tester.run(bits)
    try:
        i = next(gen)
        while True:
            if session.queries - start >= tester.query_budget:
                raise QueryBudgetExceeded(f"{tester.name} exceeded its budget of {tester.query_budget} queries")
            i = gen.send(session.query(i))
    except StopIteration as stop:
        outcome = stop.value
    session.finalize()
    return TesterRunResult(outcome, session.queries - start, bits.bits_consumed)


@dataclass(frozen=True)
class Halt:
    """Replay outcome of a tester that stopped instead of querying."""

    outcome: Any


def next_action(tester: SeededTester, bits: CountedBitSource, answers) -> int | Halt:
    """The action ``tester`` takes after receiving ``answers``, replayed from scratch."""
    gen = tester.run(bits)
    try:
        action = next(gen)
        for a in answers:
            action = gen.send(a)
    except StopIteration as stop:
        return Halt(stop.value)
    gen.close()
    return action


# -- zero string ----------------------------------------------------------------------


class ZeroStringTester(SeededTester):
    """Query ``ceil(2/eps)`` uniform positions, reject on any non-erased 1."""

    one_sided = True

    def __init__(self, n: int, eps):
        self.n = n
        self.eps = as_fraction(eps)
        self.queries = _ceil(2 / self.eps)
        self.query_budget = self.queries
        self.failure_bound = (1 - self.eps) ** self.queries
        self.name = f"zero-string(n={n}, eps={self.eps})"

    def run(self, bits):
        for _ in range(self.queries):
            a = yield bits.uniform(self.n)
            if a is not None and a != 0:
                return Verdict.REJECT
        return Verdict.ACCEPT


# -- repetition test ------------------------------------------------------------------


class RepTest(SeededTester):
    """Test closeness to the repetition code: compare a random offset across two random blocks.

    ``ceil(2/eps)`` iterations; an iteration rejects only when both answers are
    present and differ, so erasures never cause a rejection.
    """

    one_sided = True

    def __init__(self, struct: RepetitionStructure, eps):
        self.struct = struct
        self.eps = as_fraction(eps)
        self.iterations = _ceil(2 / self.eps)
        self.query_budget = 2 * self.iterations
        self.failure_bound = (1 - self.eps) ** self.iterations
        self.name = f"rep-test(m={struct.m}, r={struct.r}, eps={self.eps})"

    def run(self, bits):
        m, r = self.struct.m, self.struct.r
        for _ in range(self.iterations):
            rho1, rho2, mu = bits.uniform(r), bits.uniform(r), bits.uniform(m)
            a1 = yield rho1 * m + mu
            a2 = yield rho2 * m + mu
            if a1 is not None and a2 is not None and a1 != a2:
                return Verdict.REJECT
        return Verdict.ACCEPT


# -- amplification ------------------------------------------------------------------------

AMPLIFIED_FAILURE = Fraction(1, 12)


def majority_failure(k: int, p: Fraction = Fraction(1, 3)) -> Fraction:
    """Exact ``Pr[Bin(k, p) >= k/2]``."""
    return sum(
        (Fraction(math.comb(k, j)) * p**j * (1 - p) ** (k - j) for j in range(k + 1) if 2 * j >= k),
        Fraction(0),
    )


def majority_repetitions(target: Fraction = AMPLIFIED_FAILURE, p: Fraction = Fraction(1, 3)) -> int:
    k = 1
    while majority_failure(k, p) > target:
        k += 2
    return k


class Amplified(SeededTester):
    """Independent repetitions of a base tester.

    One-sided: three runs, reject if any run rejects.  Two-sided: majority over
    the smallest odd number of runs whose exact binomial tail at base error 1/3
    is at most 1/12.
    """

    def __init__(self, base: SeededTester, one_sided: bool):
        self.base = base
        self.one_sided = one_sided
        base_failure = min(base.failure_bound, Fraction(1, 3)) if base.failure_bound is not None else Fraction(1, 3)
        if one_sided:
            self.repetitions = 3
            self.failure_bound = base_failure**3
        else:
            self.repetitions = majority_repetitions()
            self.failure_bound = majority_failure(self.repetitions, base_failure)
        self.query_budget = self.repetitions * base.query_budget
        self.name = f"amplified[{self.repetitions}]({base.name})"

    def run(self, bits):
        rejections = 0
        for _ in range(self.repetitions):
            verdict = yield from self.base.run(bits)
            if verdict is Verdict.REJECT:
                if self.one_sided:
                    return Verdict.REJECT
                rejections += 1
        if self.one_sided:
            return Verdict.ACCEPT
        return Verdict.REJECT if 2 * rejections > self.repetitions else Verdict.ACCEPT


def amplify(base: SeededTester, one_sided: bool) -> Amplified:
    return Amplified(base, one_sided)


# -- lifted tester ----------------------------------------------------------------------------


@dataclass(frozen=True)
class QueryFunction:
    """Query complexity ``q(m, eps)`` of the unamplified base tester, and its amplification factor."""

    q: Callable[[int, Fraction], int]
    c0: int

    @property
    def c1(self) -> int:
        return 24 * self.c0

    def __call__(self, m: int, eps) -> int:
        return self.q(m, as_fraction(eps))

    def samples_per_query(self, m: int, eps) -> int:
        """Blocks sampled per simulated base query: ``ceil(log2(c1 * q(m, eps)))``."""
        return ceil_log2(self.c1 * self(m, eps))


BaseFactory = Callable[[int, Fraction], SeededTester]


class LiftedTester(SeededTester):
    """Tester for ``{w^r : w in P}`` that tolerates online corruptions.

    Runs :class:`RepTest` at ``eps/2``, then simulates the amplified base tester
    at ``eps/2`` on the block: each base query at offset ``mu`` reads ``mu``
    in ``d`` random blocks, rejects on any disagreement among the non-erased
    answers, and otherwise feeds the first block's answer (an erased first
    answer is fed as symbol 0; in the corruption model this never happens).
    """

    def __init__(self, struct: RepetitionStructure, eps, base_factory: BaseFactory, qf: QueryFunction):
        self.struct = struct
        self.eps = as_fraction(eps)
        half = self.eps / 2
        self.base = base_factory(struct.m, half)
        if self.base.failure_bound is None or self.base.failure_bound > AMPLIFIED_FAILURE:
            raise ValueError(
                f"base tester {self.base.name} must fail with probability <= 1/12, "
                f"declares {self.base.failure_bound}; amplify it first"
            )
        self.one_sided = self.base.one_sided
        self.qf = qf
        self.rep_test = RepTest(struct, half)
        self.d = qf.samples_per_query(struct.m, half)
        self.query_budget = self.rep_test.query_budget + qf.c0 * qf(struct.m, half) * self.d
        self.failure_bound = Fraction(1, 6)
        self.name = f"lifted(m={struct.m}, r={struct.r}, eps={self.eps}, base={self.base.name}, d={self.d})"

    def run(self, bits):
        verdict = yield from self.rep_test.run(bits)
        if verdict is Verdict.REJECT:
            return Verdict.REJECT
        m, r = self.struct.m, self.struct.r
        base_run = self.base.run(bits)
        try:
            mu = next(base_run)
            while True:
                blocks = [bits.uniform(r) for _ in range(self.d)]
                answers = []
                for rho in blocks:
                    answers.append((yield rho * m + mu))
                if len({a for a in answers if a is not None}) > 1:
                    base_run.close()
                    return Verdict.REJECT
                mu = base_run.send(0 if answers[0] is None else answers[0])
        except StopIteration as stop:
            return stop.value


# -- distinct elements ----------------------------------------------------------------------


class DistinctElementsTester(SeededTester):
    """Sample ``ceil(3(tau+1)/eps)`` positions per round; reject if a round sees more than ``tau`` symbols.

    Erased answers are not counted as symbols.  Three rounds.
    """

    one_sided = True

    def __init__(self, n: int, tau: int, eps, rounds: int = 3):
        if tau < 1:
            raise ValueError(f"tau must be >= 1, got {tau}")
        self.n, self.tau, self.rounds = n, tau, rounds
        self.eps = as_fraction(eps)
        self.samples = _ceil(3 * (tau + 1) / self.eps)
        self.query_budget = rounds * self.samples
        self.failure_bound = Fraction(1, 3) ** rounds
        self.name = f"de(n={n}, tau={tau}, eps={self.eps})"

    def run(self, bits):
        for _ in range(self.rounds):
            seen = set()
            for _ in range(self.samples):
                a = yield bits.uniform(self.n)
                if a is not None:
                    seen.add(a)
                    if len(seen) > self.tau:
                        return Verdict.REJECT
        return Verdict.ACCEPT


# -- ww distance estimation --------------------------------------------------------------------


class WWEstimator(SeededTester):
    """Estimate the distance to ``{ww}`` from ``ceil(2/eps^2)`` random mirrored pairs.

    Returns (mismatched sampled pairs) / (2 * pairs); erased pairs count as matched.
    """

    def __init__(self, n: int, eps):
        if n % 2:
            raise ValueError(f"ww inputs have even length, got {n}")
        self.n = n
        self.eps = as_fraction(eps)
        self.pairs = _ceil(2 / self.eps**2)
        self.query_budget = 2 * self.pairs
        self.name = f"ww-estimate(n={n}, eps={self.eps})"

    def run(self, bits):
        k = self.n // 2
        mismatched = 0
        for _ in range(self.pairs):
            p = bits.uniform(k)
            a = yield p
            b = yield p + k
            if a is not None and b is not None and a != b:
                mismatched += 1
        return Fraction(mismatched, 2 * self.pairs)


# -- session-level entry points ------------------------------------------------------------------


def rep_test(session: OracleSession, struct: RepetitionStructure, eps, bits: CountedBitSource) -> Verdict:
    return drive(RepTest(struct, eps), session, bits).outcome


def zero_string_test(session: OracleSession, n: int, eps, bits: CountedBitSource) -> Verdict:
    return drive(ZeroStringTester(n, eps), session, bits).outcome


def distinct_elements_test(session: OracleSession, n: int, tau: int, eps, bits: CountedBitSource) -> Verdict:
    return drive(DistinctElementsTester(n, tau, eps), session, bits).outcome


def lifted_tester(session: OracleSession, base: BaseFactory, qf: QueryFunction,
                  struct: RepetitionStructure, eps, bits: CountedBitSource) -> Verdict:
    return drive(LiftedTester(struct, eps, base, qf), session, bits).outcome


def ww_distance_estimate(session: OracleSession, n: int, eps, bits: CountedBitSource) -> Fraction:
    if session.mode.online:
        raise ValueError("the ww estimator is not resilient to online manipulation; use a standard or offline session")
    return drive(WWEstimator(n, eps), session, bits).outcome


# -- base testers for lifting, and the registry -------------------------------------------------------


@dataclass(frozen=True)
class BaseSpec:
    factory: BaseFactory
    qf: QueryFunction


def base_tester(spec: str) -> BaseSpec:
    """Amplified base tester (and its query function) by registry name."""
    kind, *rest = spec.split(":")
    params = _parse_params(rest)
    if kind == "zero-string":
        qf = QueryFunction(lambda m, eps: _ceil(2 / eps), c0=3)
        return BaseSpec(lambda m, eps: amplify(ZeroStringTester(m, eps), one_sided=True), qf)
    if kind == "de":
        tau = params["tau"]
        # three rounds are built in, failure (1/3)^3 <= 1/12 without further amplification
        qf = QueryFunction(lambda m, eps: _ceil(3 * (tau + 1) / eps), c0=3)
        return BaseSpec(lambda m, eps: DistinctElementsTester(m, tau, eps), qf)
    raise ValueError(f"unknown base tester {spec!r}")


def _parse_params(tokens) -> dict[str, int]:
    out = {}
    for tok in tokens:
        key, sep, value = tok.partition("=")
        if not sep:
            raise ValueError(f"expected key=value, got {tok!r}")
        out[key] = int(value)
    return out


TESTER_KINDS = {
    "zero-string": "reject on any 1 among ceil(2/eps) uniform queries",
    "rep-test": "repetition-code test, ceil(2/eps) block comparisons",
    "lifted:base=<zero-string|de:tau=T>": "online-corruption-resilient tester for a lifted property",
    "de:tau=T": "tau-distinct-elements sample tester, 3 rounds",
    "ww-estimate": "distance-to-{ww} estimator from ceil(2/eps^2) pairs (standard/offline only)",
}


def make_tester(spec: str, *, n: int, eps, m: Optional[int] = None, r: Optional[int] = None,
                tau: Optional[int] = None, rbits: Optional[int] = None) -> SeededTester:
    """Build a tester from its registry name and the experiment parameters."""
    spec = spec.strip()
    if spec.startswith("lifted:"):
        key, sep, base = spec[len("lifted:"):].partition("=")
        if key != "base" or not sep:
            raise ValueError(f"expected lifted:base=<tester>, got {spec!r}")
        struct = _structure(n, m, r)
        b = base_tester(base)
        tester: SeededTester = LiftedTester(struct, eps, b.factory, b.qf)
    else:
        kind, *rest = spec.split(":")
        params = _parse_params(rest)
        if kind == "zero-string":
            tester = ZeroStringTester(n, eps)
        elif kind == "rep-test":
            tester = RepTest(_structure(n, m, r), eps)
        elif kind == "de":
            tester = DistinctElementsTester(n, params.get("tau", tau), eps)
        elif kind == "ww-estimate":
            tester = WWEstimator(n, eps)
        else:
            raise ValueError(f"unknown tester {spec!r}; known: {', '.join(TESTER_KINDS)}")
    return tester.with_rbits(rbits)


def _structure(n: int, m: Optional[int], r: Optional[int]) -> RepetitionStructure:
    if m is None and r is None:
        raise ValueError("repetition testers need m or r")
    if m is None:
        m = n // r
    if r is None:
        r = n // m
    struct = RepetitionStructure(m, r)
    if struct.n != n:
        raise ValueError(f"n={n} is not m*r = {m}*{r}")
    return struct
