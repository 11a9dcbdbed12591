"""Online adversary strategies.

A strategy exposes ``step(session)``, called right after each answer; it
returns at most ``session.t`` manipulations ``(index, new_cell)``.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .oracles import Mode, OracleSession
from .properties import CapabilityError, ww_partner
from .randomness import CountedBitSource, RandomnessExhausted
from .strings import RepetitionStructure, as_string
from .testers import Halt, SeededTester, drive, next_action

# largest seed space the seed-elimination adversary will enumerate
MAX_SEED_BITS = 24


class SoundnessViolation(AssertionError):
    """The seed-elimination adversary pruned the seed actually in use."""


class NullAdversary:
    def step(self, session):
        return []


class MirrorAdversary:
    """Erase the mirror position of the last query in a length-2k input."""

    def step(self, session):
        if session.t < 1:
            return []
        p = session.transcript[-1].index
        return [(ww_partner(p, session.n), None)]


class GreedyBlockCorruptor:
    """After a query at offset ``mu``, overwrite offset ``mu`` in up to ``t`` other random blocks.

    The written symbol is ``(answer + 1) mod sigma``, so it always differs from
    what the tester just saw.
    """

    def __init__(self, struct: RepetitionStructure, sigma: int, rng: np.random.Generator):
        self.struct = struct
        self.sigma = sigma
        self.rng = rng

    def step(self, session):
        entry = session.transcript[-1]
        if session.t < 1 or self.sigma < 2 or entry.answer is None or self.struct.r < 2:
            return []
        rho, mu = self.struct.split(entry.index)
        k = min(session.t, self.struct.r - 1)
        others = self.rng.choice(self.struct.r - 1, size=k, replace=False)
        others = others + (others >= rho)
        value = (entry.answer + 1) % self.sigma
        return [(self.struct.index(int(b), mu), value) for b in others]


class SymbolIndex:
    """Positions of every symbol of ``x``, grouped by symbol."""

    def __init__(self, x):
        x = as_string(x)
        self.order = np.argsort(x, kind="stable")
        values = x[self.order]
        starts = np.flatnonzero(np.r_[True, values[1:] != values[:-1]])
        ends = np.r_[starts[1:], len(values)]
        self.span = {int(values[s]): (int(s), int(e)) for s, e in zip(starts, ends)}


class SymbolEraser:
    """Erase up to ``t`` random other occurrences of the symbol just answered."""

    def __init__(self, x, rng: np.random.Generator, index: Optional[SymbolIndex] = None):
        self.rng = rng
        index = index if index is not None else SymbolIndex(x)
        self._order, self._span = index.order, index.span

    def step(self, session):
        entry = session.transcript[-1]
        if session.t < 1 or entry.answer is None:
            return []
        start, end = self._span[entry.answer]
        size = end - start
        picks = self.rng.choice(size, size=min(size, session.t + 1), replace=False)
        out = []
        for k in picks:
            j = int(self._order[start + k])
            if j != entry.index and session.cell(j) is not None:
                out.append((j, None))
                if len(out) == session.t:
                    break
        return out


# -- seed elimination -----------------------------------------------------------------------------


class _NeedBit(Exception):
    pass


class _PrefixBits(CountedBitSource):
    """Replays the first ``length`` bits of a seed; reading further asks for a branch."""

    def __init__(self, value: int, length: int, rbits: int):
        super().__init__(seed_value=value, budget=rbits)
        self.length = length

    def bit(self) -> int:
        if self.bits_consumed >= self.length and self.bits_consumed < self.budget:
            raise _NeedBit
        return super().bit()


EXHAUSTED = Halt("randomness-exhausted")


@dataclass(frozen=True)
class Prefix:
    """All seeds whose first ``length`` bits equal those of ``value``."""

    value: int
    length: int

    def weight(self, rbits: int) -> int:
        return 1 << (rbits - self.length)

    def covers(self, seed: int) -> bool:
        return seed & ((1 << self.length) - 1) == self.value


class SeedSet:
    """Seeds still consistent with a transcript, grouped by the bit prefix the tester actually read.

    A tester only ever looks at a prefix of its seed, so seeds sharing that
    prefix behave identically; storing prefixes instead of seeds is exact.
    With ``eager=True`` every seed of the ``rbits``-bit space is its own
    full-length prefix, which is the literal enumeration.
    """

    def __init__(self, tester: SeededTester, rbits: int, eager: bool = False):
        self.tester = tester
        self.rbits = rbits
        self.answers: list = []
        start = [Prefix(s, rbits) for s in range(1 << rbits)] if eager else [Prefix(0, 0)]
        self.states: list[tuple[Prefix, object]] = self._expand(start)

    def _expand(self, prefixes) -> list[tuple[Prefix, object]]:
        out = []
        stack = list(prefixes)
        while stack:
            pre = stack.pop()
            src = _PrefixBits(pre.value, pre.length, self.rbits)
            try:
                action = next_action(self.tester, src, self.answers)
            except _NeedBit:
                stack.append(Prefix(pre.value | (1 << pre.length), pre.length + 1))
                stack.append(Prefix(pre.value, pre.length + 1))
                continue
            except RandomnessExhausted:
                action = EXHAUSTED
            out.append((pre, action))
        return out

    def __len__(self) -> int:
        return sum(pre.weight(self.rbits) for pre, _ in self.states)

    def __contains__(self, seed: int) -> bool:
        return any(pre.covers(seed) for pre, _ in self.states)

    def observe(self, index: int, answer) -> None:
        """Keep the seeds that would have queried ``index``, then advance them past ``answer``."""
        kept = [pre for pre, action in self.states if action == index]
        self.answers.append(answer)
        self.states = self._expand(kept)

    def predicted_queries(self) -> Counter:
        mult: Counter = Counter()
        for pre, action in self.states:
            if not isinstance(action, Halt):
                mult[action] += pre.weight(self.rbits)
        return mult


class SeedEliminationAdversary:
    """Erase the ``t`` indices the consistent seeds are most likely to query next.

    Ties go to the lowest index.  ``witness_seed`` (instrumentation only, never
    used for decisions) is checked to stay in the seed set after every step.
    """

    def __init__(self, tester: SeededTester, t: int, *, rbits: Optional[int] = None,
                 witness_seed: Optional[int] = None, eager: bool = False):
        rbits = tester.rbits if rbits is None else rbits
        if rbits is None or not hasattr(tester, "run"):
            raise CapabilityError(f"{getattr(tester, 'name', tester)!r} exposes no finite-seed replay interface")
        if rbits > MAX_SEED_BITS:
            raise CapabilityError(f"seed space of {rbits} bits exceeds the enumeration cap of {MAX_SEED_BITS}")
        self.tester = tester
        self.t = t
        self.rbits = rbits
        self.witness_seed = witness_seed
        self.seeds = SeedSet(tester, rbits, eager=eager)
        self.seed_counts = [len(self.seeds)]

    def step(self, session):
        entry = session.transcript[-1]
        self.seeds.observe(entry.index, entry.answer)
        self.seed_counts.append(len(self.seeds))
        if self.witness_seed is not None and self.witness_seed not in self.seeds:
            raise SoundnessViolation(f"true seed {self.witness_seed} pruned after {session.queries} queries")
        mult = self.seeds.predicted_queries()
        top = sorted(mult.items(), key=lambda kv: (-kv[1], kv[0]))[: min(self.t, session.t)]
        return [(i, None) for i, _ in top]


@dataclass
class SimulationResult:
    verdict: object
    real_queries: int
    queries: int
    seed_counts: list[int]


def seed_cap(rbits: int, t: int) -> int:
    """``floor(rbits / log2(t+1))``, and at least 1: the first answer is never manipulated."""
    if t < 1:
        raise ValueError("the cap needs t >= 1")
    # exact floor for powers of two, float-safe otherwise
    if (t + 1) & t == 0:
        bound = rbits // ((t + 1).bit_length() - 1)
    else:
        bound = math.floor(rbits / math.log2(t + 1) + 1e-12)
    return max(1, bound)


def standard_model_simulation(tester: SeededTester, x, t: int, seed: int,
                              rbits: Optional[int] = None) -> SimulationResult:
    """Run the tester on ``seed`` while simulating the seed-elimination adversary locally.

    Rounds the adversary would erase are answered with an erasure without
    touching ``x``; only the remaining rounds read ``x``.  ``real_queries``
    counts those reads.
    """
    adversary = SeedEliminationAdversary(tester, t, rbits=rbits, witness_seed=seed)
    session = OracleSession(x, Mode.ONLINE_ERASE, t, adversary)
    result = drive(tester, session, CountedBitSource.from_seed(seed, adversary.rbits))
    return SimulationResult(result.outcome, session.pristine_reads, result.queries, adversary.seed_counts)


ADVERSARY_KINDS = {
    "null": "never manipulates",
    "mirror": "erases the mirror position of each query (inputs of even length)",
    "seed-elim": "erases the t most likely next queries over all seeds consistent with the transcript",
    "greedy-block": "corrupts the queried offset in t other random blocks",
    "symbol-erase": "erases t other occurrences of the symbol just answered",
}


def adversary_factory(name: str, *, x=None, t: int = 0, tester: Optional[SeededTester] = None,
                      struct: Optional[RepetitionStructure] = None, sigma: Optional[int] = None):
    """``factory(rng, witness_seed)`` building a fresh adversary per trial.

    Per-input precomputation happens once, here.
    """
    if name == "null":
        return lambda rng, witness_seed=None: NullAdversary()
    if name == "mirror":
        return lambda rng, witness_seed=None: MirrorAdversary()
    if name == "seed-elim":
        if tester is None:
            raise ValueError("seed-elim needs the tester under attack")
        return lambda rng, witness_seed=None: SeedEliminationAdversary(tester, t, witness_seed=witness_seed)
    if name == "greedy-block":
        if struct is None or sigma is None:
            raise ValueError("greedy-block needs the repetition structure and alphabet size")
        return lambda rng, witness_seed=None: GreedyBlockCorruptor(struct, sigma, rng)
    if name == "symbol-erase":
        if x is None:
            raise ValueError("symbol-erase needs the input")
        index = SymbolIndex(x)
        return lambda rng, witness_seed=None: SymbolEraser(x, rng, index)
    raise ValueError(f"unknown adversary {name!r}; known: {', '.join(ADVERSARY_KINDS)}")
