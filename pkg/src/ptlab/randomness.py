"""Counted random bits.

Testers draw every random choice from a :class:`CountedBitSource`, so the
number of bits a run consumed is known exactly, and a run can be replayed from
a fixed seed.  Two kinds of source exist:

* a finite seed of ``rbits`` bits (``CountedBitSource.from_seed``), bit ``j``
  of the integer seed being the ``j``-th bit handed out; reading past it raises
  :class:`RandomnessExhausted`;
* a PCG64 stream (``CountedBitSource.stream``) with an optional hard budget.

Per-trial seeds are derived with ``numpy.random.SeedSequence([master, trial])``
so any single trial can be re-run in isolation.
"""
from __future__ import annotations

import numpy as np


class RandomnessExhausted(RuntimeError):
    """A tester asked for more random bits than its budget allows."""


def trial_seed_sequence(master_seed: int, trial: int, stream: int = 0) -> np.random.SeedSequence:
    """Deterministic, independent seed material for one trial.

    ``stream`` separates consumers inside a trial (0: tester bits, 1: adversary,
    2: tester seed for seed-enumerating adversaries).
    """
    return np.random.SeedSequence([master_seed, trial, stream])


def trial_generator(master_seed: int, trial: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(trial_seed_sequence(master_seed, trial, stream)))


class CountedBitSource:
    def __init__(self, words=None, *, seed_value: int | None = None, budget: int | None = None):
        self._words = words
        self._seed_value = seed_value
        self.budget = budget
        self.bits_consumed = 0
        self._buffer = 0
        self._buffered = 0

    @classmethod
    def from_seed(cls, seed: int, rbits: int) -> "CountedBitSource":
        if not 0 <= seed < (1 << rbits):
            raise ValueError(f"seed {seed} does not fit in {rbits} bits")
        return cls(seed_value=seed, budget=rbits)

    @classmethod
    def stream(cls, seed, budget: int | None = None) -> "CountedBitSource":
        """Bits from a PCG64 stream; ``seed`` is anything ``SeedSequence`` accepts."""
        if not isinstance(seed, np.random.SeedSequence):
            seed = np.random.SeedSequence(seed)
        return cls(np.random.PCG64(seed), budget=budget)

    def bit(self) -> int:
        if self.budget is not None and self.bits_consumed >= self.budget:
            raise RandomnessExhausted(f"random bit budget of {self.budget} exhausted")
        if self._seed_value is not None:
            b = (self._seed_value >> self.bits_consumed) & 1
        else:
            if self._buffered == 0:
                self._buffer = int(self._words.random_raw())
                self._buffered = 64
            b = self._buffer & 1
            self._buffer >>= 1
            self._buffered -= 1
        self.bits_consumed += 1
        return b

    def bits(self, k: int) -> int:
        """``k`` fresh bits as an integer, first bit least significant."""
        v = 0
        for j in range(k):
            v |= self.bit() << j
        return v

    def uniform(self, k: int) -> int:
        """Uniform integer in ``[0, k)`` by rejection sampling on ``ceil(log2 k)``-bit chunks.

        Rejected chunks stay counted as consumed.
        """
        if k < 1:
            raise ValueError(f"cannot sample from an empty range (k={k})")
        width = (k - 1).bit_length()
        while True:
            v = self.bits(width)
            if v < k:
                return v
