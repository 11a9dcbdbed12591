"""Query-answer oracles for the standard, offline-erasure and online manipulation models."""
from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional, Protocol, Sequence

import numpy as np

from .strings import Cell, StringLike, as_fraction, as_string


class Mode(str, Enum):
    STANDARD = "standard"
    OFFLINE_ERASE = "offline-erase"
    ONLINE_ERASE = "online-erase"
    ONLINE_CORRUPT = "online-corrupt"

    @property
    def online(self) -> bool:
        return self in (Mode.ONLINE_ERASE, Mode.ONLINE_CORRUPT)


class AdversaryViolation(RuntimeError):
    """An adversary returned manipulations outside its budget or mode."""


class SessionClosed(RuntimeError):
    pass


Manipulation = tuple[int, Cell]


class Adversary(Protocol):
    def step(self, session: "OracleSession") -> Sequence[Manipulation]: ...


@dataclass(frozen=True)
class TranscriptEntry:
    index: int
    answer: Cell
    manipulations: tuple[Manipulation, ...] = ()

    def to_json(self) -> str:
        return json.dumps(
            {"index": self.index, "answer": self.answer, "manipulations": [list(m) for m in self.manipulations]}
        )


@dataclass(frozen=True)
class ErasedString:
    """A string with a fixed set of erased cells (at most an ``alpha`` fraction)."""

    pristine: np.ndarray
    erased: frozenset[int]
    alpha: Fraction

    @property
    def n(self) -> int:
        return len(self.pristine)

    @property
    def erased_fraction(self) -> Fraction:
        return Fraction(len(self.erased), self.n)

    @property
    def cells(self) -> list[Cell]:
        out: list[Cell] = self.pristine.tolist()
        for i in self.erased:
            out[i] = None
        return out

    def nonerased(self) -> np.ndarray:
        mask = np.ones(self.n, dtype=bool)
        mask[list(self.erased)] = False
        return self.pristine[mask]


def make_offline_erased(x: StringLike, erased_indices: Iterable[int], alpha) -> ErasedString:
    x = as_string(x)
    alpha = as_fraction(alpha)
    erased = frozenset(int(i) for i in erased_indices)
    if any(not 0 <= i < len(x) for i in erased):
        raise IndexError("erased index out of range")
    if len(erased) > alpha * len(x):
        raise ValueError(f"{len(erased)} erasures exceed alpha*n = {alpha * len(x)}")
    return ErasedString(x, erased, alpha)


def rarest_symbol_erasures(x: StringLike, alpha) -> list[int]:
    """Erase the cells of the least frequent symbols first, up to ``floor(alpha n)`` cells."""
    x = as_string(x)
    budget = int(as_fraction(alpha) * len(x))
    values, counts = np.unique(x, return_counts=True)
    rank = np.empty(values.max() + 1 if len(values) else 0, dtype=np.int64)
    # stable: rarer symbols first, then smaller symbol value
    order = np.lexsort((values, counts))
    rank[values[order]] = np.arange(len(values))
    by_rarity = np.lexsort((np.arange(len(x)), rank[x]))
    return sorted(by_rarity[:budget].tolist())


def random_erasures(x: StringLike, alpha, rng: np.random.Generator) -> list[int]:
    n = len(as_string(x))
    budget = int(as_fraction(alpha) * n)
    return sorted(rng.choice(n, size=budget, replace=False).tolist())


class OracleSession:
    """Answers queries to ``x`` while an adversary manipulates the oracle's view.

    Online adversaries act strictly after each answer and may touch at most
    ``t`` cells per answered query; every returned manipulation consumes budget
    even when it leaves the view unchanged.  The budget law and mode purity are
    checked on every step.
    """

    def __init__(self, x: StringLike, mode: Mode | str = Mode.STANDARD, t: int = 0,
                 adversary: Optional[Adversary] = None, *, erased: Optional[ErasedString] = None,
                 sigma: Optional[int] = None):
        self.pristine = as_string(x)
        self.n = len(self.pristine)
        self.mode = Mode(mode)
        self.t = t
        self.adversary = adversary
        self.sigma = sigma
        if t < 0:
            raise ValueError("manipulation budget must be >= 0")
        if self.mode.online and adversary is None:
            raise ValueError(f"{self.mode.value} sessions need an adversary")
        if not self.mode.online and (t or adversary is not None):
            raise ValueError(f"{self.mode.value} sessions take no online adversary")
        self.overrides: dict[int, Cell] = {}
        if self.mode is Mode.OFFLINE_ERASE:
            if erased is None:
                raise ValueError("offline-erase sessions need an ErasedString")
            if len(erased.pristine) != self.n or not np.array_equal(erased.pristine, self.pristine):
                raise ValueError("erased string does not match the input")
            self.overrides = {i: None for i in erased.erased}
        elif erased is not None:
            raise ValueError("only offline-erase sessions take an ErasedString")
        self.transcript: list[TranscriptEntry] = []
        self.manipulated_count = 0
        self.pristine_reads = 0
        self.erased_seen = 0
        self.corrupted_seen = 0
        self.max_differing = 0
        self._differing = len(self.overrides) if self.mode is Mode.OFFLINE_ERASE else 0
        self.closed = False

    @classmethod
    def offline(cls, erased: ErasedString) -> "OracleSession":
        return cls(erased.pristine, Mode.OFFLINE_ERASE, erased=erased)

    def cell(self, i: int) -> Cell:
        if i in self.overrides:
            return self.overrides[i]
        return int(self.pristine[i])

    @property
    def queries(self) -> int:
        return len(self.transcript)

    @property
    def differing_cells(self) -> int:
        return self._differing

    def query(self, i: int) -> Cell:
        if self.closed:
            raise SessionClosed("session already finalized")
        i = int(i)
        if not 0 <= i < self.n:
            raise IndexError(f"query {i} outside [0, {self.n})")
        if i in self.overrides:
            answer = self.overrides[i]
        else:
            answer = int(self.pristine[i])
            self.pristine_reads += 1
        if answer is None:
            self.erased_seen += 1
        elif answer != self.pristine[i]:
            self.corrupted_seen += 1
        self.transcript.append(TranscriptEntry(i, answer))
        if self.mode.online:
            applied = self._apply(self.adversary.step(self))
            if applied:
                self.transcript[-1] = TranscriptEntry(i, answer, applied)
        return answer

    def _apply(self, manipulations: Sequence[Manipulation]) -> tuple[Manipulation, ...]:
        manipulations = tuple((int(j), v if v is None else int(v)) for j, v in manipulations)
        if len(manipulations) > self.t:
            raise AdversaryViolation(f"{len(manipulations)} manipulations exceed per-query budget {self.t}")
        for j, v in manipulations:
            if not 0 <= j < self.n:
                raise AdversaryViolation(f"manipulated index {j} out of range")
            if self.mode is Mode.ONLINE_ERASE and v is not None:
                raise AdversaryViolation("erasure oracle wrote a symbol")
            if self.mode is Mode.ONLINE_CORRUPT:
                if v is None:
                    raise AdversaryViolation("corruption oracle wrote an erasure")
                if v < 0 or (self.sigma is not None and v >= self.sigma):
                    raise AdversaryViolation(f"corruption wrote {v}, outside the alphabet")
        for j, v in manipulations:
            before = j in self.overrides and self.overrides[j] != self.pristine[j]
            if v is not None and v == self.pristine[j]:
                self.overrides.pop(j, None)
                after = False
            else:
                self.overrides[j] = v
                after = True
            self._differing += int(after) - int(before)
        self.manipulated_count += len(manipulations)
        k = self.queries
        if self.manipulated_count > k * self.t or self._differing > k * self.t:
            raise AdversaryViolation(
                f"budget law broken after {k} queries: {self._differing} cells differ, t={self.t}"
            )
        self.max_differing = max(self.max_differing, self._differing)
        return manipulations

    def finalize(self) -> None:
        self.closed = True

    def transcript_jsonl(self) -> str:
        return "".join(entry.to_json() + "\n" for entry in self.transcript)
