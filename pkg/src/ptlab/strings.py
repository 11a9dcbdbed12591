"""Strings over dense integer alphabets, repetition structure and exact Hamming distances.

Indices are 0-based throughout the package. A symbol is an integer in
``[0, sigma)``; an erased cell is represented by ``None`` wherever single cells
are exchanged (oracle answers, transcripts).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

Cell = Optional[int]
ERASED: Cell = None

StringLike = Union[Sequence[int], np.ndarray]


def as_string(x: StringLike) -> np.ndarray:
    """Return ``x`` as a 1-D int64 array (no copy when it already is one)."""
    arr = np.asarray(x, dtype=np.int64)
    if arr.ndim != 1:
        raise ValueError(f"strings are 1-D, got shape {arr.shape}")
    return arr


def as_fraction(eps) -> Fraction:
    """Exact value of a proximity parameter; floats go through their shortest repr (0.3 -> 3/10)."""
    if isinstance(eps, (Fraction, int, str)):
        return Fraction(eps)
    return Fraction(repr(float(eps)))


def relative_hamming_distance(x: StringLike, y: StringLike) -> Fraction:
    """Fraction of positions where ``x`` and ``y`` differ, as an exact rational."""
    x, y = as_string(x), as_string(y)
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} != {len(y)}")
    if len(x) == 0:
        raise ValueError("distance is undefined for empty strings")
    return Fraction(int(np.count_nonzero(x != y)), len(x))


def concatenate_repetitions(w: StringLike, r: int) -> np.ndarray:
    """``w`` repeated ``r`` times back to back."""
    if r < 1:
        raise ValueError(f"repetition count must be >= 1, got {r}")
    return np.tile(as_string(w), r)


@dataclass(frozen=True)
class RepetitionStructure:
    """A length ``n = m * r`` string viewed as ``r`` blocks of length ``m``.

    Block ``rho`` in ``[0, r)`` and offset ``mu`` in ``[0, m)`` address global
    index ``rho * m + mu``.
    """

    m: int
    r: int

    def __post_init__(self):
        if self.m < 1 or self.r < 1:
            raise ValueError(f"block length and repetition count must be >= 1, got m={self.m}, r={self.r}")

    @property
    def n(self) -> int:
        return self.m * self.r

    def index(self, rho: int, mu: int) -> int:
        if not (0 <= rho < self.r and 0 <= mu < self.m):
            raise IndexError(f"(rho={rho}, mu={mu}) outside {self.r} blocks of length {self.m}")
        return rho * self.m + mu

    def split(self, i: int) -> tuple[int, int]:
        if not 0 <= i < self.n:
            raise IndexError(f"index {i} outside [0, {self.n})")
        return divmod(i, self.m)

    def blocks(self, s: StringLike) -> np.ndarray:
        """``s`` reshaped to an ``(r, m)`` array; row ``rho`` is block ``rho``."""
        s = as_string(s)
        if len(s) != self.n:
            raise ValueError(f"expected length {self.n} = {self.m}*{self.r}, got {len(s)}")
        return s.reshape(self.r, self.m)


def _column_counts(blocks: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-column (plurality symbol, its count); ties go to the smallest symbol."""
    r, m = blocks.shape
    sigma = int(blocks.max()) + 1 if blocks.size else 1
    if sigma <= 64:
        counts = np.stack([(blocks == v).sum(axis=0) for v in range(sigma)])
        # argmax returns the first maximum, i.e. the lowest symbol on ties
        winners = counts.argmax(axis=0)
        return winners, counts[winners, np.arange(m)]
    winners = np.empty(m, dtype=np.int64)
    best = np.empty(m, dtype=np.int64)
    for mu in range(m):
        values, cnt = np.unique(blocks[:, mu], return_counts=True)
        k = int(cnt.argmax())
        winners[mu], best[mu] = values[k], cnt[k]
    return winners, best


def plurality_decode(s: StringLike, struct: RepetitionStructure) -> np.ndarray:
    """Most frequent symbol of every column across the ``r`` blocks (lowest symbol wins ties)."""
    winners, _ = _column_counts(struct.blocks(s))
    return winners.astype(np.int64)


def distance_to_repetition_code(s: StringLike, struct: RepetitionStructure) -> Fraction:
    """Exact distance from ``s`` to the nearest ``w^r``; the plurality decoding attains it."""
    _, best = _column_counts(struct.blocks(s))
    return Fraction(struct.n - int(best.sum()), struct.n)
