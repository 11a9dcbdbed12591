"""Exhaustive distance oracle: breadth-first search over the Hamming graph of ``[0, sigma)^n``.

Every string of the cube is a node, members are the sources, and the BFS
level of a node is its Hamming distance to the nearest member.  That is the
brute-force minimum over all members, computed in ``O(sigma^n * n * sigma)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .properties import PropertyDescriptor, get_property

# property instances covered by ``oracle-check``
ORACLE_CHECK_PROPERTIES = (
    "zero-string",
    "distinct-elements:tau=1",
    "distinct-elements:tau=2",
    "distinct-elements:tau=3",
    "ww",
    "ww:sigma=3",
    "sortedness:sigma=2",
    "sortedness:sigma=3",
    "lipschitz:sigma=3",
    "repetition-code:m=1:sigma=3",
    "repetition-code:m=2:sigma=3",
    "repetition-code:m=3:sigma=3",
    "repetition-code:m=5:sigma=3",
    "lift:zero-string:r=2",
    "lift:zero-string:r=3",
    "lift:distinct-elements:tau=1:r=2",
    "lift:ww:r=2",
    "lift:sortedness:sigma=3:r=2",
)


def all_strings(n: int, sigma: int) -> np.ndarray:
    """Every string of ``[0, sigma)^n`` as rows; row ``c`` spells ``c`` in base ``sigma``, first symbol most significant."""
    codes = np.arange(sigma**n, dtype=np.int64)
    powers = sigma ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (codes[:, None] // powers) % sigma


def bfs_distances(members: np.ndarray, n: int, sigma: int) -> np.ndarray:
    """Hamming distance (in cells) from every string to the nearest member; -1 if there is none."""
    size = sigma**n
    dist = np.full(size, -1, dtype=np.int64)
    frontier = np.flatnonzero(members)
    dist[frontier] = 0
    powers = sigma ** np.arange(n - 1, -1, -1, dtype=np.int64)
    level = 0
    while len(frontier):
        level += 1
        nxt = []
        for j, p in enumerate(powers):
            digit = (frontier // p) % sigma
            for delta in range(1, sigma):
                nxt.append(frontier + (((digit + delta) % sigma) - digit) * p)
        cand = np.unique(np.concatenate(nxt)) if nxt else np.empty(0, dtype=np.int64)
        cand = cand[dist[cand] < 0]
        dist[cand] = level
        frontier = cand
    return dist


@dataclass
class OracleCheckResult:
    prop: str
    n: int
    sigma: int
    strings: int
    mismatches: int
    first_mismatch: tuple | None = None


def check_property(prop: PropertyDescriptor, n: int, sigma: int) -> OracleCheckResult:
    strings = all_strings(n, sigma)
    members = np.array([bool(prop.contains(s)) for s in strings])
    dist = bfs_distances(members, n, sigma)
    mismatches = 0
    first = None
    for s, d in zip(strings, dist):
        got = prop.distance(s)
        expected = Fraction(int(d), n) if d >= 0 else None
        if got != expected:
            mismatches += 1
            if first is None:
                first = (tuple(int(v) for v in s), got, expected)
    return OracleCheckResult(prop.name, n, sigma, len(strings), mismatches, first)


def oracle_check(n_max: int, sigma_max: int, properties=ORACLE_CHECK_PROPERTIES):
    """Compare every exact distance oracle against BFS on all strings with n <= n_max.

    Strings are enumerated over ``[0, s)`` for every ``s`` from 2 (or the
    property's alphabet, if smaller) up to ``min(sigma_max, alphabet)``.  For
    the properties here an optimal repair never needs a symbol outside the
    range already present, so distances over the sub-alphabet are the true
    distances.
    """
    for spec in properties:
        prop = get_property(spec)
        for n in range(1, n_max + 1):
            if not prop.valid_length(n):
                continue
            top = min(sigma_max, prop.alphabet(n))
            for sigma in range(min(2, top), top + 1):
                yield check_property(prop, n, sigma)
