"""String properties with membership tests, exact distance oracles and instance generators.

Each property is packaged as a :class:`PropertyDescriptor`.  Far instances are
only ever handed out after the exact oracle certified their distance
(:func:`sample_far`).
"""
from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .strings import (
    RepetitionStructure,
    StringLike,
    as_fraction,
    as_string,
    concatenate_repetitions,
    distance_to_repetition_code,
)

# |Sigma|^m (or explicit member count) above which lifted distances are not brute forced
MEMBER_ENUMERATION_CAP = 2**20
FAR_RETRIES = 64


class GenerationError(RuntimeError):
    """No instance with a certified distance could be produced."""


class CapabilityError(RuntimeError):
    """The requested computation is outside what this oracle can do exactly."""


def _present(x) -> np.ndarray:
    if isinstance(x, np.ndarray):
        return x
    return np.asarray([v for v in x if v is not None], dtype=np.int64)


# -- tau-distinct-elements ---------------------------------------------------


def distinct_elements_contains(x: StringLike, tau: int) -> bool:
    if tau < 1:
        raise ValueError(f"tau must be >= 1, got {tau}")
    return len(np.unique(_present(x))) <= tau


def distinct_elements_distance(x: StringLike, tau: int) -> Fraction:
    if tau < 1:
        raise ValueError(f"tau must be >= 1, got {tau}")
    x = as_string(x)
    _, counts = np.unique(x, return_counts=True)
    kept = int(np.sort(counts)[::-1][:tau].sum())
    return Fraction(len(x) - kept, len(x))


def distinct_elements_completion_distance(cells: Sequence, tau: int) -> Fraction:
    """Distance of the closest completion of a partially erased string.

    Filling every erased cell with one of the kept symbols is optimal, so only
    the non-erased cells outside the ``tau`` most frequent non-erased symbols
    have to change.
    """
    n = len(cells)
    present = _present(cells)
    if len(present) == 0:
        return Fraction(0)
    _, counts = np.unique(present, return_counts=True)
    kept = int(np.sort(counts)[::-1][:tau].sum())
    return Fraction(len(present) - kept, n)


# -- {ww} ----------------------------------------------------------------------


def _halves(x: StringLike) -> tuple[np.ndarray, np.ndarray]:
    x = as_string(x)
    if len(x) % 2:
        raise ValueError(f"ww strings have even length, got {len(x)}")
    k = len(x) // 2
    return x[:k], x[k:]


def ww_contains(x: StringLike) -> bool:
    a, b = _halves(x)
    return bool(np.array_equal(a, b))


def ww_distance(x: StringLike) -> Fraction:
    a, b = _halves(x)
    return Fraction(int(np.count_nonzero(a != b)), 2 * len(a))


def ww_partner(p: int, n: int) -> int:
    """The position mirrored with ``p`` in a length-``n`` string (0-based)."""
    k = n // 2
    return p + k if p < k else p - k


# -- sortedness / Lipschitz ------------------------------------------------------


def sortedness_contains(x: StringLike) -> bool:
    x = as_string(x)
    return bool(np.all(x[:-1] <= x[1:]))


def longest_nondecreasing_subsequence(x: StringLike) -> int:
    tails: list[int] = []
    for v in as_string(x).tolist():
        k = bisect.bisect_right(tails, v)
        if k == len(tails):
            tails.append(v)
        else:
            tails[k] = v
    return len(tails)


def sortedness_distance(x: StringLike) -> Fraction:
    x = as_string(x)
    return 1 - Fraction(longest_nondecreasing_subsequence(x), len(x))


def lipschitz_contains(x: StringLike) -> bool:
    x = as_string(x)
    return bool(np.all(np.abs(np.diff(x)) <= 1))


def lipschitz_distance(x: StringLike, sigma: int = 3) -> Fraction:
    """Fewest changes turning ``x`` into a string over ``[0, sigma)`` with adjacent values at most 1 apart."""
    x = as_string(x).tolist()
    inf = len(x) + 1
    cost = [int(x[0] != v) for v in range(sigma)]
    for xi in x[1:]:
        cost = [
            min(cost[u] for u in range(max(0, v - 1), min(sigma, v + 2))) + (xi != v)
            for v in range(sigma)
        ]
    best = min(cost) if cost else inf
    return Fraction(best, len(x))


# -- zero string -----------------------------------------------------------------


def zero_string_contains(x: StringLike) -> bool:
    return not np.any(as_string(x))


def zero_string_distance(x: StringLike) -> Fraction:
    x = as_string(x)
    return Fraction(int(np.count_nonzero(x)), len(x))


# -- descriptors -------------------------------------------------------------------


@dataclass(frozen=True)
class PropertyDescriptor:
    """One property: membership, exact distance and instance generators.

    ``far_candidate`` proposes instances that are *meant* to be far; callers go
    through :func:`sample_far`, which certifies them.  ``members`` optionally
    enumerates all members of a given length when that is cheaper than
    filtering ``Sigma^n``.
    """

    name: str
    alphabet: Callable[[int], int]
    contains: Callable[[np.ndarray], bool]
    distance: Callable[[np.ndarray], Fraction]
    member: Callable[[int, np.random.Generator], np.ndarray]
    far_candidate: Callable[[int, Fraction, np.random.Generator], np.ndarray]
    valid_length: Callable[[int], bool] = lambda n: n >= 1
    members: Optional[Callable[[int], Iterable[np.ndarray]]] = None
    completion_distance: Optional[Callable[[Sequence], Fraction]] = None
    params: dict = field(default_factory=dict, compare=False)

    def check_length(self, n: int) -> None:
        if not self.valid_length(n):
            raise ValueError(f"{self.name} is not defined for length {n}")


def sample_member(prop: PropertyDescriptor, n: int, rng: np.random.Generator) -> np.ndarray:
    prop.check_length(n)
    y = as_string(prop.member(n, rng))
    if not prop.contains(y):
        raise GenerationError(f"{prop.name}: member generator produced a non-member")
    return y


def sample_far(prop: PropertyDescriptor, n: int, eps, rng: np.random.Generator,
               retries: int = FAR_RETRIES) -> np.ndarray:
    """An instance whose exact distance to ``prop`` is at least ``eps``."""
    eps = as_fraction(eps)
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    prop.check_length(n)
    best = None
    for _ in range(retries):
        z = as_string(prop.far_candidate(n, eps, rng))
        d = prop.distance(z)
        if d >= eps:
            return z
        best = d if best is None else max(best, d)
    raise GenerationError(
        f"{prop.name}: no {eps}-far instance of length {n} after {retries} attempts (best {best})"
    )


def _all_strings(n: int, sigma: int) -> np.ndarray:
    return np.array(list(itertools.product(range(sigma), repeat=n)), dtype=np.int64).reshape(-1, n)


def _zero_string() -> PropertyDescriptor:
    def far(n, eps, rng):
        z = np.zeros(n, dtype=np.int64)
        z[rng.choice(n, size=min(n, -(-eps.numerator * n // eps.denominator)), replace=False)] = 1
        return z

    return PropertyDescriptor(
        name="zero-string",
        alphabet=lambda n: 2,
        contains=zero_string_contains,
        distance=zero_string_distance,
        member=lambda n, rng: np.zeros(n, dtype=np.int64),
        far_candidate=far,
        members=lambda n: [np.zeros(n, dtype=np.int64)],
        completion_distance=lambda cells: Fraction(sum(1 for v in cells if v), len(cells)),
    )


def _distinct_elements(tau: int) -> PropertyDescriptor:
    if tau < 1:
        raise ValueError(f"tau must be >= 1, got {tau}")

    def member(n, rng):
        symbols = rng.choice(n, size=min(tau, n), replace=False)
        return rng.choice(symbols, size=n)

    def far(n, eps, rng):
        # ceil(eps n) singleton symbols plus up to tau heavy symbols sharing the rest
        light = min(n, -(-eps.numerator * n // eps.denominator))
        heavy = min(tau, n - light)
        symbols = rng.permutation(n)[: heavy + light]
        z = np.empty(n, dtype=np.int64)
        z[:light] = symbols[heavy:]
        if heavy:
            z[light:] = symbols[np.arange(n - light) % heavy]
        return rng.permutation(z)

    return PropertyDescriptor(
        name=f"distinct-elements:tau={tau}",
        alphabet=lambda n: n,
        contains=lambda x: distinct_elements_contains(x, tau),
        distance=lambda x: distinct_elements_distance(x, tau),
        member=member,
        far_candidate=far,
        completion_distance=lambda cells: distinct_elements_completion_distance(cells, tau),
        params={"tau": tau},
    )


def _ww(sigma: int = 2) -> PropertyDescriptor:
    def member(n, rng):
        w = rng.integers(0, sigma, size=n // 2)
        return np.concatenate([w, w])

    def far(n, eps, rng):
        k = n // 2
        flips = -(-eps.numerator * n // eps.denominator)
        if flips > k:
            raise GenerationError(f"ww distance never exceeds 1/2, asked for {eps}")
        w = rng.integers(0, sigma, size=k)
        second = w.copy()
        idx = rng.choice(k, size=flips, replace=False)
        second[idx] = (second[idx] + rng.integers(1, sigma, size=flips)) % sigma
        return np.concatenate([w, second])

    return PropertyDescriptor(
        name="ww" if sigma == 2 else f"ww:sigma={sigma}",
        alphabet=lambda n: sigma,
        contains=ww_contains,
        distance=ww_distance,
        member=member,
        far_candidate=far,
        valid_length=lambda n: n >= 2 and n % 2 == 0,
        params={"sigma": sigma},
    )


def _sortedness(sigma: int = 3) -> PropertyDescriptor:
    return PropertyDescriptor(
        name=f"sortedness:sigma={sigma}",
        alphabet=lambda n: sigma,
        contains=sortedness_contains,
        distance=sortedness_distance,
        member=lambda n, rng: np.sort(rng.integers(0, sigma, size=n)),
        far_candidate=lambda n, eps, rng: rng.integers(0, sigma, size=n),
        params={"sigma": sigma},
    )


def _lipschitz(sigma: int = 3) -> PropertyDescriptor:
    def member(n, rng):
        steps = rng.integers(-1, 2, size=n)
        out = np.empty(n, dtype=np.int64)
        v = int(rng.integers(0, sigma))
        for i in range(n):
            v = min(sigma - 1, max(0, v + int(steps[i]))) if i else v
            out[i] = v
        return out

    return PropertyDescriptor(
        name=f"lipschitz:sigma={sigma}",
        alphabet=lambda n: sigma,
        contains=lipschitz_contains,
        distance=lambda x: lipschitz_distance(x, sigma),
        member=member,
        far_candidate=lambda n, eps, rng: rng.integers(0, sigma, size=n),
        params={"sigma": sigma},
    )


def _repetition_code(m: int, sigma: int = 2) -> PropertyDescriptor:
    def struct(n):
        return RepetitionStructure(m, n // m)

    def far(n, eps, rng):
        # Split as few columns as possible evenly between two symbols: this is
        # the instance at distance ~eps that RepTest accepts most often.
        r = n // m
        minority = r // 2
        if sigma < 2 or minority == 0:
            return rng.integers(0, sigma, size=n)
        columns = -(-eps.numerator * n // (eps.denominator * minority))
        if columns > m:
            return rng.integers(0, sigma, size=n)
        w = rng.integers(0, sigma, size=m)
        blocks = np.tile(w, (r, 1))
        for mu in rng.choice(m, size=columns, replace=False):
            rows = rng.choice(r, size=minority, replace=False)
            blocks[rows, mu] = (w[mu] + 1) % sigma
        return blocks.reshape(-1)

    return PropertyDescriptor(
        name=f"repetition-code:m={m}:sigma={sigma}",
        alphabet=lambda n: sigma,
        contains=lambda s: distance_to_repetition_code(s, struct(len(s))) == 0,
        distance=lambda s: distance_to_repetition_code(s, struct(len(s))),
        member=lambda n, rng: concatenate_repetitions(rng.integers(0, sigma, size=m), n // m),
        far_candidate=far,
        valid_length=lambda n: n >= m and n % m == 0,
        params={"m": m, "sigma": sigma},
    )


@dataclass(frozen=True)
class LiftedProperty:
    """``{w^r : w in base}``."""

    base: PropertyDescriptor
    r: int

    def structure(self, n: int) -> RepetitionStructure:
        if n % self.r:
            raise ValueError(f"length {n} is not a multiple of r={self.r}")
        return RepetitionStructure(n // self.r, self.r)

    def contains(self, s: StringLike) -> bool:
        s = as_string(s)
        struct = self.structure(len(s))
        if distance_to_repetition_code(s, struct) != 0:
            return False
        return bool(self.base.contains(s[: struct.m]))

    def distance(self, s: StringLike) -> Fraction:
        return lifted_distance(s, self)


@lru_cache(maxsize=64)
def _base_members(base: PropertyDescriptor, m: int) -> np.ndarray:
    if base.members is not None:
        rows = []
        for w in base.members(m):
            rows.append(as_string(w))
            if len(rows) > MEMBER_ENUMERATION_CAP:
                break
        else:
            return np.array(rows, dtype=np.int64).reshape(-1, m)
        raise CapabilityError(f"{base.name} has more than {MEMBER_ENUMERATION_CAP} members at length {m}")
    sigma = base.alphabet(m)
    if sigma**m > MEMBER_ENUMERATION_CAP:
        raise CapabilityError(
            f"brute force over {sigma}^{m} strings exceeds the cap of {MEMBER_ENUMERATION_CAP}; "
            "use generator-certified instances instead"
        )
    every = _all_strings(m, sigma)
    keep = np.array([base.contains(w) for w in every], dtype=bool)
    return every[keep]


def lifted_distance(s: StringLike, lifted: LiftedProperty) -> Fraction:
    """Exact distance from ``s`` to the lifted property.

    Codewords ``x^r`` are answered by the identity dist(x^r, P^r) = dist(x, P);
    other strings by minimising over every base member of length ``m``.
    """
    s = as_string(s)
    struct = lifted.structure(len(s))
    blocks = struct.blocks(s)
    if np.all(blocks == blocks[0]):
        return lifted.base.distance(blocks[0].copy())
    members = _base_members(lifted.base, struct.m)
    if len(members) == 0:
        raise CapabilityError(f"{lifted.base.name} has no members of length {struct.m}")
    sigma = max(int(members.max()) + 1, 1)
    counts = np.stack([(blocks == v).sum(axis=0) for v in range(sigma)])
    matches = counts[members, np.arange(struct.m)].sum(axis=1)
    return Fraction(struct.n - int(matches.max()), struct.n)


def _lifted(base: PropertyDescriptor, r: int) -> PropertyDescriptor:
    lifted = LiftedProperty(base, r)

    def member(n, rng):
        return concatenate_repetitions(sample_member(base, n // r, rng), r)

    def far(n, eps, rng):
        # a certified far base block, repeated: distance carries over exactly
        return concatenate_repetitions(sample_far(base, n // r, eps, rng), r)

    return PropertyDescriptor(
        name=f"lift:{base.name}:r={r}",
        alphabet=lambda n: base.alphabet(n // r),
        contains=lifted.contains,
        distance=lifted.distance,
        member=member,
        far_candidate=far,
        valid_length=lambda n: n % r == 0 and base.valid_length(n // r),
        params={"base": base.name, "r": r, "lifted": lifted},
    )


# -- registry ------------------------------------------------------------------------

PROPERTY_KINDS = {
    "zero-string": "binary strings that are all zeros",
    "distinct-elements:tau=T": "strings over [n] with at most T distinct symbols",
    "ww[:sigma=S]": "strings of the form ww",
    "sortedness[:sigma=S]": "non-decreasing strings over [0, S) (default S=3)",
    "lipschitz[:sigma=S]": "strings over [0, S) whose neighbours differ by at most 1 (default S=3)",
    "repetition-code:m=M[:sigma=S]": "strings w^r with |w| = M",
    "lift:<property>:r=R": "the property repeated R times",
}


def _parse_params(tokens: Sequence[str]) -> dict[str, int]:
    out = {}
    for tok in tokens:
        key, sep, value = tok.partition("=")
        if not sep:
            raise ValueError(f"expected key=value, got {tok!r}")
        out[key.strip()] = int(value)
    return out


def get_property(spec: str) -> PropertyDescriptor:
    """Build a property from its registry name, e.g. ``"lift:zero-string:r=1000"``."""
    return _get_property(spec.strip())


@lru_cache(maxsize=None)
def _get_property(spec: str) -> PropertyDescriptor:
    if spec.startswith("lift:"):
        inner, _, last = spec[len("lift:"):].rpartition(":")
        params = _parse_params([last])
        if "r" not in params or not inner:
            raise ValueError(f"lifted property needs a base and r=..., got {spec!r}")
        return _lifted(_get_property(inner), params["r"])
    kind, *rest = spec.split(":")
    params = _parse_params(rest)
    try:
        if kind == "zero-string":
            return _zero_string(**params)
        if kind == "distinct-elements":
            return _distinct_elements(**params)
        if kind == "ww":
            return _ww(**params)
        if kind == "sortedness":
            return _sortedness(**params)
        if kind == "lipschitz":
            return _lipschitz(**params)
        if kind == "repetition-code":
            return _repetition_code(**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {kind!r}: {exc}") from None
    raise ValueError(f"unknown property {spec!r}; known kinds: {', '.join(PROPERTY_KINDS)}")


def exact_distance(prop: PropertyDescriptor, x: StringLike) -> Fraction:
    x = as_string(x)
    prop.check_length(len(x))
    return prop.distance(x)
