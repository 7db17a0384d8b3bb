"""Multi-indices with finite support and truncated index sets.

Frequency positions start at 1. The weight of position ``j`` is
``max(j, 1) ** s`` and an index set holds every integer vector supported on
``1..N`` whose weighted norm ``|k|_s`` does not exceed ``K``.
"""

import logging
import math
from functools import lru_cache
from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple, Union

import numpy as np
import numpy.typing as npt

from .exceptions import FKHullIndexSpaceError

logger = logging.getLogger(__name__)

DEFAULT_CAP = 2_000_000

# Relative slack of the inclusion test |k|_s <= K.
INCLUSION_SLACK = 1e-12

IntArray = npt.NDArray[np.int64]
FloatArray = npt.NDArray[np.float64]


def position_weight(j: int, s: float) -> float:
    """Return the weight max(|j|, 1)^s of frequency position j."""
    return float(max(abs(j), 1)) ** s


class MultiIndex:
    """Integer vector with finite support.

    Entries are stored as sorted ``(j, k_j)`` pairs with ``j >= 1`` and
    ``k_j != 0``. The text form is ``"1:2 3:-1"``; the zero index is ``""``.
    """

    __slots__ = ("_entries",)

    def __init__(self, entries: Union[Mapping[int, int], Iterable[Tuple[int, int]]] = ()) -> None:
        items = entries.items() if isinstance(entries, Mapping) else entries
        cleaned: Dict[int, int] = {}
        for j, k in items:
            j, k = int(j), int(k)
            if j < 1:
                raise FKHullIndexSpaceError(f"Frequency positions start at 1, got {j}")
            if j in cleaned:
                raise FKHullIndexSpaceError(f"Duplicate frequency position {j}")
            if k != 0:
                cleaned[j] = k
        self._entries: Tuple[Tuple[int, int], ...] = tuple(sorted(cleaned.items()))

    @classmethod
    def zero(cls) -> "MultiIndex":
        return cls()

    @classmethod
    def unit(cls, j: int, k: int = 1) -> "MultiIndex":
        """Return ``k`` times the j-th unit vector."""
        return cls({j: k})

    @classmethod
    def from_dense(cls, vector: Iterable[int]) -> "MultiIndex":
        """Build from a dense vector whose first entry is position 1."""
        return cls((j, int(k)) for j, k in enumerate(vector, start=1) if int(k) != 0)

    @classmethod
    def parse(cls, text: str) -> "MultiIndex":
        """Parse the ``"j:k_j j:k_j"`` text form. ``""`` and ``"0"`` are the zero index."""
        text = text.strip()
        if text in ("", "0"):
            return cls()
        pairs = []
        for token in text.split():
            head, sep, tail = token.partition(":")
            if not sep:
                raise FKHullIndexSpaceError(f"Malformed multi-index token {token!r}")
            try:
                pairs.append((int(head), int(tail)))
            except ValueError:
                raise FKHullIndexSpaceError(f"Malformed multi-index token {token!r}")
        return cls(pairs)

    @property
    def entries(self) -> Tuple[Tuple[int, int], ...]:
        return self._entries

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(j for j, _ in self._entries)

    @property
    def max_position(self) -> int:
        """Return the largest position in the support, 0 for the zero index."""
        return self._entries[-1][0] if self._entries else 0

    def dense(self, n: int) -> IntArray:
        """Return the dense vector over positions 1..n."""
        if self.max_position > n:
            raise FKHullIndexSpaceError(f"Multi-index {self} does not fit into {n} frequencies")
        out = np.zeros(n, dtype=np.int64)
        for j, k in self._entries:
            out[j - 1] = k
        return out

    def __getitem__(self, j: int) -> int:
        for position, k in self._entries:
            if position == j:
                return k
        return 0

    def __neg__(self) -> "MultiIndex":
        return MultiIndex((j, -k) for j, k in self._entries)

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        merged = dict(self._entries)
        for j, k in other.entries:
            merged[j] = merged.get(j, 0) + k
        return MultiIndex(merged)

    def __sub__(self, other: "MultiIndex") -> "MultiIndex":
        return self + (-other)

    def __bool__(self) -> bool:
        return bool(self._entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultiIndex):
            return NotImplemented
        return self._entries == other._entries

    def __hash__(self) -> int:
        return hash(self._entries)

    def __str__(self) -> str:
        return " ".join(f"{j}:{k}" for j, k in self._entries)

    def __repr__(self) -> str:
        return f"MultiIndex({str(self)!r})"


def norm_s(k: MultiIndex, s: float) -> float:
    """Return |k|_s = sum_j max(j, 1)^s |k_j|."""
    return float(sum(position_weight(j, s) * abs(kj) for j, kj in k.entries))


def norm_1(k: MultiIndex) -> int:
    """Return |k|_1 = sum_j |k_j|."""
    return sum(abs(kj) for _, kj in k.entries)


def _position_weights(n: int, s: float) -> FloatArray:
    return np.array([position_weight(j, s) for j in range(1, n + 1)], dtype=np.float64)


def _reach(budget: float, weight: float) -> int:
    return max(int(math.floor(budget / weight + INCLUSION_SLACK)), 0)


def cardinality(n: int, radius: float, s: float) -> int:
    """Count the members of the truncated index set without building it."""
    weights = _position_weights(n, s)

    @lru_cache(maxsize=None)
    def count(position: int, budget: float) -> int:
        if position == n:
            return 1
        reach = _reach(budget, weights[position])
        if reach == 0:
            # weights grow with the position, nothing further fits
            return 1
        return count(position + 1, budget) + 2 * sum(
            count(position + 1, budget - weights[position] * k) for k in range(1, reach + 1)
        )

    return count(0, float(radius))


class IndexSet:
    """Finite set of multi-indices ``{k : supp k in 1..N, |k|_s <= K}``.

    Members are stored as a dense ``(M, N)`` integer array ordered by weight,
    then lexicographically. Each member also has an integer key in a mixed
    radix wide enough to hold the sum of any two members, so that
    ``key(a + b) = key(a) + key(b) - key(0)``.

    Instances are immutable and shared; build them with :func:`enumerate_indices`.
    """

    def __init__(self, active_count: int, radius: float, weight_exponent: float, vectors: IntArray) -> None:
        self.active_count = active_count
        self.radius = float(radius)
        self.weight_exponent = float(weight_exponent)

        self.position_weights = _position_weights(active_count, weight_exponent)
        self.reach = np.array([_reach(self.radius, w) for w in self.position_weights], dtype=np.int64)
        self.offsets = 2 * self.reach
        bases = [4 * int(r) + 1 for r in self.reach]
        span = 1
        strides = []
        for base in bases:
            strides.append(span)
            span *= base
        if span >= 2**62:
            raise FKHullIndexSpaceError(f"Index set with N={active_count}, K={radius} does not fit 64-bit keys")
        self.bases = np.array(bases, dtype=np.int64)
        self.strides = np.array(strides, dtype=np.int64)
        self.zero_key = int(self.offsets @ self.strides)

        self.vectors = vectors
        self.vectors.setflags(write=False)
        self.weights = np.abs(vectors) @ self.position_weights
        self.norms_1 = np.abs(vectors).sum(axis=1)
        self.keys = self.encode(vectors)
        self._key_order = np.argsort(self.keys, kind="stable")
        self._sorted_keys = self.keys[self._key_order]
        self.neg_positions = self.lookup(2 * self.zero_key - self.keys)
        self.zero_position = int(self.lookup(np.array([self.zero_key], dtype=np.int64))[0])
        for array in (self.weights, self.norms_1, self.keys, self.neg_positions):
            array.setflags(write=False)

    def __len__(self) -> int:
        return int(self.vectors.shape[0])

    def __iter__(self) -> Iterator[MultiIndex]:
        for row in self.vectors:
            yield MultiIndex.from_dense(row)

    def __getitem__(self, position: int) -> MultiIndex:
        return MultiIndex.from_dense(self.vectors[position])

    def __contains__(self, k: object) -> bool:
        return isinstance(k, MultiIndex) and self.position(k) is not None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IndexSet):
            return NotImplemented
        return (self.active_count, self.radius, self.weight_exponent) == (
            other.active_count,
            other.radius,
            other.weight_exponent,
        )

    def __hash__(self) -> int:
        return hash((self.active_count, self.radius, self.weight_exponent))

    def __repr__(self) -> str:
        return (
            f"IndexSet(N={self.active_count}, K={self.radius}, s={self.weight_exponent}, "
            f"members={len(self)})"
        )

    def encode(self, vectors: IntArray) -> IntArray:
        """Return keys of dense vectors with |k_j| <= 2 * reach_j."""
        return (np.asarray(vectors, dtype=np.int64) + self.offsets) @ self.strides

    def decode(self, keys: IntArray) -> IntArray:
        """Return dense vectors of keys produced by :meth:`encode`."""
        keys = np.asarray(keys, dtype=np.int64)
        return (keys[:, None] // self.strides) % self.bases - self.offsets

    def in_key_range(self, vectors: IntArray) -> npt.NDArray[np.bool_]:
        """Return rows that may belong to the set (each |k_j| within reach)."""
        return np.all(np.abs(vectors) <= self.reach, axis=1)

    def lookup(self, keys: IntArray) -> IntArray:
        """Return member positions of keys, -1 where the key is not a member."""
        keys = np.asarray(keys, dtype=np.int64)
        idx = np.searchsorted(self._sorted_keys, keys)
        clipped = np.minimum(idx, len(self) - 1)
        found = self._sorted_keys[clipped] == keys
        return np.where(found, self._key_order[clipped], -1)

    def position(self, k: MultiIndex) -> Optional[int]:
        """Return the position of k, or None when k is not a member."""
        if k.max_position > self.active_count:
            return None
        vector = k.dense(self.active_count)[None, :]
        if not self.in_key_range(vector)[0]:
            return None
        found = int(self.lookup(self.encode(vector))[0])
        return None if found < 0 else found

    def weights_of(self, vectors: IntArray) -> FloatArray:
        """Return |k|_s for arbitrary dense vectors over this set's positions."""
        return np.abs(np.asarray(vectors)) @ self.position_weights

    def widen(self, active_count: int) -> "IndexSet":
        """Return the index set with the same K and s over more frequencies."""
        return enumerate_indices(active_count, self.radius, self.weight_exponent)

    def embed_positions(self, wider: "IndexSet") -> IntArray:
        """Return the position of every member inside a wider index set."""
        if wider.active_count < self.active_count:
            raise FKHullIndexSpaceError("Cannot embed into an index set with fewer frequencies")
        padded = np.zeros((len(self), wider.active_count), dtype=np.int64)
        padded[:, : self.active_count] = self.vectors
        positions = np.full(len(self), -1, dtype=np.int64)
        fits = wider.in_key_range(padded)
        positions[fits] = wider.lookup(wider.encode(padded[fits]))
        return positions


def _generate(n: int, radius: float, weights: FloatArray) -> IntArray:
    rows = np.zeros((1, 0), dtype=np.int64)
    budget = np.array([radius], dtype=np.float64)
    for weight in weights:
        reach = np.maximum(np.floor(budget / weight + INCLUSION_SLACK), 0).astype(np.int64)
        counts = 2 * reach + 1
        parent = np.repeat(np.arange(rows.shape[0]), counts)
        starts = np.cumsum(counts) - counts
        local = np.arange(int(counts.sum())) - np.repeat(starts, counts)
        k = local - np.repeat(reach, counts)
        rows = np.column_stack([rows[parent], k])
        budget = budget[parent] - weight * np.abs(k)
    return rows


@lru_cache(maxsize=32)
def _enumerate_cached(n: int, radius: float, s: float, cap: int) -> IndexSet:
    count = cardinality(n, radius, s)
    if count > cap:
        raise FKHullIndexSpaceError(
            f"Index set N={n}, K={radius}, s={s} would hold {count} members (cap {cap})", cardinality=count
        )
    weights = _position_weights(n, s)
    rows = _generate(n, radius, weights)
    graded = np.round(np.abs(rows) @ weights, 10)
    order = np.lexsort(tuple(rows[:, c] for c in reversed(range(n))) + (graded,))
    logger.debug("Enumerated index set N=%d K=%g s=%g with %d members", n, radius, s, count)
    return IndexSet(n, radius, s, np.ascontiguousarray(rows[order]))


def enumerate_indices(n: int, radius: float, s: float, cap: int = DEFAULT_CAP) -> IndexSet:
    """Return all k supported on 1..n with |k|_s <= radius.

    Members are graded by |k|_s, then ordered lexicographically, so two calls
    give identical orderings. Raises :class:`FKHullIndexSpaceError` carrying
    the would-be cardinality when it exceeds ``cap``.
    """
    if n < 1:
        raise FKHullIndexSpaceError(f"Need at least one frequency, got N={n}")
    if not radius > 0 or not s > 0:
        raise FKHullIndexSpaceError(f"K and s must be positive, got K={radius}, s={s}")
    return _enumerate_cached(int(n), float(radius), float(s), int(cap))
