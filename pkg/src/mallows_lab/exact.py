"""Brute-force ground truth: mu_{n,q} tabulated over all of S_n.

Tables are stored flat in lexicographic (Lehmer rank) order so two tables
over the same S_n compare entry by entry and export byte-for-byte.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .perm import _check_indices, as_permutation, lehmer_rank, lehmer_rank_rows

__all__ = [
    "MAX_EXACT_N",
    "CapacityError",
    "ExactDistribution",
    "all_permutations",
    "enumerate_distribution",
    "exact_expectation",
    "exact_event_probability",
    "induced_block_distribution",
    "joint_induced_distribution",
    "pushforward",
    "total_variation",
]

MAX_EXACT_N = 10


class CapacityError(ValueError):
    """Raised when an exhaustive table would exceed the S_10 cap."""


@lru_cache(maxsize=None)
def _perm_table(n: int) -> np.ndarray:
    if n == 1:
        return np.ones((1, 1), dtype=np.int8)
    sub = _perm_table(n - 1)
    parts = []
    for first in range(1, n + 1):
        rest = sub + (sub >= first)
        head = np.full((sub.shape[0], 1), first, dtype=np.int8)
        parts.append(np.hstack([head, rest.astype(np.int8)]))
    table = np.vstack(parts)
    table.setflags(write=False)
    return table


def all_permutations(n: int) -> np.ndarray:
    """All of S_n in lexicographic order as an (n!, n) int8 array (read-only)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if n > MAX_EXACT_N:
        raise CapacityError(f"exhaustive tables are capped at n <= {MAX_EXACT_N}")
    return _perm_table(n)


@lru_cache(maxsize=None)
def _inversions(n: int) -> np.ndarray:
    perms = all_permutations(n)
    inv = np.zeros(perms.shape[0], dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            inv += perms[:, i] > perms[:, j]
    inv.setflags(write=False)
    return inv


@dataclass(frozen=True, eq=False)
class ExactDistribution:
    """Probabilities of every permutation of S_n, indexed by Lehmer rank.

    ``q`` is the Mallows parameter the table came from; pushforwards keep
    the parent's q for bookkeeping only.
    """

    n: int
    q: float
    probs: np.ndarray
    log_z: float = field(default=float("nan"))

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.shape != (math.factorial(self.n),):
            raise ValueError(f"table for S_{self.n} needs {math.factorial(self.n)} entries")
        object.__setattr__(self, "probs", probs)

    @property
    def perms(self) -> np.ndarray:
        return all_permutations(self.n)

    @property
    def inversions(self) -> np.ndarray:
        return _inversions(self.n)

    def prob(self, p) -> float:
        p = as_permutation(p)
        if p.size != self.n:
            raise ValueError(f"expected a permutation of length {self.n}")
        return float(self.probs[lehmer_rank(p)])

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return {tuple(int(v) for v in row): float(pr) for row, pr in zip(self.perms, self.probs)}

    def to_csv(self) -> str:
        """CSV with columns perm, inv, prob, one row per permutation in rank order."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["perm", "inv", "prob"])
        for row, inv, pr in zip(self.perms, self.inversions, self.probs):
            w.writerow([" ".join(map(str, row.tolist())), int(inv), repr(float(pr))])
        return buf.getvalue()


def enumerate_distribution(n: int, q: float) -> ExactDistribution:
    """mu_{n,q} over all of S_n, computed in log space and normalized by max-subtraction."""
    if q <= 0 or not math.isfinite(q):
        raise ValueError(f"q must be positive and finite, got {q!r}")
    all_permutations(n)  # enforces the cap
    log_w = _inversions(n) * math.log(q)
    top = log_w.max()
    w = np.exp(log_w - top)
    total = w.sum()
    return ExactDistribution(n, float(q), w / total, log_z=float(top + math.log(total)))


def exact_expectation(
    dist: ExactDistribution,
    statistic: Callable,
    vectorized: bool = False,
) -> float:
    """Sum over S_n of statistic(pi) * P(pi).

    With ``vectorized=True`` the statistic receives the whole (n!, n) table
    and must return one value per row.
    """
    perms = dist.perms
    if vectorized:
        values = np.asarray(statistic(perms.astype(np.int64)), dtype=np.float64)
    else:
        values = np.fromiter(
            (statistic(row) for row in perms.astype(np.int64)), dtype=np.float64, count=perms.shape[0]
        )
    return float(values @ dist.probs)


def exact_event_probability(
    dist: ExactDistribution,
    predicate: Callable,
    vectorized: bool = False,
) -> float:
    p = exact_expectation(dist, lambda x: np.asarray(predicate(x), dtype=np.float64), vectorized)
    return min(1.0, max(0.0, p))


def _induced_ranks(perms: np.ndarray, indices: np.ndarray) -> np.ndarray:
    sub = perms[:, indices - 1].astype(np.int64)
    ranks = np.empty_like(sub)
    order = np.argsort(sub, axis=1, kind="stable")
    np.put_along_axis(ranks, order, np.arange(1, sub.shape[1] + 1)[None, :], axis=1)
    return lehmer_rank_rows(ranks)


def pushforward(dist: ExactDistribution, transform: Callable[[np.ndarray], np.ndarray]) -> ExactDistribution:
    """Law of transform(pi) for pi ~ dist; ``transform`` maps S_n to S_n."""
    perms = dist.perms.astype(np.int64)
    images = np.array([as_permutation(transform(row)) for row in perms])
    out = np.zeros_like(dist.probs)
    np.add.at(out, lehmer_rank_rows(images), dist.probs)
    return ExactDistribution(dist.n, dist.q, out)


def induced_block_distribution(dist: ExactDistribution, indices: Sequence[int]) -> ExactDistribution:
    """Law of the induced ordering pi_I under dist, as a table over S_|I|."""
    idx = _check_indices(indices, dist.n)
    ranks = _induced_ranks(dist.perms, idx)
    probs = np.bincount(ranks, weights=dist.probs, minlength=math.factorial(idx.size))
    return ExactDistribution(idx.size, dist.q, probs)


def joint_induced_distribution(
    dist: ExactDistribution, first: Sequence[int], second: Sequence[int]
) -> np.ndarray:
    """Joint law of (pi_I, pi_I') as an (|I|!, |I'|!) table; needs max(I) < min(I')."""
    a = _check_indices(first, dist.n)
    b = _check_indices(second, dist.n)
    if a.max() >= b.min():
        raise ValueError("index sequences must satisfy max(I) < min(I')")
    ra = _induced_ranks(dist.perms, a)
    rb = _induced_ranks(dist.perms, b)
    ka, kb = math.factorial(a.size), math.factorial(b.size)
    joint = np.bincount(ra * kb + rb, weights=dist.probs, minlength=ka * kb)
    return joint.reshape(ka, kb)


def _as_table(x) -> np.ndarray:
    if isinstance(x, ExactDistribution):
        return x.probs
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("expected a 1-D probability table")
    return arr


def total_variation(a, b) -> float:
    """Half the L1 distance between two tables over the same S_n.

    Either side may be an :class:`ExactDistribution` or a 1-D array in rank
    order; raw count histograms are normalized first.
    """
    pa, pb = _as_table(a), _as_table(b)
    if pa.shape != pb.shape:
        raise ValueError(f"domain mismatch: {pa.size} vs {pb.size} entries")
    pa = pa / pa.sum()
    pb = pb / pb.sum()
    return float(0.5 * np.abs(pa - pb).sum())
