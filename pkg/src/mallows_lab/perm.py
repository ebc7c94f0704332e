"""Permutations of {1..n} and their deterministic statistics.

A permutation is a 1-D integer array ``p`` whose entry ``p[i-1]`` is the
value pi(i); values run over 1..n. Every function accepts any array-like in
that form and returns numpy arrays, so results drop straight into the
samplers and the exact oracle.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from . import _kernels

__all__ = [
    "as_permutation",
    "identity",
    "reverse",
    "invert",
    "inversion_count",
    "lis_length",
    "lds_length",
    "longest_decreasing_run",
    "induced_ordering",
    "displacement",
    "erdos_szekeres_check",
    "lehmer_rank",
    "format_permutation",
    "parse_permutation",
]


def as_permutation(values, validate: bool = True) -> np.ndarray:
    """Return ``values`` as a contiguous int64 array, checking it is a bijection of 1..n."""
    p = np.ascontiguousarray(values, dtype=np.int64)
    if not validate:
        return p
    if p.ndim != 1 or p.size == 0:
        raise ValueError("a permutation is a non-empty 1-D sequence")
    n = p.size
    if p.min() < 1 or p.max() > n:
        raise ValueError(f"permutation values must lie in 1..{n}")
    if np.bincount(p, minlength=n + 1)[1:].min() != 1:
        raise ValueError("permutation has repeated values")
    return p


def identity(n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be at least 1")
    return np.arange(1, n + 1, dtype=np.int64)


def reverse(p) -> np.ndarray:
    """pi^R(i) = pi(n+1-i)."""
    return as_permutation(p)[::-1].copy()


def invert(p) -> np.ndarray:
    p = as_permutation(p)
    out = np.empty_like(p)
    out[p - 1] = np.arange(1, p.size + 1)
    return out


def inversion_count(p) -> int:
    """Number of pairs i < j with pi(i) > pi(j), by a binary indexed tree."""
    return int(_kernels.inversion_count(as_permutation(p)))


def lis_length(p) -> int:
    """Length of a longest strictly increasing subsequence (patience sorting)."""
    return int(_kernels.lis_length(as_permutation(p)))


def lds_length(p) -> int:
    """Length of a longest strictly decreasing subsequence.

    Patience sorting on the negated values, which is the same as LIS of the
    value-reversed sequence.
    """
    return int(_kernels.lds_length(as_permutation(p)))


def longest_decreasing_run(p) -> int:
    """Largest m with pi(j) > pi(j+1) > ... > pi(j+m-1) for some j."""
    return int(_kernels.longest_decreasing_run(as_permutation(p)))


def _check_indices(indices: Sequence[int], n: int) -> np.ndarray:
    idx = np.asarray(indices, dtype=np.int64)
    if idx.ndim != 1 or idx.size == 0:
        raise ValueError("index sequence must be non-empty")
    if idx.min() < 1 or idx.max() > n:
        raise ValueError(f"indices must lie in 1..{n}")
    if idx.size > 1 and np.any(np.diff(idx) <= 0):
        raise ValueError("index sequence must be strictly increasing")
    return idx


def induced_ordering(p, indices: Sequence[int]) -> np.ndarray:
    """Relative ordering of pi restricted to the increasing index sequence I.

    >>> induced_ordering([3, 1, 4, 2], (1, 2, 4)).tolist()
    [3, 1, 2]
    """
    p = as_permutation(p)
    idx = _check_indices(indices, p.size)
    vals = p[idx - 1]
    out = np.empty(idx.size, dtype=np.int64)
    out[np.argsort(vals, kind="stable")] = np.arange(1, idx.size + 1)
    return out


def displacement(p, i: int) -> int:
    p = as_permutation(p)
    if not 1 <= i <= p.size:
        raise ValueError(f"index {i} outside 1..{p.size}")
    return abs(int(p[i - 1]) - i)


def erdos_szekeres_check(p) -> bool:
    """True iff LIS * LDS >= n, which holds for every permutation."""
    p = as_permutation(p)
    return int(_kernels.lis_length(p)) * int(_kernels.lds_length(p)) >= p.size


def lehmer_rank(p) -> int:
    """Lexicographic rank of pi among all of S_n, starting at 0."""
    p = as_permutation(p)
    n = p.size
    rank = 0
    for i in range(n):
        smaller_after = int(np.count_nonzero(p[i + 1 :] < p[i]))
        rank = rank * (n - i) + smaller_after
    return rank


def lehmer_rank_rows(perms: np.ndarray) -> np.ndarray:
    """Vectorized lexicographic ranks of each row of a 2-D permutation array."""
    perms = np.asarray(perms)
    rows, n = perms.shape
    rank = np.zeros(rows, dtype=np.int64)
    for i in range(n):
        smaller_after = (perms[:, i + 1 :] < perms[:, i : i + 1]).sum(axis=1)
        rank = rank * (n - i) + smaller_after
    return rank


def format_permutation(p) -> str:
    return " ".join(str(int(v)) for v in as_permutation(p))


def parse_permutation(line: str) -> np.ndarray:
    """Inverse of :func:`format_permutation`: ``"3 1 4 2"`` -> array([3, 1, 4, 2])."""
    fields = line.split()
    if not fields:
        raise ValueError("empty permutation line")
    return as_permutation([int(f) for f in fields])
