"""The Mallows measure on S_n and the insertion process that samples it.

The q-process inserts element i at position a_i in {1..i}, drawn from the
truncated geometric law P(a_i = j) proportional to q^(j-1). Its final
permutation p_n has law mu_{n,1/q}, so the reversal of p_n has law
mu_{n,q}. Samplers here always run the process with parameter at most 1
and use reversal for q > 1, which keeps q^i from overflowing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .perm import as_permutation, inversion_count, invert

__all__ = [
    "MallowsParams",
    "ProcessRecord",
    "Q_ONE_TOL",
    "partition_function",
    "log_partition_function",
    "log_pmf",
    "truncated_geometric_pmf",
    "truncated_geometric_sample",
    "run_process",
    "replay_process",
    "sample_mallows",
    "sample_mallows_batch",
    "four_couplings",
]

# below this distance from 1 the q = 1 limits (n!, uniform draws) are used
Q_ONE_TOL = 1e-12


@dataclass(frozen=True)
class MallowsParams:
    n: int
    q: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not (math.isfinite(self.q) and self.q > 0):
            raise ValueError(f"q must be positive and finite, got {self.q!r}")


def _check_q(q: float) -> float:
    q = float(q)
    if not (math.isfinite(q) and q > 0):
        raise ValueError(f"q must be positive and finite, got {q!r}")
    return q


def _is_one(q: float) -> bool:
    return abs(q - 1.0) < Q_ONE_TOL


def _log_q_integer(i, q: float):
    """log((1 - q^i) / (1 - q)) elementwise, stable for q near 1 and large i."""
    i = np.asarray(i, dtype=np.float64)
    if _is_one(q):
        return np.log(i)
    lq = math.log(q)
    if q < 1:
        return np.log(-np.expm1(i * lq)) - math.log(-math.expm1(lq))
    # q^i - 1 = q^i (1 - q^-i)
    return i * lq + np.log(-np.expm1(-i * lq)) - (lq + math.log(-math.expm1(-lq)))


def log_partition_function(n: int, q: float) -> float:
    """log Z_{n,q} = sum_i log((1 - q^i)/(1 - q))."""
    if n < 1:
        raise ValueError("n must be at least 1")
    q = _check_q(q)
    return float(np.sum(_log_q_integer(np.arange(1, n + 1), q)))


def partition_function(n: int, q: float) -> float:
    """Z_{n,q} = prod_{i=1..n} (1 - q^i)/(1 - q); n! when q is within 1e-12 of 1.

    Raises OverflowError when the value is not representable; use
    :func:`log_partition_function` in that case.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    q = _check_q(q)
    if _is_one(q):
        if n > 170:
            raise OverflowError(f"{n}! overflows; use log_partition_function")
        return float(math.factorial(n))
    lq = math.log(q)
    with np.errstate(over="ignore", invalid="ignore"):
        factors = np.expm1(np.arange(1, n + 1) * lq) / math.expm1(lq)
        value = float(np.prod(factors))
    if not math.isfinite(value):
        raise OverflowError(f"Z_{{{n},{q}}} overflows; use log_partition_function")
    return value


def log_pmf(p, q: float) -> float:
    """inv(pi) log q - log Z_{n,q}."""
    p = as_permutation(p)
    q = _check_q(q)
    return inversion_count(p) * math.log(q) - log_partition_function(p.size, q)


def truncated_geometric_pmf(i: int, q: float, j: int) -> float:
    """P(X = j) for X on {1..i} with P(X = j) proportional to q^(j-1)."""
    if i < 1:
        raise ValueError("i must be at least 1")
    q = _check_q(q)
    if not 1 <= j <= i:
        return 0.0
    if _is_one(q):
        return 1.0 / i
    log_p = (j - 1) * math.log(q) - float(_log_q_integer(i, q))
    return math.exp(log_p)


def _truncgeom_from_uniform(u, i, q: float) -> np.ndarray:
    """Inverse-CDF map from U in [0,1) to the truncated geometric on {1..i}.

    ``u`` and ``i`` broadcast against each other. For q > 1 the draw is the
    mirror image i + 1 - X of a draw X with parameter 1/q.
    """
    u = np.asarray(u, dtype=np.float64)
    i = np.asarray(i, dtype=np.int64)
    if _is_one(q):
        j = 1 + np.floor(u * i).astype(np.int64)
        return np.clip(j, 1, i)
    if q > 1:
        return i + 1 - _truncgeom_from_uniform(u, i, 1.0 / q)
    lq = math.log(q)
    x = np.log1p(u * np.expm1(i * lq)) / lq
    j = 1 + np.floor(x).astype(np.int64)
    return np.clip(j, 1, i)


def truncated_geometric_sample(i: int, q: float, rng: np.random.Generator) -> int:
    if i < 1:
        raise ValueError("i must be at least 1")
    q = _check_q(q)
    return int(_truncgeom_from_uniform(rng.random(), i, q))


@dataclass(frozen=True, eq=False)
class ProcessRecord:
    """Insertion positions (a_1..a_n) of one run of the q-process."""

    insertions: np.ndarray
    q: float

    def __post_init__(self):
        a = np.ascontiguousarray(self.insertions, dtype=np.int64)
        if a.ndim != 1 or a.size == 0:
            raise ValueError("insertions must be a non-empty 1-D sequence")
        bad = (a < 1) | (a > np.arange(1, a.size + 1))
        if bad.any():
            k = int(np.flatnonzero(bad)[0]) + 1
            raise ValueError(f"insertion a_{k} = {a[k - 1]} outside 1..{k}")
        object.__setattr__(self, "insertions", a)
        object.__setattr__(self, "q", _check_q(self.q))

    @property
    def n(self) -> int:
        return self.insertions.size

    def __eq__(self, other):
        if not isinstance(other, ProcessRecord):
            return NotImplemented
        return self.q == other.q and np.array_equal(self.insertions, other.insertions)

    def to_line(self) -> str:
        return f"q={self.q!r}; a={','.join(map(str, self.insertions.tolist()))}"

    @classmethod
    def from_line(cls, line: str) -> "ProcessRecord":
        try:
            q_part, a_part = (s.strip() for s in line.strip().split(";"))
            if not (q_part.startswith("q=") and a_part.startswith("a=")):
                raise ValueError
            q = float(q_part[2:])
            a = [int(x) for x in a_part[2:].split(",")]
        except ValueError:
            raise ValueError(f"malformed process record: {line!r}") from None
        return cls(np.array(a), q)


def run_process(n: int, q: float, rng: np.random.Generator) -> ProcessRecord:
    """Draw a_1..a_n independently, a_i from the truncated geometric on {1..i}."""
    if n < 1:
        raise ValueError("n must be at least 1")
    q = _check_q(q)
    a = _truncgeom_from_uniform(rng.random(n), np.arange(1, n + 1), q)
    return ProcessRecord(a, q)


def replay_process(record) -> np.ndarray:
    """The permutation p_n built by the insertion record.

    Accepts a :class:`ProcessRecord` or a bare insertion sequence.

    >>> replay_process([1, 1, 2, 4, 2, 3]).tolist()
    [5, 1, 4, 6, 2, 3]
    """
    if not isinstance(record, ProcessRecord):
        record = ProcessRecord(np.asarray(record), 1.0)
    return _kernels.replay(record.insertions)


def _insertion_rows(n: int, q: float, rows: int, rng: np.random.Generator) -> np.ndarray:
    u = rng.random((rows, n))
    return _truncgeom_from_uniform(u, np.arange(1, n + 1), q)


def sample_mallows_batch(n: int, q: float, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` independent draws from mu_{n,q} as a (count, n) array."""
    if n < 1:
        raise ValueError("n must be at least 1")
    q = _check_q(q)
    q_proc = q if q <= 1 else 1.0 / q
    p = _kernels.replay_rows(_insertion_rows(n, q_proc, count, rng))
    if q <= 1:
        # p_n has law mu_{n,1/q}; its reversal has law mu_{n,q}
        return np.ascontiguousarray(p[:, ::-1])
    # reverse(sample of mu_{n,1/q}) = reverse(reverse(p_n)) = p_n
    return p


def sample_mallows(n: int, q: float, rng: np.random.Generator) -> np.ndarray:
    """One draw from mu_{n,q}, for any q > 0."""
    return sample_mallows_batch(n, q, 1, rng)[0]


def four_couplings(record: ProcessRecord) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """The four mu_{n,q} permutations built from one q-process run.

    Returns (p^R, (p^R)^-1, (p^-1)^R, ((p^-1)^R)^-1) for p = p_n.
    """
    p = replay_process(record)
    p_rev = p[::-1].copy()
    p_inv = invert(p)
    p_inv_rev = p_inv[::-1].copy()
    return p_rev, invert(p_rev), p_inv_rev, invert(p_inv_rev)
