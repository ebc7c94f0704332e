"""Seeded Monte Carlo estimation over mu_{n,q} plus executable versions of
the constructive arguments (block decomposition, greedy window, bounded
differences, insertion monotonicity).

All samplers draw in fixed-size blocks keyed by :class:`~mallows_lab.rng.SeedSpec`
and reduce in block order, so results do not depend on ``workers``. Every
permutation drawn here is checked against LIS * LDS >= n.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import stats

from . import _kernels
from .bounds import ell_beta
from .exact import ExactDistribution, all_permutations, enumerate_distribution, total_variation
from .model import MallowsParams, ProcessRecord, _insertion_rows, replay_process, sample_mallows_batch
from .perm import induced_ordering, lehmer_rank_rows, lis_length
from .rng import SeedSpec, blocks

__all__ = [
    "Estimate",
    "TailEstimate",
    "PropertyViolation",
    "ErdosSzekeresViolation",
    "GoodnessOfFit",
    "BlockDecomposition",
    "MuellerStarrResult",
    "collect",
    "estimate_statistic",
    "estimate_tails",
    "goodness_of_fit",
    "oracle_sampler",
    "block_decomposition",
    "greedy_window_stopping_times",
    "greedy_window_subsequence",
    "bounded_difference_experiment",
    "monotonicity_experiment",
    "mueller_starr_experiment",
]


class PropertyViolation(AssertionError):
    """A deterministic guarantee failed on a concrete permutation."""


class ErdosSzekeresViolation(PropertyViolation):
    pass


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    count: int

    @classmethod
    def from_values(cls, values) -> "Estimate":
        v = np.asarray(values, dtype=np.float64)
        if v.size == 0:
            raise ValueError("no values")
        stderr = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size >= 2 else float("nan")
        return cls(float(v.mean()), stderr, int(v.size))


@dataclass(frozen=True)
class TailEstimate:
    threshold: int
    p_hat: float
    stderr: float
    count: int

    @property
    def hits(self) -> int:
        return round(self.p_hat * self.count)


def _tail(threshold, hits: int, count: int) -> TailEstimate:
    p = hits / count
    return TailEstimate(threshold, p, math.sqrt(p * (1 - p) / count), count)


class SampleBlock:
    """One block of sampled permutations with lazily computed LIS/LDS."""

    def __init__(self, perms: np.ndarray):
        self.perms = perms

    @cached_property
    def lis(self) -> np.ndarray:
        return _kernels.lis_rows(self.perms)

    @cached_property
    def lds(self) -> np.ndarray:
        return _kernels.lds_rows(self.perms)

    def check_erdos_szekeres(self) -> None:
        n = self.perms.shape[1]
        bad = np.flatnonzero(self.lis * self.lds < n)
        if bad.size:
            row = self.perms[bad[0]]
            raise ErdosSzekeresViolation(f"LIS * LDS < n for {row.tolist()}")


def _named_statistic(name: str) -> Callable[[SampleBlock], np.ndarray]:
    if name == "lis":
        return lambda b: b.lis
    if name == "lds":
        return lambda b: b.lds
    if name == "inv":
        return lambda b: _kernels.inv_rows(b.perms)
    if name == "ldr":
        return lambda b: _kernels.ldr_rows(b.perms)
    if name == "not_identity":
        return lambda b: np.any(b.perms != np.arange(1, b.perms.shape[1] + 1), axis=1).astype(np.int64)
    if name.startswith("displacement:"):
        i = int(name.split(":", 1)[1])
        return lambda b: np.abs(b.perms[:, i - 1] - i)
    raise ValueError(f"unknown statistic {name!r}")


def resolve_statistic(statistic) -> Callable[[SampleBlock], np.ndarray]:
    """Turn a statistic name or a per-permutation callable into a block function.

    Names: ``lis``, ``lds``, ``inv``, ``ldr`` (longest decreasing run),
    ``not_identity`` and ``displacement:<i>``.
    """
    if isinstance(statistic, str):
        return _named_statistic(statistic)
    if callable(statistic):
        return lambda b: np.array([statistic(row) for row in b.perms])
    raise TypeError("statistic must be a name or a callable")


def _map_blocks(fn, block_list, workers: int):
    if workers <= 1 or len(block_list) <= 1:
        return [fn(b) for b in block_list]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, block_list))


def collect(
    params: MallowsParams,
    features: Callable[[SampleBlock], np.ndarray],
    count: int,
    seed: SeedSpec,
    workers: int = 1,
) -> np.ndarray:
    """Evaluate ``features`` on ``count`` independent mu_{n,q} samples.

    Rows come back in trial order whatever the worker count.
    """
    if count < 1:
        raise ValueError("count must be positive")

    def run(blk):
        index, _, size = blk
        block = SampleBlock(sample_mallows_batch(params.n, params.q, size, seed.generator(index)))
        block.check_erdos_szekeres()
        return np.asarray(features(block))

    return np.concatenate(_map_blocks(run, blocks(count, params.n), workers))


def estimate_statistic(
    params: MallowsParams,
    statistic,
    count: int,
    seed: SeedSpec,
    workers: int = 1,
) -> Estimate:
    if count < 2:
        raise ValueError("count must be at least 2")
    return Estimate.from_values(collect(params, resolve_statistic(statistic), count, seed, workers))


def tails_from_values(values, thresholds: Sequence[int]) -> list[TailEstimate]:
    values = np.asarray(values)
    return [_tail(t, int(np.count_nonzero(values >= t)), values.size) for t in thresholds]


def estimate_tails(
    params: MallowsParams,
    statistic,
    thresholds: Sequence[int],
    count: int,
    seed: SeedSpec,
    workers: int = 1,
) -> list[TailEstimate]:
    """P(statistic >= t) for each threshold, all from one shared sample set."""
    if not len(thresholds):
        raise ValueError("thresholds must be non-empty")
    values = collect(params, resolve_statistic(statistic), count, seed, workers)
    return tails_from_values(values, thresholds)


# --- goodness of fit -------------------------------------------------------

Sampler = Callable[[int, float, int, np.random.Generator], np.ndarray]


@dataclass(frozen=True)
class GoodnessOfFit:
    tv: float
    chi_square_stat: float
    dof: int
    chi_square_limit: float
    passed: bool


def oracle_sampler(dist: ExactDistribution) -> Sampler:
    """A sampler that draws straight from an exact table (for self-consistency checks)."""
    table = all_permutations(dist.n).astype(np.int64)

    def draw(n, q, size, rng):
        return table[rng.choice(table.shape[0], size=size, p=dist.probs)]

    return draw


def goodness_of_fit(
    params: MallowsParams,
    count: int,
    seed: SeedSpec,
    tv_threshold: float = 0.02,
    sampler: Sampler | None = None,
    workers: int = 1,
) -> GoodnessOfFit:
    """Compare an empirical histogram over S_n with the exact Mallows table.

    Passes when the Pearson statistic (n! - 1 degrees of freedom) is below
    its 99.9th percentile and the total variation distance is below
    ``tv_threshold``.
    """
    n = params.n
    if n > 7:
        raise ValueError("goodness of fit needs n <= 7")
    cells = math.factorial(n)
    if count < 100 * cells:
        raise ValueError(f"need at least {100 * cells} samples for n = {n}")
    draw = sampler or sample_mallows_batch

    def run(blk):
        index, _, size = blk
        perms = np.asarray(draw(n, params.q, size, seed.generator(index)), dtype=np.int64)
        SampleBlock(perms).check_erdos_szekeres()
        return np.bincount(lehmer_rank_rows(perms), minlength=cells)

    counts = np.sum(_map_blocks(run, blocks(count, n), workers), axis=0)
    exact = enumerate_distribution(n, params.q).probs
    expected = exact * count
    live = expected > 0
    chi2 = float(np.sum((counts[live] - expected[live]) ** 2 / expected[live]))
    if np.any(counts[~live]):
        chi2 = math.inf
    dof = cells - 1
    limit = float(stats.chi2.ppf(0.999, dof))
    tv = total_variation(counts / count, exact)
    return GoodnessOfFit(tv, chi2, dof, limit, bool(chi2 < limit and tv < tv_threshold))


# --- constructive arguments ------------------------------------------------


@dataclass(frozen=True)
class BlockDecomposition:
    block_lis: tuple[int, ...]
    sum: int
    lis: int


def block_decomposition(p, block_size: int) -> BlockDecomposition:
    """LIS of each consecutive block of indices, and the bound LIS <= sum of block LIS."""
    p = np.asarray(p, dtype=np.int64)
    n = p.size
    if not 1 <= block_size <= n:
        raise ValueError(f"block size must lie in 1..{n}")
    xs = tuple(
        lis_length(induced_ordering(p, range(start, min(start + block_size, n + 1))))
        for start in range(1, n + 1, block_size)
    )
    total = sum(xs)
    lis = lis_length(p)
    if lis > total:
        raise PropertyViolation(f"LIS {lis} exceeds block sum {total}")
    return BlockDecomposition(xs, total, lis)


def _window(n: int, q: float, L: int, window_scale: float) -> tuple[int, int]:
    centre = 1.0 / (1.0 - q)
    lo = math.ceil(centre - 1e-9)
    hi = math.floor(centre + window_scale * n / (1000.0 * L) + 1 + 1e-9)
    if hi < lo:
        raise ValueError(f"degenerate window [{centre}, {centre + window_scale * n / (1000 * L) + 1}]")
    return lo, hi


def greedy_window_stopping_times(record: ProcessRecord, L: int, window_scale: float = 1.0) -> np.ndarray:
    """Stopping times S_1 < S_2 < ... (at most L) of the window construction.

    The window is W = [1/(1-q), 1/(1-q) + window_scale * n/(1000 L) + 1] on
    the integers; window_scale = 1 is the original construction. Starting
    from T_0 = max W, S_i is the first time after T_{i-1} whose insertion
    lands in W, and T_i the first time after S_i at which element S_i has
    been pushed out of W.
    """
    q = record.q
    if not 0 < q < 1:
        raise ValueError("the window construction needs 0 < q < 1")
    if L < 1:
        raise ValueError("L must be at least 1")
    a = record.insertions
    n = a.size
    lo, hi = _window(n, q, L, window_scale)
    times = []
    t = hi  # T_0, 1-indexed time
    while len(times) < L:
        hits = np.flatnonzero((a[t:] >= lo) & (a[t:] <= hi))
        if hits.size == 0:
            break
        s = t + int(hits[0]) + 1
        times.append(s)
        if len(times) == L:
            break
        pos = int(a[s - 1])
        t = n
        for m in range(s + 1, n + 1):
            if a[m - 1] <= pos:
                pos += 1
                if pos > hi:
                    t = m
                    break
    return np.array(times, dtype=np.int64)


def greedy_window_subsequence(record: ProcessRecord, L: int, window_scale: float = 1.0) -> np.ndarray:
    """Indices of an increasing subsequence of pi = reverse(p_n) found by the window construction.

    Element S of the process sits at index n + 1 - S of pi, so the returned
    indices are n + 1 - S_k < ... < n + 1 - S_1. Raises PropertyViolation if
    the values of pi along them are not increasing.
    """
    times = greedy_window_stopping_times(record, L, window_scale)
    n = record.n
    indices = (n + 1 - times)[::-1]
    if indices.size > 1:
        pi = replay_process(record)[::-1]
        if np.any(np.diff(pi[indices - 1]) <= 0):
            raise PropertyViolation(f"window construction produced a non-increasing run at {indices.tolist()}")
    return indices


def bounded_difference_experiment(n: int, q: float, trials: int, seed: SeedSpec, workers: int = 1) -> int:
    """Largest |LIS(p_n) - LIS(p_n')| over single-coordinate changes of the insertion record.

    Each trial draws a record, picks i_c uniformly from 2..n and redraws
    a_{i_c} uniformly among the other i_c - 1 values.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    q_proc = q if q <= 1 else 1.0 / q

    def run(blk):
        index, _, size = blk
        rng = seed.generator(index)
        a = _insertion_rows(n, q_proc, size, rng)
        col = rng.integers(2, n + 1, size=size) - 1
        rows = np.arange(size)
        redraw = rng.integers(1, col + 1)  # uniform on 1..i_c - 1
        old = a[rows, col]
        b = a.copy()
        b[rows, col] = np.where(redraw < old, redraw, redraw + 1)
        diff = np.abs(_kernels.lis_rows(_kernels.replay_rows(a)) - _kernels.lis_rows(_kernels.replay_rows(b)))
        return int(diff.max())

    return max(_map_blocks(run, blocks(trials, n), workers))


def monotonicity_trials(n: int, q: float, trials: int, seed: SeedSpec, workers: int = 1) -> tuple[int, int]:
    """(violations, checked) for the insertion monotonicity property.

    Each trial raises a_j to a uniformly chosen larger value in {a_j+1..j}
    and checks that element j ends strictly further back; trials with
    a_j = j have no larger value and are skipped.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    q_proc = q if q <= 1 else 1.0 / q

    def run(blk):
        index, _, size = blk
        rng = seed.generator(index)
        a = _insertion_rows(n, q_proc, size, rng)
        col = rng.integers(0, n, size=size)
        rows = np.arange(size)
        old = a[rows, col]
        room = (col + 1) - old
        live = room > 0
        bump = rng.integers(1, np.maximum(room, 1) + 1)
        b = a.copy()
        b[rows, col] = np.where(live, old + bump, old)
        before = _kernels.replay_rows(a)[rows, col]
        after = _kernels.replay_rows(b)[rows, col]
        bad = live & ~(after > before)
        return int(bad.sum()), int(live.sum())

    parts = _map_blocks(run, blocks(trials, n), workers)
    return sum(p[0] for p in parts), sum(p[1] for p in parts)


def monotonicity_experiment(n: int, q: float, trials: int, seed: SeedSpec, workers: int = 1) -> bool:
    violations, _ = monotonicity_trials(n, q, trials, seed, workers)
    return violations == 0


@dataclass(frozen=True)
class MuellerStarrResult:
    ratio_mean: Estimate
    ell: float
    q: float


def mueller_starr_experiment(beta: float, n: int, count: int, seed: SeedSpec, workers: int = 1) -> MuellerStarrResult:
    """Mean of LIS/sqrt(n) at q = 1 - beta/n, next to its limit ell(beta)."""
    if n < 10:
        raise ValueError("n must be at least 10")
    q = 1.0 - beta / n
    if q <= 0:
        raise ValueError(f"beta = {beta} gives q = {q} <= 0")
    lis = collect(MallowsParams(n, q), lambda b: b.lis, count, seed, workers)
    return MuellerStarrResult(Estimate.from_values(lis / math.sqrt(n)), ell_beta(beta), q)
