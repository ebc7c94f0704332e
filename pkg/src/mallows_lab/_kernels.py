"""Compiled inner loops shared by the public modules.

Everything here works on plain int64 arrays holding 1-indexed permutation
values and performs no validation; callers in ``perm`` and ``model`` check
their inputs first.
"""

import numpy as np
from numba import njit

_JIT = dict(cache=True, nogil=True)


@njit(**_JIT)
def inversion_count(values):
    n = values.shape[0]
    tree = np.zeros(n + 1, dtype=np.int64)
    total = 0
    for seen in range(n):
        v = values[seen]
        # number of earlier values <= v
        s = 0
        j = v
        while j > 0:
            s += tree[j]
            j -= j & -j
        total += seen - s
        j = v
        while j <= n:
            tree[j] += 1
            j += j & -j
    return total


@njit(**_JIT)
def lis_length(values):
    n = values.shape[0]
    tails = np.empty(n, dtype=values.dtype)
    size = 0
    for k in range(n):
        x = values[k]
        lo = 0
        hi = size
        while lo < hi:
            mid = (lo + hi) >> 1
            if tails[mid] < x:
                lo = mid + 1
            else:
                hi = mid
        tails[lo] = x
        if lo == size:
            size += 1
    return size


@njit(**_JIT)
def lds_length(values):
    n = values.shape[0]
    tails = np.empty(n, dtype=values.dtype)
    size = 0
    for k in range(n):
        x = -values[k]
        lo = 0
        hi = size
        while lo < hi:
            mid = (lo + hi) >> 1
            if tails[mid] < x:
                lo = mid + 1
            else:
                hi = mid
        tails[lo] = x
        if lo == size:
            size += 1
    return size


@njit(**_JIT)
def longest_decreasing_run(values):
    best = 1
    run = 1
    for k in range(1, values.shape[0]):
        if values[k] < values[k - 1]:
            run += 1
            if run > best:
                best = run
        else:
            run = 1
    return best


@njit(**_JIT)
def replay(insertions):
    """Final positions p_n(1..n) of the insertion process.

    Walks the record backwards: element m ends in the a_m-th slot left free
    by the elements inserted after it. Free slots live in a Fenwick tree.
    """
    n = insertions.shape[0]
    tree = np.empty(n + 1, dtype=np.int64)
    tree[0] = 0
    for j in range(1, n + 1):
        tree[j] = j & -j
    top = 1
    while top * 2 <= n:
        top *= 2
    out = np.empty(n, dtype=np.int64)
    for m in range(n - 1, -1, -1):
        k = insertions[m]
        pos = 0
        step = top
        while step > 0:
            nxt = pos + step
            if nxt <= n and tree[nxt] < k:
                pos = nxt
                k -= tree[nxt]
            step >>= 1
        pos += 1
        out[m] = pos
        j = pos
        while j <= n:
            tree[j] -= 1
            j += j & -j
    return out


@njit(**_JIT)
def replay_rows(insertions):
    rows, n = insertions.shape
    out = np.empty((rows, n), dtype=np.int64)
    for r in range(rows):
        out[r] = replay(insertions[r])
    return out


@njit(**_JIT)
def lis_rows(perms):
    out = np.empty(perms.shape[0], dtype=np.int64)
    for r in range(perms.shape[0]):
        out[r] = lis_length(perms[r])
    return out


@njit(**_JIT)
def lds_rows(perms):
    out = np.empty(perms.shape[0], dtype=np.int64)
    for r in range(perms.shape[0]):
        out[r] = lds_length(perms[r])
    return out


@njit(**_JIT)
def inv_rows(perms):
    out = np.empty(perms.shape[0], dtype=np.int64)
    for r in range(perms.shape[0]):
        out[r] = inversion_count(perms[r])
    return out


@njit(**_JIT)
def ldr_rows(perms):
    out = np.empty(perms.shape[0], dtype=np.int64)
    for r in range(perms.shape[0]):
        out[r] = longest_decreasing_run(perms[r])
    return out
