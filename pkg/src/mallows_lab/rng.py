"""Counter-based random streams keyed by (seed, stream, path..., block).

Trials are grouped into fixed-size blocks whose size depends only on the
permutation length. Each block owns a Philox generator derived from its
key, so any block can be generated on any worker in any order and the
results never change.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_MASK64 = (1 << 64) - 1
# per-block memory ceiling for the (block x n) working arrays
_BLOCK_ELEMENTS = 1 << 20
_MAX_BLOCK_TRIALS = 512


@dataclass(frozen=True)
class SeedSpec:
    seed: int = 0
    stream: int = 0
    path: tuple[int, ...] = field(default=())

    def __post_init__(self):
        for name in ("seed", "stream"):
            value = getattr(self, name)
            if not 0 <= value <= _MASK64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value}")

    def derive(self, *keys: int) -> "SeedSpec":
        """Child seed for a sub-experiment; children of distinct keys never overlap."""
        return SeedSpec(self.seed, self.stream, self.path + tuple(int(k) for k in keys))

    def generator(self, block: int = 0) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream, *self.path, block))
        return np.random.Generator(np.random.Philox(ss))

    def as_dict(self) -> dict:
        out = {"seed": self.seed, "stream": self.stream}
        if self.path:
            out["path"] = list(self.path)
        return out


def block_size(n: int) -> int:
    """Trials per block for permutations of length n."""
    return max(1, min(_MAX_BLOCK_TRIALS, _BLOCK_ELEMENTS // max(n, 1)))


def blocks(count: int, n: int) -> list[tuple[int, int, int]]:
    """Split ``count`` trials into ``(block_index, start, size)`` triples."""
    size = block_size(n)
    out = []
    start = 0
    b = 0
    while start < count:
        k = min(size, count - start)
        out.append((b, start, k))
        start += k
        b += 1
    return out
