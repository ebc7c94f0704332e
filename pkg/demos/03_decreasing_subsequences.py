"""
Four growth laws for the longest decreasing subsequence
=======================================================

The classifier maps (n, q) to a regime and a constant-free scale; the
simulation shows the mean LDS staying within a constant factor of it.
"""

import numpy as np

from mallows_lab import bounds, montecarlo
from mallows_lab.model import MallowsParams
from mallows_lab.rng import SeedSpec

n = 100_000
print(f"n = {n}, regime thresholds:", ["%.6g" % t for t in bounds.regime_thresholds(n)])
for k, q in enumerate([1 - 4 / n, 0.99, 0.5, 1e-3, 1e-6]):
    regime = bounds.lds_regime(n, q)
    lds = montecarlo.collect(MallowsParams(n, q), lambda b: b.lds, 40, SeedSpec(4, k))
    mean = lds.mean() - (1 if regime.label is bounds.Regime.SMALL_Q else 0)
    print(f"  q={q:<10.6g} {regime.label.value:<16} scale={regime.scale:9.3f}  mean={mean:9.3f}  "
          f"ratio={mean / regime.scale:6.3f}")

print("\nP(LDS >= L) at n = 10^4, q = 0.25, with the bounds that apply")
n, q = 10_000, 0.25
lds = montecarlo.collect(MallowsParams(n, q), lambda b: b.lds, 2000, SeedSpec(5))
for L in range(2, 9):
    p_hat = float(np.mean(lds >= L))
    low = bounds.lds_tail_lower(n, q, L).universal_bound
    up = bounds.lds_refined_upper(n, q, L).value
    print(f"  L={L}: {low:10.3e} <= {p_hat:8.4f} <= {up:10.3e}")
