"""
How long is the longest increasing subsequence?
===============================================

For q close to 1 the mean LIS grows like n sqrt(1-q). When n(1-q) stays
bounded at beta, LIS/sqrt(n) settles at ell(beta) instead.
"""

import math

from mallows_lab import bounds, montecarlo
from mallows_lab.model import MallowsParams
from mallows_lab.rng import SeedSpec

print("LIS / (n sqrt(1-q)) along q = 1 - n^-0.5")
for k, n in enumerate([1_000, 10_000, 100_000]):
    q = 1 - n**-0.5
    est = montecarlo.estimate_statistic(MallowsParams(n, q), "lis", 100, SeedSpec(0, k))
    scale = bounds.lis_scale(n, q)
    print(f"  n={n:>7}  ratio={est.mean / scale:.4f} +- {est.stderr / scale:.4f}")

print("\nsmall q: E LIS sits inside [n(1-q), n - q(n-1)/(1+q)]")
for q in (0.01, 0.1, 0.5):
    n = 1000
    est = montecarlo.estimate_statistic(MallowsParams(n, q), "lis", 200, SeedSpec(1))
    lo, hi = bounds.lis_expectation_sandwich(n, q)
    print(f"  q={q:<5} {lo:8.1f} <= {est.mean:8.1f} <= {hi:8.1f}")

print("\nLIS/sqrt(n) at q = 1 - beta/n, n = 10^4")
for beta in (-2.0, 0.0, 1.0, 5.0):
    res = montecarlo.mueller_starr_experiment(beta, 10_000, 100, SeedSpec(2))
    print(f"  beta={beta:>5}: simulated {res.ratio_mean.mean:.3f}, limit {res.ell:.3f}")

print("\nvariance against the n - 1 ceiling")
for n, q in [(100, 0.5), (10_000, 1 - 4 / 10_000)]:
    lis = montecarlo.collect(MallowsParams(n, q), lambda b: b.lis, 4000, SeedSpec(3))
    print(f"  n={n:>6} q={q:.4f}: var={lis.var(ddof=1):8.2f}  bound={bounds.variance_bound(n):8.0f}  "
          f"sd/sqrt(n-1)={math.sqrt(lis.var(ddof=1) / (n - 1)):.3f}")
