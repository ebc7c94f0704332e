"""Closed-form evaluators for the Mallows displacement, LIS and LDS bounds.

The bounds are stated with unnamed absolute constants; :class:`ConstantsConfig`
pins them so every evaluator returns a number. Evaluators that only hold
inside a parameter window return a :class:`Bound` carrying the value and
an ``applicable`` flag instead of raising, so parameter sweeps can record
"not applicable" rows.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np

__all__ = [
    "ConstantsConfig",
    "DEFAULT_CONSTANTS",
    "Bound",
    "LisTailBounds",
    "LdsLowerBounds",
    "LdsRegime",
    "Regime",
    "displacement_tail_upper",
    "displacement_tail_lower",
    "displacement_expectation_bounds",
    "lis_scale",
    "lis_expectation_sandwich",
    "lis_tail_bounds",
    "lds_tail_upper",
    "lds_refined_upper",
    "lds_tail_lower",
    "lds_small_tail",
    "lds_regime",
    "ell_beta",
    "variance_bound",
    "gaussian_tail",
    "identity_probability",
]

_REL = 1e-12


def _le(a: float, b: float) -> bool:
    """a <= b up to rounding in b (window edges such as 1 - 4/n)."""
    return a <= b + _REL * max(1.0, abs(b))


@dataclass(frozen=True)
class ConstantsConfig:
    C: float = 8.0
    c: float = 0.125
    C0: float = 100.0
    c1: float = 0.01

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"constant {name} must be positive, got {value!r}")
        if not self.c <= 1 <= self.C:
            raise ValueError("constants must satisfy c <= 1 <= C")
        if self.C0 <= 1:
            # the log-ratio regime divides by log((1-q) log(n)^2) >= log(C0)
            raise ValueError("C0 must exceed 1")

    @classmethod
    def from_mapping(cls, data) -> "ConstantsConfig":
        unknown = set(data) - {"C", "c", "C0", "c1"}
        if unknown:
            raise ValueError(f"unknown constants: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_CONSTANTS = ConstantsConfig()


@dataclass(frozen=True)
class Bound:
    value: float
    applicable: bool


def _cap(log_value: float) -> float:
    return math.exp(min(0.0, log_value))


def displacement_tail_upper(q: float, t: int) -> float:
    """P(|pi(i) - i| >= t) <= 2 q^t. Returned unclamped; values above 1 are vacuous."""
    return 2.0 * q**t


def displacement_tail_lower(q: float, t: int, n: int) -> float | None:
    """q^(2t-1)/2 when n >= 3 and t <= (n+5)/8, otherwise None."""
    if n >= 3 and 1 <= t <= (n + 5) / 8:
        return 0.5 * q ** (2 * t - 1)
    return None


def displacement_expectation_bounds(n: int, q: float, cfg: ConstantsConfig = DEFAULT_CONSTANTS):
    """(c min(q/(1-q), n-1), min(2q/(1-q), n-1)) bracketing E|pi(i) - i|."""
    ratio = q / (1.0 - q)
    return cfg.c * min(ratio, n - 1), min(2.0 * ratio, n - 1)


def lis_scale(n: int, q: float) -> float:
    return n * math.sqrt(1.0 - q)


def lis_expectation_sandwich(n: int, q: float) -> tuple[float, float]:
    """n(1-q) <= E LIS <= n - q(n-1)/(1+q), valid for 0 < q <= 1."""
    if not 0 < q <= 1:
        raise ValueError("the sandwich needs 0 < q <= 1")
    return n * (1.0 - q), n - q * (n - 1) / (1.0 + q)


@dataclass(frozen=True)
class LisTailBounds:
    upper_at_large_L: Bound
    lower_at_large_L: Bound
    lower_tail_at_small_L: Bound


def lis_tail_bounds(n: int, q: float, L: int, cfg: ConstantsConfig = DEFAULT_CONSTANTS) -> LisTailBounds:
    """Large-deviation bounds for LIS at threshold L.

    For L >= C n sqrt(1-q):  (c(1-q)n^2/L^2)^L <= P(LIS >= L) <= (C(1-q)n^2/L^2)^L.
    For n(1-q) <= L <= c n sqrt(1-q):  P(LIS < L) <= exp(-c(1-q)n^2/L).
    Both require 1/2 <= q <= 1 - 4/n.
    """
    in_q = 0.5 <= q and _le(q, 1 - 4 / n)
    scale = lis_scale(n, q)
    large = in_q and _le(cfg.C * scale, L)
    small = in_q and _le(n * (1 - q), L) and _le(L, cfg.c * scale)
    base = (1 - q) * n * n / (L * L)
    upper = _cap(L * math.log(cfg.C * base))
    lower = _cap(L * math.log(cfg.c * base))
    small_tail = math.exp(-cfg.c * (1 - q) * n * n / L)
    return LisTailBounds(Bound(upper, large), Bound(lower, large), Bound(small_tail, small))


def lds_tail_upper(n: int, q: float, L: int, cfg: ConstantsConfig = DEFAULT_CONSTANTS) -> Bound:
    """Smallest applicable upper bound on P(LDS >= L), capped at 1.

    For q < 1 - 2/n:  n^8 (C/((1-q)L^2))^L if L <= 3/(1-q), else
    n^8 (C(1-q))^L q^(L(L-1)/2). For q < 1/2 additionally n C^L q^(L(L-1)/2).
    """
    if L < 2:
        raise ValueError("L must be at least 2")
    pairs = L * (L - 1) / 2
    logs = []
    if q < 1 - 2 / n:
        if _le(L, 3 / (1 - q)):
            logs.append(8 * math.log(n) + L * (math.log(cfg.C) - math.log1p(-q) - 2 * math.log(L)))
        else:
            logs.append(8 * math.log(n) + L * (math.log(cfg.C) + math.log1p(-q)) + pairs * math.log(q))
    if q < 0.5:
        logs.append(_log_lds_refined(n, q, L, cfg))
    if not logs:
        return Bound(1.0, False)
    return Bound(_cap(min(logs)), True)


def _log_lds_refined(n: int, q: float, L: int, cfg: ConstantsConfig) -> float:
    return math.log(n) + L * math.log(cfg.C) + L * (L - 1) / 2 * math.log(q)


def lds_refined_upper(n: int, q: float, L: int, cfg: ConstantsConfig = DEFAULT_CONSTANTS) -> Bound:
    """P(LDS >= L) <= n C^L q^(L(L-1)/2), capped at 1; applicable for 0 < q < 1/2."""
    if L < 2:
        raise ValueError("L must be at least 2")
    return Bound(_cap(_log_lds_refined(n, q, L, cfg)), 0 < q < 0.5)


@dataclass(frozen=True)
class LdsLowerBounds:
    window_bound: float | None
    universal_bound: float


def _at_least_one(success: float, trials: int) -> float:
    """1 - (1 - success)^trials without cancellation."""
    if trials <= 0 or success <= 0:
        return 0.0
    if success >= 1:
        return 1.0
    return float(-math.expm1(trials * math.log1p(-success)))


def lds_tail_lower(n: int, q: float, L: int, cfg: ConstantsConfig = DEFAULT_CONSTANTS) -> LdsLowerBounds:
    """Lower bounds on P(LDS >= L).

    Universal (any L >= 2):  1 - (1 - q^(L(L-1)/2) (1-q)^L)^floor(n/L).
    Window (1/2 <= q <= 1-4/n, C/sqrt(1-q) <= L <= 1/(1-q)):
    1 - (1 - (c/((1-q)L^2))^L)^floor(n(1-q)/4).
    """
    if L < 2:
        raise ValueError("L must be at least 2")
    success = math.exp(L * (L - 1) / 2 * math.log(q) + L * math.log1p(-q))
    universal = _at_least_one(success, n // L)
    window = None
    if 0.5 <= q and _le(q, 1 - 4 / n) and _le(cfg.C / math.sqrt(1 - q), L) and _le(L, 1 / (1 - q)):
        x = min(1.0, (cfg.c / ((1 - q) * L * L)) ** L)
        window = _at_least_one(x, math.floor(n * (1 - q) / 4))
    return LdsLowerBounds(window, universal)


def lds_small_tail(n: int, q: float, L: int, cfg: ConstantsConfig = DEFAULT_CONSTANTS) -> Bound:
    """P(LDS < L) <= (C(1-q)L^2)^(n/L) for 1/2 <= q <= 1-4/n and 2 <= L < c/sqrt(1-q)."""
    applicable = 0.5 <= q and _le(q, 1 - 4 / n) and 2 <= L < cfg.c / math.sqrt(1 - q)
    value = _cap(n / L * math.log(cfg.C * (1 - q) * L * L))
    return Bound(value, applicable)


class Regime(str, enum.Enum):
    SQRT_SCALE = "SQRT_SCALE"
    LOG_RATIO_SCALE = "LOG_RATIO_SCALE"
    SQRT_LOG_SCALE = "SQRT_LOG_SCALE"
    SMALL_Q = "SMALL_Q"


@dataclass(frozen=True)
class LdsRegime:
    label: Regime
    scale: float


def regime_thresholds(n: int, cfg: ConstantsConfig = DEFAULT_CONSTANTS) -> tuple[float, float, float]:
    """(1/n, 1 - c1 (log log n)^2 / log n, 1 - C0/(log n)^2): lower q-ends of the regimes."""
    log_n = math.log(n)
    log_log_n = math.log(log_n) if log_n > 1 else 0.0
    return 1.0 / n, 1 - cfg.c1 * log_log_n**2 / log_n, 1 - cfg.C0 / log_n**2


def lds_regime(n: int, q: float, cfg: ConstantsConfig = DEFAULT_CONSTANTS) -> LdsRegime:
    """Classify (n, q) into the four E(LDS) growth regimes and return the constant-free scale.

    Scales: 1/sqrt(1-q); log n / log((1-q) log(n)^2); sqrt(log n / log(1/q));
    and n q (which describes E(LDS) - 1) for q <= 1/n.

    The regimes are tested from small q upward and each owns its lower
    q-end. When the configured constants make a middle interval empty or
    inverted, the regime below it takes precedence, so the four labels
    always partition (0, 1). q above 1 - 4/n is reported as SQRT_SCALE.
    """
    if n < 2 or not 0 < q < 1:
        raise ValueError("need n >= 2 and 0 < q < 1")
    small, mid, top = regime_thresholds(n, cfg)
    log_n = math.log(n)
    if q < small:
        return LdsRegime(Regime.SMALL_Q, n * q)
    if q < mid:
        return LdsRegime(Regime.SQRT_LOG_SCALE, math.sqrt(log_n / -math.log(q)))
    if q < top:
        return LdsRegime(Regime.LOG_RATIO_SCALE, log_n / math.log((1 - q) * log_n**2))
    return LdsRegime(Regime.SQRT_SCALE, 1 / math.sqrt(1 - q))


def ell_beta(beta: float) -> float:
    """Limit of LIS/sqrt(n) when n(1-q) -> beta.

    2 asinh(sqrt(e^beta - 1))/sqrt(beta) for beta > 0, 2 at beta = 0 and
    2 asin(sqrt(1 - e^beta))/sqrt(|beta|) for beta < 0.
    """
    if not math.isfinite(beta):
        raise ValueError("beta must be finite")
    if abs(beta) < 1e-8:
        return 2.0
    if beta > 0:
        # asinh(sqrt(e^b - 1)) = b/2 + log(1 + sqrt(1 - e^-b)), overflow-free
        return 2.0 * (beta / 2 + math.log1p(math.sqrt(-math.expm1(-beta)))) / math.sqrt(beta)
    # asin(sqrt(1 - e^b)) written as an atan2 so it stays accurate as e^b -> 0
    return 2.0 * math.atan2(math.sqrt(-math.expm1(beta)), math.exp(beta / 2)) / math.sqrt(-beta)


def variance_bound(n: int) -> float:
    return float(n - 1)


def gaussian_tail(t: float) -> float:
    """2 exp(-t^2/2), the bound on P(|LIS - E LIS| > t sqrt(n-1))."""
    return 2.0 * math.exp(-t * t / 2)


def identity_probability(n: int, q: float) -> float:
    """P(pi = id) = (1-q)^n / prod_{i<=n} (1 - q^i) = 1/Z_{n,q}."""
    if n < 1 or not 0 < q < 1:
        raise ValueError("need n >= 1 and 0 < q < 1")
    i = np.arange(1, n + 1, dtype=np.float64)
    log_p = n * math.log1p(-q) - float(np.sum(np.log1p(-(q**i))))
    return math.exp(log_p)
