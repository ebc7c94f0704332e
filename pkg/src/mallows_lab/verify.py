"""Verification experiments: theory rows from :mod:`bounds` next to Monte Carlo
estimates, with a PASS/FAIL verdict per row.

Each experiment has a default parameter grid; any key can be overridden.
q entries may be numbers or small expressions in n such as ``"1-4/n"`` or
``"1-n^-0.7"``. Reports are deterministic functions of (experiment, grid,
constants, count, seed, margin_k) and never record the worker count.
"""

from __future__ import annotations

import ast
import json
import math
import operator
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from . import bounds as B
from . import montecarlo as mc
from .model import MallowsParams, run_process
from .rng import SeedSpec

__all__ = ["Row", "VerificationReport", "EXPERIMENTS", "run_verification", "resolve_q", "default_grid"]

PASS, FAIL, NOT_APPLICABLE = "PASS", "FAIL", "NOT_APPLICABLE"

ROW_FIELDS = (
    "experiment",
    "n",
    "q",
    "statistic",
    "threshold",
    "theory",
    "empirical",
    "stderr",
    "margin",
    "verdict",
    "applicable",
)


@dataclass(frozen=True)
class Row:
    experiment: str
    n: int | None
    q: float | None
    statistic: str
    threshold: float | None
    theory: float | None
    empirical: float | None
    stderr: float | None
    margin: float | None
    verdict: str
    applicable: bool

    def as_dict(self) -> dict:
        return {f: getattr(self, f) for f in ROW_FIELDS}


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _json_value(x):
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if isinstance(x, (np.integer, np.floating)):
        return _json_value(x.item())
    return x


@dataclass
class VerificationReport:
    experiment: str
    params: dict
    constants: B.ConstantsConfig
    count: int | None
    seed: SeedSpec
    margin_k: float
    rows: list[Row] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not any(r.verdict == FAIL for r in self.rows if r.applicable)

    @property
    def failures(self) -> list[Row]:
        return [r for r in self.rows if r.applicable and r.verdict == FAIL]

    def header(self) -> dict:
        return {
            "experiment": self.experiment,
            "params": self.params,
            "constants": self.constants.as_dict(),
            "count": self.count,
            "seed": self.seed.as_dict(),
            "margin_k": self.margin_k,
        }

    def to_json(self) -> str:
        doc = self.header()
        doc["passed"] = self.passed
        doc["rows"] = [{k: _json_value(v) for k, v in r.as_dict().items()} for r in self.rows]
        return json.dumps(doc, indent=2) + "\n"

    def to_text(self) -> str:
        lines = [f"# {json.dumps(self.header(), sort_keys=True)}"]
        table = [list(ROW_FIELDS)] + [[_fmt(getattr(r, f)) for f in ROW_FIELDS] for r in self.rows]
        widths = [max(len(row[c]) for row in table) for c in range(len(ROW_FIELDS))]
        for row in table:
            lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        lines.append(f"# result: {'PASS' if self.passed else 'FAIL'} ({len(self.failures)} failing rows)")
        return "\n".join(lines) + "\n"


# --- q expressions ---------------------------------------------------------

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_FUNCS = {"log": math.log, "sqrt": math.sqrt, "exp": math.exp}


def resolve_q(expr, n: int) -> float:
    """Evaluate a q entry: a number, or an arithmetic expression in ``n``.

    >>> resolve_q("1-4/n", 100)
    0.96
    """
    if isinstance(expr, (int, float)) and not isinstance(expr, bool):
        return float(expr)
    if not isinstance(expr, str):
        raise ValueError(f"bad q entry {expr!r}")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        if isinstance(node, ast.Name) and node.id == "n":
            return n
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS
            and len(node.args) == 1
            and not node.keywords
        ):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ValueError(f"unsupported q expression {expr!r}")

    return float(ev(ast.parse(expr.replace("^", "**"), mode="eval")))


# --- row helpers -----------------------------------------------------------


class _Ctx:
    def __init__(self, name, cfg, k, seed, workers, rows):
        self.name = name
        self.cfg = cfg
        self.k = k
        self.seed = seed
        self.workers = workers
        self.rows = rows

    def add(self, n, q, statistic, threshold, theory, empirical, stderr, margin, verdict, applicable=True):
        self.rows.append(
            Row(
                self.name,
                None if n is None else int(n),
                None if q is None else float(q),
                statistic,
                None if threshold is None else _num(threshold),
                None if theory is None else float(theory),
                None if empirical is None else float(empirical),
                None if stderr is None else float(stderr),
                None if margin is None else float(margin),
                verdict,
                bool(applicable),
            )
        )

    def upper(self, n, q, statistic, threshold, theory, empirical, stderr, margin, applicable=True):
        """Row for the one-sided claim empirical <= theory (+ margin)."""
        if not applicable:
            return self.add(n, q, statistic, threshold, theory, empirical, stderr, margin, NOT_APPLICABLE, False)
        ok = empirical <= theory + margin
        self.add(n, q, statistic, threshold, theory, empirical, stderr, margin, PASS if ok else FAIL)

    def lower(self, n, q, statistic, threshold, theory, empirical, stderr, margin, applicable=True):
        """Row for the one-sided claim empirical >= theory (- margin)."""
        if not applicable:
            return self.add(n, q, statistic, threshold, theory, empirical, stderr, margin, NOT_APPLICABLE, False)
        ok = empirical >= theory - margin
        self.add(n, q, statistic, threshold, theory, empirical, stderr, margin, PASS if ok else FAIL)

    def within(self, n, q, statistic, threshold, theory, empirical, stderr, margin):
        ok = abs(empirical - theory) <= margin
        self.add(n, q, statistic, threshold, theory, empirical, stderr, margin, PASS if ok else FAIL)

    def info(self, n, q, statistic, threshold, theory, empirical, stderr=None):
        self.add(n, q, statistic, threshold, theory, empirical, stderr, None, NOT_APPLICABLE, False)

    def tail_margin(self, theory: float, tail: mc.TailEstimate) -> float:
        """k binomial standard errors, taking the larger of the plug-in and at-the-bound values."""
        p0 = min(max(theory, 0.0), 1.0)
        null_se = math.sqrt(p0 * (1 - p0) / tail.count)
        return self.k * max(tail.stderr, null_se)


def _num(x):
    return int(x) if float(x).is_integer() else float(x)


def _cells(grid) -> list[tuple[int, float]]:
    out = []
    for n in grid["n"]:
        for q in grid["q"]:
            out.append((int(n), resolve_q(q, int(n))))
    return out


# --- experiments -----------------------------------------------------------


def _displacement(ctx: _Ctx, grid, count):
    t_max = int(grid["t_max"])
    for ci, (n, q) in enumerate(_cells(grid)):
        idx = grid.get("i") or [1, n // 2, n]
        idx = list(dict.fromkeys(int(i) for i in idx if 1 <= int(i) <= n))
        cols = np.array(idx)
        values = mc.collect(
            MallowsParams(n, q), lambda b: np.abs(b.perms[:, cols - 1] - cols), count, ctx.seed.derive(ci), ctx.workers
        )
        lo_c, hi = B.displacement_expectation_bounds(n, q, ctx.cfg)
        for j, i in enumerate(idx):
            col = values[:, j]
            label = f"P(|pi({i})-{i}|>=t)"
            for tail in mc.tails_from_values(col, range(1, min(t_max, n - 1) + 1)):
                t = tail.threshold
                up = B.displacement_tail_upper(q, t)
                ctx.upper(n, q, label + " upper", t, up, tail.p_hat, tail.stderr, ctx.tail_margin(up, tail))
                low = B.displacement_tail_lower(q, t, n)
                if low is None:
                    ctx.lower(n, q, label + " lower", t, None, tail.p_hat, tail.stderr, None, applicable=False)
                else:
                    ctx.lower(n, q, label + " lower", t, low, tail.p_hat, tail.stderr, ctx.tail_margin(low, tail))
            est = mc.Estimate.from_values(col)
            ctx.upper(n, q, f"E|pi({i})-{i}|", None, hi, est.mean, est.stderr, ctx.k * est.stderr)
            base = lo_c / ctx.cfg.c
            if base > 0:
                ctx.info(n, q, f"c_hat = E|pi({i})-{i}|/min(q/(1-q),n-1)", None, ctx.cfg.c, est.mean / base)


def _lis_expectation(ctx: _Ctx, grid, count):
    for ci, (n, q) in enumerate(_cells(grid)):
        est = mc.estimate_statistic(MallowsParams(n, q), "lis", count, ctx.seed.derive(0, ci), ctx.workers)
        lo, hi = B.lis_expectation_sandwich(n, q)
        m = ctx.k * est.stderr
        ctx.lower(n, q, "E LIS >= n(1-q)", None, lo, est.mean, est.stderr, m)
        ctx.upper(n, q, "E LIS <= n - q(n-1)/(1+q)", None, hi, est.mean, est.stderr, m)
    band_lo, band_hi = grid["band"]
    for ci, n in enumerate(grid["scale_n"]):
        n = int(n)
        q = 1.0 - n ** (-float(grid["scale_exponent"]))
        est = mc.estimate_statistic(MallowsParams(n, q), "lis", count, ctx.seed.derive(1, ci), ctx.workers)
        scale = B.lis_scale(n, q)
        ratio, se = est.mean / scale, est.stderr / scale
        ctx.lower(n, q, "E LIS / (n sqrt(1-q))", None, band_lo, ratio, se, 0.0)
        ctx.upper(n, q, "E LIS / (n sqrt(1-q))", None, band_hi, ratio, se, 0.0)


def _default_lis_thresholds(n, q, cfg):
    scale = B.lis_scale(n, q)
    picks = set()
    lo = math.ceil(n * (1 - q) - 1e-9)
    hi = math.floor(cfg.c * scale + 1e-9)
    picks.update(range(max(lo, 1), min(hi, n) + 1))
    start = math.ceil(cfg.C * scale - 1e-9)
    if start <= n:
        picks.update(np.linspace(start, n, 5).round().astype(int).tolist())
    # a few interior thresholds where no bound applies
    picks.update(np.linspace(1, n, 6).round().astype(int).tolist())
    return sorted(picks)


def _lis_tails(ctx: _Ctx, grid, count):
    for ci, (n, q) in enumerate(_cells(grid)):
        thresholds = grid.get("L") or _default_lis_thresholds(n, q, ctx.cfg)
        lis = mc.collect(MallowsParams(n, q), lambda b: b.lis, count, ctx.seed.derive(ci), ctx.workers)
        for tail in mc.tails_from_values(lis, thresholds):
            L = tail.threshold
            bd = B.lis_tail_bounds(n, q, L, ctx.cfg)
            up, low, small = bd.upper_at_large_L, bd.lower_at_large_L, bd.lower_tail_at_small_L
            ctx.upper(n, q, "P(LIS>=L) upper", L, up.value, tail.p_hat, tail.stderr,
                      ctx.tail_margin(up.value, tail), up.applicable)
            ctx.lower(n, q, "P(LIS>=L) lower", L, low.value, tail.p_hat, tail.stderr,
                      ctx.tail_margin(low.value, tail), low.applicable)
            below = mc.TailEstimate(L, 1 - tail.p_hat, tail.stderr, tail.count)
            ctx.upper(n, q, "P(LIS<L) upper", L, small.value, below.p_hat, below.stderr,
                      ctx.tail_margin(small.value, below), small.applicable)


def _lln(ctx: _Ctx, grid, count):
    prev = None
    ratio = None
    ns = [int(n) for n in grid["n"]]
    for ci, n in enumerate(ns):
        q = 1.0 - n ** (-float(grid["exponent"]))
        est = mc.estimate_statistic(MallowsParams(n, q), "lis", count, ctx.seed.derive(ci), ctx.workers)
        scale = B.lis_scale(n, q)
        ratio = est.mean / scale
        ctx.info(n, q, "E LIS / (n sqrt(1-q))", None, 1.0, ratio, est.stderr / scale)
        dev = abs(ratio - 1)
        if prev is not None:
            ok = dev < prev
            ctx.add(n, q, "|ratio-1| strictly below previous n", None, prev, dev, None, 0.0, PASS if ok else FAIL)
        prev = dev
    band_lo, band_hi = grid["band"]
    n = ns[-1]
    q = 1.0 - n ** (-float(grid["exponent"]))
    ctx.lower(n, q, "E LIS / (n sqrt(1-q)) band", None, band_lo, ratio, None, 0.0)
    ctx.upper(n, q, "E LIS / (n sqrt(1-q)) band", None, band_hi, ratio, None, 0.0)


def _mueller_starr(ctx: _Ctx, grid, count):
    tol = float(grid["rel_tol"])
    ctx.within(None, None, "ell(0)", 0, 2.0, B.ell_beta(0.0), None, 0.0)
    for ni, n in enumerate(grid["n"]):
        for bi, beta in enumerate(grid["beta"]):
            res = mc.mueller_starr_experiment(float(beta), int(n), count, ctx.seed.derive(ni, bi), ctx.workers)
            ctx.within(n, res.q, "E LIS / sqrt(n) vs ell(beta)", beta, res.ell, res.ratio_mean.mean,
                       res.ratio_mean.stderr, tol * res.ell)


def _lds_regimes(ctx: _Ctx, grid, count):
    factor = float(grid["factor"])
    for ci, (n, q) in enumerate(_cells(grid)):
        regime = B.lds_regime(n, q, ctx.cfg)
        lds = mc.collect(MallowsParams(n, q), lambda b: b.lds, count, ctx.seed.derive(ci), ctx.workers)
        est = mc.Estimate.from_values(lds - 1 if regime.label is B.Regime.SMALL_Q else lds)
        stat = f"{'E LDS - 1' if regime.label is B.Regime.SMALL_Q else 'E LDS'} [{regime.label.value}]"
        ctx.lower(n, q, stat + " >= scale/8", None, regime.scale / factor, est.mean, est.stderr, 0.0)
        ctx.upper(n, q, stat + " <= 8 scale", None, regime.scale * factor, est.mean, est.stderr, 0.0)
        ctx.info(n, q, stat + " / scale", None, 1.0, est.mean / regime.scale)


def _lds_tails(ctx: _Ctx, grid, count):
    for ci, (n, q) in enumerate(_cells(grid)):
        thresholds = [int(L) for L in grid["L"]]
        lds = mc.collect(MallowsParams(n, q), lambda b: b.lds, count, ctx.seed.derive(ci), ctx.workers)
        for tail in mc.tails_from_values(lds, thresholds):
            L = tail.threshold
            low = B.lds_tail_lower(n, q, L, ctx.cfg)
            ctx.lower(n, q, "P(LDS>=L) universal lower", L, low.universal_bound, tail.p_hat, tail.stderr,
                      ctx.tail_margin(low.universal_bound, tail))
            if low.window_bound is None:
                ctx.lower(n, q, "P(LDS>=L) window lower", L, None, tail.p_hat, tail.stderr, None, applicable=False)
            else:
                ctx.lower(n, q, "P(LDS>=L) window lower", L, low.window_bound, tail.p_hat, tail.stderr,
                          ctx.tail_margin(low.window_bound, tail))
            up = B.lds_tail_upper(n, q, L, ctx.cfg)
            ctx.upper(n, q, "P(LDS>=L) upper", L, up.value, tail.p_hat, tail.stderr,
                      ctx.tail_margin(up.value, tail), up.applicable)
            ref = B.lds_refined_upper(n, q, L, ctx.cfg)
            ctx.upper(n, q, "P(LDS>=L) <= n C^L q^(L(L-1)/2)", L, ref.value, tail.p_hat, tail.stderr, 0.0,
                      ref.applicable)
            small = B.lds_small_tail(n, q, L, ctx.cfg)
            below = mc.TailEstimate(L, 1 - tail.p_hat, tail.stderr, tail.count)
            ctx.upper(n, q, "P(LDS<L) upper", L, small.value, below.p_hat, below.stderr,
                      ctx.tail_margin(small.value, below), small.applicable)


def _variance(ctx: _Ctx, grid, count):
    slack = float(grid["slack"])
    for ci, (n, q) in enumerate(_cells(grid)):
        lis = mc.collect(MallowsParams(n, q), lambda b: b.lis, count, ctx.seed.derive(ci), ctx.workers)
        lis = lis.astype(np.float64)
        var = float(lis.var(ddof=1))
        ctx.upper(n, q, "var LIS <= (n-1)(1+slack)", None, B.variance_bound(n) * (1 + slack), var, None, 0.0)
        mean = lis.mean()
        for t in grid["t"]:
            dev = np.abs(lis - mean) > t * math.sqrt(n - 1)
            tail = mc.TailEstimate(t, float(dev.mean()), math.sqrt(dev.mean() * (1 - dev.mean()) / count), count)
            theory = B.gaussian_tail(t)
            ctx.upper(n, q, "P(|LIS-mean|>t sqrt(n-1))", t, theory, tail.p_hat, tail.stderr,
                      ctx.tail_margin(theory, tail))


def _identity(ctx: _Ctx, grid, count):
    for ci, (n, q) in enumerate(_cells(grid)):
        hits = mc.collect(MallowsParams(n, q), mc.resolve_statistic("not_identity"), count,
                          ctx.seed.derive(ci), ctx.workers)
        tail = mc.tails_from_values(hits, [1])[0]
        exact = 1.0 - B.identity_probability(n, q)
        ctx.within(n, q, "P(pi != id)", None, exact, tail.p_hat, tail.stderr, ctx.tail_margin(exact, tail))
        ctx.lower(n, q, "exact P(pi != id) >= nq/8", None, n * q / 8, exact, None, 0.0)
        ctx.upper(n, q, "exact P(pi != id) <= 8nq", None, 8 * n * q, exact, None, 0.0)


def _sampler_gof(ctx: _Ctx, grid, count):
    for ci, (n, q) in enumerate(_cells(grid)):
        res = mc.goodness_of_fit(MallowsParams(n, q), count, ctx.seed.derive(ci), float(grid["tv_threshold"]),
                                 workers=ctx.workers)
        ctx.upper(n, q, "total variation", None, float(grid["tv_threshold"]), res.tv, None, 0.0)
        ok = res.chi_square_stat < res.chi_square_limit
        ctx.add(n, q, f"chi-square ({res.dof} dof) < 99.9th percentile", res.dof, res.chi_square_limit,
                res.chi_square_stat, None, 0.0, PASS if ok else FAIL)


def _block_decomposition(ctx: _Ctx, grid, count):
    for ci, (n, q) in enumerate(_cells(grid)):
        perms = mc.collect(MallowsParams(n, q), lambda b: b.perms, count, ctx.seed.derive(ci, 0), ctx.workers)
        sizes = ctx.seed.derive(ci, 1).generator().integers(1, n + 1, size=count)
        worst = -n
        for p, size in zip(perms, sizes):
            bd = mc.block_decomposition(p, int(size))
            worst = max(worst, bd.lis - bd.sum)
        ctx.upper(n, q, "max (LIS - sum of block LIS)", None, 0.0, float(worst), None, 0.0)


def _bounded_difference(ctx: _Ctx, grid, count):
    for ci, (n, q) in enumerate(_cells(grid)):
        worst = mc.bounded_difference_experiment(n, q, count, ctx.seed.derive(ci), ctx.workers)
        ctx.upper(n, q, "max |LIS(p_n) - LIS(p_n')|", None, 1.0, float(worst), None, 0.0)


def _monotonicity(ctx: _Ctx, grid, count):
    for ci, (n, q) in enumerate(_cells(grid)):
        bad, checked = mc.monotonicity_trials(n, q, count, ctx.seed.derive(ci), ctx.workers)
        ctx.upper(n, q, "monotonicity violations", None, 0.0, float(bad), None, 0.0)
        ctx.info(n, q, "trials checked (a_j < j)", None, None, float(checked))


def _greedy_window(ctx: _Ctx, grid, count):
    scale = float(grid["window_scale"])
    for ci, (n, q) in enumerate(_cells(grid)):
        L = grid.get("L") or max(1, math.floor(float(grid["L_factor"]) * B.lis_scale(n, q)))
        L = int(L)
        successes = 0
        invalid = 0
        for trial in range(count):
            record = run_process(n, q, ctx.seed.derive(ci, trial).generator())
            try:
                idx = mc.greedy_window_subsequence(record, L, scale)
            except mc.PropertyViolation:
                invalid += 1
                continue
            successes += idx.size == L
        ctx.upper(n, q, "invalid increasing subsequences", L, 0.0, float(invalid), None, 0.0)
        frac = successes / count
        ctx.lower(n, q, "fraction of runs reaching k = L", L, float(grid["min_success"]), frac,
                  math.sqrt(frac * (1 - frac) / count), 0.0)


@dataclass(frozen=True)
class Experiment:
    run: Callable
    defaults: dict
    count: int


EXPERIMENTS: dict[str, Experiment] = {
    "displacement": Experiment(_displacement, {"n": [1000], "q": [0.9, 0.99], "i": None, "t_max": 50}, 10_000),
    "lis-expectation": Experiment(
        _lis_expectation,
        {"n": [1000], "q": [0.01, 0.1], "scale_n": [50_000], "scale_exponent": 0.7, "band": [0.5, 2.0]},
        200,
    ),
    "lis-tails": Experiment(_lis_tails, {"n": [1000], "q": [0.99], "L": None}, 1000),
    "lln": Experiment(_lln, {"n": [1000, 10_000, 100_000], "exponent": 0.5, "band": [0.8, 1.2]}, 100),
    "mueller-starr": Experiment(_mueller_starr, {"n": [10_000], "beta": [-2.0, 0.0, 1.0], "rel_tol": 0.1}, 200),
    "lds-regimes": Experiment(_lds_regimes, {"n": [1_000_000], "q": ["1-4/n", 0.5, 1e-7], "factor": 8.0}, 60),
    "lds-tails": Experiment(_lds_tails, {"n": [10_000], "q": [0.5, 0.25, 0.1], "L": [2, 3, 4, 5, 6, 7, 8]}, 2000),
    "variance": Experiment(_variance, {"n": [100, 10_000], "q": [0.5, "1-4/n"], "slack": 0.1, "t": [1, 2, 3]},
                           10_000),
    "identity": Experiment(_identity, {"n": [100], "q": [1e-3]}, 100_000),
    "sampler-gof": Experiment(_sampler_gof, {"n": [5], "q": [0.3, 0.5, 0.9, 1.0, 2.0], "tv_threshold": 0.02},
                              200_000),
    "block-decomposition": Experiment(_block_decomposition, {"n": [200], "q": [0.9]}, 1000),
    "bounded-difference": Experiment(_bounded_difference, {"n": [200], "q": [0.9]}, 10_000),
    "monotonicity": Experiment(_monotonicity, {"n": [500], "q": [0.5]}, 10_000),
    "greedy-window": Experiment(
        _greedy_window,
        {"n": [10_000], "q": [0.99], "L": None, "L_factor": 0.05, "window_scale": 1.0, "min_success": 0.5},
        100,
    ),
}


def default_grid(experiment: str) -> dict:
    if experiment not in EXPERIMENTS:
        raise KeyError(f"unknown experiment {experiment!r}; known: {', '.join(EXPERIMENTS)}")
    return json.loads(json.dumps(EXPERIMENTS[experiment].defaults))


def run_verification(
    experiment: str,
    grid: dict | None = None,
    constants: B.ConstantsConfig = B.DEFAULT_CONSTANTS,
    count: int | None = None,
    seed: SeedSpec = SeedSpec(),
    margin_k: float = 4.0,
    workers: int = 1,
) -> VerificationReport:
    """Run one named experiment and return its report.

    ``grid`` entries override the experiment defaults key by key; ``count``
    overrides the default number of samples (or trials) per cell.
    """
    params = default_grid(experiment)
    unknown = set(grid or {}) - set(params)
    if unknown:
        raise KeyError(f"unknown grid keys for {experiment}: {sorted(unknown)}")
    params.update(grid or {})
    entry = EXPERIMENTS[experiment]
    count = int(count if count is not None else entry.count)
    report = VerificationReport(experiment, params, constants, count, seed, float(margin_k))
    ctx = _Ctx(experiment, constants, float(margin_k), seed, max(1, int(workers)), report.rows)
    entry.run(ctx, params, count)
    return report
