"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Monte Carlo criteria run the named verification experiment at its default
grid and seed, then check the rows the criterion is about. Ratios that the
theory only pins up to constants are regression-locked to the seed-0 values.
"""

import math
import subprocess
import sys
import time
from fractions import Fraction
from itertools import combinations, permutations

import numpy as np
import pytest

from mallows_lab import exact, model, montecarlo as mc, perm
from mallows_lab.bounds import ell_beta
from mallows_lab.rng import SeedSpec
from mallows_lab.verify import FAIL, PASS, run_verification
from reference import inversions_ref, mahonian

LOCK_REL = 1e-9


def rows(report, text):
    found = [r for r in report.rows if text in r.statistic]
    assert found, f"no rows matching {text!r}"
    return found


def all_pass(found):
    bad = [r for r in found if r.verdict == FAIL]
    assert not bad, bad[:3]
    assert all(r.verdict == PASS for r in found if r.applicable)


def test_01_partition_function(criterion):
    with criterion(1, "partition function equals brute-force sum over S_n, n <= 8"):
        start = time.perf_counter()
        for n in range(1, 9):
            counts = mahonian(n)
            for q in (0.1, 0.5, 0.9, 1.0, 2.0):
                brute = float(sum(c * Fraction(q) ** k for k, c in enumerate(counts)))
                assert abs(model.partition_function(n, q) - brute) <= 1e-10 * brute
        assert time.perf_counter() - start < 60


def test_02_sampler_exactness(criterion):
    with criterion(2, "sampler TV <= 0.02 and chi-square below 99.9th percentile at n = 5"):
        start = time.perf_counter()
        rep = run_verification("sampler-gof")
        assert rep.count == 200_000 and rep.params["q"] == [0.3, 0.5, 0.9, 1.0, 2.0]
        tv = rows(rep, "total variation")
        chi = rows(rep, "chi-square")
        assert len(tv) == len(chi) == 5
        assert all(r.threshold == 119 for r in chi)
        all_pass(tv + chi)
        assert time.perf_counter() - start < 5 * 60


def test_03_duality(criterion):
    with criterion(3, "reversal and inverse identities; exact pushforwards"):
        for n in range(1, 8):
            for t in permutations(range(1, n + 1)):
                p = np.array(t)
                inv = inversions_ref(t)
                assert perm.inversion_count(perm.reverse(p)) == n * (n - 1) // 2 - inv
                assert perm.inversion_count(perm.invert(p)) == inv
        for n in range(1, 7):
            for q in (0.3, 0.5, 0.9, 1.0, 2.0):
                d = exact.enumerate_distribution(n, q)
                rev = exact.pushforward(d, perm.reverse).probs
                assert np.max(np.abs(rev - exact.enumerate_distribution(n, 1 / q).probs)) <= 1e-12
                assert np.max(np.abs(exact.pushforward(d, perm.invert).probs - d.probs)) <= 1e-12


def test_04_structure(criterion):
    with criterion(4, "independence, translation invariance, block law, non-translate inequality"):
        n = 6
        for q in (0.5, 2.0):
            d = exact.enumerate_distribution(n, q)
            joint = exact.joint_induced_distribution(d, (1, 2), (4, 5))
            a = exact.induced_block_distribution(d, (1, 2)).probs
            b = exact.induced_block_distribution(d, (4, 5)).probs
            assert np.max(np.abs(joint - np.outer(a, b))) <= 1e-12
            for k in (1, 2, 3):
                for idx in combinations(range(1, n + 1), k):
                    base = exact.induced_block_distribution(d, idx).probs
                    for shift in range(1, n - idx[-1] + 1):
                        moved = exact.induced_block_distribution(d, [i + shift for i in idx]).probs
                        assert np.max(np.abs(base - moved)) <= 1e-12
            for m in range(1, n + 1):
                for start in range(1, n - m + 2):
                    block = exact.induced_block_distribution(d, range(start, start + m)).probs
                    assert np.max(np.abs(block - exact.enumerate_distribution(m, q).probs)) <= 1e-12
        d3 = exact.enumerate_distribution(3, 0.5)
        p21 = exact.exact_event_probability(d3, lambda p: p[1] > p[0])
        p31 = exact.exact_event_probability(d3, lambda p: p[2] > p[0])
        assert p21 == pytest.approx(1.75 / 2.625, abs=1e-15)
        # (1 + q + q^2)/Z against (1 + 2q)/Z, counted by hand over S_3
        assert p31 == pytest.approx(2.0 / 2.625, abs=1e-15)
        assert p21 != p31


def test_05_displacement(criterion):
    with criterion(5, "displacement tails and mean against 2q^t, q^(2t-1)/2 and min(2q/(1-q), n-1)"):
        start = time.perf_counter()
        rep = run_verification("displacement")
        assert rep.count == 10_000 and rep.margin_k == 4.0
        upper = rows(rep, "upper")
        lower = rows(rep, "lower")
        mean = [r for r in rep.rows if r.statistic.startswith("E|")]
        assert len(upper) == 2 * 3 * 50 and len(mean) == 6
        # t <= (n + 5)/8 holds for every t <= 50 at n = 1000
        assert {r.threshold for r in lower if r.applicable} == set(range(1, 51))
        all_pass(upper + lower + mean)
        assert time.perf_counter() - start < 5 * 60


def test_06_lis_expectation(criterion):
    with criterion(6, "small-q sandwich and n sqrt(1-q) scale law for E LIS"):
        rep = run_verification("lis-expectation")
        sandwich = rows(rep, ">= n(1-q)") + rows(rep, "<= n - q(n-1)/(1+q)")
        assert len(sandwich) == 4
        all_pass(sandwich)
        scale = rows(rep, "E LIS / (n sqrt(1-q))")
        assert [(r.theory, r.verdict) for r in scale] == [(0.5, PASS), (2.0, PASS)]
        assert scale[0].empirical == pytest.approx(1.0155679204204475, rel=LOCK_REL)


LLN_LOCK = [0.9248265434080483, 0.9290099999999996, 0.9443606155393952]


def test_07_lln(criterion):
    with criterion(7, "LIS/(n sqrt(1-q)) approaches 1 along n = 1e3, 1e4, 1e5"):
        rep = run_verification("lln")
        ratios = [r.empirical for r in rep.rows if r.statistic == "E LIS / (n sqrt(1-q))"]
        assert ratios == pytest.approx(LLN_LOCK, rel=LOCK_REL)
        steps = rows(rep, "strictly below previous")
        assert len(steps) == 2
        all_pass(steps + rows(rep, "band"))
        assert 0.8 <= ratios[-1] <= 1.2


def test_08_mueller_starr(criterion):
    with criterion(8, "mean LIS/sqrt(n) within 10% of ell(beta); ell(0) = 2"):
        assert ell_beta(0.0) == 2.0
        rep = run_verification("mueller-starr")
        found = rows(rep, "vs ell(beta)")
        assert [r.threshold for r in found] == [-2, 0, 1]
        assert all(r.margin == pytest.approx(0.1 * r.theory) for r in found)
        all_pass(found + rows(rep, "ell(0)"))


def test_09_variance(criterion):
    with criterion(9, "var LIS <= 1.1 (n-1) and Gaussian concentration"):
        rep = run_verification("variance")
        var = rows(rep, "var LIS")
        assert len(var) == 4 and all(r.theory == pytest.approx(1.1 * (r.n - 1)) for r in var)
        conc = rows(rep, "|LIS-mean|")
        assert len(conc) == 12
        all_pass(var + conc)


REGIME_LOCK = [2.8500333333347587, 1.3738073300947902, 0.8333333333333334]


def test_10_lds(criterion):
    with criterion(10, "LDS universal lower bound, refined upper bound, regime containment"):
        tails = run_verification("lds-tails")
        universal = [r for r in rows(tails, "universal lower") if r.q == 0.5 and r.threshold in (2, 3, 4)]
        assert len(universal) == 3
        all_pass(universal)
        refined = [r for r in rows(tails, "n C^L q^(L(L-1)/2)") if r.q < 0.5 and 4 <= r.threshold <= 8]
        assert len(refined) == 10 and all(r.applicable for r in refined)
        all_pass(refined)
        all_pass(tails.rows)
        regimes = run_verification("lds-regimes")
        assert [r.statistic.split("[")[1].split("]")[0] for r in rows(regimes, "/ scale")] == [
            "SQRT_SCALE",
            "SQRT_LOG_SCALE",
            "SMALL_Q",
        ]
        all_pass(rows(regimes, "scale/8") + rows(regimes, "8 scale"))
        ratios = [r.empirical for r in rows(regimes, "/ scale")]
        assert ratios == pytest.approx(REGIME_LOCK, rel=LOCK_REL)


def test_11_identity(criterion):
    with criterion(11, "P(pi != id) within 4 sigma of exact value in [nq/8, 8nq]"):
        rep = run_verification("identity")
        assert rep.count == 100_000
        assert len(rep.rows) == 3
        all_pass(rep.rows)
        exact_value = 1 - (1 - 1e-3) ** 100 / math.prod(1 - 1e-3**i for i in range(1, 101))
        assert rep.rows[0].theory == pytest.approx(exact_value, rel=1e-12)


def test_12_deterministic_properties(criterion, monkeypatch):
    with criterion(12, "Erdos-Szekeres, bounded differences, monotonicity, block decomposition, greedy window"):
        calls = []
        original = mc.SampleBlock.check_erdos_szekeres

        def counting(self):
            calls.append(self.perms.shape[0])
            return original(self)

        monkeypatch.setattr(mc.SampleBlock, "check_erdos_szekeres", counting)
        reports = {
            name: run_verification(name)
            for name in ("bounded-difference", "monotonicity", "block-decomposition", "greedy-window")
        }
        for rep in reports.values():
            all_pass(rep.rows)
        assert reports["bounded-difference"].count == 10_000
        assert rows(reports["bounded-difference"], "max |LIS")[0].empirical <= 1
        assert reports["monotonicity"].count == 10_000
        assert rows(reports["monotonicity"], "violations")[0].empirical == 0
        assert reports["block-decomposition"].count == 1000
        assert rows(reports["greedy-window"], "invalid")[0].empirical == 0
        # every permutation drawn by the harness went through the check
        assert sum(calls) == reports["block-decomposition"].count
        calls.clear()
        run_verification("identity", count=3000)
        assert sum(calls) == 3000


def _cli_verify(*args):
    cmd = [sys.executable, "-m", "mallows_lab.cli", "verify", *map(str, args)]
    return subprocess.run(cmd, capture_output=True).stdout


def test_13_reproducibility(criterion):
    with criterion(13, "byte-identical reports at 1, 4 and 16 workers"):
        cases = [
            ("displacement", dict(count=3000, grid={"q": [0.9], "t_max": 10})),
            ("sampler-gof", dict(count=12_000, grid={"q": [0.5, 2.0]})),
            ("lds-tails", dict(count=1500, grid={"q": [0.5]})),
            ("bounded-difference", dict(count=3000)),
            ("monotonicity", dict(count=3000)),
        ]
        for name, kwargs in cases:
            outputs = {
                w: (r.to_json(), r.to_text())
                for w in (1, 4, 16)
                for r in [run_verification(name, seed=SeedSpec(2024, 7), workers=w, **kwargs)]
            }
            assert outputs[1] == outputs[4] == outputs[16]
        cli = {w: _cli_verify("variance", "--n", 100, "--count", 2000, "--seed", 5, "--workers", w) for w in (1, 4, 16)}
        assert cli[1] and cli[1] == cli[4] == cli[16]
