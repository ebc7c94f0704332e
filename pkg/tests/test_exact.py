import math
from itertools import combinations

import numpy as np
import pytest

from mallows_lab import exact, model, perm


def test_enumerate_examples():
    d = exact.enumerate_distribution(2, 0.5)
    assert d.as_dict() == pytest.approx({(1, 2): 2 / 3, (2, 1): 1 / 3}, abs=1e-15)
    assert exact.enumerate_distribution(2, 1.0).probs.tolist() == [0.5, 0.5]
    assert exact.enumerate_distribution(3, 0.5).prob([1, 2, 3]) == pytest.approx(1 / 2.625, abs=1e-15)


@pytest.mark.parametrize("n", range(1, 9))
@pytest.mark.parametrize("q", [0.1, 0.5, 2.0])
def test_table_invariants_and_normalizer(n, q):
    d = exact.enumerate_distribution(n, q)
    assert d.probs.size == math.factorial(n)
    assert np.all(d.probs >= 0)
    assert d.probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert math.exp(d.log_z) == pytest.approx(model.partition_function(n, q), rel=1e-10)


def test_small_q_does_not_underflow_at_cap():
    d = exact.enumerate_distribution(10, 0.1)
    assert d.probs.sum() == pytest.approx(1.0, abs=1e-12)
    assert d.probs[0] == pytest.approx(1 / model.partition_function(10, 0.1), rel=1e-12)


def test_capacity_cap():
    with pytest.raises(exact.CapacityError):
        exact.enumerate_distribution(11, 0.5)


def test_table_order_is_lexicographic():
    table = exact.all_permutations(4)
    assert [tuple(r) for r in table.tolist()] == sorted(tuple(r) for r in table.tolist())
    assert perm.lehmer_rank_rows(table.astype(np.int64)).tolist() == list(range(24))


def test_expectation_examples():
    assert exact.exact_expectation(exact.enumerate_distribution(2, 1.0), perm.lis_length) == 1.5
    d = exact.enumerate_distribution(2, 0.5)
    assert exact.exact_expectation(d, perm.inversion_count) == pytest.approx(1 / 3, abs=1e-15)
    assert exact.exact_expectation(d, lambda p: 7.0) == pytest.approx(7.0)
    vec = exact.exact_expectation(d, lambda t: (t[:, 0] > t[:, 1]).astype(float), vectorized=True)
    assert vec == pytest.approx(1 / 3, abs=1e-15)


def test_event_probability_examples():
    d = exact.enumerate_distribution(3, 0.5)
    assert exact.exact_event_probability(d, lambda p: p[1] > p[0]) == pytest.approx(1.75 / 2.625, abs=1e-15)
    assert exact.exact_event_probability(d, lambda p: p[2] > p[0]) == pytest.approx(2 / 2.625, abs=1e-15)
    assert exact.exact_event_probability(d, lambda p: True) == pytest.approx(1.0, abs=1e-15)


def test_induced_block_examples():
    d = exact.enumerate_distribution(4, 0.5)
    sub = exact.induced_block_distribution(d, (2, 3))
    assert np.allclose(sub.probs, exact.enumerate_distribution(2, 0.5).probs, atol=1e-15, rtol=0)
    assert np.array_equal(exact.induced_block_distribution(d, (1, 2, 3, 4)).probs, d.probs)
    uni = exact.induced_block_distribution(exact.enumerate_distribution(3, 1.0), (1, 3))
    assert np.allclose(uni.probs, [0.5, 0.5], atol=1e-15)


def test_induced_block_rejects_bad_indices():
    d = exact.enumerate_distribution(3, 0.5)
    for bad in ((), (0, 1), (2, 2), (1, 4)):
        with pytest.raises(ValueError):
            exact.induced_block_distribution(d, bad)


@pytest.mark.parametrize(
    "n, q, first, second",
    [(6, 0.5, (1, 2), (4, 5)), (4, 1.0, (1, 2), (3, 4)), (5, 0.3, (1,), (3, 5)), (6, 2.0, (1, 3), (4, 6))],
)
def test_joint_factorizes(n, q, first, second):
    d = exact.enumerate_distribution(n, q)
    joint = exact.joint_induced_distribution(d, first, second)
    a = exact.induced_block_distribution(d, first).probs
    b = exact.induced_block_distribution(d, second).probs
    assert np.max(np.abs(joint - np.outer(a, b))) < 1e-12


@pytest.mark.parametrize("first, second", [((1, 3), (2, 4)), ((1, 2), (2, 3)), ((3,), (1,))])
def test_joint_rejects_interleaving(first, second):
    with pytest.raises(ValueError):
        exact.joint_induced_distribution(exact.enumerate_distribution(4, 0.5), first, second)


@pytest.mark.parametrize("n", range(2, 7))
@pytest.mark.parametrize("q", [0.5, 2.0])
def test_translation_invariance_and_block_law(n, q):
    d = exact.enumerate_distribution(n, q)
    for k in range(1, min(3, n) + 1):
        for idx in combinations(range(1, n + 1), k):
            base = exact.induced_block_distribution(d, idx).probs
            for shift in range(1, n - idx[-1] + 1):
                moved = exact.induced_block_distribution(d, [i + shift for i in idx]).probs
                assert np.max(np.abs(base - moved)) < 1e-12
    for m in range(1, n + 1):
        for start in range(1, n - m + 2):
            block = exact.induced_block_distribution(d, range(start, start + m)).probs
            assert np.max(np.abs(block - exact.enumerate_distribution(m, q).probs)) < 1e-12


def test_non_translates_differ():
    d = exact.enumerate_distribution(3, 0.5)
    a = exact.induced_block_distribution(d, (1, 2)).probs
    b = exact.induced_block_distribution(d, (1, 3)).probs
    assert a[0] == pytest.approx(1.75 / 2.625, abs=1e-15)
    assert b[0] == pytest.approx(2.0 / 2.625, abs=1e-15)
    assert np.max(np.abs(a - b)) > 0.05


@pytest.mark.parametrize("n", range(1, 7))
@pytest.mark.parametrize("q", [0.3, 0.5, 1.0, 2.0])
def test_reverse_and_invert_pushforwards(n, q):
    d = exact.enumerate_distribution(n, q)
    rev = exact.pushforward(d, perm.reverse)
    assert np.max(np.abs(rev.probs - exact.enumerate_distribution(n, 1 / q).probs)) <= 1e-12
    inv = exact.pushforward(d, perm.invert)
    assert np.max(np.abs(inv.probs - d.probs)) <= 1e-12


def test_total_variation_examples():
    d = exact.enumerate_distribution(3, 0.5)
    assert exact.total_variation(d, d) == 0.0
    assert exact.total_variation([1.0, 0.0], [0.0, 1.0]) == 1.0
    uni, tilt = exact.enumerate_distribution(2, 1.0), exact.enumerate_distribution(2, 0.5)
    assert exact.total_variation(uni, tilt) == pytest.approx(1 / 6, abs=1e-15)
    assert exact.total_variation([3, 1], [1, 1]) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        exact.total_variation(uni, d)


def test_csv_export():
    text = exact.enumerate_distribution(2, 0.5).to_csv()
    assert text == "perm,inv,prob\n1 2,0,0.6666666666666666\n2 1,1,0.3333333333333333\n"
