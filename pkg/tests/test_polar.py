import itertools

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stpcm.polar import (
    WorkCounter,
    bit_node,
    bit_reversal_permutation,
    check_node,
    path_metric_increment,
    polar_encode,
    polar_transform,
    sc_decode,
    scl_decode,
    scl_decode_batch,
)


def _perfect_llrs(x):
    return np.where(np.asarray(x) == 0, np.inf, -np.inf)


def _codeword_metric(x, llr):
    # -log P(x | y) for independent bits under the LLR convention
    return float(np.logaddexp(0.0, -(1 - 2 * np.asarray(x, dtype=float)) * llr).sum())


# -- bit reversal ------------------------------------------------------------


def test_bitrev_n0_identity():
    assert bit_reversal_permutation(0).tolist() == [0]


def test_bitrev_n2():
    # 1-based (1,3,2,4) written 0-based
    assert bit_reversal_permutation(2).tolist() == [0, 2, 1, 3]


@pytest.mark.parametrize("n", range(0, 11))
def test_bitrev_is_involution(n):
    p = bit_reversal_permutation(n)
    assert np.array_equal(p[p], np.arange(1 << n))
    for i in range(min(1 << n, 64)):
        assert p[i] == int(format(i, f"0{n}b")[::-1] or "0", 2)


def test_bitrev_rejects_negative():
    with pytest.raises(ValueError):
        bit_reversal_permutation(-1)


# -- encoding ----------------------------------------------------------------


def test_encode_n2():
    assert polar_encode([0, 1]).tolist() == [1, 1]
    assert polar_encode([1, 0]).tolist() == [1, 0]


def test_encode_n4_unit_vectors():
    # row convention x = u B F^{(x)2}: the last input touches every output
    assert polar_encode([1, 0, 0, 0]).tolist() == [1, 0, 0, 0]
    assert polar_encode([0, 0, 0, 1]).tolist() == [1, 1, 1, 1]
    assert polar_encode([0, 1, 0, 0]).tolist() == [1, 0, 1, 0]
    assert polar_encode([0, 0, 1, 0]).tolist() == [1, 1, 0, 0]


def test_encode_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        polar_encode([1, 0, 1])


def _generator(n):
    F = np.array([[1, 0], [1, 1]], dtype=np.int64)
    G = np.array([[1]], dtype=np.int64)
    for _ in range(n):
        G = np.kron(G, F)
    return G[bit_reversal_permutation(n)] % 2


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_encode_matches_kronecker_generator(n):
    G = _generator(n)
    rng = np.random.default_rng(n)
    for _ in range(20):
        u = rng.integers(0, 2, 1 << n)
        assert np.array_equal(polar_encode(u), (u @ G) % 2)


@given(st.integers(0, 6).flatmap(lambda n: st.lists(st.integers(0, 1), min_size=1 << n, max_size=1 << n)))
def test_transform_involution(bits):
    u = np.array(bits, dtype=np.uint8)
    assert np.array_equal(polar_transform(polar_transform(u)), u)
    assert np.array_equal(polar_encode(polar_encode(u)), u)


# -- node updates ------------------------------------------------------------


@given(st.floats(-30, 30), st.floats(-30, 30))
def test_check_node_matches_tanh_rule(a, b):
    # float64 tanh loses the tail near +-1, so evaluate the reference in mpmath
    with mpmath.workdps(50):
        ref = float(2 * mpmath.atanh(mpmath.tanh(mpmath.mpf(a) / 2) * mpmath.tanh(mpmath.mpf(b) / 2)))
    assert check_node(np.array(a), np.array(b)) == pytest.approx(ref, rel=1e-12, abs=1e-12)


def test_check_node_large_and_infinite():
    assert check_node(np.array(800.0), np.array(-900.0)) == pytest.approx(-800.0)
    assert check_node(np.array(np.inf), np.array(-np.inf)) == -np.inf
    assert check_node(np.array(np.inf), np.array(3.0)) == pytest.approx(3.0)
    assert check_node(np.array(0.0), np.array(np.inf)) == 0.0


def test_bit_node():
    a, b = np.array([2.0, 2.0]), np.array([1.0, 1.0])
    assert bit_node(a, b, np.array([0, 1])).tolist() == [3.0, -1.0]
    assert not np.isnan(bit_node(np.array(np.inf), np.array(-np.inf), np.array(0)))


@given(st.floats(-1e3, 1e3) | st.sampled_from([np.inf, -np.inf]), st.integers(0, 1))
def test_metric_increment_nonnegative(llr, bit):
    assert path_metric_increment(np.array(llr), bit) >= 0


# -- SC ----------------------------------------------------------------------


def test_sc_all_frozen_echo():
    llr = np.random.default_rng(0).normal(size=16) * 3
    assert sc_decode(llr, np.ones(16, bool)).tolist() == [0] * 16


def test_sc_n2_perfect():
    assert sc_decode([np.inf, np.inf], np.zeros(2, bool)).tolist() == [0, 0]


def test_sc_n4_last_bit():
    x = polar_encode([0, 0, 0, 1])
    u = sc_decode(_perfect_llrs(x), np.array([True, True, True, False]))
    assert u[3] == 1


def test_sc_ties_decide_zero():
    assert sc_decode(np.zeros(4), np.zeros(4, bool)).tolist() == [0, 0, 0, 0]


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_sc_round_trip_exhaustive(n):
    # every frozen set and every information pattern, frozen values zero
    N = 1 << n
    rng = np.random.default_rng(n)
    masks = list(itertools.product([0, 1], repeat=N)) if N <= 8 else [rng.integers(0, 2, N) for _ in range(24)]
    for mask in masks:
        frozen = np.array(mask, bool)
        info = np.flatnonzero(~frozen)
        pats = np.array(list(itertools.product([0, 1], repeat=len(info))), dtype=np.uint8).reshape(2 ** len(info), len(info))
        if len(pats) > 256:
            pats = pats[rng.choice(len(pats), 256, replace=False)]
        u = np.zeros((len(pats), N), np.uint8)
        u[:, info] = pats
        out = sc_decode(_perfect_llrs(polar_encode(u)), frozen)
        assert np.array_equal(out, u)


def test_sc_round_trip_all_inputs_n16():
    u = ((np.arange(1 << 16)[:, None] >> np.arange(16)) & 1).astype(np.uint8)
    out = sc_decode(_perfect_llrs(polar_encode(u)), np.zeros(16, bool))
    assert np.array_equal(out, u)


def test_sc_nonzero_frozen_values():
    frozen = np.array([1, 1, 0, 1, 0, 0, 0, 0], bool)
    fv = np.array([1, 0, 0, 1, 0, 0, 0, 0], np.uint8)
    u = fv.copy()
    u[~frozen] = [1, 0, 1, 1, 0]
    assert np.array_equal(sc_decode(_perfect_llrs(polar_encode(u)), frozen, fv), u)


def test_sc_batch_equals_single():
    rng = np.random.default_rng(3)
    llr = rng.normal(1, 2, (10, 32))
    frozen = rng.random(32) < 0.5
    batch = sc_decode(llr, frozen)
    for b in range(10):
        assert np.array_equal(sc_decode(llr[b], frozen), batch[b])


def test_sc_counter_counts_butterflies():
    c = WorkCounter()
    sc_decode(np.ones((3, 64)), np.zeros(64, bool), counter=c)
    # per-frame tally: N/2 * 2 updates per stage, log2 N stages
    assert c.butterflies == 64 * 6


# -- SCL ---------------------------------------------------------------------


@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 4, 8, 16]))
@settings(max_examples=40, deadline=None)
def test_scl_l1_equals_sc(seed, N):
    rng = np.random.default_rng(seed)
    llr = rng.normal(0.5, 2.0, N)
    frozen = rng.random(N) < 0.5
    paths = scl_decode(llr, frozen, 1)
    assert len(paths) == 1
    assert np.array_equal(paths[0].decisions, sc_decode(llr, frozen))


def test_scl_l1_equals_sc_batched_with_ties():
    rng = np.random.default_rng(11)
    llr = np.round(rng.normal(0, 1, (50, 32)))
    frozen = rng.random(32) < 0.4
    u, _ = scl_decode_batch(llr, frozen, 1)
    assert np.array_equal(u[:, 0], sc_decode(llr, frozen))


@pytest.mark.parametrize("seed", range(6))
def test_scl_full_list_is_ml(seed):
    rng = np.random.default_rng(seed)
    N = 32 if seed % 2 else 16
    K = 6 + seed % 4
    frozen = np.ones(N, bool)
    frozen[rng.choice(N, K, replace=False)] = False
    llr = rng.normal(1.0, 2.0, N)
    paths = scl_decode(llr, frozen, 1 << K)
    assert len(paths) == 1 << K
    info = np.flatnonzero(~frozen)
    got = {tuple(p.decisions[info]) for p in paths}
    assert len(got) == 1 << K
    u = np.zeros((1 << K, N), np.uint8)
    u[:, info] = np.array(list(itertools.product([0, 1], repeat=K)))
    metrics = [_codeword_metric(x, llr) for x in polar_encode(u)]
    assert paths[0].metric == pytest.approx(min(metrics), rel=1e-9, abs=1e-9)
    best = u[int(np.argmin(metrics))]
    assert np.array_equal(paths[0].decisions, best)


def test_scl_sorted_and_noiseless_rank1():
    rng = np.random.default_rng(5)
    frozen = rng.random(64) < 0.5
    u = np.zeros(64, np.uint8)
    u[~frozen] = rng.integers(0, 2, (~frozen).sum())
    llr = np.where(polar_encode(u) == 0, 20.0, -20.0)
    for L in (1, 2, 8, 32):
        paths = scl_decode(llr, frozen, L)
        ms = [p.metric for p in paths]
        assert ms == sorted(ms)
        assert np.array_equal(paths[0].decisions, u)


def test_scl_metric_nondecreasing_along_prefix():
    # metric of a truncated code (later bits frozen) never exceeds that of the full path
    rng = np.random.default_rng(9)
    llr = rng.normal(0.5, 2, 16)
    frozen = np.zeros(16, bool)
    p = scl_decode(llr, frozen, 4)[0]
    _, prefix_llrs = sc_decode(llr, frozen, frozen_values=None, return_llrs=True)
    inc = path_metric_increment(prefix_llrs, sc_decode(llr, frozen))
    assert np.all(np.diff(np.cumsum(inc)) >= 0)
    assert p.metric <= np.sum(inc) + 1e-9


def test_scl_rejects_bad_list_size():
    with pytest.raises(ValueError):
        scl_decode(np.zeros(4), np.zeros(4, bool), 0)
