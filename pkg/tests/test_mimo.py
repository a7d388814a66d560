import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stpcm.mimo import (
    ChannelRealization,
    complex_normal,
    qr_decompose,
    rotate,
    sample_channel,
    sample_channels,
    sic_observation,
    transmit,
)
from stpcm.modem import build_sp_qam
from stpcm.polar import WorkCounter


def test_qr_identity():
    Q, R = qr_decompose(np.eye(2))
    assert np.allclose(Q, np.eye(2)) and np.allclose(R, np.eye(2))


def test_qr_swap():
    H = np.array([[0, 1], [1, 0]], dtype=complex)
    Q, R = qr_decompose(H)
    assert np.allclose(R, np.eye(2), atol=1e-14)
    assert np.allclose(Q, H, atol=1e-14)


@given(st.integers(0, 2**32 - 1), st.sampled_from([(1, 1), (1, 3), (2, 2), (2, 4), (3, 3), (4, 4)]))
@settings(max_examples=50)
def test_qr_invariants(seed, tm):
    T, M = tm
    H = sample_channels(np.random.default_rng(seed), (), T, M)
    Q, R = qr_decompose(H)
    assert np.abs(Q @ R - H).max() <= 1e-10
    assert np.abs(Q.conj().T @ Q - np.eye(M)).max() <= 1e-10
    assert np.all(np.tril(R, -1) == 0)
    d = np.diagonal(R[:T])
    assert np.all(d.imag == 0) and np.all(d.real >= 0)


def test_qr_batched_matches_single():
    H = sample_channels(np.random.default_rng(1), (5,), 2, 3)
    c = WorkCounter()
    Q, R = qr_decompose(H, c)
    assert c.qr == 5
    for t in range(5):
        q, r = qr_decompose(H[t])
        assert np.allclose(Q[t], q) and np.allclose(R[t], r)


def test_qr_rejects_wide():
    with pytest.raises(ValueError):
        qr_decompose(np.ones((2, 3)))


def test_entry_power():
    H = sample_channels(np.random.default_rng(2), (100_000,), 1, 1)
    assert abs(np.mean(np.abs(H) ** 2) - 1) < 0.02


@pytest.mark.parametrize("k, dof", [(0, 4), (1, 2)])
def test_diagonal_chi2_means_2x2(k, dof):
    H = sample_channels(np.random.default_rng(3), (100_000,), 2, 2)
    _, R = qr_decompose(H)
    assert abs(np.mean(2 * R[:, k, k].real ** 2) / dof - 1) < 0.02


def test_sample_channel_counts_qr():
    c = WorkCounter()
    real = sample_channel(2, 3, np.random.default_rng(0), c)
    assert c.qr == 1 and real.resampled == 0
    assert real.H.shape == (3, 2) and real.gains.shape == (2,)


def test_transmit_noiseless_identity():
    x = np.array([0.3 + 1j, -1 - 0.2j])
    y = transmit(x, np.eye(2), 0.0, np.random.default_rng(0))
    assert np.array_equal(y, x)


def test_transmit_noise_variance():
    sigma = 0.7
    y = transmit(np.zeros((100_000, 2)), np.eye(2)[None], sigma, np.random.default_rng(4))
    assert abs(np.var(y.real) / (sigma**2 / 2) - 1) < 0.02
    assert abs(np.var(y.imag) / (sigma**2 / 2) - 1) < 0.02


def test_transmit_deterministic():
    H = sample_channels(np.random.default_rng(0), (8,), 2, 2)
    x = np.ones((8, 2))
    a = transmit(x, H, 0.3, np.random.default_rng(7))
    b = transmit(x, H, 0.3, np.random.default_rng(7))
    assert np.array_equal(a, b)


def test_rotated_noise_stays_white():
    rng = np.random.default_rng(5)
    sigma = 0.8
    H = sample_channels(rng, (), 2, 3)
    Q, _ = qr_decompose(H)
    Z = sigma * complex_normal(rng, (100_000, 3))
    Zt = rotate(Z, Q[None])
    cov = Zt.T @ Zt.conj() / len(Zt)
    assert np.abs(cov - sigma**2 * np.eye(3)).max() < 0.02 * sigma**2


def test_sic_single_antenna():
    rng = np.random.default_rng(6)
    real = sample_channel(1, 2, rng)
    y = rng.normal(size=2) + 1j * rng.normal(size=2)
    obs, gain = sic_observation(y, real, {}, 0)
    assert obs == pytest.approx((real.Q.conj().T @ y)[0])
    assert gain == pytest.approx(real.R[0, 0].real)


@pytest.mark.parametrize("T, M", [(2, 2), (3, 4), (4, 4)])
def test_sic_genie_recovers_symbols(T, M):
    c = build_sp_qam(4)
    rng = np.random.default_rng(T * 10 + M)
    for _ in range(20):
        real = sample_channel(T, M, rng)
        x = rng.choice(c.points, T)
        y = real.H @ x
        for k in range(T):
            obs, gain = sic_observation(y, real, x, k)
            assert obs / gain == pytest.approx(x[k], abs=1e-10)


def test_sic_wrong_decision_shift():
    rng = np.random.default_rng(8)
    real = sample_channel(2, 2, rng)
    x = np.array([0.7 + 0.7j, -0.7 + 0.7j])
    y = real.H @ x + 0.1 * complex_normal(rng, 2)
    right, _ = sic_observation(y, real, x, 0)
    wrong_x2 = 0.7 - 0.7j
    wrong, _ = sic_observation(y, real, {1: wrong_x2}, 0)
    assert wrong - right == pytest.approx(real.R[0, 1] * (x[1] - wrong_x2), abs=1e-12)


def test_sic_missing_decision_rejected():
    real = sample_channel(3, 3, np.random.default_rng(0))
    with pytest.raises(ValueError):
        sic_observation(np.zeros(3), real, {2: 1.0}, 0)
    with pytest.raises(ValueError):
        sic_observation(np.zeros(3), real, {}, 3)


def test_realization_gains_property():
    H = np.array([[2, 1], [0, 3]], dtype=complex)
    Q, R = qr_decompose(H)
    assert np.allclose(ChannelRealization(H, Q, R).gains, [2, 3])
