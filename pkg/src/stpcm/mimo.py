"""Rayleigh fast fading, the linear MIMO channel law, and QR-based SIC.

Antenna indices here are physical and 0-based.  Streams are detected from the
last transmit antenna (index ``T-1``) down to the first; the observation of
antenna ``k`` after cancelling antennas ``k+1..T-1`` is the scalar channel
``ỹ_k = r_kk x_k + z̃_k`` with ``2 r_kk^2 ~ χ²(2(M-k))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .polar import WorkCounter

__all__ = [
    "ChannelRealization",
    "complex_normal",
    "qr_decompose",
    "sample_channel",
    "sample_channels",
    "transmit",
    "rotate",
    "sic_observation",
    "sic_cancel",
]


@dataclass
class ChannelRealization:
    """``H = Q R`` for one slot, or stacked along leading axes."""

    H: np.ndarray
    Q: np.ndarray
    R: np.ndarray

    @property
    def gains(self) -> np.ndarray:
        """Diagonal ``r_kk`` (real, non-negative), shape ``(..., T)``."""
        T = self.R.shape[-1]
        return np.diagonal(self.R[..., :T, :], axis1=-2, axis2=-1).real


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Draw ``CN(0, 1)`` samples: independent ``N(0, 1/2)`` real and imaginary parts."""
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) * np.sqrt(0.5)


def qr_decompose(H, counter: WorkCounter | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Full QR of ``H`` (shape ``(..., M, T)``, ``M >= T``) with real non-negative ``diag(R)``.

    The phase of each diagonal entry is moved into the matching column of ``Q``.
    """
    H = np.asarray(H, dtype=complex)
    M, T = H.shape[-2:]
    if M < T:
        raise ValueError(f"need M >= T, got M={M}, T={T}")
    Q, R = np.linalg.qr(H, mode="complete")
    diag = np.diagonal(R[..., :T, :], axis1=-2, axis2=-1)
    mag = np.abs(diag)
    phase = np.where(mag > 0, diag / np.where(mag > 0, mag, 1.0), 1.0)
    R[..., :T, :] *= np.conj(phase)[..., :, None]
    Q[..., :, :T] *= phase[..., None, :]
    idx = np.arange(T)
    R[..., idx, idx] = mag
    if counter is not None:
        counter.qr += int(np.prod(H.shape[:-2], dtype=np.int64))
    return Q, R


def sample_channels(rng: np.random.Generator, shape, T: int, M: int) -> np.ndarray:
    """I.i.d. ``CN(0, 1)`` channel matrices of shape ``(*shape, M, T)``."""
    if M < T:
        raise ValueError(f"need M >= T, got M={M}, T={T}")
    return complex_normal(rng, (*tuple(shape), M, T))


def sample_channel(
    T: int, M: int, rng: np.random.Generator, counter: WorkCounter | None = None
) -> ChannelRealization:
    """Draw one fading matrix and factor it.

    A (probability-zero) rank-deficient draw is redrawn; the number of redraws
    is stored on the returned object as ``resampled``.
    """
    resampled = 0
    while True:
        H = sample_channels(rng, (), T, M)
        Q, R = qr_decompose(H, counter)
        if np.all(np.diagonal(R[:T, :]).real > 0):
            break
        resampled += 1
    real = ChannelRealization(H, Q, R)
    real.resampled = resampled
    return real


def transmit(X, H, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """``Y = H X + Z`` with ``Z ~ CN(0, sigma^2)`` per receive antenna.

    ``X`` has shape ``(..., T)`` and ``H`` shape ``(..., M, T)``.
    """
    X = np.asarray(X, dtype=complex)
    H = np.asarray(H, dtype=complex)
    clean = (H * X[..., None, :]).sum(axis=-1)
    return clean + sigma * complex_normal(rng, clean.shape)


def rotate(Y, Q) -> np.ndarray:
    """``Q^H Y`` per slot: ``Y`` shape ``(..., M)``, ``Q`` shape ``(..., M, M)``."""
    return (np.conj(Q) * np.asarray(Y)[..., :, None]).sum(axis=-2)


def sic_cancel(y_tilde, R, decided, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Remove already-detected antennas ``k+1..T-1`` from ``ỹ_k``.

    ``decided`` has shape ``(..., T)``; only entries ``k+1..T-1`` are read.
    Returns ``(observation, gain)``.
    """
    T = R.shape[-1]
    obs = np.asarray(y_tilde)[..., k]
    if k + 1 < T:
        obs = obs - (R[..., k, k + 1 :] * np.asarray(decided)[..., k + 1 :]).sum(axis=-1)
    return obs, R[..., k, k].real


def sic_observation(Y, realization: ChannelRealization, decided, k: int):
    """Effective scalar observation of antenna ``k`` for one slot.

    ``decided`` maps (or indexes) antenna ``k' > k`` to its decided symbol;
    every ``k'`` in ``k+1..T-1`` must be supplied.
    """
    T = realization.R.shape[-1]
    if not 0 <= k < T:
        raise ValueError(f"stream index {k} outside 0..{T - 1}")
    full = np.zeros(T, dtype=complex)
    for kk in range(k + 1, T):
        try:
            full[kk] = decided[kk]
        except (KeyError, IndexError):
            raise ValueError(f"missing decision for antenna {kk}") from None
    y_tilde = rotate(Y, realization.Q)
    obs, gain = sic_cancel(y_tilde, realization.R, full, k)
    return complex(obs), float(gain)
