"""Square QAM with per-axis set-partition labeling and level-wise demapping.

Each axis carries ``m/2`` bits.  Axis label ``p`` (``0 <= p < 2**(m/2)``)
selects the ``p``-th smallest PAM amplitude, and bit ``j`` (1-based) of the
axis is the ``j``-th least significant bit of ``p``.  Fixing bit 1 splits the
amplitudes into even/odd index subsets, fixing bit 2 splits again, and so on:
every known bit doubles the minimum distance within the surviving subset.

Symbol bits ``b_1..b_m`` are split as real axis ``b_1..b_{m/2}``, imaginary
axis ``b_{m/2+1}..b_m``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

__all__ = [
    "Constellation",
    "LevelObservation",
    "build_sp_qam",
    "map_symbol",
    "map_symbols",
    "level_llr",
    "level_llrs",
]


@dataclass(frozen=True)
class Constellation:
    """Unit-energy square QAM.

    ``amplitudes[p]`` is the per-axis amplitude for axis label ``p``.
    ``points[l]`` is the complex point for the integer label
    ``l = sum_i b_i 2**(i-1)`` over all ``m`` bits.
    """

    m: int
    amplitudes: np.ndarray
    points: np.ndarray

    @property
    def bits_per_axis(self) -> int:
        return self.m // 2


def build_sp_qam(m: int) -> Constellation:
    """Build the set-partition labeled ``2**m``-QAM with unit average energy."""
    if m < 2 or m % 2:
        raise ValueError(f"modulation order must be even and >= 2, got {m}")
    n_amp = 1 << (m // 2)
    raw = 2.0 * np.arange(n_amp) - (n_amp - 1)
    # both axes share the amplitude set: E|x|^2 = 2 * mean(raw^2) * d^2 = 1
    d = 1.0 / np.sqrt(2.0 * np.mean(raw**2))
    amps = raw * d
    labels = np.arange(1 << m)
    points = amps[labels & (n_amp - 1)] + 1j * amps[labels >> (m // 2)]
    return Constellation(m, amps, points)


def _axis_labels(bits: np.ndarray, half: int) -> tuple[np.ndarray, np.ndarray]:
    weights = 1 << np.arange(half)
    p = (bits[..., :half].astype(np.int64) * weights).sum(axis=-1)
    q = (bits[..., half:].astype(np.int64) * weights).sum(axis=-1)
    return p, q


def map_symbols(bits, c: Constellation) -> np.ndarray:
    """Map bit tuples of shape ``(..., m)`` to complex symbols of shape ``(...)``."""
    bits = np.asarray(bits)
    if bits.shape[-1] != c.m:
        raise ValueError(f"expected {c.m} bits per symbol, got {bits.shape[-1]}")
    p, q = _axis_labels(bits, c.m // 2)
    return c.amplitudes[p] + 1j * c.amplitudes[q]


def map_symbol(bits: Sequence[int], c: Constellation) -> complex:
    """Map exactly ``m`` bits to one constellation point."""
    bits = np.asarray(bits)
    if bits.ndim != 1:
        raise ValueError("map_symbol takes a single bit tuple")
    return complex(map_symbols(bits, c))


def level_llrs(y, gain, sigma: float, level: int, known, c: Constellation) -> np.ndarray:
    """Vectorized level-channel LLRs for one axis.

    Parameters
    ----------
    y : array_like of float
        Observed axis component (real or imaginary part of ``ỹ``).
    gain : array_like of float
        Real effective gain on that observation.
    sigma : float
        Complex noise standard deviation (``z ~ CN(0, sigma^2)``).
    level : int
        1-based bit level ``j`` within the axis.
    known : array_like of int
        Integer value of the ``j - 1`` already decided lower bits of the axis
        label, broadcast against ``y``.
    """
    half = c.m // 2
    if not 1 <= level <= half:
        raise ValueError(f"level must be in 1..{half}, got {level}")
    y = np.asarray(y, dtype=float)[..., None]
    gain = np.asarray(gain, dtype=float)[..., None]
    known = np.asarray(known, dtype=np.int64)[..., None]
    labels = np.arange(1 << half)
    low = (1 << (level - 1)) - 1
    valid = (labels & low) == known
    bit = (labels >> (level - 1)) & 1
    metric = -((y - gain * c.amplitudes) ** 2) / sigma**2
    l0 = logsumexp(np.where(valid & (bit == 0), metric, -np.inf), axis=-1)
    l1 = logsumexp(np.where(valid & (bit == 1), metric, -np.inf), axis=-1)
    return l0 - l1


@dataclass(frozen=True)
class LevelObservation:
    """One scalar channel use seen by a level demapper."""

    value: complex
    gain: float
    sigma: float
    known_bits: tuple[int, ...] = ()

    def __post_init__(self):
        if self.gain < 0 or self.sigma <= 0:
            raise ValueError("gain must be >= 0 and sigma > 0")


def level_llr(obs: LevelObservation, level: int, axis: str, c: Constellation) -> float:
    """LLR of bit ``level`` on ``axis`` ('real' or 'imag') given lower known bits."""
    if len(obs.known_bits) != level - 1:
        raise ValueError(f"level {level} needs {level - 1} known bits")
    if axis not in ("real", "imag"):
        raise ValueError("axis must be 'real' or 'imag'")
    y = obs.value.real if axis == "real" else obs.value.imag
    known = sum(int(b) << i for i, b in enumerate(obs.known_bits))
    return float(level_llrs(y, obs.gain, obs.sigma, level, known, c))
