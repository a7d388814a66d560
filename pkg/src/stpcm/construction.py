"""Reliability evaluation and frozen-set selection.

Noise conventions: ``sigma`` is the complex noise standard deviation, so each
real axis sees ``N(0, sigma^2 / 2)``.  Constellations have unit average
energy.  Capacities are in bits per complex symbol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.special import log_ndtr

from .modem import build_sp_qam, level_llrs

__all__ = [
    "CONSTRUCTION_SEED",
    "CodeConstruction",
    "bec_bhattacharyya",
    "ga_phi",
    "ga_phi_inverse",
    "ga_evolve",
    "ga_error_probability",
    "awgn_capacity_qam",
    "chi2_pdf",
    "ergodic_stream_capacity",
    "mimo_ergodic_capacity",
    "solve_equivalent_sigma",
    "equivalent_awgn_sigma",
    "level_llr_means",
    "build_construction",
]

CONSTRUCTION_SEED = 20140301
SIGMA_MIN = 1e-6
SIGMA_MAX = 1e3
SOLVER_TOL = 1e-6

_TRUNC = 12.0
_T_NODES, _T_WEIGHTS = np.polynomial.legendre.leggauss(512)
_T_NODES = _T_NODES * _TRUNC
_T_WEIGHTS = _T_WEIGHTS * _TRUNC * np.exp(-0.5 * _T_NODES**2) / np.sqrt(2 * np.pi)
_S_NODES, _S_WEIGHTS = np.polynomial.legendre.leggauss(256)
_S_NODES = 0.5 * (_S_NODES + 1.0)
_S_WEIGHTS = 0.5 * _S_WEIGHTS


# --------------------------------------------------------------------------- BEC


def bec_bhattacharyya(n_log2: int, z0: float) -> np.ndarray:
    """Exact BEC erasure probabilities of the ``2**n_log2`` synthesized channels.

    Index order is decoding order: channel ``2i`` is the "minus" child
    (``2Z - Z^2``) and ``2i + 1`` the "plus" child (``Z^2``) of channel ``i``
    one level up.
    """
    if not 0.0 <= z0 <= 1.0:
        raise ValueError(f"erasure probability must lie in [0, 1], got {z0}")
    z = np.array([float(z0)])
    for _ in range(n_log2):
        out = np.empty(2 * z.size)
        out[0::2] = 2 * z - z * z
        out[1::2] = z * z
        z = out
    return z


# --------------------------------------------------------------------------- GA

_PHI_A, _PHI_B, _PHI_C = -0.4527, 0.86, 0.0218


def _log_phi(x):
    x = np.asarray(x, dtype=float)
    small = np.where(x > 0, _PHI_A * np.power(np.maximum(x, 0.0), _PHI_B) + _PHI_C, 0.0)
    xl = np.maximum(x, 10.0)
    large = 0.5 * np.log(np.pi / xl) - xl / 4 + np.log1p(-10.0 / (7.0 * xl))
    return np.where(x < 10.0, small, large)


def ga_phi(x):
    """Chung's approximation of the GA ``φ`` function (``φ(0) = 1``)."""
    return np.exp(_log_phi(x))


def ga_phi_inverse(log_target, upper) -> np.ndarray:
    """Solve ``ln φ(x) = log_target`` for ``x`` in ``[0, upper]`` by bisection."""
    log_target = np.asarray(log_target, dtype=float)
    lo = np.zeros(np.broadcast(log_target, upper).shape)
    hi = np.broadcast_to(np.asarray(upper, dtype=float), lo.shape).copy()
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        above = _log_phi(mid) > log_target
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return 0.5 * (lo + hi)


def _ga_minus(mean: np.ndarray) -> np.ndarray:
    log_p = _log_phi(mean)
    # 1 - (1 - φ)^2 = φ (2 - φ)
    log_t = log_p + np.log(2.0 - np.exp(log_p))
    out = ga_phi_inverse(log_t, mean)
    return np.where(mean > 0, out, 0.0)


def ga_evolve(n_log2: int, llr_mean_0: float) -> np.ndarray:
    """Mean LLR of each synthesized channel under the Gaussian approximation.

    Same index order as :func:`bec_bhattacharyya`.
    """
    if llr_mean_0 < 0:
        raise ValueError("LLR mean must be non-negative")
    m = np.array([float(llr_mean_0)])
    for _ in range(n_log2):
        out = np.empty(2 * m.size)
        out[0::2] = _ga_minus(m)
        out[1::2] = 2.0 * m
        m = out
    return m


def ga_error_probability(means, log: bool = False):
    """``Q(sqrt(mean / 2))`` (or its natural log) for consistent-Gaussian LLRs."""
    lp = log_ndtr(-np.sqrt(np.maximum(np.asarray(means, dtype=float), 0.0) / 2.0))
    return lp if log else np.exp(lp)


# --------------------------------------------------------------------------- capacities


def awgn_capacity_qam(sigma, m: int):
    """Symmetric capacity of unit-energy ``2**m``-QAM on complex AWGN.

    Twice the capacity of the per-axis ``2**(m/2)``-PAM, evaluated in the
    standardized noise variable on ``[-12, 12]`` with 512-node Gauss-Legendre.
    Accepts scalar or array ``sigma``.
    """
    sig = np.asarray(sigma, dtype=float)
    if np.any(sig <= 0) or np.any(~np.isfinite(sig)):
        raise ValueError("sigma must be positive and finite")
    if m < 2 or m % 2:
        raise ValueError(f"modulation order must be even and >= 2, got {m}")
    amps = build_sp_qam(m).amplitudes
    d = amps[:, None] - amps[None, :]
    n_amp = amps.size
    flat = sig.ravel()
    out = np.empty(flat.size)
    for start in range(0, flat.size, 16):
        s = flat[start : start + 16] / np.sqrt(2.0)
        delta = d[None, :, :] / s[:, None, None]
        expo = -0.5 * delta[..., None] ** 2 - delta[..., None] * _T_NODES
        top = expo.max(axis=2, keepdims=True)
        lse = (top[:, :, 0, :] + np.log(np.exp(expo - top).sum(axis=2))) / np.log(2.0)
        h = (lse * _T_WEIGHTS).sum(axis=-1).mean(axis=-1)
        out[start : start + 16] = 2.0 * (np.log2(n_amp) - h)
    out = np.clip(out, 0.0, float(m))
    return out.reshape(sig.shape) if sig.ndim else float(out[0])


def _gamma_half(x: float) -> float:
    """Γ(x) for positive integer or half-integer ``x``; other values use ``math.gamma``."""
    twice = 2 * x
    if twice != round(twice) or x <= 0:
        return math.gamma(x)
    if x == 1.0:
        return 1.0
    if x == 0.5:
        return math.sqrt(math.pi)
    return (x - 1.0) * _gamma_half(x - 1.0)


def chi2_pdf(gamma, kappa: float):
    """Density of the χ² distribution with ``kappa`` degrees of freedom."""
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0):
        raise ValueError("chi-square argument must be non-negative")
    if kappa < 1:
        raise ValueError("degrees of freedom must be >= 1")
    half = kappa / 2.0
    val = 0.5**half / _gamma_half(half) * np.power(g, half - 1.0) * np.exp(-g / 2.0)
    return val if g.ndim else float(val)


def _gain_power_nodes(dof: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes/weights in ``a`` for ``2a^2 ~ χ²(dof)``."""
    # γ = dof·s/(1-s) maps (0, 1) onto (0, ∞)
    s = _S_NODES
    gam = dof * s / (1.0 - s)
    jac = dof / (1.0 - s) ** 2
    return np.sqrt(gam / 2.0), _S_WEIGHTS * jac * chi2_pdf(gam, dof)


def ergodic_stream_capacity(sigma: float, m: int, M: int, k: int) -> float:
    """Fading-averaged QAM capacity of the stream seen at ``R[k, k]``.

    ``k`` is 1-based; the gain obeys ``2 r_kk^2 ~ χ²(2(M - k + 1))``.
    """
    if not 1 <= k <= M:
        raise ValueError(f"stream index must be in 1..{M}, got {k}")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    a, w = _gain_power_nodes(2 * (M - k + 1))
    return float(np.dot(w, awgn_capacity_qam(sigma / a, m)))


def mimo_ergodic_capacity(sigma: float, m: int, T: int, M: int) -> float:
    """Sum of the per-stream ergodic capacities of a ``T x M`` channel."""
    if not 1 <= T <= M:
        raise ValueError(f"need 1 <= T <= M, got T={T}, M={M}")
    return sum(ergodic_stream_capacity(sigma, m, M, k) for k in range(1, T + 1))


def solve_equivalent_sigma(target: float, m: int) -> tuple[float, bool]:
    """Noise level whose QAM capacity equals ``target`` bits.

    Bisection on ``log(sigma)`` over ``[1e-6, 1e3]`` until the capacity is
    within 1e-6 bits of the target.  Targets within the tolerance of ``0`` or
    ``m`` return the matching endpoint and ``clamped = True``.
    """
    if target >= m - SOLVER_TOL:
        return SIGMA_MIN, True
    if target <= SOLVER_TOL:
        return SIGMA_MAX, True
    lo, hi = math.log(SIGMA_MIN), math.log(SIGMA_MAX)
    mid = 0.5 * (lo + hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        cap = awgn_capacity_qam(math.exp(mid), m)
        if abs(cap - target) <= 0.5 * SOLVER_TOL:
            break
        if cap > target:
            lo = mid
        else:
            hi = mid
    return math.exp(mid), False


def equivalent_awgn_sigma(sigma: float, m: int, M: int, k: int) -> tuple[float, bool]:
    """AWGN noise level matching the ergodic capacity of stream ``k`` (1-based diagonal index)."""
    return solve_equivalent_sigma(ergodic_stream_capacity(sigma, m, M, k), m)


# --------------------------------------------------------------------------- construction


@lru_cache(maxsize=256)
def _level_means_cached(sigma: float, m: int, samples: int, seed: int) -> tuple[float, ...]:
    c = build_sp_qam(m)
    half = m // 2
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 1 << half, samples)
    y = c.amplitudes[labels] + sigma / np.sqrt(2.0) * rng.standard_normal(samples)
    means = []
    for j in range(1, half + 1):
        llr = level_llrs(y, 1.0, sigma, j, labels & ((1 << (j - 1)) - 1), c)
        bit = (labels >> (j - 1)) & 1
        means.append(max(float(np.mean(np.where(bit, -llr, llr))), 0.0))
    return tuple(means)


def level_llr_means(
    sigma: float, m: int, samples: int = 100_000, seed: int = CONSTRUCTION_SEED
) -> np.ndarray:
    """Mean of the sign-corrected level LLR for each axis level ``j = 1..m/2``.

    Monte-Carlo over a unit-gain AWGN axis with genie lower-level bits.  The
    same seed is used for every ``sigma`` so results vary smoothly with it.
    """
    return np.array(_level_means_cached(float(sigma), int(m), int(samples), int(seed)))


@dataclass
class CodeConstruction:
    """Information set and reliabilities of all ``T·m·N`` synthesized channels.

    ``info_set`` holds sorted 0-based indices ``a - 1``.  ``stream_sigmas[s]``
    is the equivalent AWGN noise level of logical stream ``s`` (``s = 0`` is
    detected first and is physical antenna ``T - 1``).
    """

    T: int
    M: int
    m: int
    N: int
    K: int
    sigma: float
    stream_sigmas: np.ndarray
    info_set: np.ndarray
    log_error_prob: np.ndarray | None = field(default=None, repr=False)
    clamped: tuple[bool, ...] = ()

    def __post_init__(self):
        self.stream_sigmas = np.asarray(self.stream_sigmas, dtype=float)
        self.info_set = np.asarray(self.info_set, dtype=np.int64)
        total = self.T * self.m * self.N
        if self.m < 2 or self.m % 2:
            raise ValueError(f"modulation order must be even, got {self.m}")
        if self.M < self.T:
            raise ValueError(f"need M >= T, got M={self.M}, T={self.T}")
        if self.sigma <= 0:
            raise ValueError("design sigma must be positive")
        if self.info_set.size != self.K or not 0 <= self.K <= total:
            raise ValueError("information set size does not match K")
        if self.K and (self.info_set.min() < 0 or self.info_set.max() >= total):
            raise ValueError("information index out of range")
        if np.any(np.diff(self.info_set) <= 0):
            raise ValueError("information set must be sorted and unique")

    @property
    def length(self) -> int:
        return self.T * self.m * self.N

    @property
    def rate(self) -> float:
        return self.K / self.length

    @property
    def frozen_mask(self) -> np.ndarray:
        mask = np.ones(self.length, dtype=bool)
        mask[self.info_set] = False
        return mask

    def component_slice(self, stream: int, level: int) -> slice:
        """Slice of ``u`` for 0-based logical stream and 0-based level."""
        start = stream * self.m * self.N + 2 * level * self.N
        return slice(start, start + 2 * self.N)

    def ga_bler(self) -> float:
        """Union-style SC prediction ``1 - prod_{a in A} (1 - P_e(a))``."""
        if self.log_error_prob is None:
            raise ValueError("construction carries no reliabilities")
        pe = np.exp(self.log_error_prob[self.info_set])
        return float(-np.expm1(np.log1p(-np.minimum(pe, 0.5)).sum()))

    def to_text(self) -> str:
        head = f"stpcm-construction v1 {self.T} {self.M} {self.m} {self.N} {self.K} {float(self.sigma)!r}"
        lines = [head] + [repr(float(s)) for s in self.stream_sigmas]
        lines.append(" ".join(str(int(a) + 1) for a in self.info_set))
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.to_text(), encoding="ascii")

    @classmethod
    def from_text(cls, text: str) -> "CodeConstruction":
        lines = text.splitlines()
        head = lines[0].split() if lines else []
        if len(head) != 8 or head[:2] != ["stpcm-construction", "v1"]:
            raise ValueError("not a v1 stpcm construction file")
        T, M, m, N, K = (int(v) for v in head[2:7])
        sigma = float(head[7])
        sigmas = np.array([float(lines[1 + s]) for s in range(T)])
        rest = " ".join(lines[1 + T :]).split()
        info = np.array([int(a) - 1 for a in rest], dtype=np.int64)
        logpe = _log_error_probabilities(T, m, N, sigmas)
        return cls(T, M, m, N, K, sigma, sigmas, info, logpe)

    @classmethod
    def load(cls, path) -> "CodeConstruction":
        return cls.from_text(Path(path).read_text(encoding="ascii"))


def _log_error_probabilities(T: int, m: int, N: int, stream_sigmas) -> np.ndarray:
    n_log2 = int(np.log2(2 * N))
    if 1 << n_log2 != 2 * N:
        raise ValueError(f"slot count must be a power of two, got {N}")
    out = np.empty(T * m * N)
    for s in range(T):
        means = level_llr_means(stream_sigmas[s], m)
        for j in range(m // 2):
            start = s * m * N + 2 * j * N
            out[start : start + 2 * N] = ga_error_probability(
                ga_evolve(n_log2, means[j]), log=True
            )
    return out


def build_construction(T: int, M: int, m: int, N: int, K: int, sigma: float) -> CodeConstruction:
    """Select the ``K`` most reliable of the ``T·m·N`` synthesized channels.

    Each logical stream is replaced by the AWGN channel of equal ergodic
    capacity, its level channels are Gaussianized, and GA runs over every
    length-``2N`` component; all error probabilities are pooled and the ``K``
    smallest win (ties to the lower index).
    """
    if m < 2 or m % 2:
        raise ValueError(f"modulation order must be even, got {m}")
    if not 1 <= T <= M:
        raise ValueError(f"need 1 <= T <= M, got T={T}, M={M}")
    if not 0 <= K <= T * m * N:
        raise ValueError(f"K={K} outside 0..{T * m * N}")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    sigmas, clamped = [], []
    for s in range(T):
        sk, flag = equivalent_awgn_sigma(sigma, m, M, T - s)
        sigmas.append(sk)
        clamped.append(flag)
    logpe = _log_error_probabilities(T, m, N, sigmas)
    order = np.argsort(logpe, kind="stable")
    info = np.sort(order[:K])
    return CodeConstruction(T, M, m, N, K, float(sigma), np.array(sigmas), info, logpe, tuple(clamped))
