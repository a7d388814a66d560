"""Frame mapping and joint detection/decoding of space-time polar coded modulation.

``u`` has ``T·m·N`` bits.  Index ``a`` (1-based) maps to logical stream
``k``, axis level ``j`` and component position ``i`` via
``a = (k-1)·m·N + 2(j-1)·N + i`` with ``i in 1..2N``.  Each ``(k, j)`` block of
``2N`` bits is one binary polar code.  The first ``N`` coded bits feed level
``j`` of the real axis in slots ``0..N-1``; the last ``N`` feed level ``j`` of
the imaginary axis after a per-``(k, j)`` slot permutation.  Logical stream
``k`` is transmitted on physical antenna ``T - k`` (0-based), the first one the
receiver detects.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .construction import CodeConstruction
from .crc import CrcSpec
from .mimo import ChannelRealization, qr_decompose, rotate, sic_cancel
from .modem import Constellation, build_sp_qam, level_llrs, map_symbols
from .polar import WorkCounter, polar_encode, sc_decode, scl_decode_batch

__all__ = [
    "PairInterleaver",
    "StpcmFrame",
    "index_map",
    "index_unmap",
    "component_info_positions",
    "payload_length",
    "attach_crcs",
    "strip_crcs",
    "stpcm_encode",
    "stpcm_decode",
    "stpcm_decode_sc",
    "stpcm_decode_cascl",
    "write_golden",
    "read_golden",
]


def index_map(a: int, T: int, m: int, N: int) -> tuple[int, int, int]:
    """Map a 1-based channel index ``a`` to 1-based ``(k, j, i)``."""
    if m < 2 or m % 2:
        raise ValueError(f"modulation order must be even, got {m}")
    if not 1 <= a <= T * m * N:
        raise ValueError(f"index {a} outside 1..{T * m * N}")
    i = (a - 1) % (2 * N) + 1
    j = ((a - 1) // (2 * N)) % (m // 2) + 1
    k = (a - 1) // (m * N) + 1
    return k, j, i


def index_unmap(k: int, j: int, i: int, T: int, m: int, N: int) -> int:
    """Inverse of :func:`index_map`."""
    if not (1 <= k <= T and 1 <= j <= m // 2 and 1 <= i <= 2 * N):
        raise ValueError(f"(k, j, i) = {(k, j, i)} out of range")
    return (k - 1) * m * N + 2 * (j - 1) * N + i


class PairInterleaver:
    """Slot permutations applied to the imaginary-axis half of every component.

    ``seed=None`` gives identity permutations.  Otherwise each ``(k, j)``
    permutation is drawn from a Philox stream keyed by ``(seed, k, j)``, so it
    does not depend on the other components.
    """

    def __init__(self, seed: int | None, T: int, m: int, N: int):
        self.seed = seed
        self.T, self.m, self.N = T, m, N
        self._perm = {}
        for k in range(T):
            for j in range(m // 2):
                if seed is None:
                    perm = np.arange(N)
                else:
                    ss = np.random.SeedSequence([int(seed), k, j])
                    perm = np.random.Generator(np.random.Philox(ss)).permutation(N)
                self._perm[k, j] = perm

    def perm(self, k: int, j: int) -> np.ndarray:
        """Permutation for 0-based stream ``k`` and level ``j``: coded bit ``N+t`` goes to slot ``perm[t]``."""
        return self._perm[k, j]

    def spread(self, coded_half: np.ndarray, k: int, j: int) -> np.ndarray:
        out = np.empty_like(coded_half)
        out[..., self._perm[k, j]] = coded_half
        return out

    def gather(self, slot_values: np.ndarray, k: int, j: int) -> np.ndarray:
        return slot_values[..., self._perm[k, j]]


@dataclass
class StpcmFrame:
    """Full input ``u`` and transmitted symbol matrix ``X`` (``T x N``)."""

    u: np.ndarray
    X: np.ndarray


def _check_shape(construction: CodeConstruction, interleaver: PairInterleaver):
    c = construction
    if (interleaver.T, interleaver.m, interleaver.N) != (c.T, c.m, c.N):
        raise ValueError("interleaver and construction disagree on (T, m, N)")


def component_info_positions(construction: CodeConstruction) -> list[np.ndarray]:
    """Local information positions of each component, in ``(k, j)`` order."""
    c = construction
    out = []
    for k in range(c.T):
        for j in range(c.m // 2):
            sl = c.component_slice(k, j)
            a = c.info_set[(c.info_set >= sl.start) & (c.info_set < sl.stop)]
            out.append(a - sl.start)
    return out


def _crc_layout(construction: CodeConstruction, crc: CrcSpec | None):
    layout = []
    for pos in component_info_positions(construction):
        kc = pos.size
        width = crc.width if crc is not None and kc > crc.width else 0
        layout.append((kc, width))
    return layout


def payload_length(construction: CodeConstruction, crc: CrcSpec | None) -> int:
    """Number of payload bits once each component reserves a CRC.

    Components with no more information positions than the CRC width carry
    no CRC.
    """
    return sum(kc - w for kc, w in _crc_layout(construction, crc))


def _crc_of(bits: np.ndarray, crc: CrcSpec) -> np.ndarray:
    g, c0 = crc.generator(bits.shape[-1])
    return ((bits.astype(np.int64) @ g.astype(np.int64)) % 2 ^ c0).astype(np.uint8)


def attach_crcs(payload, construction: CodeConstruction, crc: CrcSpec | None) -> np.ndarray:
    """Turn payload bits ``(..., payload_length)`` into information bits ``(..., K)``."""
    payload = np.asarray(payload, dtype=np.uint8)
    if payload.shape[-1] != payload_length(construction, crc):
        raise ValueError("payload length does not match the construction")
    parts, pos = [], 0
    for kc, w in _crc_layout(construction, crc):
        chunk = payload[..., pos : pos + kc - w]
        pos += kc - w
        parts.append(chunk)
        if w:
            parts.append(_crc_of(chunk, crc))
    if not parts:
        return payload[..., :0]
    return np.concatenate(parts, axis=-1)


def strip_crcs(info, construction: CodeConstruction, crc: CrcSpec | None) -> np.ndarray:
    """Inverse of :func:`attach_crcs` (no checking)."""
    info = np.asarray(info, dtype=np.uint8)
    keep, pos = [], 0
    for kc, w in _crc_layout(construction, crc):
        keep.extend(range(pos, pos + kc - w))
        pos += kc
    return info[..., keep]


def stpcm_encode(
    info_bits,
    construction: CodeConstruction,
    interleaver: PairInterleaver,
    constellation: Constellation | None = None,
) -> StpcmFrame:
    """Map information bits ``(..., K)`` to ``u`` and the ``(..., T, N)`` symbol matrix."""
    c = construction
    _check_shape(c, interleaver)
    info = np.asarray(info_bits, dtype=np.uint8)
    if info.shape[-1] != c.K:
        raise ValueError(f"expected {c.K} information bits, got {info.shape[-1]}")
    const = constellation or build_sp_qam(c.m)
    lead = info.shape[:-1]
    u = np.zeros((*lead, c.length), dtype=np.uint8)
    u[..., c.info_set] = info
    half = c.m // 2
    X = np.empty((*lead, c.T, c.N), dtype=complex)
    for k in range(c.T):
        bits = np.empty((*lead, c.N, c.m), dtype=np.uint8)
        for j in range(half):
            x = polar_encode(u[..., c.component_slice(k, j)])
            bits[..., j] = x[..., : c.N]
            bits[..., half + j] = interleaver.spread(x[..., c.N :], k, j)
        X[..., c.T - 1 - k, :] = map_symbols(bits, const)
    return StpcmFrame(u, X)


def _as_realization(channels, counter: WorkCounter | None) -> ChannelRealization:
    if isinstance(channels, ChannelRealization):
        return channels
    H = np.asarray(channels, dtype=complex)
    Q, R = qr_decompose(H, counter)
    return ChannelRealization(H, Q, R)


def stpcm_decode(
    Y,
    channels,
    sigma: float,
    construction: CodeConstruction,
    interleaver: PairInterleaver,
    *,
    list_size: int = 1,
    crc: CrcSpec | None = None,
    use_list: bool = False,
    counter: WorkCounter | None = None,
    return_u: bool = False,
):
    """Multistage detection and decoding, one component code at a time.

    Parameters
    ----------
    Y : array, shape (M, N) or (B, M, N)
        Received matrix (receive antennas by slots).
    channels : array (…, N, M, T) or ChannelRealization
        Per-slot channel matrices (ideal CSI); factored here if raw.
    use_list : bool
        Decode components with the list decoder instead of SC.  With a CRC,
        the survivor is the best path passing its component CRC.
    """
    c = construction
    _check_shape(c, interleaver)
    Y = np.asarray(Y, dtype=complex)
    single = Y.ndim == 2
    if single:
        Y = Y[None]
    if Y.shape[1:] != (c.M, c.N):
        raise ValueError(f"received matrix must be ({c.M}, {c.N}), got {Y.shape[1:]}")
    real = _as_realization(channels, counter)
    Q, R = real.Q, real.R
    if single and Q.ndim == 3:
        Q, R = Q[None], R[None]
    if Q.shape[-3:] != (c.N, c.M, c.M) or R.shape[-2:] != (c.M, c.T):
        raise ValueError("channel matrices do not match (N, M, T)")
    B = Y.shape[0]
    const = build_sp_qam(c.m)
    half = c.m // 2
    frozen = c.frozen_mask
    info_local = component_info_positions(c)
    layout = _crc_layout(c, crc)

    y_tilde = rotate(np.swapaxes(Y, 1, 2), Q)
    decided = np.zeros((B, c.N, c.T), dtype=complex)
    u_hat = np.zeros((B, c.length), dtype=np.uint8)
    comp = 0
    for k in range(c.T):
        p = c.T - 1 - k
        obs, gain = sic_cancel(y_tilde, R, decided, p)
        known_re = np.zeros((B, c.N), dtype=np.int64)
        known_im = np.zeros((B, c.N), dtype=np.int64)
        for j in range(half):
            llr = np.concatenate(
                [
                    level_llrs(obs.real, gain, sigma, j + 1, known_re, const),
                    interleaver.gather(level_llrs(obs.imag, gain, sigma, j + 1, known_im, const), k, j),
                ],
                axis=1,
            )
            sl = c.component_slice(k, j)
            mask = frozen[sl]
            if use_list and list_size > 1 and not mask.all():
                paths, _ = scl_decode_batch(llr, mask, list_size, counter=counter)
                kc, w = layout[comp]
                if w:
                    bits = paths[..., info_local[comp]]
                    ok = np.all(_crc_of(bits[..., : kc - w], crc) == bits[..., kc - w :], axis=-1)
                    pick = np.where(ok.any(axis=1), ok.argmax(axis=1), 0)
                else:
                    pick = np.zeros(B, dtype=np.int64)
                uc = paths[np.arange(B), pick]
            else:
                uc = sc_decode(llr, mask, counter=counter)
            u_hat[:, sl] = uc
            x = polar_encode(uc)
            known_re |= x[:, : c.N].astype(np.int64) << j
            known_im |= interleaver.spread(x[:, c.N :], k, j).astype(np.int64) << j
            comp += 1
        decided[:, :, p] = const.amplitudes[known_re] + 1j * const.amplitudes[known_im]

    info = u_hat[:, c.info_set]
    if single:
        info, u_hat = info[0], u_hat[0]
    return (info, u_hat) if return_u else info


def stpcm_decode_sc(Y, channels, sigma, construction, interleaver, **kw):
    """Joint SC detection/decoding; returns the ``K`` information bits."""
    return stpcm_decode(Y, channels, sigma, construction, interleaver, **kw)


def stpcm_decode_cascl(Y, channels, sigma, construction, interleaver, list_size, crc, **kw):
    """Joint detection with CRC-aided list decoding of every component."""
    return stpcm_decode(
        Y, channels, sigma, construction, interleaver, list_size=list_size, crc=crc, use_list=True, **kw
    )


# --------------------------------------------------------------------------- golden vectors


def write_golden(path, info_bits, seed, X) -> None:
    """Write a frame test vector: info bits, seed, and ``X`` rows of ``re,im`` pairs."""
    X = np.asarray(X, dtype=complex)
    lines = [
        "stpcm-frame v1",
        "info " + " ".join(str(int(b)) for b in np.asarray(info_bits).ravel()),
        f"seed {'none' if seed is None else int(seed)}",
        f"X {X.shape[0]} {X.shape[1]}",
    ]
    for row in X:
        lines.append(" ".join(f"{float(v.real)!r},{float(v.imag)!r}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_golden(path):
    """Read a file written by :func:`write_golden`; returns ``(info, seed, X)``."""
    lines = Path(path).read_text(encoding="ascii").splitlines()
    if lines[0].strip() != "stpcm-frame v1":
        raise ValueError("not a stpcm frame vector")
    info = np.array([int(b) for b in lines[1].split()[1:]], dtype=np.uint8)
    seed_tok = lines[2].split()[1]
    seed = None if seed_tok == "none" else int(seed_tok)
    rows, cols = (int(v) for v in lines[3].split()[1:])
    X = np.empty((rows, cols), dtype=complex)
    for r in range(rows):
        for t, pair in enumerate(lines[4 + r].split()):
            re, im = pair.split(",")
            X[r, t] = complex(float(re), float(im))
    return info, seed, X
