"""Binary polar transform and successive-cancellation decoders.

Conventions used throughout the package:

* Bits are ``uint8`` arrays holding 0/1.
* LLRs use the natural log and are positive when bit 0 is more likely.
  ``+inf``/``-inf`` denote perfect knowledge.
* The generator matrix is ``G = B · F^{⊗n}`` with ``F = [[1, 0], [1, 1]]``
  acting on row vectors, so for ``N = 2`` the codeword is
  ``(u1 ^ u2, u2)``.  Index 0 is decoded first and is the least reliable
  synthesized channel of a BEC-like channel.

Decoders accept a single block of shape ``(N,)`` or a batch ``(B, N)``; every
frame in a batch is decoded independently and gives the same result as it
would on its own.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DecoderPath",
    "WorkCounter",
    "bit_reversal_permutation",
    "polar_transform",
    "polar_encode",
    "check_node",
    "bit_node",
    "path_metric_increment",
    "sc_decode",
    "scl_decode",
    "scl_decode_batch",
]


@dataclass
class WorkCounter:
    """Tallies of decoder/detector work, per frame.

    ``butterflies`` counts LLR element updates (check- or bit-node) performed
    for one frame, summed over list paths for list decoding.  ``qr`` counts
    QR factorizations.
    """

    butterflies: int = 0
    qr: int = 0

    def reset(self) -> None:
        self.butterflies = 0
        self.qr = 0


@dataclass
class DecoderPath:
    """One complete decoding hypothesis and its accumulated penalty."""

    decisions: np.ndarray
    metric: float = field(default=0.0)


def _log2_exact(n: int) -> int:
    if n < 1 or n & (n - 1):
        raise ValueError(f"block length must be a power of two, got {n}")
    return n.bit_length() - 1


def bit_reversal_permutation(n_log2: int) -> np.ndarray:
    """Return the 0-based bit-reversal permutation of ``range(2**n_log2)``.

    ``perm[i]`` is ``i`` with its ``n_log2``-bit binary representation
    reversed.  The permutation is an involution.
    """
    if n_log2 < 0:
        raise ValueError("n_log2 must be non-negative")
    idx = np.arange(1 << n_log2)
    out = np.zeros_like(idx)
    for b in range(n_log2):
        out |= ((idx >> b) & 1) << (n_log2 - 1 - b)
    return out


def polar_transform(u: np.ndarray) -> np.ndarray:
    """Apply ``F^{⊗n}`` (no bit reversal) along the last axis over GF(2)."""
    x = np.array(u, dtype=np.uint8, copy=True)
    n = x.shape[-1]
    _log2_exact(n)
    lead = x.shape[:-1]
    half = 1
    while half < n:
        v = x.reshape(*lead, n // (2 * half), 2, half)
        v[..., 0, :] ^= v[..., 1, :]
        half *= 2
    return x


def polar_encode(u: np.ndarray) -> np.ndarray:
    """Encode ``x = u · B · F^{⊗n}`` along the last axis.

    Accepts any leading batch shape.  Raises ``ValueError`` if the block
    length is not a power of two.
    """
    u = np.asarray(u, dtype=np.uint8)
    n_log2 = _log2_exact(u.shape[-1])
    # B commutes with F^{⊗n}
    return polar_transform(u)[..., bit_reversal_permutation(n_log2)]


def check_node(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact check-node update ``2·atanh(tanh(a/2)·tanh(b/2))``.

    Evaluated as ``sign·(min + log1p(e^{-(|a|+|b|)}) - log1p(e^{-||a|-|b||}))``
    which is exact, overflow-free, and handles infinite inputs.
    """
    aa = np.abs(a)
    ab = np.abs(b)
    with np.errstate(invalid="ignore"):
        diff = np.abs(aa - ab)
    diff = np.where(np.isnan(diff), np.inf, diff)
    corr = np.log1p(np.exp(-(aa + ab))) - np.log1p(np.exp(-diff))
    return np.sign(a) * np.sign(b) * (np.minimum(aa, ab) + corr)


def bit_node(a: np.ndarray, b: np.ndarray, partial: np.ndarray) -> np.ndarray:
    """Bit-node update ``b + (1 - 2u)·a``; contradicting infinities give 0."""
    with np.errstate(invalid="ignore"):
        out = b + np.where(partial, -a, a)
    return np.where(np.isnan(out), 0.0, out)


def path_metric_increment(llr: np.ndarray, bit) -> np.ndarray:
    """Penalty ``ln(1 + exp(-(1 - 2·bit)·llr))`` for deciding ``bit``.

    Roughly ``|llr|`` when the decision contradicts the LLR sign and close to
    zero otherwise.  Summed over a whole path it equals the negative
    log-likelihood of the corresponding codeword.
    """
    signed = np.where(np.asarray(bit, dtype=bool), llr, -llr)
    return np.logaddexp(0.0, signed)


def _prepare(channel_llrs, frozen_mask, frozen_values):
    llr = np.asarray(channel_llrs, dtype=float)
    single = llr.ndim == 1
    if single:
        llr = llr[None, :]
    n = llr.shape[-1]
    n_log2 = _log2_exact(n)
    frozen = np.asarray(frozen_mask, dtype=bool)
    if frozen.shape != (n,):
        raise ValueError(f"frozen mask has shape {frozen.shape}, expected ({n},)")
    if frozen_values is None:
        fv = np.zeros(n, dtype=np.uint8)
    else:
        fv = np.broadcast_to(np.asarray(frozen_values, dtype=np.uint8), (n,))
    if np.isnan(llr).any():
        raise ValueError("channel LLRs contain NaN")
    # natural-order decoding of u·F^{⊗n} sees the channel in bit-reversed order
    return llr[:, bit_reversal_permutation(n_log2)], frozen, fv, single, n_log2


def sc_decode(
    channel_llrs,
    frozen_mask,
    frozen_values=None,
    *,
    counter: WorkCounter | None = None,
    return_llrs: bool = False,
):
    """Successive-cancellation decoding.

    Parameters
    ----------
    channel_llrs : array_like, shape (N,) or (B, N)
        Channel LLRs in codeword order.
    frozen_mask : array_like of bool, shape (N,)
        ``True`` at frozen positions.
    frozen_values : array_like, optional
        Values of frozen bits, default all zero.
    counter : WorkCounter, optional
        Receives the number of node updates for one frame.
    return_llrs : bool
        Also return the decision LLR of every ``u_i`` (useful for genie-aided
        reliability estimates when all positions are frozen).

    Returns
    -------
    u_hat : ndarray of uint8, same shape as ``channel_llrs``
    llrs : ndarray, only if ``return_llrs``
    """
    llr, frozen, fv, single, _ = _prepare(channel_llrs, frozen_mask, frozen_values)
    u_hat = np.zeros(llr.shape, dtype=np.uint8)
    leaf = np.zeros(llr.shape) if return_llrs else None
    work = [0]

    def rec(alpha, lo):
        size = alpha.shape[-1]
        if size == 1:
            lam = alpha[:, 0]
            if leaf is not None:
                leaf[:, lo] = lam
            if frozen[lo]:
                bit = np.full(lam.shape, fv[lo], dtype=np.uint8)
            else:
                bit = (lam < 0).astype(np.uint8)
            u_hat[:, lo] = bit
            return bit[:, None]
        h = size // 2
        a, b = alpha[:, :h], alpha[:, h:]
        work[0] += size
        x_left = rec(check_node(a, b), lo)
        x_right = rec(bit_node(a, b, x_left), lo + h)
        return np.concatenate([x_left ^ x_right, x_right], axis=1)

    rec(llr, 0)
    if counter is not None:
        counter.butterflies += work[0]
    if single:
        u_hat = u_hat[0]
        leaf = leaf[0] if leaf is not None else None
    return (u_hat, leaf) if return_llrs else u_hat


def _trailing_zeros(i: int) -> int:
    return (i & -i).bit_length() - 1


def scl_decode_batch(
    channel_llrs,
    frozen_mask,
    list_size: int,
    frozen_values=None,
    *,
    counter: WorkCounter | None = None,
):
    """Successive-cancellation list decoding of a batch of frames.

    Returns
    -------
    u_hat : ndarray of uint8, shape (B, P, N)
        Surviving paths, ``P = min(list_size, 2**K)``.
    metrics : ndarray, shape (B, P)
        Path metrics, sorted ascending along axis 1 (stable).
    """
    if list_size < 1:
        raise ValueError("list size must be at least 1")
    llr, frozen, fv, _, n_log2 = _prepare(channel_llrs, frozen_mask, frozen_values)
    B, n = llr.shape
    alpha: list = [None] * (n_log2 + 1)
    alpha[0] = llr[:, None, :]
    left: list = [None] * (n_log2 + 1)
    u_hat = np.zeros((B, 1, n), dtype=np.uint8)
    metric = np.zeros((B, 1))
    frames = np.arange(B)[:, None]
    work = 0

    for i in range(n):
        paths = metric.shape[1]
        if i == 0:
            d = 1
        else:
            d = n_log2 - _trailing_zeros(i)
            parent = alpha[d - 1]
            h = parent.shape[-1] // 2
            alpha[d] = bit_node(parent[..., :h], parent[..., h:], left[d])
            work += h * paths
            d += 1
        for dd in range(d, n_log2 + 1):
            parent = alpha[dd - 1]
            h = parent.shape[-1] // 2
            alpha[dd] = check_node(parent[..., :h], parent[..., h:])
            work += h * paths
        lam = alpha[n_log2][..., 0]

        if frozen[i]:
            bit = np.full(lam.shape, fv[i], dtype=np.uint8)
            metric = metric + path_metric_increment(lam, fv[i])
        else:
            cand = np.stack(
                [metric + path_metric_increment(lam, 0), metric + path_metric_increment(lam, 1)],
                axis=-1,
            ).reshape(B, 2 * paths)
            if 2 * paths <= list_size:
                order = np.broadcast_to(np.arange(2 * paths), (B, 2 * paths))
            else:
                order = np.argsort(cand, axis=1, kind="stable")[:, :list_size]
            parents = order // 2
            bit = (order % 2).astype(np.uint8)
            metric = np.take_along_axis(cand, order, axis=1)
            u_hat = u_hat[frames, parents]
            for dd in range(1, n_log2 + 1):
                if alpha[dd] is not None:
                    alpha[dd] = alpha[dd][frames, parents]
                if left[dd] is not None:
                    left[dd] = left[dd][frames, parents]
        u_hat[:, :, i] = bit

        beta = bit[..., None]
        dd = n_log2
        while dd > 0 and (i >> (n_log2 - dd)) & 1:
            beta = np.concatenate([left[dd] ^ beta, beta], axis=-1)
            dd -= 1
        if dd > 0:
            left[dd] = beta

    if counter is not None:
        counter.butterflies += work
    order = np.argsort(metric, axis=1, kind="stable")
    return u_hat[frames, order], np.take_along_axis(metric, order, axis=1)


def scl_decode(
    channel_llrs,
    frozen_mask,
    list_size: int,
    frozen_values=None,
    *,
    counter: WorkCounter | None = None,
) -> list[DecoderPath]:
    """List-decode a single block; return surviving paths, best first."""
    llr = np.asarray(channel_llrs, dtype=float)
    if llr.ndim != 1:
        raise ValueError("scl_decode takes one block; use scl_decode_batch for batches")
    u, pm = scl_decode_batch(llr, frozen_mask, list_size, frozen_values, counter=counter)
    return [DecoderPath(u[0, p].copy(), float(pm[0, p])) for p in range(u.shape[1])]
