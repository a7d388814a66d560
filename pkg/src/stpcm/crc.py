"""CRC attachment/checking on bit arrays and CRC-aided list selection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CrcSpec",
    "DEFAULT_CRC",
    "CRC_POLYNOMIALS",
    "crc_for_width",
    "crc_bits",
    "crc_attach",
    "crc_check",
    "crc_check_batch",
    "cascl_select",
]


@dataclass(frozen=True)
class CrcSpec:
    """A CRC definition in the usual Rocksoft parameter style.

    ``polynomial`` omits the implicit leading ``x^width`` term.
    """

    width: int = 16
    polynomial: int = 0x1021
    init: int = 0
    reflect_in: bool = False
    reflect_out: bool = False
    xor_out: int = 0

    def __post_init__(self):
        if not 0 < self.width <= 32:
            raise ValueError(f"CRC width must be in 1..32, got {self.width}")
        if not 0 <= self.polynomial < (1 << self.width):
            raise ValueError("polynomial does not fit the CRC width")

    def generator(self, length: int) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(G, c0)`` with ``crc(p) = p @ G ^ c0 (mod 2)`` for ``len(p) == length``."""
        return _generator(self, length)


DEFAULT_CRC = CrcSpec()

# non-reflected, zero-init polynomials by width
CRC_POLYNOMIALS = {
    6: 0x21,
    8: 0x07,
    11: 0x621,
    16: 0x1021,
    24: 0x864CFB,
    32: 0x04C11DB7,
}


def crc_for_width(width: int) -> CrcSpec:
    """Zero-init, non-reflected CRC with a standard polynomial of the given width."""
    if width not in CRC_POLYNOMIALS:
        raise ValueError(f"no default polynomial for CRC width {width}")
    return CrcSpec(width=width, polynomial=CRC_POLYNOMIALS[width])

_GEN_CACHE: dict = {}


def _generator(spec: CrcSpec, length: int):
    key = (spec, length)
    if key not in _GEN_CACHE:
        c0 = crc_bits(np.zeros(length, dtype=np.uint8), spec)
        rows = np.empty((length, spec.width), dtype=np.uint8)
        for i in range(length):
            e = np.zeros(length, dtype=np.uint8)
            e[i] = 1
            rows[i] = crc_bits(e, spec) ^ c0
        _GEN_CACHE[key] = (rows, c0)
    return _GEN_CACHE[key]


def crc_bits(payload, spec: CrcSpec = DEFAULT_CRC) -> np.ndarray:
    """Bitwise CRC of a bit sequence, MSB-first register, returned as ``width`` bits."""
    bits = np.asarray(payload, dtype=np.uint8).ravel()
    w = spec.width
    top = 1 << (w - 1)
    mask = (1 << w) - 1
    reg = spec.init & mask
    n_bytes_aligned = spec.reflect_in and bits.size % 8 == 0
    if spec.reflect_in and not n_bytes_aligned:
        raise ValueError("reflected input needs a whole number of bytes")
    if n_bytes_aligned:
        bits = bits.reshape(-1, 8)[:, ::-1].ravel()
    for b in bits:
        fb = ((reg & top) != 0) ^ bool(b)
        reg = (reg << 1) & mask
        if fb:
            reg ^= spec.polynomial
    if spec.reflect_out:
        reg = int(f"{reg:0{w}b}"[::-1], 2)
    reg ^= spec.xor_out
    return np.array([(reg >> (w - 1 - i)) & 1 for i in range(w)], dtype=np.uint8)


def crc_attach(payload, spec: CrcSpec = DEFAULT_CRC) -> np.ndarray:
    """Append the CRC of ``payload`` (non-empty) to it."""
    p = np.asarray(payload, dtype=np.uint8).ravel()
    if p.size == 0:
        raise ValueError("cannot attach a CRC to an empty payload")
    return np.concatenate([p, crc_bits(p, spec)])


def crc_check(block, spec: CrcSpec = DEFAULT_CRC) -> bool:
    """True when the trailing ``spec.width`` bits are the CRC of the rest."""
    b = np.asarray(block, dtype=np.uint8).ravel()
    if b.size <= spec.width:
        return False
    return bool(np.array_equal(crc_bits(b[: -spec.width], spec), b[-spec.width :]))


def crc_check_batch(blocks, spec: CrcSpec = DEFAULT_CRC) -> np.ndarray:
    """Vectorized :func:`crc_check` over the last axis."""
    b = np.asarray(blocks, dtype=np.uint8)
    length = b.shape[-1] - spec.width
    if length <= 0:
        return np.zeros(b.shape[:-1], dtype=bool)
    g, c0 = _generator(spec, length)
    crc = (b[..., :length].astype(np.int64) @ g.astype(np.int64)) % 2 ^ c0
    return np.all(crc == b[..., length:], axis=-1)


def cascl_select(paths, spec: CrcSpec, info_positions):
    """Pick the best-metric path whose information bits pass the CRC.

    Returns ``(decisions, passed)``.  If no path passes, the best-metric path
    is returned with ``passed = False``.
    """
    if not paths:
        raise ValueError("no candidate paths")
    ranked = sorted(paths, key=lambda p: p.metric)
    info_positions = np.asarray(info_positions)
    for p in ranked:
        if crc_check(np.asarray(p.decisions)[info_positions], spec):
            return p.decisions, True
    return ranked[0].decisions, False
