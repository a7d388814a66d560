"""Reproducible Monte-Carlo BLER simulation.

SNR is Es/N0 per receive antenna with unit-energy symbols, so the complex
noise variance is ``sigma^2 = 10**(-snr_db / 10)``.

Every frame draws its payload, channel and noise from its own Philox stream
keyed by ``(seed, frame index)``.  Frames are processed in fixed-size chunks
and the stopping rule is evaluated chunk by chunk in index order, so results
do not depend on the number of workers.  The same frame index sees the same
channel and (unit) noise draw at every SNR and for every decoder.
"""

from __future__ import annotations

import csv
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np
from scipy.stats import beta

from .construction import CodeConstruction, build_construction
from .crc import CRC_POLYNOMIALS, CrcSpec, crc_for_width
from .mimo import ChannelRealization, complex_normal, qr_decompose
from .scheme import (
    PairInterleaver,
    attach_crcs,
    payload_length,
    stpcm_decode,
    stpcm_encode,
    strip_crcs,
)

__all__ = [
    "ConfigError",
    "SimConfig",
    "BlerRecord",
    "snr_to_sigma",
    "simulate_point",
    "run_sweep",
    "snr_for_ga_bler",
    "bler_interval",
    "csv_text",
    "emit_csv",
    "read_csv",
    "CSV_HEADER",
]

CSV_HEADER = ["snr_db", "frames", "block_errors", "bit_errors", "bler", "ber", "ga_bler", "seconds"]


class ConfigError(ValueError):
    """Invalid simulation configuration; the message names the field."""


@dataclass
class SimConfig:
    T: int = 1
    M: int = 1
    m: int = 2
    N: int = 64
    rate: float = 0.5
    snrs: tuple[float, ...] = (0.0,)
    decoder: str = "sc"
    list_size: int = 32
    crc_width: int = 16
    max_frames: int = 10_000
    target_errors: int = 100
    seed: int = 1
    workers: int = 1
    batch: int = 250
    interleaver_seed: int | None = 0

    def __post_init__(self):
        self.snrs = tuple(float(s) for s in self.snrs)
        self.validate()

    @property
    def length(self) -> int:
        return self.T * self.m * self.N

    @property
    def K(self) -> int:
        return int(round(self.rate * self.length))

    @property
    def crc(self) -> CrcSpec | None:
        if self.decoder != "cascl" or self.crc_width == 0:
            return None
        return crc_for_width(self.crc_width)

    def validate(self) -> None:
        for name in ("T", "M", "N", "max_frames", "workers", "batch"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.M < self.T:
            raise ConfigError("M must be >= T")
        if self.m < 2 or self.m % 2:
            raise ConfigError("m (modulation order) must be even and >= 2")
        if self.N & (self.N - 1):
            raise ConfigError("N (slots) must be a power of two")
        if not 0 < self.rate <= 1 or self.K < 1:
            raise ConfigError("rate must lie in (0, 1] and give K >= 1")
        if not self.snrs:
            raise ConfigError("snrs must be non-empty")
        if self.decoder not in ("sc", "cascl"):
            raise ConfigError("decoder must be 'sc' or 'cascl'")
        if self.list_size < 1:
            raise ConfigError("list_size must be >= 1")
        if self.crc_width and self.crc_width not in CRC_POLYNOMIALS:
            raise ConfigError(f"crc_width must be 0 or one of {sorted(CRC_POLYNOMIALS)}")
        if self.target_errors < 0:
            raise ConfigError("target_errors must be >= 0")


@dataclass
class BlerRecord:
    snr_db: float
    frames: int
    block_errors: int
    bit_errors: int
    bler: float
    ber: float
    ga_bler: float
    seconds: float = field(default=0.0, compare=False)


def snr_to_sigma(snr_db: float) -> float:
    return 10.0 ** (-snr_db / 20.0)


def _frame_draws(seed: int, frame: int, K: int, N: int, M: int, T: int):
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(frame)])))
    bits = rng.integers(0, 2, K, dtype=np.uint8)
    H = complex_normal(rng, (N, M, T))
    Z = complex_normal(rng, (N, M))
    return bits, H, Z


def _run_chunk(config: SimConfig, construction: CodeConstruction, sigma: float, start: int, count: int):
    """Simulate frames ``start .. start+count-1``; return ``(block_errors, bit_errors)``."""
    c = construction
    crc = config.crc
    n_pay = payload_length(c, crc)
    draws = [_frame_draws(config.seed, f, c.K, c.N, c.M, c.T) for f in range(start, start + count)]
    payload = np.stack([d[0][:n_pay] for d in draws])
    H = np.stack([d[1] for d in draws])
    Z = np.stack([d[2] for d in draws])
    info = attach_crcs(payload, c, crc)
    il = PairInterleaver(config.interleaver_seed, c.T, c.m, c.N)
    X = stpcm_encode(info, c, il).X
    Y = (H * np.swapaxes(X, 1, 2)[..., None, :]).sum(axis=-1) + sigma * Z
    Q, R = qr_decompose(H)
    dec = stpcm_decode(
        np.swapaxes(Y, 1, 2),
        ChannelRealization(H, Q, R),
        sigma,
        c,
        il,
        list_size=config.list_size,
        crc=crc,
        use_list=config.decoder == "cascl",
    )
    wrong = strip_crcs(dec, c, crc) != payload
    return int(wrong.any(axis=1).sum()), int(wrong.sum())


def simulate_point(
    config: SimConfig,
    snr_db: float,
    construction: CodeConstruction | None = None,
    executor: ProcessPoolExecutor | None = None,
) -> BlerRecord:
    """Run one SNR point until ``target_errors`` block errors or ``max_frames`` frames."""
    t0 = time.perf_counter()
    sigma = snr_to_sigma(snr_db)
    c = construction or build_construction(config.T, config.M, config.m, config.N, config.K, sigma)
    ga = c.ga_bler() if c.log_error_prob is not None else float("nan")
    frames = block = bits = 0
    n_pay = payload_length(c, config.crc)
    if config.target_errors > 0:
        starts = list(range(0, config.max_frames, config.batch))
        wave = config.workers if executor is not None else 1
        done = False
        for w in range(0, len(starts), wave):
            jobs = [(s, min(config.batch, config.max_frames - s)) for s in starts[w : w + wave]]
            if executor is not None:
                futs = [executor.submit(_run_chunk, config, c, sigma, s, n) for s, n in jobs]
                results = [f.result() for f in futs]
            else:
                results = [_run_chunk(config, c, sigma, s, n) for s, n in jobs]
            for (s, n), (be, bi) in zip(jobs, results):
                frames += n
                block += be
                bits += bi
                if block >= config.target_errors:
                    done = True
                    break
            if done:
                break
    bler = block / frames if frames else 0.0
    ber = bits / (frames * n_pay) if frames and n_pay else 0.0
    return BlerRecord(snr_db, frames, block, bits, bler, ber, ga, time.perf_counter() - t0)


def run_sweep(config: SimConfig) -> list[BlerRecord]:
    """Construct at each SNR (GA at the actual noise level) and simulate."""
    config.validate()
    if config.workers > 1:
        # forked workers would otherwise re-emit our unflushed output
        sys.stdout.flush()
        sys.stderr.flush()
        with ProcessPoolExecutor(max_workers=config.workers) as ex:
            return [simulate_point(config, s, executor=ex) for s in config.snrs]
    return [simulate_point(config, s) for s in config.snrs]


def snr_for_ga_bler(config: SimConfig, target: float, lo: float = -10.0, hi: float = 40.0, tol: float = 1e-3) -> float:
    """SNR (dB) at which the GA prediction equals ``target`` (bisection)."""

    def ga(snr):
        c = build_construction(config.T, config.M, config.m, config.N, config.K, snr_to_sigma(snr))
        return c.ga_bler()

    if not ga(lo) > target > ga(hi):
        raise ValueError("target BLER not bracketed by the SNR search range")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ga(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bler_interval(errors: int, frames: int, confidence: float = 0.95) -> tuple[float, float]:
    """Clopper-Pearson interval for a block error rate."""
    a = 1.0 - confidence
    lo = 0.0 if errors == 0 else float(beta.ppf(a / 2, errors, frames - errors + 1))
    hi = 1.0 if errors == frames else float(beta.ppf(1 - a / 2, errors + 1, frames - errors))
    return lo, hi


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if math.isnan(v):
        return "nan"
    return f"{float(v):.16e}"


def csv_text(records: list[BlerRecord], timing: bool = True) -> str:
    """Render records as CSV text (``timing=False`` writes 0 in the seconds column)."""
    if not records:
        raise ValueError("no records to write")
    lines = [",".join(CSV_HEADER)]
    for r in records:
        row = [r.snr_db, r.frames, r.block_errors, r.bit_errors, r.bler, r.ber, r.ga_bler]
        row.append(r.seconds if timing else 0.0)
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def emit_csv(records: list[BlerRecord], path, timing: bool = True) -> None:
    """Write records to ``path``.

    Wall-clock seconds are the only non-reproducible field; pass
    ``timing=False`` for byte-identical files across runs.
    """
    text = csv_text(records, timing)
    try:
        with open(path, "w", newline="", encoding="ascii") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write CSV to {path}: {exc}") from exc


def read_csv(path) -> list[BlerRecord]:
    with open(path, newline="", encoding="ascii") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError("unexpected CSV header")
        out = []
        for row in reader:
            kw = {}
            for f in fields(BlerRecord):
                kw[f.name] = int(row[f.name]) if f.type in ("int", int) else float(row[f.name])
            out.append(BlerRecord(**kw))
        return out
