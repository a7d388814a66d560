"""Command-line front end: ``stpcm {construct,simulate,capacity,sweep}``.

SNR values are Es/N0 in dB per receive antenna with unit-energy symbols
(complex noise variance ``10**(-snr/10)``).  ``--snr`` takes a single value,
a comma list, or an inclusive ``start:step:stop`` range.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

import numpy as np

from .construction import (
    CodeConstruction,
    awgn_capacity_qam,
    build_construction,
    ergodic_stream_capacity,
)
from .sim import ConfigError, SimConfig, csv_text, run_sweep, simulate_point, snr_to_sigma

SNR_HELP = (
    "Es/N0 in dB per receive antenna, unit symbol energy, noise variance 10^(-snr/10); "
    "a value, a comma list, or start:step:stop (inclusive)"
)


def parse_snr(text: str) -> tuple[float, ...]:
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[1] <= 0 or parts[2] < parts[0]:
            raise ConfigError("snr range must be start:step:stop with step > 0")
        start, step, stop = parts
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 10) for i in range(count))
    return tuple(float(p) for p in text.split(",") if p.strip())


def parse_rate(text: str) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"rate: cannot parse {text!r}") from None


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--T", type=int, default=1, help="transmit antennas")
    common.add_argument("--M", type=int, default=1, help="receive antennas")
    common.add_argument("--mod-order", type=int, default=2, help="bits per QAM symbol (even)")
    common.add_argument("--snr", default="0", help=SNR_HELP)
    common.add_argument("--out", default=None, help="output file (default: stdout)")

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--slots", type=int, default=64, help="time slots N (power of two)")
    sim.add_argument("--rate", default="1/2", help="code rate K/(T m N), e.g. 0.5 or 1/2")
    sim.add_argument("--decoder", choices=("sc", "cascl"), default="sc")
    sim.add_argument("--list-size", type=int, default=32)
    sim.add_argument("--crc", type=int, default=16, help="CRC width per component for cascl (0: none)")
    sim.add_argument("--seed", type=int, default=1)
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--max-frames", type=int, default=10_000)
    sim.add_argument("--target-errors", type=int, default=100)
    sim.add_argument("--timing", action="store_true", help="write wall-clock seconds (non-reproducible)")

    p = argparse.ArgumentParser(prog="stpcm", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("construct", parents=[common, sim], help="write a code construction file")
    s = sub.add_parser("simulate", parents=[common, sim], help="simulate one SNR point")
    s.add_argument("--construction", default=None, help="construction file from 'construct'")
    sub.add_parser("capacity", parents=[common], help="tabulate AWGN and ergodic capacities")
    sub.add_parser("sweep", parents=[common, sim], help="BLER sweep over the SNR list")
    return p


def _config(args) -> SimConfig:
    return SimConfig(
        T=args.T,
        M=args.M,
        m=args.mod_order,
        N=args.slots,
        rate=parse_rate(args.rate),
        snrs=parse_snr(args.snr),
        decoder=args.decoder,
        list_size=args.list_size,
        crc_width=args.crc,
        max_frames=args.max_frames,
        target_errors=args.target_errors,
        seed=args.seed,
        workers=args.workers,
    )


def _write(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="", encoding="ascii") as fh:
            fh.write(text)


def _single_snr(cfg: SimConfig) -> float:
    if len(cfg.snrs) != 1:
        raise ConfigError("snr: this command takes a single SNR value")
    return cfg.snrs[0]


def _capacity_table(args) -> str:
    T, M, m = args.T, args.M, args.mod_order
    if not 1 <= T <= M:
        raise ConfigError("T/M: need 1 <= T <= M")
    if m < 2 or m % 2:
        raise ConfigError("mod-order must be even and >= 2")
    snrs = parse_snr(args.snr)
    if not snrs:
        raise ConfigError("snr must be non-empty")
    head = ["snr_db", "sigma", "awgn_qam"] + [f"stream_{k}" for k in range(1, T + 1)] + ["mimo_ergodic"]
    lines = [",".join(head)]
    for snr in snrs:
        sigma = snr_to_sigma(snr)
        streams = [ergodic_stream_capacity(sigma, m, M, k) for k in range(1, T + 1)]
        row = [snr, sigma, awgn_capacity_qam(sigma, m)] + streams + [sum(streams)]
        lines.append(",".join(f"{v:.10g}" for v in row))
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "capacity":
            _write(_capacity_table(args), args.out)
            return 0
        cfg = _config(args)
        if args.command == "construct":
            sigma = snr_to_sigma(_single_snr(cfg))
            c = build_construction(cfg.T, cfg.M, cfg.m, cfg.N, cfg.K, sigma)
            _write(c.to_text(), args.out)
        elif args.command == "simulate":
            snr = _single_snr(cfg)
            c = None
            if args.construction:
                c = CodeConstruction.load(args.construction)
                if (c.T, c.M, c.m, c.N, c.K) != (cfg.T, cfg.M, cfg.m, cfg.N, cfg.K):
                    raise ConfigError("construction: file does not match T/M/mod-order/slots/rate")
            rec = simulate_point(cfg, snr, construction=c)
            _write(csv_text([rec], timing=args.timing), args.out)
        else:
            _write(csv_text(run_sweep(cfg), timing=args.timing), args.out)
    except ConfigError as exc:
        print(f"stpcm: configuration error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
