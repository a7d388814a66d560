"""End-to-end link: construct, encode, send over fast fading, decode.

Compares SC with CRC-aided list decoding on identical frames, then runs a
short reproducible sweep and prints the CSV.
"""

import numpy as np

from stpcm import PairInterleaver, SimConfig, build_construction, run_sweep, stpcm_decode_cascl, stpcm_decode_sc, stpcm_encode
from stpcm.crc import DEFAULT_CRC
from stpcm.mimo import complex_normal, sample_channels
from stpcm.scheme import attach_crcs, payload_length, strip_crcs
from stpcm.sim import csv_text

T = M = 2
m, N = 2, 64
snr = 3.0
sigma = 10 ** (-snr / 20)

# %% Construction at the operating noise level
c = build_construction(T, M, m, N, T * m * N // 2, sigma)
print(f"K={c.K}, equivalent sigmas per stream {np.round(c.stream_sigmas, 3)}, GA BLER {c.ga_bler():.3e}")

# %% One batch of frames; payload carries a CRC-16 per component code
rng = np.random.default_rng(0)
frames = 300
il = PairInterleaver(0, T, m, N)
pay = rng.integers(0, 2, (frames, payload_length(c, DEFAULT_CRC)), dtype=np.uint8)
X = stpcm_encode(attach_crcs(pay, c, DEFAULT_CRC), c, il).X
H = sample_channels(rng, (frames, N), T, M)
Y = (H * np.swapaxes(X, 1, 2)[..., None, :]).sum(-1) + sigma * complex_normal(rng, (frames, N, M))
Y = np.swapaxes(Y, 1, 2)

sc = strip_crcs(stpcm_decode_sc(Y, H, sigma, c, il), c, DEFAULT_CRC)
ls = strip_crcs(stpcm_decode_cascl(Y, H, sigma, c, il, 32, DEFAULT_CRC), c, DEFAULT_CRC)
print("block errors  SC:", int((sc != pay).any(1).sum()), "  CASCL L=32:", int((ls != pay).any(1).sum()))

# %% Reproducible sweep (same numbers for any worker count)
cfg = SimConfig(T=T, M=M, m=m, N=N, rate=0.5, snrs=(2.0, 3.0, 4.0), max_frames=2000, target_errors=50)
print(csv_text(run_sweep(cfg), timing=False))
