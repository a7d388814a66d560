"""Channel polarization on the erasure channel and under GA.

Run: python demos/01_polarization.py
"""

import numpy as np

from stpcm import bec_bhattacharyya, ga_evolve
from stpcm.construction import ga_error_probability

# %% Erasure channel: exact recursion
for n in (2, 6, 10):
    z = bec_bhattacharyya(n, 0.5)
    frac = np.mean((z < 1e-3) | (z > 1 - 1e-3))
    print(f"N={1 << n:5d}  sum(1-Z)={np.sum(1 - z):8.1f}  polarized fraction={frac:.3f}")

# %% The sorted erasure profile is an S-curve that sharpens with N
z = np.sort(bec_bhattacharyya(10, 0.5))
print("deciles of Z at N=1024:", np.round(z[:: len(z) // 10], 4))

# %% Gaussian approximation on a BPSK AWGN channel at 2 dB
sigma2 = 10 ** (-2 / 10)
mean0 = 2 / sigma2
pe = ga_error_probability(ga_evolve(7, mean0))
best = np.argsort(pe, kind="stable")[:64]
print("GA: 64 best of 128 channels, predicted SC BLER", 1 - np.prod(1 - pe[best]))
