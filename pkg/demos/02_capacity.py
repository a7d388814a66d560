"""QAM capacity, per-stream ergodic capacity and the equivalent AWGN noise.

Each SIC stream of a T x M Rayleigh channel sees a chi-square gain; the
construction replaces it with the AWGN channel of equal QAM capacity.
"""

import numpy as np

from stpcm import awgn_capacity_qam, equivalent_awgn_sigma, ergodic_stream_capacity, mimo_ergodic_capacity

m, T, M = 4, 2, 2
print(" snr  I_G    I_1    I_2    sigma   sigma_1  sigma_2")
for snr in range(0, 25, 4):
    sigma = 10 ** (-snr / 20)
    caps = [ergodic_stream_capacity(sigma, m, M, k) for k in (1, 2)]
    sks = [equivalent_awgn_sigma(sigma, m, M, k)[0] for k in (1, 2)]
    print(f"{snr:4d}  {awgn_capacity_qam(sigma, m):.3f}  {caps[0]:.3f}  {caps[1]:.3f}  "
          f"{sigma:.4f}  {sks[0]:.4f}   {sks[1]:.4f}")

# the last diagonal has the fewest degrees of freedom, hence the noisiest equivalent
print("sum rate at 12 dB:", round(mimo_ergodic_capacity(10 ** (-12 / 20), m, T, M), 3))
