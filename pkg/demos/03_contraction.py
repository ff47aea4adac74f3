"""
Contraction over a full cycle
=============================

Every 2N steps the component of sigma orthogonal to e and v- shrinks in
l1 by at least C_N(d1, d2).  We compare C_N with its limit and with the
contraction actually measured on pair vectors v_ij.
"""

import numpy as np

from wavebal.longtime import bessel_f0, bessel_f1, contraction_constant, measure_contraction

d = 1.0
print(f"f0(1) = {bessel_f0(1.0):.15f}   f1(1) = {bessel_f1(1.0):.15f}")
print(" N      C_N       measured   |C_N - C_inf| * N")
for N in (8, 16, 32, 64, 128, 256):
    rep = contraction_constant(N, d)
    c = (d / N) / (1 + d / N)
    measured = measure_contraction(c, N, rng=np.random.default_rng(N))
    print(f"{N:4d}  {rep.CN:.6f}  {measured:.6f}   {abs(rep.CN - rep.Climit) * N:.4f}")
print(f"limit 1 - 2 e^-2 = {contraction_constant(8, d).Climit:.10f}")

# the bound is far from tight: mixing at all nodes contracts much faster
