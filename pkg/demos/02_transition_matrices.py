"""
The one-step transition matrix
===============================

Over one time step the wave sizes sigma evolve by a doubly stochastic
matrix B(c) = B2(c) B1.  Here we look at its structure for a tiny grid.
"""

from fractions import Fraction

import numpy as np

from wavebal.transition import (birkhoff_split, build_B, det_formula, exact_det,
                                spectral_check, v_minus)

N = 4
c = np.full(N - 1, 0.25)
B = build_B(c)
print(B)

# rows and columns sum to one; e and v- are eigenvectors for +1 and -1
print("row sums", B.sum(axis=1), "col sums", B.sum(axis=0))
print("B v- + v- =", B @ v_minus(N) + v_minus(N))

# only two eigenvalues on the unit circle when consecutive c_j are positive
rep = spectral_check(B, c)
print("moduli", np.round(np.sort(np.abs(rep.eigenvalues))[::-1], 4), "gap", round(rep.gap, 4))

# determinant in exact rational arithmetic
cq = [Fraction(1, 3), Fraction(1, 5), Fraction(2, 7)]
print("det B =", exact_det(build_B(cq, exact=True)), "closed form", det_formula(cq))

# with a constant coefficient B(c) is a convex combination of two permutations
w, (B0, B1) = birkhoff_split(Fraction(1, 3), N, exact=True)
print("B(1/3) == (2/3) B(0) + (1/3) B1:", (B0 * (1 - w) + B1 * w == build_B(w, N, exact=True)).all())
