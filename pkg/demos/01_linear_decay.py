"""
Exponential decay toward the stationary state
=============================================

Linear damping g(J) = J with k = 1 gives d1 = d2 = 1, so the predicted
decay exponent is Chat3 = |ln(1 - 2 e^-2)| / 2.  We run the scheme on
three grids and look at the sup distance of J from its stationary value.
"""

import numpy as np

from wavebal import PiecewiseConstant, ProblemSpec, make_damping, make_k, run

# a fine staircase approximating J0(x) = x - 1/2
n = 4096
J0 = PiecewiseConstant(tuple(np.arange(1, n) / n), tuple(np.arange(n) / n - 0.5))
spec = ProblemSpec(make_damping("linear", c=1.0), make_k("constant", value=1.0),
                   PiecewiseConstant.constant(0.0), J0)

reports = {N: run(spec, N, 60.0) for N in (64, 128, 256)}
Chat3 = reports[64].constants.Chat3
print(f"predicted exponent Chat3 = {Chat3:.6f}")
for N, rep in reports.items():
    print(f"N={N:4d}  fitted rate={rep.fitted_rate:.4f}  plateau={rep.plateau:.3e}")

# the plateau is a grid effect: it halves when the grid is refined
print("plateau(N)/plateau(2N):",
      [round(reports[N].plateau / reports[2 * N].plateau, 3) for N in (64, 128)])

# the measured decay is faster than the bound, which is only one-sided
try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, ax = plt.subplots()
    for N, rep in reports.items():
        ax.semilogy(rep.times, rep.sup_J, label=f"N={N}")
    t = reports[64].times
    ax.semilogy(t, 0.5 * np.exp(-Chat3 * t), "k--", label="exp(-Chat3 t)")
    ax.set_xlabel("t")
    ax.set_ylabel("sup |J - J_b|")
    ax.legend()
    fig.savefig("linear_decay.png", dpi=120)
    print("wrote linear_decay.png")
