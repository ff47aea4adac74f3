"""Transition matrices that advance the strength vector by one time step.

Over one step the ±1 waves of each cell first swap places (matrix B1) and
then every pair meeting at an interior node mixes with coefficient c_j
(matrix B2(c)).  The one-step map is B(c) = B2(c) B1, a doubly stochastic
2N x 2N matrix with only four nonzero entries per row.

Matrices are dense numpy arrays.  Passing ``exact=True`` builds object
arrays of :class:`fractions.Fraction` instead, for zero-tolerance checks at
small N.  Indices in docstrings are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def _check_N(N: int) -> int:
    if int(N) != N or N < 2 or N % 2:
        raise ValueError(f"N must be an even integer >= 2, got {N!r}")
    return int(N)


def _zeros(n, exact):
    if exact:
        out = np.empty((n, n), dtype=object)
        out[...] = Fraction(0)
        return out
    return np.zeros((n, n))


def _one(exact):
    return Fraction(1) if exact else 1.0


def build_B1(N: int, exact: bool = False) -> np.ndarray:
    """Block-diagonal swap of the pairs (2i, 2i+1)."""
    N = _check_N(N)
    B = _zeros(2 * N, exact)
    i = np.arange(N)
    B[2 * i, 2 * i + 1] = _one(exact)
    B[2 * i + 1, 2 * i] = _one(exact)
    return B


def _as_c(c, N: int | None, exact: bool):
    if np.isscalar(c) or isinstance(c, Fraction):
        if N is None:
            raise ValueError("N is required for a scalar coefficient")
        c = [c] * (N - 1)
    c = list(c)
    if exact:
        c = [Fraction(v) for v in c]
    else:
        c = np.asarray(c, dtype=float)
    n_nodes = len(c)
    if N is not None and n_nodes != N - 1:
        raise ValueError(f"expected {N - 1} coefficients, got {n_nodes}")
    return c, n_nodes + 1


def build_B2(c, N: int | None = None, exact: bool = False) -> np.ndarray:
    """Node-mixing matrix: identity corners and blocks [[c, 1-c], [1-c, c]].

    The block for node j = 1..N-1 occupies rows and columns (2j-1, 2j).
    """
    c, N = _as_c(c, N, exact)
    _check_N(N)
    if any(v < 0 or v > 1 for v in c):
        raise ValueError("coefficients must lie in [0, 1]")
    B = _zeros(2 * N, exact)
    one = _one(exact)
    B[0, 0] = one
    B[-1, -1] = one
    for j, cj in enumerate(c, start=1):
        a, b = 2 * j - 1, 2 * j
        B[a, a] = B[b, b] = cj
        B[a, b] = B[b, a] = one - cj
    return B


def build_B(c, N: int | None = None, exact: bool = False) -> np.ndarray:
    """One-step matrix B(c) = B2(c) B1.

    Examples
    --------
    >>> build_B([0.5]).sum(axis=0)
    array([1., 1., 1., 1.])
    """
    c, N = _as_c(c, N, exact)
    return build_B2(c, N, exact).dot(build_B1(N, exact))


def e_vector(N: int) -> np.ndarray:
    return np.ones(2 * N)


def v_minus(N: int) -> np.ndarray:
    """(1, -1, -1, 1, 1, -1, -1, 1, ...): the eigenvector of B(c) for -1."""
    i = np.arange(2 * N)
    return np.where((i + 1) % 4 < 2, 1.0, -1.0)


def is_doubly_stochastic(B: np.ndarray, tol: float = 1e-13) -> bool:
    if B.dtype == object:
        return (all(v >= 0 for v in B.ravel())
                and all(s == 1 for s in B.sum(axis=0)) and all(s == 1 for s in B.sum(axis=1)))
    return bool((B >= -tol).all() and np.allclose(B.sum(axis=0), 1, atol=tol, rtol=0)
                and np.allclose(B.sum(axis=1), 1, atol=tol, rtol=0))


# ---------------------------------------------------------------------------
# Determinants and spectra
# ---------------------------------------------------------------------------


def det_formula(c) -> float | Fraction:
    """Closed form det B(c) = -prod(1 - 2 c_j)."""
    out = -1 if not isinstance(next(iter(c), 0), Fraction) else Fraction(-1)
    for cj in c:
        out *= 1 - 2 * cj
    return out


def exact_det(A: np.ndarray) -> Fraction:
    """Determinant by fraction-exact Gaussian elimination."""
    M = [[Fraction(v) for v in row] for row in A]
    n = len(M)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            det = -det
        p = M[col][col]
        det *= p
        for r in range(col + 1, n):
            f = M[r][col] / p
            if f:
                row, prow = M[r], M[col]
                for k in range(col, n):
                    row[k] -= f * prow[k]
    return det


@dataclass
class SpectralReport:
    eigenvalues: np.ndarray
    max_modulus: float
    n_unit: int
    gap: float
    hypothesis_holds: bool
    ok: bool


def spectral_check(B: np.ndarray, c, tol: float = 1e-10) -> SpectralReport:
    """Check |λ| <= 1 and, if two consecutive c_j are positive, that exactly
    two eigenvalues (namely ±1) have unit modulus.
    """
    lam = np.linalg.eigvals(np.asarray(B, dtype=float))
    mod = np.sort(np.abs(lam))[::-1]
    c = np.asarray(c, dtype=float)
    hyp = bool(np.any(c[:-1] * c[1:] > 0))
    n_unit = int((mod >= 1 - tol).sum())
    gap = float(1.0 - mod[2]) if len(mod) > 2 else 0.0
    ok = bool(mod[0] <= 1 + tol) and (not hyp or n_unit == 2)
    return SpectralReport(lam, float(mod[0]), n_unit, gap, hyp, ok)


# ---------------------------------------------------------------------------
# Decompositions and bounds
# ---------------------------------------------------------------------------


def birkhoff_split(c: float, N: int, exact: bool = False):
    """Constant-coefficient split B(c) = (1 - c) B(0) + c B1.

    Returns ``(c, (B(0), B1))``; the weight of B(0) is ``1 - c``.
    """
    if not (0 <= c < 0.5):
        raise ValueError("c must lie in [0, 1/2)")
    return c, (build_B(0 if not exact else Fraction(0), N, exact), build_B1(N, exact))


@dataclass
class DominanceResult:
    holds: bool
    witness: tuple[int, int] | None = None
    lhs: float | None = None
    rhs: float | None = None

    def __bool__(self):
        return self.holds


def entrywise_dominance(c, d1: float, d2: float, N: int, tol: float = 1e-15) -> DominanceResult:
    """Check B(c) <= (1 + d1/N)^{-1} [B(0) + (d2/N) B1] entry by entry."""
    B = build_B(c, N)
    rhs = (build_B(0.0, N) + (d2 / N) * build_B1(N)) / (1.0 + d1 / N)
    bad = B > rhs + tol
    if bad.any():
        i, j = map(int, np.argwhere(bad)[0])
        return DominanceResult(False, (i, j), float(B[i, j]), float(rhs[i, j]))
    return DominanceResult(True)


# ---------------------------------------------------------------------------
# Fast application
# ---------------------------------------------------------------------------


def swap_pairs(x: np.ndarray) -> np.ndarray:
    """B1 x for a vector or a stack of column vectors."""
    n = x.shape[0]
    return x.reshape(n // 2, 2, *x.shape[1:])[:, ::-1].reshape(x.shape)


def apply_B(c, x: np.ndarray) -> np.ndarray:
    """B(c) x in O(N) without forming the matrix.

    ``x`` may be a vector of length 2N or an array of shape (2N, m).
    """
    c = np.asarray(c, dtype=float)
    y = swap_pairs(np.asarray(x, dtype=float)).copy()
    if c.ndim == 0:
        c = np.full(y.shape[0] // 2 - 1, float(c))
    if len(c) != y.shape[0] // 2 - 1:
        raise ValueError("coefficient count does not match the vector length")
    if y.ndim > 1:
        c = c[:, None]
    a = y[1:-1:2].copy()
    b = y[2:-1:2].copy()
    y[1:-1:2] = c * a + (1 - c) * b
    y[2:-1:2] = (1 - c) * a + c * b
    return y


def apply_B_power(c, x: np.ndarray, n: int) -> np.ndarray:
    """B(c)^n x for a constant coefficient vector."""
    for _ in range(n):
        x = apply_B(c, x)
    return x


def evolve_sigma(sigma: np.ndarray, c_record: Iterable[Sequence[float]],
                 return_history: bool = False, check_l1: bool = True):
    """Apply B(c^n) ... B(c^1) to ``sigma``.

    With ``return_history`` the images after every step are returned as an
    array whose first row is ``sigma`` itself.
    """
    x = np.asarray(sigma, dtype=float).copy()
    hist = [x] if return_history else None
    norm = np.abs(x).sum()
    for c in c_record:
        c = np.asarray(c, dtype=float)
        if len(c) != len(x) // 2 - 1:
            raise ValueError("dimension mismatch between sigma and coefficients")
        x = apply_B(c, x)
        if check_l1:
            new = np.abs(x).sum()
            if new > norm * (1 + 1e-12) + 1e-300:
                raise AssertionError("l1 norm increased under a doubly stochastic map")
            norm = new
        if hist is not None:
            hist.append(x)
    return np.array(hist) if return_history else x


# ---------------------------------------------------------------------------
# Text dumps
# ---------------------------------------------------------------------------


def dump_matrix(B: np.ndarray, path: str | Path, hex_float: bool = False) -> None:
    """Write one row per line, entries separated by single spaces."""
    fmt = float.hex if hex_float else (lambda v: repr(float(v)))
    with open(path, "w", newline="\n") as fh:
        for row in np.asarray(B, dtype=float):
            fh.write(" ".join(fmt(float(v)) for v in row) + "\n")


def load_matrix(path: str | Path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                rows.append([float.fromhex(t) if "0x" in t.lower() else float(t) for t in line.split()])
    return np.array(rows)
