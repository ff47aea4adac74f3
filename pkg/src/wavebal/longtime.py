"""Long-time contraction of the strength vector.

B(c) has the eigenvectors e (eigenvalue 1) and v- (eigenvalue -1).  The
boundary conditions keep σ orthogonal to e, so the component along v-
oscillates and everything else lives in E-, the orthogonal complement of
span{e, v-}.  This module provides

* decompositions of σ into the v- part and pair vectors v_ij inside E-;
* the permutation algebra of B(0) and B1 (commutation rule, full-cycle sum
  P̂, closed forms for the sums S_k of words with k factors B1);
* the binomial expansion of [B(0) + γ B1]^{2N} with its coefficient sums,
  the Bessel-type series f0 and f1, and the contraction constant C_N;
* a fast measurement of the ℓ1 contraction of products of B(c) on pair
  vectors.

Indices are 0-based unless a docstring says otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from .errors import ExactOverflowError
from .transition import apply_B, build_B1, build_B2, v_minus

INT64_MAX = np.iinfo(np.int64).max
EXACT_BINOMIAL_MAX_N = 32


# ---------------------------------------------------------------------------
# Index sets and decompositions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IndexSets:
    """The two cycles of B(0)^2: I' = {1, 4, 5, 8, ...} and I'' = {2, 3, 6, 7, ...}.

    ``Iprime`` and ``Idoubleprime`` are 1-based as usually written;
    ``prime0`` and ``doubleprime0`` are the 0-based numpy index arrays.
    """

    Iprime: tuple[int, ...]
    Idoubleprime: tuple[int, ...]

    @property
    def prime0(self) -> np.ndarray:
        return np.asarray(self.Iprime) - 1

    @property
    def doubleprime0(self) -> np.ndarray:
        return np.asarray(self.Idoubleprime) - 1


def index_sets(N: int) -> IndexSets:
    i = np.arange(1, 2 * N + 1)
    prime = i[i % 4 < 2]
    return IndexSets(tuple(int(v) for v in prime), tuple(int(v) for v in i[i % 4 >= 2]))


def decompose_E_minus(sigma, tol: float = 1e-12) -> tuple[float, np.ndarray]:
    """Split σ = α v- + σ̃ with σ̃ orthogonal to e and v-.

    Returns ``(alpha, tilde)``; note α = σ·v- / (2N).
    """
    sigma = np.asarray(sigma, dtype=float)
    scale = max(1.0, float(np.abs(sigma).sum()))
    if abs(float(sigma.sum())) > tol * scale:
        raise ValueError(f"sigma . e = {sigma.sum():.3e} is not zero")
    v = v_minus(len(sigma) // 2)
    alpha = float(sigma @ v) / len(sigma)
    return alpha, sigma - alpha * v


def split_H1_H2(tilde_sigma) -> tuple[np.ndarray, np.ndarray]:
    """Restrict σ̃ to I' and to I'' (complementary supports)."""
    x = np.asarray(tilde_sigma, dtype=float)
    sets = index_sets(len(x) // 2)
    p = np.zeros_like(x)
    pp = np.zeros_like(x)
    p[sets.prime0] = x[sets.prime0]
    pp[sets.doubleprime0] = x[sets.doubleprime0]
    return p, pp


def pair_vector(n: int, i: int, j: int) -> np.ndarray:
    """v_ij: +1 at i, -1 at j."""
    v = np.zeros(n)
    v[i] = 1.0
    v[j] = -1.0
    return v


@dataclass
class PairDecomposition:
    """x = Σ beta * v_ij over ``pairs`` of (i, j, beta), 0-based indices."""

    n: int
    pairs: list[tuple[int, int, float]] = field(default_factory=list)

    def reconstruct(self) -> np.ndarray:
        x = np.zeros(self.n)
        for i, j, b in self.pairs:
            x[i] += b
            x[j] -= b
        return x

    @property
    def weight(self) -> float:
        return float(sum(abs(b) for _, _, b in self.pairs))


def greedy_pair_decomposition(x, zero_tol: float = 1e-13) -> PairDecomposition:
    """Write a zero-sum vector as a combination of pair vectors v_kh.

    Each step takes k with the smallest nonzero |x_k| and a partner h of
    opposite sign with the largest |x_h| (ties go to the smaller index),
    then subtracts x_k v_kh.  Every step zeroes x_k and lowers ||x||_1 by
    exactly 2 |x_k|, so ||x||_1 = 2 Σ|beta|.  Entries below
    ``zero_tol * ||x||_1`` count as zero.

    Examples
    --------
    >>> greedy_pair_decomposition([2.0, -1.0, -1.0]).pairs
    [(1, 0, -1.0), (0, 2, 1.0)]
    """
    x = np.array(x, dtype=float)
    norm = float(np.abs(x).sum())
    if abs(float(x.sum())) > 1e-12 * max(norm, 1.0):
        raise ValueError("greedy decomposition needs a zero-sum vector")
    out = PairDecomposition(len(x))
    if norm == 0.0:
        return out
    tol = zero_tol * norm
    x[np.abs(x) <= tol] = 0.0
    while True:
        nz = np.flatnonzero(x)
        if len(nz) < 2:
            break
        vals = x[nz]
        k = int(nz[np.argmin(np.abs(vals))])
        opp = nz[np.sign(vals) == -np.sign(x[k])]
        if len(opp) == 0:
            break
        h = int(opp[np.argmax(np.abs(x[opp]))])
        beta = float(x[k])
        out.pairs.append((k, h, beta))
        x[h] += beta
        x[k] = 0.0
        if abs(x[h]) <= tol:
            x[h] = 0.0
    return out


def decompose_pairs_E_minus(tilde_sigma) -> PairDecomposition:
    """Pair decomposition of σ̃ in E- with both indices of each pair in I' or in I''."""
    x = np.asarray(tilde_sigma, dtype=float)
    sets = index_sets(len(x) // 2)
    out = PairDecomposition(len(x))
    for idx in (sets.prime0, sets.doubleprime0):
        sub = greedy_pair_decomposition(x[idx])
        out.pairs.extend((int(idx[i]), int(idx[j]), b) for i, j, b in sub.pairs)
    return out


# ---------------------------------------------------------------------------
# Permutation algebra of B(0) and B1
# ---------------------------------------------------------------------------
# A permutation p encodes the 0/1 matrix with P[i, p[i]] = 1, so the
# product A B corresponds to i -> pB[pA[i]].


def perm_B1(N: int) -> np.ndarray:
    return np.arange(2 * N) ^ 1


def perm_B2_zero(N: int) -> np.ndarray:
    p = np.arange(2 * N)
    p[1:-1] = p[1:-1] + np.where(p[1:-1] % 2 == 1, 1, -1)
    return p


def perm_B0(N: int) -> np.ndarray:
    return perm_B1(N)[perm_B2_zero(N)]


def perm_power(p: np.ndarray, n: int) -> np.ndarray:
    out = np.arange(len(p))
    for _ in range(n % len(p) if len(p) else 0):
        out = p[out]
    return out


def perm_matrix(p: np.ndarray, dtype=np.int64) -> np.ndarray:
    M = np.zeros((len(p), len(p)), dtype=dtype)
    M[np.arange(len(p)), p] = 1
    return M


def B0_power(N: int, ell: int) -> np.ndarray:
    """Integer matrix B(0)^ell (negative ell allowed)."""
    p = perm_B0(N)
    return perm_matrix(perm_power(p, ell % (2 * N)))


def commutation_check(N: int, ell: int) -> bool:
    """Exact check of B(0)^{±ell} B1 = B1 B(0)^{∓ell}."""
    B1 = perm_matrix(perm_B1(N))
    Bp, Bm = B0_power(N, ell), B0_power(N, -ell)
    return bool(np.array_equal(Bp @ B1, B1 @ Bm) and np.array_equal(Bm @ B1, B1 @ Bp))


def hat_P(N: int) -> np.ndarray:
    """½(e eᵀ + v- v-ᵀ) as an integer 0/1 matrix."""
    v = v_minus(N).astype(np.int64)
    return (1 + np.outer(v, v)) // 2


def full_cycle_sum(N: int, start: int = 1) -> np.ndarray:
    """Σ_{j=start}^{start+N-1} B(0)^{2j}."""
    p2 = perm_power(perm_B0(N), 2)
    cur = perm_power(p2, start)
    out = np.zeros((2 * N, 2 * N), dtype=np.int64)
    for _ in range(N):
        out[np.arange(2 * N), cur] += 1
        cur = p2[cur]
    return out


def _comb_checked(n: int, k: int, exact: bool) -> int:
    v = math.comb(n, k) if 0 <= k <= n else 0
    if not exact and v > INT64_MAX:
        raise ExactOverflowError(f"C({n}, {k}) exceeds the 64-bit range")
    return v


def S_k_closed_form(N: int, k: int, exact: bool = False) -> np.ndarray:
    """Sum of all words with k factors B1 and 2N - k factors B(0).

    Uses the closed forms (integer binomials times B(0)^{2j}, with a
    trailing B2(0) for odd k).  Entries are int64 with an overflow guard, or
    Python integers when ``exact`` is true.
    """
    if not 0 <= k <= 2 * N:
        raise ValueError("k must lie in [0, 2N]")
    n = 2 * N
    dtype = object if exact else np.int64
    out = np.zeros((n, n), dtype=dtype)
    if k in (0, n):
        out[np.arange(n), np.arange(n)] = 1
        return out
    p2 = perm_power(perm_B0(N), 2)
    tail = perm_B2_zero(N) if k % 2 else np.arange(n)
    h = k // 2
    if k % 2 == 0:
        js = range(h, n - h + 1)
        coef = lambda j: _comb_checked(j, h, exact) * _comb_checked(n - j - 1, h - 1, exact)  # noqa: E731
    else:
        js = range(h, n - h)
        coef = lambda j: _comb_checked(j, h, exact) * _comb_checked(n - j - 1, h, exact)  # noqa: E731
    rows = np.arange(n)
    total = 0
    for j in js:
        c = coef(j)
        total += c
        if not exact and total > INT64_MAX:
            raise ExactOverflowError("S_k entries exceed the 64-bit range")
        cols = tail[perm_power(p2, j)]
        out[rows, cols] += c
    return out


def S_k_brute_force(N: int) -> list[np.ndarray]:
    """All S_k, k = 0..2N, by enumerating every word of length 2N.

    Each word is a product of B(0) and B1 factors; all 2^{2N} words are
    composed as permutations in one vectorized sweep.  Meant for N <= 8.
    """
    n = 2 * N
    if n > 20:
        raise ValueError("brute force enumeration is limited to N <= 10")
    words = np.arange(1 << n, dtype=np.int64)
    bits = (words[:, None] >> np.arange(n)) & 1
    p0, p1 = perm_B0(N), perm_B1(N)
    r = np.broadcast_to(np.arange(n), (len(words), n)).copy()
    for m in range(n):
        r = np.where(bits[:, m:m + 1] == 1, p1[r], p0[r])
    ks = bits.sum(axis=1)
    out = np.zeros((n + 1, n, n), dtype=np.int64)
    rows = np.broadcast_to(np.arange(n), r.shape)
    np.add.at(out, (np.broadcast_to(ks[:, None], r.shape), rows, r), 1)
    return list(out)


def S_k_recurrence(N: int, gamma: float | None = None) -> list[np.ndarray]:
    """All S_k as floats via the prefix recurrence T_k <- T_k B(0) + T_{k-1} B1.

    Independent of the closed forms and affordable for N in the hundreds.
    """
    n = 2 * N
    p0, p1 = perm_B0(N), perm_B1(N)
    inv0, inv1 = np.argsort(p0), np.argsort(p1)
    T = np.zeros((n + 1, n, n))
    T[0] = np.eye(n)
    for m in range(n):
        # right-multiplying by a permutation matrix permutes columns
        new = T[:, :, inv0].copy()
        new[1:] += T[:-1][:, :, inv1]
        T = new
    return list(T)


# ---------------------------------------------------------------------------
# Expansion of [B(0) + γ B1]^{2N}
# ---------------------------------------------------------------------------


def zeta_eta(N: int, gamma, exact: bool | None = None) -> tuple[list, list]:
    """Coefficients ζ_j (j = 0..2N-1) and η_j (j = 0..2N-1, η_0 = 0).

    ζ_j = Σ_{ℓ=1}^{min(j, 2N-j-1)} γ^{2ℓ+1} C(j, ℓ) C(2N-j-1, ℓ)
    η_j = Σ_{h=1}^{min(j, 2N-j)}   γ^{2h}   C(j, h) C(2N-j-1, h-1)

    Exact integer binomials are used for N <= 32 (and always for a
    Fraction ``gamma``), log-gamma terms beyond.
    """
    n = 2 * N
    if exact is None:
        exact = isinstance(gamma, Fraction) or N <= EXACT_BINOMIAL_MAX_N
    zeta, eta = [], []
    if exact:
        g = gamma if isinstance(gamma, Fraction) else float(gamma)
        for j in range(n):
            zeta.append(sum((g ** (2 * l + 1) * (math.comb(j, l) * math.comb(n - j - 1, l))
                             for l in range(1, min(j, n - j - 1) + 1)), 0 * g))
            eta.append(sum((g ** (2 * h) * (math.comb(j, h) * math.comb(n - j - 1, h - 1))
                            for h in range(1, min(j, n - j) + 1)), 0 * g))
        return zeta, eta
    g = float(gamma)
    if g == 0.0:
        return [0.0] * n, [0.0] * n
    lg = math.log(g)
    j = np.arange(n)[:, None]
    m = np.arange(1, N + 1)[None, :]
    with np.errstate(invalid="ignore"):
        zl = (2 * m + 1) * lg + _log_comb_np(j, m) + _log_comb_np(n - j - 1, m)
        el = 2 * m * lg + _log_comb_np(j, m) + _log_comb_np(n - j - 1, m - 1)
    z = np.where(m <= np.minimum(j, n - j - 1), np.exp(np.where(np.isfinite(zl), zl, -np.inf)), 0.0)
    e = np.where(m <= np.minimum(j, n - j), np.exp(np.where(np.isfinite(el), el, -np.inf)), 0.0)
    return z.sum(axis=1).tolist(), e.sum(axis=1).tolist()


def _log_comb_np(n, k):
    n, k = np.broadcast_arrays(np.asarray(n, float), np.asarray(k, float))
    ok = (k >= 0) & (k <= n)
    out = gammaln(n + 1) - gammaln(np.where(ok, k, 0) + 1) - gammaln(np.where(ok, n - k, 0) + 1)
    return np.where(ok, out, -np.inf)


def rising(a, n: int):
    """Shifted factorial (a)_n = a (a+1) ... (a+n-1), with (a)_0 = 1."""
    out = 1
    for i in range(n):
        out *= a + i
    return out


def hypergeometric_zeta(j: int, N: int, gamma: float) -> float:
    """ζ̃_j = γ + ζ_j written as γ · 2F1(-j, -2N+j+1; 1; γ²).

    The series terminates because (-j)_n vanishes for n > j.
    """
    if not 0 <= j <= 2 * N - 1:
        raise ValueError("j must lie in [0, 2N-1]")
    a, b = -j, -2 * N + j + 1
    g2 = gamma * gamma
    terms = []
    n = 0
    while True:
        num = rising(a, n) * rising(b, n)
        if n > 0 and num == 0:
            break
        terms.append(num / math.factorial(n) ** 2 * g2 ** n)
        n += 1
    return gamma * math.fsum(terms)


def _series(first_power: int, denom, d: float) -> float:
    if d < 0:
        raise ValueError("d must be nonnegative")
    if d > 300:
        raise OverflowError("series argument too large for double precision (d > 300)")
    if d == 0:
        return 0.0
    total = 0.0
    m = 1
    while True:
        term = math.exp((2 * m + first_power) * math.log(d) - denom(m))
        total += term
        if term < 1e-18 * total:
            return total
        m += 1


def bessel_f0(d: float) -> float:
    """f0(d) = Σ_{ℓ>=1} d^{2ℓ+1} / (ℓ!)² = d (I0(2d) - 1)."""
    return _series(1, lambda m: 2 * math.lgamma(m + 1), d)


def bessel_f1(d: float) -> float:
    """f1(d) = Σ_{h>=1} d^{2h} / (h! (h-1)!) = d I1(2d)."""
    return _series(0, lambda m: math.lgamma(m + 1) + math.lgamma(m), d)


@dataclass(frozen=True)
class ExpansionReport:
    N: int
    d1: float
    d2: float
    zeta_sum: float
    eta_sum: float
    bound_zeta: float
    bound_eta: float
    CN: float
    Climit: float
    contracts: bool

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def contraction_constant(N: int, d1: float, d2: float | None = None) -> ExpansionReport:
    """C_N(d1, d2) = (1 + d1/N)^{-2N} [e^{2 d2} - 2 d2 + (f0(d2) + f1(d2)) / N].

    The coefficient sums of the expansion are evaluated at γ = d2 / N.
    """
    d2 = d1 if d2 is None else d2
    if d1 < 0 or d2 < d1:
        raise ValueError("need 0 <= d1 <= d2")
    f0, f1 = bessel_f0(d2), bessel_f1(d2)
    zeta, eta = zeta_eta(N, d2 / N, exact=False if N > EXACT_BINOMIAL_MAX_N else None)
    CN = (1.0 + d1 / N) ** (-2 * N) * (math.exp(2 * d2) - 2 * d2 + (f0 + f1) / N)
    Climit = math.exp(-2 * d1) * (math.exp(2 * d2) - 2 * d2)
    return ExpansionReport(
        N=N, d1=d1, d2=d2,
        zeta_sum=float(math.fsum(map(float, zeta))), eta_sum=float(math.fsum(map(float, eta))),
        bound_zeta=math.sinh(2 * d2) - 2 * d2 + f0 / N,
        bound_eta=math.cosh(2 * d2) - 1 + f1 / N,
        CN=CN, Climit=Climit, contracts=CN < 1.0,
    )


def _frac_matrix(A) -> np.ndarray:
    out = np.empty(A.shape, dtype=object)
    for idx, v in np.ndenumerate(A):
        # numpy integers would leak into the Fraction and overflow
        out[idx] = Fraction(int(v)) if isinstance(v, (int, np.integer)) else Fraction(v)
    return out


@dataclass
class ExpansionCheck:
    N: int
    d: object
    equal: bool
    max_abs_diff: float
    zeta_sum: float
    eta_sum: float
    zeta_bound_ok: bool
    eta_bound_ok: bool

    def __bool__(self):
        return self.equal and self.zeta_bound_ok and self.eta_bound_ok


def expansion_rhs(N: int, gamma, exact: bool) -> np.ndarray:
    """I + 2γ P̂ + Σ ζ_j B(0)^{2j} B2(0) + Σ η_j B(0)^{2j}."""
    n = 2 * N
    zeta, eta = zeta_eta(N, gamma, exact=True if exact else None)
    conv = _frac_matrix if exact else (lambda A: A.astype(float))
    out = conv(np.eye(n, dtype=np.int64)) + conv(hat_P(N)) * (2 * gamma)
    p2 = perm_power(perm_B0(N), 2)
    tail = perm_B2_zero(N)
    rows = np.arange(n)
    cur = np.arange(n)
    for j in range(n):
        if j:
            out[rows, cur] += eta[j]
        out[rows, tail[cur]] += zeta[j]
        cur = p2[cur]
    return out


def theorem_expansion_check(N: int, d, exact: bool = True, tol: float = 1e-12) -> ExpansionCheck:
    """Compare [B(0) + (d/N) B1]^{2N} with its binomial reconstruction.

    In exact mode both sides are rational matrices and must agree entry by
    entry; otherwise the largest entry difference must stay below ``tol``.
    The coefficient sums are also checked against their Bessel-type bounds.
    """
    if exact:
        d = Fraction(d)
        gamma = d / N
        A = _frac_matrix(perm_matrix(perm_B0(N))) + _frac_matrix(perm_matrix(perm_B1(N))) * gamma
    else:
        gamma = float(d) / N
        A = perm_matrix(perm_B0(N)).astype(float) + gamma * perm_matrix(perm_B1(N))
    lhs = A
    for _ in range(2 * N - 1):
        lhs = lhs.dot(A)
    rhs = expansion_rhs(N, gamma, exact)
    diff = lhs - rhs
    if exact:
        equal = all(v == 0 for v in diff.ravel())
        mad = float(max(abs(v) for v in diff.ravel()))
    else:
        mad = float(np.abs(diff).max())
        equal = mad <= tol * max(1.0, float(np.abs(lhs).max()))
    zeta, eta = zeta_eta(N, float(gamma), exact=False if N > EXACT_BINOMIAL_MAX_N else None)
    zs, es = math.fsum(zeta), math.fsum(eta)
    df = float(d)
    zb = math.sinh(2 * df) - 2 * df + bessel_f0(df) / N
    eb = math.cosh(2 * df) - 1 + bessel_f1(df) / N
    slack = 1e-12 * max(1.0, zb, eb)
    return ExpansionCheck(N, d, equal, mad, zs, es, 0 <= zs <= zb + slack, 0 <= es <= eb + slack)


# ---------------------------------------------------------------------------
# Contraction measurement
# ---------------------------------------------------------------------------


def sample_pairs(N: int, n_random: int = 32, rng=None, exhaustive: bool = False) -> list[tuple[int, int]]:
    """Pairs (i, j) inside I' or inside I'' (0-based).

    All adjacent pairs of each set plus ``n_random`` random pairs, or every
    pair when ``exhaustive`` is true.
    """
    sets = index_sets(N)
    groups = (sets.prime0, sets.doubleprime0)
    if exhaustive:
        return [(int(a), int(b)) for g in groups for ia, a in enumerate(g) for b in g[ia + 1:]]
    pairs = {(int(a), int(b)) for g in groups for a, b in zip(g, g[1:])}
    rng = np.random.default_rng(0) if rng is None else rng
    for _ in range(n_random):
        g = groups[int(rng.integers(2))]
        a, b = rng.choice(len(g), size=2, replace=False)
        pairs.add((int(g[min(a, b)]), int(g[max(a, b)])))
    return sorted(pairs)


def measure_contraction(c, N: int, n_steps: int | None = None, *, pairs=None,
                        n_random: int = 32, rng=None, exhaustive: bool = False,
                        bound: float | None = None, tol: float = 1e-10) -> float:
    """max over pairs of ||B(c^n) ... B(c^1) v_ij||_1 / 2.

    ``c`` is a scalar, a coefficient vector (applied ``n_steps`` times,
    default 2N) or a record of shape (steps, N-1) applied row by row.
    With ``bound`` an AssertionError is raised if the ratio exceeds it.
    """
    if pairs is None:
        pairs = sample_pairs(N, n_random, rng, exhaustive)
    n = 2 * N
    X = np.zeros((n, len(pairs)))
    cols = np.arange(len(pairs))
    idx = np.asarray(pairs)
    X[idx[:, 0], cols] = 1.0
    X[idx[:, 1], cols] = -1.0
    c = np.asarray(c, dtype=float)
    if c.ndim <= 1:
        steps = [np.broadcast_to(c, (N - 1,))] * (n if n_steps is None else n_steps)
    else:
        steps = c if n_steps is None else c[:n_steps]
    for row in steps:
        X = apply_B(row, X)
    ratio = float(np.abs(X).sum(axis=0).max() / 2.0)
    if bound is not None and ratio > bound + tol:
        raise AssertionError(f"contraction ratio {ratio} exceeds bound {bound}")
    return ratio


def decay_chain(tilde_sigma, c_history, N: int, CN: float, h_max: int) -> list[tuple[int, float, float]]:
    """ℓ1 norm of the evolved E- component after every 2N steps.

    Returns rows ``(h, ||𝔅_{2Nh} σ̃||_1, CN^h ||σ̃||_1)`` for h = 0..h_max.
    """
    x = np.asarray(tilde_sigma, dtype=float).copy()
    base = float(np.abs(x).sum())
    rows = [(0, base, base)]
    c_history = np.asarray(c_history, dtype=float)
    need = 2 * N * h_max
    if len(c_history) < need:
        raise ValueError(f"need {need} recorded steps, got {len(c_history)}")
    for h in range(1, h_max + 1):
        for row in c_history[2 * N * (h - 1): 2 * N * h]:
            x = apply_B(row, x)
        rows.append((h, float(np.abs(x).sum()), CN ** h * base))
    return rows


def B2_zero(N: int) -> np.ndarray:
    return build_B2(np.zeros(N - 1))


def B1_matrix(N: int) -> np.ndarray:
    return build_B1(N)
