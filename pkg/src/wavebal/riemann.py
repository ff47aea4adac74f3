"""Exact Riemann solvers for the damped wave system in diagonal variables.

With f± = (ρ ± J)/2 the homogeneous part transports f+ at speed +1 and f-
at speed -1.  The damping is concentrated in a stationary 0-wave carrying
the jump δ of a(x) = ∫k.  A Riemann problem between a left state
(f-_ℓ, f+_ℓ) and a right state (f-_r, f+_r) is resolved by a -1 wave, the
0-wave and a +1 wave.  Across the -1 wave f+ is continuous and across the
+1 wave f- is continuous, so the intermediate states are

    U_*  = (f+_ℓ - J*, f+_ℓ),      U_** = (f-_r, f-_r + J*),

where J* solves J* + g(J*) δ = f+_ℓ - f-_r.

All solvers accept scalars or equally shaped arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import RootFindingError, SmallnessViolation

ROOT_TOL = 1e-14
MAX_ITER = 200


@dataclass(frozen=True)
class RiemannFan:
    """Wave pattern of one interior Riemann problem.

    ``star_left`` and ``star_right`` are the (f-, f+) states on either side
    of the 0-wave.  Wave sizes are jumps of J, right value minus left.
    """

    Jstar: np.ndarray
    star_left: tuple[np.ndarray, np.ndarray]
    star_right: tuple[np.ndarray, np.ndarray]
    sigma_m1: np.ndarray
    sigma_p1: np.ndarray

    @property
    def rho_star_l(self):
        return self.star_left[0] + self.star_left[1]

    @property
    def rho_star_r(self):
        return self.star_right[0] + self.star_right[1]


def solve_intermediate_J(rhs, delta, g: Callable, gprime: Callable | None = None,
                         bracket=None, tol: float = ROOT_TOL, max_iter: int = MAX_ITER):
    """Solve ``J + g(J) * delta = rhs`` elementwise.

    Bracketed Newton iteration with a bisection fallback.  Since g is
    increasing and g(0) = 0, the root always lies between 0 and ``rhs``;
    that interval is the default bracket.  A wider user bracket is accepted
    and expanded if it fails to enclose the root.
    """
    rhs = np.asarray(rhs, dtype=float)
    delta = np.broadcast_to(np.asarray(delta, dtype=float), rhs.shape)
    if np.any(delta < 0):
        raise ValueError("delta must be nonnegative")
    if bracket is None:
        lo = np.minimum(0.0, rhs)
        hi = np.maximum(0.0, rhs)
    else:
        lo = np.broadcast_to(np.asarray(bracket[0], dtype=float), rhs.shape).copy()
        hi = np.broadcast_to(np.asarray(bracket[1], dtype=float), rhs.shape).copy()

    def phi(J):
        return J + g(J) * delta - rhs

    f_lo, f_hi = phi(lo), phi(hi)
    for _ in range(60):
        bad = (f_lo > 0) | (f_hi < 0)
        if not bad.any():
            break
        width = np.maximum(hi - lo, 1.0)
        lo = np.where(f_lo > 0, lo - width, lo)
        hi = np.where(f_hi < 0, hi + width, hi)
        f_lo, f_hi = phi(lo), phi(hi)
    else:
        raise RootFindingError("root of J + g(J) delta = rhs not bracketed; is g increasing?")

    if gprime is None:
        gprime = _numeric_derivative(g)
    scale = np.maximum(1.0, np.abs(rhs))
    J = np.clip(rhs / (1.0 + np.asarray(gprime(np.zeros_like(rhs))) * delta), lo, hi)
    for _ in range(max_iter):
        f = phi(J)
        done = np.abs(f) <= tol * scale
        if done.all():
            return J
        lo = np.where(f < 0, J, lo)
        hi = np.where(f > 0, J, hi)
        dphi = 1.0 + np.asarray(gprime(J)) * delta
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = J - f / dphi
        inside = np.isfinite(newton) & (newton > lo) & (newton < hi)
        nxt = np.where(inside, newton, 0.5 * (lo + hi))
        stalled = (nxt == J) | (hi - lo <= 4 * np.finfo(float).eps * scale)
        J = np.where(done, J, nxt)
        if np.all(done | stalled):
            return J
    raise RootFindingError(f"Riemann solver did not converge in {max_iter} iterations")


def _numeric_derivative(g):
    def gp(J):
        h = 1e-7 * np.maximum(1.0, np.abs(J))
        return (g(J + h) - g(J - h)) / (2 * h)
    return gp


def solve_riemann(fl_minus, fl_plus, fr_minus, fr_plus, delta, g: Callable,
                  gprime: Callable | None = None, bracket=None) -> RiemannFan:
    """Solve the interior Riemann problem with a 0-wave of size ``delta``.

    Examples
    --------
    >>> fan = solve_riemann(0.0, 1.0, 0.0, 0.0, 0.5, lambda J: J)
    >>> round(float(fan.Jstar), 12)
    0.666666666667
    """
    fl_minus, fl_plus, fr_minus, fr_plus = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (fl_minus, fl_plus, fr_minus, fr_plus)))
    Jstar = solve_intermediate_J(fl_plus - fr_minus, delta, g, gprime, bracket)
    # both star values lie between f+_l and f-_r; clip away rounding so the
    # invariant square is preserved exactly
    lo = np.minimum(fl_plus, fr_minus)
    hi = np.maximum(fl_plus, fr_minus)
    sl_minus = np.clip(fl_plus - Jstar, lo, hi)
    sr_plus = np.clip(fr_minus + Jstar, lo, hi)
    Jl = fl_plus - fl_minus
    Jr = fr_plus - fr_minus
    return RiemannFan(
        Jstar=Jstar,
        star_left=(sl_minus, fl_plus.copy()),
        star_right=(fr_minus.copy(), sr_plus),
        sigma_m1=Jstar - Jl,
        sigma_p1=Jr - Jstar,
    )


def solve_boundary_left(f_minus, f_plus=None, Jb: float = 0.0):
    """Reflect at x = 0 where J = Jb.

    The boundary state keeps the incoming f- and sets f+ = f- + Jb.  Returns
    the new f+ and the size of the outgoing +1 wave (needs ``f_plus``, the
    state to the right of it; otherwise the size is returned as NaN).
    """
    f_minus = np.asarray(f_minus, dtype=float)
    f_out = f_minus + Jb
    if f_plus is None:
        size = np.full_like(f_minus, np.nan)
    else:
        size = (np.asarray(f_plus, dtype=float) - f_minus) - Jb
    return f_out, size


def solve_boundary_right(f_plus, f_minus=None, Jb: float = 0.0):
    """Reflect at x = 1 where J = Jb; mirror image of :func:`solve_boundary_left`."""
    f_plus = np.asarray(f_plus, dtype=float)
    f_out = f_plus - Jb
    if f_minus is None:
        size = np.full_like(f_plus, np.nan)
    else:
        size = Jb - (f_plus - np.asarray(f_minus, dtype=float))
    return f_out, size


def interaction_coefficient(sigma_in, sigma_out, Jstar_pre, Jstar_post, delta,
                            gprime: Callable | None = None, g: Callable | None = None,
                            rel_tol: float = 1e-9):
    """Mixing coefficient c of a multiple interaction at a node.

    Incoming sizes ``(s1, s_m1)`` (the +1 wave from the left and the -1 wave
    from the right) map to outgoing ``(t_m1, t1)`` as

        t_m1 = c s1 + (1 - c) s_m1,    t1 = (1 - c) s1 + c s_m1,

    with c = g'(s) δ / (1 + g'(s) δ) for a mean-value point s between the two
    intermediate values of J.

    When ``g`` is given, g'(s) is the secant slope of g between
    ``Jstar_pre`` and ``Jstar_post``.  Otherwise c is read off the sizes
    when the incoming difference is resolvable, falling back to
    ``gprime(Jstar_post)``.
    """
    s1, sm1 = (np.asarray(v, dtype=float) for v in sigma_in)
    tm1, t1 = (np.asarray(v, dtype=float) for v in sigma_out)
    Jpre = np.asarray(Jstar_pre, dtype=float)
    Jpost = np.asarray(Jstar_post, dtype=float)
    delta = np.asarray(delta, dtype=float)

    def from_slope(slope):
        A = slope * delta
        return A / (1.0 + A)

    if g is not None:
        dJ = Jpost - Jpre
        tiny = np.abs(dJ) <= 1e-12 * np.maximum(1.0, np.abs(Jpost))
        with np.errstate(divide="ignore", invalid="ignore"):
            secant = (g(Jpost) - g(Jpre)) / np.where(tiny, 1.0, dJ)
        if gprime is not None:
            fallback = gprime(0.5 * (Jpre + Jpost))
        else:
            fallback = _numeric_derivative(g)(0.5 * (Jpre + Jpost))
        c = from_slope(np.where(tiny, fallback, secant))
    else:
        if gprime is None:
            raise ValueError("need gprime or g")
        din = s1 - sm1
        dout = t1 - tm1
        scale = np.maximum(np.abs(s1) + np.abs(sm1), 1e-300)
        resolvable = np.abs(din) > rel_tol * scale
        with np.errstate(divide="ignore", invalid="ignore"):
            c_sizes = 0.5 * (1.0 - dout / np.where(resolvable, din, 1.0))
        c = np.where(resolvable, c_sizes, from_slope(np.asarray(gprime(Jpost))))
        c = np.where(delta == 0, 0.0, c)

    if np.any(c < -1e-12) or np.any(c >= 0.5) or not np.all(np.isfinite(c)):
        raise SmallnessViolation(
            "interaction coefficient outside [0, 1/2): the node jump violates sup g' * delta < 1")
    c = np.maximum(c, 0.0)
    return c if c.ndim else float(c)
