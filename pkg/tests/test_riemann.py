import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from wavebal.errors import SmallnessViolation
from wavebal.model import make_damping
from wavebal.riemann import (
    interaction_coefficient,
    solve_boundary_left,
    solve_boundary_right,
    solve_intermediate_J,
    solve_riemann,
)

LIN = make_damping("linear", c=1.0)
CUB = make_damping("cubic", alpha=1.0)
finite = st.floats(-1.0, 1.0)


def test_no_zero_wave_is_transport():
    fan = solve_riemann(0.0, 1.0, 0.0, 0.0, 0.0, LIN.g, LIN.gprime)
    assert fan.Jstar == 1.0
    assert fan.rho_star_r - fan.rho_star_l == 0.0


def test_linear_closed_form():
    fan = solve_riemann(0.0, 1.0, 0.0, 0.0, 0.5, LIN.g, LIN.gprime)
    assert fan.Jstar == pytest.approx(2 / 3, abs=1e-15)
    assert fan.rho_star_r - fan.rho_star_l == pytest.approx(-2 / 3, abs=1e-14)


def test_cubic_against_bisection_oracle():
    ref = brentq(lambda J: 1.5 * J + 0.5 * J**3 - 1.0, 0.0, 1.0, xtol=1e-15, rtol=1e-15)
    fan = solve_riemann(0.0, 1.0, 0.0, 0.0, 0.5, CUB.g, CUB.gprime)
    assert 0 < fan.Jstar < 1
    assert fan.Jstar == pytest.approx(ref, abs=1e-14)


@given(st.floats(-5, 5), st.floats(0, 2), st.floats(-50, -6), st.floats(6, 50))
def test_bracket_independence(rhs, delta, lo, hi):
    a = solve_intermediate_J(rhs, delta, CUB.g, CUB.gprime)
    b = solve_intermediate_J(rhs, delta, CUB.g, CUB.gprime, bracket=(lo, hi))
    assert a == pytest.approx(b, abs=1e-13 * max(1, abs(rhs)))


@given(finite, finite, finite, finite, st.floats(0, 0.9))
def test_fan_identities(a, b, c, d, delta):
    fan = solve_riemann(a, b, c, d, delta, CUB.g, CUB.gprime)
    J = fan.Jstar
    assert abs(J + CUB.g(J) * delta - (b - c)) <= 1e-13
    jump = fan.rho_star_r - fan.rho_star_l
    assert jump == pytest.approx(-2 * CUB.g(J) * delta, abs=1e-13)
    Jl, Jr = b - a, d - c
    assert fan.sigma_m1 + fan.sigma_p1 == pytest.approx(Jr - Jl, abs=1e-15)


def test_invariant_square_random(rng):
    n = 10_000
    m, M = -0.7, 1.3
    st_ = rng.uniform(m, M, (4, n))
    delta = rng.uniform(0, 0.5, n)
    for d in (LIN, CUB, make_damping("sinh", beta=2.0)):
        fan = solve_riemann(*st_, delta, d.g, d.gprime)
        for arr in (*fan.star_left, *fan.star_right):
            assert arr.min() >= m and arr.max() <= M


def test_size_estimate(rng):
    n = 5000
    st_ = rng.uniform(-0.5, 0.5, (4, n))
    delta = rng.uniform(0, 0.3, n)
    fan = solve_riemann(*st_, delta, CUB.g, CUB.gprime)
    C0 = float(CUB.g(1.0))  # |J| <= M - m = 1
    dfp = st_[3] - st_[1]
    assert np.all(np.abs(np.abs(fan.sigma_p1) - np.abs(dfp)) <= C0 * delta + 1e-14)


def test_boundaries():
    f, s = solve_boundary_left(0.3)
    assert f == 0.3
    f, s = solve_boundary_left(0.3, f_plus=0.8)
    assert s == pytest.approx(0.5)
    f, s = solve_boundary_right(-0.2)
    assert f == -0.2
    f, s = solve_boundary_right(-0.2, f_minus=-0.2)
    assert s == 0.0


@given(finite, finite)
def test_boundary_reflection_preserves_size(fm, fp):
    # incoming -1 wave between J = 0 at the wall and J_r = fp - fm
    incoming = fp - fm
    _, out = solve_boundary_left(fm, fp)
    assert out == pytest.approx(incoming, abs=1e-15)
    _, out_r = solve_boundary_right(fp, fm)
    assert out_r == pytest.approx(-incoming, abs=1e-15)


def _interaction(d, delta, fa, fb, fc):
    """Two consecutive solves at one node: states (fa | fb) then new data."""
    first = solve_riemann(*fa, *fb, delta, d.g, d.gprime)
    # waves arrive from neighbouring cells carrying states fc
    left = (first.star_left[0], fc[0])  # +1 wave from left changes f+
    right = (fc[1], first.star_right[1])  # -1 wave from right changes f-
    Jpre = first.Jstar
    s1 = (first.star_left[1] - first.star_left[0]) - (left[1] - left[0])
    sm1 = (right[1] - right[0]) - (first.star_right[1] - first.star_right[0])
    second = solve_riemann(*left, *right, delta, d.g, d.gprime)
    return (s1, sm1), (second.sigma_m1, second.sigma_p1), Jpre, second.Jstar


@given(st.tuples(finite, finite), st.tuples(finite, finite), st.tuples(finite, finite), st.floats(0, 0.3))
def test_interaction_properties(fa, fb, fc, delta):
    d = CUB
    sin, sout, Jpre, Jpost = _interaction(d, delta, fa, fb, fc)
    s1, sm1 = sin
    tm1, t1 = sout
    assert tm1 + t1 == pytest.approx(s1 + sm1, abs=1e-12)
    assert abs(tm1) + abs(t1) <= abs(s1) + abs(sm1) + 1e-12
    inf_gp = 1.0
    factor = (1 - delta * inf_gp) / (1 + delta * inf_gp)
    assert abs(t1 - tm1) <= abs(s1 - sm1) * factor + 1e-12
    c = interaction_coefficient(sin, sout, Jpre, Jpost, delta, g=d.g, gprime=d.gprime)
    assert 0 <= c < 0.5
    assert tm1 == pytest.approx(c * s1 + (1 - c) * sm1, abs=1e-12)
    assert t1 == pytest.approx((1 - c) * s1 + c * sm1, abs=1e-12)


def test_linear_c_is_constant():
    c = interaction_coefficient((0.3, -0.1), (0.0, 0.0), 0.1, 0.4, 0.5, g=LIN.g, gprime=LIN.gprime)
    assert c == pytest.approx(1 / 3)


def test_equal_incoming_uses_fallback():
    c = interaction_coefficient((0.2, 0.2), (0.2, 0.2), 0.0, 0.0, 0.5, gprime=LIN.gprime)
    assert c == pytest.approx(1 / 3)


def test_no_zero_wave_gives_zero():
    assert interaction_coefficient((0.3, 0.1), (0.1, 0.3), 0.0, 0.0, 0.0, gprime=LIN.gprime) == 0.0


def test_smallness_violation():
    with pytest.raises(SmallnessViolation):
        interaction_coefficient((0, 0), (0, 0), 0.0, 1.0, 1.5, g=LIN.g, gprime=LIN.gprime)


def test_negative_delta_rejected():
    with pytest.raises(ValueError):
        solve_riemann(0, 0, 0, 0, -0.1, LIN.g)
