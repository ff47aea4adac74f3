import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wavebal.errors import DecayTheoryWarning
from wavebal.model import (
    PiecewiseConstant,
    ProblemSpec,
    compute_constants,
    decay_constant,
    decay_exponent,
    load_problem,
    make_damping,
    make_k,
    nonlinearity_condition,
    normalize,
    problem_from_dict,
    problem_to_dict,
    stationary_solution,
)

# extended-precision values of 1 - 2 e^-2 and half its |log|
C_INF = 0.72932943352677461621
CHAT3 = 0.15781487560330883802


def spec(g=("linear", {"c": 1.0}), k=("constant", {"value": 1.0}), rho0=0.0, J0=0.0, Jb=0.0):
    as_pc = lambda v: v if isinstance(v, PiecewiseConstant) else PiecewiseConstant.constant(v)  # noqa: E731
    return ProblemSpec(make_damping(g[0], **g[1]), make_k(k[0], **k[1]), as_pc(rho0), as_pc(J0), Jb)


class TestPiecewiseConstant:
    def test_right_continuous(self):
        f = PiecewiseConstant((0.5,), (1.0, 2.0))
        assert f(0.5) == 2.0
        assert f(np.nextafter(0.5, 0)) == 1.0
        assert f.mean == 1.5
        assert f.total_variation == 1.0

    def test_rejects_bad_breakpoints(self):
        with pytest.raises(ValueError):
            PiecewiseConstant((0.5, 0.4), (1, 2, 3))
        with pytest.raises(ValueError):
            PiecewiseConstant((0.5,), (1.0,))


class TestStationary:
    def test_zero_boundary_zero_mean(self):
        st_ = stationary_solution(spec(k=("affine", {"a": 1.0, "b": 2.0}),
                                       rho0=PiecewiseConstant((0.5,), (1.0, -1.0))))
        assert st_.C == 0.0
        assert np.all(st_.rhotilde(np.linspace(0, 1, 11)) == 0)

    def test_linear_Jb_one(self):
        st_ = stationary_solution(spec(Jb=1.0))
        assert st_.C == pytest.approx(1.0, abs=1e-14)
        x = np.linspace(0, 1, 7)
        np.testing.assert_allclose(st_.rhotilde(x), 1 - 2 * x, atol=1e-14)
        assert st_.Jtilde == 1.0

    def test_linear_Jb_one_mass_three(self):
        st_ = stationary_solution(spec(Jb=1.0, rho0=3.0))
        assert st_.C == pytest.approx(4.0, abs=1e-14)
        np.testing.assert_allclose(st_.rhotilde(np.array([0.0, 0.5, 1.0])), [4, 3, 2], atol=1e-14)

    @pytest.mark.parametrize("kf", [("gaussian", {}), ("affine", {"a": 0.2, "b": 1.5}),
                                    ("piecewise", {"breakpoints": (0.4,), "values": (1.0, 3.0)})])
    def test_ode_and_mass(self, kf):
        s = spec(g=("cubic", {"alpha": 0.5}), k=kf, rho0=PiecewiseConstant((0.3,), (1.0, 2.0)), Jb=0.7)
        st_ = stationary_solution(s)
        x = np.linspace(0.01, 0.99, 25)
        h = 1e-6
        slope = (st_.rhotilde(x + h) - st_.rhotilde(x - h)) / (2 * h)
        expected = -2 * s.k(x) * s.g(0.7)
        mask = np.abs(x - 0.4) > 2 * h
        np.testing.assert_allclose(slope[mask], expected[mask], atol=1e-6)
        from scipy.integrate import quad
        mass = quad(lambda y: float(st_.rhotilde(y)), 0, 1, points=[0.4], epsabs=1e-13)[0]
        assert mass == pytest.approx(s.rho0.mean, abs=1e-10)


class TestNormalize:
    def test_identity_when_normalized(self):
        s = spec(J0=PiecewiseConstant((0.5,), (1.0, -1.0)))
        assert normalize(s) is s

    def test_linear_shift(self):
        n = normalize(spec(Jb=1.0))
        w = np.linspace(-1, 1, 9)
        np.testing.assert_allclose(n.g(w), w, atol=1e-15)
        assert n.Jb == 0.0

    def test_cubic_shift(self):
        n = normalize(spec(g=("cubic", {"alpha": 1.0}), Jb=1.0))
        w = np.linspace(-1, 1, 9)
        np.testing.assert_allclose(n.g(w), 4 * w + 3 * w**2 + w**3, atol=1e-13)
        assert n.g(0.0) == 0.0
        assert n.gprime(0.0) == pytest.approx(4.0)

    def test_idempotent(self):
        s = spec(g=("sinh", {"beta": 2.0}), rho0=PiecewiseConstant((0.2,), (0.0, 1.0)),
                 J0=0.3, Jb=0.5)
        once = normalize(s)
        twice = normalize(once)
        assert twice is once
        assert abs(once.rho0.mean) <= 1e-14

    def test_normalized_mean_zero_for_nonconstant_profile(self):
        s = spec(k=("affine", {"a": 1.0, "b": 1.0}), rho0=2.0, Jb=0.5)
        n = normalize(s)
        from scipy.integrate import quad
        assert quad(lambda y: float(n.rho0(y)), 0, 1)[0] == pytest.approx(0.0, abs=1e-12)


class TestConstants:
    def test_linear_unit(self):
        c = compute_constants(spec(), (-1.0, 1.0))
        assert c.d1 == pytest.approx(1.0) and c.d2 == pytest.approx(1.0)
        assert c.Cd1d2 == pytest.approx(C_INF, rel=1e-14)
        assert c.Chat3 == pytest.approx(CHAT3, rel=1e-13)
        assert c.condition

    @given(st.floats(0.01, 20))
    def test_equal_d_satisfies_condition(self, d):
        assert nonlinearity_condition(d, d)

    def test_power_law_flagged(self):
        with pytest.warns(DecayTheoryWarning):
            c = compute_constants(spec(g=("power", {"p": 3.0})), (-0.5, 0.5))
        assert c.d1 == 0.0
        assert not c.condition

    def test_cubic_extrema(self):
        c = compute_constants(spec(g=("cubic", {"alpha": 1.0})), (-0.2, 0.3))
        assert c.gprime_min == pytest.approx(1.0, abs=1e-9)
        assert c.C1 == pytest.approx(1 + 3 * 0.09, rel=1e-10)
        assert c.C0 == pytest.approx(0.3 + 0.027)

    @given(st.floats(0.0, 3.0), st.floats(0.0, 3.0))
    def test_three_way_agreement(self, a, b):
        d1, d2 = min(a, b), max(a, b)
        C = decay_constant(d1, d2)
        cond = nonlinearity_condition(d1, d2)
        if abs(C - 1) < 1e-12:
            return
        assert (decay_exponent(d1, d2) > 0) == (C < 1) == cond


class TestJson:
    def test_round_trip(self, tmp_path):
        s = spec(g=("cubic", {"alpha": 2.0}), k=("bump", {"value": 2.0, "start": 0.1, "end": 0.5}),
                 rho0=PiecewiseConstant((0.25,), (1.0, 0.0)), J0=0.5, Jb=0.1)
        d = problem_to_dict(s)
        p = tmp_path / "p.json"
        p.write_text(json.dumps(d))
        back = load_problem(p)
        assert problem_to_dict(back) == d

    def test_unknown_family(self):
        with pytest.raises(ValueError, match="unknown g family"):
            problem_from_dict({"g": {"family": "tanh"}, "k": {"family": "constant"},
                               "rho0": {"values": [0]}, "J0": {"values": [0]}})


class TestK:
    @pytest.mark.parametrize("fam,params", [
        ("constant", {"value": 2.0}), ("affine", {"a": 1.0, "b": -0.5}),
        ("piecewise", {"breakpoints": (0.3, 0.6), "values": (1.0, 0.0, 2.0)}),
        ("bump", {"value": 3.0, "start": 0.25, "end": 0.5}),
    ])
    def test_closed_forms_match_quadrature(self, fam, params):
        from scipy.integrate import quad
        k = make_k(fam, **params)
        for x in (0.1, 0.45, 0.9, 1.0):
            ref = quad(lambda y: float(k(y)), 0, x, points=[0.25, 0.3, 0.5, 0.6], limit=200)[0]
            assert float(k.antiderivative(x)) == pytest.approx(ref, abs=1e-12)
        ref = quad(lambda y: float(k(y)) * (1 - y), 0, 1, points=[0.25, 0.3, 0.5, 0.6])[0]
        assert k.moment() == pytest.approx(ref, abs=1e-12)

    def test_gaussian_quadrature(self):
        k = make_k("gaussian", base=1.0, amp=1.0, center=0.5, width=0.1)
        exact = 1.0 + 0.1 * math.sqrt(math.pi) * math.erf(5.0)
        assert k.l1 == pytest.approx(exact, abs=1e-12)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            make_k("constant", value=-1.0)
