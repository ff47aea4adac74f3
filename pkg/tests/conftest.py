import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from wavebal.model import PiecewiseConstant, ProblemSpec, make_damping, make_k

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_step(rng, n_pieces, lo=-1.0, hi=1.0):
    bp = np.sort(rng.choice(np.arange(1, 4096), n_pieces - 1, replace=False)) / 4096
    return PiecewiseConstant(tuple(bp), tuple(rng.uniform(lo, hi, n_pieces)))


def random_spec(rng, family="linear", k_family="constant", amp=0.5, pieces=8):
    g = {"linear": dict(c=1.0), "cubic": dict(alpha=1.0), "sinh": dict(beta=1.0)}[family]
    kp = {"constant": dict(value=1.0), "affine": dict(a=0.5, b=1.0),
          "piecewise": dict(breakpoints=(0.3, 0.7), values=(1.0, 2.0, 0.5)),
          "bump": dict(value=2.0, start=0.2, end=0.6)}[k_family]
    return ProblemSpec(make_damping(family, **g), make_k(k_family, **kp),
                       random_step(rng, pieces, -amp, amp), random_step(rng, pieces, -amp, amp))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def linear_spec():
    return ProblemSpec(make_damping("linear", c=1.0), make_k("constant", value=1.0),
                       PiecewiseConstant.constant(0.0), PiecewiseConstant.constant(0.0))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
