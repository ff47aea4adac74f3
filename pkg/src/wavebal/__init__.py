"""Well-balanced wave-front tracking for the damped wave system on [0, 1]."""

from .errors import (
    DecayTheoryWarning,
    ExactOverflowError,
    InvariantViolation,
    QuadratureError,
    RootFindingError,
    SmallnessViolation,
    WavebalError,
)
from .model import (
    PiecewiseConstant,
    ProblemSpec,
    compute_constants,
    load_problem,
    make_damping,
    make_k,
    normalize,
    stationary_solution,
)
from .scheme import run

__version__ = "0.1.0"

__all__ = [
    "DecayTheoryWarning",
    "ExactOverflowError",
    "InvariantViolation",
    "PiecewiseConstant",
    "ProblemSpec",
    "QuadratureError",
    "RootFindingError",
    "SmallnessViolation",
    "WavebalError",
    "compute_constants",
    "load_problem",
    "make_damping",
    "make_k",
    "normalize",
    "run",
    "stationary_solution",
]
