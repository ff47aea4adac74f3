"""Problem definition for the damped wave system on [0, 1].

The system is

    rho_t + J_x = 0,    J_t + rho_x = -2 k(x) g(J),

with J(0, t) = J(1, t) = Jb.  This module holds the damping registry
(named closed-form families for g and k), piecewise-constant initial data,
the stationary solution, the shift to homogeneous boundary data and the
scalar constants that govern the long-time decay.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np
from scipy import integrate, optimize

from .errors import DecayTheoryWarning, QuadratureError

ArrayFn = Callable[[np.ndarray], np.ndarray]

QUAD_ABS_TOL = 1e-12
SCHEMA_VERSION = 1


def _quad(fun: Callable[[float], float], lo: float, hi: float, points=None) -> float:
    if hi <= lo:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _ = integrate.quad(
                fun, lo, hi, epsabs=QUAD_ABS_TOL, epsrel=QUAD_ABS_TOL, limit=200, points=points
            )
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"quadrature on [{lo}, {hi}] did not converge: {exc}") from exc
    return float(val)


# ---------------------------------------------------------------------------
# Initial data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PiecewiseConstant:
    """Right-continuous step function on [0, 1].

    ``values[i]`` holds on ``[breakpoints[i-1], breakpoints[i])`` with the
    conventions ``breakpoints[-1] = 0`` and ``breakpoints[len] = 1``.
    """

    breakpoints: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        vals = tuple(float(v) for v in self.values)
        if len(vals) != len(bp) + 1:
            raise ValueError("need exactly one more value than breakpoints")
        if any(not (0.0 < b < 1.0) for b in bp):
            raise ValueError("breakpoints must lie strictly inside (0, 1)")
        if any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("values must be finite")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, value: float) -> "PiecewiseConstant":
        return cls((), (value,))

    def __call__(self, x):
        idx = np.searchsorted(np.asarray(self.breakpoints), np.asarray(x, dtype=float), side="right")
        return np.asarray(self.values)[idx]

    sample = __call__

    @property
    def mean(self) -> float:
        edges = (0.0,) + self.breakpoints + (1.0,)
        return float(sum(v * (b - a) for v, a, b in zip(self.values, edges, edges[1:])))

    @property
    def total_variation(self) -> float:
        return float(np.abs(np.diff(self.values)).sum())

    def to_dict(self) -> dict:
        return {"breakpoints": list(self.breakpoints), "values": list(self.values)}

    @classmethod
    def from_dict(cls, d: dict) -> "PiecewiseConstant":
        return cls(tuple(d.get("breakpoints", ())), tuple(d["values"]))


@dataclass(frozen=True)
class ShiftedProfile:
    """``base(x) - shift(x)``; produced when subtracting a stationary profile."""

    base: Any
    shift: ArrayFn
    mean: float = 0.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.base(x) - self.shift(x)

    sample = __call__


# ---------------------------------------------------------------------------
# Damping registry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Damping:
    """Nonlinearity g with its derivative; both act elementwise on arrays.

    ``shift`` stores the boundary value Jb subtracted by :func:`normalize`, so
    ``g(w) = g_family(shift + w) - g_family(shift)``.
    """

    family: str
    params: dict
    shift: float = 0.0
    _g: ArrayFn = field(default=None, repr=False, compare=False)
    _gp: ArrayFn = field(default=None, repr=False, compare=False)

    def g(self, J):
        J = np.asarray(J, dtype=float)
        if self.shift == 0.0:
            return self._g(J)
        return self._g(self.shift + J) - self._g(np.asarray(self.shift))

    def gprime(self, J):
        J = np.asarray(J, dtype=float)
        return self._gp(self.shift + J)

    def shifted(self, Jb: float) -> "Damping":
        return Damping(self.family, self.params, self.shift + Jb, self._g, self._gp)

    @property
    def is_linear(self) -> bool:
        return self.family == "linear"

    def to_dict(self) -> dict:
        return {"family": self.family, "params": dict(self.params)}


def _linear(c=1.0):
    if c <= 0:
        raise ValueError("linear damping needs c > 0")
    return (lambda J: c * J), (lambda J: np.full_like(np.asarray(J, dtype=float), c))


def _cubic(alpha=1.0):
    if alpha < 0:
        raise ValueError("cubic damping needs alpha >= 0")
    return (lambda J: J + alpha * J**3), (lambda J: 1.0 + 3.0 * alpha * J**2)


def _sinh(beta=1.0):
    if beta <= 0:
        raise ValueError("sinh damping needs beta > 0")
    return (lambda J: np.sinh(beta * J) / beta), (lambda J: np.cosh(beta * J))


def _power(p=3.0):
    # g'(0) = 0: admissible for the scheme, decay constants degenerate (d1 = 0)
    if p <= 1:
        raise ValueError("power damping needs p > 1")
    return (
        lambda J: np.sign(J) * np.abs(J) ** p,
        lambda J: p * np.abs(J) ** (p - 1.0),
    )


G_FAMILIES: dict[str, Callable[..., tuple[ArrayFn, ArrayFn]]] = {
    "linear": _linear,
    "cubic": _cubic,
    "sinh": _sinh,
    "power": _power,
}


def make_damping(family: str, **params) -> Damping:
    """Build a registered damping nonlinearity, e.g. ``make_damping("cubic", alpha=1)``."""
    try:
        factory = G_FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown g family {family!r}; known: {sorted(G_FAMILIES)}") from None
    g, gp = factory(**params)
    return Damping(family, dict(params), 0.0, g, gp)


@dataclass(frozen=True)
class KFunction:
    """Nonnegative damping coefficient k on [0, 1].

    ``antiderivative`` and ``moment`` use closed forms when the family has
    them and adaptive quadrature otherwise.
    """

    family: str
    params: dict
    _k: ArrayFn = field(repr=False, compare=False, default=None)
    _a: ArrayFn | None = field(repr=False, compare=False, default=None)
    _moment: float | None = field(repr=False, compare=False, default=None)
    _bounds: tuple[float, float] | None = field(repr=False, compare=False, default=None)
    _points: tuple[float, ...] = field(repr=False, compare=False, default=())

    def __call__(self, x):
        return self._k(np.asarray(x, dtype=float))

    def antiderivative(self, x):
        """a(x) = integral of k over [0, x]."""
        x = np.asarray(x, dtype=float)
        if self._a is not None:
            return self._a(x)
        flat = [self._integrate(0.0, float(xi)) for xi in np.ravel(x)]
        return np.asarray(flat).reshape(x.shape)

    def _integrate(self, lo, hi):
        pts = [p for p in self._points if lo < p < hi] or None
        return _quad(lambda y: float(self._k(np.asarray(y))), lo, hi, points=pts)

    @property
    def l1(self) -> float:
        return float(self.antiderivative(1.0))

    def moment(self) -> float:
        """Integral of k(y) (1 - y) over [0, 1]."""
        if self._moment is not None:
            return self._moment
        pts = list(self._points) or None
        return _quad(lambda y: float(self._k(np.asarray(y))) * (1.0 - y), 0.0, 1.0, points=pts)

    def bounds(self) -> tuple[float, float]:
        """(inf k, sup k) over [0, 1]."""
        if self._bounds is not None:
            return self._bounds
        xs = np.linspace(0.0, 1.0, 4097)
        vals = self(xs)
        return float(vals.min()), float(vals.max())

    def to_dict(self) -> dict:
        return {"family": self.family, "params": dict(self.params)}


def _k_constant(value=1.0):
    if value < 0:
        raise ValueError("k must be nonnegative")
    return dict(
        _k=lambda x: np.full_like(x, value, dtype=float),
        _a=lambda x: value * x,
        _moment=value / 2.0,
        _bounds=(value, value),
    )


def _k_affine(a=1.0, b=0.0):
    if a < 0 or a + b < 0:
        raise ValueError("affine k must be nonnegative on [0, 1]")
    return dict(
        _k=lambda x: a + b * x,
        _a=lambda x: a * x + 0.5 * b * x**2,
        _moment=a / 2.0 + b / 6.0,
        _bounds=(min(a, a + b), max(a, a + b)),
    )


def _k_piecewise(breakpoints=(), values=(1.0,)):
    pc = PiecewiseConstant(tuple(breakpoints), tuple(values))
    if min(pc.values) < 0:
        raise ValueError("k must be nonnegative")
    edges = np.array((0.0,) + pc.breakpoints + (1.0,))
    vals = np.array(pc.values)
    cum = np.concatenate(([0.0], np.cumsum(vals * np.diff(edges))))

    def anti(x):
        idx = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, len(vals) - 1)
        return cum[idx] + vals[idx] * (x - edges[idx])

    prim = lambda y: y - 0.5 * y * y  # noqa: E731
    moment = float(np.sum(vals * (prim(edges[1:]) - prim(edges[:-1]))))
    return dict(_k=pc, _a=anti, _moment=moment, _bounds=(float(vals.min()), float(vals.max())),
                _points=pc.breakpoints)


def _k_bump(value=1.0, start=0.25, end=0.75):
    if not (0.0 <= start < end <= 1.0) or value < 0:
        raise ValueError("bump needs 0 <= start < end <= 1 and value >= 0")
    bp = tuple(b for b in (start, end) if 0.0 < b < 1.0)
    vals = ([0.0] if start > 0 else []) + [value] + ([0.0] if end < 1 else [])
    return _k_piecewise(bp, tuple(vals))


def _k_gaussian(base=1.0, amp=0.5, center=0.5, width=0.1):
    if base < 0 or base + min(amp, 0.0) < 0 or width <= 0:
        raise ValueError("gaussian k must be nonnegative with positive width")
    return dict(_k=lambda x: base + amp * np.exp(-(((x - center) / width) ** 2)))


K_FAMILIES: dict[str, Callable[..., dict]] = {
    "constant": _k_constant,
    "affine": _k_affine,
    "piecewise": _k_piecewise,
    "bump": _k_bump,
    "gaussian": _k_gaussian,
}


def make_k(family: str, **params) -> KFunction:
    """Build a registered damping coefficient, e.g. ``make_k("constant", value=1)``."""
    try:
        factory = K_FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown k family {family!r}; known: {sorted(K_FAMILIES)}") from None
    return KFunction(family, dict(params), **factory(**params))


# ---------------------------------------------------------------------------
# Problem, stationary solution, constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProblemSpec:
    damping: Damping
    k: KFunction
    rho0: Any
    J0: Any
    Jb: float = 0.0

    def g(self, J):
        return self.damping.g(J)

    def gprime(self, J):
        return self.damping.gprime(J)

    def validate(self, n_samples: int = 257) -> None:
        if abs(float(self.g(0.0))) > 1e-14:
            raise ValueError("g(0) must vanish")
        k_lo, _ = self.k.bounds()
        if k_lo < 0:
            raise ValueError("k must be nonnegative")
        if self.k.l1 <= 0:
            raise ValueError("k must have positive integral")

    @property
    def is_normalized(self) -> bool:
        return self.Jb == 0.0 and abs(_mean(self.rho0)) <= 1e-14


def _mean(profile) -> float:
    m = getattr(profile, "mean", None)
    if m is not None:
        return float(m)
    return _quad(lambda x: float(profile(np.asarray(x))), 0.0, 1.0)


@dataclass(frozen=True)
class StationarySolution:
    Jtilde: float
    C: float
    g_Jb: float
    k: KFunction = field(repr=False)

    def rhotilde(self, x):
        return self.C - 2.0 * self.g_Jb * self.k.antiderivative(x)

    def Jfun(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.Jtilde)


def stationary_solution(spec: ProblemSpec) -> StationarySolution:
    """Stationary state with J = Jb and the same mass as rho0."""
    gJb = float(spec.g(spec.Jb))
    C = _mean(spec.rho0) + 2.0 * gJb * spec.k.moment()
    return StationarySolution(Jtilde=float(spec.Jb), C=C, g_Jb=gJb, k=spec.k)


def normalize(spec: ProblemSpec) -> ProblemSpec:
    """Rewrite the problem around its stationary state.

    Returns the equivalent problem for (rho - rhotilde, J - Jb): zero boundary
    flux, zero mean density and damping g(Jb + w) - g(Jb).
    """
    if spec.is_normalized:
        return spec
    st = stationary_solution(spec)
    Jb = float(spec.Jb)
    J0 = spec.J0
    if Jb != 0.0:
        if isinstance(J0, PiecewiseConstant):
            J0 = PiecewiseConstant(J0.breakpoints, tuple(v - Jb for v in J0.values))
        else:
            J0 = ShiftedProfile(J0, lambda x, _c=Jb: np.full_like(x, _c))
    if st.g_Jb == 0.0 and isinstance(spec.rho0, PiecewiseConstant):
        rho0 = PiecewiseConstant(spec.rho0.breakpoints, tuple(v - st.C for v in spec.rho0.values))
    else:
        rho0 = ShiftedProfile(spec.rho0, st.rhotilde, mean=0.0)
    return ProblemSpec(spec.damping.shifted(Jb), spec.k, rho0, J0, 0.0)


@dataclass(frozen=True)
class Constants:
    C1: float
    C0: float
    d1: float
    d2: float
    Chat3: float
    Cd1d2: float
    DJ: tuple[float, float]
    condition: bool
    gprime_min: float
    k1: float
    k2: float


def decay_constant(d1: float, d2: float) -> float:
    """exp(-2 d1) (exp(2 d2) - 2 d2)."""
    return math.exp(-2.0 * d1) * (math.exp(2.0 * d2) - 2.0 * d2)


def decay_exponent(d1: float, d2: float) -> float:
    """Half the log-contraction; zero when no contraction is guaranteed."""
    C = decay_constant(d1, d2)
    return 0.5 * abs(math.log(C)) if C < 1.0 else 0.0


def nonlinearity_condition(d1: float, d2: float) -> bool:
    return d1 > 0 and math.exp(2.0 * d2) - 2.0 * d2 < math.exp(2.0 * d1)


def _extremum(fun: ArrayFn, lo: float, hi: float, maximize: bool) -> float:
    if hi <= lo:
        return float(fun(np.asarray(lo)))
    sign = -1.0 if maximize else 1.0
    xs = np.linspace(lo, hi, 1024)
    vals = sign * np.asarray(fun(xs), dtype=float)
    best = float(vals.min())
    step = xs[1] - xs[0]
    for i in np.argsort(vals)[:3]:
        a, b = max(lo, xs[i] - step), min(hi, xs[i] + step)
        res = optimize.minimize_scalar(
            lambda x: sign * float(fun(np.asarray(x))),
            bounds=(a, b),
            method="bounded",
            options={"xatol": 1e-10 * max(1.0, abs(a), abs(b))},
        )
        best = min(best, float(res.fun))
    return sign * best


def gprime_extrema(damping: Damping, DJ: tuple[float, float]) -> tuple[float, float]:
    """(min g', max g') over the interval DJ."""
    lo, hi = map(float, DJ)
    return (_extremum(damping.gprime, lo, hi, maximize=False),
            _extremum(damping.gprime, lo, hi, maximize=True))


def compute_constants(spec: ProblemSpec, DJ: tuple[float, float]) -> Constants:
    """Scalar constants of the decay estimate for J ranging over DJ."""
    Jmin, Jmax = map(float, DJ)
    gmin, gmax = gprime_extrema(spec.damping, (Jmin, Jmax))
    # minimiser noise around a degenerate zero of g' counts as zero
    if gmin <= 1e-12 * max(abs(gmax), 1.0):
        gmin = 0.0
    k1, k2 = spec.k.bounds()
    d1, d2 = k1 * gmin, k2 * gmax
    C0 = max(float(spec.g(Jmax)), -float(spec.g(Jmin)), 0.0)
    Cd = decay_constant(d1, d2)
    cond = nonlinearity_condition(d1, d2)
    if d1 <= 0:
        warnings.warn("d1 <= 0: exponential decay is not guaranteed", DecayTheoryWarning, stacklevel=2)
    return Constants(
        C1=gmax, C0=C0, d1=d1, d2=d2, Chat3=decay_exponent(d1, d2), Cd1d2=Cd,
        DJ=(Jmin, Jmax), condition=cond, gprime_min=gmin, k1=k1, k2=k2,
    )


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def problem_from_dict(d: dict) -> ProblemSpec:
    schema = d.get("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise ValueError(f"unsupported problem schema {schema!r}")
    g = d["g"]
    k = d["k"]
    return ProblemSpec(
        damping=make_damping(g["family"], **g.get("params", {})),
        k=make_k(k["family"], **k.get("params", {})),
        rho0=PiecewiseConstant.from_dict(d["rho0"]),
        J0=PiecewiseConstant.from_dict(d["J0"]),
        Jb=float(d.get("Jb", 0.0)),
    )


def problem_to_dict(spec: ProblemSpec) -> dict:
    if spec.damping.shift != 0.0 or not isinstance(spec.rho0, PiecewiseConstant) \
            or not isinstance(spec.J0, PiecewiseConstant):
        raise ValueError("only problems built from registry families and step data serialize")
    return {
        "schema": SCHEMA_VERSION,
        "g": spec.damping.to_dict(),
        "k": spec.k.to_dict(),
        "rho0": spec.rho0.to_dict(),
        "J0": spec.J0.to_dict(),
        "Jb": spec.Jb,
    }


def load_problem(path: str | Path) -> ProblemSpec:
    with open(path) as fh:
        return problem_from_dict(json.load(fh))
