"""Well-balanced wave-front tracking on a synchronized lattice.

The interval [0, 1] is split into N cells of width Δx = 1/N, and Δt = Δx.
The damping sits in 0-waves at the interior nodes x_j = j Δx with sizes
δ_j = a(x_j) - a(x_{j-1}).  Every ±1 wave moves at unit speed, so waves
only meet at cell midpoints (half-integer times) and at nodes (integer
times).  The state is therefore stored as two (f-, f+) pairs per cell:

* ``phase == "node"`` (just after t^n): waves sit next to the nodes and the
  cell interior holds the middle state ``(L.f-, R.f+)``;
* ``phase == "mid"`` (just after t^{n+1/2}): the waves have crossed at the
  midpoint and the middle state is ``(R.f-, L.f+)``.

Wave sizes are jumps of J = f+ - f- (right minus left).  In node phase the
strength vector is ordered as (+1 wave, -1 wave) per cell; in mid phase the
two entries of each cell are swapped.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np

from .errors import InvariantViolation, SmallnessViolation
from .model import Constants, Damping, ProblemSpec, compute_constants, gprime_extrema, normalize
from .riemann import interaction_coefficient, solve_riemann

log = logging.getLogger(__name__)

FM, FP = 0, 1  # column index of f- and f+


@dataclass(frozen=True)
class GridState:
    """Piecewise-constant approximate solution at a half-step boundary.

    ``left`` and ``right`` have shape (N, 2) and hold (f-, f+) next to the
    left and right edge of each cell.  ``step`` counts half time steps.
    """

    N: int
    step: int
    phase: str
    left: np.ndarray
    right: np.ndarray
    delta: np.ndarray
    a_nodes: np.ndarray
    damping: Damping = field(repr=False)
    Jb: float = 0.0
    square: tuple[float, float] = (0.0, 0.0)

    @property
    def dx(self) -> float:
        return 1.0 / self.N

    @property
    def time(self) -> float:
        return self.step * 0.5 / self.N

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.N + 1) / self.N

    @property
    def middle(self) -> np.ndarray:
        if self.phase == "node":
            return np.column_stack((self.left[:, FM], self.right[:, FP]))
        if self.phase == "mid":
            return np.column_stack((self.right[:, FM], self.left[:, FP]))
        return self.left.copy()

    def pieces(self) -> np.ndarray:
        """States in spatial order L_0, M_0, R_0, L_1, ..., shape (3N, 2)."""
        return np.stack((self.left, self.middle, self.right), axis=1).reshape(-1, 2)

    @property
    def J(self) -> np.ndarray:
        p = self.pieces()
        return p[:, FP] - p[:, FM]

    @property
    def rho(self) -> np.ndarray:
        p = self.pieces()
        return p[:, FP] + p[:, FM]


@dataclass(frozen=True)
class StrengthVector:
    sigma: np.ndarray
    positions: np.ndarray
    time: float


@dataclass
class DecayReport:
    times: np.ndarray
    sup_J: np.ndarray
    sup_rho: np.ndarray
    tv_J: np.ndarray
    tv_rho: np.ndarray
    L_pm: np.ndarray
    L_0: np.ndarray
    fitted_rate: float | None
    plateau: float
    N: int
    constants: Constants | None = None
    M_bound: float | None = None
    sigma_history: np.ndarray | None = None
    c_history: np.ndarray | None = None
    snapshots: list = field(default_factory=list)
    final_state: GridState | None = None

    def summary(self) -> dict:
        c = self.constants
        return {
            "N": self.N,
            "T_final": float(self.times[-1]) if len(self.times) else 0.0,
            "fitted_rate": self.fitted_rate,
            "plateau": self.plateau,
            "Chat3": None if c is None else c.Chat3,
            "Cd1d2": None if c is None else c.Cd1d2,
            "d1": None if c is None else c.d1,
            "d2": None if c is None else c.d2,
            "condition": None if c is None else bool(c.condition),
        }


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def _sample(profile, x):
    return np.asarray(profile(x), dtype=float) * np.ones_like(x)


def init_grid(spec: ProblemSpec, N: int, check_smallness: bool = True) -> GridState:
    """Sample the data at the left end of every cell and compute the node jumps.

    The returned state is at time 0-, before any Riemann problem is solved.
    """
    if int(N) != N or N < 2 or N % 2:
        raise ValueError(f"N must be an even integer >= 2, got {N!r}")
    N = int(N)
    x = np.arange(N) / N
    rho = _sample(spec.rho0, x)
    J = _sample(spec.J0, x)
    cells = np.column_stack((0.5 * (rho - J), 0.5 * (rho + J)))
    if not np.all(np.isfinite(cells)):
        raise InvariantViolation("initial data is not finite")
    a_nodes = np.asarray(spec.k.antiderivative(np.arange(N + 1) / N), dtype=float)
    delta = np.diff(a_nodes)[: N - 1]
    if np.any(delta < -1e-15):
        raise ValueError("a(x) must be nondecreasing (k >= 0)")
    delta = np.maximum(delta, 0.0)
    m, M = float(cells.min()), float(cells.max())
    if check_smallness and len(delta):
        C1 = gprime_extrema(spec.damping, (m - M, M - m))[1]
        worst = C1 * float(delta.max())
        if worst >= 1.0:
            raise SmallnessViolation(
                f"sup g' * max delta_j = {worst:.4g} >= 1; increase N")
    return GridState(N=N, step=0, phase="initial", left=cells, right=cells.copy(),
                     delta=delta, a_nodes=a_nodes, damping=spec.damping,
                     Jb=float(spec.Jb), square=(m, M))


def _node_update(state: GridState, Mp: np.ndarray):
    """Solve every node Riemann problem with adjacent states ``Mp``."""
    d = state.damping
    left = np.empty_like(Mp)
    right = np.empty_like(Mp)
    if state.N > 1:
        fan = solve_riemann(Mp[:-1, FM], Mp[:-1, FP], Mp[1:, FM], Mp[1:, FP],
                            state.delta, d.g, d.gprime)
        right[:-1, FM], right[:-1, FP] = fan.star_left
        left[1:, FM], left[1:, FP] = fan.star_right
        Jstar = fan.Jstar
    else:
        Jstar = np.empty(0)
    left[0, FM] = Mp[0, FM]
    left[0, FP] = Mp[0, FM] + state.Jb
    right[-1, FP] = Mp[-1, FP]
    right[-1, FM] = Mp[-1, FP] - state.Jb
    return left, right, Jstar


def _check(state: GridState) -> None:
    arr = (state.left, state.right)
    if not all(np.all(np.isfinite(a)) for a in arr):
        raise InvariantViolation(f"non-finite state at t={state.time}")
    if state.Jb == 0.0:
        m, M = state.square
        for a in arr:
            if a.min() < m or a.max() > M:
                raise InvariantViolation(
                    f"state left the invariant square [{m}, {M}] at t={state.time}")


def initial_riemann_sweep(state: GridState, check: bool = True) -> GridState:
    """Solve the Riemann problems of the initial data (time 0- to 0+)."""
    if state.phase != "initial":
        raise ValueError("initial sweep needs a freshly initialized grid")
    left, right, _ = _node_update(state, state.left)
    out = replace(state, left=left, right=right, phase="node")
    if check:
        _check(out)
    return out


def step_half_crossing(state: GridState) -> GridState:
    """Let the ±1 waves of every cell cross at the midpoint.

    The arrays do not change; only the middle state is reinterpreted.
    """
    if state.phase != "node":
        raise ValueError(f"crossing expects phase 'node', got {state.phase!r}")
    return replace(state, phase="mid", step=state.step + 1)


def step_node_interactions(state: GridState, check: bool = True) -> tuple[GridState, np.ndarray]:
    """Resolve the multiple interactions at all nodes and reflect at the walls.

    Returns the new state and the mixing coefficients c_j, j = 1..N-1.
    """
    if state.phase != "mid":
        raise ValueError(f"node step expects phase 'mid', got {state.phase!r}")
    Jpre = state.right[:-1, FP] - state.right[:-1, FM]
    Mp = state.middle
    left, right, Jpost = _node_update(state, Mp)
    c = _c_secant(Jpre, Jpost, state.delta, state.damping) if state.N > 1 else np.empty(0)
    out = replace(state, left=left, right=right, phase="node", step=state.step + 1)
    if check:
        _check(out)
    return out, c


def _c_secant(Jpre, Jpost, delta, d: Damping) -> np.ndarray:
    zeros = np.zeros_like(Jpre)
    c = interaction_coefficient((zeros, zeros), (zeros, zeros), Jpre, Jpost, delta,
                                gprime=d.gprime, g=d.g)
    return np.atleast_1d(np.asarray(c, dtype=float))


def full_step(state: GridState, check: bool = True) -> tuple[GridState, np.ndarray]:
    return step_node_interactions(step_half_crossing(state), check=check)


def iterate(state: GridState, n_steps: int, check: bool = True) -> Iterator[tuple[GridState, np.ndarray]]:
    """Yield (state, c) after each of ``n_steps`` full time steps."""
    for _ in range(n_steps):
        state, c = full_step(state, check=check)
        yield state, c


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------


def sigma_of(state: GridState) -> np.ndarray:
    L, R = state.left, state.right
    s_plus = R[:, FP] - L[:, FP]
    s_minus = L[:, FM] - R[:, FM]
    out = np.empty(2 * state.N)
    if state.phase == "node":
        out[0::2], out[1::2] = s_plus, s_minus
    elif state.phase == "mid":
        out[0::2], out[1::2] = s_minus, s_plus
    else:
        raise ValueError("no waves exist before the initial sweep")
    return out


def extract_sigma(state: GridState, tol: float = 1e-12) -> StrengthVector:
    """Ordered wave sizes of the ±1 waves with their positions."""
    sigma = sigma_of(state)
    if len(sigma) != 2 * state.N:
        raise InvariantViolation("wave count differs from 2N")
    total = float(sigma.sum())
    if abs(total) > tol * max(1.0, float(np.abs(sigma).sum())):
        raise InvariantViolation(f"sigma . e = {total:.3e} violates the boundary conditions")
    x = state.nodes
    if state.phase == "node":
        pos = np.column_stack((x[:-1], x[1:])).ravel()
    else:
        mid = 0.5 * (x[:-1] + x[1:])
        pos = np.repeat(mid, 2)
    return StrengthVector(sigma=sigma, positions=pos, time=state.time)


def _tv(v: np.ndarray) -> float:
    return float(np.abs(np.diff(v)).sum())


def L_functionals(state: GridState) -> tuple[float, float]:
    """(L_pm, L_0): variation carried by the ±1 waves and by the 0-waves."""
    L_pm = float(np.abs(sigma_of(state)).sum())
    jump = state.left[1:] - state.right[:-1]
    L_0 = 0.5 * float(np.abs(jump).sum())
    return L_pm, L_0


def diagnostics(state: GridState) -> dict:
    J, rho = state.J, state.rho
    p = state.pieces()
    L_pm, L_0 = L_functionals(state)
    return {
        "t": state.time,
        "sup_J": float(np.abs(J).max()),
        "sup_rho": float(np.abs(rho).max()),
        "tv_J": _tv(J),
        "tv_rho": _tv(rho),
        "tv_f": _tv(p[:, FP]) + _tv(p[:, FM]),
        "L_pm": L_pm,
        "L_0": L_0,
    }


def tv_bound(state0: GridState, C0: float, k_l1: float) -> float:
    """Uniform bound M on TV f+ + TV f- computed from the sampled data."""
    cells = state0.left if state0.phase == "initial" else None
    if cells is None:
        raise ValueError("tv_bound needs the state before the initial sweep")
    J = cells[:, FP] - cells[:, FM]
    return (_tv(cells[:, FP]) + _tv(cells[:, FM]) + abs(J[0]) + abs(J[-1])
            + 4.0 * C0 * k_l1)


def riemann_residuals(state: GridState) -> float:
    """Largest defect when re-solving every local Riemann problem of a node-phase state."""
    if state.phase != "node":
        raise ValueError("residuals are defined for node-phase states")
    M = state.middle
    d = state.damping
    res = 0.0
    if state.N > 1:
        fan = solve_riemann(M[:-1, FM], M[:-1, FP], M[1:, FM], M[1:, FP], state.delta, d.g, d.gprime)
        res = max(
            float(np.abs(fan.star_left[0] - state.right[:-1, FM]).max()),
            float(np.abs(fan.star_left[1] - state.right[:-1, FP]).max()),
            float(np.abs(fan.star_right[0] - state.left[1:, FM]).max()),
            float(np.abs(fan.star_right[1] - state.left[1:, FP]).max()),
        )
        # source balance across the 0-wave
        Jl = state.right[:-1, FP] - state.right[:-1, FM]
        drho = (state.left[1:].sum(axis=1) - state.right[:-1].sum(axis=1))
        res = max(res, float(np.abs(drho + 2.0 * d.g(Jl) * state.delta).max()))
    res = max(
        res,
        abs(state.left[0, FP] - state.left[0, FM] - state.Jb),
        abs(state.right[-1, FP] - state.right[-1, FM] - state.Jb),
        abs(state.left[0, FM] - M[0, FM]),
        abs(state.right[-1, FP] - M[-1, FP]),
    )
    return float(res)


def field_at(state: GridState, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact field a time ``tau`` in [0, Δt/2] after ``state``.

    Returns (edges, values) with values of shape (3N, 2) on the intervals
    [edges[i], edges[i+1]).
    """
    h = 0.5 / state.N
    if not (0.0 <= tau <= h + 1e-15):
        raise ValueError("tau must lie within one half step")
    tau = min(tau, h)
    x = state.nodes
    if state.phase == "node":
        inner = np.column_stack((x[:-1] + tau, x[1:] - tau))
    else:
        mid = 0.5 * (x[:-1] + x[1:])
        inner = np.column_stack((mid - tau, mid + tau))
    edges = np.concatenate((np.column_stack((x[:-1], inner)).ravel(), [1.0]))
    return edges, state.pieces()


def _l1_distance(e1, v1, e2, v2) -> float:
    grid = np.union1d(e1, e2)
    mids = 0.5 * (grid[:-1] + grid[1:])
    widths = np.diff(grid)
    i1 = np.clip(np.searchsorted(e1, mids, side="right") - 1, 0, len(v1) - 1)
    i2 = np.clip(np.searchsorted(e2, mids, side="right") - 1, 0, len(v2) - 1)
    return float((np.abs(v1[i1] - v2[i2]).sum(axis=1) * widths).sum())


def lipschitz_check(history: list[GridState], t: float, s: float) -> float:
    """Ratio ∫(|f+(t) - f+(s)| + |f-(t) - f-(s)|) dx / |t - s|.

    ``t`` and ``s`` must fall in one interaction-free window covered by a
    state of ``history``.
    """
    if t == s:
        return 0.0
    lo, hi = min(t, s), max(t, s)
    cands = [st for st in history if st.phase != "initial" and st.time <= lo + 1e-15]
    if not cands:
        raise ValueError("no stored state precedes the requested times")
    st = max(cands, key=lambda q: q.step)
    h = 0.5 / st.N
    if hi - st.time > h + 1e-12:
        raise ValueError("t and s must lie within one half-step window")
    e1, v1 = field_at(st, lo - st.time)
    e2, v2 = field_at(st, hi - st.time)
    return _l1_distance(e1, v1, e2, v2) / (hi - lo)


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------


def fit_decay(times, sup_J) -> tuple[float | None, float]:
    """Exponential rate and plateau of a sup-norm history.

    The plateau is the mean of the final 10 % of samples.  The rate is the
    negative slope of ln(sup_J - plateau) fitted by least squares over the
    central 80 % of the phase in which sup_J exceeds ten times the plateau.
    Returns ``(None, plateau)`` when the fit is ill-conditioned.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(sup_J, dtype=float)
    n = len(y)
    if n == 0:
        return None, 0.0
    tail = max(1, n // 10)
    plateau = float(y[-tail:].mean())
    if not np.any(y > 0):
        return None, plateau
    below = np.nonzero(y <= 10.0 * plateau)[0]
    end = int(below[0]) if len(below) else n
    if end < 3:
        return None, plateau
    t0, t1 = t[0], t[end - 1]
    lo, hi = t0 + 0.1 * (t1 - t0), t0 + 0.9 * (t1 - t0)
    sel = (t >= lo) & (t <= hi) & (np.arange(n) < end) & (y > plateau)
    if sel.sum() < 3:
        return None, plateau
    slope, _ = np.polyfit(t[sel], np.log(y[sel] - plateau), 1)
    return float(-slope), plateau


def run(spec: ProblemSpec, N: int, T_final: float, *, record_sigma: bool = False,
        record_c: bool = False, snapshot_every: int = 0, check: bool = True,
        normalize_first: bool = True) -> DecayReport:
    """Simulate up to ``T_final`` and collect per-step diagnostics.

    The problem is first rewritten around its stationary state, so every
    distance in the report is measured from the stationary solution.
    """
    if not T_final > 0:
        raise ValueError("T_final must be positive")
    prob = normalize(spec) if normalize_first else spec
    st0 = init_grid(prob, N)
    m, M = st0.square
    DJ = (m - M, M - m)
    consts = compute_constants(prob, DJ) if DJ[1] > DJ[0] else None
    C0 = consts.C0 if consts is not None else 0.0
    M_bound = tv_bound(st0, C0, prob.k.l1)
    n_steps = int(math.ceil(T_final * N - 1e-9))

    if prob.Jb == 0.0 and not np.any(st0.left):
        log.info("initial data is stationary; skipping time stepping")
        times = np.arange(n_steps + 1) / N
        z = np.zeros(n_steps + 1)
        return DecayReport(times, z, z.copy(), z.copy(), z.copy(), z.copy(), z.copy(),
                           None, 0.0, N, consts, M_bound,
                           np.zeros((n_steps + 1, 2 * N)) if record_sigma else None,
                           np.zeros((n_steps, N - 1)) if record_c else None, [], st0)

    state = initial_riemann_sweep(st0, check=check)
    keys = ("t", "sup_J", "sup_rho", "tv_J", "tv_rho", "L_pm", "L_0")
    rows = np.empty((n_steps + 1, len(keys)))
    sig = np.empty((n_steps + 1, 2 * N)) if record_sigma else None
    chist = np.empty((n_steps, N - 1)) if record_c else None
    snaps = [state] if snapshot_every else []

    def record(i, s):
        dg = diagnostics(s)
        rows[i] = [dg[k] for k in keys]
        if sig is not None:
            sig[i] = sigma_of(s)

    record(0, state)
    for n in range(1, n_steps + 1):
        state, c = full_step(state, check=check)
        record(n, state)
        if chist is not None:
            chist[n - 1] = c
        if snapshot_every and n % snapshot_every == 0:
            snaps.append(state)
    rate, plateau = fit_decay(rows[:, 0], rows[:, 1])
    if rate is None:
        log.warning("decay-rate fit is ill-conditioned for N=%d", N)
    return DecayReport(
        times=rows[:, 0], sup_J=rows[:, 1], sup_rho=rows[:, 2], tv_J=rows[:, 3],
        tv_rho=rows[:, 4], L_pm=rows[:, 5], L_0=rows[:, 6], fitted_rate=rate,
        plateau=plateau, N=N, constants=consts, M_bound=M_bound, sigma_history=sig,
        c_history=chist, snapshots=snaps, final_state=state,
    )
