"""Abstract control systems with outputs, simulation, and axiom probes.

A system is a time set (continuous or discrete), a state evaluator and an
output map; continuous-time systems are integrated with fixed-step RK4 (or
explicit Euler), discrete-time systems iterate their step map exactly.  The
integration grid is aligned with the input signal's breakpoints so that each
step sees a constant input value, which preserves RK4's order for
piecewise-constant inputs.

Blow-up handling: when the state norm crosses ``blow_up_threshold`` (or the
state stops being finite while already large) the trajectory is truncated
and stamped with the crossing time.  This is the finite-horizon stand-in for
a finite maximal existence time, and property checkers treat it as evidence
against forward completeness at that sample.  A NaN/Inf right-hand side at
moderate state norms is a genuine integration error instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, IntegrationError
from .signals import InputSignal

__all__ = ["SystemModel", "SimPlan", "Trajectory", "AxiomReport", "simulate", "check_axioms", "full_state_wrap"]


def _euclidean(x: np.ndarray) -> float:
    return float(np.linalg.norm(x))


def _embed_default(radius: float, direction: np.ndarray) -> np.ndarray:
    return radius * direction


@dataclass(frozen=True)
class SystemModel:
    """Time set + state/input/output dimensions + evaluators.

    ``rhs(x, u_value)`` is the state derivative for continuous time and the
    step map for discrete time.  ``state_norm``/``embed`` let systems whose
    stored coordinates are not Euclidean (e.g. polar states) declare the norm
    the stability definitions quantify over and how to realise "a state of
    norm r in direction d".
    """

    name: str
    time_set: str  # "continuous" | "discrete"
    state_dim: int
    input_dim: int
    rhs: Callable[[np.ndarray, np.ndarray], np.ndarray]
    output: Callable[[np.ndarray, np.ndarray], np.ndarray]
    output_dim: int = 1
    analytic_flow: Optional[Callable[[float, np.ndarray, InputSignal], np.ndarray]] = None
    state_norm: Callable[[np.ndarray], float] = _euclidean
    embed: Callable[[float, np.ndarray], np.ndarray] = _embed_default
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.time_set not in ("continuous", "discrete"):
            raise DomainError("time_set must be 'continuous' or 'discrete'")

    def zero_input(self) -> InputSignal:
        return InputSignal.zero(self.input_dim) if self.input_dim else InputSignal.zero(0)

    def output_norms(self, outputs: np.ndarray) -> np.ndarray:
        return np.linalg.norm(np.atleast_2d(outputs), axis=1)


@dataclass(frozen=True)
class SimPlan:
    """Integration controls: horizon, base step, method, blow-up threshold."""

    horizon: float
    step: float = 1e-2
    method: str = "rk4"  # "rk4" | "euler"
    blow_up_threshold: float = 1e9
    refinement: int = 0

    def __post_init__(self):
        if self.horizon < 0 or self.step <= 0:
            raise DomainError("horizon must be >= 0 and step > 0")
        if self.method not in ("rk4", "euler"):
            raise DomainError("method must be 'rk4' or 'euler'")

    def refined(self, levels: int = 1) -> "SimPlan":
        return SimPlan(self.horizon, self.step / (2.0 ** levels), self.method,
                       self.blow_up_threshold, self.refinement)


@dataclass
class Trajectory:
    """Simulation result sampled on the integration grid.

    ``outputs[k]`` is exactly ``h(states[k], input_values[k])`` by
    construction.  ``blow_up`` is the first grid time at which the state norm
    crossed the threshold, or None.
    """

    times: np.ndarray
    states: np.ndarray
    outputs: np.ndarray
    input_values: np.ndarray
    blow_up: Optional[float]
    step: float
    method: str
    oracle_states: Optional[np.ndarray] = None

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    def output_norms(self) -> np.ndarray:
        return np.linalg.norm(self.outputs, axis=1)

    def state_norms(self, norm=_euclidean) -> np.ndarray:
        return np.array([norm(x) for x in self.states])

    def at_time(self, t: float) -> int:
        """Index of the grid point closest to t (grid contains probe times)."""
        return int(np.argmin(np.abs(self.times - t)))

    def write_csv(self, path) -> None:
        n = self.states.shape[1]
        m = self.outputs.shape[1]
        header = (
            ["t"]
            + [f"x_{i}" for i in range(n)]
            + [f"y_{j}" for j in range(m)]
            + ["blowup_flag"]
        )
        flags = np.zeros(len(self.times))
        if self.blow_up is not None:
            flags[self.times >= self.blow_up] = 1.0
        data = np.column_stack([self.times, self.states, self.outputs, flags])
        np.savetxt(path, data, delimiter=",", header=",".join(header), comments="")


def _time_grid(horizon: float, step: float, breakpoints: np.ndarray) -> np.ndarray:
    n_steps = int(np.ceil(horizon / step - 1e-12))
    base = np.linspace(0.0, n_steps * step, n_steps + 1)
    base = base[base <= horizon + 1e-15]
    if base[-1] < horizon:
        base = np.append(base, horizon)
    cuts = breakpoints[(breakpoints > 0.0) & (breakpoints < horizon)]
    grid = np.union1d(base, cuts)
    # drop near-duplicates produced by float unions
    keep = np.concatenate(([True], np.diff(grid) > 1e-13))
    return grid[keep]


def simulate(
    sys: SystemModel,
    x0,
    u: InputSignal,
    plan: SimPlan,
    with_oracle: bool = False,
) -> Trajectory:
    """Run the system from x0 under input u on [0, min(horizon, blow-up)]."""
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (sys.state_dim,):
        raise DomainError(f"state must have shape ({sys.state_dim},)")
    if u.dim != sys.input_dim:
        raise DomainError(f"input dim {u.dim} does not match system ({sys.input_dim})")

    if sys.time_set == "discrete":
        times = np.arange(0.0, np.floor(plan.horizon) + 1.0)
    else:
        times = _time_grid(plan.horizon, plan.step, u.breakpoints)

    n_pts = len(times)
    states = np.empty((n_pts, sys.state_dim))
    u_vals = np.empty((n_pts, max(sys.input_dim, 0)))
    states[0] = x0
    u_vals[0] = u(times[0])
    blow_up = None
    threshold = plan.blow_up_threshold
    x = x0.copy()
    last = n_pts - 1

    rhs = sys.rhs
    discrete = sys.time_set == "discrete"
    rk4 = plan.method == "rk4"
    for k in range(n_pts - 1):
        t0, t1 = times[k], times[k + 1]
        uv = u(t0)
        if discrete:
            x_new = np.asarray(rhs(x, uv), dtype=float)
        else:
            h = t1 - t0
            k1 = rhs(x, uv)
            if rk4:
                k2 = rhs(x + (0.5 * h) * k1, uv)
                k3 = rhs(x + (0.5 * h) * k2, uv)
                k4 = rhs(x + h * k3, uv)
                x_new = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            else:
                x_new = x + h * k1
        finite = np.all(np.isfinite(x_new))
        if not finite and sys.state_norm(x) < 1e3:
            raise IntegrationError(
                f"{sys.name}: non-finite right-hand side at t = {t0:g} with moderate state"
            )
        states[k + 1] = x_new if finite else x
        u_vals[k + 1] = u(t1)
        if not finite or sys.state_norm(states[k + 1]) > threshold:
            blow_up = float(t1)
            last = k + 1
            break
        x = x_new

    times = times[: last + 1]
    states = states[: last + 1]
    u_vals = u_vals[: last + 1]
    outputs = np.stack([np.atleast_1d(sys.output(states[k], u_vals[k])) for k in range(len(times))])
    oracle = None
    if with_oracle and sys.analytic_flow is not None:
        oracle = np.stack([np.asarray(sys.analytic_flow(t, x0, u)) for t in times])
    return Trajectory(times, states, outputs, u_vals, blow_up, plan.step, plan.method, oracle)


@dataclass
class AxiomReport:
    """Max residuals of the identity / causality / cocycle axiom probes."""

    identity_residual: float
    causality_residual: float
    cocycle_residual: float
    flagged: list
    samples: int

    def passes(self, tol: float) -> bool:
        return max(self.identity_residual, self.causality_residual, self.cocycle_residual) <= tol


def check_axioms(sys: SystemModel, samples, plan: SimPlan) -> AxiomReport:
    """Probe the semigroup axioms on a list of (x0, u, t, s) samples.

    identity:  || phi(0, x, u) - x ||
    causality: || phi(t, x, u) - phi(t, x, u|_[0,t]) ||
    cocycle:   || phi(t+s, x, u) - phi(s, phi(t, x, u), u(t + .)) ||
    Blow-ups flag the sample instead of failing the whole report.
    """
    if not samples:
        raise DomainError("need at least one axiom sample")
    id_res = 0.0
    caus_res = 0.0
    coc_res = 0.0
    flagged = []
    for i, (x0, u, t, s) in enumerate(samples):
        x0 = np.asarray(x0, dtype=float)
        try:
            traj_id = simulate(sys, x0, u, SimPlan(0.0, plan.step, plan.method, plan.blow_up_threshold))
            id_res = max(id_res, float(np.linalg.norm(traj_id.states[-1] - x0)))

            full = simulate(sys, x0, u, SimPlan(t + s, plan.step, plan.method, plan.blow_up_threshold))
            if full.blow_up is not None:
                flagged.append((i, "blow-up"))
                continue
            restricted = simulate(
                sys, x0, u.restrict(0.0, t), SimPlan(t, plan.step, plan.method, plan.blow_up_threshold)
            )
            head = simulate(sys, x0, u, SimPlan(t, plan.step, plan.method, plan.blow_up_threshold))
            caus_res = max(
                caus_res, float(np.linalg.norm(head.states[-1] - restricted.states[-1]))
            )
            tail = simulate(
                sys, head.states[-1], u.shift(t),
                SimPlan(s, plan.step, plan.method, plan.blow_up_threshold),
            )
            k_ts = full.at_time(t + s)
            coc_res = max(
                coc_res, float(np.linalg.norm(full.states[k_ts] - tail.states[-1]))
            )
        except IntegrationError:
            flagged.append((i, "integration error"))
    return AxiomReport(id_res, caus_res, coc_res, flagged, len(samples))


def full_state_wrap(sys: SystemModel) -> SystemModel:
    """Re-output the state itself: h(x, u) = x."""
    return SystemModel(
        name=f"{sys.name}_full_state",
        time_set=sys.time_set,
        state_dim=sys.state_dim,
        input_dim=sys.input_dim,
        rhs=sys.rhs,
        output=lambda x, u: np.asarray(x, dtype=float),
        output_dim=sys.state_dim,
        analytic_flow=sys.analytic_flow,
        state_norm=sys.state_norm,
        embed=sys.embed,
        meta=dict(sys.meta, full_state=True),
    )
