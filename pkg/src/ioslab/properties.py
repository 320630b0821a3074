"""Machine-checkable encodings of the stability and attractivity notions.

Every notion is checked against a *certificate*, a concrete parameter bundle
(comparison functions, decay profiles, convergence-time or continuity
tables, constants) claimed to witness the defining inequality.  Checking is
sampled: a plan expands into a deterministic family of probes (initial
states on radius shells times seeded directions, inputs from a documented
family with constants first), each probe is simulated once, and the
defining inequality is evaluated with its quantifier structure respected:

  pointwise notions   bound must hold at every grid time
                      (IOS, ISS, IOpS, OCAG, OL family, OUGS family, IOSS,
                      output-map bounds, reachability bounds)
  convergence notions bound must hold at every grid time at or beyond the
                      certificate's tabulated time (OUAG, OGUAG)
  visit notions       bound must hold at SOME grid time at or before the
                      tabulated time (OLIM, OULIM, OGULIM, OOULIM)
  continuity tables   outputs from the tabulated ball must stay below the
                      row's level over the row's horizon (OCEP, table OULS)

Verdicts are three-valued.  "certified" never asserts the mathematical
truth of a universally quantified statement; it records that no sampled
violation beat the margin, together with the sample count and the worst
slack.  "falsified" always carries a replayable witness.  Anything else is
"inconclusive" with a reason.

Input-global notions (OGUAG, OGULIM) are only exercised up to the plan's
largest input norm; their verdicts carry an explicit "up to s_max" note,
because the distinction from their input-ball-uniform counterparts lives at
unbounded input norms.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

import numpy as np

from . import comparison as cf
from .comparison import KLFn, ScalarFn
from .errors import (
    CertificateError,
    DomainError,
    EstimationError,
    TableGapError,
)
from .signals import InputSignal
from .systems import SimPlan, SystemModel, Trajectory, simulate

__all__ = [
    "PropertyId",
    "Certificate",
    "SamplingPlan",
    "Verdict",
    "Witness",
    "ConvergenceTimeTable",
    "DeltaTable",
    "ReachabilityBound",
    "ProbeSet",
    "verify",
    "falsify",
    "estimate_gain",
    "estimate_tau",
    "first_crossing_time",
    "build_reachability_bound",
    "plan_hash",
]


class PropertyId(str, Enum):
    FC = "FC"
    OCEP = "OCEP"
    BORS = "BORS"
    OBORS = "OBORS"
    H_BOUNDED = "H_BOUNDED"
    H_K_BOUNDED = "H_K_BOUNDED"
    IOS = "IOS"
    ISS = "ISS"
    IOPS = "IOPS"
    OL = "OL"
    LOCAL_OL = "LOCAL_OL"
    OULS = "OULS"
    OUGS = "OUGS"
    OUGB = "OUGB"
    OOUGB = "OOUGB"
    OAG = "OAG"
    OUAG = "OUAG"
    OGUAG = "OGUAG"
    OCAG = "OCAG"
    OLIM = "OLIM"
    OULIM = "OULIM"
    OGULIM = "OGULIM"
    OOULIM = "OOULIM"
    IOSS = "IOSS"


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

def _snap_up(grid, x, name: str) -> int:
    """Index of the smallest grid point at or above x; the tabulated claim
    at that point covers the whole ball below it."""
    grid = np.asarray(grid)
    idx = int(np.searchsorted(grid, x - 1e-12, side="left"))
    if idx >= len(grid):
        raise TableGapError(f"{name} query {x:g} beyond table axis end {grid[-1]:g}")
    return idx


def _snap_down(grid, x, name: str) -> int:
    """Index of the largest grid point at or below x; used for level axes
    where the claim at a tighter level implies the queried one."""
    grid = np.asarray(grid)
    idx = int(np.searchsorted(grid, x + 1e-12, side="right")) - 1
    if idx < 0:
        raise TableGapError(f"{name} query {x:g} below table axis start {grid[0]:g}")
    return idx


def _cell_value(values, idx) -> float:
    v = float(values[idx])
    if not np.isfinite(v):
        raise TableGapError(f"table cell {idx} is unavailable (inconclusive fit)")
    return v


@dataclass(frozen=True)
class ConvergenceTimeTable:
    """Tabulated convergence/visit times over (eps, r[, s]) grids.

    Raw empirical tables are rectified before use: nonincreasing in eps,
    nondecreasing in r and s.  Lookups honour the ball quantifiers of the
    definitions: the radius axes snap up to the next tabulated shell (whose
    entry covers the whole ball below it) and the level axis snaps down to
    the next tighter tabulated level.  Queries beyond the grids raise
    ``TableGapError`` because the constructions built from these tables are
    only valid inside the certified region.  ``mode`` tags whether the time
    bounds hold for all later times ("uag") or promise a visit no later than
    the entry ("lim").
    """

    eps_grid: tuple
    r_grid: tuple
    s_grid: Optional[tuple]
    values: np.ndarray
    mode: str = "uag"

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        expected = (len(self.eps_grid), len(self.r_grid)) + (
            (len(self.s_grid),) if self.s_grid is not None else ()
        )
        if vals.shape != expected:
            raise DomainError(f"table shape {vals.shape} does not match grids {expected}")
        # rectify: worst-case (max) over all looser cells
        vals = np.maximum.accumulate(vals[::-1], axis=0)[::-1]  # nonincreasing in eps
        vals = np.maximum.accumulate(vals, axis=1)  # nondecreasing in r
        if self.s_grid is not None:
            vals = np.maximum.accumulate(vals, axis=2)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "eps_grid", tuple(float(x) for x in self.eps_grid))
        object.__setattr__(self, "r_grid", tuple(float(x) for x in self.r_grid))
        if self.s_grid is not None:
            object.__setattr__(self, "s_grid", tuple(float(x) for x in self.s_grid))
        if self.mode not in ("uag", "lim"):
            raise DomainError("table mode must be 'uag' or 'lim'")

    def __eq__(self, other):
        return (
            isinstance(other, ConvergenceTimeTable)
            and self.eps_grid == other.eps_grid
            and self.r_grid == other.r_grid
            and self.s_grid == other.s_grid
            and self.mode == other.mode
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.eps_grid, self.r_grid, self.s_grid, self.mode,
                     self.values.tobytes()))

    def eval(self, eps: float, r: float, s: float | None = None) -> float:
        idx = (_snap_down(self.eps_grid, eps, "eps"), _snap_up(self.r_grid, r, "r"))
        if self.s_grid is not None:
            if s is None:
                raise DomainError("this table is indexed by (eps, r, s)")
            idx = idx + (_snap_up(self.s_grid, s, "s"),)
        return _cell_value(self.values, idx)

    def max_time(self) -> float:
        finite = self.values[np.isfinite(self.values)]
        return float(finite.max()) if finite.size else math.inf

    def has_gaps(self) -> bool:
        return bool(np.any(~np.isfinite(self.values)))

    def to_dict(self) -> dict:
        return {
            "eps_grid": list(self.eps_grid),
            "r_grid": list(self.r_grid),
            "s_grid": list(self.s_grid) if self.s_grid is not None else None,
            "values": self.values.tolist(),
            "mode": self.mode,
        }

    @staticmethod
    def from_dict(d: dict) -> "ConvergenceTimeTable":
        return ConvergenceTimeTable(
            tuple(d["eps_grid"]),
            tuple(d["r_grid"]),
            tuple(d["s_grid"]) if d["s_grid"] is not None else None,
            np.array(d["values"]),
            d.get("mode", "uag"),
        )


@dataclass(frozen=True)
class DeltaTable:
    """Continuity table: delta levels per (eps[, tau]) row.

    Rectified so that delta is nondecreasing in eps and nonincreasing in
    tau.  Used for the continuity-at-equilibrium property (with a tau axis)
    and for the table flavour of uniform local stability (without one).
    """

    eps_grid: tuple
    tau_grid: Optional[tuple]
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        expected = (len(self.eps_grid),) + ((len(self.tau_grid),) if self.tau_grid is not None else ())
        if vals.shape != expected:
            raise DomainError(f"delta table shape {vals.shape} does not match grids {expected}")
        vals = np.minimum.accumulate(vals[::-1], axis=0)[::-1]  # nondecreasing in eps
        if self.tau_grid is not None:
            vals = np.minimum.accumulate(vals, axis=1)  # nonincreasing in tau
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "eps_grid", tuple(float(x) for x in self.eps_grid))
        if self.tau_grid is not None:
            object.__setattr__(self, "tau_grid", tuple(float(x) for x in self.tau_grid))

    def __eq__(self, other):
        return (
            isinstance(other, DeltaTable)
            and self.eps_grid == other.eps_grid
            and self.tau_grid == other.tau_grid
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.eps_grid, self.tau_grid, self.values.tobytes()))

    def rows(self):
        if self.tau_grid is None:
            for i, eps in enumerate(self.eps_grid):
                yield eps, None, float(self.values[i])
        else:
            for i, eps in enumerate(self.eps_grid):
                for j, tau in enumerate(self.tau_grid):
                    yield eps, tau, float(self.values[i, j])

    def eval(self, eps: float, tau: float | None = None) -> float:
        idx = (_snap_down(self.eps_grid, eps, "eps"),)
        if self.tau_grid is not None:
            if tau is None:
                raise DomainError("this table is indexed by (eps, tau)")
            idx = idx + (_snap_up(self.tau_grid, tau, "tau"),)
        return _cell_value(self.values, idx)

    def to_dict(self) -> dict:
        return {
            "eps_grid": list(self.eps_grid),
            "tau_grid": list(self.tau_grid) if self.tau_grid is not None else None,
            "values": self.values.tolist(),
        }

    @staticmethod
    def from_dict(d: dict) -> "DeltaTable":
        return DeltaTable(
            tuple(d["eps_grid"]),
            tuple(d["tau_grid"]) if d["tau_grid"] is not None else None,
            np.array(d["values"]),
        )


@dataclass(frozen=True)
class ReachabilityBound:
    """Empirical sup-output table over (r, s, t), rectified monotone.

    ``over_initial_output`` switches the first axis from initial-state norm
    shells to initial-output norm shells.  Unbounded cells (blow-ups) are
    +inf and poison any interpolation touching them.
    """

    r_grid: tuple
    s_grid: tuple
    t_grid: tuple
    values: np.ndarray
    over_initial_output: bool = False

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        expected = (len(self.r_grid), len(self.s_grid), len(self.t_grid))
        if vals.shape != expected:
            raise DomainError(f"bound table shape {vals.shape} does not match grids {expected}")
        for axis in range(3):
            vals = np.maximum.accumulate(vals, axis=axis)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "r_grid", tuple(float(x) for x in self.r_grid))
        object.__setattr__(self, "s_grid", tuple(float(x) for x in self.s_grid))
        object.__setattr__(self, "t_grid", tuple(float(x) for x in self.t_grid))

    def __eq__(self, other):
        return (
            isinstance(other, ReachabilityBound)
            and self.r_grid == other.r_grid
            and self.s_grid == other.s_grid
            and self.t_grid == other.t_grid
            and self.over_initial_output == other.over_initial_output
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.r_grid, self.s_grid, self.t_grid,
                     self.over_initial_output, self.values.tobytes()))

    def eval(self, r: float, s: float, t: float) -> float:
        try:
            idx = (
                _snap_up(self.r_grid, r, "r"),
                _snap_up(self.s_grid, s, "s"),
                _snap_up(self.t_grid, t, "t"),
            )
            return _cell_value(self.values, idx)
        except TableGapError as exc:
            raise TableGapError(f"bound table cell ({r:g}, {s:g}, {t:g}): {exc}") from None

    def diagonal_slice(self):
        """(r, mu(r, r, t_max)) pairs used by the two-argument decomposition."""
        out = []
        for r in self.r_grid:
            s = min(r, self.s_grid[-1])
            out.append((r, self.eval(r, s, self.t_grid[-1])))
        return out

    def growth_diagnostic(self) -> dict:
        """Does sup |y| appear to diverge in r at the final horizon?"""
        last = self.values[:, -1, -1]
        finite = np.isfinite(last)
        diverges = bool(np.any(~finite))
        ratio = None
        if np.all(finite) and last[0] > 0:
            ratio = float(last[-1] / max(last[0], 1e-300))
        return {"diverging_cells": int(np.sum(~finite)), "top_over_bottom": ratio,
                "suspected_unbounded": diverges or (ratio is not None and ratio > 1e3)}

    def to_dict(self) -> dict:
        return {
            "r_grid": list(self.r_grid),
            "s_grid": list(self.s_grid),
            "t_grid": list(self.t_grid),
            "values": self.values.tolist(),
            "over_initial_output": self.over_initial_output,
        }

    @staticmethod
    def from_dict(d: dict) -> "ReachabilityBound":
        return ReachabilityBound(
            tuple(d["r_grid"]), tuple(d["s_grid"]), tuple(d["t_grid"]),
            np.array(d["values"]), d.get("over_initial_output", False),
        )


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

def _is_gain(fn) -> bool:
    return isinstance(fn, ScalarFn) and (fn.fn_class == "Kinf" or fn.is_zero)


def _is_k(fn) -> bool:
    return isinstance(fn, ScalarFn) and fn.fn_class in ("K", "Kinf")


def _is_k_or_zero(fn) -> bool:
    return _is_k(fn) or (isinstance(fn, ScalarFn) and fn.is_zero)


_PARAM_CHECKS = {
    "gain": (_is_gain, "class Kinf (or the zero stand-in)"),
    "k": (_is_k_or_zero, "class K"),
    "kl": (lambda v: isinstance(v, KLFn), "a KL candidate"),
    "const": (lambda v: isinstance(v, (int, float)) and v >= 0, "a nonnegative number"),
    "pos": (lambda v: isinstance(v, (int, float)) and v > 0, "a positive number"),
    "tau_table": (lambda v: isinstance(v, ConvergenceTimeTable), "a convergence-time table"),
    "delta_table": (lambda v: isinstance(v, DeltaTable), "a delta table"),
}

_SCHEMAS: dict[PropertyId, dict] = {
    PropertyId.IOS: {"beta": "kl", "gamma": "gain"},
    PropertyId.ISS: {"beta": "kl", "gamma": "gain"},
    PropertyId.IOPS: {"beta": "kl", "gamma": "gain", "c": "const"},
    PropertyId.OCAG: {"beta": "kl", "gamma": "gain", "c": "const"},
    PropertyId.OL: {"sigma": "gain", "gamma": "gain"},
    PropertyId.LOCAL_OL: {"sigma": "gain", "gamma": "gain", "radius": "pos"},
    PropertyId.OUGS: {"sigma": "gain", "gamma": "gain"},
    PropertyId.OUGB: {"sigma": "gain", "gamma": "gain", "c": "const"},
    PropertyId.OOUGB: {"sigma": "gain", "gamma": "gain", "c": "const"},
    PropertyId.H_BOUNDED: {"sigma1": "k", "gamma1": "k", "c": "const"},
    PropertyId.H_K_BOUNDED: {"sigma1": "k", "gamma1": "k"},
    PropertyId.BORS: {"radius": "pos", "horizon": "pos", "bound": "const"},
    PropertyId.OBORS: {"radius": "pos", "horizon": "pos", "bound": "const"},
    PropertyId.OUAG: {"gamma": "gain", "tau_table": "tau_table"},
    PropertyId.OGUAG: {"gamma": "gain", "tau_table": "tau_table"},
    PropertyId.OLIM: {"gamma": "gain"},
    PropertyId.OAG: {"gamma": "gain"},
    PropertyId.OULIM: {"gamma": "gain", "tau_table": "tau_table"},
    PropertyId.OGULIM: {"gamma": "gain", "tau_table": "tau_table"},
    PropertyId.OOULIM: {"gamma": "gain", "tau_table": "tau_table"},
    PropertyId.IOSS: {"beta": "kl", "gamma1": "k", "gamma2": "k"},
    PropertyId.OCEP: {"delta_table": "delta_table"},
}

_OPTIONAL = {
    PropertyId.OULS: {"sigma": "gain", "gamma": "gain", "radius": "pos",
                      "delta_table": "delta_table"},
    PropertyId.OGUAG: {"s_max": "pos"},
}


def _monotone_cap_solve(g: ScalarFn, cap: float) -> float:
    """Largest r with g(r) <= cap for a monotone map g (bisection)."""
    if float(g(0.0)) > cap:
        return 0.0
    hi = 1.0
    for _ in range(200):
        if float(g(hi)) > cap:
            break
        hi *= 2.0
        if hi > 1e30:
            return math.inf
    lo = 0.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if float(g(mid)) <= cap:
            lo = mid
        else:
            hi = mid
    return lo


def _kl_radius_cap(beta: KLFn) -> float:
    """Largest safely evaluable radius, pushed through inner radius maps."""
    k = beta.kind
    if k == "kl_grid_pw_exp":
        return beta.r_grid[-1]
    if k == "kl_inner":
        inner_cap = _kl_radius_cap(beta.children[0])
        if math.isinf(inner_cap):
            return math.inf
        return _monotone_cap_solve(beta.fns[0], inner_cap)
    if k in ("kl_min", "kl_max", "kl_sum"):
        return min(_kl_radius_cap(c) for c in beta.children)
    if beta.children:
        return _kl_radius_cap(beta.children[0])
    return math.inf


def _kl_check_grids(beta: KLFn):
    """Class-check grids for a KL tree, respecting table-backed radius caps."""
    cap = _kl_radius_cap(beta)
    top = 100.0 if math.isinf(cap) else max(cap * 0.999, 1e-6)
    r_grid = np.concatenate(([0.0], np.geomspace(max(top * 1e-5, 1e-6), top, 24)))
    return r_grid, np.linspace(0.0, 50.0, 24)


@dataclass(frozen=True)
class Certificate:
    """Property tag plus the parameter bundle its definition demands.

    Scalar parameters are validated against the class the definition asks
    for; decay candidates run the sampled KL marginal checks on
    construction.  The zero function is accepted wherever a gain is
    demanded: a zero gain only strengthens the claimed bound.
    """

    property: PropertyId
    params: dict

    def __post_init__(self):
        if self.property == PropertyId.FC:
            raise CertificateError("forward completeness has no bound-form certificate")
        schema = dict(_SCHEMAS.get(self.property, {}))
        optional = _OPTIONAL.get(self.property, {})
        unknown = set(self.params) - set(schema) - set(optional)
        if unknown:
            raise CertificateError(
                f"{self.property.value}: unexpected parameters {sorted(unknown)}"
            )
        if self.property == PropertyId.OULS:
            self._validate_ouls()
        else:
            for name, typ in schema.items():
                if name not in self.params:
                    raise CertificateError(f"{self.property.value}: missing parameter {name!r}")
                self._check(name, typ)
            for name, typ in optional.items():
                if name in self.params:
                    self._check(name, typ)
        for name, value in self.params.items():
            if isinstance(value, KLFn):
                r_grid, t_grid = _kl_check_grids(value)
                problems = cf.check_kl(value, r_grid, t_grid)
                if problems:
                    raise CertificateError(
                        f"{self.property.value}: parameter {name!r} fails KL checks: "
                        + "; ".join(problems)
                    )

    def _validate_ouls(self):
        if "delta_table" in self.params:
            self._check("delta_table", "delta_table")
        else:
            for name, typ in (("sigma", "gain"), ("gamma", "gain"), ("radius", "pos")):
                if name not in self.params:
                    raise CertificateError(f"OULS: missing parameter {name!r}")
                self._check(name, typ)

    def _check(self, name: str, typ: str):
        pred, desc = _PARAM_CHECKS[typ]
        value = self.params[name]
        if not pred(value):
            raise CertificateError(
                f"{self.property.value}: parameter {name!r} must be {desc}"
            )

    def __getitem__(self, name: str):
        return self.params[name]

    def get(self, name: str, default=None):
        return self.params.get(name, default)

    def to_dict(self) -> dict:
        out = {"schema": 1, "property": self.property.value, "params": {}}
        for name, value in self.params.items():
            if isinstance(value, (ScalarFn, KLFn)):
                out["params"][name] = cf.fn_to_dict(value)
            elif isinstance(value, ConvergenceTimeTable):
                out["params"][name] = {"table": "tau", **value.to_dict()}
            elif isinstance(value, DeltaTable):
                out["params"][name] = {"table": "delta", **value.to_dict()}
            elif isinstance(value, ReachabilityBound):
                out["params"][name] = {"table": "mu", **value.to_dict()}
            else:
                out["params"][name] = value
        return out

    @staticmethod
    def from_dict(d: dict) -> "Certificate":
        prop = PropertyId(d["property"])
        params = {}
        for name, value in d["params"].items():
            if isinstance(value, dict) and "table" in value:
                kind = value["table"]
                if kind == "tau":
                    params[name] = ConvergenceTimeTable.from_dict(value)
                elif kind == "delta":
                    params[name] = DeltaTable.from_dict(value)
                else:
                    params[name] = ReachabilityBound.from_dict(value)
            elif isinstance(value, dict) and "kind" in value:
                params[name] = cf.fn_from_dict(value)
            else:
                params[name] = value
        return Certificate(prop, params)


def _gain_at(gamma: ScalarFn, s: float) -> float:
    return 0.0 if gamma.is_zero else float(gamma(s))


# ---------------------------------------------------------------------------
# sampling plans and probes
# ---------------------------------------------------------------------------

def _directions(dim: int, count: int, seed: int) -> list[np.ndarray]:
    """Signed axis directions first, then seeded random unit vectors."""
    dirs: list[np.ndarray] = []
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        dirs.append(e.copy())
        e[i] = -1.0
        dirs.append(e.copy())
    rng = np.random.default_rng(seed)
    while len(dirs) < count:
        v = rng.normal(size=dim)
        n = np.linalg.norm(v)
        if n > 1e-9:
            dirs.append(v / n)
    return dirs[:count]


@dataclass(frozen=True)
class SamplingPlan:
    """Deterministic probe-family description.

    ``radii`` are the initial-state norm shells, ``input_norms`` the input
    sup-norm ladder (the zero input is always probed first), ``eps_grid``
    the levels used by convergence/visit/continuity checks.  A fixed seed
    makes the expansion fully deterministic; checks reduce their probe
    results order-independently (worst margin, ties broken by probe index),
    so concurrent evaluation cannot change a verdict.
    """

    radii: tuple
    input_norms: tuple = ()
    eps_grid: tuple = (0.1, 0.5)
    horizon: float = 15.0
    sim: SimPlan = None
    directions: int = 3
    input_kinds: tuple = ("const", "step", "pw")
    pw_pieces: int = 4
    seed: int = 2024
    delta_margin: float = 1e-4

    def __post_init__(self):
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        object.__setattr__(self, "input_norms",
                           tuple(float(s) for s in self.input_norms if s > 0.0))
        object.__setattr__(self, "eps_grid", tuple(float(e) for e in self.eps_grid))
        if not self.radii:
            raise DomainError("plan needs at least one radius shell")
        if not self.eps_grid:
            raise DomainError("plan needs a nonempty eps grid")
        if self.sim is None:
            object.__setattr__(self, "sim", SimPlan(self.horizon))
        elif abs(self.sim.horizon - self.horizon) > 1e-12:
            object.__setattr__(self, "sim", replace(self.sim, horizon=self.horizon))

    @property
    def s_max(self) -> float:
        return max(self.input_norms) if self.input_norms else 0.0

    def tau_grid(self) -> tuple:
        return (0.5 * self.horizon, self.horizon)

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "radii": list(self.radii),
            "input_norms": list(self.input_norms),
            "eps_grid": list(self.eps_grid),
            "horizon": self.horizon,
            "step": self.sim.step,
            "method": self.sim.method,
            "blow_up_threshold": self.sim.blow_up_threshold,
            "directions": self.directions,
            "input_kinds": list(self.input_kinds),
            "pw_pieces": self.pw_pieces,
            "seed": self.seed,
            "delta_margin": self.delta_margin,
        }


def plan_hash(plan: SamplingPlan) -> str:
    text = json.dumps(plan.to_dict(), sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class Probe:
    index: int
    x0: tuple
    u: InputSignal
    r: float
    s: float
    tag: str
    direction: tuple = ()

    def state(self) -> np.ndarray:
        return np.asarray(self.x0)


@dataclass
class ProbeData:
    probe: Probe
    traj: Trajectory
    ynorm: np.ndarray
    ysup: np.ndarray      # running sup of |y|
    xnorm: np.ndarray     # state norms under the system's norm
    urestr: np.ndarray    # |u restricted to [0, t]| per grid point
    uval_norm: np.ndarray

    @property
    def times(self) -> np.ndarray:
        return self.traj.times

    @property
    def blown(self) -> bool:
        return self.traj.blow_up is not None

    @property
    def y0(self) -> float:
        return float(self.ynorm[0])


def _inputs_at_norm(plan: SamplingPlan, input_dim: int, s: float, seed_extra: int = 0):
    """Input family at exactly sup norm s; constants first by construction."""
    if input_dim == 0 or s == 0.0:
        return [("zero", InputSignal.zero(input_dim))]
    e0 = np.zeros(input_dim)
    e0[0] = 1.0
    out = []
    if "const" in plan.input_kinds:
        out.append((f"const[{s:g}]", InputSignal.constant(s * e0)))
    if "step" in plan.input_kinds:
        out.append(
            (
                f"step[{s:g}]",
                InputSignal.steps(
                    [0.0, 0.5 * plan.horizon], np.stack([s * e0, 0.0 * e0])
                ),
            )
        )
    if "pw" in plan.input_kinds:
        rng = np.random.default_rng((plan.seed, int(s * 1e6), seed_extra))
        k = min(plan.pw_pieces, 8)
        breaks = np.concatenate(([0.0], np.sort(rng.uniform(0, plan.horizon, k - 1))))
        vals = rng.uniform(-1.0, 1.0, size=(k, input_dim))
        peak = np.max(np.linalg.norm(vals, axis=1))
        if peak > 0:
            vals = vals * (s / peak)
        out.append((f"pw[{s:g}]", InputSignal.steps(breaks, vals)))
    return out


class ProbeSet:
    """Deterministic probe expansion plus a per-probe simulation cache."""

    def __init__(self, sys: SystemModel, plan: SamplingPlan):
        self.sys = sys
        self.plan = plan
        self._cache: dict = {}
        self.probes = self._expand()

    def _expand(self) -> list[Probe]:
        sys, plan = self.sys, self.plan
        dirs = _directions(sys.state_dim, plan.directions, plan.seed)
        inputs = [("zero", InputSignal.zero(sys.input_dim))]
        for s in plan.input_norms:
            inputs.extend(_inputs_at_norm(plan, sys.input_dim, s))
        probes = []
        idx = 0
        for r in plan.radii:
            for d in dirs:
                x0 = np.asarray(sys.embed(r, d), dtype=float)
                for tag, u in inputs:
                    probes.append(Probe(idx, tuple(x0), u, r, u.norm(), tag, tuple(d)))
                    idx += 1
        return probes

    def data(self, probe: Probe) -> ProbeData:
        key = (probe.x0, probe.u)
        hit = self._cache.get(key)
        if hit is None:
            hit = self._simulate(probe)
            self._cache[key] = hit
        if hit.probe.index != probe.index:
            hit = replace_probe(hit, probe)
        return hit

    def _simulate(self, probe: Probe) -> ProbeData:
        traj = simulate(self.sys, probe.state(), probe.u, self.plan.sim)
        ynorm = traj.output_norms()
        ysup = np.maximum.accumulate(ynorm)
        xnorm = np.array([self.sys.state_norm(x) for x in traj.states])
        if probe.u.dim:
            piece = np.linalg.norm(probe.u.values, axis=1)
            run = np.maximum.accumulate(piece)
            idx = np.searchsorted(probe.u.breakpoints, traj.times, side="right") - 1
            urestr = run[idx]
            uval = np.linalg.norm(traj.input_values, axis=1)
        else:
            urestr = np.zeros_like(ynorm)
            uval = np.zeros_like(ynorm)
        return ProbeData(probe, traj, ynorm, ysup, xnorm, urestr, uval)

    def all_data(self) -> list[ProbeData]:
        return [self.data(p) for p in self.probes]

    def shell(self, r: float, s: float, extra_seed: int = 0) -> list[ProbeData]:
        """Probes at exactly state-norm r and input-norm s (cached)."""
        dirs = _directions(self.sys.state_dim, self.plan.directions, self.plan.seed + extra_seed)
        inputs = _inputs_at_norm(self.plan, self.sys.input_dim, s, extra_seed)
        out = []
        idx = 0
        for d in dirs:
            x0 = np.asarray(self.sys.embed(r, d), dtype=float)
            for tag, u in inputs:
                probe = Probe(-1000 - idx, tuple(x0), u, r, u.norm(), f"shell:{tag}", tuple(d))
                out.append(self.data(probe))
                idx += 1
        return out

    def initial_output_shell(self, r_y: float, s: float) -> list[ProbeData]:
        """Probes whose initial output norm lies at or below r_y.

        Sampling the level set of the output map is heuristic: a ladder of
        state radii is screened by rejection, keeping candidates whose
        initial output lands inside the target ball (preferring the top of
        the shell).
        """
        dirs = _directions(self.sys.state_dim, max(self.plan.directions, 3), self.plan.seed + 7)
        inputs = _inputs_at_norm(self.plan, self.sys.input_dim, s, 7)
        ladder = [r_y * f for f in (0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0)]
        kept = []
        for radius in ladder:
            for d in dirs:
                x0 = np.asarray(self.sys.embed(radius, d), dtype=float)
                for tag, u in inputs:
                    y0 = np.linalg.norm(np.atleast_1d(self.sys.output(x0, u(0.0))))
                    if y0 <= r_y + 1e-12:
                        kept.append((float(y0), radius, x0, u, tag, tuple(d)))
        kept.sort(key=lambda item: (-item[0], item[1], tuple(item[2])))
        out = []
        for i, (y0, radius, x0, u, tag, d) in enumerate(kept[: 3 * max(self.plan.directions, 3)]):
            probe = Probe(-2000 - i, tuple(x0), u, float(self.sys.state_norm(x0)), u.norm(),
                          f"yshell:{tag}", d)
            out.append(self.data(probe))
        return out


def replace_probe(data: ProbeData, probe: Probe) -> ProbeData:
    return ProbeData(probe, data.traj, data.ynorm, data.ysup, data.xnorm,
                     data.urestr, data.uval_norm)


# ---------------------------------------------------------------------------
# verdicts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Witness:
    """Replayable violation: initial state, input, time, observed vs bound."""

    x0: tuple
    u: dict
    t: float
    observed: float
    bound: float
    margin: float
    probe_index: int = -1

    def signal(self) -> InputSignal:
        return InputSignal.from_dict(self.u)

    def replay(self, sys: SystemModel, sim: SimPlan, state_norm: bool = False) -> float:
        """Re-simulate and return the observed output (or state) norm at t."""
        traj = simulate(sys, np.asarray(self.x0), self.signal(), sim)
        k = traj.at_time(self.t)
        if state_norm:
            return float(sys.state_norm(traj.states[k]))
        return float(np.linalg.norm(traj.outputs[k]))

    def to_dict(self) -> dict:
        return {
            "x0": list(self.x0),
            "u": self.u,
            "t": self.t,
            "observed": self.observed,
            "bound": self.bound,
            "margin": self.margin,
            "probe_index": self.probe_index,
        }


@dataclass(frozen=True)
class Verdict:
    status: str  # "certified" | "falsified" | "inconclusive"
    property: PropertyId
    samples: int
    min_slack: Optional[float]
    witness: Optional[Witness]
    reason: Optional[str]
    plan_hash: str
    notes: tuple = ()

    @property
    def certified(self) -> bool:
        return self.status == "certified"

    @property
    def falsified(self) -> bool:
        return self.status == "falsified"

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "property": self.property.value,
            "status": self.status,
            "samples": self.samples,
            "slack": self.min_slack,
            "witness": self.witness.to_dict() if self.witness else None,
            "reason": self.reason,
            "plan_hash": self.plan_hash,
            "notes": list(self.notes),
        }


class _Outcome:
    """Order-independent reduction of per-sample slacks."""

    def __init__(self):
        self.min_slack = math.inf
        self.worst = None  # (probe, t, observed, bound)
        self.samples = 0
        self.notes: list[str] = []
        self.blown: list[int] = []

    def add(self, probe: Probe, t: float, observed: float, bound: float):
        self.samples += 1
        slack = bound - observed
        if slack < self.min_slack or (
            slack == self.min_slack
            and self.worst is not None
            and probe.index < self.worst[0].index
        ):
            self.min_slack = slack
            self.worst = (probe, float(t), float(observed), float(bound))

    def add_blown(self, probe: Probe):
        self.blown.append(probe.index)

    def verdict(self, prop: PropertyId, plan: SamplingPlan, phash: str) -> Verdict:
        notes = tuple(self.notes)
        if self.blown:
            notes = notes + (
                f"{len(self.blown)} probe(s) blew up: forward-completeness failure at those samples",
            )
        if self.samples == 0:
            return Verdict("inconclusive", prop, 0, None, None,
                           "no samples satisfied the property's ball constraints",
                           phash, notes)
        if self.min_slack >= -plan.delta_margin:
            return Verdict("certified", prop, self.samples, float(self.min_slack),
                           None, None, phash, notes)
        probe, t, observed, bound = self.worst
        witness = Witness(
            x0=probe.x0,
            u=probe.u.to_dict(),
            t=t,
            observed=observed,
            bound=bound,
            margin=observed - bound,
            probe_index=probe.index,
        )
        return Verdict("falsified", prop, self.samples, float(self.min_slack),
                       witness, None, phash, notes)


# ---------------------------------------------------------------------------
# per-property checkers
# ---------------------------------------------------------------------------

def _pointwise_bound(cert: Certificate, data: ProbeData) -> np.ndarray | None:
    """Bound curve over the probe's time grid for pointwise properties."""
    p = cert.property
    t = data.times
    s = data.probe.s
    if p in (PropertyId.IOS, PropertyId.ISS):
        return cert["beta"](data.probe.r, t) + _gain_at(cert["gamma"], s)
    if p == PropertyId.IOPS:
        return cert["beta"](data.probe.r, t) + _gain_at(cert["gamma"], s) + cert["c"]
    if p == PropertyId.OCAG:
        return cert["beta"](data.probe.r + cert["c"], t) + _gain_at(cert["gamma"], s)
    if p in (PropertyId.OL, PropertyId.LOCAL_OL):
        const = _gain_at(cert["sigma"], data.y0) + _gain_at(cert["gamma"], s)
        return np.full_like(t, const)
    if p in (PropertyId.OUGS, PropertyId.OULS):
        const = _gain_at(cert["sigma"], data.probe.r) + _gain_at(cert["gamma"], s)
        return np.full_like(t, const)
    if p == PropertyId.OUGB:
        const = _gain_at(cert["sigma"], data.probe.r) + _gain_at(cert["gamma"], s) + cert["c"]
        return np.full_like(t, const)
    if p == PropertyId.OOUGB:
        const = _gain_at(cert["sigma"], data.y0) + _gain_at(cert["gamma"], s) + cert["c"]
        return np.full_like(t, const)
    if p == PropertyId.IOSS:
        g1 = cert["gamma1"]
        g2 = cert["gamma2"]
        return (
            cert["beta"](data.probe.r, t)
            + (0.0 if g1.is_zero else g1(data.urestr))
            + (0.0 if g2.is_zero else g2(data.ysup))
        )
    if p in (PropertyId.H_BOUNDED, PropertyId.H_K_BOUNDED):
        c = cert.get("c", 0.0)
        s1, g1 = cert["sigma1"], cert["gamma1"]
        return (
            (0.0 if s1.is_zero else s1(data.xnorm))
            + (0.0 if g1.is_zero else g1(data.uval_norm))
            + c
        )
    return None


def _observed_series(cert: Certificate, data: ProbeData) -> np.ndarray:
    if cert.property in (PropertyId.ISS, PropertyId.IOSS):
        return data.xnorm
    return data.ynorm


def _probe_filter(cert: Certificate, data: ProbeData) -> bool:
    p = cert.property
    if p in (PropertyId.LOCAL_OL, PropertyId.OULS):
        radius = cert.get("radius")
        if radius is None:  # table form handled elsewhere
            return True
        return data.probe.r <= radius + 1e-12 and data.probe.s <= radius + 1e-12
    if p in (PropertyId.BORS,):
        return data.probe.r <= cert["radius"] + 1e-12 and data.probe.s <= cert["radius"] + 1e-12
    if p == PropertyId.OBORS:
        return data.y0 <= cert["radius"] + 1e-12 and data.probe.s <= cert["radius"] + 1e-12
    if p == PropertyId.OGUAG and "s_max" in cert.params:
        return data.probe.s <= cert["s_max"] + 1e-12
    return True


def _check_pointwise(cert: Certificate, datas, out: _Outcome):
    for data in datas:
        if not _probe_filter(cert, data):
            continue
        if data.blown:
            out.add_blown(data.probe)
            continue
        bound = _pointwise_bound(cert, data)
        observed = _observed_series(cert, data)
        k = int(np.argmin(bound - observed))
        out.add(data.probe, data.times[k], observed[k], bound[k])


def _check_sup_bound(cert: Certificate, datas, out: _Outcome):
    """Reachability bounds: sup over t < horizon of |y| against a constant."""
    horizon = cert["horizon"]
    bound = cert["bound"]
    for data in datas:
        if not _probe_filter(cert, data):
            continue
        if data.blown and data.traj.blow_up <= horizon:
            # unbounded excursion inside the window: worst possible sample
            out.add(data.probe, data.traj.blow_up, math.inf, bound)
            continue
        mask = data.times <= horizon + 1e-12
        if not np.any(mask):
            continue
        k = int(np.argmax(np.where(mask, data.ynorm, -math.inf)))
        out.add(data.probe, data.times[k], data.ynorm[k], bound)


def _check_uag(cert: Certificate, datas, plan: SamplingPlan, out: _Outcome):
    table: ConvergenceTimeTable = cert["tau_table"]
    gamma = cert["gamma"]
    global_form = cert.property == PropertyId.OGUAG
    for data in datas:
        if not _probe_filter(cert, data):
            continue
        if data.blown:
            out.add_blown(data.probe)
            continue
        for eps in table.eps_grid:
            try:
                tau = (
                    table.eval(eps, data.probe.r)
                    if global_form
                    else table.eval(eps, data.probe.r, data.probe.s)
                )
            except TableGapError:
                continue
            if tau > plan.horizon + 1e-12:
                out.notes.append(
                    f"tau({eps:g}, {data.probe.r:g}) exceeds the horizon; cell skipped"
                )
                continue
            mask = data.times >= tau - 1e-12
            if not np.any(mask):
                continue
            bound = eps + _gain_at(gamma, data.probe.s)
            k_rel = int(np.argmax(np.where(mask, data.ynorm, -math.inf)))
            out.add(data.probe, data.times[k_rel], data.ynorm[k_rel], bound)


def _check_lim(cert: Certificate, datas, plan: SamplingPlan, out: _Outcome,
               horizon_proxy: bool = False):
    gamma = cert["gamma"]
    table: ConvergenceTimeTable | None = cert.get("tau_table")
    for data in datas:
        if not _probe_filter(cert, data):
            continue
        if data.blown:
            out.add_blown(data.probe)
            continue
        eps_levels = table.eps_grid if table is not None else plan.eps_grid
        for eps in eps_levels:
            if table is not None:
                key_r = data.y0 if cert.property == PropertyId.OOULIM else data.probe.r
                try:
                    if table.s_grid is not None:
                        tau = table.eval(eps, key_r, data.probe.s)
                    else:
                        tau = table.eval(eps, key_r)
                except TableGapError:
                    continue
            else:
                tau = plan.horizon
            mask = data.times <= tau + 1e-12
            if not np.any(mask):
                continue
            bound = eps + _gain_at(gamma, data.probe.s)
            # existence check: best time must dip below the bound
            k_best = int(np.argmin(np.where(mask, data.ynorm, math.inf)))
            out.add(data.probe, data.times[k_best], data.ynorm[k_best], bound)
    if horizon_proxy:
        out.notes.append(
            "visit times capped by the plan horizon: per-trajectory quantifier "
            "is checked as a finite-horizon proxy"
        )


def _check_delta_rows(sys: SystemModel, cert: Certificate, probe_set: ProbeSet,
                      out: _Outcome, full_horizon_default: float):
    """Continuity rows: probes from the delta-ball must stay below eps."""
    table: DeltaTable = cert["delta_table"]
    for eps, tau, delta in table.rows():
        horizon = tau if tau is not None else full_horizon_default
        if delta <= 0.0:
            out.notes.append(f"empty delta at eps={eps:g}; row skipped")
            continue
        for frac in (1.0, 0.5):
            for data in probe_set.shell(delta * frac, min(delta * frac, probe_set.plan.s_max)
                                        if probe_set.sys.input_dim else 0.0):
                if data.blown:
                    out.add_blown(data.probe)
                    continue
                mask = data.times <= horizon + 1e-12
                k = int(np.argmax(np.where(mask, data.ynorm, -math.inf)))
                out.add(data.probe, data.times[k], data.ynorm[k], eps)


# ---------------------------------------------------------------------------
# public checking API
# ---------------------------------------------------------------------------

_POINTWISE = {
    PropertyId.IOS, PropertyId.ISS, PropertyId.IOPS, PropertyId.OCAG,
    PropertyId.OL, PropertyId.LOCAL_OL, PropertyId.OUGS, PropertyId.OULS,
    PropertyId.OUGB, PropertyId.OOUGB, PropertyId.IOSS,
    PropertyId.H_BOUNDED, PropertyId.H_K_BOUNDED,
}

_LIM_FAMILY = {PropertyId.OLIM, PropertyId.OAG, PropertyId.OULIM,
               PropertyId.OGULIM, PropertyId.OOULIM}


def verify(sys: SystemModel, cert: Certificate, plan: SamplingPlan,
           probe_set: ProbeSet | None = None) -> Verdict:
    """Check the certificate's defining inequality over the plan's probes."""
    if cert.property == PropertyId.FC:
        raise CertificateError("forward completeness is not a bound-form property")
    phash = plan_hash(plan)
    ps = probe_set if probe_set is not None else ProbeSet(sys, plan)
    out = _Outcome()
    prop = cert.property

    if prop == PropertyId.OULS and "delta_table" in cert.params:
        _check_delta_rows(sys, cert, ps, out, plan.horizon)
    elif prop == PropertyId.OCEP:
        _check_delta_rows(sys, cert, ps, out, plan.horizon)
    elif prop in _POINTWISE:
        _check_pointwise(cert, ps.all_data(), out)
    elif prop in (PropertyId.BORS, PropertyId.OBORS):
        _check_sup_bound(cert, ps.all_data(), out)
    elif prop in (PropertyId.OUAG, PropertyId.OGUAG):
        _check_uag(cert, ps.all_data(), plan, out)
        if prop == PropertyId.OGUAG:
            out.notes.append(f"input-global claim certified up to s_max = "
                             f"{cert.get('s_max', plan.s_max):g}")
    elif prop in _LIM_FAMILY:
        datas = ps.all_data()
        if prop == PropertyId.OOULIM:
            table: ConvergenceTimeTable = cert["tau_table"]
            datas = []
            for r_y in table.r_grid:
                for s in (0.0,) + tuple(plan.input_norms):
                    datas.extend(ps.initial_output_shell(r_y, s))
        _check_lim(cert, datas, plan, out,
                   horizon_proxy=prop in (PropertyId.OLIM, PropertyId.OAG))
        if prop == PropertyId.OGULIM:
            out.notes.append(f"input-global claim certified up to s_max = {plan.s_max:g}")
    else:
        raise CertificateError(f"no checker for property {prop.value}")
    return out.verdict(prop, plan, phash)


def falsify(sys: SystemModel, cert: Certificate, budget: int,
            plan: SamplingPlan) -> Verdict:
    """Search for a maximal-margin witness within a simulation budget.

    The plan's probes are swept first (constants before richer inputs);
    afterwards the worst probe is refined by local grid search over the
    initial-state radius, the direction on its shell and the input
    amplitude, with the violation time taken as the worst grid time of each
    refined trajectory.  The search is deterministic for a fixed plan seed.
    """
    phash = plan_hash(plan)
    ps = ProbeSet(sys, plan)
    spent = 0
    best = None  # (margin, probe, t, observed, bound)
    for probe in ps.probes:
        if spent >= budget:
            break
        data = ps.data(probe)
        spent += 1
        margin, t, observed, bound = _probe_margin_from_data(cert, plan, data)
        if margin == -math.inf:
            continue
        if best is None or margin > best[0]:
            best = (margin, probe, t, observed, bound)
    if best is None:
        return Verdict("inconclusive", cert.property, spent, None, None,
                       "no admissible probes for this certificate", phash)

    # multi-start local refinement: one hill-climb per elite coarse probe,
    # so a degenerate near-zero basin cannot shadow a genuine violation
    ranked = []
    for probe in ps.probes:
        data = ps.data(probe)
        m, t, observed, bound = _probe_margin_from_data(cert, plan, data)
        if m > -math.inf:
            ranked.append((m, probe, t, observed, bound))
    ranked.sort(key=lambda item: (-item[0], item[1].index))
    starts = []
    seen_radii = set()
    for item in ranked:
        key = round(item[1].r, 9)
        if key not in seen_radii:
            starts.append(item)
            seen_radii.add(key)
        if len(starts) >= 3:
            break

    best = ranked[0]
    for start in starts:
        if spent >= budget:
            break
        refined, spent = _refine_from(sys, cert, plan, ps, start, spent, budget)
        if refined[0] > best[0]:
            best = refined
    margin, probe, t, observed, bound = best

    if margin > plan.delta_margin:
        witness = Witness(
            x0=probe.x0, u=probe.u.to_dict(), t=t, observed=observed,
            bound=bound, margin=margin, probe_index=probe.index,
        )
        return Verdict("falsified", cert.property, spent, float(-margin),
                       witness, None, phash)
    return Verdict(
        "inconclusive", cert.property, spent, float(-margin), None,
        f"budget exhausted, max slack = {-margin:.6g}", phash,
    )


def _refine_from(sys, cert, plan, ps, start, spent, budget):
    margin, probe, t, observed, bound = start
    span_r = _initial_span(plan.radii, probe.r)
    dir_best = np.asarray(probe.direction) if probe.direction else np.ones(sys.state_dim)
    if np.linalg.norm(dir_best) > 0:
        dir_best = dir_best / np.linalg.norm(dir_best)
    amp = 1.0
    stale = 0
    for _ in range(18):
        if spent >= budget or span_r <= 1e-9 or stale >= 4:
            break
        improved = False
        candidates = []
        for fr in (-1.0, -0.5, 0.5, 1.0):
            r_new = probe.r + fr * span_r
            if r_new > 1e-9:
                candidates.append((r_new, dir_best, amp))
        for d_new in _direction_neighbours(dir_best, span_angle=span_r / max(probe.r, 1e-9)):
            candidates.append((probe.r, d_new, amp))
        if probe.u.norm() > 0:
            for fa in (0.8, 1.25):
                candidates.append((probe.r, dir_best, amp * fa))
        for r_new, d_new, amp_new in candidates:
            if spent >= budget:
                break
            x0 = np.asarray(sys.embed(r_new, d_new), dtype=float)
            u = _scaled_input(probe.u, amp_new)
            cand = Probe(probe.index, tuple(x0), u, r_new, u.norm(),
                         probe.tag + "+", tuple(d_new))
            data = ps.data(cand)
            spent += 1
            m, t_new, obs, bnd = _probe_margin_from_data(cert, plan, data)
            if m > margin:
                margin, probe, t, observed, bound = m, cand, t_new, obs, bnd
                dir_best, amp = d_new, amp_new
                improved = True
        span_r *= 0.5
        stale = 0 if improved else stale + 1
    return (margin, probe, t, observed, bound), spent


def _probe_margin_from_data(cert, plan, data) -> tuple[float, float, float, float]:
    out = _Outcome()
    prop = cert.property
    if prop in _POINTWISE:
        _check_pointwise(cert, [data], out)
    elif prop in (PropertyId.BORS, PropertyId.OBORS):
        _check_sup_bound(cert, [data], out)
    elif prop in (PropertyId.OUAG, PropertyId.OGUAG):
        _check_uag(cert, [data], plan, out)
    elif prop in _LIM_FAMILY:
        _check_lim(cert, [data], plan, out)
    else:
        raise CertificateError(f"falsification unsupported for {prop.value}")
    if out.worst is None:
        return -math.inf, 0.0, 0.0, 0.0
    _, t, observed, bound = out.worst
    return observed - bound, t, observed, bound


def _initial_span(radii, r):
    if len(radii) < 2:
        return max(r, 1.0)
    gaps = [abs(b - a) for a, b in zip(radii, radii[1:])]
    return max(max(gaps) * 0.5, 1e-6)


def _direction_neighbours(d: np.ndarray, span_angle: float):
    span = min(max(span_angle, 1e-3), 0.5)
    out = []
    for axis in range(min(len(d), 3)):
        for sign in (1.0, -1.0):
            v = d.copy()
            v[axis] += sign * span
            n = np.linalg.norm(v)
            if n > 1e-9:
                out.append(v / n)
    return out


def _scaled_input(u: InputSignal, factor: float) -> InputSignal:
    if factor == 1.0 or u.dim == 0:
        return u
    return InputSignal(u.breakpoints, u.values * factor)


# ---------------------------------------------------------------------------
# estimation
# ---------------------------------------------------------------------------

def estimate_tau(sys: SystemModel, eps: float, r: float, s: float, mode: str,
                 plan: SamplingPlan, gamma_ref: ScalarFn,
                 probe_set: ProbeSet | None = None):
    """Empirical convergence ("uag") or visit ("lim") time for one cell.

    Returns (tau, None) on success or (None, offending ProbeData) when some
    trajectory never satisfies the bound within the horizon.
    """
    ps = probe_set if probe_set is not None else ProbeSet(sys, plan)
    worst = 0.0
    for data in ps.shell(r, s):
        if data.blown:
            return None, data
        bound = eps + _gain_at(gamma_ref, data.probe.s)
        ok = data.ynorm <= bound + 1e-12
        if mode == "uag":
            if not ok[-1]:
                return None, data
            bad = np.nonzero(~ok)[0]
            tau_probe = 0.0 if bad.size == 0 else float(data.times[bad[-1] + 1])
        elif mode == "lim":
            hits = np.nonzero(ok)[0]
            if hits.size == 0:
                return None, data
            tau_probe = float(data.times[hits[0]])
        else:
            raise DomainError("mode must be 'uag' or 'lim'")
        worst = max(worst, tau_probe)
    return worst, None


def build_tau_table(sys: SystemModel, plan: SamplingPlan, mode: str,
                    gamma_ref: ScalarFn, eps_grid=None, r_grid=None, s_grid=None,
                    probe_set: ProbeSet | None = None,
                    over_initial_output: bool = False) -> ConvergenceTimeTable:
    """Tabulate empirical times over plan grids; unreachable cells become inf."""
    ps = probe_set if probe_set is not None else ProbeSet(sys, plan)
    eps_grid = tuple(eps_grid if eps_grid is not None else plan.eps_grid)
    r_grid = tuple(r_grid if r_grid is not None else plan.radii)
    if s_grid is None:
        s_levels = (0.0,) + tuple(plan.input_norms)
        collapse_s = True
    else:
        s_levels = tuple(s_grid)
        collapse_s = False

    def cell(eps, r, s):
        if over_initial_output:
            datas = ps.initial_output_shell(r, s)
            worst = 0.0
            for data in datas:
                if data.blown:
                    return math.inf
                bound = eps + _gain_at(gamma_ref, data.probe.s)
                ok = data.ynorm <= bound + 1e-12
                if mode == "lim":
                    hits = np.nonzero(ok)[0]
                    if hits.size == 0:
                        return math.inf
                    worst = max(worst, float(data.times[hits[0]]))
                else:
                    if not ok[-1]:
                        return math.inf
                    bad = np.nonzero(~ok)[0]
                    worst = max(worst, 0.0 if bad.size == 0 else float(data.times[bad[-1] + 1]))
            return worst
        tau, _ = estimate_tau(sys, eps, r, s, mode, plan, gamma_ref, ps)
        return math.inf if tau is None else tau

    if collapse_s:
        vals = np.array(
            [[max(cell(e, r, s) for s in s_levels) for r in r_grid] for e in eps_grid]
        )
        return ConvergenceTimeTable(eps_grid, r_grid, None, vals, mode=mode)
    vals = np.array(
        [[[cell(e, r, s) for s in s_levels] for r in r_grid] for e in eps_grid]
    )
    return ConvergenceTimeTable(eps_grid, r_grid, s_levels, vals, mode=mode)


def _fit_decay_rate(series_list, horizon: float, floor: float = 5e-3) -> float:
    """Shared exponential rate read off the late-time window of each probe.

    A probe that has already converged below numerical noise does not
    constrain the rate; a probe whose tail fails to shrink forces the rate
    to zero, which is reported as an estimation failure (no separable decay
    envelope exists on such data).
    """
    rates = []
    for times, y in series_list:
        k1 = int(np.argmin(np.abs(times - 0.7 * horizon)))
        k2 = len(times) - 1
        y1, y2 = float(y[k1]), float(y[k2])
        span = float(times[k2] - times[k1])
        if span <= 0:
            continue
        if y1 <= 1e-12:
            continue  # fully decayed, unconstraining
        if y2 <= 1e-12:
            continue  # decayed to zero inside the window
        if y2 >= y1:
            rates.append(0.0)
        else:
            rates.append(math.log(y1 / y2) / span)
    if not rates:
        return 1.0
    a = 0.9 * min(rates)
    if a <= floor:
        raise EstimationError(
            "output profiles do not decay within the horizon: no separable "
            "decay envelope exists on this data"
        )
    return a


def _fit_separable_kl(datas, series, plan: SamplingPlan):
    """Radial envelope of max_t series(t) * exp(a t) times a decaying profile.

    With the rate fixed from the tails, the radial part absorbs delayed
    excursions exactly: series(t) <= sigma(r) * exp(-a t) holds at every
    sample by construction of the envelope.
    """
    a = _fit_decay_rate([(d.times, series(d)) for d in datas], plan.horizon)
    samples = [(0.0, 0.0)]
    for d in datas:
        boosted = series(d) * np.exp(a * d.times)
        samples.append((d.probe.r, float(np.max(boosted))))
    sigma = cf.fit_monotone_envelope(samples, force_zero_at_zero=True)
    temporal = cf.compose(cf.exp_decay(), cf.scale(a))
    return cf.kl_separable(sigma, temporal), sigma, a


def _residual_gain(datas, bound_fn, force_abscissa="s"):
    """Envelope of positive residuals against the input norm."""
    samples = {0.0: 0.0}
    for data in datas:
        resid = float(np.max(_np_clip_min(data.ynorm - bound_fn(data), 0.0)))
        key = data.probe.s if force_abscissa == "s" else float(np.max(data.urestr))
        samples[key] = max(samples.get(key, 0.0), resid)
    if len(samples) == 1:
        samples[1.0] = 0.0
    return cf.fit_monotone_envelope(sorted(samples.items()), force_zero_at_zero=True)


def _np_clip_min(arr, lo):
    return np.maximum(arr, lo)


def estimate_gain(sys: SystemModel, prop: PropertyId, plan: SamplingPlan,
                  probe_set: ProbeSet | None = None, radius: float | None = None,
                  table_form: bool = False) -> Certificate:
    """Fit a certificate from simulation data; over-approximates by envelopes.

    The returned certificate verifies on the same plan by construction
    (envelopes dominate every sample they were fitted to).  Properties whose
    quantifiers cannot be exhausted from bounded-horizon data (the
    per-trajectory visit property over unbounded inputs) are rejected with
    ``EstimationError``.
    """
    ps = probe_set if probe_set is not None else ProbeSet(sys, plan)
    datas = ps.all_data()
    live = [d for d in datas if not d.blown]
    if not live:
        raise EstimationError("every probe blew up; nothing to fit")
    zero_in = [d for d in live if d.probe.s == 0.0]
    driven = [d for d in live if d.probe.s > 0.0]

    if prop == PropertyId.OAG:
        raise EstimationError(
            "per-trajectory visit times over unbounded inputs are not estimable "
            "from bounded-horizon data; use the uniform variants instead"
        )

    if prop == PropertyId.OULS and table_form:
        table = _fit_delta_table(sys, plan, ps, with_tau=False)
        return Certificate(prop, {"delta_table": table})

    if prop in (PropertyId.OUGS, PropertyId.OULS, PropertyId.OUGB):
        if radius is None:
            radius = max(plan.radii)
        pool = [d for d in live if prop != PropertyId.OULS or
                (d.probe.r <= radius + 1e-12 and d.probe.s <= radius + 1e-12)]
        zero_pool = [d for d in pool if d.probe.s == 0.0]
        sigma = cf.fit_monotone_envelope(
            [(d.probe.r, float(np.max(d.ynorm))) for d in zero_pool] + [(0.0, 0.0)],
            force_zero_at_zero=True,
        )
        gamma = _residual_gain(pool, lambda d: np.full_like(d.ynorm, float(sigma(d.probe.r))))
        if prop == PropertyId.OUGS:
            return Certificate(prop, {"sigma": sigma, "gamma": gamma})
        if prop == PropertyId.OULS:
            return Certificate(prop, {"sigma": sigma, "gamma": gamma, "radius": radius})
        return Certificate(prop, {"sigma": sigma, "gamma": gamma, "c": 1e-9})

    if prop in (PropertyId.OL, PropertyId.LOCAL_OL, PropertyId.OOUGB):
        if radius is None:
            radius = max(plan.radii)
        pool = [d for d in live if prop != PropertyId.LOCAL_OL or
                (d.probe.r <= radius + 1e-12 and d.probe.s <= radius + 1e-12)]
        zero_pool = [d for d in pool if d.probe.s == 0.0]
        sigma = cf.fit_monotone_envelope(
            [(d.y0, float(np.max(d.ynorm))) for d in zero_pool] + [(0.0, 0.0)],
            force_zero_at_zero=True,
        )
        gamma = _residual_gain(pool, lambda d: np.full_like(d.ynorm, float(sigma(d.y0))))
        if prop == PropertyId.OL:
            return Certificate(prop, {"sigma": sigma, "gamma": gamma})
        if prop == PropertyId.LOCAL_OL:
            return Certificate(prop, {"sigma": sigma, "gamma": gamma, "radius": radius})
        return Certificate(prop, {"sigma": sigma, "gamma": gamma, "c": 1e-9})

    if prop in (PropertyId.H_BOUNDED, PropertyId.H_K_BOUNDED):
        sigma1_samples = [(0.0, 0.0)]
        for d in zero_in:
            sigma1_samples.extend(zip(d.xnorm.tolist(), d.ynorm.tolist()))
        sigma1 = cf.fit_monotone_envelope(sigma1_samples, force_zero_at_zero=True)
        # static-map residuals are pointwise in the instantaneous input value
        resid = {0.0: 0.0}
        for d in live:
            gap = _np_clip_min(d.ynorm - sigma1(d.xnorm), 0.0)
            for uv, g in zip(d.uval_norm.tolist(), gap.tolist()):
                resid[uv] = max(resid.get(uv, 0.0), g)
        if len(resid) == 1:
            resid[1.0] = 0.0
        gamma1 = cf.fit_monotone_envelope(sorted(resid.items()), force_zero_at_zero=True)
        if prop == PropertyId.H_BOUNDED:
            return Certificate(prop, {"sigma1": sigma1, "gamma1": gamma1, "c": 0.0})
        return Certificate(prop, {"sigma1": sigma1, "gamma1": gamma1})

    if prop in (PropertyId.IOS, PropertyId.ISS, PropertyId.OCAG, PropertyId.IOPS,
                PropertyId.IOSS):
        series = (lambda d: d.xnorm) if prop in (PropertyId.ISS, PropertyId.IOSS) \
            else (lambda d: d.ynorm)
        beta, sigma, a = _fit_separable_kl(zero_in, series, plan)
        if prop == PropertyId.IOSS:
            gamma2 = cf.identity()
            def bound_fn(d):
                return beta(d.probe.r, d.times) + gamma2(d.ysup)
            resid = {0.0: 0.0}
            for d in live:
                r = float(np.max(_np_clip_min(d.xnorm - bound_fn(d), 0.0)))
                key = float(np.max(d.urestr)) if d.probe.s > 0 else 0.0
                resid[key] = max(resid.get(key, 0.0), r)
            if len(resid) == 1:
                resid[1.0] = 0.0
            gamma1 = cf.fit_monotone_envelope(sorted(resid.items()), force_zero_at_zero=True)
            return Certificate(prop, {"beta": beta, "gamma1": gamma1, "gamma2": gamma2})
        gamma = _residual_gain(live, lambda d: beta(d.probe.r, d.times))
        if prop == PropertyId.IOS or prop == PropertyId.ISS:
            return Certificate(prop, {"beta": beta, "gamma": gamma})
        return Certificate(prop, {"beta": beta, "gamma": gamma, "c": 0.0})

    if prop == PropertyId.OCEP:
        table = _fit_delta_table(sys, plan, ps, with_tau=True)
        return Certificate(prop, {"delta_table": table})

    if prop in (PropertyId.OUAG, PropertyId.OGUAG, PropertyId.OULIM,
                PropertyId.OGULIM, PropertyId.OOULIM, PropertyId.OLIM):
        gamma = _fit_asymptotic_gain(live, plan)
        if prop == PropertyId.OLIM:
            return Certificate(prop, {"gamma": gamma})
        mode = "uag" if prop in (PropertyId.OUAG, PropertyId.OGUAG) else "lim"
        if prop in (PropertyId.OUAG, PropertyId.OULIM):
            table = build_tau_table(sys, plan, mode, gamma,
                                    s_grid=(0.0,) + tuple(plan.input_norms), probe_set=ps)
        elif prop == PropertyId.OOULIM:
            table = build_tau_table(sys, plan, mode, gamma, probe_set=ps,
                                    over_initial_output=True)
        else:
            table = build_tau_table(sys, plan, mode, gamma, probe_set=ps)
        if np.all(~np.isfinite(table.values)):
            raise EstimationError(
                f"{prop.value}: no finite convergence cell within the horizon"
            )
        params = {"gamma": gamma, "tau_table": table}
        if prop == PropertyId.OGUAG:
            params["s_max"] = max(plan.s_max, 1e-9)
        return Certificate(prop, params)

    raise EstimationError(f"no estimator for property {prop.value}")


def _fit_asymptotic_gain(datas, plan: SamplingPlan) -> ScalarFn:
    """Late-window sup of |y| for driven probes, enveloped against the norm.

    Zero-input tails are deliberately excluded: covering them is the
    convergence table's job (a non-vanishing undriven tail simply leaves the
    table cells unreachable), while the gain must vanish at zero.
    """
    cut = 0.8 * plan.horizon
    samples = {0.0: 0.0}
    for d in datas:
        if d.probe.s == 0.0:
            continue
        tail = d.ynorm[d.times >= cut]
        if tail.size == 0:
            continue
        v = float(np.max(tail))
        samples[d.probe.s] = max(samples.get(d.probe.s, 0.0), v)
    if len(samples) == 1:
        samples[1.0] = 0.0
    return cf.fit_monotone_envelope(sorted(samples.items()), force_zero_at_zero=True)


def _fit_delta_table(sys: SystemModel, plan: SamplingPlan, ps: ProbeSet,
                     with_tau: bool) -> DeltaTable:
    tau_grid = plan.tau_grid() if with_tau else None
    eps_grid = plan.eps_grid

    def largest_delta(eps: float, horizon: float) -> float:
        def ok(delta: float) -> bool:
            if delta <= 0:
                return True
            for frac in (1.0, 0.5):
                for data in ps.shell(delta * frac,
                                     min(delta * frac, plan.s_max) if sys.input_dim else 0.0):
                    if data.blown:
                        return False
                    mask = data.times <= horizon + 1e-12
                    if float(np.max(np.where(mask, data.ynorm, -math.inf))) > eps * 0.98:
                        return False
            return True

        hi = min(eps, max(plan.radii))
        for _ in range(30):
            if ok(hi):
                break
            hi *= 0.5
            if hi < 1e-9:
                return 0.0
        return hi

    if with_tau:
        vals = np.array([[largest_delta(e, t) for t in tau_grid] for e in eps_grid])
        return DeltaTable(eps_grid, tau_grid, vals)
    vals = np.array([largest_delta(e, plan.horizon) for e in eps_grid])
    return DeltaTable(eps_grid, None, vals)


# ---------------------------------------------------------------------------
# reachability and crossing times
# ---------------------------------------------------------------------------

def build_reachability_bound(sys: SystemModel, plan: SamplingPlan,
                             over_initial_output: bool = False,
                             probe_set: ProbeSet | None = None) -> ReachabilityBound:
    """Empirical sup-output table with monotone rectification."""
    ps = probe_set if probe_set is not None else ProbeSet(sys, plan)
    r_grid = tuple(plan.radii)
    s_grid = (0.0,) + tuple(plan.input_norms)
    t_grid = tuple(np.linspace(0.0, plan.horizon, 9)[1:])
    values = np.zeros((len(r_grid), len(s_grid), len(t_grid)))
    for i, r in enumerate(r_grid):
        for j, s in enumerate(s_grid):
            datas = (ps.initial_output_shell(r, s) if over_initial_output
                     else ps.shell(r, s))
            for k, t_cap in enumerate(t_grid):
                worst = 0.0
                for data in datas:
                    if data.blown and data.traj.blow_up <= t_cap:
                        worst = math.inf
                        break
                    mask = data.times <= t_cap + 1e-12
                    worst = max(worst, float(np.max(np.where(mask, data.ynorm, -math.inf))))
                values[i, j, k] = worst
    return ReachabilityBound(r_grid, s_grid, t_grid, values, over_initial_output)


def first_crossing_time(sys: SystemModel, x0, u: InputSignal, target_radius: float,
                        plan: SimPlan) -> float:
    """First time the output norm enters the open ball of the given radius.

    Grid detection plus bisection between the bracketing grid points;
    returns +inf when the ball is never entered within the horizon.
    """
    if target_radius <= 0:
        raise DomainError("target radius must be positive")
    from .errors import BlowUpError

    traj = simulate(sys, np.asarray(x0, dtype=float), u, plan)
    ynorm = traj.output_norms()
    inside = ynorm < target_radius
    if inside[0]:
        return 0.0
    hits = np.nonzero(inside)[0]
    if hits.size == 0:
        if traj.blow_up is not None:
            raise BlowUpError("trajectory blew up before entering the target ball",
                              traj.blow_up)
        return math.inf
    k = int(hits[0])
    lo, hi = float(traj.times[k - 1]), float(traj.times[k])
    x_lo = traj.states[k - 1]
    t0 = lo

    def norm_at(dt: float) -> float:
        if dt <= 0.0:
            return float(ynorm[k - 1])
        sub = simulate(sys, x_lo, u.shift(t0), SimPlan(dt, min(plan.step, dt), plan.method,
                                                       plan.blow_up_threshold))
        return float(np.linalg.norm(sub.outputs[-1]))

    a, b = 0.0, hi - lo
    for _ in range(30):
        mid = 0.5 * (a + b)
        if norm_at(mid) < target_radius:
            b = mid
        else:
            a = mid
    return t0 + 0.5 * (a + b)
