"""
Forward-Euler integration of the distributed subgradient flows.

Feasibility mode integrates, for every agent i,

    x_i' = sum_j a_ij(t) (x_j - x_i) - b(t) s_i,   s_i in d g_i^+(x_i)

and optimization mode integrates

    x_i' = sum_j a_ij(t) (x_j - x_i) - b(t) (df_i(x_i) + z_i dg_i(x_i))
    z_i' = P_T[b(t) g_i(x_i)]

where P_T restricts the multiplier velocity to the tangent cone of
[0, zcap_i].  Consensus-only mode drops the gradient term.

Steps never straddle a graph switch, the gain is sampled at the left end of
each step, and multipliers are clamped to their box after every step.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, Interrupted, ModeMismatch, OutOfBox
from .functions import Affine, ConvexScalarFunction, HuberQuadratic, PlusFunction
from .graph_model import GraphSchedule, adjacency_at, laplacian
from .trace import MODES, Trace

_BOX_TOL = 1e-12


def _check_functions(funcs, m, name):
    for i, f in enumerate(funcs):
        if not isinstance(f, ConvexScalarFunction):
            raise TypeError(f"{name}[{i}] is not a ConvexScalarFunction")
        if f.m != m:
            raise DimensionMismatch(f"{name}[{i}] takes dimension {f.m}, problem has m={m}")


class _Stack:
    """Evaluate one function per agent on an (n, m) state array.

    All-affine and all-huber stacks are evaluated in one numpy pass; anything
    else falls back to a per-agent loop.
    """

    def __init__(self, funcs):
        self.funcs = tuple(funcs)
        self._C = self._d = self._w = self._r = None
        if all(type(f) is Affine for f in self.funcs):
            self._C = np.array([f.c for f in self.funcs])
            self._d = np.array([f.d for f in self.funcs])
        elif all(type(f) is HuberQuadratic for f in self.funcs):
            self._w = np.array([f.w for f in self.funcs])
            self._r = np.array([f.r for f in self.funcs])

    def values(self, X):
        if self._C is not None:
            return np.einsum("ij,ij->i", self._C, X) + self._d
        if self._w is not None:
            a = np.abs(X[:, 0])
            inner = 0.5 * self._w * a * a
            outer = self._w * self._r * a - 0.5 * self._w * self._r ** 2
            return np.where(a <= self._r, inner, outer)
        return np.array([f._value(x) for f, x in zip(self.funcs, X)])

    def subgradients(self, X):
        if self._C is not None:
            return self._C.copy()
        if self._w is not None:
            v = X[:, 0]
            inner = self._w * v
            outer = np.copysign(self._w * self._r, v)
            return np.where(np.abs(v) <= self._r, inner, outer)[:, None]
        return np.array([f._subgradient(x) for f, x in zip(self.funcs, X)])

    def plus_subgradients(self, X):
        active = self.values(X) > 0
        G = self.subgradients(X)
        G[~active] = 0.0
        return G


@dataclass(frozen=True, eq=False)
class FeasibilityProblem:
    """Find x with g_i(x) <= 0 for every agent i."""

    m: int
    constraints: Sequence[ConvexScalarFunction]

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        if not self.constraints:
            raise ValueError("need at least one constraint")
        _check_functions(self.constraints, self.m, "constraints")
        object.__setattr__(self, "_g", _Stack(self.constraints))

    @property
    def n(self):
        return len(self.constraints)

    def plus_functions(self):
        return [PlusFunction(g) for g in self.constraints]


@dataclass(frozen=True, eq=False)
class ConstrainedOptProblem:
    """Minimize sum_i f_i(x) subject to g_i(x) <= 0, multipliers in [0, cap_i]."""

    m: int
    costs: Sequence[ConvexScalarFunction]
    constraints: Sequence[ConvexScalarFunction]
    multiplier_caps: Sequence[float]

    def __post_init__(self):
        object.__setattr__(self, "costs", tuple(self.costs))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        caps = np.array(self.multiplier_caps, dtype=float).reshape(-1)
        caps.setflags(write=False)
        object.__setattr__(self, "multiplier_caps", caps)
        n = len(self.costs)
        if n == 0 or len(self.constraints) != n or len(caps) != n:
            raise DimensionMismatch(
                f"need equally many costs, constraints and caps; got "
                f"{n}, {len(self.constraints)}, {len(caps)}")
        if np.any(~(caps > 0)) or not np.all(np.isfinite(caps)):
            raise ValueError("multiplier caps must be finite and positive")
        _check_functions(self.costs, self.m, "costs")
        _check_functions(self.constraints, self.m, "constraints")
        object.__setattr__(self, "_f", _Stack(self.costs))
        object.__setattr__(self, "_g", _Stack(self.constraints))

    @property
    def n(self):
        return len(self.costs)


@dataclass(frozen=True, eq=False)
class SimState:
    t: float
    x: np.ndarray
    z: Optional[np.ndarray] = None

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.ndim != 2:
            raise DimensionMismatch(f"x must have shape (n, m), got {x.shape}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "t", float(self.t))
        if self.z is not None:
            z = np.array(self.z, dtype=float).reshape(-1)
            if z.shape != (x.shape[0],):
                raise DimensionMismatch(f"z must have {x.shape[0]} entries, got {z.shape}")
            object.__setattr__(self, "z", z)


@dataclass(frozen=True)
class SimConfig:
    """
    Integration settings.

    ``record_stride=None`` picks the smallest stride that keeps a run at or
    below ``max_samples`` recorded states.
    """

    t_end: float
    h: float = 1e-3
    record_stride: Optional[int] = None
    mode: str = "feasibility"
    max_samples: int = 100_000

    def __post_init__(self):
        if not (self.h > 0 and math.isfinite(self.h)):
            raise ValueError("h must be positive")
        if not (self.t_end >= 0 and math.isfinite(self.t_end)):
            raise ValueError("t_end must be nonnegative")
        if self.record_stride is not None and (int(self.record_stride) != self.record_stride
                                               or self.record_stride < 1):
            raise ValueError("record_stride must be a positive integer")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")

    def stride(self):
        if self.record_stride is not None:
            return int(self.record_stride)
        steps = math.ceil(self.t_end / self.h)
        return max(1, math.ceil(steps / (self.max_samples - 1)))


def _check_state(state, n, m):
    if state.x.shape != (n, m):
        raise DimensionMismatch(f"state has shape {state.x.shape}, problem needs {(n, m)}")


def _feasibility_velocity(L, x, problem, b_val):
    v = -(L @ x)
    if b_val != 0:
        v -= b_val * problem._g.plus_subgradients(x)
    return v


def _check_box(z, caps):
    if np.any(z < -_BOX_TOL) or np.any(z > caps + _BOX_TOL):
        raise OutOfBox(f"multipliers {z} outside [0, {caps}]")


def _project(z, caps, v):
    blocked = ((z <= 0) & (v < 0)) | ((z >= caps) & (v > 0))
    return np.where(blocked, 0.0, v)


def _optimization_velocity(L, x, z, problem, b_val):
    caps = problem.multiplier_caps
    _check_box(z, caps)
    vx = -(L @ x)
    g = problem._g
    if b_val != 0:
        grad = problem._f.subgradients(x) + z[:, None] * g.subgradients(x)
        vx -= b_val * grad
    vz = _project(z, caps, b_val * g.values(x))
    return vx, vz


def feasibility_rhs(state: SimState, schedule: GraphSchedule, problem: FeasibilityProblem, b_val: float):
    """Right-hand side of the feasibility flow at ``state``, shape (n, m)."""
    _check_state(state, problem.n, problem.m)
    if schedule.n != problem.n:
        raise DimensionMismatch(f"schedule has {schedule.n} agents, problem has {problem.n}")
    L = laplacian(adjacency_at(schedule, state.t))
    return _feasibility_velocity(L, state.x, problem, b_val)


def tangent_cone_projection(z: float, z_cap: float, v: float) -> float:
    """Project velocity ``v`` onto the tangent cone of [0, z_cap] at ``z``."""
    if z < -_BOX_TOL or z > z_cap + _BOX_TOL:
        raise OutOfBox(f"z={z} outside [0, {z_cap}]")
    if (z <= 0 and v < 0) or (z >= z_cap and v > 0):
        return 0.0
    return v


def optimization_rhs(state: SimState, schedule: GraphSchedule, problem: ConstrainedOptProblem, b_val: float):
    """Right-hand side of the primal-dual flow: ``(x velocity, z velocity)``."""
    if state.z is None:
        raise ModeMismatch("optimization mode needs multipliers in the state")
    _check_state(state, problem.n, problem.m)
    if schedule.n != problem.n:
        raise DimensionMismatch(f"schedule has {schedule.n} agents, problem has {problem.n}")
    L = laplacian(adjacency_at(schedule, state.t))
    return _optimization_velocity(L, state.x, state.z, problem, b_val)


def step(state, schedule, problem, sched_b, h_eff, consensus_only=False) -> SimState:
    """
    One forward-Euler step of length ``h_eff``.

    The caller guarantees the step does not cross a graph switch.  The
    gain is evaluated at ``state.t``.
    """
    if not h_eff > 0:
        raise ValueError("h_eff must be positive")
    b_val = 0.0 if consensus_only else sched_b.value(state.t)
    if state.z is not None:
        if not isinstance(problem, ConstrainedOptProblem):
            raise ModeMismatch("multipliers given but problem is not an optimization problem")
        vx, vz = optimization_rhs(state, schedule, problem, b_val)
        z = np.clip(state.z + h_eff * vz, 0.0, problem.multiplier_caps)
        return SimState(state.t + h_eff, state.x + h_eff * vx, z)
    if problem is None:
        L = laplacian(adjacency_at(schedule, state.t))
        return SimState(state.t + h_eff, state.x - h_eff * (L @ state.x))
    v = feasibility_rhs(state, schedule, problem, b_val)
    return SimState(state.t + h_eff, state.x + h_eff * v)


def _validate_run(schedule, problem, sched_b, config, initial):
    mode = config.mode
    n, m = initial.x.shape
    if schedule.n != n:
        raise DimensionMismatch(f"schedule has {schedule.n} agents, initial state has {n}")
    if config.h > schedule.min_duration * (1 + 1e-9):
        raise ValueError(f"h={config.h} exceeds the shortest segment duration {schedule.min_duration}")
    if mode == "optimization":
        if not isinstance(problem, ConstrainedOptProblem):
            raise ModeMismatch("optimization mode needs a ConstrainedOptProblem")
        if initial.z is None:
            raise ModeMismatch("optimization mode needs initial multipliers")
        _check_box(initial.z, problem.multiplier_caps)
    else:
        if initial.z is not None:
            raise ModeMismatch(f"{mode} mode takes no multipliers")
        if mode == "feasibility" and not isinstance(problem, FeasibilityProblem):
            raise ModeMismatch("feasibility mode needs a FeasibilityProblem")
    if problem is not None:
        _check_state(initial, problem.n, problem.m)
    if mode != "consensus-only":
        diag = sched_b.validate()
        if not diag.admissible:
            raise ValueError(f"gain {sched_b!r} is only allowed in consensus-only mode "
                             f"(fails: {', '.join(diag.failures())})")


def run(schedule: GraphSchedule, problem, sched_b, config: SimConfig, initial: SimState) -> Trace:
    """
    Integrate from ``initial`` to ``config.t_end`` and return the sampled trace.

    Every ``stride``-th step is recorded, plus the initial and final states.
    Raises :class:`Interrupted` as soon as a state becomes non-finite.
    """
    _validate_run(schedule, problem, sched_b, config, initial)
    consensus_only = config.mode == "consensus-only"
    optimization = config.mode == "optimization"
    stride = config.stride()

    x = initial.x.copy()
    z = None if initial.z is None else initial.z.copy()
    caps = problem.multiplier_caps if optimization else None
    times, xs, zs = [initial.t], [x.copy()], [None if z is None else z.copy()]

    count = 0
    t = h_eff = initial.t
    recorded = True
    # overflow is reported through the finiteness check below
    with np.errstate(over="ignore", invalid="ignore"):
        for t, h_eff, k in schedule.iter_steps(initial.t, initial.t + config.t_end, config.h):
            L = schedule.segment_laplacian(k)
            b_val = 0.0 if consensus_only else sched_b.value(t)
            if optimization:
                vx, vz = _optimization_velocity(L, x, z, problem, b_val)
                x = x + h_eff * vx
                z = np.clip(z + h_eff * vz, 0.0, caps)
            elif consensus_only:
                x = x - h_eff * (L @ x)
            else:
                x = x + h_eff * _feasibility_velocity(L, x, problem, b_val)
            count += 1
            if not np.all(np.isfinite(x)) or (z is not None and not np.all(np.isfinite(z))):
                raise Interrupted(t + h_eff)
            recorded = count % stride == 0
            if recorded:
                times.append(t + h_eff)
                xs.append(x)
                zs.append(z)
    if not recorded:
        times.append(t + h_eff)
        xs.append(x)
        zs.append(z)

    return Trace(
        times=np.array(times),
        states=np.array(xs),
        multipliers=np.array(zs) if optimization else None,
        mode=config.mode,
        problem=problem,
        schedule=schedule,
        gain=sched_b,
    )
