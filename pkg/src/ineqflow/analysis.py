"""Metrics over traces and numerical checks of the consensus bounds."""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .errors import ModeMismatch, OutOfBox
from .graph_model import contraction_constants, transition_matrix
from .simulator import ConstrainedOptProblem, FeasibilityProblem
from .trace import Trace

__all__ = [
    "Trace", "consensus_residuals", "infeasibility", "diameter", "coordinate_spread",
    "lagrangian", "detect_consensus", "verify_contraction_bound", "BoundReport", "PairResult",
]


def consensus_residuals(trace: Trace) -> np.ndarray:
    """Distance of every agent to the network average, shape (K, n)."""
    dev = trace.states - trace.states.mean(axis=1, keepdims=True)
    return np.linalg.norm(dev, axis=2)


def infeasibility(trace: Trace) -> np.ndarray:
    """Sum over agents of g_i^+(x_i(t)), shape (K,)."""
    if trace.mode == "optimization" or not isinstance(trace.problem, FeasibilityProblem):
        raise ModeMismatch("infeasibility needs a feasibility-mode trace")
    g = trace.problem._g
    return np.array([np.maximum(g.values(x), 0.0).sum() for x in trace.states])


def diameter(trace: Trace) -> np.ndarray:
    """Largest pairwise Euclidean distance between agents, shape (K,)."""
    X = trace.states
    out = np.zeros(len(X))
    for i in range(X.shape[1] - 1):
        d = np.linalg.norm(X[:, i + 1:, :] - X[:, i:i + 1, :], axis=2)
        np.maximum(out, d.max(axis=1), out=out)
    return out


def coordinate_spread(trace: Trace) -> np.ndarray:
    """Per-coordinate ``max_i - min_i``, shape (K, m)."""
    return trace.states.max(axis=1) - trace.states.min(axis=1)


def lagrangian(problem: ConstrainedOptProblem, x, z) -> float:
    """``sum_i f_i(x) + z_i g_i(x)`` at a common point ``x``."""
    z = np.asarray(z, dtype=float).reshape(-1)
    caps = problem.multiplier_caps
    if z.shape != caps.shape:
        raise ValueError(f"z must have {len(caps)} entries")
    if np.any(z < 0) or np.any(z > caps):
        raise OutOfBox(f"multipliers {z} outside [0, {caps}]")
    return float(sum(f.value(x) + zi * g.value(x)
                     for f, g, zi in zip(problem.costs, problem.constraints, z)))


def detect_consensus(trace: Trace, eps: float) -> Optional[float]:
    """Earliest recorded time after which the diameter stays within ``eps``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    outside = np.nonzero(diameter(trace) > eps)[0]
    if len(outside) == 0:
        return float(trace.times[0])
    last = outside[-1]
    if last == len(trace) - 1:
        return None
    return float(trace.times[last + 1])


@dataclass(frozen=True)
class PairResult:
    s: float
    t: float
    deviation: float
    bound: float

    @property
    def slack(self):
        return self.bound - self.deviation

    @property
    def passed(self):
        return self.deviation <= self.bound


@dataclass(frozen=True)
class BoundReport:
    constants: object
    pairs: List[PairResult]

    @property
    def passed(self):
        return all(p.passed for p in self.pairs)


def verify_contraction_bound(schedule, sample_pairs, h=1e-3) -> BoundReport:
    """
    Check ``|Phi_ij(t, s) - 1/n| <= H gamma^(t - s)`` at each ``(s, t)`` pair.

    Raises NotBalanced / NotConnected when the schedule does not meet the
    assumptions the bound is stated under.
    """
    const = contraction_constants(schedule)
    n = schedule.n
    results = []
    for s, t in sample_pairs:
        phi = transition_matrix(schedule, s, t, h)
        dev = float(np.abs(phi - 1.0 / n).max())
        results.append(PairResult(float(s), float(t), dev, const.bound(t - s)))
    return BoundReport(const, results)
