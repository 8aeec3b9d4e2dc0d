"""Recorded simulation output."""

from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

MODES = ("feasibility", "optimization", "consensus-only")


@dataclass(frozen=True, eq=False)
class Trace:
    """
    Sampled trajectory of a run.

    Attributes
    ----------
    times : ndarray, shape (K,)
        Strictly increasing sample times.
    states : ndarray, shape (K, n, m)
        Agent states; ``states[k, i]`` is agent ``i`` at ``times[k]``.
    multipliers : ndarray, shape (K, n), optional
        Multipliers, present in optimization mode only.
    mode : str
    problem, schedule, gain
        The inputs the trace was produced from, kept for metric evaluation.
    """

    times: np.ndarray
    states: np.ndarray
    multipliers: Optional[np.ndarray] = None
    mode: str = "feasibility"
    problem: Any = None
    schedule: Any = None
    gain: Any = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states, dtype=float)
        if times.ndim != 1 or len(times) == 0:
            raise ValueError("a trace needs at least one sample")
        if states.ndim != 3 or states.shape[0] != len(times):
            raise ValueError(f"states must have shape (K, n, m), got {states.shape}")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)
        if self.multipliers is not None:
            z = np.asarray(self.multipliers, dtype=float)
            if z.shape != states.shape[:2]:
                raise ValueError(f"multipliers must have shape {states.shape[:2]}, got {z.shape}")
            object.__setattr__(self, "multipliers", z)

    def __len__(self):
        return len(self.times)

    @property
    def n(self):
        return self.states.shape[1]

    @property
    def m(self):
        return self.states.shape[2]

    @property
    def final_state(self):
        return self.states[-1]

    def mean_states(self):
        """Network average, shape (K, m)."""
        return self.states.mean(axis=1)
