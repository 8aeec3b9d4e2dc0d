"""
JSON experiment configs.

A config document looks like::

    {
      "name": "example2",
      "schedule": {"n": 5, "segments": [
          {"duration": 0.5, "edges": [{"from": 1, "to": 2, "weight": 1.0}, ...]}, ...]},
      "problem": {"mode": "optimization", "m": 1,
                  "costs": [{"kind": "huber", "w": 0.5, "r": 100}, ...],
                  "constraints": [{"kind": "affine", "c": [2], "d": -8}, ...],
                  "multiplier_caps": [50, 50, 50, 50, 50]},
      "gain": {"kind": "generalized_harmonic", "a0": 2.6, "b0": 0.25, "scale": 2},
      "sim": {"h": 0.001, "t_end": 300, "record_stride": null,
              "initial_states": [[3], [-2], [-1], [1], [3]],
              "initial_multipliers": null},
      "output": "example2.csv"
    }

Agent indices are 1-based.  ``problem.constraints`` is optional in
consensus-only mode; ``initial_multipliers`` defaults to zeros.
"""

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import functions, gains
from .errors import ParseError, ValidationError
from .graph_model import GraphSchedule, WeightedDigraph
from .simulator import ConstrainedOptProblem, FeasibilityProblem, SimConfig, SimState
from .trace import MODES


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    name: str
    schedule: GraphSchedule
    mode: str
    m: int
    problem: Any
    gain: gains.StepSizeSchedule
    sim: SimConfig
    initial: SimState
    output: Optional[str] = None
    reference_point: Optional[list] = None

    @property
    def n(self):
        return self.schedule.n

    def to_dict(self) -> dict:
        segments = []
        for d, g in self.schedule.segments:
            edges = [{"from": j + 1, "to": i + 1, "weight": float(g.weights[i, j])}
                     for j, i in sorted(g.edges())]
            segments.append({"duration": d, "edges": edges})
        problem = {"mode": self.mode, "m": self.m}
        if self.problem is not None:
            problem["constraints"] = [functions.to_spec(g) for g in self.problem.constraints]
        if isinstance(self.problem, ConstrainedOptProblem):
            problem["costs"] = [functions.to_spec(f) for f in self.problem.costs]
            problem["multiplier_caps"] = self.problem.multiplier_caps.tolist()
        doc = {
            "name": self.name,
            "schedule": {"n": self.n, "segments": segments},
            "problem": problem,
            "gain": gains.to_spec(self.gain),
            "sim": {
                "h": self.sim.h,
                "t_end": self.sim.t_end,
                "record_stride": self.sim.record_stride,
                "initial_states": self.initial.x.tolist(),
                "initial_multipliers": None if self.initial.z is None else self.initial.z.tolist(),
            },
            "output": self.output,
        }
        if self.reference_point is not None:
            doc["reference_point"] = list(self.reference_point)
        return doc


class _Collector:
    def __init__(self):
        self.problems = []

    def add(self, path, msg):
        self.problems.append((path, msg))

    def get(self, doc, key, path, kind=None, required=True, default=None):
        if not isinstance(doc, dict):
            return default
        if key not in doc or doc[key] is None:
            if required:
                self.add(f"{path}.{key}" if path else key, "missing")
            return default
        value = doc[key]
        if kind is not None and not _is(value, kind):
            self.add(f"{path}.{key}" if path else key, f"expected {kind}, got {type(value).__name__}")
            return default
        return value


def _is(value, kind):
    if kind == "number":
        return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)
    if kind == "int":
        return isinstance(value, int) and not isinstance(value, bool)
    if kind == "list":
        return isinstance(value, list)
    if kind == "object":
        return isinstance(value, dict)
    if kind == "string":
        return isinstance(value, str)
    raise ValueError(kind)


def _parse_schedule(doc, col):
    sched = col.get(doc, "schedule", "", "object")
    if sched is None:
        return None
    n = col.get(sched, "n", "schedule", "int")
    segs = col.get(sched, "segments", "schedule", "list")
    if n is not None and n < 1:
        col.add("schedule.n", "must be at least 1")
        n = None
    if segs is not None and not segs:
        col.add("schedule.segments", "need at least one segment")
    if n is None or not segs:
        return None
    segments = []
    ok = True
    for k, seg in enumerate(segs):
        path = f"schedule.segments[{k}]"
        if not isinstance(seg, dict):
            col.add(path, "expected object")
            ok = False
            continue
        dur = col.get(seg, "duration", path, "number")
        if dur is not None and dur <= 0:
            col.add(f"{path}.duration", "must be positive")
            dur = None
        edges = col.get(seg, "edges", path, "list", required=False, default=[])
        w = np.zeros((n, n))
        for e, edge in enumerate(edges):
            epath = f"{path}.edges[{e}]"
            if not isinstance(edge, dict):
                col.add(epath, "expected object")
                ok = False
                continue
            src = col.get(edge, "from", epath, "int")
            dst = col.get(edge, "to", epath, "int")
            weight = col.get(edge, "weight", epath, "number", required=False, default=1.0)
            bad = False
            for key, idx in (("from", src), ("to", dst)):
                if idx is not None and not 1 <= idx <= n:
                    col.add(f"{epath}.{key}", f"agent index {idx} outside [1, {n}]")
                    bad = True
            if src is None or dst is None or bad:
                ok = False
                continue
            if src == dst:
                col.add(epath, f"self-loop on agent {src}")
                ok = False
                continue
            if weight < 0:
                col.add(f"{epath}.weight", "must be nonnegative")
                ok = False
                continue
            if w[dst - 1, src - 1] != 0:
                col.add(epath, f"duplicate edge {src}->{dst}")
                ok = False
                continue
            w[dst - 1, src - 1] = weight
        if dur is None:
            ok = False
        if ok:
            segments.append((dur, WeightedDigraph(w)))
    if not ok:
        return None
    return GraphSchedule(segments)


def _parse_functions(items, path, m, n, col):
    if not isinstance(items, list):
        col.add(path, "expected list")
        return None
    if n is not None and len(items) != n:
        col.add(path, f"expected one function per agent ({n}), got {len(items)}")
    out = []
    for i, spec in enumerate(items):
        p = f"{path}[{i}]"
        if not isinstance(spec, dict):
            col.add(p, "expected object")
            out.append(None)
            continue
        try:
            f = functions.from_spec(spec)
        except (TypeError, ValueError, KeyError) as exc:
            col.add(p, str(exc) or type(exc).__name__)
            out.append(None)
            continue
        if m is not None and f.m != m:
            col.add(p, f"function takes dimension {f.m}, problem has m={m}")
            out.append(None)
            continue
        out.append(f)
    if any(f is None for f in out) or (n is not None and len(out) != n):
        return None
    return out


def _parse_problem(doc, n, col):
    prob = col.get(doc, "problem", "", "object")
    if prob is None:
        return None, None, None
    mode = col.get(prob, "mode", "problem", "string")
    if mode is not None and mode not in MODES:
        col.add("problem.mode", f"must be one of {list(MODES)}")
        mode = None
    m = col.get(prob, "m", "problem", "int")
    if m is not None and m < 1:
        col.add("problem.m", "must be at least 1")
        m = None
    if mode is None:
        return None, m, None
    need_constraints = mode != "consensus-only"
    raw_g = col.get(prob, "constraints", "problem", "list", required=need_constraints)
    g = None if raw_g is None else _parse_functions(raw_g, "problem.constraints", m, n, col)
    if mode != "optimization":
        for key in ("costs", "multiplier_caps"):
            if prob.get(key) is not None:
                col.add(f"problem.{key}", f"not used in {mode} mode")
        if g is None or m is None:
            return mode, m, None
        return mode, m, FeasibilityProblem(m, g)
    raw_f = col.get(prob, "costs", "problem", "list")
    f = None if raw_f is None else _parse_functions(raw_f, "problem.costs", m, n, col)
    caps = col.get(prob, "multiplier_caps", "problem", "list")
    if caps is not None:
        if n is not None and len(caps) != n:
            col.add("problem.multiplier_caps", f"expected {n} caps, got {len(caps)}")
            caps = None
        else:
            for i, c in enumerate(caps):
                if not _is(c, "number") or c <= 0:
                    col.add(f"problem.multiplier_caps[{i}]", "must be a positive number")
                    caps = None
                    break
    if f is None or g is None or caps is None or m is None:
        return mode, m, None
    return mode, m, ConstrainedOptProblem(m, f, g, caps)


def _parse_gain(doc, mode, col):
    spec = col.get(doc, "gain", "", "object")
    if spec is None:
        return None
    try:
        gain = gains.from_spec(spec)
    except (TypeError, ValueError) as exc:
        col.add("gain", str(exc))
        return None
    diag = gain.validate()
    if mode is not None and mode != "consensus-only" and not diag.admissible:
        col.add("gain", f"{gain.kind} gain fails {', '.join(diag.failures())}; "
                        f"only allowed in consensus-only mode")
    return gain


def _parse_sim(doc, schedule, mode, m, n, problem, col):
    sim = col.get(doc, "sim", "", "object")
    if sim is None:
        return None, None
    h = col.get(sim, "h", "sim", "number", required=False, default=1e-3)
    t_end = col.get(sim, "t_end", "sim", "number")
    stride = col.get(sim, "record_stride", "sim", "int", required=False)
    if h is not None and h <= 0:
        col.add("sim.h", "must be positive")
        h = None
    if t_end is not None and t_end < 0:
        col.add("sim.t_end", "must be nonnegative")
        t_end = None
    if stride is not None and stride < 1:
        col.add("sim.record_stride", "must be a positive integer")
        stride = None
    if h is not None and schedule is not None and h > schedule.min_duration * (1 + 1e-9):
        col.add("sim.h", f"h={h} exceeds the shortest segment duration {schedule.min_duration}")
        h = None

    x0 = col.get(sim, "initial_states", "sim", "list")
    x = None
    if x0 is not None:
        try:
            x = np.array(x0, dtype=float)
        except (TypeError, ValueError):
            col.add("sim.initial_states", "must be a list of numeric vectors")
        else:
            if x.ndim == 1 and m == 1:
                x = x[:, None]
            if n is not None and m is not None and x.shape != (n, m):
                col.add("sim.initial_states", f"expected shape ({n}, {m}), got {x.shape}")
                x = None
            elif not np.all(np.isfinite(x)):
                col.add("sim.initial_states", "must be finite")
                x = None

    z = None
    z0 = sim.get("initial_multipliers")
    if mode == "optimization":
        if z0 is None and n is not None:
            z = np.zeros(n)
        elif z0 is not None:
            try:
                z = np.array(z0, dtype=float).reshape(-1)
            except (TypeError, ValueError):
                col.add("sim.initial_multipliers", "must be a list of numbers")
                z = None
            else:
                if n is not None and z.shape != (n,):
                    col.add("sim.initial_multipliers", f"expected {n} entries, got {len(z)}")
                    z = None
                elif problem is not None:
                    caps = problem.multiplier_caps
                    if np.any(z < 0) or np.any(z > caps):
                        col.add("sim.initial_multipliers", "must lie in [0, multiplier_caps]")
                        z = None
    elif z0 is not None:
        col.add("sim.initial_multipliers", f"not used in {mode} mode")

    if h is None or t_end is None or mode is None:
        return None, None
    cfg = SimConfig(t_end=float(t_end), h=float(h), record_stride=stride, mode=mode)
    if x is None or (mode == "optimization" and z is None):
        return cfg, None
    return cfg, SimState(0.0, x, z)


def parse_config(doc) -> ExperimentConfig:
    """Validate a config document; every problem is reported in one ValidationError."""
    col = _Collector()
    if not isinstance(doc, dict):
        raise ValidationError([("", "config must be a JSON object")])
    name = col.get(doc, "name", "", "string", required=False, default="experiment")
    schedule = _parse_schedule(doc, col)
    n_decl = doc.get("schedule", {}).get("n") if isinstance(doc.get("schedule"), dict) else None
    n = n_decl if _is(n_decl, "int") and n_decl >= 1 else None
    mode, m, problem = _parse_problem(doc, n, col)
    gain = _parse_gain(doc, mode, col)
    sim, initial = _parse_sim(doc, schedule, mode, m, n, problem, col)
    output = col.get(doc, "output", "", "string", required=False)
    ref = doc.get("reference_point")
    if ref is not None and not (isinstance(ref, list) and all(_is(v, "number") for v in ref)):
        col.add("reference_point", "must be a list of numbers")
    known = {"name", "schedule", "problem", "gain", "sim", "output", "reference_point"}
    for key in sorted(set(doc) - known):
        col.add(key, "unknown field")
    if col.problems:
        raise ValidationError(col.problems)
    return ExperimentConfig(
        name=name, schedule=schedule, mode=mode, m=m, problem=problem, gain=gain,
        sim=sim, initial=initial, output=output, reference_point=ref,
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return parse_config(doc)


def write_config(config: ExperimentConfig, path):
    Path(path).write_text(json.dumps(config.to_dict(), indent=2) + "\n")
