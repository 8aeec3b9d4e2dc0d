"""Run orchestration, CSV output and report formatting."""

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis
from .config import ExperimentConfig
from .errors import IneqflowError
from .graph_model import (ContractionConstants, contraction_constants, delta_graph,
                          is_strongly_connected, unbalanced_nodes)
from .simulator import ConstrainedOptProblem, run

CONSENSUS_EPS = 1e-2


def simulate(config: ExperimentConfig):
    return run(config.schedule, config.problem, config.gain, config.sim, config.initial)


def csv_header(n, m, mode, has_constraints=True):
    cols = ["t"]
    cols += [f"x_{i}_{mu}" for i in range(1, n + 1) for mu in range(1, m + 1)]
    if mode == "optimization":
        cols += [f"z_{i}" for i in range(1, n + 1)]
    cols += [f"R_{i}" for i in range(1, n + 1)]
    if has_constraints:
        cols.append("Q")
    cols.append("diameter")
    return cols


def plus_sum(trace):
    """Sum of g_i^+(x_i(t)) over agents for any trace with constraints."""
    g = trace.problem._g
    return np.array([np.maximum(g.values(x), 0.0).sum() for x in trace.states])


def write_trace_csv(trace, path):
    """One row per recorded sample, full double precision."""
    has_g = trace.problem is not None
    header = csv_header(trace.n, trace.m, trace.mode, has_g)
    K = len(trace)
    blocks = [trace.times[:, None], trace.states.reshape(K, -1)]
    if trace.mode == "optimization":
        blocks.append(trace.multipliers)
    blocks.append(analysis.consensus_residuals(trace))
    if has_g:
        blocks.append(plus_sum(trace)[:, None])
    blocks.append(analysis.diameter(trace)[:, None])
    data = np.hstack(blocks)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in data:
            writer.writerow([repr(float(v)) for v in row])
    return header


@dataclass
class GraphReport:
    n: int
    balanced_segments: list
    unbalanced: dict
    edges: list
    delta: float
    T: float
    strongly_connected: bool
    constants: object = None
    constants_note: str = ""

    @property
    def balanced(self):
        return all(self.balanced_segments)

    def lines(self):
        out = [f"agents: {self.n}"]
        for k, ok in enumerate(self.balanced_segments):
            extra = "" if ok else f" (nodes {', '.join(str(i + 1) for i in self.unbalanced[k])})"
            out.append(f"segment {k + 1}: balanced {'yes' if ok else 'no'}{extra}")
        out.append(f"balanced: {'yes' if self.balanced else 'no'}")
        edge_txt = ", ".join(f"{j + 1}->{i + 1}" for j, i in self.edges) or "(none)"
        out.append(f"delta-graph edges: {edge_txt}")
        out.append(f"delta = {self.delta:.12g}, T = {self.T:.12g}")
        out.append(f"strongly connected: {'yes' if self.strongly_connected else 'no'}")
        if self.constants is not None:
            c = self.constants
            out.append(f"lambda = {c.lam!r}, gamma = {c.gamma!r}, H = {c.H!r}")
        else:
            out.append(f"contraction constants: n/a ({self.constants_note})")
        return out


def check_graph(config_or_schedule) -> GraphReport:
    schedule = getattr(config_or_schedule, "schedule", config_or_schedule)
    balanced, unbalanced = [], {}
    for k, (_, g) in enumerate(schedule.segments):
        bad = unbalanced_nodes(g)
        balanced.append(not bad)
        unbalanced[k] = bad
    dg = delta_graph(schedule)
    connected = is_strongly_connected(dg.edges, schedule.n)
    report = GraphReport(schedule.n, balanced, unbalanced, sorted(dg.edges), dg.delta, dg.T, connected)
    try:
        report.constants = contraction_constants(schedule)
    except IneqflowError as exc:
        report.constants_note = str(exc)
    return report


def parse_pairs(spec: str):
    """
    ``"start:stop:num"`` -> all pairs ``s <= t`` from ``linspace(start, stop, num)``;
    otherwise ``"s,t;s,t;..."`` explicit pairs.
    """
    spec = spec.strip()
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid spec must be start:stop:num, got {spec!r}")
        start, stop, num = float(parts[0]), float(parts[1]), int(parts[2])
        if num < 1 or start < 0 or stop < start:
            raise ValueError(f"bad grid {spec!r}")
        grid = np.linspace(start, stop, num)
        return [(float(s), float(t)) for a, s in enumerate(grid) for t in grid[a:]]
    pairs = []
    for chunk in filter(None, (c.strip() for c in spec.split(";"))):
        s, t = (float(v) for v in chunk.split(","))
        if not t >= s >= 0:
            raise ValueError(f"pair {chunk!r} needs t >= s >= 0")
        pairs.append((s, t))
    if not pairs:
        raise ValueError("no pairs given")
    return pairs


def verify_bound(config_or_schedule, pairs, h=1e-3):
    schedule = getattr(config_or_schedule, "schedule", config_or_schedule)
    return analysis.verify_contraction_bound(schedule, pairs, h)


def bound_table(report):
    lines = [f"{'s':>8} {'t':>8} {'max|Phi-1/n|':>14} {'H*gamma^(t-s)':>16} {'slack':>12}  ok"]
    for p in report.pairs:
        lines.append(f"{p.s:8.3f} {p.t:8.3f} {p.deviation:14.6e} {p.bound:16.10f} "
                     f"{p.slack:12.4e}  {'yes' if p.passed else 'NO'}")
    lines.append(f"overall: {'pass' if report.passed else 'FAIL'}")
    return lines


def summary_lines(config, trace):
    diam = analysis.diameter(trace)
    t_cons = analysis.detect_consensus(trace, CONSENSUS_EPS)
    xbar = trace.final_state.mean(axis=0)
    lines = [
        f"experiment: {config.name} ({config.mode}, n={config.n}, m={config.m})",
        f"samples recorded: {len(trace)}, t_end = {trace.times[-1]:g}",
        "consensus time (eps=1e-2): " + ("not reached" if t_cons is None else f"{t_cons:g}"),
        f"final diameter: {diam[-1]:.6e}",
        "final average state: [" + ", ".join(f"{v:.6f}" for v in xbar) + "]",
    ]
    if isinstance(config.problem, ConstrainedOptProblem):
        z = trace.multipliers[-1]
        lines.append("final multipliers: [" + ", ".join(f"{v:.6f}" for v in z) + "]")
        lines.append(f"final Lagrangian at average state: {analysis.lagrangian(config.problem, xbar, z):.6f}")
    elif config.problem is not None:
        q = plus_sum(trace)
        lines.append(f"Q(0) = {q[0]:.6e}, Q(t_end) = {q[-1]:.6e}")
    if config.reference_point is not None:
        lines.append("reference point (published topology, comparison only): ["
                     + ", ".join(f"{v:g}" for v in config.reference_point) + "]")
    lines.extend(check_graph(config).lines())
    return lines
