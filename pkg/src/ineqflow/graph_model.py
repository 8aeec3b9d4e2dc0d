"""
Time-varying weighted digraphs.

A communication topology is a periodic, piecewise-constant sequence of
weighted digraphs.  Entry ``weights[i, j]`` is the weight a_ij of the edge
j -> i, i.e. the weight with which agent ``i`` listens to agent ``j``.
Agent indices are 0-based throughout the library; the config files and the
CLI output use 1-based indices.
"""

import math
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .errors import DegenerateNetwork, NotBalanced, NotConnected

# relative tolerance used to snap times onto switch instants
_SNAP = 1e-9


@dataclass(frozen=True, eq=False)
class WeightedDigraph:
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 1:
            raise ValueError(f"weights must be a non-empty square matrix, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if np.any(np.diag(w) != 0):
            raise ValueError("self-loops are not allowed (diagonal must be zero)")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def from_edges(cls, n, edges):
        """Build from ``(source, target, weight)`` triples (0-based)."""
        w = np.zeros((n, n))
        for src, dst, weight in edges:
            w[dst, src] += weight
        return cls(w)

    def edges(self):
        """Edges as a set of ``(source, target)`` pairs with positive weight."""
        dst, src = np.nonzero(self.weights)
        return {(int(j), int(i)) for i, j in zip(dst, src)}

    def __eq__(self, other):
        if not isinstance(other, WeightedDigraph):
            return NotImplemented
        return np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash(self.weights.tobytes())


class GraphSchedule:
    """
    Periodic piecewise-constant graph sequence.

    Parameters
    ----------
    segments : sequence of (float, WeightedDigraph)
        ``(duration, graph)`` pairs in the order they are active within one
        period.  The schedule repeats with period ``sum(durations)``.

    Notes
    -----
    The schedule is right-continuous: at a switch instant the graph of the
    segment that starts there is active.
    """

    def __init__(self, segments):
        segments = tuple((float(d), g) for d, g in segments)
        if not segments:
            raise ValueError("a schedule needs at least one segment")
        n = segments[0][1].n
        for k, (d, g) in enumerate(segments):
            if not (d > 0 and math.isfinite(d)):
                raise ValueError(f"segment {k}: duration must be positive, got {d}")
            if not isinstance(g, WeightedDigraph):
                raise TypeError(f"segment {k}: expected WeightedDigraph")
            if g.n != n:
                raise ValueError(f"segment {k}: graph has {g.n} agents, expected {n}")
        self.segments = segments
        self.n = n
        self.durations = np.array([d for d, _ in segments])
        self.period = float(self.durations.sum())
        # offsets[k] = start of segment k within a period; offsets[-1] = period
        self.offsets = np.concatenate([[0.0], np.cumsum(self.durations)])
        self.offsets[-1] = self.period
        self._laplacians = tuple(laplacian(g) for _, g in segments)

    def __repr__(self):
        return f"GraphSchedule(n={self.n}, segments={len(self.segments)}, period={self.period:g})"

    @property
    def min_duration(self) -> float:
        return float(self.durations.min())

    def locate(self, t):
        """Return ``(p, k)``: the period number and segment index active at ``t``."""
        if t < 0:
            raise ValueError(f"t must be nonnegative, got {t}")
        tol = _SNAP * self.period
        p = math.floor(t / self.period)
        phase = t - p * self.period
        if phase >= self.period - tol:
            p, phase = p + 1, 0.0
        elif phase < 0:
            p, phase = p - 1, phase + self.period
        # right-continuous; a phase within tol below a boundary counts as on it
        k = int(np.searchsorted(self.offsets, phase + tol, side="right")) - 1
        return p, min(max(k, 0), len(self.segments) - 1)

    def segment_laplacian(self, k):
        return self._laplacians[k]

    def iter_steps(self, t0, t1, h) -> Iterator[tuple]:
        """
        Yield ``(t, h_eff, k)`` fixed steps covering ``[t0, t1]``.

        Each step starts at ``t``, has length ``h_eff <= h`` and lies entirely
        inside segment ``k``; every switch instant in the interval is a step
        boundary.  Within a segment window the span is split into
        ``ceil(span / h)`` equal substeps.
        """
        if h <= 0:
            raise ValueError("h must be positive")
        if t1 <= t0:
            return
        tol = _SNAP * self.period
        p, k = self.locate(t0)
        start = t0
        nseg = len(self.segments)
        while start < t1 - tol:
            seg_end = p * self.period + self.offsets[k + 1]
            end = min(seg_end, t1)
            span = end - start
            if span > tol:
                steps = max(1, math.ceil(span / h - 1e-9))
                h_eff = span / steps
                for j in range(steps):
                    yield start + j * h_eff, h_eff, k
            start = end
            k += 1
            if k == nseg:
                k, p = 0, p + 1

    def shifted(self, offset):
        """The schedule ``t -> G(t + offset)``, re-cut to start at phase 0."""
        if offset < 0:
            raise ValueError("offset must be nonnegative")
        p, k = self.locate(offset)
        phase = offset - p * self.period
        first_left = self.offsets[k + 1] - phase
        segments = [(first_left, self.segments[k][1])]
        segments += list(self.segments[k + 1:]) + list(self.segments[:k])
        cut = phase - self.offsets[k]
        if cut > _SNAP * self.period:
            segments.append((cut, self.segments[k][1]))
        return GraphSchedule(segments)


def adjacency_at(schedule: GraphSchedule, t: float) -> WeightedDigraph:
    """Graph active at time ``t`` (switch instants belong to the new segment)."""
    return schedule.segments[schedule.locate(t)[1]][1]


def laplacian(g: WeightedDigraph) -> np.ndarray:
    """Return ``L`` with ``L[i, i] = sum_j a_ij`` and ``L[i, j] = -a_ij``."""
    L = -np.array(g.weights)
    np.fill_diagonal(L, 0.0)
    np.fill_diagonal(L, -L.sum(axis=1))
    return L


def is_balanced(schedule: GraphSchedule, tol: float = 1e-12) -> bool:
    for _, g in schedule.segments:
        w = g.weights
        if np.any(np.abs(w.sum(axis=1) - w.sum(axis=0)) > tol):
            return False
    return True


def unbalanced_nodes(g: WeightedDigraph, tol: float = 1e-12):
    """0-based nodes whose in-weight differs from their out-weight."""
    w = g.weights
    return [int(i) for i in np.nonzero(np.abs(w.sum(axis=1) - w.sum(axis=0)) > tol)[0]]


class DeltaGraph(NamedTuple):
    edges: frozenset
    delta: float
    T: float


def delta_graph(schedule: GraphSchedule) -> DeltaGraph:
    """
    Edges whose weight integrates to a positive amount over one period.

    With ``T`` equal to the period, the window integral of every edge does
    not depend on where the window starts, so the returned ``delta`` (the
    smallest such integral) holds for every window.  An empty edge set is
    returned with ``delta = 0``.
    """
    integral = np.zeros((schedule.n, schedule.n))
    for d, g in schedule.segments:
        integral += d * g.weights
    dst, src = np.nonzero(integral > 0)
    edges = frozenset((int(j), int(i)) for i, j in zip(dst, src))
    delta = float(integral[dst, src].min()) if edges else 0.0
    return DeltaGraph(edges, delta, schedule.period)


def strongly_connected_components(edges, n):
    """Tarjan's algorithm, iterative.  Returns a list of node lists."""
    succ = [[] for _ in range(n)]
    for u, v in edges:
        succ[u].append(v)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack = []
    comps = []
    counter = 0
    for root in range(n):
        if index[root] >= 0:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, i = work[-1]
            if i < len(succ[v]):
                work[-1] = (v, i + 1)
                w = succ[v][i]
                if index[w] < 0:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(comp)
    return comps


def is_strongly_connected(edges, n) -> bool:
    if n < 1:
        return False
    return len(strongly_connected_components(edges, n)) == 1


@dataclass(frozen=True)
class ContractionConstants:
    """Geometric contraction constants of the consensus flow.

    ``lam = 1 - 1/(8 n^2)^floor(n/2)``, ``H = 1/lam`` and
    ``gamma = lam^(1 / ((floor(1/delta) + 1) * floor(n/2) * T))``.
    For large ``n`` ``lam`` rounds to 1.0 in double precision and the
    bound becomes vacuous.
    """

    lam: float
    gamma: float
    H: float
    delta: float
    T: float
    n: int

    @classmethod
    def from_parameters(cls, n, delta, T):
        n = int(n)
        half = n // 2
        if half == 0:
            raise DegenerateNetwork("contraction constants need at least two agents")
        if not (delta > 0 and T > 0):
            raise ValueError("delta and T must be positive")
        lam = 1.0 - 1.0 / float(8 * n * n) ** half
        gamma = lam ** (1.0 / ((math.floor(1.0 / delta) + 1) * half * T))
        return cls(lam=lam, gamma=gamma, H=1.0 / lam, delta=float(delta), T=float(T), n=n)

    def bound(self, elapsed):
        """``H * gamma**elapsed``."""
        return self.H * self.gamma ** elapsed


def contraction_constants(schedule: GraphSchedule) -> ContractionConstants:
    if schedule.n // 2 == 0:
        raise DegenerateNetwork("contraction constants need at least two agents")
    if not is_balanced(schedule):
        raise NotBalanced("schedule is not balanced")
    dg = delta_graph(schedule)
    if not is_strongly_connected(dg.edges, schedule.n):
        raise NotConnected("delta-graph is not strongly connected")
    return ContractionConstants.from_parameters(schedule.n, dg.delta, dg.T)


def transition_matrix(schedule: GraphSchedule, s: float, t: float, h: float = 1e-3) -> np.ndarray:
    """
    State-transition matrix of ``y' = -L(t) y`` from ``s`` to ``t``.

    Integrated with forward Euler on switch-aligned substeps, so that
    ``Phi`` is exactly row-stochastic up to rounding, and column-stochastic
    too when every segment graph is balanced.
    """
    if not t >= s >= 0:
        raise ValueError(f"need t >= s >= 0, got s={s}, t={t}")
    phi = np.eye(schedule.n)
    for _, h_eff, k in schedule.iter_steps(s, t, h):
        phi = phi - h_eff * (schedule.segment_laplacian(k) @ phi)
    return phi


def ring_graph(n, offset, weight=1.0) -> WeightedDigraph:
    """Directed ring with edges ``i -> (i + offset) mod n``."""
    if offset % n == 0:
        raise ValueError("offset must not be a multiple of n")
    return WeightedDigraph.from_edges(n, [(i, (i + offset) % n, weight) for i in range(n)])


def two_ring_schedule(n, period, offsets=(1, 2)) -> GraphSchedule:
    """
    Alternate two unit-weight directed rings, each active for half a period.

    The default uses the ring over offset 1 and the ring over offset 2.
    Every ring is balanced (in- and out-degree one at each node) and their
    union is strongly connected.
    """
    return GraphSchedule([(period / 2, ring_graph(n, off)) for off in offsets])
