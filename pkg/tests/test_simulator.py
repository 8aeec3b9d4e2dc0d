import numpy as np
import pytest

from ineqflow.errors import DimensionMismatch, Interrupted, ModeMismatch, OutOfBox
from ineqflow.functions import Affine, ConvexQuadratic, HuberQuadratic, MaxOfAffine, PlusFunction
from ineqflow.gains import Constant, GeneralizedHarmonic, Harmonic
from ineqflow.graph_model import GraphSchedule, WeightedDigraph, ring_graph, two_ring_schedule
from ineqflow.simulator import (ConstrainedOptProblem, FeasibilityProblem, SimConfig, SimState,
                                feasibility_rhs, optimization_rhs, run, step,
                                tangent_cone_projection)

PAIR = GraphSchedule([(1.0, ring_graph(2, 1))])  # a_12 = a_21 = 1
SINGLE = GraphSchedule([(1.0, WeightedDigraph(np.zeros((1, 1))))])


def quadratic_opt(x_cap=50.0):
    # f = x^2 / 2, g = x - 1
    return ConstrainedOptProblem(1, [HuberQuadratic(1, 100)], [Affine([1], -1)], [x_cap])


class TestFeasibilityRhs:
    def test_consensus_fixed_point(self):
        prob = FeasibilityProblem(2, [Affine([1, 1], 0)] * 3)
        state = SimState(0.0, np.ones((3, 2)) * 0.7)
        assert np.array_equal(feasibility_rhs(state, two_ring_schedule(3, 1.0), prob, 0.0),
                              np.zeros((3, 2)))

    def test_two_agents(self):
        prob = FeasibilityProblem(1, [Affine([1], -10)] * 2)
        rhs = feasibility_rhs(SimState(0.0, [[0.0], [1.0]]), PAIR, prob, 0.0)
        assert np.array_equal(rhs, [[1.0], [-1.0]])

    def test_single_agent_descent(self):
        prob = FeasibilityProblem(1, [Affine([1], 0)])
        rhs = feasibility_rhs(SimState(0.0, [[2.0]]), SINGLE, prob, 0.5)
        assert rhs[0, 0] == -0.5

    def test_mixed_function_kinds(self):
        fs = [MaxOfAffine([[1, 0], [0, 1]], [0, 0]), ConvexQuadratic(np.eye(2), [0, 0], -1)]
        prob = FeasibilityProblem(2, fs)
        x = np.array([[2.0, 1.0], [0.1, 0.1]])
        rhs = feasibility_rhs(SimState(0.0, x), PAIR, prob, 1.0)
        expected = np.array([x[1] - x[0] - [1, 0], x[0] - x[1] - 0.0])
        assert np.allclose(rhs, expected, atol=0, rtol=0)

    def test_dimension_mismatch(self):
        prob = FeasibilityProblem(1, [Affine([1], 0)] * 2)
        with pytest.raises(DimensionMismatch):
            feasibility_rhs(SimState(0.0, np.zeros((3, 1))), PAIR, prob, 0.0)
        with pytest.raises(DimensionMismatch):
            FeasibilityProblem(2, [Affine([1], 0)])


class TestProjection:
    def test_cases(self):
        assert tangent_cone_projection(0, 50, -3) == 0
        assert tangent_cone_projection(50, 50, 2) == 0
        assert tangent_cone_projection(10, 50, -3) == -3
        assert tangent_cone_projection(0, 50, 3) == 3
        assert tangent_cone_projection(50, 50, -1) == -1

    def test_out_of_box(self):
        with pytest.raises(OutOfBox):
            tangent_cone_projection(-1e-9, 50, 1)
        with pytest.raises(OutOfBox):
            tangent_cone_projection(50.001, 50, 1)


class TestOptimizationRhs:
    def test_inactive_multipliers_stay(self):
        prob = ConstrainedOptProblem(1, [HuberQuadratic(1, 100)] * 3, [Affine([1], -5)] * 3, [1, 1, 1])
        state = SimState(0.0, [[0.0], [1.0], [2.0]], np.zeros(3))
        _, vz = optimization_rhs(state, two_ring_schedule(3, 1.0), prob, 0.7)
        assert np.array_equal(vz, np.zeros(3))

    def test_single_agent_at_origin(self):
        vx, vz = optimization_rhs(SimState(0.0, [[0.0]], [0.0]), SINGLE, quadratic_opt(), 1.0)
        assert vx[0, 0] == 0 and vz[0] == 0

    def test_single_agent_active(self):
        vx, vz = optimization_rhs(SimState(0.0, [[3.0]], [2.0]), SINGLE, quadratic_opt(), 1.0)
        assert vx[0, 0] == -5.0 and vz[0] == 2.0

    def test_requires_multipliers(self):
        with pytest.raises(ModeMismatch):
            optimization_rhs(SimState(0.0, [[3.0]]), SINGLE, quadratic_opt(), 1.0)

    def test_out_of_box_state(self):
        with pytest.raises(OutOfBox):
            optimization_rhs(SimState(0.0, [[3.0]], [60.0]), SINGLE, quadratic_opt(), 1.0)


class TestStep:
    def test_zero_rhs_only_advances_time(self):
        prob = FeasibilityProblem(1, [Affine([1], -10)] * 2)
        s = step(SimState(1.0, [[0.5], [0.5]]), PAIR, prob, Harmonic(1, 1), 1e-3)
        assert np.array_equal(s.x, [[0.5], [0.5]]) and s.t == 1.001

    def test_clamp_to_cap(self):
        # g(x) = x - 1 at x = 101 gives z velocity 100 * b
        s = step(SimState(0.0, [[101.0]], [49.999]), SINGLE, quadratic_opt(), Constant(1.0), 1e-3)
        assert s.z[0] == 50.0

    def test_two_agent_consensus(self):
        s = step(SimState(0.0, [[1.0], [-1.0]]), PAIR, None, Constant(0), 1e-3)
        assert np.allclose(s.x, [[0.998], [-0.998]], atol=1e-15, rtol=0)

    def test_gain_at_left_endpoint(self):
        prob = FeasibilityProblem(1, [Affine([1], 0)])
        s = step(SimState(3.0, [[2.0]]), SINGLE, prob, Harmonic(1, 1), 0.5)
        assert s.x[0, 0] == 2.0 - 0.5 * (1 / 4)


def feas_setup():
    prob = FeasibilityProblem(3, [Affine(c, d) for c, d in
                                  [([2, 3, 4], -0.1), ([2, -3, -4], -3), ([-2, 1, 0.5], -1),
                                   ([2, -1, 6], 2), ([1, 0, 2], 1)]])
    x0 = np.array([[1, -0.5, 1], [0, 2, 0], [-1, 1, 3], [2, 2, 2], [0.5, -1, -2]], dtype=float)
    return two_ring_schedule(5, 0.4), prob, x0


class TestRun:
    def test_zero_duration(self):
        sched, prob, x0 = feas_setup()
        tr = run(sched, prob, Harmonic(1, 1), SimConfig(t_end=0.0), SimState(0.0, x0))
        assert len(tr) == 1 and np.array_equal(tr.states[0], x0)

    def test_records_stride_and_final(self):
        sched, prob, x0 = feas_setup()
        tr = run(sched, prob, Harmonic(1, 1), SimConfig(t_end=1.0, h=0.01, record_stride=7),
                 SimState(0.0, x0))
        # 100 steps: samples at 0, 7, 14, ..., 98 and the final step
        assert len(tr) == 1 + 14 + 1
        assert tr.times[-1] == pytest.approx(1.0)
        assert np.all(np.diff(tr.times) > 0)

    def test_default_stride_caps_samples(self):
        cfg = SimConfig(t_end=300.0, h=1e-3)
        assert cfg.stride() == 4
        assert SimConfig(t_end=10.0).stride() == 1

    def test_switch_instants_are_step_boundaries(self):
        sched, prob, x0 = feas_setup()
        tr = run(sched, prob, Harmonic(1, 1), SimConfig(t_end=2.0, h=0.03, record_stride=1),
                 SimState(0.0, x0))
        for k in range(1, 10):
            assert np.min(np.abs(tr.times - 0.2 * k)) < 1e-12

    def test_determinism(self):
        sched, prob, x0 = feas_setup()
        cfg = SimConfig(t_end=3.0, record_stride=3)
        a = run(sched, prob, Harmonic(0.9, 5), cfg, SimState(0.0, x0))
        b = run(sched, prob, Harmonic(0.9, 5), cfg, SimState(0.0, x0))
        assert np.array_equal(a.states, b.states) and np.array_equal(a.times, b.times)

    def test_mean_identity(self):
        sched, prob, x0 = feas_setup()
        gain = Harmonic(2.0, 1.0)
        tr = run(sched, prob, gain, SimConfig(t_end=3.0, record_stride=1), SimState(0.0, x0))
        plus = [PlusFunction(g) for g in prob.constraints]
        worst = 0.0
        for k in range(len(tr) - 1):
            h = tr.times[k + 1] - tr.times[k]
            b = gain.value(tr.times[k])
            pred = -h * b / 5 * sum(p.subgradient(x) for p, x in zip(plus, tr.states[k]))
            actual = tr.states[k + 1].mean(axis=0) - tr.states[k].mean(axis=0)
            worst = max(worst, np.abs(actual - pred).max())
        assert worst <= 1e-9

    def test_consensus_only_monotone_hull(self):
        sched, prob, x0 = feas_setup()
        tr = run(sched, None, Constant(0), SimConfig(t_end=5.0, record_stride=1, mode="consensus-only"),
                 SimState(0.0, x0))
        lo, hi = tr.states.min(axis=1), tr.states.max(axis=1)
        assert np.all(np.diff(lo, axis=0) >= -1e-9)
        assert np.all(np.diff(hi, axis=0) <= 1e-9)
        assert np.abs(tr.states.mean(axis=1) - x0.mean(axis=0)).max() <= 1e-12

    def test_optimization_box(self):
        prob = ConstrainedOptProblem(1, [HuberQuadratic(w, 100) for w in (0.5, 0.3, 0.4)],
                                     [Affine([-1], 2), Affine([-1], 3), Affine([1], -10)],
                                     [0.5, 0.2, 5.0])
        tr = run(two_ring_schedule(3, 1.0), prob, Harmonic(3, 1),
                 SimConfig(t_end=20.0, mode="optimization", record_stride=1),
                 SimState(0.0, [[0.0], [-1.0], [1.0]], [0.0, 0.2, 5.0]))
        z = tr.multipliers
        assert np.all(z >= 0) and np.all(z <= prob.multiplier_caps)
        # the caps are small, so the clamp is exercised
        assert np.any(z[:, 0] == 0.5) and np.any(z[:, 1] == 0.2)

    def test_blow_up_interrupts(self):
        w = np.array([[0, 1e6], [1e6, 0]])
        sched = GraphSchedule([(1.0, WeightedDigraph(w))])
        prob = FeasibilityProblem(1, [Affine([1], -1)] * 2)
        with pytest.raises(Interrupted) as info:
            run(sched, prob, Harmonic(1, 1), SimConfig(t_end=1.0), SimState(0.0, [[1.0], [0.0]]))
        assert 0 < info.value.time < 1.0

    def test_rejects_inadmissible_gain(self):
        sched, prob, x0 = feas_setup()
        with pytest.raises(ValueError, match="consensus-only"):
            run(sched, prob, Constant(1.0), SimConfig(t_end=1.0), SimState(0.0, x0))

    def test_rejects_large_step(self):
        sched, prob, x0 = feas_setup()
        with pytest.raises(ValueError, match="segment"):
            run(sched, prob, Harmonic(1, 1), SimConfig(t_end=1.0, h=0.5), SimState(0.0, x0))

    def test_mode_checks(self):
        sched, prob, x0 = feas_setup()
        with pytest.raises(ModeMismatch):
            run(sched, prob, Harmonic(1, 1), SimConfig(t_end=1.0, mode="optimization"),
                SimState(0.0, x0))
        with pytest.raises(ModeMismatch):
            run(sched, prob, Harmonic(1, 1), SimConfig(t_end=1.0), SimState(0.0, x0, np.zeros(5)))

    def test_single_agent_allowed(self):
        prob = FeasibilityProblem(1, [Affine([1], -1)])
        # x' = -1/(t+1) until x <= 1; 3 - ln(11) < 1, so the flow stops within one step of 1
        tr = run(SINGLE, prob, Harmonic(1, 1), SimConfig(t_end=10.0), SimState(0.0, [[3.0]]))
        assert 1.0 - 1e-3 <= tr.states[-1, 0, 0] <= 1.0

    def test_inputs_not_mutated(self):
        sched, prob, x0 = feas_setup()
        init = SimState(0.0, x0)
        before = init.x.copy()
        run(sched, prob, Harmonic(1, 1), SimConfig(t_end=0.5), init)
        assert np.array_equal(init.x, before)


def test_fast_path_matches_generic_loop(rng):
    # an all-affine stack uses the vectorized path; wrapping one function in a
    # MaxOfAffine with a single piece forces the per-agent loop
    cs = rng.normal(size=(4, 2))
    ds = rng.normal(size=4)
    fast = FeasibilityProblem(2, [Affine(c, d) for c, d in zip(cs, ds)])
    slow = FeasibilityProblem(2, [MaxOfAffine([c], [d]) for c, d in zip(cs, ds)])
    for x in rng.normal(size=(50, 4, 2)):
        assert np.allclose(fast._g.values(x), slow._g.values(x), rtol=1e-14, atol=1e-15)
        assert np.array_equal(fast._g.plus_subgradients(x), slow._g.plus_subgradients(x))
    hub = [HuberQuadratic(w, 1.5) for w in (0.2, 0.7, 1.1)]
    fast_h = FeasibilityProblem(1, hub)
    for x in rng.uniform(-3, 3, size=(50, 3, 1)):
        loop_vals = [f.value(xi) for f, xi in zip(hub, x)]
        loop_grads = [f.subgradient(xi) for f, xi in zip(hub, x)]
        assert np.allclose(fast_h._g.values(x), loop_vals, rtol=1e-15, atol=0)
        assert np.array_equal(fast_h._g.subgradients(x), np.array(loop_grads))
