import math
import warnings

import numpy as np
import pytest

from cyclecrf import (
    CoolingState,
    EdgeGraph,
    FitOptions,
    MeanFieldConfig,
    PotentialParams,
    enumerate_triangles,
    fit_costs,
    meanfield_step,
    phi,
    run_meanfield,
    softmax_with_temperature,
    unary_potential,
)
from cyclecrf.meanfield import binary_cross_entropy

from .conftest import complete_graph, random_graph
from .oracles import reference_step


class TestPhi:
    def test_examples(self):
        assert phi(0.8, 2) == pytest.approx(0.96)
        assert phi(0.3, 3) == pytest.approx(0.027)
        assert phi(0.5, 2) == 0.75

    def test_identity_at_k1(self):
        q = np.linspace(0, 1, 101)
        assert np.array_equal(phi(q, 1.0), q)

    def test_fixed_points(self):
        for k in (1.0, 1.05, 2.0, 7.3):
            assert phi(0.0, k) == 0.0 and phi(1.0, k) == 1.0


class TestUnaryAndSoftmax:
    def test_unary_examples(self):
        assert unary_potential(0.5, 0) == unary_potential(0.5, 1) == pytest.approx(0.6931, abs=1e-4)
        assert unary_potential(0.9, 1) == pytest.approx(0.1054, abs=1e-4)
        assert unary_potential(0.9, 0) == pytest.approx(2.3026, abs=1e-4)

    def test_unary_rejects_bad_label(self):
        with pytest.raises(ValueError):
            unary_potential(0.5, 2)

    def test_softmax_examples(self):
        np.testing.assert_allclose(softmax_with_temperature([0, 0], 1), [0.5, 0.5])
        np.testing.assert_allclose(softmax_with_temperature([1, 0], 0.5), [0.8808, 0.1192], atol=1e-4)
        np.testing.assert_allclose(softmax_with_temperature([1, 0], 1e-3), [1, 0], atol=1e-12)

    def test_softmax_large_inputs(self):
        out = softmax_with_temperature([1e4, -1e4], 0.05)
        assert np.all(np.isfinite(out)) and out.sum() == 1.0

    def test_softmax_rejects_nonpositive_t(self):
        with pytest.raises(ValueError):
            softmax_with_temperature([0, 0], 0)


class TestParams:
    def test_text_round_trip(self):
        p = PotentialParams((0.1, -0.2, 0.3), 12.5, 0.7)
        assert PotentialParams.from_text(p.to_text()) == p

    def test_warns_when_max_not_largest(self):
        with pytest.warns(RuntimeWarning):
            PotentialParams((0.0, 20.0, 0.0), 10.0)

    def test_cooling_validation(self):
        with pytest.raises(ValueError):
            CoolingState("bogus")
        with pytest.raises(ValueError):
            CoolingState(increment=0)


K3 = complete_graph(3)  # edges (0,1), (0,2), (1,2)


class TestStep:
    def test_zero_potentials_are_neutral(self, rng):
        g = random_graph(rng, 12, 0.6)
        q = meanfield_step(g.probs, g, enumerate_triangles(g), PotentialParams((0, 0, 0), 0.0), CoolingState())
        np.testing.assert_allclose(q, g.probs, atol=1e-12)

    def test_one_neighbor_cut(self):
        # edge 0 sees neighbors at q = 1 and q = 0
        g = EdgeGraph.from_edge_list(3, [(0, 1), (0, 2), (1, 2)], [0.5, 1.0, 0.0])
        params = PotentialParams((0, 0, 0), 10.0, 0.0)
        q = meanfield_step(np.array([0.5, 1.0, 0.0]), g, enumerate_triangles(g), params, CoolingState())
        assert q[0] == pytest.approx(1.0 / (1.0 + math.exp(-10.0)), rel=1e-12)

    def test_both_neighbors_cut(self):
        g = K3
        params = PotentialParams((0, 0, 0), 10.0, 0.0)
        q = meanfield_step(np.array([0.5, 1.0, 1.0]), g, enumerate_triangles(g), params, CoolingState())
        assert q[0] == pytest.approx(0.5, abs=1e-12)

    @pytest.mark.parametrize("schedule,k_steps,t_steps", [
        ("none", 0, 0), ("adaptive_phi", 7, 0), ("softmax_linear", 0, 9), ("softmax_adaptive", 0, 4),
    ])
    def test_matches_pattern_enumeration(self, rng, schedule, k_steps, t_steps):
        for _ in range(5):
            g = random_graph(rng, int(rng.integers(4, 10)), 0.7)
            params = PotentialParams(tuple(rng.uniform(-1, 1, 3)), float(rng.uniform(2, 6)), float(rng.uniform(0, 2)))
            cooling = CoolingState(schedule, k_steps=k_steps, t_steps=t_steps)
            q = rng.random(g.num_edges)
            got = meanfield_step(q, g, enumerate_triangles(g), params, cooling)
            k = cooling.k if schedule == "adaptive_phi" else 1.0
            t = cooling.t if schedule.startswith("softmax") else 1.0
            np.testing.assert_allclose(got, reference_step(q, g, params, k, t), rtol=1e-11, atol=1e-13)

    def test_adaptive_at_k1_equals_plain(self, rng):
        for _ in range(100):
            g = random_graph(rng, int(rng.integers(3, 9)), 0.6)
            tris = enumerate_triangles(g)
            params = PotentialParams(tuple(rng.uniform(-1, 1, 3)), float(rng.uniform(1, 10)))
            q = rng.random(g.num_edges)
            a = meanfield_step(q, g, tris, params, CoolingState("adaptive_phi"))
            b = meanfield_step(q, g, tris, params, CoolingState("none"))
            np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)

    def test_jacobi_order_independence(self, rng):
        g = random_graph(rng, 10, 0.7)
        params = PotentialParams((0.2, 0.1, 0.3), 5.0)
        q = rng.random(g.num_edges)
        base = meanfield_step(q, g, enumerate_triangles(g), params, CoolingState())
        perm = rng.permutation(g.num_edges)
        gp = EdgeGraph(g.num_nodes, g.edges[perm], g.probs[perm])
        permuted = meanfield_step(q[perm], gp, enumerate_triangles(gp), params, CoolingState())
        np.testing.assert_allclose(permuted, base[perm], rtol=1e-13)

    def test_thread_count_does_not_change_bits(self, rng):
        g = random_graph(rng, 40, 0.4)
        tris = enumerate_triangles(g)
        q = rng.random(g.num_edges)
        params = PotentialParams((0.1, 0.2, 0.3), 4.0)
        outs = [meanfield_step(q, g, tris, params, CoolingState(), num_threads=n) for n in (1, 2, 8)]
        assert all(np.array_equal(outs[0], o) for o in outs[1:])

    def test_overflow_is_reported(self):
        g = K3
        params = PotentialParams((0, 0, 0), math.inf, 1.0)
        with pytest.raises(FloatingPointError, match="potential overflow"):
            meanfield_step(np.array([0.9, 0.1, 0.1]), g, enumerate_triangles(g), params, CoolingState())

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            meanfield_step(np.zeros(2), K3, enumerate_triangles(K3), PotentialParams(), CoolingState())


class TestRun:
    def test_zero_iterations(self, rng):
        g = random_graph(rng, 8, 0.6)
        q0 = rng.random(g.num_edges)
        q, traj = run_meanfield(g, q0, enumerate_triangles(g), PotentialParams(), MeanFieldConfig(0))
        assert np.array_equal(q, q0) and len(traj) == 1

    def test_k_grows_when_threshold_always_met(self, rng):
        g = random_graph(rng, 8, 0.6)
        cfg = MeanFieldConfig(20, CoolingState("adaptive_phi", threshold_a=math.inf))
        _, traj = run_meanfield(g, g.probs, enumerate_triangles(g), PotentialParams(), cfg)
        assert [r.k for r in traj] == [1.0 + 0.05 * n for n in range(21)]
        assert all(r.t == 1.0 for r in traj)

    def test_k_stays_when_threshold_never_met(self, rng):
        g = complete_graph(6, rng.random(15))
        cfg = MeanFieldConfig(10, CoolingState("adaptive_phi", threshold_a=0))
        _, traj = run_meanfield(g, g.probs, enumerate_triangles(g), PotentialParams(), cfg)
        assert all(r.k == 1.0 for r in traj)

    def test_temperature_decays_to_floor(self):
        g = K3.with_probs([0.9, 0.1, 0.1])
        cfg = MeanFieldConfig(25, CoolingState("softmax_linear"))
        _, traj = run_meanfield(g, g.probs, enumerate_triangles(g), PotentialParams(), cfg)
        assert [r.t for r in traj[:4]] == [1.0, 0.95, 0.9, 0.85]
        assert traj[-1].t == 0.05 and min(r.t for r in traj) == 0.05

    def test_softmax_adaptive_respects_condition(self, rng):
        g = complete_graph(6, rng.random(15))
        never = MeanFieldConfig(5, CoolingState("softmax_adaptive", threshold_a=0))
        always = MeanFieldConfig(5, CoolingState("softmax_adaptive", threshold_a=math.inf))
        tris = enumerate_triangles(g)
        assert run_meanfield(g, g.probs, tris, PotentialParams(), never)[1][-1].t == 1.0
        assert run_meanfield(g, g.probs, tris, PotentialParams(), always)[1][-1].t == pytest.approx(0.75)

    @pytest.mark.parametrize("schedule", ["none", "adaptive_phi", "softmax_linear", "softmax_adaptive"])
    def test_single_violated_triangle_is_fixed(self, schedule):
        g = K3.with_probs([0.9, 0.1, 0.1])
        cfg = MeanFieldConfig(20, CoolingState(schedule))
        q, traj = run_meanfield(g, g.probs, enumerate_triangles(g), PotentialParams(), cfg)
        assert traj[0].stats.invalid_relaxed == 1
        assert traj[-1].stats.invalid_relaxed == 0 and traj[-1].stats.invalid_rounded == 0

    def test_trajectory_objectives(self):
        g = K3.with_probs([0.9, 0.1, 0.1])
        _, traj = run_meanfield(g, g.probs, enumerate_triangles(g), PotentialParams(), MeanFieldConfig(0))
        lin = float(g.costs[0])
        assert traj[0].objective_linear == pytest.approx(lin)
        assert traj[0].objective_cubic == pytest.approx(lin + 10.0)

    def test_marginals_stay_normalized(self, rng):
        g = random_graph(rng, 20, 0.5)
        cfg = MeanFieldConfig(10, CoolingState("softmax_linear"))
        q, _ = run_meanfield(g, g.probs, enumerate_triangles(g), PotentialParams((0, 0, 0), 50.0), cfg)
        assert np.all((q >= 0) & (q <= 1))


def _fit_instances(seed, count=3, n=7):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        labels = rng.integers(0, 2, n)
        g = complete_graph(n)
        y = (labels[g.edges[:, 0]] != labels[g.edges[:, 1]]).astype(np.int8)
        p = np.clip(0.5 + 0.2 * (2 * y - 1) + rng.uniform(-0.3, 0.3, len(y)), 0, 1)
        out.append((g.with_probs(p), p, y))
    return out


class TestFit:
    def test_zero_iterations_returns_initial(self):
        init = PotentialParams((0.1, 0.2, 0.3), 5.0)
        out = fit_costs(_fit_instances(0), MeanFieldConfig(5), FitOptions(iterations=0), init)
        assert out == init

    def test_empty_instances(self):
        with pytest.raises(ValueError):
            fit_costs([], MeanFieldConfig(5))

    @pytest.mark.parametrize("granularity", ["per_iteration", "per_epoch"])
    def test_loss_never_increases(self, granularity):
        history = []
        cfg = MeanFieldConfig(5, CoolingState("adaptive_phi", threshold_a=5), granularity)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            fitted = fit_costs(_fit_instances(1), cfg, FitOptions(iterations=6), PotentialParams(), history)
        assert len(history) >= 1
        if granularity == "per_iteration":
            assert all(b < a for a, b in zip(history, history[1:]))
            assert history[-1] <= history[0]
        assert np.all(np.isfinite(fitted.gamma_valid))

    def test_gradient_sign_matches_secant(self):
        # loss as a function of gamma_max alone
        insts = _fit_instances(2)
        cfg = MeanFieldConfig(5)

        def loss(gmax):
            total = 0.0
            for g, q0, y in insts:
                q, _ = run_meanfield(g, q0, enumerate_triangles(g), PotentialParams((0, 0, 0), gmax), cfg)
                total += binary_cross_entropy(q, y)
            return total / len(insts)

        for g0 in (1.0, 3.0, 6.0):
            h = 1e-3
            fd = (loss(g0 + h) - loss(g0 - h)) / (2 * h)
            secant = (loss(g0 + 10 * h) - loss(g0 - 10 * h)) / (20 * h)
            assert np.sign(fd) == np.sign(secant)

    def test_binary_cross_entropy(self):
        assert binary_cross_entropy([0.5, 0.5], [0, 1]) == pytest.approx(math.log(2))
