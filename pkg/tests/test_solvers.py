import itertools
import math

import numpy as np
import pytest

from cyclecrf import (
    EdgeGraph,
    enumerate_triangles,
    greedy_contract,
    is_feasible,
    objective_cubic,
    objective_linear,
    round_and_repair,
    solve_exact,
)
from cyclecrf.graph import partition_from_labeling
from cyclecrf.solvers import restricted_growth_strings, solve_bruteforce_labelings

from .conftest import complete_graph, graph_with_costs, random_graph

K3_PAIRS = [(0, 1), (0, 2), (1, 2)]


def bell(n):
    # Bell triangle
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


class TestObjectives:
    def test_linear(self):
        g = graph_with_costs(3, K3_PAIRS, [-2.0, 3.0, 3.0])
        assert objective_linear(g, [0, 0, 0]) == 0
        assert objective_linear(g, [1, 1, 0]) == pytest.approx(1.0)
        assert objective_linear(g, [1, 1, 1]) == pytest.approx(4.0)

    def test_cubic_examples(self):
        k3 = graph_with_costs(3, K3_PAIRS, [0.0, 0.0, 0.0])
        assert objective_cubic(k3, enumerate_triangles(k3), [1, 0, 0], 10.0) == 10.0
        k4 = graph_with_costs(4, list(itertools.combinations(range(4), 2)), np.zeros(6))
        y = np.zeros(6)
        y[0] = 1
        assert objective_cubic(k4, enumerate_triangles(k4), y, 10.0) == 20.0

    def test_cubic_rejects_negative_gamma(self):
        with pytest.raises(ValueError):
            objective_cubic(complete_graph(3), enumerate_triangles(complete_graph(3)), [0, 0, 0], -1)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            objective_linear(complete_graph(3), [0, 0])


class TestRestrictedGrowth:
    @pytest.mark.parametrize("n", range(0, 9))
    def test_counts_and_order(self, n):
        rows = restricted_growth_strings(n)
        assert len(rows) == bell(n)
        assert len({tuple(r) for r in rows.tolist()}) == len(rows)
        assert rows.tolist() == sorted(rows.tolist())
        for r in rows.tolist():
            assert all(r[i] <= max(r[:i], default=-1) + 1 for i in range(n))


class TestExact:
    def test_all_positive_costs(self):
        g = graph_with_costs(4, list(itertools.combinations(range(4), 2)), np.full(6, 2.0))
        r = solve_exact(g)
        assert r.objective_linear == 0 and r.partition.tolist() == [0, 0, 0, 0]

    def test_all_negative_costs(self):
        costs = -np.arange(1.0, 7.0)
        g = graph_with_costs(4, list(itertools.combinations(range(4), 2)), costs)
        r = solve_exact(g)
        assert r.partition.tolist() == [0, 1, 2, 3]
        assert r.objective_linear == pytest.approx(costs.sum())

    def test_k3_tempting_single_cut(self):
        g = graph_with_costs(3, K3_PAIRS, [-2.0, 3.0, 3.0])
        r = solve_exact(g)
        assert r.labeling.tolist() == [0, 0, 0] and r.objective_linear == 0 and r.feasible

    def test_ties_take_smallest_partition_vector(self):
        g = graph_with_costs(3, K3_PAIRS, [0.0, 0.0, 0.0])
        assert solve_exact(g).partition.tolist() == [0, 0, 0]

    def test_size_guard(self):
        with pytest.raises(ValueError, match="instance too large for exact solver"):
            solve_exact(EdgeGraph.from_edge_list(13, [(0, 1)]))

    def test_agrees_with_labeling_enumeration(self, rng):
        for _ in range(40):
            g = random_graph(rng, int(rng.integers(2, 6)), 0.8)
            g = graph_with_costs(g.num_nodes, g.edges, rng.normal(0, 2, g.num_edges))
            r = solve_exact(g)
            best, _ = solve_bruteforce_labelings(g)
            assert r.feasible
            assert r.objective_linear == pytest.approx(best, abs=1e-9)

    def test_cubic_objective_reported(self):
        g = graph_with_costs(3, K3_PAIRS, [1.0, 1.0, 1.0])
        r = solve_exact(g, enumerate_triangles(g), gamma=10.0)
        assert r.objective_cubic == r.objective_linear == 0.0


class TestRoundAndRepair:
    def test_single_cut_is_repaired(self):
        g = complete_graph(3)
        r = round_and_repair(np.array([0.9, 0.1, 0.1]), g)
        assert r.labeling.tolist() == [0, 0, 0] and r.feasible

    def test_constant_marginals(self, rng):
        g = random_graph(rng, 10, 0.5)
        assert round_and_repair(np.full(g.num_edges, 0.2), g).labeling.sum() == 0
        assert round_and_repair(np.full(g.num_edges, 0.5), g).labeling.sum() == g.num_edges

    def test_idempotent_on_feasible(self, rng):
        for _ in range(30):
            g = random_graph(rng, 9, 0.5)
            part = rng.integers(0, 3, g.num_nodes)
            y = (part[g.edges[:, 0]] != part[g.edges[:, 1]]).astype(float)
            r = round_and_repair(y, g)
            assert r.labeling.tolist() == y.astype(int).tolist()

    def test_always_feasible(self, rng):
        for _ in range(50):
            g = random_graph(rng, 12, 0.4)
            r = round_and_repair(rng.random(g.num_edges), g)
            assert r.feasible and is_feasible(g, r.labeling)
            assert r.partition.tolist() == partition_from_labeling(g, r.labeling).tolist()

    def test_bad_threshold(self):
        with pytest.raises(ValueError):
            round_and_repair([0.1, 0.1, 0.1], complete_graph(3), threshold=1.0)


class TestGreedy:
    def test_all_positive_costs_join_everything(self):
        g = graph_with_costs(4, list(itertools.combinations(range(4), 2)), np.full(6, 1.5))
        r = greedy_contract(g)
        assert r.labeling.sum() == 0 and r.objective_linear == 0

    def test_single_negative_edge_is_cut(self):
        g = graph_with_costs(2, [(0, 1)], [-5.0])
        r = greedy_contract(g)
        assert r.labeling.tolist() == [1] and r.objective_linear == pytest.approx(-5.0)

    def test_merges_on_aggregated_cost(self):
        # 0-1 strongly attractive, 2 attracted to the pair only in aggregate
        g = graph_with_costs(3, K3_PAIRS, [4.0, 1.0, -0.5])
        r = greedy_contract(g)
        assert r.partition.tolist() == [0, 0, 0]

    def test_never_worse_than_exact_or_all_join(self, rng):
        for _ in range(60):
            g = graph_with_costs(5, list(itertools.combinations(range(5), 2)), rng.normal(0, 2, 10))
            r = greedy_contract(g)
            assert r.feasible
            assert r.objective_linear <= 1e-12
            assert r.objective_linear >= solve_exact(g).objective_linear - 1e-9

    def test_feasible_on_grid_like_graphs(self, rng):
        for _ in range(10):
            g = random_graph(rng, 40, 0.15)
            assert greedy_contract(g, enumerate_triangles(g), 10.0).feasible


class TestCubicExactness:
    def test_penalty_counts_invalid_triangles(self, rng):
        for _ in range(200):
            g = random_graph(rng, int(rng.integers(3, 9)), 0.6)
            tris = enumerate_triangles(g)
            y = rng.integers(0, 2, g.num_edges)
            bad = sum(1 for t in tris if y[list(t.edge_indices)].sum() == 1)
            gamma = float(rng.uniform(0.1, 10))
            assert math.isclose(objective_cubic(g, tris, y, gamma), objective_linear(g, y) + gamma * bad,
                                rel_tol=1e-12, abs_tol=1e-12)
