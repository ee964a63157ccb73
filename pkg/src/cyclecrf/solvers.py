"""Multicut objectives and solvers: exact enumeration, rounding, greedy."""
from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .cycles import TriangleSet, is_feasible, round_marginals
from .graph import EdgeGraph, labeling_from_partition, partition_from_labeling

MAX_EXACT_NODES = 12


@dataclass(frozen=True)
class SolveResult:
    labeling: np.ndarray
    partition: np.ndarray
    objective_linear: float
    objective_cubic: float
    feasible: bool

    def summary(self) -> dict:
        return {
            "objective_linear": self.objective_linear,
            "objective_cubic": self.objective_cubic,
            "feasible": self.feasible,
            "num_components": int(self.partition.max()) + 1 if len(self.partition) else 0,
            "num_cut_edges": int(np.count_nonzero(self.labeling)),
        }


def objective_linear(graph: EdgeGraph, labeling) -> float:
    labeling = np.asarray(labeling)
    if len(labeling) != graph.num_edges:
        raise ValueError("labeling length does not match number of edges")
    return float(np.dot(graph.costs, labeling))


def invalid_triangle_count(triangles: TriangleSet, labeling) -> int:
    """Triangles with exactly one cut edge."""
    if len(triangles) == 0:
        return 0
    cuts = np.asarray(labeling)[triangles.edges].sum(axis=1)
    return int(np.count_nonzero(cuts == 1))


def objective_cubic(graph: EdgeGraph, triangles: TriangleSet, labeling, gamma: float) -> float:
    """Linear objective plus ``gamma`` per triangle with exactly one cut."""
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    return objective_linear(graph, labeling) + gamma * invalid_triangle_count(triangles, labeling)


def _result(graph, triangles, labeling, gamma) -> SolveResult:
    labeling = np.asarray(labeling, dtype=np.int8)
    partition = partition_from_labeling(graph, labeling)
    cubic = (
        objective_cubic(graph, triangles, labeling, gamma)
        if triangles is not None
        else objective_linear(graph, labeling)
    )
    return SolveResult(
        labeling, partition, objective_linear(graph, labeling), cubic, is_feasible(graph, labeling)
    )


def restricted_growth_strings(n: int) -> np.ndarray:
    """All set partitions of n items as restricted growth strings.

    Rows come out in lexicographic order; there are Bell(n) of them.
    """
    if n == 0:
        return np.zeros((1, 0), dtype=np.int8)
    rows = np.zeros((1, 1), dtype=np.int8)
    maxima = np.zeros(1, dtype=np.int8)
    for _ in range(1, n):
        counts = maxima.astype(np.int64) + 2
        parent = np.repeat(np.arange(len(rows)), counts)
        offsets = np.arange(len(parent)) - np.repeat(np.cumsum(counts) - counts, counts)
        child = offsets.astype(np.int8)
        rows = np.concatenate([rows[parent], child[:, None]], axis=1)
        maxima = np.maximum(maxima[parent], child)
    return rows


def solve_exact(graph: EdgeGraph, triangles: TriangleSet | None = None, gamma: float = 0.0,
                chunk: int = 1 << 18) -> SolveResult:
    """Global optimum by enumerating every node partition.

    Ties go to the lexicographically smallest partition vector.
    """
    n = graph.num_nodes
    if n > MAX_EXACT_NODES:
        raise ValueError("instance too large for exact solver")
    rgs = restricted_growth_strings(n)
    if graph.num_edges == 0:
        return _result(graph, triangles, np.zeros(0, dtype=np.int8), gamma)
    u, v = graph.edges[:, 0], graph.edges[:, 1]
    best_val, best_row = np.inf, 0
    for start in range(0, len(rgs), chunk):
        block = rgs[start:start + chunk]
        cut = (block[:, u] != block[:, v]).astype(np.float64)
        vals = cut @ graph.costs
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val, best_row = float(vals[i]), start + i
    labeling = labeling_from_partition(graph, rgs[best_row])
    return _result(graph, triangles, labeling, gamma)


def solve_bruteforce_labelings(graph: EdgeGraph) -> tuple[float, np.ndarray]:
    """Best feasible labeling over all 2^m labelings; a small-graph oracle."""
    m = graph.num_edges
    if m > 20:
        raise ValueError("too many edges for labeling enumeration")
    best, best_y = np.inf, None
    for code in range(1 << m):
        y = np.array([(code >> e) & 1 for e in range(m)], dtype=np.int8)
        val = float(np.dot(graph.costs, y))
        if val < best and is_feasible(graph, y):
            best, best_y = val, y
    return best, best_y


def round_and_repair(marginals, graph: EdgeGraph, threshold: float = 0.5,
                     triangles: TriangleSet | None = None, gamma: float = 0.0) -> SolveResult:
    """Threshold marginals, then repair via join-connected components.

    Any cut edge whose endpoints are still connected through join edges is
    turned back into a join.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    marginals = np.asarray(marginals, dtype=np.float64)
    if len(marginals) != graph.num_edges:
        raise ValueError("marginals length does not match number of edges")
    rounded = round_marginals(marginals, threshold)
    partition = partition_from_labeling(graph, rounded)
    return _result(graph, triangles, labeling_from_partition(graph, partition), gamma)


def greedy_contract(graph: EdgeGraph, triangles: TriangleSet | None = None,
                    gamma: float = 0.0) -> SolveResult:
    """Greedy additive edge contraction.

    Repeatedly joins the pair of clusters whose summed connecting cost is
    largest (joining saves that cost) while it is positive; parallel edges
    are summed on merge. Ties go to the smallest ``(u, v)``. The result is
    compared against the all-join labeling and the better one is returned.
    """
    n = graph.num_nodes
    adj: list[dict[int, float]] = [dict() for _ in range(n)]
    for (a, b), c in zip(graph.edges.tolist(), graph.costs.tolist()):
        adj[a][b] = c
        adj[b][a] = c
    heap = [(-c, a, b) for (a, b), c in zip(graph.edges.tolist(), graph.costs.tolist()) if c > 0]
    heapq.heapify(heap)
    alive = [True] * n
    parent = list(range(n))
    while heap:
        neg, a, b = heapq.heappop(heap)
        if not (alive[a] and alive[b]) or adj[a].get(b) != -neg:
            continue  # stale entry
        # keep the smaller id as representative
        keep, drop = (a, b) if a < b else (b, a)
        alive[drop] = False
        parent[drop] = keep
        del adj[keep][drop]
        for nbr, c in adj[drop].items():
            if nbr == keep:
                continue
            del adj[nbr][drop]
            total = adj[keep].get(nbr, 0.0) + c
            adj[keep][nbr] = total
            adj[nbr][keep] = total
        adj[drop] = {}
        for nbr, c in adj[keep].items():
            if c > 0:
                heapq.heappush(heap, (-c, min(keep, nbr), max(keep, nbr)))

    def root(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    partition = np.array([root(i) for i in range(n)], dtype=np.int64)
    labeling = labeling_from_partition(graph, partition)
    if objective_linear(graph, labeling) > 0.0:
        labeling = np.zeros(graph.num_edges, dtype=np.int8)
    return _result(graph, triangles, labeling, gamma)
