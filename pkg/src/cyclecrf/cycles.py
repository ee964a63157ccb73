"""Triangles, chordless cycles and cycle-inequality checks."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple

import numpy as np

from ._backend import kernels
from .graph import EdgeGraph, join_components

MAX_CYCLE_NODES = 12


class Triangle(NamedTuple):
    edge_indices: tuple[int, int, int]  # (e_uv, e_vw, e_uw)
    node_ids: tuple[int, int, int]  # u < v < w


@dataclass(frozen=True)
class TriangleSet:
    """All triangles of a graph plus an edge-major incidence index.

    ``edges[t]`` holds the edge ids ``(e_uv, e_vw, e_uw)`` of triangle ``t``.
    Incidence arrays list, edge by edge and then by triangle id, which
    triangle contains the edge and at which slot.
    """

    nodes: np.ndarray
    edges: np.ndarray
    num_edges: int
    inc_edge: np.ndarray
    inc_tri: np.ndarray
    inc_slot: np.ndarray
    edge_ptr: np.ndarray

    def __len__(self) -> int:
        return len(self.nodes)

    def __getitem__(self, t: int) -> Triangle:
        return Triangle(tuple(int(x) for x in self.edges[t]), tuple(int(x) for x in self.nodes[t]))

    def __iter__(self):
        return (self[t] for t in range(len(self)))

    def triangles_of(self, edge: int) -> np.ndarray:
        return self.inc_tri[self.edge_ptr[edge]:self.edge_ptr[edge + 1]]

    @classmethod
    def from_arrays(cls, nodes, edges, num_edges: int) -> TriangleSet:
        nodes = np.asarray(nodes, dtype=np.int64).reshape(-1, 3)
        edges = np.ascontiguousarray(edges, dtype=np.int64).reshape(-1, 3)
        t = len(edges)
        flat_edge = edges.reshape(-1)
        flat_tri = np.repeat(np.arange(t, dtype=np.int64), 3)
        flat_slot = np.tile(np.arange(3, dtype=np.int64), t)
        order = np.lexsort((flat_tri, flat_edge))
        ptr = np.zeros(num_edges + 1, dtype=np.int64)
        np.cumsum(np.bincount(flat_edge, minlength=num_edges), out=ptr[1:])
        return cls(
            nodes, edges, num_edges,
            np.ascontiguousarray(flat_edge[order]),
            np.ascontiguousarray(flat_tri[order]),
            np.ascontiguousarray(flat_slot[order]),
            ptr,
        )


@dataclass(frozen=True)
class CycleStats:
    total_cycles: int
    invalid_relaxed: int
    invalid_rounded: int

    def as_dict(self) -> dict:
        return {
            "total_cycles": self.total_cycles,
            "invalid_relaxed": self.invalid_relaxed,
            "invalid_rounded": self.invalid_rounded,
        }


def enumerate_triangles(graph: EdgeGraph) -> TriangleSet:
    nodes, edges = kernels.enumerate_triangles(graph.num_nodes, graph.edges)
    return TriangleSet.from_arrays(nodes, edges, graph.num_edges)


def triangle_violated(values, mode: str = "relaxed") -> bool:
    """True if one value strictly exceeds the sum of the other two.

    In ``binary`` mode the values must be 0 or 1.
    """
    a, b, c = (float(x) for x in values)
    if mode == "binary":
        if any(x not in (0.0, 1.0) for x in (a, b, c)):
            raise ValueError("binary mode requires values in {0, 1}")
    elif mode != "relaxed":
        raise ValueError(f"unknown mode {mode!r}")
    return a > b + c or b > a + c or c > a + b


def violated_mask(values, triangles: TriangleSet) -> np.ndarray:
    """Per-triangle violation flags for per-edge values."""
    if len(triangles) == 0:
        return np.zeros(0, dtype=bool)
    v = np.asarray(values, dtype=np.float64)[triangles.edges]
    a, b, c = v[:, 0], v[:, 1], v[:, 2]
    return (a > b + c) | (b > a + c) | (c > a + b)


def round_marginals(marginals, threshold: float = 0.5) -> np.ndarray:
    return (np.asarray(marginals) >= threshold).astype(np.int8)


def count_invalid(marginals, triangles: TriangleSet, rounding_threshold: float = 0.5) -> CycleStats:
    marginals = np.asarray(marginals, dtype=np.float64)
    if len(marginals) != triangles.num_edges:
        raise ValueError("marginals length does not match number of edges")
    if not 0.0 < rounding_threshold < 1.0:
        raise ValueError("rounding threshold must lie in (0, 1)")
    relaxed = int(violated_mask(marginals, triangles).sum())
    rounded = int(violated_mask(round_marginals(marginals, rounding_threshold), triangles).sum())
    return CycleStats(len(triangles), relaxed, rounded)


def is_feasible(graph: EdgeGraph, labeling) -> bool:
    """True if the labeling induces a decomposition.

    Equivalently, no cut edge joins two nodes of the same join component.
    """
    labeling = np.asarray(labeling)
    comp = join_components(graph, labeling)
    if graph.num_edges == 0:
        return True
    cut = graph.edges[labeling != 0]
    return not np.any(comp[cut[:, 0]] == comp[cut[:, 1]])


def enumerate_chordless_cycles(graph: EdgeGraph, max_length: int | None = None) -> list[list[int]]:
    """Every chordless cycle of length 3..max_length, as edge-id lists.

    Each cycle is reported once in canonical form: it starts at its smallest
    node and continues toward the smaller of that node's two cycle neighbors.
    Only meant for small validation graphs.
    """
    n = graph.num_nodes
    if n > MAX_CYCLE_NODES:
        raise ValueError("graph too large for exhaustive cycle enumeration")
    if max_length is None:
        max_length = n
    max_length = min(max_length, n)
    adj: list[set[int]] = [set() for _ in range(n)]
    edge_id: dict[tuple[int, int], int] = {}
    for e, (u, v) in enumerate(graph.edges.tolist()):
        adj[u].add(v)
        adj[v].add(u)
        edge_id[(u, v)] = e
        edge_id[(v, u)] = e

    cycles: list[list[int]] = []

    def extend(path: list[int], on_path: set[int]):
        start, last = path[0], path[-1]
        for nxt in sorted(adj[last]):
            if nxt <= start or nxt in on_path:
                continue
            # nxt may only touch path nodes it is consecutive to (or the start)
            touching = adj[nxt] & on_path
            if touching - {last, start}:
                continue
            closes = start in touching
            if closes:
                if len(path) + 1 >= 3 and path[1] < nxt:
                    cyc = path + [nxt]
                    cycles.append([edge_id[(cyc[i], cyc[(i + 1) % len(cyc)])] for i in range(len(cyc))])
                continue
            if len(path) + 1 < max_length:
                on_path.add(nxt)
                path.append(nxt)
                extend(path, on_path)
                path.pop()
                on_path.discard(nxt)

    for s in range(n):
        for first in sorted(adj[s]):
            if first > s:
                extend([s, first], {s, first})
    return cycles


def cycle_satisfied(labeling, cycle: list[int]) -> bool:
    """Cycle inequality on one cycle: no cycle has exactly one cut edge."""
    return int(sum(int(labeling[e]) for e in cycle)) != 1


def brute_force_triangles(graph: EdgeGraph) -> list[tuple[int, int, int]]:
    """Triangles by scanning every node triple; an oracle for small graphs."""
    present = {tuple(e) for e in graph.edges.tolist()}
    return [
        (u, v, w)
        for u, v, w in combinations(range(graph.num_nodes), 3)
        if (u, v) in present and (v, w) in present and (u, w) in present
    ]
