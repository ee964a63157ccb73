"""Multicut instances on pixel grids.

An :class:`EdgeGraph` holds the node count, the undirected edge list
(``u < v``), a cut probability per edge and the derived signed cost.
Labelings and partitions are plain integer numpy arrays.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

EPS = 1e-6

# undirected 8-connectivity directions as (drow, dcol): E, SE, S, SW
DIRECTIONS: tuple[tuple[int, int], ...] = ((0, 1), (1, 1), (1, 0), (1, -1))


@dataclass(frozen=True)
class EdgeMap:
    """Per-pixel edge strength in [0, 1], stored as a (height, width) array."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise ValueError("edge map must be two-dimensional")
        if values.size and (not np.all(np.isfinite(values)) or values.min() < 0.0 or values.max() > 1.0):
            raise ValueError("edge map values must lie in [0, 1]")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_flat(cls, height: int, width: int, values) -> EdgeMap:
        flat = np.asarray(values, dtype=np.float64)
        if flat.size != height * width:
            raise ValueError(f"expected {height * width} values, got {flat.size}")
        return cls(flat.reshape(height, width))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class GridConfig:
    min_distance: int = 2
    max_distance: int = 8
    directions: tuple[tuple[int, int], ...] = DIRECTIONS

    def __post_init__(self):
        if not 1 <= self.min_distance <= self.max_distance:
            raise ValueError("need 1 <= min_distance <= max_distance")


@dataclass(frozen=True)
class EdgeGraph:
    """Undirected multicut instance.

    ``edges`` is an (m, 2) int array with ``u < v`` in every row. ``costs``
    default to :func:`probs_to_costs` of ``probs``.
    """

    num_nodes: int
    edges: np.ndarray
    probs: np.ndarray
    costs: np.ndarray = field(default=None)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        probs = np.asarray(self.probs, dtype=np.float64).reshape(-1)
        costs = probs_to_costs(probs) if self.costs is None else np.asarray(self.costs, dtype=np.float64).reshape(-1)
        m = len(edges)
        if len(probs) != m or len(costs) != m:
            raise ValueError("probs and costs must have one entry per edge")
        if m:
            if edges.min() < 0 or edges.max() >= self.num_nodes:
                raise ValueError("edge endpoint out of range")
            if np.any(edges[:, 0] >= edges[:, 1]):
                raise ValueError("edges must satisfy u < v (no self-loops)")
            keys = edges[:, 0] * self.num_nodes + edges[:, 1]
            if len(np.unique(keys)) != m:
                raise ValueError("duplicate edge")
            if probs.min() < 0.0 or probs.max() > 1.0:
                raise ValueError("probabilities must lie in [0, 1]")
        for arr in (edges, probs, costs):
            arr.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "costs", costs)

    @classmethod
    def from_edge_list(cls, num_nodes: int, edges, probs=None, costs=None) -> EdgeGraph:
        """Build a graph from arbitrary (u, v) pairs, normalizing orientation.

        Missing probabilities default to 0.5.
        """
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        edges = np.sort(edges, axis=1)
        if probs is None:
            probs = np.full(len(edges), 0.5)
        return cls(num_nodes, edges, probs, costs)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def with_probs(self, probs) -> EdgeGraph:
        """Same topology, new probabilities, costs recomputed."""
        return EdgeGraph(self.num_nodes, self.edges, np.clip(probs, 0.0, 1.0))


def probs_to_costs(p, eps: float = EPS):
    """Logit cost ``log((1 - p) / p)`` with p clamped to [eps, 1 - eps].

    Positive probability of a cut above 0.5 gives a negative cost, so the
    minimizer prefers to cut.
    """
    p = np.clip(np.asarray(p, dtype=np.float64), eps, 1.0 - eps)
    out = np.log1p(-p) - np.log(p)
    return float(out) if out.ndim == 0 else out


def line_pixels(i: tuple[int, int], j: tuple[int, int]) -> list[tuple[int, int]]:
    """Integer raster line between pixels i and j, both endpoints included.

    The line is always traced from the lexicographically smaller pixel so
    that ``line_pixels(i, j)`` and ``line_pixels(j, i)`` cover the same set.
    """
    if tuple(j) < tuple(i):
        i, j = j, i
    r0, c0 = i
    r1, c1 = j
    dr, dc = abs(r1 - r0), abs(c1 - c0)
    sr = 1 if r1 >= r0 else -1
    sc = 1 if c1 >= c0 else -1
    out = []
    r, c = r0, c0
    if dc >= dr:
        err = 2 * dr - dc
        for _ in range(dc + 1):
            out.append((r, c))
            if err > 0:
                r += sr
                err -= 2 * dc
            err += 2 * dr
            c += sc
    else:
        err = 2 * dc - dr
        for _ in range(dr + 1):
            out.append((r, c))
            if err > 0:
                c += sc
                err -= 2 * dr
            err += 2 * dc
            r += sr
    return out


def icc_weight(edge_map: EdgeMap, i: tuple[int, int], j: tuple[int, int]) -> float:
    """Intervening contour cue: max edge strength on the line from i to j."""
    h, w = edge_map.values.shape
    for r, c in (i, j):
        if not (0 <= r < h and 0 <= c < w):
            raise IndexError(f"pixel {(r, c)} outside {h}x{w} edge map")
    return float(max(edge_map.values[r, c] for r, c in line_pixels(i, j)))


def build_grid_graph(edge_map: EdgeMap, config: GridConfig = GridConfig()) -> EdgeGraph:
    """Pixel graph with long-range 8-connectivity edges weighted by ICC.

    Edge order is row-major by source pixel, then direction, then distance.
    """
    values = edge_map.values
    h, w = values.shape
    if h * w == 0:
        raise ValueError("empty edge map")
    ids = np.arange(h * w, dtype=np.int64).reshape(h, w)
    distances = range(config.min_distance, config.max_distance + 1)

    # blocks[(d, s)] -> (sources, targets, probs); sources are sorted ascending
    blocks = []
    for d_index, (dr, dc) in enumerate(config.directions):
        for s_index, s in enumerate(distances):
            r_lo, r_hi = max(0, -dr * s), min(h, h - dr * s)
            c_lo, c_hi = max(0, -dc * s), min(w, w - dc * s)
            if r_lo >= r_hi or c_lo >= c_hi:
                continue
            # straight axis or diagonal lines: the raster is exactly the s+1 steps
            running = values[r_lo:r_hi, c_lo:c_hi].copy()
            for t in range(1, s + 1):
                np.maximum(
                    running,
                    values[r_lo + t * dr:r_hi + t * dr, c_lo + t * dc:c_hi + t * dc],
                    out=running,
                )
            src = ids[r_lo:r_hi, c_lo:c_hi].ravel()
            dst = ids[r_lo + s * dr:r_hi + s * dr, c_lo + s * dc:c_hi + s * dc].ravel()
            rank = np.full(len(src), d_index * len(distances) + s_index, dtype=np.int64)
            blocks.append((src, dst, running.ravel(), rank))

    if not blocks:
        return EdgeGraph(h * w, np.empty((0, 2), dtype=np.int64), np.empty(0))
    src = np.concatenate([b[0] for b in blocks])
    dst = np.concatenate([b[1] for b in blocks])
    probs = np.concatenate([b[2] for b in blocks])
    rank = np.concatenate([b[3] for b in blocks])
    order = np.lexsort((rank, src))
    edges = np.stack([src[order], dst[order]], axis=1)
    edges.sort(axis=1)
    return EdgeGraph(h * w, edges, probs[order])


def grid_edge_count(height: int, width: int, config: GridConfig = GridConfig()) -> int:
    total = 0
    for dr, dc in config.directions:
        for s in range(config.min_distance, config.max_distance + 1):
            total += max(0, height - abs(dr) * s) * max(0, width - abs(dc) * s)
    return total


def _canonical_ids(labels: np.ndarray) -> np.ndarray:
    # component containing the lowest node id gets id 0, and so on
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[inverse.reshape(-1)]


# below this size scipy's per-call validation costs more than the search itself
SMALL_GRAPH_EDGES = 256


def _small_components(n: int, pairs) -> np.ndarray:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in pairs:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    return np.array([find(x) for x in range(n)], dtype=np.int64)


def join_components(graph: EdgeGraph, labeling) -> np.ndarray:
    labeling = np.asarray(labeling)
    if len(labeling) != graph.num_edges:
        raise ValueError("labeling length does not match number of edges")
    n = graph.num_nodes
    joined = graph.edges[labeling == 0]
    if graph.num_edges < SMALL_GRAPH_EDGES:
        return _small_components(n, joined.tolist())
    adj = coo_matrix(
        (np.ones(len(joined), dtype=np.int8), (joined[:, 0], joined[:, 1])), shape=(n, n)
    )
    _, labels = connected_components(adj, directed=False)
    return labels


def partition_from_labeling(graph: EdgeGraph, labeling) -> np.ndarray:
    """Connected components of the join subgraph as a dense 0-based partition."""
    if graph.num_nodes == 0:
        return np.empty(0, dtype=np.int64)
    return _canonical_ids(join_components(graph, labeling))


def labeling_from_partition(graph: EdgeGraph, partition) -> np.ndarray:
    partition = np.asarray(partition)
    if len(partition) != graph.num_nodes:
        raise ValueError("partition length does not match number of nodes")
    if graph.num_edges == 0:
        return np.empty(0, dtype=np.int8)
    return (partition[graph.edges[:, 0]] != partition[graph.edges[:, 1]]).astype(np.int8)


def canonical_partition(partition) -> np.ndarray:
    """Relabel component ids densely in order of first appearance."""
    partition = np.asarray(partition)
    if partition.size == 0:
        return partition.astype(np.int64)
    return _canonical_ids(partition)
