"""Pure numpy implementations of the hot kernels.

Used when the compiled ``_kernels`` extension is unavailable. Results match
the compiled kernels to rounding; per-edge accumulation follows the same
incidence order.
"""
from __future__ import annotations

import numpy as np

# for an edge at slot s of a triangle, the slots of the other two edges
OTHER_SLOTS = np.array([[1, 2], [0, 2], [0, 1]], dtype=np.int64)


def clique_terms(c0, c1, tri_edges, inc_edge, inc_tri, inc_slot,
                 g_jjj, g_jcc, g_ccc, g_max, num_threads=1):
    """Summed clique energies per edge for the join (0) and cut (1) label.

    ``c0[e]``/``c1[e]`` are the (cooled) neighbor probabilities of join/cut.
    Incidences are given edge-major; contributions are summed in that order.
    """
    m = len(c0)
    if len(inc_tri) == 0:
        return np.zeros(m), np.zeros(m)
    others = tri_edges[inc_tri[:, None], OTHER_SLOTS[inc_slot]]
    a, b = others[:, 0], others[:, 1]
    a0, a1, b0, b1 = c0[a], c1[a], c0[b], c1[b]

    mixed = a0 * b1 + a1 * b0
    both_cut = a1 * b1
    both_join = a0 * b0
    valid1 = mixed + both_cut
    valid0 = both_join + both_cut
    t1 = g_jcc * mixed + g_ccc * both_cut + g_max * (1.0 - valid1)
    t0 = g_jjj * both_join + g_jcc * both_cut + g_max * (1.0 - valid0)
    return (np.bincount(inc_edge, weights=t0, minlength=m),
            np.bincount(inc_edge, weights=t1, minlength=m))


def enumerate_triangles(num_nodes, edges, chunk=1 << 20):
    """All 3-cliques as (nodes, edge ids), ordered by (u, v, w).

    ``edges`` must be an (m, 2) array with u < v.
    """
    edges = np.asarray(edges, dtype=np.int64)
    m = len(edges)
    empty = np.empty((0, 3), dtype=np.int64)
    if m < 3:
        return empty, empty.copy()
    order = np.lexsort((edges[:, 1], edges[:, 0]))
    su, sv = edges[order, 0], edges[order, 1]
    keys = su * num_nodes + sv

    row_end = np.searchsorted(su, np.arange(num_nodes), side="right")
    # for sorted edge position p, how many later edges share the same u
    later = row_end[su] - np.arange(m) - 1

    cum = np.concatenate([[0], np.cumsum(later)])
    nodes_out, edges_out = [], []
    start = 0
    while start < m:
        # block of edges producing about `chunk` wedges
        stop = int(np.searchsorted(cum, cum[start] + chunk, side="right")) - 1
        stop = min(max(stop, start + 1), m)
        counts = later[start:stop]
        total = int(counts.sum())
        if total:
            first = np.repeat(np.arange(start, stop), counts)
            offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
            second = first + 1 + offsets
            v, w = sv[first], sv[second]
            closing = v * num_nodes + w
            pos = np.searchsorted(keys, closing)
            pos_c = np.minimum(pos, m - 1)
            hit = keys[pos_c] == closing
            if hit.any():
                first, second, pos_c = first[hit], second[hit], pos_c[hit]
                nodes_out.append(np.stack([su[first], sv[first], sv[second]], axis=1))
                edges_out.append(np.stack([order[first], order[pos_c], order[second]], axis=1))
        start = stop
    if not nodes_out:
        return empty, empty.copy()
    return np.concatenate(nodes_out), np.concatenate(edges_out)
