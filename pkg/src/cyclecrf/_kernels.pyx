# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: clique-term accumulation and triangle enumeration."""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange

cnp.import_array()


def clique_terms(const double[::1] c0, const double[::1] c1,
                 const cnp.int64_t[:, ::1] tri_edges,
                 const cnp.int64_t[::1] inc_edge,
                 const cnp.int64_t[::1] inc_tri,
                 const cnp.int64_t[::1] inc_slot,
                 double g_jjj, double g_jcc, double g_ccc, double g_max,
                 int num_threads=1):
    cdef Py_ssize_t m = c0.shape[0]
    cdef Py_ssize_t n_inc = inc_edge.shape[0]
    out0 = np.zeros(m, dtype=np.float64)
    out1 = np.zeros(m, dtype=np.float64)
    cdef double[::1] t0 = out0
    cdef double[::1] t1 = out1
    if n_inc == 0:
        return out0, out1

    # incidences are edge-major, so each edge owns a contiguous range
    ptr_arr = np.zeros(m + 1, dtype=np.int64)
    np.cumsum(np.bincount(np.asarray(inc_edge), minlength=m), out=ptr_arr[1:])
    cdef cnp.int64_t[::1] ptr = ptr_arr

    cdef Py_ssize_t e, p
    cdef cnp.int64_t tri, slot, a, b
    cdef double a0, a1, b0, b1, mixed, both_cut, both_join, acc0, acc1
    if num_threads < 1:
        num_threads = 1
    for e in prange(m, nogil=True, schedule="static", num_threads=num_threads):
        acc0 = 0.0
        acc1 = 0.0
        for p in range(ptr[e], ptr[e + 1]):
            tri = inc_tri[p]
            slot = inc_slot[p]
            if slot == 0:
                a = tri_edges[tri, 1]
                b = tri_edges[tri, 2]
            elif slot == 1:
                a = tri_edges[tri, 0]
                b = tri_edges[tri, 2]
            else:
                a = tri_edges[tri, 0]
                b = tri_edges[tri, 1]
            a0 = c0[a]
            a1 = c1[a]
            b0 = c0[b]
            b1 = c1[b]
            mixed = a0 * b1 + a1 * b0
            both_cut = a1 * b1
            both_join = a0 * b0
            acc0 = acc0 + (g_jjj * both_join + g_jcc * both_cut
                           + g_max * (1.0 - (both_join + both_cut)))
            acc1 = acc1 + (g_jcc * mixed + g_ccc * both_cut
                           + g_max * (1.0 - (mixed + both_cut)))
        t0[e] = acc0
        t1[e] = acc1
    return out0, out1


def enumerate_triangles(Py_ssize_t num_nodes, edges):
    """All 3-cliques as (nodes, edge ids), ordered by (u, v, w)."""
    edges = np.ascontiguousarray(edges, dtype=np.int64).reshape(-1, 2)
    cdef Py_ssize_t m = edges.shape[0]
    empty = np.empty((0, 3), dtype=np.int64)
    if m < 3:
        return empty, empty.copy()

    order_arr = np.lexsort((edges[:, 1], edges[:, 0])).astype(np.int64)
    cdef cnp.int64_t[::1] order = order_arr
    cdef cnp.int64_t[::1] nbr = np.ascontiguousarray(edges[order_arr, 1])
    ptr_arr = np.zeros(num_nodes + 1, dtype=np.int64)
    np.cumsum(np.bincount(edges[:, 0], minlength=num_nodes), out=ptr_arr[1:])
    cdef cnp.int64_t[::1] ptr = ptr_arr

    cdef Py_ssize_t u, v, ia, ib, ja, ja_end, jb, jb_end, count, k
    # two passes: count, then fill
    cdef int fill
    count = 0
    nodes_arr = empty
    eids_arr = empty
    cdef cnp.int64_t[:, ::1] nodes_v
    cdef cnp.int64_t[:, ::1] eids_v
    for fill in range(2):
        if fill == 1:
            nodes_arr = np.empty((count, 3), dtype=np.int64)
            eids_arr = np.empty((count, 3), dtype=np.int64)
            nodes_v = nodes_arr
            eids_v = eids_arr
            if count == 0:
                break
        k = 0
        for u in range(num_nodes):
            for ia in range(ptr[u], ptr[u + 1]):
                v = nbr[ia]
                # intersect later neighbors of u with neighbors of v (both sorted)
                ja = ia + 1
                ja_end = ptr[u + 1]
                jb = ptr[v]
                jb_end = ptr[v + 1]
                while ja < ja_end and jb < jb_end:
                    if nbr[ja] < nbr[jb]:
                        ja += 1
                    elif nbr[ja] > nbr[jb]:
                        jb += 1
                    else:
                        if fill == 1:
                            nodes_v[k, 0] = u
                            nodes_v[k, 1] = v
                            nodes_v[k, 2] = nbr[ja]
                            eids_v[k, 0] = order[ia]
                            eids_v[k, 1] = order[jb]
                            eids_v[k, 2] = order[ja]
                        k += 1
                        ja += 1
                        jb += 1
        count = k
    return nodes_arr, eids_arr
