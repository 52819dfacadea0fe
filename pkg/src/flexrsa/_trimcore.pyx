# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled trimming kernel; arithmetic twin of `_trimcore_py`.

Dijkstra relaxations accumulate `dist[u] + length` in walk order exactly like
the pure-Python kernel, so both produce bit-identical distance values and
therefore identical marks.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef double INF = float("inf")


cdef void _sift_up(double* hk, cnp.int32_t* hn, int pos) noexcept nogil:
    cdef double key = hk[pos]
    cdef int node = hn[pos]
    cdef int parent
    while pos > 0:
        parent = (pos - 1) >> 1
        if hk[parent] <= key:
            break
        hk[pos] = hk[parent]
        hn[pos] = hn[parent]
        pos = parent
    hk[pos] = key
    hn[pos] = node


cdef void _sift_down(double* hk, cnp.int32_t* hn, int size, int pos) noexcept nogil:
    cdef double key = hk[pos]
    cdef int node = hn[pos]
    cdef int child
    while True:
        child = 2 * pos + 1
        if child >= size:
            break
        if child + 1 < size and hk[child + 1] < hk[child]:
            child += 1
        if hk[child] >= key:
            break
        hk[pos] = hk[child]
        hn[pos] = hn[child]
        pos = child
    hk[pos] = key
    hn[pos] = node


cdef void _dijkstra(
    int n_nodes,
    int root,
    const cnp.int32_t* adj_off,
    const cnp.int32_t* adj_edge,
    const cnp.int32_t* adj_other,
    const double* elen,
    const unsigned char* active,
    double* dist,
    double* hk,
    cnp.int32_t* hn,
) noexcept nogil:
    cdef int i, node, e, other, size
    cdef double d, nd
    for i in range(n_nodes):
        dist[i] = INF
    dist[root] = 0.0
    hk[0] = 0.0
    hn[0] = root
    size = 1
    while size > 0:
        d = hk[0]
        node = hn[0]
        size -= 1
        hk[0] = hk[size]
        hn[0] = hn[size]
        if size > 0:
            _sift_down(hk, hn, size, 0)
        if d > dist[node]:
            continue
        for i in range(adj_off[node], adj_off[node + 1]):
            e = adj_edge[i]
            if not active[e]:
                continue
            other = adj_other[i]
            nd = d + elen[e]
            if nd < dist[other]:
                dist[other] = nd
                hk[size] = nd
                hn[size] = other
                size += 1
                _sift_up(hk, hn, size - 1)


def trim_demand_scan(
    int n_nodes,
    cnp.ndarray[cnp.int32_t, ndim=1] edge_u,
    cnp.ndarray[cnp.int32_t, ndim=1] edge_v,
    cnp.ndarray[cnp.float64_t, ndim=1] edge_len,
    cnp.ndarray[cnp.uint8_t, ndim=2] avail,
    int s,
    int t,
    int width,
    double reach,
):
    """Same contract as `_trimcore_py.trim_demand_scan`."""
    cdef int m = edge_u.shape[0]
    cdef int n_colors = avail.shape[1]
    first_marks = np.zeros((m, n_colors), dtype=np.uint8)
    valid_first = np.zeros(n_colors, dtype=np.uint8)
    if width > n_colors or m == 0 or n_nodes == 0:
        return first_marks, valid_first

    cdef cnp.ndarray[cnp.uint8_t, ndim=2] marks = first_marks
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] valid = valid_first
    cdef cnp.ndarray[cnp.int32_t, ndim=2] run = np.zeros(
        (m, n_colors + 1), dtype=np.int32
    )
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] av = np.ascontiguousarray(avail)
    cdef int e, c, i
    for e in range(m):
        for c in range(n_colors - 1, -1, -1):
            run[e, c] = run[e, c + 1] + 1 if av[e, c] else 0

    # adjacency in CSR form; every edge appears once per endpoint
    cdef cnp.ndarray[cnp.int32_t, ndim=1] adj_off = np.zeros(n_nodes + 1, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] adj_edge = np.zeros(2 * m, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] adj_other = np.zeros(2 * m, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] fill = np.zeros(n_nodes, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] eu = np.ascontiguousarray(edge_u)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] ev = np.ascontiguousarray(edge_v)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] elen = np.ascontiguousarray(edge_len)
    for e in range(m):
        adj_off[eu[e] + 1] += 1
        adj_off[ev[e] + 1] += 1
    for i in range(n_nodes):
        adj_off[i + 1] += adj_off[i]
    for e in range(m):
        i = adj_off[eu[e]] + fill[eu[e]]
        adj_edge[i] = e
        adj_other[i] = ev[e]
        fill[eu[e]] += 1
        i = adj_off[ev[e]] + fill[ev[e]]
        adj_edge[i] = e
        adj_other[i] = eu[e]
        fill[ev[e]] += 1

    cdef cnp.ndarray[cnp.uint8_t, ndim=1] active = np.zeros(m, dtype=np.uint8)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dist_s = np.zeros(n_nodes, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dist_t = np.zeros(n_nodes, dtype=np.float64)
    cdef int heap_cap = 2 * m + n_nodes + 2
    cdef cnp.ndarray[cnp.float64_t, ndim=1] hk = np.zeros(heap_cap, dtype=np.float64)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] hn = np.zeros(heap_cap, dtype=np.int32)
    cdef double ln

    for c in range(n_colors - width + 1):
        for e in range(m):
            active[e] = 1 if run[e, c] >= width else 0
        _dijkstra(
            n_nodes, s, &adj_off[0], &adj_edge[0], &adj_other[0], &elen[0],
            &active[0], &dist_s[0], &hk[0], &hn[0],
        )
        if dist_s[t] > reach:
            continue
        valid[c] = 1
        _dijkstra(
            n_nodes, t, &adj_off[0], &adj_edge[0], &adj_other[0], &elen[0],
            &active[0], &dist_t[0], &hk[0], &hn[0],
        )
        for e in range(m):
            if not active[e]:
                continue
            ln = elen[e]
            if (
                dist_s[eu[e]] + ln + dist_t[ev[e]] <= reach
                or dist_s[ev[e]] + ln + dist_t[eu[e]] <= reach
            ):
                marks[e, c] = 1

    return first_marks, valid_first
