"""Pure-Python trimming kernel; the fallback twin of the Cython `_trimcore`.

Both kernels implement exactly the same arithmetic (Dijkstra relaxations sum
edge lengths in walk order), so their outputs are bit-identical; a parity test
holds them to that.
"""

from __future__ import annotations

import heapq

import numpy as np

INF = float("inf")


def trim_demand_scan(
    n_nodes: int,
    edge_u: np.ndarray,
    edge_v: np.ndarray,
    edge_len: np.ndarray,
    avail: np.ndarray,
    s: int,
    t: int,
    width: int,
    reach: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Scan all first colors for one demand and mark reach-feasible edges.

    Args:
        n_nodes: Node count; nodes are indices 0..n_nodes-1.
        edge_u, edge_v: int32 endpoint indices per edge.
        edge_len: float64 lengths per edge.
        avail: (m, C) uint8 matrix, avail[e, c] == 1 iff color c+1 is free on edge e.
        s, t: demand endpoint indices.
        width: demand width (slots).
        reach: demand reach (km).

    Returns:
        (first_marks, valid_first): first_marks is (m, C) uint8 with
        first_marks[e, c] == 1 iff edge e lies on a reach-feasible walk in the
        range graph starting at color c+1; valid_first is (C,) uint8 with
        valid_first[c] == 1 iff s reaches t within reach in that range graph.
    """
    m = len(edge_u)
    n_colors = avail.shape[1]
    first_marks = np.zeros((m, n_colors), dtype=np.uint8)
    valid_first = np.zeros(n_colors, dtype=np.uint8)
    if width > n_colors:
        return first_marks, valid_first

    eu = edge_u.tolist()
    ev = edge_v.tolist()
    elen = edge_len.tolist()
    avail_rows = avail.tolist()

    # run[e][c]: number of consecutive free colors on edge e starting at c.
    run = []
    for e in range(m):
        row = avail_rows[e]
        r = [0] * (n_colors + 1)
        for c in range(n_colors - 1, -1, -1):
            r[c] = r[c + 1] + 1 if row[c] else 0
        run.append(r)

    adj: list[list[tuple[int, int]]] = [[] for _ in range(n_nodes)]
    for e in range(m):
        adj[eu[e]].append((e, ev[e]))
        adj[ev[e]].append((e, eu[e]))

    def dijkstra(root: int, active: list[bool]) -> list[float]:
        dist = [INF] * n_nodes
        dist[root] = 0.0
        heap = [(0.0, root)]
        while heap:
            d, node = heapq.heappop(heap)
            if d > dist[node]:
                continue
            for e, other in adj[node]:
                if not active[e]:
                    continue
                nd = d + elen[e]
                if nd < dist[other]:
                    dist[other] = nd
                    heapq.heappush(heap, (nd, other))
        return dist

    for c in range(n_colors - width + 1):
        active = [run[e][c] >= width for e in range(m)]
        dist_s = dijkstra(s, active)
        if dist_s[t] > reach:
            continue
        valid_first[c] = 1
        dist_t = dijkstra(t, active)
        for e in range(m):
            if not active[e]:
                continue
            u, v, ln = eu[e], ev[e], elen[e]
            if dist_s[u] + ln + dist_t[v] <= reach or dist_s[v] + ln + dist_t[u] <= reach:
                first_marks[e, c] = 1

    return first_marks, valid_first
