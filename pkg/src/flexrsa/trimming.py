"""Reach-based preprocessing: useful (demand, link, color) triples.

For each demand d and candidate first color c, an edge survives iff it lies on
at least one walk from s_d to t_d of total length <= reach in the range graph
of colors {c .. c+w_d-1}; surviving edges contribute c to the per-link first
color set and the whole range to the useful triple set. Demands whose every
range graph leaves t_d out of reach are non re-routable, which alone proves
the instance infeasible.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import kernels
from .model import ColoredGraph, InputError, NodeId, RestorationInstance


@dataclass(frozen=True)
class UsefulTripleSet:
    """Trimming output.

    Attributes:
        useful: Undirected useful triples (demand_id, link_id, color).
        first_colors: (demand_id, link_id) -> colors that can start the
            demand's range on that link (C_dl). Links with no entry have none.
        valid_first_colors: demand_id -> colors c whose range graph contains a
            reach-feasible s-t path.
        non_reroutable: demand ids with no valid first color at all.
    """

    useful: frozenset
    first_colors: Mapping
    valid_first_colors: Mapping
    non_reroutable: frozenset

    def first_colors_of(self, demand_id: int, link_id: int) -> frozenset:
        return self.first_colors.get((demand_id, link_id), frozenset())

    def useful_colors_by_link(self, demand_id: int) -> dict:
        """demand's useful colors grouped per link id."""
        out: dict[int, set[int]] = {}
        for d, l, c in self.useful:
            if d == demand_id:
                out.setdefault(l, set()).add(c)
        return out


def shortest_distances(graph: ColoredGraph, root: NodeId) -> dict:
    """Exact single-source shortest distances over a weighted multigraph.

    Unreachable nodes are absent from the returned mapping.
    """
    if root not in graph.nodes:
        raise InputError(f"root {root!r} is not a node of {graph.label}")
    adj: dict[NodeId, list] = {}
    for link in graph.edges:
        adj.setdefault(link.u, []).append((link.length, link.v))
        adj.setdefault(link.v, []).append((link.length, link.u))
    dist = {root: 0.0}
    heap = [(0.0, 0, root)]
    order = {root: 0}
    counter = 1
    while heap:
        d, _, node = heapq.heappop(heap)
        if d > dist.get(node, float("inf")):
            continue
        for length, other in adj.get(node, ()):
            nd = d + length
            if nd < dist.get(other, float("inf")):
                dist[other] = nd
                if other not in order:
                    order[other] = counter
                    counter += 1
                heapq.heappush(heap, (nd, order[other], other))
    return dist


def _index_arrays(instance: RestorationInstance):
    net = instance.network
    node_index = {n: i for i, n in enumerate(net.nodes)}
    m = len(net.links)
    edge_u = np.empty(m, dtype=np.int32)
    edge_v = np.empty(m, dtype=np.int32)
    edge_len = np.empty(m, dtype=np.float64)
    avail = np.zeros((m, net.slot_count), dtype=np.uint8)
    for e, link in enumerate(net.links):
        edge_u[e] = node_index[link.u]
        edge_v[e] = node_index[link.v]
        edge_len[e] = link.length
        for c in net.available[link.id]:
            avail[e, c - 1] = 1
    return node_index, edge_u, edge_v, edge_len, avail


def compute_useful_triples(
    instance: RestorationInstance, kernel=None
) -> UsefulTripleSet:
    """Run the trimming scan for every demand of the instance.

    `kernel` overrides the scan implementation (used by the benchmark); the
    default is the backend selected in :mod:`flexrsa.kernels`.
    """
    scan = kernel or kernels.trim_demand_scan
    net = instance.network
    node_index, edge_u, edge_v, edge_len, avail = _index_arrays(instance)
    link_ids = [l.id for l in net.links]

    useful = set()
    first_colors: dict = {}
    valid_first: dict = {}
    non_reroutable = set()

    for demand in sorted(instance.demands, key=lambda d: d.id):
        marks, valid = scan(
            len(net.nodes),
            edge_u,
            edge_v,
            edge_len,
            avail,
            node_index[demand.s],
            node_index[demand.t],
            demand.width,
            demand.reach,
        )
        valid_first[demand.id] = frozenset(
            c + 1 for c in np.flatnonzero(valid).tolist()
        )
        if not valid_first[demand.id]:
            non_reroutable.add(demand.id)
            continue
        w = demand.width
        for e in np.flatnonzero(marks.any(axis=1)).tolist():
            cols = np.flatnonzero(marks[e]).tolist()
            first_colors[(demand.id, link_ids[e])] = frozenset(c + 1 for c in cols)
            for c in cols:
                for cc in range(c + 1, c + 1 + w):
                    useful.add((demand.id, link_ids[e], cc))

    return UsefulTripleSet(
        useful=frozenset(useful),
        first_colors=first_colors,
        valid_first_colors=valid_first,
        non_reroutable=frozenset(non_reroutable),
    )


def is_infeasible_by_trimming(triples: UsefulTripleSet, demands) -> bool:
    """True iff some given demand is non re-routable (proves infeasibility)."""
    ids = {d.id for d in demands}
    return bool(ids & set(triples.non_reroutable))


def triples_to_dict(triples: UsefulTripleSet, instance: RestorationInstance) -> dict:
    """JSON form emitted by the `trim` CLI subcommand."""
    net = instance.network
    total = sum(len(net.available[l.id]) for l in net.links) * len(instance.demands)
    return {
        "useful": [list(t) for t in sorted(triples.useful)],
        "first_colors": {
            f"{d}:{l}": sorted(cs)
            for (d, l), cs in sorted(triples.first_colors.items())
        },
        "valid_first_colors": {
            str(d): sorted(cs) for d, cs in sorted(triples.valid_first_colors.items())
        },
        "non_reroutable": sorted(triples.non_reroutable),
        "stats": {
            "triples_total": total,
            "triples_useful": len(triples.useful),
        },
    }
