"""Core data model: networks, demands, colored graphs and routed paths.

All types here are immutable after construction and safe to share across
threads. Colors (spectrum slots) are 1-based integers in {1..C}; links are
undirected and may be parallel (the integer id disambiguates). Direction is
introduced only inside the MILP builder.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Union

NodeId = Union[str, int]


class InputError(ValueError):
    """Malformed instance data or out-of-range arguments."""


@dataclass(frozen=True)
class Link:
    """Undirected fiber link between two distinct nodes.

    Attributes:
        id: Unique integer id within a network (parallel links get distinct ids).
        u, v: Endpoint nodes. The (u, v) order is kept as given; it only matters
            for naming the two directed copies used by the MILP builder.
        length: Non-negative length in kilometers.
    """

    id: int
    u: NodeId
    v: NodeId
    length: float

    def endpoints(self) -> frozenset:
        return frozenset((self.u, self.v))

    def other(self, node: NodeId) -> NodeId:
        if node == self.u:
            return self.v
        if node == self.v:
            return self.u
        raise InputError(f"node {node!r} is not an endpoint of link {self.id}")


@dataclass(frozen=True)
class Demand:
    """Connection request: route `width` contiguous slots from s to t within `reach` km."""

    id: int
    s: NodeId
    t: NodeId
    width: int
    reach: float


@dataclass(frozen=True)
class RoutedPath:
    """A routed answer for one demand: a link walk plus the occupied slot range.

    The walk occupies colors {first_color .. first_color + width - 1} on every
    link of the sequence.
    """

    links: tuple[Link, ...]
    first_color: int
    width: int

    def colors(self) -> range:
        return range(self.first_color, self.first_color + self.width)

    def length(self) -> float:
        total = 0.0
        for link in self.links:
            total += link.length
        return total

    def link_ids(self) -> tuple[int, ...]:
        return tuple(link.id for link in self.links)


class OpticalNetwork:
    """Flex-grid optical network: nodes, parallel weighted links, per-link free colors.

    Attributes:
        slot_count: Number of spectrum slots C (same for every link).
        nodes: Node ids, in construction order.
        links: Links sorted by id.
        available: Mapping link id -> frozenset of free colors (subset of {1..C}).
    """

    __slots__ = ("slot_count", "nodes", "links", "available", "_by_id", "_adjacency")

    def __init__(
        self,
        nodes: Iterable[NodeId],
        links: Iterable[Link],
        available: Mapping[int, Iterable[int]],
        slot_count: int,
    ) -> None:
        if not isinstance(slot_count, int) or slot_count < 1:
            raise InputError(f"slot_count must be a positive integer, got {slot_count!r}")
        self.slot_count = slot_count
        seen_nodes = []
        node_set = set()
        for n in nodes:
            if n in node_set:
                raise InputError(f"duplicate node {n!r}")
            node_set.add(n)
            seen_nodes.append(n)
        self.nodes = tuple(seen_nodes)

        by_id: dict[int, Link] = {}
        for link in links:
            if link.id in by_id:
                raise InputError(f"duplicate link id {link.id}")
            if link.u == link.v:
                raise InputError(f"link {link.id} is a self-loop at {link.u!r}")
            if link.u not in node_set or link.v not in node_set:
                raise InputError(f"link {link.id} endpoint not among the nodes")
            if link.length < 0:
                raise InputError(f"link {link.id} has negative length {link.length}")
            by_id[link.id] = link
        self.links = tuple(sorted(by_id.values(), key=lambda l: l.id))
        self._by_id = by_id

        avail: dict[int, frozenset[int]] = {}
        for link in self.links:
            colors = frozenset(available.get(link.id, ()))
            for c in colors:
                if not isinstance(c, int) or not 1 <= c <= slot_count:
                    raise InputError(
                        f"link {link.id}: color {c!r} outside 1..{slot_count}"
                    )
            avail[link.id] = colors
        self.available = avail

        adjacency: dict[NodeId, list[Link]] = {n: [] for n in self.nodes}
        for link in self.links:
            adjacency[link.u].append(link)
            adjacency[link.v].append(link)
        self._adjacency = {n: tuple(ls) for n, ls in adjacency.items()}

    def link(self, link_id: int) -> Link:
        try:
            return self._by_id[link_id]
        except KeyError:
            raise InputError(f"unknown link id {link_id}") from None

    def incident(self, node: NodeId) -> tuple[Link, ...]:
        try:
            return self._adjacency[node]
        except KeyError:
            raise InputError(f"unknown node {node!r}") from None

    def colors_of(self, link_id: int) -> frozenset[int]:
        return self.available[link_id]

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return (
            f"OpticalNetwork(|V|={len(self.nodes)}, |L|={len(self.links)}, "
            f"C={self.slot_count})"
        )


@dataclass(frozen=True)
class ColoredGraph:
    """Subgraph of the network restricted to links carrying a color (or color range).

    Edges are the original Link objects, so parallel edges and link ids survive.
    """

    label: str
    nodes: tuple[NodeId, ...]
    edges: tuple[Link, ...]

    def edge_ids(self) -> frozenset[int]:
        return frozenset(link.id for link in self.edges)


@dataclass(frozen=True)
class RestorationInstance:
    """One solver input: a partially occupied network plus the demands to route."""

    network: OpticalNetwork
    demands: tuple[Demand, ...]

    def __post_init__(self) -> None:
        net = self.network
        node_set = set(net.nodes)
        seen = set()
        for i, d in enumerate(self.demands):
            where = f"demand #{i} (id={d.id})"
            if d.id in seen:
                raise InputError(f"{where}: duplicate demand id")
            seen.add(d.id)
            if d.s not in node_set or d.t not in node_set:
                raise InputError(f"{where}: endpoint not among network nodes")
            if d.s == d.t:
                raise InputError(f"{where}: source equals target")
            if not isinstance(d.width, int) or d.width < 1:
                raise InputError(f"{where}: width must be a positive integer")
            if d.width > net.slot_count:
                raise InputError(f"{where}: width {d.width} exceeds C={net.slot_count}")
            if not d.reach > 0:
                raise InputError(f"{where}: reach must be positive")

    def demand(self, demand_id: int) -> Demand:
        for d in self.demands:
            if d.id == demand_id:
                return d
        raise InputError(f"unknown demand id {demand_id}")


# ---------------------------------------------------------------------------
# Colored / range graphs
# ---------------------------------------------------------------------------

def color_graph(network: OpticalNetwork, c: int) -> ColoredGraph:
    """Multigraph of all links on which color c is free."""
    if not 1 <= c <= network.slot_count:
        raise InputError(f"color {c} outside 1..{network.slot_count}")
    edges = tuple(l for l in network.links if c in network.available[l.id])
    return ColoredGraph(label=f"c={c}", nodes=network.nodes, edges=edges)


def range_graph(network: OpticalNetwork, c: int, w: int) -> ColoredGraph:
    """Multigraph of links carrying the whole color range {c .. c+w-1}.

    Equals the edge intersection of the color graphs of every color in the range.
    """
    if w < 1:
        raise InputError(f"width {w} must be positive")
    if c < 1 or c + w - 1 > network.slot_count:
        raise InputError(
            f"color range {c}..{c + w - 1} outside 1..{network.slot_count}"
        )
    needed = range(c, c + w)
    edges = tuple(
        l for l in network.links if all(cc in network.available[l.id] for cc in needed)
    )
    return ColoredGraph(label=f"c={c}:w={w}", nodes=network.nodes, edges=edges)


# ---------------------------------------------------------------------------
# Path predicates
# ---------------------------------------------------------------------------

def walk_node_sequence(links: tuple[Link, ...], start: NodeId) -> Optional[list]:
    """Node sequence of a link walk starting at `start`, or None if malformed.

    Enforces the structural walk rules: every consecutive link pair shares
    exactly one endpoint, and that shared endpoint is the node the walk is
    currently at (which also rules out an immediate return through a parallel
    link at either end of the walk).
    """
    if not links:
        return None
    first = links[0]
    if start not in (first.u, first.v):
        return None
    seq = [start]
    cur = start
    prev: Optional[Link] = None
    for link in links:
        if cur not in (link.u, link.v):
            return None
        if prev is not None and len(prev.endpoints() & link.endpoints()) != 1:
            return None
        cur = link.other(cur)
        seq.append(cur)
        prev = link
    return seq


def is_valid_path(path: RoutedPath, demand: Demand, network: OpticalNetwork) -> bool:
    """True iff the path routes the demand: right endpoints, within reach,
    and the demand's full color range is free on every traversed link.

    Returns False (never raises) when the link sequence is not a well-formed
    walk from demand.s to demand.t.
    """
    seq = walk_node_sequence(path.links, demand.s)
    if seq is None or seq[-1] != demand.t:
        return False
    w = demand.width
    if path.width != w:
        return False
    if path.first_color < 1 or path.first_color + w - 1 > network.slot_count:
        return False
    if path.length() > demand.reach:
        return False
    needed = range(path.first_color, path.first_color + w)
    for link in path.links:
        free = network.available.get(link.id)
        if free is None:
            return False
        if any(c not in free for c in needed):
            return False
    return True


def paths_intersect(p1: RoutedPath, p2: RoutedPath) -> bool:
    """True iff the two paths occupy some common color on some common link."""
    lo = max(p1.first_color, p2.first_color)
    hi = min(p1.first_color + p1.width, p2.first_color + p2.width)
    if lo >= hi:
        return False
    return bool(set(p1.link_ids()) & set(p2.link_ids()))
