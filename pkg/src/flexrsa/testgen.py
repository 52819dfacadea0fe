"""Congested-instance generation via shared path protection and link breaks.

Loading discipline: repeatedly shuffle all ordered node pairs and, for each
pair, try to route a valid main path plus a link-disjoint valid recovery path
(first-fit lowest color, shortest valid route). Main paths never touch slots
reserved by any recovery. Recovery paths of main paths that share a link must
not intersect each other (no common slot on a common link); recoveries of
link-disjoint mains may even reuse each other's slots - that reuse is the
shared part of shared path protection. A width phase ends when a full pass
routes nothing. Afterwards all recovery reservations are dropped.

First-kind scenarios break one eligible link (eligible: it carries a main of
width > 1); the freed broken demands are always jointly restorable, the
removed recovery paths being a witness. Second-kind scenarios re-provision
the broken demands and then break a second eligible link, with no guarantee.
"""

from __future__ import annotations

import heapq
import importlib.resources
import random
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .model import (
    Demand,
    OpticalNetwork,
    RestorationInstance,
    RoutedPath,
)

MODULATION_REACH_KM = {"bpsk": 5000.0, "qpsk": 2500.0, "8qam": 1250.0}

BUILTIN_TOPOLOGIES = ("ring14", "grid12")


class GenerationError(RuntimeError):
    pass


def builtin_topology_path(name: str) -> str:
    if name not in BUILTIN_TOPOLOGIES:
        raise GenerationError(
            f"unknown builtin topology {name!r}; available: {BUILTIN_TOPOLOGIES}"
        )
    return str(importlib.resources.files("flexrsa").joinpath(f"data/{name}.json"))


@dataclass(frozen=True)
class ProvisionedDemand:
    demand: Demand
    main: RoutedPath
    recovery: RoutedPath


@dataclass
class LoadedNetwork:
    """Provisioned network state with recovery reservations already dropped."""

    topology: OpticalNetwork
    network: OpticalNetwork  # availability = topology minus main occupations
    provisioned: tuple
    seed: int
    reach_km: float
    modulation: Optional[str]
    width_schedule: tuple
    log: tuple

    def mains(self) -> dict:
        return {pd.demand.id: pd.main for pd in self.provisioned}

    def eligible_links(self) -> list:
        """Links carrying at least one main path of width > 1."""
        out = set()
        for pd in self.provisioned:
            if pd.demand.width > 1:
                out.update(pd.main.link_ids())
        return sorted(out)


@dataclass(frozen=True)
class Scenario:
    kind: str  # "first" | "second"
    broken_link: int
    instance: RestorationInstance
    first_break: Optional[int] = None
    replacement_policy: Optional[str] = None
    manifest: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# First-fit routing machinery
# ---------------------------------------------------------------------------

class _Router:
    """First-fit shortest-valid routing over a mutable occupation state."""

    def __init__(self, topology: OpticalNetwork):
        self.net = topology
        self.node_index = {n: i for i, n in enumerate(topology.nodes)}
        self.links = topology.links
        self.edge_index = {l.id: e for e, l in enumerate(self.links)}
        m = len(self.links)
        self.edge_u = np.array(
            [self.node_index[l.u] for l in self.links], dtype=np.int32
        )
        self.edge_v = np.array(
            [self.node_index[l.v] for l in self.links], dtype=np.int32
        )
        self.edge_len = np.array([l.length for l in self.links], dtype=np.float64)
        c = topology.slot_count
        # free means: not occupied by a main; strict additionally excludes
        # recovery reservations
        self.free_main = np.ones((m, c), dtype=np.uint8)
        self.free_strict = np.ones((m, c), dtype=np.uint8)
        # per reserved slot: the main link sets whose recoveries hold it
        self.reservation_owners: dict = {}
        self.adjacency = {
            n: sorted(topology.incident(n), key=lambda l: l.id)
            for n in topology.nodes
        }

    def occupy_main(self, path: RoutedPath) -> None:
        for link in path.links:
            e = self.edge_index[link.id]
            for c in path.colors():
                self.free_main[e, c - 1] = 0
                self.free_strict[e, c - 1] = 0

    def reserve_recovery(self, path: RoutedPath, main_links: frozenset) -> None:
        for link in path.links:
            e = self.edge_index[link.id]
            for c in path.colors():
                self.free_strict[e, c - 1] = 0
                self.reservation_owners.setdefault((e, c - 1), []).append(main_links)

    def recovery_avail(self, main_links: frozenset) -> np.ndarray:
        """Slots a recovery for this main may use: free of mains, and reserved
        only by recoveries whose mains are link-disjoint from this one."""
        avail = self.free_main.copy()
        for (e, cidx), owners in self.reservation_owners.items():
            if avail[e, cidx] and any(owner & main_links for owner in owners):
                avail[e, cidx] = 0
        return avail

    def first_fit(self, s, t, width, reach, avail, banned_links=frozenset()):
        """Lowest first color admitting a reach-valid route, plus that route."""
        if banned_links:
            avail = avail.copy()
            for link_id in banned_links:
                avail[self.edge_index[link_id], :] = 0
        _marks, valid = kernels.trim_demand_scan(
            len(self.net.nodes),
            self.edge_u,
            self.edge_v,
            self.edge_len,
            avail,
            self.node_index[s],
            self.node_index[t],
            width,
            reach,
        )
        hits = np.flatnonzero(valid)
        if not len(hits):
            return None
        c0 = int(hits[0]) + 1
        links = self._shortest_path(s, t, width, c0, avail)
        path = RoutedPath(links=tuple(links), first_color=c0, width=width)
        if path.length() > reach:  # kernel promised otherwise
            raise GenerationError("router disagreement on reach; this is a bug")
        return path

    def _shortest_path(self, s, t, width, c0, avail):
        dist = {s: 0.0}
        pred: dict = {}
        heap = [(0.0, self.node_index[s], s)]
        while heap:
            d, _, node = heapq.heappop(heap)
            if d > dist.get(node, float("inf")):
                continue
            if node == t:
                break
            for link in self.adjacency[node]:
                e = self.edge_index[link.id]
                if not all(avail[e, c - 1] for c in range(c0, c0 + width)):
                    continue
                other = link.other(node)
                nd = d + link.length
                if nd < dist.get(other, float("inf")):
                    dist[other] = nd
                    pred[other] = (link, node)
                    heapq.heappush(heap, (nd, self.node_index[other], other))
        if t not in pred and t != s:
            raise GenerationError("router disagreement on reachability; this is a bug")
        links = []
        cur = t
        while cur != s:
            link, prev = pred[cur]
            links.append(link)
            cur = prev
        return list(reversed(links))


def _restrict_network(topology: OpticalNetwork, occupied: dict, drop_links=frozenset()):
    """Copy of the topology minus dropped links, minus occupied slots."""
    links = [l for l in topology.links if l.id not in drop_links]
    available = {
        l.id: sorted(
            set(topology.available[l.id]) - occupied.get(l.id, set())
        )
        for l in links
    }
    return OpticalNetwork(topology.nodes, links, available, topology.slot_count)


def _occupation(paths) -> dict:
    occ: dict = {}
    for path in paths:
        for link_id in path.link_ids():
            occ.setdefault(link_id, set()).update(path.colors())
    return occ


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------

def generate_loaded_network(
    topology: OpticalNetwork,
    reach_km: float,
    width_schedule=(1, 4, 2, 1),
    seed: int = 0,
    modulation: Optional[str] = None,
    phase_passes=None,
) -> LoadedNetwork:
    """Load a pristine topology with shared-path-protected demands.

    phase_passes gives the number of shuffled passes per width phase (None
    entry = repeat until a pass routes nothing). The default runs one pass
    per phase and exhausts the last one; exhausting an early width-1 phase
    would leave no room for any wider demand, since a pair routable at width
    w is also routable at width 1.
    """
    for link in topology.links:
        if len(topology.available[link.id]) != topology.slot_count:
            raise GenerationError(
                f"topology link {link.id} is not fully available; loading "
                "expects a pristine network"
            )
    rng = random.Random(seed)
    router = _Router(topology)
    pairs = [(s, t) for s in topology.nodes for t in topology.nodes if s != t]

    provisioned: list[ProvisionedDemand] = []
    log: list[str] = []
    next_id = 1

    def attempt(s, t, width) -> bool:
        nonlocal next_id
        main = router.first_fit(s, t, width, reach_km, router.free_strict)
        if main is None:
            return False
        main_links = frozenset(main.link_ids())
        recovery = router.first_fit(
            s, t, width, reach_km,
            router.recovery_avail(main_links),
            banned_links=main_links,
        )
        if recovery is None:
            return False
        demand = Demand(id=next_id, s=s, t=t, width=width, reach=reach_km)
        next_id += 1
        router.occupy_main(main)
        router.reserve_recovery(recovery, main_links)
        provisioned.append(ProvisionedDemand(demand, main, recovery))
        log.append(
            f"routed d{demand.id} ({s}->{t} w={width}) main via "
            f"{list(main.link_ids())} c{main.first_color} recovery via "
            f"{list(recovery.link_ids())} c{recovery.first_color}"
        )
        return True

    if phase_passes is None:
        phase_passes = (1,) * (len(width_schedule) - 1) + (None,)
    if len(phase_passes) != len(width_schedule):
        raise GenerationError("phase_passes must match the width schedule")

    for width, passes in zip(width_schedule, phase_passes):
        done = 0
        while passes is None or done < passes:
            order = pairs[:]
            rng.shuffle(order)
            progress = False
            for s, t in order:
                if attempt(s, t, width):
                    progress = True
            done += 1
            if not progress:
                break

    network = _restrict_network(
        topology, _occupation(pd.main for pd in provisioned)
    )
    loaded = LoadedNetwork(
        topology=topology,
        network=network,
        provisioned=tuple(provisioned),
        seed=seed,
        reach_km=reach_km,
        modulation=modulation,
        width_schedule=tuple(width_schedule),
        log=tuple(log),
    )
    _self_check(loaded)
    return loaded


def _self_check(loaded: LoadedNetwork) -> None:
    """Shared-protection invariants; violations are generator bugs."""
    from .model import is_valid_path, paths_intersect

    for pd in loaded.provisioned:
        if not is_valid_path(pd.main, pd.demand, loaded.topology):
            raise GenerationError(f"main path of d{pd.demand.id} invalid")
        if not is_valid_path(pd.recovery, pd.demand, loaded.topology):
            raise GenerationError(f"recovery path of d{pd.demand.id} invalid")
        if set(pd.main.link_ids()) & set(pd.recovery.link_ids()):
            raise GenerationError(
                f"recovery of d{pd.demand.id} shares a link with its main"
            )
    items = list(loaded.provisioned)
    for i, a in enumerate(items):
        for b in items[i + 1 :]:
            if paths_intersect(a.main, b.main):
                raise GenerationError(
                    f"mains of d{a.demand.id} and d{b.demand.id} intersect"
                )
            if paths_intersect(a.main, b.recovery) or paths_intersect(
                b.main, a.recovery
            ):
                raise GenerationError("a main intersects a recovery reservation")
            mains_share_link = bool(
                set(a.main.link_ids()) & set(b.main.link_ids())
            )
            if mains_share_link and paths_intersect(a.recovery, b.recovery):
                raise GenerationError(
                    f"recoveries of d{a.demand.id}/d{b.demand.id} intersect "
                    "although their mains share a link"
                )


# ---------------------------------------------------------------------------
# Scenarios
# ---------------------------------------------------------------------------

def _split_by_break(provisioned, broken_link: int):
    broken = [pd for pd in provisioned if broken_link in pd.main.link_ids()]
    surviving = [pd for pd in provisioned if broken_link not in pd.main.link_ids()]
    return broken, surviving


def make_scenario(
    loaded: LoadedNetwork,
    broken_link: int,
    kind: str = "first",
    first_break: Optional[int] = None,
) -> Scenario:
    if kind not in ("first", "second"):
        raise GenerationError(f"unknown scenario kind {kind!r}")
    eligible = loaded.eligible_links()
    base_manifest = {
        "seed": loaded.seed,
        "modulation": loaded.modulation,
        "reach_km": loaded.reach_km,
        "width_schedule": list(loaded.width_schedule),
        "demands_provisioned": len(loaded.provisioned),
    }

    if kind == "first":
        if broken_link not in eligible:
            raise GenerationError(
                f"link {broken_link} not eligible (needs a width>1 main); "
                f"eligible links: {eligible}"
            )
        broken, surviving = _split_by_break(loaded.provisioned, broken_link)
        network = _restrict_network(
            loaded.topology,
            _occupation(pd.main for pd in surviving),
            drop_links={broken_link},
        )
        instance = RestorationInstance(
            network, tuple(pd.demand for pd in broken)
        )
        manifest = dict(
            base_manifest,
            kind="first",
            broken_link=broken_link,
            broken_demands=[pd.demand.id for pd in broken],
        )
        return Scenario("first", broken_link, instance, manifest=manifest)

    # second kind: break, re-provision the broken demands, then break again
    if first_break is None:
        candidates = [l for l in eligible if l != broken_link]
        if not candidates:
            raise GenerationError("no eligible link available for the first break")
        first_break = candidates[0]
    if first_break == broken_link:
        raise GenerationError("first and second break must differ")
    if first_break not in eligible:
        raise GenerationError(
            f"first break {first_break} not eligible; eligible links: {eligible}"
        )

    broken, surviving = _split_by_break(loaded.provisioned, first_break)
    routed: dict = {pd.demand.id: pd.main for pd in surviving}
    demands: dict = {pd.demand.id: pd.demand for pd in loaded.provisioned}

    # replacement phase: first-fit in demand order, falling back to the
    # recorded recovery paths if the greedy pass gets stuck
    replacement_policy = "first_fit"
    post_break = _Router(loaded.topology)
    post_break.free_main[post_break.edge_index[first_break], :] = 0
    post_break.free_strict[post_break.edge_index[first_break], :] = 0
    for path in routed.values():
        post_break.occupy_main(path)
    replacements: dict = {}
    for pd in sorted(broken, key=lambda p: p.demand.id):
        path = post_break.first_fit(
            pd.demand.s, pd.demand.t, pd.demand.width, pd.demand.reach,
            post_break.free_strict,
        )
        if path is None:
            replacement_policy = "recorded_recovery"
            replacements = {pd.demand.id: pd.recovery for pd in broken}
            break
        replacements[pd.demand.id] = path
        post_break.occupy_main(path)
    routed.update(replacements)

    eligible2 = sorted(
        {
            link_id
            for d_id, path in routed.items()
            if demands[d_id].width > 1
            for link_id in path.link_ids()
            if link_id != first_break
        }
    )
    if broken_link not in eligible2:
        raise GenerationError(
            f"link {broken_link} not eligible for the second break; "
            f"eligible links: {eligible2}"
        )
    broken2 = sorted(
        d_id for d_id, path in routed.items() if broken_link in path.link_ids()
    )
    surviving_paths = [
        path for d_id, path in routed.items() if d_id not in broken2
    ]
    network = _restrict_network(
        loaded.topology,
        _occupation(surviving_paths),
        drop_links={first_break, broken_link},
    )
    instance = RestorationInstance(
        network, tuple(demands[d_id] for d_id in broken2)
    )
    manifest = dict(
        base_manifest,
        kind="second",
        broken_link=broken_link,
        first_break=first_break,
        replacement_policy=replacement_policy,
        broken_demands=broken2,
    )
    return Scenario(
        "second",
        broken_link,
        instance,
        first_break=first_break,
        replacement_policy=replacement_policy,
        manifest=manifest,
    )
