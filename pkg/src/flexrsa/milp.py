"""MILP construction for the generalized routing-and-spectrum problem.

Three variants over binary flow variables x[demand, directed link, color]:

* ``base``    - a variable for every color in {1..C}; variables on occupied
  colors are fixed to 0; contiguity uses the window family for c >= 2 plus the
  activation family only at the bottom of the spectrum.
* ``notrim``  - variables only for free colors (c in C_l), full constraints,
  first-color candidates derived from C_l alone.
* ``trimmed`` - variables only for useful triples from the trimming pass,
  full constraints, first-color candidates from trimming.

Modes: ``feasibility`` routes every demand (source out-flow = width);
``maxsubset`` adds selector variables y[d] and maximizes how many demands are
routed by rewarding each selected demand more than any flow could cost.

The builder is a pure function; models are deterministic given the instance
(variables and constraints come out in sorted demand/link/color order).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Union

from .model import InputError, RestorationInstance
from .trimming import UsefulTripleSet

VARIANTS = ("base", "notrim", "trimmed")
MODES = ("feasibility", "maxsubset")


class FlowVar(NamedTuple):
    demand: int
    link: int
    forward: bool
    color: int


class SelectVar(NamedTuple):
    demand: int


VariableKey = Union[FlowVar, SelectVar]


@dataclass
class LinearConstraint:
    """One row: sum(coeffs[v] * v) relation rhs, named by its provenance tag."""

    coeffs: dict
    relation: str  # "<=", "=", ">="
    rhs: float
    tag: str

    @property
    def family(self) -> str:
        return self.tag.split("_", 1)[0]


@dataclass
class MilpModel:
    variant: str
    mode: str
    variables: tuple
    objective: dict
    constraints: tuple
    fixed_zero: frozenset = frozenset()
    meta: dict = field(default_factory=dict)

    def flow_variables(self) -> list:
        return [v for v in self.variables if isinstance(v, FlowVar)]

    def select_variables(self) -> list:
        return [v for v in self.variables if isinstance(v, SelectVar)]


@dataclass(frozen=True)
class ModelStatistics:
    variant: str
    mode: str
    variables: int
    flow_variables: int
    select_variables: int
    fixed_zero: int
    constraints: int
    by_family: dict

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "mode": self.mode,
            "variables": self.variables,
            "flow_variables": self.flow_variables,
            "select_variables": self.select_variables,
            "fixed_zero": self.fixed_zero,
            "constraints": self.constraints,
            "by_family": dict(sorted(self.by_family.items())),
        }


def model_statistics(model: MilpModel) -> ModelStatistics:
    by_family: dict = {}
    for con in model.constraints:
        by_family[con.family] = by_family.get(con.family, 0) + 1
    flow = sum(1 for v in model.variables if isinstance(v, FlowVar))
    return ModelStatistics(
        variant=model.variant,
        mode=model.mode,
        variables=len(model.variables),
        flow_variables=flow,
        select_variables=len(model.variables) - flow,
        fixed_zero=len(model.fixed_zero),
        constraints=len(model.constraints),
        by_family=by_family,
    )


def _variant_colors(instance, triples, variant):
    """Per (demand, link): (variable colors, first-color candidates)."""
    net = instance.network
    all_colors = range(1, net.slot_count + 1)
    cols: dict = {}
    first: dict = {}
    for d in instance.demands:
        w = d.width
        last_first = net.slot_count - w + 1
        by_link = triples.useful_colors_by_link(d.id) if variant == "trimmed" else {}
        for l in net.links:
            free = net.available[l.id]
            if variant == "base":
                cols[(d.id, l.id)] = list(all_colors)
                first[(d.id, l.id)] = set(all_colors)
            elif variant == "notrim":
                cols[(d.id, l.id)] = sorted(free)
                first[(d.id, l.id)] = {
                    c
                    for c in free
                    if c <= last_first and all(c + k in free for k in range(w))
                }
            else:  # trimmed
                cols[(d.id, l.id)] = sorted(by_link.get(l.id, set()))
                first[(d.id, l.id)] = set(triples.first_colors_of(d.id, l.id))
    return cols, first


def build_model(
    instance: RestorationInstance,
    triples: Optional[UsefulTripleSet],
    variant: str = "trimmed",
    mode: str = "feasibility",
) -> MilpModel:
    if variant not in VARIANTS:
        raise InputError(f"unknown variant {variant!r}")
    if mode not in MODES:
        raise InputError(f"unknown mode {mode!r}")
    if variant == "trimmed" and triples is None:
        raise InputError("trimmed variant requires a useful-triple set")
    if mode == "maxsubset" and triples is not None:
        stuck = sorted(
            d.id for d in instance.demands if d.id in triples.non_reroutable
        )
        if stuck:
            raise InputError(
                "maxsubset mode requires non-re-routable demands to be removed "
                f"first: {stuck}"
            )

    net = instance.network
    demands = sorted(instance.demands, key=lambda d: d.id)
    links = net.links  # already sorted by id
    cols, first = _variant_colors(instance, triples, variant)

    variables: list = []
    exists: set = set()
    fixed_zero: set = set()
    for d in demands:
        for l in links:
            for fwd in (True, False):
                for c in cols[(d.id, l.id)]:
                    var = FlowVar(d.id, l.id, fwd, c)
                    variables.append(var)
                    exists.add(var)
                    if variant == "base" and c not in net.available[l.id]:
                        fixed_zero.add(var)
    select: dict = {}
    if mode == "maxsubset":
        for d in demands:
            select[d.id] = SelectVar(d.id)
            variables.append(select[d.id])

    node_index = {n: i for i, n in enumerate(net.nodes)}
    incident: dict = {n: [] for n in net.nodes}
    for l in links:
        incident[l.u].append(l)
        incident[l.v].append(l)

    def out_in_vars(d_id, node, c):
        """(outgoing, incoming) directed flow vars of demand d at a node/color."""
        out, inn = [], []
        for l in incident[node]:
            fwd = FlowVar(d_id, l.id, True, c)
            bwd = FlowVar(d_id, l.id, False, c)
            if node == l.u:
                if fwd in exists:
                    out.append(fwd)
                if bwd in exists:
                    inn.append(bwd)
            else:
                if bwd in exists:
                    out.append(bwd)
                if fwd in exists:
                    inn.append(fwd)
        return out, inn

    constraints: list = []

    # flow conservation at inner nodes, per demand and color
    for d in demands:
        for c in range(1, net.slot_count + 1):
            for node in net.nodes:
                if node == d.s or node == d.t:
                    continue
                out, inn = out_in_vars(d.id, node, c)
                if not out and not inn:
                    continue
                coeffs: dict = {}
                for v in out:
                    coeffs[v] = coeffs.get(v, 0) + 1
                for v in inn:
                    coeffs[v] = coeffs.get(v, 0) - 1
                coeffs = {v: k for v, k in coeffs.items() if k != 0}
                if not coeffs:
                    continue
                constraints.append(
                    LinearConstraint(
                        coeffs, "=", 0,
                        f"flow_d{d.id}_c{c}_n{node_index[node]}",
                    )
                )

    # source constraints: out-flow equals width (or width * y), in-flow zero
    for d in demands:
        out_all, in_all = [], []
        for c in range(1, net.slot_count + 1):
            out, inn = out_in_vars(d.id, d.s, c)
            out_all.extend(out)
            in_all.extend(inn)
        coeffs = {v: 1 for v in out_all}
        if mode == "maxsubset":
            coeffs[select[d.id]] = -d.width
            constraints.append(
                LinearConstraint(coeffs, "=", 0, f"srcout_d{d.id}")
            )
        else:
            # kept even with no terms: a demand without any variable at its
            # source makes the model infeasible, and the row records why
            constraints.append(
                LinearConstraint(coeffs, "=", d.width, f"srcout_d{d.id}")
            )
        if in_all:
            constraints.append(
                LinearConstraint({v: 1 for v in in_all}, "=", 0, f"srcin_d{d.id}")
            )

    # reachability: occupied length is at most reach * width
    for d in demands:
        coeffs = {}
        for l in links:
            if l.length == 0:
                continue
            for fwd in (True, False):
                for c in cols[(d.id, l.id)]:
                    coeffs[FlowVar(d.id, l.id, fwd, c)] = l.length
        if coeffs:
            constraints.append(
                LinearConstraint(coeffs, "<=", d.reach * d.width, f"reach_d{d.id}")
            )

    # unicolor: a (link, color) slot carries at most one demand, one direction
    for l in links:
        for c in range(1, net.slot_count + 1):
            coeffs = {}
            for d in demands:
                for fwd in (True, False):
                    v = FlowVar(d.id, l.id, fwd, c)
                    if v in exists:
                        coeffs[v] = 1
            if coeffs:
                constraints.append(
                    LinearConstraint(coeffs, "<=", 1, f"uni_l{l.id}_c{c}")
                )

    # contiguity families; identically true for width-1 demands, so skipped
    def emit_contiguity(d, l, fwd):
        w = d.width
        key = (d.id, l.id)
        dir_tag = "f" if fwd else "b"
        firsts = first[key]
        for c in cols[key]:
            var_c = FlowVar(d.id, l.id, fwd, c)
            if c in firsts:
                coeffs = {}
                for k in range(w):
                    v = FlowVar(d.id, l.id, fwd, c + k)
                    if v in exists:
                        coeffs[v] = coeffs.get(v, 0) + 1
                coeffs[var_c] = coeffs.get(var_c, 0) - w
                if c - 1 in firsts:
                    prev = FlowVar(d.id, l.id, fwd, c - 1)
                    coeffs[prev] = coeffs.get(prev, 0) + w
                    fam = "ctgA"
                else:
                    fam = "ctgB"
                coeffs = {v: k for v, k in coeffs.items() if k != 0}
                constraints.append(
                    LinearConstraint(
                        coeffs, ">=", 0, f"{fam}_d{d.id}_l{l.id}{dir_tag}_c{c}"
                    )
                )
            elif variant != "base":
                prev = FlowVar(d.id, l.id, fwd, c - 1)
                coeffs = {var_c: -1}
                if prev in exists:
                    coeffs[prev] = 1
                constraints.append(
                    LinearConstraint(
                        coeffs, ">=", 0, f"ctgC_d{d.id}_l{l.id}{dir_tag}_c{c}"
                    )
                )

    for d in demands:
        if d.width == 1:
            continue
        for l in links:
            for fwd in (True, False):
                emit_contiguity(d, l, fwd)

    # objective
    objective: dict = {}
    for v in variables:
        if isinstance(v, FlowVar):
            objective[v] = 1
    undirected_triples = sum(len(cs) for cs in cols.values())
    big_m = undirected_triples + 1
    if mode == "maxsubset":
        for d in demands:
            objective[select[d.id]] = -big_m

    meta = {
        "undirected_triples": undirected_triples,
        "big_m": big_m if mode == "maxsubset" else None,
        "demands": [d.id for d in demands],
    }
    return MilpModel(
        variant=variant,
        mode=mode,
        variables=tuple(variables),
        objective=objective,
        constraints=tuple(constraints),
        fixed_zero=frozenset(fixed_zero),
        meta=meta,
    )
