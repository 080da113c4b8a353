"""
Partial order of saddle orbits induced by heteroclinic trajectories, the
total chain of F_3 flows, and commutation of construction steps.
"""
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

import networkx as nx

from calculus.errors import FatHandleError, FlowModelError, NotF3Error, OrderCycleError
from calculus.flow_model import BasicHandleKind, ConstructionStep, FlowModel, hopf_flow, remove_orbit, replace_orbit
from calculus.isomorphism import canonical_key
from calculus.link_algebra import OrbitId, OrbitIndex

REPELLER_LABEL = "d_r"
ATTRACTOR_LABEL = "d_a"


@dataclass(frozen=True)
class SaddlePoset:
    """Strict order s < t iff a chain of heteroclinic trajectories runs from s to t."""

    elements: Tuple[OrbitId, ...]
    relation: FrozenSet[Tuple[OrbitId, OrbitId]]
    covers: FrozenSet[Tuple[OrbitId, OrbitId]]
    labels: Dict[OrbitId, str] = field(default_factory=dict)

    def less(self, s: OrbitId, t: OrbitId) -> bool:
        return (s, t) in self.relation

    def comparable(self, s: OrbitId, t: OrbitId) -> bool:
        return s == t or self.less(s, t) or self.less(t, s)

    def label(self, s: OrbitId) -> str:
        return self.labels.get(s, str(s))

    def __len__(self) -> int:
        return len(self.elements)


def _order_graph(flow: FlowModel) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(flow.saddles)
    g.add_edges_from(flow.heteroclinic_edges)
    if not nx.is_directed_acyclic_graph(g):
        cycle = nx.find_cycle(g)
        raise OrderCycleError(f"Heteroclinic trajectories form a cycle: {cycle}")
    return g


def _poset_from_graph(g: nx.DiGraph, labels: Dict[OrbitId, str]) -> SaddlePoset:
    closure = nx.transitive_closure_dag(g)
    reduction = nx.transitive_reduction(g)
    return SaddlePoset(
        elements=tuple(nx.lexicographical_topological_sort(g)),
        relation=frozenset(closure.edges()),
        covers=frozenset(reduction.edges()),
        labels=labels,
    )


def saddle_poset(flow: FlowModel) -> SaddlePoset:
    g = _order_graph(flow)
    return _poset_from_graph(g, {s: flow.orbit_label(s) for s in flow.saddles})


def is_total(poset: SaddlePoset) -> bool:
    return all(poset.comparable(s, t) for s, t in combinations(poset.elements, 2))


def is_f3(flow: FlowModel) -> bool:
    log = flow.construction_log
    return bool(log) and all(step.attached is BasicHandleKind.DU for step in log)


def f3_poset(flow: FlowModel) -> SaddlePoset:
    """Saddle order of an F_3 flow extended by its repelling and attracting orbits."""
    if not is_f3(flow):
        raise NotF3Error("Only flows built with operation III alone have an F_3 chain.")
    g = _order_graph(flow)
    labels = {s: flow.orbit_label(s) for s in flow.saddles}
    ends = {OrbitIndex.REPULSIVE: [], OrbitIndex.ATTRACTIVE: []}
    for o in flow.non_saddles:
        ends[flow.orbits[o]].append(o)
    if len(ends[OrbitIndex.REPULSIVE]) != 1 or len(ends[OrbitIndex.ATTRACTIVE]) != 1:
        raise FlowModelError("An F_3 flow has exactly one repelling and one attracting orbit.")
    (d_r,), (d_a,) = ends[OrbitIndex.REPULSIVE], ends[OrbitIndex.ATTRACTIVE]
    labels[d_r], labels[d_a] = REPELLER_LABEL, ATTRACTOR_LABEL
    for s in flow.saddles:
        g.add_edge(d_r, s)
        g.add_edge(s, d_a)
    return _poset_from_graph(g, labels)


def f3_chain(flow: FlowModel) -> List[OrbitId]:
    poset = f3_poset(flow)
    if not is_total(poset):
        raise FlowModelError("Saddle order of an F_3 flow is not total.")
    return list(poset.elements)


def chain_labels(flow: FlowModel) -> List[str]:
    poset = f3_poset(flow)
    return [poset.label(x) for x in f3_chain(flow)]


def replay(
    steps: Sequence[Tuple[int, ConstructionStep]],
) -> Optional[Tuple[FlowModel, Dict[OrbitId, int]]]:
    """
    Rebuild a flow from (step number, step) pairs in the given order.

    Returns the flow and a map from each new saddle to its step number, or
    None when some step no longer applies.
    """
    flow = hopf_flow()
    ids: Dict[OrbitId, OrbitId] = {0: 0, 1: 1}
    numbers: Dict[OrbitId, int] = {}
    for number, step in steps:
        site = ids.get(step.replaced_orbit)
        if site is None or site not in flow.orbits:
            return None
        try:
            flow = replace_orbit(flow, site, step.attached, step.d_index)
        except FatHandleError:
            return None
        rebuilt = flow.construction_log[-1]
        ids.update(zip(step.created, rebuilt.created))
        numbers[rebuilt.new_saddle] = number
    return flow, numbers


def _sites(flow: FlowModel, ids: Dict[OrbitId, OrbitId], step: ConstructionStep) -> List[OrbitId]:
    """The orbit the step replaced, or every orbit that could stand in for it once it is gone."""
    site = ids.get(step.replaced_orbit)
    if site is not None and site in flow.orbits:
        return [site]
    index = step.polarity.kept_index
    return [
        o for o in flow.non_saddles
        if flow.orbits[o] == index and remove_orbit(flow, o).handle_class is step.derived_handle_class
    ]


def _rebuild(
    flow: FlowModel,
    ids: Dict[OrbitId, OrbitId],
    numbers: Dict[OrbitId, int],
    steps: Sequence[Tuple[int, ConstructionStep]],
    target: str,
) -> Optional[FlowModel]:
    if not steps:
        return flow if canonical_key(flow, numbers) == target else None
    (number, step), rest = steps[0], steps[1:]
    for site in _sites(flow, ids, step):
        try:
            child = replace_orbit(flow, site, step.attached, step.d_index)
        except FatHandleError:
            continue
        made = child.construction_log[-1]
        found = _rebuild(
            child,
            {**ids, **dict(zip(step.created, made.created))},
            {**numbers, made.new_saddle: number},
            rest,
            target,
        )
        if found is not None:
            return found
    return None


def _step_numbers(flow: FlowModel) -> Dict[OrbitId, int]:
    return {step.new_saddle: n for n, step in enumerate(flow.construction_log, start=1)}


def _reorders(count: int, i: int, j: int) -> List[List[int]]:
    """Orders of 1-based steps moving step i after step j, or step j before step i."""
    base = list(range(1, count + 1))
    delayed = [n for n in base if n != i]
    delayed.insert(delayed.index(j) + 1, i)
    advanced = [n for n in base if n != j]
    advanced.insert(advanced.index(i), j)
    out = [delayed]
    if advanced != delayed:
        out.append(advanced)
    return out


def swap_rebuild(flow: FlowModel, i: int, j: int) -> Optional[FlowModel]:
    """
    Rebuild with steps i < j exchanged; the rebuilt flow if it equals the
    original with every saddle keeping its step number.

    A step whose orbit does not exist yet in the new order (it was created by
    a step that now comes later) may act on any orbit of the same index and
    handle class instead.
    """
    log = flow.construction_log
    if not 1 <= i < j <= len(log):
        raise FlowModelError(f"Step numbers must satisfy 1 <= i < j <= {len(log)}, got {i}, {j}.")
    target = canonical_key(flow, _step_numbers(flow))
    for order in _reorders(len(log), i, j):
        rebuilt = _rebuild(hopf_flow(), {0: 0, 1: 1}, {}, [(n, log[n - 1]) for n in order], target)
        if rebuilt is not None:
            return rebuilt
    return None


def commuting_steps(flow: FlowModel) -> Set[FrozenSet[int]]:
    """Pairs of 1-based construction steps that can be exchanged without changing the flow."""
    poset = saddle_poset(flow)
    log = flow.construction_log
    out: Set[FrozenSet[int]] = set()
    for i, j in combinations(range(1, len(log) + 1), 2):
        if poset.comparable(log[i - 1].new_saddle, log[j - 1].new_saddle):
            continue
        if swap_rebuild(flow, i, j) is not None:
            out.add(frozenset({i, j}))
    return out
