"""
Constructive model of F_A flows on S^3 built from fat round handles.

A flow is the set of its periodic orbits together with the canonical regions
where identifications take place. Every flow is grown from the zero-saddle
Hopf flow by replacing one attractive or repulsive orbit at a time with a
basic fat handle (hdu, ddu, hu, du); each replacement is one construction step
and contributes one saddle orbit.

Removing an orbit yields a fat handle whose class follows from what is left
in the vacated canonical region:

- the orbit was a Hopf component: thick torus, class [I] (partner in the core)
- the region is left empty: solid torus, class [II]
- one orbit d is left in the region: solid torus, class [III]

Gluing a class [I] handle to a class [II] handle generates a bitorus and is
rejected; gluing two solid tori creates one heteroclinic trajectory from the
saddle of the repulsive handle to the saddle of the attractive one.
"""
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property, lru_cache
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from calculus.errors import (
    BitorusError,
    FlowModelError,
    IdentificationError,
    PolarityError,
    SelectorError,
)
from calculus.link_algebra import IndexedLink, OrbitId, OrbitIndex


class Polarity(Enum):
    REPULSIVE = "repulsive"
    ATTRACTIVE = "attractive"

    @property
    def opposite(self) -> "Polarity":
        return Polarity.ATTRACTIVE if self is Polarity.REPULSIVE else Polarity.REPULSIVE

    @property
    def removed_index(self) -> OrbitIndex:
        # a repulsive fat handle is obtained by removing an attractive orbit
        return OrbitIndex.ATTRACTIVE if self is Polarity.REPULSIVE else OrbitIndex.REPULSIVE

    @property
    def kept_index(self) -> OrbitIndex:
        return self.removed_index.dual

    @staticmethod
    def after_removing(index: OrbitIndex) -> "Polarity":
        if index == OrbitIndex.ATTRACTIVE:
            return Polarity.REPULSIVE
        if index == OrbitIndex.REPULSIVE:
            return Polarity.ATTRACTIVE
        raise FlowModelError("Saddle orbits cannot be removed to form a fat handle.")


class HandleClass(Enum):
    CLASS_I = "I"
    CLASS_II = "II"
    CLASS_III = "III"

    @property
    def is_solid(self) -> bool:
        return self is not HandleClass.CLASS_I

    @property
    def label(self) -> str:
        return f"[{self.value}]"


class WadaOp(Enum):
    I = "I"
    II = "II"
    III = "III"


class BasicHandleKind(Enum):
    HDU = "hdu"
    DDU = "ddu"
    HU = "hu"
    DU = "du"

    @property
    def is_thick(self) -> bool:
        return self in (BasicHandleKind.HDU, BasicHandleKind.DDU)

    @property
    def handle_class(self) -> HandleClass:
        return {
            BasicHandleKind.HDU: HandleClass.CLASS_I,
            BasicHandleKind.DDU: HandleClass.CLASS_I,
            BasicHandleKind.HU: HandleClass.CLASS_II,
            BasicHandleKind.DU: HandleClass.CLASS_III,
        }[self]

    @property
    def wada_op(self) -> WadaOp:
        return {
            BasicHandleKind.HDU: WadaOp.I,
            BasicHandleKind.DDU: WadaOp.II,
            BasicHandleKind.HU: WadaOp.II,
            BasicHandleKind.DU: WadaOp.III,
        }[self]


@dataclass(frozen=True)
class Region:
    id: int
    residents: FrozenSet[OrbitId]
    adjacent_saddles: FrozenSet[OrbitId] = frozenset()


@dataclass(frozen=True)
class ConstructionStep:
    replaced_orbit: OrbitId
    attached: BasicHandleKind
    polarity: Polarity
    new_saddle: OrbitId
    derived_handle_class: HandleClass
    produced_heteroclinic: Optional[Tuple[OrbitId, OrbitId]] = None
    d_index: Optional[OrbitIndex] = None
    created: Tuple[OrbitId, ...] = ()

    @property
    def attached_class(self) -> HandleClass:
        return self.attached.handle_class

    @property
    def is_solid_gluing(self) -> bool:
        return self.derived_handle_class.is_solid and self.attached_class.is_solid


@dataclass(frozen=True)
class FlowModel:
    orbits: Dict[OrbitId, OrbitIndex]
    hopf_pairs: FrozenSet[FrozenSet[OrbitId]]
    regions: Tuple[Region, ...]
    frontier: Dict[OrbitId, Optional[OrbitId]]
    construction_log: Tuple[ConstructionStep, ...] = ()
    heteroclinic_edges: FrozenSet[Tuple[OrbitId, OrbitId]] = frozenset()
    next_id: int = 0

    @property
    def saddles(self) -> List[OrbitId]:
        return sorted(o for o, i in self.orbits.items() if i == OrbitIndex.SADDLE)

    @property
    def non_saddles(self) -> List[OrbitId]:
        return sorted(o for o, i in self.orbits.items() if i != OrbitIndex.SADDLE)

    @property
    def saddle_count(self) -> int:
        return len(self.saddles)

    def index_of(self, k: OrbitId) -> OrbitIndex:
        try:
            return self.orbits[k]
        except KeyError:
            raise FlowModelError(f"Unknown orbit id {k}.")

    @cached_property
    def _partners(self) -> Dict[OrbitId, OrbitId]:
        out = {}
        for pair in self.hopf_pairs:
            a, b = sorted(pair)
            out[a], out[b] = b, a
        return out

    @cached_property
    def _residence(self) -> Dict[OrbitId, Region]:
        return {o: region for region in self.regions for o in region.residents}

    def partner_of(self, k: OrbitId) -> Optional[OrbitId]:
        return self._partners.get(k)

    def is_hopf_member(self, k: OrbitId) -> bool:
        return k in self._partners

    def region_of(self, k: OrbitId) -> Region:
        try:
            return self._residence[k]
        except KeyError:
            raise FlowModelError(f"Orbit {k} does not live in any canonical region.")

    def orbit_label(self, k: OrbitId) -> str:
        idx = self.index_of(k)
        if idx == OrbitIndex.SADDLE:
            return f"u{self.saddles.index(k) + 1}"
        return f"{'r' if idx == OrbitIndex.REPULSIVE else 'a'}{k}"

    def step_of_saddle(self, s: OrbitId) -> int:
        """1-based number of the construction step that created saddle s."""
        for number, step in enumerate(self.construction_log, start=1):
            if step.new_saddle == s:
                return number
        raise FlowModelError(f"Saddle {s} was not created by any construction step.")


@dataclass(frozen=True)
class FatHandle:
    polarity: Polarity
    handle_class: HandleClass
    content: FlowModel
    vacated: FrozenSet[OrbitId]
    removed: OrbitId
    removed_index: OrbitIndex
    frontier_saddle: Optional[OrbitId] = None
    core: Optional[OrbitId] = None
    resident: Optional[OrbitId] = None

    @property
    def saddle_count(self) -> int:
        return self.content.saddle_count

    @property
    def name(self) -> str:
        """Short name: complete Hopf pairs as h, other orbits d, saddles u."""
        paired = {o for pair in self.content.hopf_pairs for o in pair}
        singles = [o for o in self.content.non_saddles if o not in paired]
        return "h" * len(self.content.hopf_pairs) + "d" * len(singles) + "u" * self.saddle_count

    @property
    def basic_kind(self) -> Optional[BasicHandleKind]:
        if self.saddle_count != 1:
            return None
        try:
            return BasicHandleKind(self.name)
        except ValueError:
            return None

    @property
    def missing_indices(self) -> FrozenSet[OrbitIndex]:
        """Indices 0/2 absent from the handle; such a handle only becomes a flow once glued."""
        present = set(self.content.orbits.values())
        return frozenset(i for i in (OrbitIndex.REPULSIVE, OrbitIndex.ATTRACTIVE) if i not in present)

    @property
    def frontier(self) -> Dict[str, Optional[OrbitId]]:
        if self.handle_class is HandleClass.CLASS_I:
            return {"core": self.core}
        if self.handle_class is HandleClass.CLASS_III:
            return {"resident": self.resident, "saddle": self.frontier_saddle}
        return {"saddle": self.frontier_saddle}


def _make_region(residents: Iterable[OrbitId], frontier: Dict[OrbitId, Optional[OrbitId]]) -> Region:
    residents = frozenset(residents)
    adjacent = frozenset(frontier[o] for o in residents if frontier.get(o) is not None)
    return Region(id=min(residents), residents=residents, adjacent_saddles=adjacent)


def hopf_flow() -> FlowModel:
    """The generator: Hopf link with indices 0 and 2, no saddle orbit."""
    return FlowModel(
        orbits={0: OrbitIndex.REPULSIVE, 1: OrbitIndex.ATTRACTIVE},
        hopf_pairs=frozenset({frozenset({0, 1})}),
        regions=(Region(id=0, residents=frozenset({0, 1})),),
        frontier={0: None, 1: None},
        next_id=2,
    )


@lru_cache(maxsize=None)
def _primitive_handle(
    kind: BasicHandleKind,
    polarity: Polarity,
    d_index: Optional[OrbitIndex] = None,
) -> FatHandle:
    """Basic fat handle laid out with ids 0..n-1 and an empty construction log."""
    keep = polarity.kept_index
    if kind is BasicHandleKind.HDU:
        # I(h,h) minus one Hopf component: another h plus the core partner
        orbits = {0: OrbitIndex.REPULSIVE, 1: OrbitIndex.ATTRACTIVE, 2: keep, 3: OrbitIndex.SADDLE}
        pairs = frozenset({frozenset({0, 1})})
        kept_regions, vacated, core, resident = [{0, 1}], {2}, 2, None
    elif kind is BasicHandleKind.DDU:
        if d_index is None or OrbitIndex(d_index) == OrbitIndex.SADDLE:
            raise SelectorError("A ddu handle needs the index (0 or 2) of its separated orbit d.")
        orbits = {0: keep, 1: OrbitIndex(d_index), 2: OrbitIndex.SADDLE}
        pairs = frozenset()
        kept_regions, vacated, core, resident = [{1}], {0}, 0, None
    elif kind is BasicHandleKind.HU:
        # II(h,h) minus its separated d: nothing left in the identification region
        orbits = {0: OrbitIndex.REPULSIVE, 1: OrbitIndex.ATTRACTIVE, 2: OrbitIndex.SADDLE}
        pairs = frozenset({frozenset({0, 1})})
        kept_regions, vacated, core, resident = [{0, 1}], set(), None, None
    else:
        orbits = {0: keep, 1: OrbitIndex.SADDLE}
        pairs = frozenset()
        kept_regions, vacated, core, resident = [], {0}, None, 0
    saddle = max(orbits)
    frontier = {o: saddle for o, i in orbits.items() if i != OrbitIndex.SADDLE}
    content = FlowModel(
        orbits=orbits,
        hopf_pairs=pairs,
        regions=tuple(_make_region(r, frontier) for r in kept_regions),
        frontier=frontier,
        next_id=len(orbits),
    )
    return FatHandle(
        polarity=polarity,
        handle_class=kind.handle_class,
        content=content,
        vacated=frozenset(vacated),
        removed=-1,
        removed_index=polarity.removed_index,
        frontier_saddle=saddle,
        core=core,
        resident=resident,
    )


def remove_orbit(flow: FlowModel, k: OrbitId) -> FatHandle:
    idx = flow.index_of(k)
    polarity = Polarity.after_removing(idx)
    region = flow.region_of(k)
    remaining = region.residents - {k}
    partner = flow.partner_of(k)

    core = resident = None
    if partner is not None:
        handle_class, core = HandleClass.CLASS_I, partner
    elif not remaining:
        handle_class = HandleClass.CLASS_II
    elif len(remaining) == 1:
        handle_class, (resident,) = HandleClass.CLASS_III, tuple(remaining)
    else:
        raise FlowModelError(
            f"Orbit {k} shares its canonical region with {len(remaining)} orbits; no handle class applies."
        )

    orbits = {o: i for o, i in flow.orbits.items() if o != k}
    frontier = {o: s for o, s in flow.frontier.items() if o != k}
    content = replace(
        flow,
        orbits=orbits,
        hopf_pairs=frozenset(p for p in flow.hopf_pairs if k not in p),
        regions=tuple(r for r in flow.regions if r.id != region.id),
        frontier=frontier,
    )
    return FatHandle(
        polarity=polarity,
        handle_class=handle_class,
        content=content,
        vacated=frozenset(remaining),
        removed=k,
        removed_index=idx,
        frontier_saddle=flow.frontier.get(k),
        core=core,
        resident=resident,
    )


def classify(fh: FatHandle) -> HandleClass:
    return fh.handle_class


def _check_polarities(a: FatHandle, r: FatHandle) -> None:
    if a.polarity is not Polarity.ATTRACTIVE or r.polarity is not Polarity.REPULSIVE:
        raise PolarityError(
            f"Identification needs one attractive and one repulsive fat handle, "
            f"got {a.polarity.value} and {r.polarity.value}."
        )


def admissible(a: FatHandle, r: FatHandle) -> bool:
    _check_polarities(a, r)
    return {a.handle_class, r.handle_class} != {HandleClass.CLASS_I, HandleClass.CLASS_II}


def _shift(o: Optional[OrbitId], offset: int) -> Optional[OrbitId]:
    return None if o is None else o + offset


def _relabel_handle(fh: FatHandle, offset: int) -> FatHandle:
    if offset == 0:
        return fh
    c = fh.content
    frontier = {o + offset: _shift(s, offset) for o, s in c.frontier.items()}
    log = tuple(
        replace(
            step,
            replaced_orbit=step.replaced_orbit + offset,
            new_saddle=step.new_saddle + offset,
            produced_heteroclinic=(
                None if step.produced_heteroclinic is None
                else tuple(s + offset for s in step.produced_heteroclinic)
            ),
            created=tuple(o + offset for o in step.created),
        )
        for step in c.construction_log
    )
    content = FlowModel(
        orbits={o + offset: i for o, i in c.orbits.items()},
        hopf_pairs=frozenset(frozenset(o + offset for o in p) for p in c.hopf_pairs),
        regions=tuple(_make_region((o + offset for o in r.residents), frontier) for r in c.regions),
        frontier=frontier,
        construction_log=log,
        heteroclinic_edges=frozenset((s + offset, t + offset) for s, t in c.heteroclinic_edges),
        next_id=c.next_id + offset,
    )
    return replace(
        fh,
        content=content,
        vacated=frozenset(o + offset for o in fh.vacated),
        removed=fh.removed + offset,
        frontier_saddle=_shift(fh.frontier_saddle, offset),
        core=_shift(fh.core, offset),
        resident=_shift(fh.resident, offset),
    )


def _separated_index(guest: FatHandle) -> Optional[OrbitIndex]:
    if guest.basic_kind is not BasicHandleKind.DDU:
        return None
    (d,) = [o for o in guest.content.non_saddles if o != guest.core]
    return guest.content.orbits[d]


def _glue(host: FatHandle, guest: FatHandle) -> FlowModel:
    """Identify host and guest along their boundaries; the guest brings one saddle."""
    att, rep = (host, guest) if host.polarity is Polarity.ATTRACTIVE else (guest, host)
    if not admissible(att, rep):
        raise BitorusError(
            f"Identifying {att.name} {att.handle_class.label} with {rep.name} {rep.handle_class.label} "
            f"is not admissible: it generates a bitorus."
        )
    kind = guest.basic_kind
    if kind is None:
        raise IdentificationError(f"Guest fat handle {guest.name} is not a basic fat handle.")

    guest = _relabel_handle(guest, host.content.next_id)
    h, g = host.content, guest.content
    (saddle,) = g.saddles

    frontier = {**h.frontier, **g.frontier}
    for o in host.vacated:
        if frontier[o] is None:
            frontier[o] = guest.frontier_saddle
    for o in guest.vacated:
        if frontier[o] is None:
            frontier[o] = host.frontier_saddle

    pairs = set(h.hopf_pairs | g.hopf_pairs)
    if host.handle_class is HandleClass.CLASS_I and guest.handle_class is HandleClass.CLASS_I:
        # the orbits in the two cores form a Hopf link
        pairs.add(frozenset({host.core, guest.core}))

    edges = set(h.heteroclinic_edges | g.heteroclinic_edges)
    produced = None
    if host.handle_class.is_solid and guest.handle_class.is_solid:
        if att.frontier_saddle is None or rep.frontier_saddle is None:
            raise FlowModelError("Solid fat handles must have a frontier saddle.")
        if host is att:
            produced = (guest.frontier_saddle, host.frontier_saddle)
        else:
            produced = (host.frontier_saddle, guest.frontier_saddle)
        edges.add(produced)

    regions = [_make_region(r.residents, frontier) for r in h.regions + g.regions]
    fused = host.vacated | guest.vacated
    if fused:
        regions.append(_make_region(fused, frontier))

    step = ConstructionStep(
        replaced_orbit=host.removed,
        attached=kind,
        polarity=guest.polarity,
        new_saddle=saddle,
        derived_handle_class=host.handle_class,
        produced_heteroclinic=produced,
        d_index=_separated_index(guest),
        created=tuple(sorted(g.orbits)),
    )
    return FlowModel(
        orbits={**h.orbits, **g.orbits},
        hopf_pairs=frozenset(pairs),
        regions=tuple(sorted(regions, key=lambda r: r.id)),
        frontier=frontier,
        construction_log=h.construction_log + (step,),
        heteroclinic_edges=frozenset(edges),
        next_id=g.next_id,
    )


def identify(a: FatHandle, r: FatHandle) -> FlowModel:
    """
    Identify an attractive and a repulsive fat handle along their boundaries.

    One of the two must be a basic fat handle (one saddle); it becomes the new
    construction step on top of the other handle's history.
    """
    _check_polarities(a, r)
    if not admissible(a, r):
        raise BitorusError(
            f"Identifying {a.name} {a.handle_class.label} with {r.name} {r.handle_class.label} "
            f"is not admissible: it generates a bitorus."
        )
    if r.saddle_count == 1:
        host, guest = a, r
    elif a.saddle_count == 1:
        host, guest = r, a
    else:
        raise IdentificationError(
            "Only identifications where one side is a basic fat handle are supported; "
            "replace orbits one basic handle at a time."
        )
    return _glue(host, guest)


def replace_orbit(
    flow: FlowModel,
    k: OrbitId,
    kind: BasicHandleKind,
    d_index: Optional[OrbitIndex] = None,
) -> FlowModel:
    """Replace orbit k by the basic fat handle `kind` of the same polarity as k."""
    host = remove_orbit(flow, k)
    guest = _primitive_handle(BasicHandleKind(kind), host.polarity.opposite, d_index)
    return _glue(host, guest)


def basic_flow(op, removed_index: Optional[int] = None) -> FlowModel:
    """
    One Wada operation on two Hopf links.

    For operation II, `removed_index` is the index of the component removed from
    the second Hopf link; the separated d keeps the other index.
    """
    op = WadaOp(op)
    generator = hopf_flow()
    site = 0
    if op is WadaOp.I:
        return replace_orbit(generator, site, BasicHandleKind.HDU)
    if op is WadaOp.III:
        return replace_orbit(generator, site, BasicHandleKind.DU)
    if removed_index is None or int(removed_index) not in (0, 2):
        raise SelectorError("Operation II needs the index (0 or 2) of the removed Hopf component.")
    return replace_orbit(generator, site, BasicHandleKind.DDU, OrbitIndex(removed_index).dual)


def basic_handle(
    kind: BasicHandleKind,
    polarity: Polarity,
    d_index: Optional[OrbitIndex] = None,
) -> FatHandle:
    """The basic fat handles hdu, ddu, hu, du, each obtained from a basic flow."""
    kind = BasicHandleKind(kind)
    gone = polarity.removed_index
    if kind is BasicHandleKind.HDU:
        flow = basic_flow(WadaOp.I)
    elif kind is BasicHandleKind.DDU:
        if d_index is None:
            raise SelectorError("A ddu handle needs the index (0 or 2) of its separated orbit d.")
        flow = basic_flow(WadaOp.II, removed_index=OrbitIndex(d_index).dual)
    elif kind is BasicHandleKind.HU:
        flow = basic_flow(WadaOp.II, removed_index=gone.dual)
    else:
        flow = basic_flow(WadaOp.III)
    for k in flow.non_saddles:
        if flow.orbits[k] != gone:
            continue
        if kind.is_thick != flow.is_hopf_member(k):
            continue
        return remove_orbit(flow, k)
    raise FlowModelError(f"No orbit of index {int(gone)} yields a {kind.value} handle.")


def link_of(flow: FlowModel) -> IndexedLink:
    paired = set()
    pairs = []
    for pair in sorted(flow.hopf_pairs, key=min):
        a, b = sorted(pair)
        paired.update(pair)
        pairs.append(((a, flow.orbits[a]), (b, flow.orbits[b])))
    separated = tuple((o, i) for o, i in sorted(flow.orbits.items()) if o not in paired)
    return IndexedLink(hopf_pairs=tuple(pairs), separated=separated)


def dual(flow: FlowModel) -> FlowModel:
    """Time reversal: indices 0 <-> 2, polarities swapped, heteroclinic edges reversed."""
    log = tuple(
        replace(
            step,
            polarity=step.polarity.opposite,
            d_index=None if step.d_index is None else step.d_index.dual,
            produced_heteroclinic=(
                None if step.produced_heteroclinic is None else step.produced_heteroclinic[::-1]
            ),
        )
        for step in flow.construction_log
    )
    return replace(
        flow,
        orbits={o: i.dual for o, i in flow.orbits.items()},
        construction_log=log,
        heteroclinic_edges=frozenset((t, s) for s, t in flow.heteroclinic_edges),
    )


def check_invariants(flow: FlowModel, complete: bool = True) -> None:
    """Raise FlowModelError if the model breaks one of its structural invariants."""
    link_of(flow)
    if flow.saddle_count != len(flow.construction_log):
        raise FlowModelError(
            f"{flow.saddle_count} saddles but {len(flow.construction_log)} construction steps."
        )
    indices = set(flow.orbits.values())
    if complete and not {OrbitIndex.REPULSIVE, OrbitIndex.ATTRACTIVE} <= indices:
        raise FlowModelError("A flow needs at least one repulsive and one attractive orbit.")
    housed = [o for r in flow.regions for o in r.residents]
    if sorted(housed) != flow.non_saddles:
        raise FlowModelError("Every attractive or repulsive orbit must live in exactly one region.")
    solid = sum(1 for step in flow.construction_log if step.is_solid_gluing)
    if solid != len(flow.heteroclinic_edges):
        raise FlowModelError(
            f"{len(flow.heteroclinic_edges)} heteroclinic edges for {solid} solid-torus identifications."
        )
