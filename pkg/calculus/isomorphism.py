"""
Equality of flow models up to relabeling of orbit ids.

A flow is encoded as a coloured multigraph whose vertices are its canonical
regions and its saddle orbits. Every attractive or repulsive orbit is an edge
from its region to its frontier saddle, labelled by its index; a region is
coloured by whether its residents form a Hopf pair and by the indices of
residents without a frontier saddle. Heteroclinic trajectories are directed
saddle-to-saddle edges.

The canonical key is computed by colour refinement where new colours are the
ranks of sorted signatures, so they do not depend on orbit ids. While a cell
holds several vertices, each of them is individualised in turn and the least
certificate wins. Twins (same colour, same neighbourhood) are tried once.
Two flows are equal iff their keys are equal.
"""
import hashlib
from collections import Counter
from typing import Dict, List, Optional, Tuple

from calculus.errors import FlowModelError
from calculus.flow_model import FatHandle, FlowModel
from calculus.link_algebra import OrbitId, OrbitIndex

Adjacency = List[List[Tuple[int, int]]]
Certificate = Tuple[Tuple[str, ...], Tuple[Tuple[int, int, int], ...]]

HETEROCLINIC_OUT = 10
HETEROCLINIC_IN = 11
VACATED_FRONTIER_OUT = 12
VACATED_FRONTIER_IN = 13


class _Encoding:
    """Vertex labels and labelled adjacency lists of a flow (or of a fat handle)."""

    def __init__(self) -> None:
        self.labels: List[str] = []
        self.adj: Adjacency = []

    def vertex(self, label: str) -> int:
        self.labels.append(label)
        self.adj.append([])
        return len(self.labels) - 1

    def edge(self, u: int, v: int, out_label: int, in_label: int) -> None:
        self.adj[u].append((out_label, v))
        self.adj[v].append((in_label, u))


def _orbit_label(idx: OrbitIndex, reverse_time: bool) -> int:
    return 2 - int(idx) if reverse_time else int(idx)


def _encode(
    flow: FlowModel,
    saddle_labels: Optional[Dict[OrbitId, int]] = None,
    reverse_time: bool = False,
) -> Tuple[_Encoding, Dict[OrbitId, int]]:
    enc = _Encoding()
    saddles: Dict[OrbitId, int] = {}
    for s in flow.saddles:
        step = 0 if saddle_labels is None else saddle_labels.get(s, 0)
        saddles[s] = enc.vertex(f"S{step}")

    paired = {o for pair in flow.hopf_pairs for o in pair}
    for region in sorted(flow.regions, key=lambda r: r.id):
        residents = sorted(region.residents)
        hopf = any(frozenset(residents) == pair for pair in flow.hopf_pairs)
        if not hopf and any(o in paired for o in residents):
            raise FlowModelError(f"Region {region.id} holds a Hopf component whose partner lives elsewhere.")
        dangling = sorted(_orbit_label(flow.orbits[o], reverse_time) for o in residents if flow.frontier.get(o) is None)
        v = enc.vertex(f"R{int(hopf)}:{''.join(map(str, dangling))}")
        for o in residents:
            s = flow.frontier.get(o)
            if s is None:
                continue
            if s not in saddles:
                raise FlowModelError(f"Frontier of orbit {o} is {s}, which is not a saddle orbit.")
            label = _orbit_label(flow.orbits[o], reverse_time)
            enc.edge(v, saddles[s], label, label)

    for s, t in sorted(flow.heteroclinic_edges):
        if reverse_time:
            s, t = t, s
        enc.edge(saddles[s], saddles[t], HETEROCLINIC_OUT, HETEROCLINIC_IN)
    return enc, saddles


def _ranks(signatures: List) -> List[int]:
    order = {sig: rank for rank, sig in enumerate(sorted(set(signatures)))}
    return [order[sig] for sig in signatures]


def _refine(colors: List[int], adj: Adjacency) -> List[int]:
    cells = len(set(colors))
    while True:
        refined = _ranks([
            (colors[v], tuple(sorted([(label, colors[w]) for label, w in adj[v]])))
            for v in range(len(adj))
        ])
        found = len(set(refined))
        if found == cells:
            return refined
        colors, cells = refined, found


def _individualize(colors: List[int], v: int) -> List[int]:
    out = [2 * c + 1 for c in colors]
    out[v] -= 1
    return out


def _certificate(colors: List[int], enc: _Encoding) -> Certificate:
    order = sorted(range(len(colors)), key=colors.__getitem__)
    edges = sorted((colors[v], label, colors[w]) for v in range(len(colors)) for label, w in enc.adj[v])
    return tuple(enc.labels[v] for v in order), tuple(edges)


def _search(colors: List[int], enc: _Encoding) -> Certificate:
    colors = _refine(colors, enc.adj)
    sizes = Counter(colors)
    if len(sizes) == len(colors):
        return _certificate(colors, enc)
    _, target = min((size, c) for c, size in sizes.items() if size > 1)
    best: Optional[Certificate] = None
    tried = set()
    for v, c in enumerate(colors):
        if c != target:
            continue
        neighbourhood = tuple(sorted(enc.adj[v]))
        if neighbourhood in tried:
            continue
        tried.add(neighbourhood)
        cert = _search(_individualize(colors, v), enc)
        if best is None or cert < best:
            best = cert
    return best


def _key(enc: _Encoding) -> str:
    if not enc.labels:
        return "-"
    nodes, edges = _search(_ranks(enc.labels), enc)
    return "|".join(nodes) + "#" + ";".join(f"{a}.{label}.{b}" for a, label, b in edges)


def canonical_key(
    flow: FlowModel,
    saddle_labels: Optional[Dict[OrbitId, int]] = None,
    reverse_time: bool = False,
) -> str:
    """
    Canonical form of a flow as a string. With `saddle_labels`, saddles also
    carry the number of the construction step that created them; with
    `reverse_time`, the key is that of the dual flow.
    """
    enc, _ = _encode(flow, saddle_labels, reverse_time)
    return _key(enc)


def handle_key(fh: FatHandle) -> str:
    """Canonical form of a fat handle: its content plus the vacated identification region."""
    enc, saddles = _encode(fh.content)
    dangling = sorted(int(fh.content.orbits[o]) for o in fh.vacated if fh.content.frontier.get(o) is None)
    marker = enc.vertex(f"V{fh.polarity.value}:{fh.handle_class.value}:{''.join(map(str, dangling))}")
    for o in sorted(fh.vacated):
        s = fh.content.frontier.get(o)
        if s is not None:
            label = int(fh.content.orbits[o])
            enc.edge(marker, saddles[s], label, label)
    if fh.frontier_saddle is not None:
        enc.edge(marker, saddles[fh.frontier_saddle], VACATED_FRONTIER_OUT, VACATED_FRONTIER_IN)
    return _key(enc)


def flow_fingerprint(flow: FlowModel) -> str:
    """Short digest of the canonical key, for reports."""
    return hashlib.blake2b(canonical_key(flow).encode("utf-8"), digest_size=8).hexdigest()


def flows_equal(a: FlowModel, b: FlowModel) -> bool:
    if a.saddle_count != b.saddle_count or len(a.orbits) != len(b.orbits):
        return False
    return canonical_key(a) == canonical_key(b)


def census_key(flow: FlowModel, dualize: bool = False) -> str:
    """Key under which a flow is deduplicated; with dualize a flow and its dual share it."""
    key = canonical_key(flow)
    if not dualize:
        return key
    return min(key, canonical_key(flow, reverse_time=True))
