"""
Brute-force census used to cross-check the enumerator.

Flows are kept as tagged networkx graphs (orbits, canonical regions, Hopf
links, frontier adjacencies, heteroclinic gadgets) and grown depth-first by
the replacement rules written out again here on the graph itself. A child is
kept when no flow found at its level is isomorphic to it under a pairwise VF2
test; candidates are only pre-split by their degree profile.
"""
from typing import Dict, List, Optional, Tuple

import networkx as nx

from calculus.errors import FlowModelError

KINDS = ("hdu", "ddu0", "ddu2", "hu", "du")
GUEST_CLASS = {"hdu": "I", "ddu0": "I", "ddu2": "I", "hu": "II", "du": "III"}

Node = Tuple[str, int]


def generator() -> nx.Graph:
    g = nx.Graph(next=2)
    g.add_node(("o", 0), tag="i0")
    g.add_node(("o", 1), tag="i2")
    g.add_node(("r", 0), tag="R")
    g.add_edge(("o", 0), ("r", 0), tag="in")
    g.add_edge(("o", 1), ("r", 0), tag="in")
    g.add_edge(("o", 0), ("o", 1), tag="link")
    return g


def _neighbours(g: nx.Graph, v: Node, tag: str) -> List[Node]:
    return sorted(w for w, e in g[v].items() if e["tag"] == tag)


def _index(g: nx.Graph, v: Node) -> int:
    return int(g.nodes[v]["tag"][1])


def _fresh(h: nx.Graph, kind: str, tag: str) -> Node:
    v = (kind, h.graph["next"])
    h.graph["next"] += 1
    h.add_node(v, tag=tag)
    return v


def grow(g: nx.Graph, k: Node, kind: str) -> Optional[nx.Graph]:
    """Replace orbit k by a basic fat handle; None when the gluing makes a bitorus."""
    idx = _index(g, k)
    (region,) = _neighbours(g, k, "in")
    remaining = [o for o in _neighbours(g, region, "in") if o != k]
    partner = _neighbours(g, k, "link")
    host = "I" if partner else ("II" if not remaining else "III")
    guest = GUEST_CLASS[kind]
    if {host, guest} == {"I", "II"}:
        return None
    frontier = _neighbours(g, k, "adj")

    h = g.copy()
    h.remove_node(k)
    h.remove_node(region)
    u = _fresh(h, "o", "i1")

    def orbit(i: int) -> Node:
        v = _fresh(h, "o", f"i{i}")
        h.add_edge(v, u, tag="adj")
        return v

    def room(*members: Node) -> None:
        r = _fresh(h, "r", "R")
        for v in members:
            h.add_edge(v, r, tag="in")

    brought: List[Node] = []
    if kind in ("hdu", "hu"):
        p, q = orbit(0), orbit(2)
        h.add_edge(p, q, tag="link")
        room(p, q)
    if kind == "hdu" or kind.startswith("ddu") or kind == "du":
        brought.append(orbit(idx))
    if kind.startswith("ddu"):
        room(orbit(int(kind[-1])))

    for o in remaining:
        if not _neighbours(h, o, "adj"):
            h.add_edge(o, u, tag="adj")
    if remaining or brought:
        room(*remaining, *brought)
    if host == "I" and guest == "I":
        h.add_edge(partner[0], brought[0], tag="link")
    if host != "I" and guest != "I":
        if not frontier:
            raise FlowModelError("A solid host handle must have a frontier saddle.")
        # from the saddle of the repulsive side to the saddle of the attractive side
        source, target = (u, frontier[0]) if idx == 0 else (frontier[0], u)
        e = _fresh(h, "e", "H")
        h.add_edge(source, e, tag="out")
        h.add_edge(e, target, tag="into")
    return h


def reversed_time(g: nx.Graph) -> nx.Graph:
    flip = {"i0": "i2", "i2": "i0", "out": "into", "into": "out"}
    h = g.copy()
    for _, d in h.nodes(data=True):
        d["tag"] = flip.get(d["tag"], d["tag"])
    for _, _, d in h.edges(data=True):
        d["tag"] = flip.get(d["tag"], d["tag"])
    return h


def _profile(g: nx.Graph) -> Tuple:
    return tuple(sorted(
        (d["tag"], tuple(sorted((e["tag"], g.nodes[w]["tag"]) for w, e in g[v].items())))
        for v, d in g.nodes(data=True)
    ))


def _same(g1: nx.Graph, g2: nx.Graph) -> bool:
    return nx.is_isomorphic(
        g1, g2,
        node_match=lambda a, b: a["tag"] == b["tag"],
        edge_match=lambda a, b: a["tag"] == b["tag"],
    )


class _Level:
    def __init__(self, dualize: bool):
        self.dualize = dualize
        self.members: List[nx.Graph] = []
        self.buckets: Dict[Tuple, List[nx.Graph]] = {}

    def add(self, g: nx.Graph) -> bool:
        looks = [g, reversed_time(g)] if self.dualize else [g]
        for look in looks:
            if any(_same(look, other) for other in self.buckets.get(_profile(look), [])):
                return False
        self.buckets.setdefault(_profile(g), []).append(g)
        self.members.append(g)
        return True


def oracle_levels(n: int, dualize: bool = False) -> List[List[nx.Graph]]:
    levels = [_Level(dualize) for _ in range(n + 1)]

    def visit(g: nx.Graph, depth: int) -> None:
        if not levels[depth].add(g) or depth == n:
            return
        for v in sorted(v for v, d in g.nodes(data=True) if d["tag"] in ("i0", "i2")):
            for kind in KINDS:
                child = grow(g, v, kind)
                if child is not None:
                    visit(child, depth + 1)

    visit(generator(), 0)
    return [level.members for level in levels]


def oracle_count(n: int, dualize: bool = False) -> int:
    return len(oracle_levels(n, dualize)[-1])
