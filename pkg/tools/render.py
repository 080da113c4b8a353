"""
Diagrams: Hasse diagram of the saddle order, the construction filtration,
and a 2D schematic of nested tori.
"""
import io
import os
from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Optional

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
from matplotlib.patches import Circle, FancyArrowPatch, Wedge

import networkx as nx

from calculus.errors import DrawingSizeError
from calculus.flow_model import FlowModel
from calculus.link_algebra import OrbitIndex
from calculus.order import SaddlePoset

DEFAULT_MAX_DRAWABLE_SADDLES = 8

SVG_RC = {
    "svg.hashsalt": "fat-handles",
    "svg.fonttype": "none",
    "path.simplify": False,
}


class DiagramKind(Enum):
    HASSE = "hasse"
    FILTRATION = "filtration"
    SCHEMATIC = "schematic"


@dataclass(frozen=True)
class DiagramDoc:
    kind: DiagramKind
    body: str

    @property
    def extension(self) -> str:
        return ".svg" if self.kind is DiagramKind.SCHEMATIC else ".dot"


class DotGraph:
    """Directed graph emitted as DOT text with sorted nodes and edges."""

    def __init__(self, name: str, options: Optional[List[str]] = None):
        self.name = name
        self.options = options if options is not None else ["rankdir=BT", "node [shape=circle]"]
        self.nodes: List[str] = []
        self.edges: List[str] = []

    @staticmethod
    def _unpack(attrs: Dict[str, object]) -> str:
        return ",".join(f"{k}=\"{v}\"" for k, v in sorted(attrs.items()))

    def node(self, identifier: str, **attrs) -> None:
        self.nodes.append(f"\"{identifier}\" [{self._unpack(attrs)}]")

    def edge(self, a: str, b: str, **attrs) -> None:
        self.edges.append(f"\"{a}\" -> \"{b}\" [{self._unpack(attrs)}]")

    def render(self) -> str:
        lines = [f"digraph {self.name} {{"]
        for content in self.options + sorted(self.nodes) + sorted(self.edges):
            lines.append(f"  {content};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def hasse_dot(poset: SaddlePoset) -> DiagramDoc:
    g = DotGraph("hasse")
    for x in poset.elements:
        g.node(poset.label(x), label=poset.label(x))
    for s, t in poset.covers:
        g.edge(poset.label(s), poset.label(t))
    return DiagramDoc(DiagramKind.HASSE, g.render())


def filtration_dot(flow: FlowModel, commuting: Iterable[FrozenSet[int]] = ()) -> DiagramDoc:
    """Chain M1 -> ... -> Mn of construction steps; commuting pairs are joined by dashed edges."""
    g = DotGraph("filtration", options=["rankdir=LR", "node [shape=box]"])
    for n, step in enumerate(flow.construction_log, start=1):
        label = f"M{n}: {step.attached.value} on {step.derived_handle_class.label}"
        if step.produced_heteroclinic is not None:
            label += " +heteroclinic"
        g.node(f"M{n}", label=label)
        if n > 1:
            g.edge(f"M{n - 1}", f"M{n}")
    for pair in commuting:
        i, j = sorted(pair)
        g.edge(f"M{i}", f"M{j}", style="dashed", dir="none", constraint="false", label="commute")
    return DiagramDoc(DiagramKind.FILTRATION, g.render())


def _saddle_columns(flow: FlowModel) -> Dict[int, float]:
    order = nx.DiGraph()
    order.add_nodes_from(flow.saddles)
    order.add_edges_from(flow.heteroclinic_edges)
    return {s: float(x) for x, s in enumerate(nx.lexicographical_topological_sort(order))}


def schematic_svg(flow: FlowModel, max_saddles: int = DEFAULT_MAX_DRAWABLE_SADDLES) -> DiagramDoc:
    """
    Cross-section cartoon: saddles on a row (crossed markers), each canonical
    region as an annulus below, attractive orbits filled and repulsive ones
    hollow, heteroclinic trajectories as dashed arcs.
    """
    if flow.saddle_count > max_saddles:
        raise DrawingSizeError(
            f"Flow has {flow.saddle_count} saddles; schematics are limited to {max_saddles}."
        )
    columns = _saddle_columns(flow)
    width = max(len(columns), len(flow.regions), 1)

    with plt.rc_context(SVG_RC):
        fig, ax = plt.subplots(figsize=(1.6 * width + 1.0, 4.0))
        ax.set_aspect("equal")
        ax.axis("off")

        saddle_xy = {s: np.array([x, 1.2]) for s, x in columns.items()}
        for s, xy in saddle_xy.items():
            ax.plot([xy[0]], [xy[1]], marker="X", markersize=10, color="black", gid=f"saddle-{s}")
            ax.text(xy[0], xy[1] + 0.3, flow.orbit_label(s), ha="center", fontsize=9)

        for n, region in enumerate(flow.regions):
            adjacent = [saddle_xy[s][0] for s in sorted(region.adjacent_saddles) if s in saddle_xy]
            cx = float(np.mean(adjacent)) if adjacent else float(n)
            centre = np.array([cx, -0.8 - 0.9 * (n % 2)])
            ring = Wedge(tuple(centre), 0.45, 0, 360, width=0.12, facecolor="#dddddd", edgecolor="gray")
            ring.set_gid(f"region-{region.id}")
            ax.add_patch(ring)
            residents = sorted(region.residents)
            angles = np.linspace(0.0, 2 * np.pi, len(residents), endpoint=False)
            for o, angle in zip(residents, angles):
                radius = 0.2 if len(residents) > 1 else 0.0
                xy = centre + radius * np.array([np.cos(angle), np.sin(angle)])
                filled = flow.orbits[o] == OrbitIndex.ATTRACTIVE
                dot = Circle(tuple(xy), 0.07, facecolor="black" if filled else "white", edgecolor="black")
                dot.set_gid(f"orbit-{o}")
                ax.add_patch(dot)
                partner = flow.partner_of(o)
                if partner is not None and partner in region.residents and o < partner:
                    ax.add_patch(Circle(tuple(centre), 0.3, fill=False, edgecolor="black", linewidth=0.6))
                saddle = flow.frontier.get(o)
                if saddle in saddle_xy:
                    ax.plot(
                        [xy[0], saddle_xy[saddle][0]], [xy[1], saddle_xy[saddle][1]],
                        color="gray", linewidth=0.5,
                    )

        for n, (s, t) in enumerate(sorted(flow.heteroclinic_edges)):
            arc = FancyArrowPatch(
                tuple(saddle_xy[s]), tuple(saddle_xy[t]),
                connectionstyle="arc3,rad=-0.5", arrowstyle="->", linestyle="--",
                mutation_scale=10, color="black",
            )
            arc.set_gid(f"heteroclinic-{n}")
            ax.add_patch(arc)

        ax.set_xlim(-1.0, width)
        ax.set_ylim(-2.6, 2.0)
        buf = io.BytesIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return DiagramDoc(DiagramKind.SCHEMATIC, buf.getvalue().decode("utf-8"))


def write_diagram(doc: DiagramDoc, path: str) -> str:
    """Write the document; a path without extension gets the one matching its kind."""
    root, ext = os.path.splitext(path)
    if not ext:
        path = root + doc.extension
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(doc.body)
    return path
