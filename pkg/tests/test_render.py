import pytest

from calculus.dsl import elaborate, f3_expression, parse
from calculus.errors import DrawingSizeError
from calculus.flow_model import BasicHandleKind, WadaOp, basic_flow, replace_orbit
from calculus.order import commuting_steps, f3_poset, saddle_poset
from tools.render import DiagramKind, DotGraph, filtration_dot, hasse_dot, schematic_svg, write_diagram


def du_du():
    du = basic_flow(WadaOp.III)
    return replace_orbit(du, du.non_saddles[0], BasicHandleKind.DU)


def test_dot_output_is_sorted():
    g = DotGraph("g")
    g.node("b", label="b")
    g.node("a", label="a")
    g.edge("b", "a")
    body = g.render()
    assert body.index('"a" [label="a"]') < body.index('"b" [label="b"]')
    assert body.endswith("}\n")


def test_hasse_of_f3_chain_is_a_path():
    doc = hasse_dot(f3_poset(elaborate(parse(f3_expression(3)))))
    assert doc.kind is DiagramKind.HASSE
    assert doc.body.count("[label=") == 5
    assert doc.body.count("->") == 4
    assert '"d_r" -> "u1"' in doc.body
    assert '"u3" -> "d_a"' in doc.body


def test_hasse_without_relations_has_no_edges():
    doc = hasse_dot(saddle_poset(basic_flow(WadaOp.I)))
    assert doc.body.count("[label=") == 1
    assert "->" not in doc.body


def test_filtration_of_one_step():
    doc = filtration_dot(basic_flow(WadaOp.I))
    assert '"M1"' in doc.body
    assert "->" not in doc.body
    assert doc.extension == ".dot"


def test_filtration_marks_commuting_steps():
    flow = elaborate(parse("II(h,II(II(h,II(h,h;hopf.0);sep.d2),h;hopf.0,@hopf.0#2);sep.d2)"))
    doc = filtration_dot(flow, commuting_steps(flow))
    assert '"M1" -> "M2" []' in doc.body
    assert '"M2" -> "M3" [constraint="false",dir="none",label="commute",style="dashed"]' in doc.body
    assert "+heteroclinic" in doc.body


def test_schematic_of_operation_three():
    body = schematic_svg(basic_flow(WadaOp.III)).body
    assert body.count('id="region-') == 1
    assert body.count('id="orbit-') == 2
    assert body.count('id="saddle-') == 1
    assert 'id="heteroclinic-' not in body


def test_schematic_draws_heteroclinic_trajectories():
    body = schematic_svg(du_du()).body
    assert body.count('id="heteroclinic-') == 1
    assert body.count('id="saddle-') == 2


def test_schematic_is_reproducible():
    flow = du_du()
    assert schematic_svg(flow).body == schematic_svg(flow).body


def test_schematic_size_limit():
    with pytest.raises(DrawingSizeError):
        schematic_svg(du_du(), max_saddles=1)


def test_write_diagram_adds_extension(tmp_path):
    doc = schematic_svg(basic_flow(WadaOp.I))
    path = write_diagram(doc, str(tmp_path / "figures" / "flow"))
    assert path.endswith(".svg")
    with open(path, encoding="utf-8") as f:
        assert f.read() == doc.body
