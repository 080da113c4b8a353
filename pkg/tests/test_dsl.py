import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from calculus.dsl import (
    DEFAULT_SELECTOR_TABLE,
    Leaf,
    OpI,
    OpII,
    OpIII,
    Selector,
    apply_selector_table,
    elaborate,
    evaluate_link,
    f3_expression,
    is_resolved,
    load_selector_table,
    parse,
    parse_selector,
    print_expr,
    read_batch,
    saddle_count,
    select_orbit,
)
from calculus.errors import (
    AmbiguousSelectorError,
    BitorusError,
    ElaborationError,
    ExprSyntaxError,
    SelectorError,
)
from calculus.flow_model import WadaOp, basic_flow, link_of
from calculus.isomorphism import flows_equal
from calculus.link_algebra import OrbitIndex, canonicalize, links_equal

ROLES = ["hopf.0", "hopf.2", "sep.d0", "sep.d2"]

selectors = st.builds(Selector, st.sampled_from(ROLES), st.none() | st.integers(min_value=1, max_value=4))
maybe_selector = st.none() | selectors


def _operations(children):
    return st.one_of(
        st.builds(OpI, children, children, maybe_selector),
        st.builds(OpII, children, children, maybe_selector, maybe_selector),
        st.builds(OpIII, children, children, maybe_selector, maybe_selector, maybe_selector),
    )


expressions = st.recursive(st.just(Leaf()), _operations, max_leaves=8)


def test_parse_leaf_and_basic_operations():
    assert parse("h") == Leaf()
    assert parse(" I ( h , h ) ") == OpI(Leaf(), Leaf())
    assert parse("II(h,h;hopf.0)") == OpII(Leaf(), Leaf(), Selector("hopf.0"))
    assert parse("III(h,h)") == OpIII(Leaf(), Leaf(), Selector("hopf.0"), Selector("hopf.2"))


def test_omitted_selector_defaults_to_the_only_legal_role():
    e = parse("III(III(h,h),h)")
    assert e.removed0 == Selector("sep.d0")
    assert e.removed2 == Selector("hopf.2")


def test_strict_parse_lists_candidates():
    with pytest.raises(AmbiguousSelectorError) as info:
        parse("II(h,h)", strict=True)
    assert info.value.candidates == ("hopf.0", "hopf.2")


def test_unresolved_selector_fails_at_elaboration():
    e = parse("II(h,h)")
    with pytest.raises(AmbiguousSelectorError) as info:
        elaborate(e)
    assert info.value.candidates == ("hopf.0", "hopf.2")


def test_lenient_parse_leaves_selector_unresolved():
    e = parse("II(h,h)", strict=False)
    assert e.removed is None
    assert not is_resolved(e)
    assert print_expr(e) == "II(h,h;?)"
    assert parse("II(h,h;?)", strict=False) == e


def test_syntax_error_reports_position():
    with pytest.raises(ExprSyntaxError) as info:
        parse("II(h)")
    assert info.value.position == 4
    with pytest.raises(ExprSyntaxError):
        parse("IV(h,h)")
    with pytest.raises(ExprSyntaxError):
        parse("III(h,h) h")
    with pytest.raises(ExprSyntaxError):
        parse("II(h,h;hopf.0,hopf.2)")
    with pytest.raises(ExprSyntaxError):
        parse("I(h,h;@hopf.0,@hopf.2)")


def test_print_is_explicit():
    assert print_expr(parse("III(h,h)")) == "III(h,h;hopf.0,hopf.2)"
    assert print_expr(parse("I(I(h,h),h;@hopf.0#2)")) == "I(I(h,h),h;@hopf.0#2)"
    assert saddle_count(parse("III(III(h,h),h)")) == 2


@settings(max_examples=1000)
@given(expressions)
def test_printed_expressions_parse_back(e):
    assert parse(print_expr(e), strict=False) == e
    assert saddle_count(e) == print_expr(e).count("(")


def test_elaboration_matches_link_evaluation():
    for text in [
        "I(h,h)",
        "II(h,h;hopf.2)",
        "III(h,h)",
        "I(I(h,h),h)",
        "I(I(h,h),h;@hopf.0#2)",
        "I(I(h,h),I(h,h))",
        "III(III(h,h),III(h,h))",
        "II(I(h,h),II(h,h;hopf.0);sep.d2)",
        "III(II(h,h;hopf.2),III(h,h);sep.d0,sep.d2)",
        "II(h,II(h,h;hopf.0);sep.d2)",
        "III(h,II(h,h;hopf.2);hopf.0,hopf.2)",
        f3_expression(4),
    ]:
        e = parse(text)
        assert links_equal(link_of(elaborate(e)), evaluate_link(e)), text


def test_basic_expressions_elaborate_to_basic_flows():
    assert flows_equal(elaborate(parse("I(h,h)")), basic_flow(WadaOp.I))
    assert flows_equal(elaborate(parse("II(h,h;hopf.0)")), basic_flow(WadaOp.II, 0))
    assert flows_equal(elaborate(parse("III(h,h)")), basic_flow(WadaOp.III))


def test_selector_table_resolves_bare_expressions():
    table = load_selector_table(DEFAULT_SELECTOR_TABLE)
    resolved = apply_selector_table(" III( III(h,h), h) ", table)
    assert resolved == "III(h,III(h,h;hopf.0,hopf.2);hopf.0,sep.d2)"
    assert canonicalize(link_of(elaborate(parse(resolved)))).plain_text == "d·d·u·u"
    assert apply_selector_table("I(h,h)", table) == "I(h,h)"


def test_bitorus_expression_is_rejected():
    with pytest.raises(BitorusError):
        elaborate(parse("II(h,I(h,h);hopf.0)"))


def test_both_arguments_compound_elaborate():
    flow = elaborate(parse("I(I(h,h),I(h,h))"))
    assert flow.saddle_count == 3
    assert len(flow.hopf_pairs) == 4


def test_site_is_only_required_when_results_differ():
    flow = elaborate(parse("I(I(h,h),h)"))
    assert flows_equal(flow, elaborate(parse("I(I(h,h),h;@hopf.2#1)")))
    with pytest.raises(AmbiguousSelectorError) as info:
        elaborate(parse("I(III(h,h),h)"))
    assert info.value.candidates == ("sep.d2#1", "sep.d0#1")
    assert elaborate(parse("I(III(h,h),h;@sep.d0)")).saddle_count == 2


def test_operation_three_rejects_a_site():
    with pytest.raises(SelectorError):
        elaborate(parse("III(III(h,h),h;sep.d0,hopf.2,@sep.d0)"))


def test_wrong_index_selector():
    with pytest.raises(SelectorError):
        elaborate(parse("III(h,h;hopf.2,hopf.2)"))
    with pytest.raises(SelectorError):
        elaborate(parse("II(h,h;sep.d0)"))


def test_f3_expression():
    assert f3_expression(1) == "III(h,h;hopf.0,hopf.2)"
    assert f3_expression(2) == "III(h,III(h,h;hopf.0,hopf.2);hopf.0,sep.d2)"
    with pytest.raises(ElaborationError):
        f3_expression(0)


def test_selectors():
    assert parse_selector("hopf.0#2") == Selector("hopf.0", 2)
    assert Selector("sep.d2").index is OrbitIndex.ATTRACTIVE
    with pytest.raises(SelectorError):
        parse_selector("@sep.d2")
    with pytest.raises(ExprSyntaxError):
        parse_selector("sep.d1")
    with pytest.raises(SelectorError):
        Selector("hopf.1")


def test_select_orbit():
    flow = basic_flow(WadaOp.III)
    k = select_orbit(flow, Selector("sep.d2"))
    assert flow.orbits[k] == OrbitIndex.ATTRACTIVE
    two_pairs = basic_flow(WadaOp.I)
    with pytest.raises(AmbiguousSelectorError) as info:
        select_orbit(two_pairs, Selector("hopf.0"))
    assert info.value.candidates == ("hopf.0#1", "hopf.0#2")
    with pytest.raises(SelectorError):
        select_orbit(two_pairs, Selector("sep.d0"))
    with pytest.raises(SelectorError):
        select_orbit(two_pairs, Selector("hopf.0", 3))


def test_batch_and_table_files(tmp_path):
    batch = tmp_path / "flows.txt"
    batch.write_text("# header\n\nIII(h,h)\n  I(h,h)  \n", encoding="utf-8")
    assert read_batch(batch) == [(3, "III(h,h)"), (4, "I(h,h)")]

    table = tmp_path / "table.txt"
    table.write_text("# bare = explicit\nII(h, h) = II(h,h;hopf.2)\n", encoding="utf-8")
    assert load_selector_table(table) == {"II(h,h)": "II(h,h;hopf.2)"}

    table.write_text("II(h,h)\n", encoding="utf-8")
    with pytest.raises(SelectorError):
        load_selector_table(table)


@settings(max_examples=300, deadline=None)
@given(expressions)
def test_random_expressions_elaborate_to_their_link(e):
    try:
        link = evaluate_link(e)
        flow = elaborate(e)
    except (AmbiguousSelectorError, BitorusError, SelectorError):
        return
    assert links_equal(link_of(flow), link)
    assert flow.saddle_count == saddle_count(e)
