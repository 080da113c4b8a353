from dataclasses import replace

import pytest

from calculus.dsl import DEFAULT_SELECTOR_TABLE, apply_selector_table, elaborate, f3_expression, load_selector_table, parse
from calculus.errors import FlowModelError, NotF3Error, OrderCycleError
from calculus.flow_model import BasicHandleKind, WadaOp, basic_flow, hopf_flow, replace_orbit
from calculus.isomorphism import flows_equal
from calculus.order import (
    chain_labels,
    commuting_steps,
    f3_chain,
    is_f3,
    is_total,
    replay,
    saddle_poset,
    swap_rebuild,
)

TABLE = load_selector_table(DEFAULT_SELECTOR_TABLE)


def table_flow(text):
    return elaborate(parse(apply_selector_table(text, TABLE)))


def test_basic_f3_chain():
    assert chain_labels(basic_flow(WadaOp.III)) == ["d_r", "u1", "d_a"]


@pytest.mark.parametrize("n", [1, 2, 3, 5, 10])
def test_f3_chain_is_total(n):
    flow = elaborate(parse(f3_expression(n)))
    assert is_f3(flow)
    assert chain_labels(flow) == ["d_r"] + [f"u{i}" for i in range(1, n + 1)] + ["d_a"]
    assert len(f3_chain(flow)) == n + 2
    assert is_total(saddle_poset(flow))


def test_bare_f3_expression_is_a_chain():
    assert chain_labels(table_flow("III(III(h,h),h)")) == ["d_r", "u1", "u2", "d_a"]


def test_f3_chain_rejects_other_flows():
    with pytest.raises(NotF3Error):
        f3_chain(basic_flow(WadaOp.I))
    with pytest.raises(NotF3Error):
        f3_chain(hopf_flow())


def test_three_chain_from_operation_two():
    flow = table_flow("II(II(III(h,h),h),h)")
    poset = saddle_poset(flow)
    assert is_total(poset)
    assert [poset.label(x) for x in poset.elements] == ["u3", "u1", "u2"]
    assert len(poset.covers) == 2
    assert len(poset.relation) == 3


def test_two_disjoint_chains():
    flow = table_flow("II(II(II(II(h,h),h),h),h)")
    poset = saddle_poset(flow)
    assert not is_total(poset)
    assert sorted((poset.label(s), poset.label(t)) for s, t in poset.covers) == [("u1", "u2"), ("u3", "u4")]
    assert poset.relation == poset.covers


def test_no_heteroclinic_means_antichain():
    flow = table_flow("I(I(h,h),h)")
    poset = saddle_poset(flow)
    assert poset.relation == frozenset()
    assert not is_total(poset)


def test_cycle_is_reported():
    du = basic_flow(WadaOp.III)
    flow = replace_orbit(du, du.non_saddles[0], BasicHandleKind.DU)
    (s, t), = flow.heteroclinic_edges
    broken = replace(flow, heteroclinic_edges=frozenset({(s, t), (t, s)}))
    with pytest.raises(OrderCycleError):
        saddle_poset(broken)


def test_replay_reproduces_the_flow():
    flow = table_flow("II(II(III(h,h),h),h)")
    rebuilt, numbers = replay(list(enumerate(flow.construction_log, start=1)))
    assert flows_equal(flow, rebuilt)
    assert sorted(numbers.values()) == [1, 2, 3]


def test_independent_steps_commute():
    flow = table_flow("II(II(II(II(h,h),h),h),h)")
    pairs = commuting_steps(flow)
    assert frozenset({2, 3}) in pairs
    # the two steps of each heteroclinic chain never commute
    assert frozenset({1, 2}) not in pairs
    assert frozenset({3, 4}) not in pairs
    for pair in pairs:
        i, j = sorted(pair)
        assert flows_equal(flow, swap_rebuild(flow, i, j))


def test_nested_steps_commute_when_a_stand_in_site_exists():
    # the second handle sits on an orbit the first one created
    flow = table_flow("I(I(h,h),h)")
    assert commuting_steps(flow) == {frozenset({1, 2})}
    assert flows_equal(flow, swap_rebuild(flow, 1, 2))


def test_commutation_ignores_which_orbit_ids_were_used():
    first = table_flow("I(I(h,h),h)")
    second = table_flow("I(I(h,h),h;@hopf.2)")
    assert flows_equal(first, second)
    assert commuting_steps(first) == commuting_steps(second)


def test_chain_steps_never_commute():
    flow = elaborate(parse(f3_expression(4)))
    assert commuting_steps(flow) == set()


def test_swap_rebuild_checks_step_numbers():
    flow = basic_flow(WadaOp.I)
    with pytest.raises(FlowModelError):
        swap_rebuild(flow, 1, 2)
