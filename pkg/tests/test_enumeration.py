import pytest

from calculus import enumeration
from calculus.enumeration import (
    MAX_SADDLES_ENV,
    _next_level,
    check_bound,
    enumerate_fat_handles,
    enumerate_flows,
    family_key,
    link_collisions,
    two_saddle_families,
)
from calculus.errors import BoundExceededError
from calculus.flow_model import HandleClass, Polarity, dual, link_of
from calculus.isomorphism import canonical_key, census_key as flow_key, flows_equal
from calculus.link_algebra import canonicalize
from tools.ledger import PINNED_COUNTS, GoldenLedger, census_key
from tools.oracle import oracle_count
from tools.verification import EXPECTED_FAMILIES, EXPECTED_REJECTED


def test_one_saddle_census():
    assert enumerate_flows(0).size == 1
    assert enumerate_flows(1).size == 4
    assert enumerate_flows(1, dualize=True).size == 3


def test_one_saddle_links():
    census = enumerate_flows(1)
    assert sorted(link.text for link in census.links) == ["d0·d2·u", "h·d0·u", "h·d2·u", "h·h·u"]
    assert census.collisions == []


def test_one_saddle_class_table():
    table = enumerate_flows(1).class_table
    for polarity in Polarity:
        assert table[polarity.value] == {"I": 4, "II": 1, "III": 1}


def test_two_saddle_families():
    families, rejected = two_saddle_families()
    assert families == EXPECTED_FAMILIES
    assert rejected == EXPECTED_REJECTED


def test_family_key_is_order_free():
    assert family_key("du", "hdu") == family_key("hdu", "du") == ("hdu", "du")


def test_link_does_not_determine_the_flow():
    census = enumerate_flows(2)
    assert census.collisions
    for members in census.collisions:
        assert len({canonicalize(link_of(f)) for f in members}) == 1
        assert not any(flows_equal(a, b) for i, a in enumerate(members) for b in members[i + 1:])
    plain = [f for f in census.flows if canonicalize(link_of(f)).plain_text == "h·d·d·u·u"]
    assert len(plain) >= 2


@pytest.mark.parametrize("n", [1, 2])
@pytest.mark.parametrize("dualize", [False, True])
def test_enumerator_agrees_with_oracle(n, dualize):
    assert enumerate_flows(n, dualize=dualize).size == oracle_count(n, dualize)


@pytest.mark.slow
@pytest.mark.parametrize("n", [3, 4])
def test_enumerator_agrees_with_oracle_slow(n):
    assert enumerate_flows(n).size == oracle_count(n)
    assert enumerate_flows(n, dualize=True).size == oracle_count(n, True)


def test_dualized_census_is_never_larger():
    for n in (1, 2):
        assert enumerate_flows(n, dualize=True).size <= enumerate_flows(n).size


def test_fat_handles_with_one_saddle():
    handles = enumerate_fat_handles(1, Polarity.ATTRACTIVE)
    assert sorted(fh.name for fh in handles) == ["ddu", "ddu", "du", "hdu", "hu"]
    assert {fh.handle_class for fh in handles} == set(HandleClass)
    assert all(fh.polarity is Polarity.ATTRACTIVE for fh in handles)


def test_bound_is_enforced():
    with pytest.raises(BoundExceededError):
        enumerate_flows(3, max_saddles=2)
    with pytest.raises(BoundExceededError):
        check_bound(-1, 6)


def test_bound_from_environment(monkeypatch):
    monkeypatch.setenv(MAX_SADDLES_ENV, "1")
    with pytest.raises(BoundExceededError):
        check_bound(2)
    check_bound(1)
    monkeypatch.setenv(MAX_SADDLES_ENV, "many")
    with pytest.raises(BoundExceededError):
        check_bound(1)


def test_ledger_records_then_matches(tmp_path):
    path = tmp_path / "golden.json"
    ledger = GoldenLedger(str(path))
    assert ledger.check_census(1, False, 4, 4)["status"] == "recorded"
    again = GoldenLedger(str(path))
    assert again.get_record(census_key(1, False))["count"] == 4
    assert again.check_census(1, False, 4, 4)["status"] == "match"
    assert again.check_census(1, False, 5, 5)["status"] == "mismatch"
    assert again.check_census(1, False, 4, 3) == {"status": "mismatch", "golden": 4}


def test_corrupt_ledger_is_backed_up(tmp_path):
    path = tmp_path / "golden.json"
    path.write_text("{not json", encoding="utf-8")
    ledger = GoldenLedger(str(path))
    assert ledger.data["counts"] == {}
    assert (tmp_path / "golden.json.bak").exists()


@pytest.mark.parametrize("n,dualize", [(n, d) for n, d in PINNED_COUNTS if n <= 3])
def test_census_sizes_are_pinned(n, dualize):
    assert enumerate_flows(n, dualize=dualize).size == PINNED_COUNTS[(n, dualize)]


@pytest.mark.slow
@pytest.mark.parametrize("n", [4, 5])
def test_large_census_sizes_are_pinned(n):
    assert enumerate_flows(n).size == PINNED_COUNTS[(n, False)]


def self_dual(flows):
    return [f for f in flows if canonical_key(f) == canonical_key(f, reverse_time=True)]


@pytest.mark.parametrize("n,expected", [(1, 2), (2, 5), (3, 12)])
def test_dualized_count_pairs_up_the_plain_census(n, expected):
    plain = enumerate_flows(n)
    fixed = len(self_dual(plain.flows))
    assert fixed == expected
    assert enumerate_flows(n, dualize=True).size == (plain.size + fixed) // 2


@pytest.mark.parametrize("n", [1, 2, 3, pytest.param(4, marks=pytest.mark.slow)])
def test_census_is_closed_under_duality(n):
    keys = {canonical_key(f) for f in enumerate_flows(n).flows}
    assert {canonical_key(dual(f)) for f in enumerate_flows(n).flows} == keys


@pytest.mark.parametrize("n", [1, 2, 3])
def test_hopf_pairs_pair_a_repeller_with_an_attractor(n):
    for flow in enumerate_flows(n).flows:
        for pair in flow.hopf_pairs:
            assert sorted(int(flow.orbits[o]) for o in pair) == [0, 2]


def test_census_does_not_change_when_asked_again():
    first = [canonical_key(f) for f in enumerate_flows(3).flows]
    again = [canonical_key(f) for f in enumerate_flows(3).flows]
    assert first == again
    assert len(set(first)) == len(first)
    dualized = [flow_key(f, dualize=True) for f in enumerate_flows(2, dualize=True).flows]
    assert len(set(dualized)) == len(dualized)


def test_worker_pool_gives_the_serial_level(monkeypatch):
    parents = tuple(enumerate_flows(2).flows)
    serial = _next_level(parents, False, 1)
    monkeypatch.setattr(enumeration, "PARALLEL_THRESHOLD", 0)
    pooled = _next_level(parents, False, 2)
    assert [canonical_key(f) for f in pooled] == [canonical_key(f) for f in serial]
    assert len(serial) == PINNED_COUNTS[(3, False)]


def test_pinned_counts_override_a_missing_record(tmp_path):
    ledger = GoldenLedger(str(tmp_path / "golden.json"))
    assert ledger.check_census(3, False, 145) == {"status": "mismatch", "golden": 146}
    assert ledger.check_census(3, False, 146)["status"] == "recorded"
    assert ledger.check_census(6, False, 10)["status"] == "unchecked"


def test_link_collisions_are_the_census_collisions():
    groups = link_collisions(2)
    assert [len(g) for g in groups] == [len(g) for g in enumerate_flows(2).collisions]
    assert all(len(g) > 1 for g in groups)
