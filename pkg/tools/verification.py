"""
Checks of the known results on F_A flows, run as named suites.

Each suite returns one row per assertion; `summarize` turns a report into a
status with issues and suggestions.
"""
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional

import pandas as pd

from calculus.dsl import DEFAULT_SELECTOR_TABLE, apply_selector_table, elaborate, f3_expression, load_selector_table, parse
from calculus.enumeration import enumerate_flows, two_saddle_families
from calculus.errors import BitorusError, FatHandleError
from calculus.flow_model import (
    BasicHandleKind,
    FlowModel,
    HandleClass,
    Polarity,
    WadaOp,
    basic_flow,
    basic_handle,
    check_invariants,
    link_of,
    remove_orbit,
    replace_orbit,
)
from calculus.isomorphism import flows_equal
from calculus.link_algebra import OrbitIndex, canonicalize
from calculus.order import chain_labels, commuting_steps, is_total, saddle_poset, swap_rebuild
from tools.ledger import PINNED_COUNTS, GoldenLedger
from tools.oracle import oracle_count

EXPECTED_FAMILIES = {
    ("hdu", "hdu"): {"h·h·h·u·u"},
    ("hdu", "ddu"): {"h·h·d·u·u"},
    ("hdu", "du"): {"h·d·d·u·u"},
    ("ddu", "ddu"): {"h·d·d·u·u"},
    ("ddu", "du"): {"d·d·d·u·u"},
    ("hu", "hu"): {"h·h·u·u"},
    ("hu", "du"): {"h·d·u·u"},
    ("du", "du"): {"d·d·u·u"},
}
EXPECTED_REJECTED = {("hdu", "hu"), ("ddu", "hu")}

DEFAULT_N = {
    "basic-catalog": 1,
    "two-saddle": 2,
    "bitorus": 1,
    "class-closure": 6,
    "heteroclinic": 5,
    "f3-chain": 10,
    "orders": 4,
    "collisions": 2,
    "commutation": 4,
    "census": 4,
    "invariants": 4,
}


@dataclass
class Check:
    suite: str
    assertion: str
    passed: bool
    detail: str = ""


def _resolved(text: str, table: Dict[str, str]) -> FlowModel:
    return elaborate(parse(apply_selector_table(text, table)))


def _plain_link(flow: FlowModel) -> str:
    return canonicalize(link_of(flow)).plain_text


def suite_basic_catalog(n: int, table: Dict[str, str]) -> List[Check]:
    out = []
    for op, removed, expected in ((WadaOp.I, None, "h·h·u"), (WadaOp.II, 0, "h·d·u"), (WadaOp.III, None, "d·d·u")):
        link = _plain_link(basic_flow(op, removed))
        out.append(Check("basic-catalog", f"{op.value}(h,h) = {expected}", link == expected, link))
    expected_classes = {
        BasicHandleKind.HDU: HandleClass.CLASS_I,
        BasicHandleKind.DDU: HandleClass.CLASS_I,
        BasicHandleKind.HU: HandleClass.CLASS_II,
        BasicHandleKind.DU: HandleClass.CLASS_III,
    }
    for kind, cls in expected_classes.items():
        for polarity in Polarity:
            fh = basic_handle(kind, polarity, OrbitIndex.ATTRACTIVE if kind is BasicHandleKind.DDU else None)
            out.append(Check(
                "basic-catalog",
                f"{kind.value} ({polarity.value}) is class {cls.label}",
                fh.handle_class is cls and fh.name == kind.value,
                f"{fh.name} {fh.handle_class.label}",
            ))
    return out


def suite_two_saddle(n: int, table: Dict[str, str]) -> List[Check]:
    families, rejected = two_saddle_families()
    out = [
        Check("two-saddle", "eight admissible families", set(families) == set(EXPECTED_FAMILIES),
              ", ".join("+".join(k) for k in sorted(families))),
        Check("two-saddle", "hdu+hu and ddu+hu rejected", rejected == EXPECTED_REJECTED,
              ", ".join("+".join(k) for k in sorted(rejected))),
    ]
    for key, links in EXPECTED_FAMILIES.items():
        got = families.get(key, set())
        out.append(Check("two-saddle", f"{'+'.join(key)} gives {', '.join(sorted(links))}", got == links,
                         ", ".join(sorted(got))))
    return out


def suite_bitorus(n: int, table: Dict[str, str]) -> List[Check]:
    out = []
    for op, removed, name in ((WadaOp.I, None, "hdu"), (WadaOp.II, 2, "ddu")):
        flow = basic_flow(op, removed)
        site = next(k for k in flow.non_saddles if flow.is_hopf_member(k))
        try:
            replace_orbit(flow, site, BasicHandleKind.HU)
            out.append(Check("bitorus", f"{name}+hu rejected", False, "identification accepted"))
        except BitorusError as exc:
            out.append(Check("bitorus", f"{name}+hu rejected", "bitorus" in str(exc), str(exc)))
    return out


def suite_class_closure(n: int, table: Dict[str, str]) -> List[Check]:
    out = []
    for m in range(1, n + 1):
        failures = 0
        removals = 0
        for flow in enumerate_flows(m).flows:
            for k in flow.non_saddles:
                removals += 1
                try:
                    if remove_orbit(flow, k).handle_class not in HandleClass:
                        failures += 1
                except FatHandleError:
                    failures += 1
        out.append(Check("class-closure", f"every removal classifies (n={m})", failures == 0,
                         f"{removals} removals, {failures} failures"))
    return out


def suite_heteroclinic(n: int, table: Dict[str, str]) -> List[Check]:
    out = []
    for m in range(1, n + 1):
        bad = 0
        for flow in enumerate_flows(m).flows:
            solid = sum(1 for step in flow.construction_log if step.is_solid_gluing)
            if solid != len(flow.heteroclinic_edges):
                bad += 1
        out.append(Check("heteroclinic", f"edges = solid identifications (n={m})", bad == 0, f"{bad} mismatches"))
    hu = basic_flow(WadaOp.II, 2)
    (d,) = [k for k in hu.non_saddles if not hu.is_hopf_member(k)]
    du = basic_flow(WadaOp.III)
    figures = {
        "hu+hu": replace_orbit(hu, d, BasicHandleKind.HU),
        "hu+du": replace_orbit(du, du.non_saddles[0], BasicHandleKind.HU),
        "du+du": replace_orbit(du, du.non_saddles[0], BasicHandleKind.DU),
    }
    for name, flow in figures.items():
        count = len(flow.heteroclinic_edges)
        out.append(Check("heteroclinic", f"{name} has one heteroclinic trajectory", count == 1, str(count)))
    return out


def suite_f3_chain(n: int, table: Dict[str, str]) -> List[Check]:
    out = []
    for m in range(1, n + 1):
        labels = chain_labels(elaborate(parse(f3_expression(m))))
        expected = ["d_r"] + [f"u{i}" for i in range(1, m + 1)] + ["d_a"]
        out.append(Check("f3-chain", f"F3 chain with {m} saddles", labels == expected, "<".join(labels)))
    return out


def suite_orders(n: int, table: Dict[str, str]) -> List[Check]:
    three = saddle_poset(_resolved("II(II(III(h,h),h),h)", table))
    four = saddle_poset(_resolved("II(II(II(II(h,h),h),h),h)", table))
    chains = sorted([four.label(s), four.label(t)] for s, t in four.covers)
    return [
        Check("orders", "II(II(III(h,h),h),h) is a 3-chain",
              is_total(three) and len(three) == 3 and len(three.covers) == 2,
              ", ".join(f"{three.label(s)}<{three.label(t)}" for s, t in sorted(three.covers))),
        Check("orders", "II(II(II(II(h,h),h),h),h) is two disjoint 2-chains",
              len({x for c in four.covers for x in c}) == 4 and len(four.relation) == 2,
              ", ".join("<".join(c) for c in chains)),
    ]


def suite_collisions(n: int, table: Dict[str, str]) -> List[Check]:
    out = []
    for m in range(2, max(n, 2) + 1):
        census = enumerate_flows(m)
        out.append(Check("collisions", f"some link has several flows (n={m})", bool(census.collisions),
                         f"{len(census.collisions)} colliding links"))
    flows = [f for f in enumerate_flows(2).flows if _plain_link(f) == "h·d·d·u·u"]
    distinct = all(not flows_equal(a, b) for i, a in enumerate(flows) for b in flows[i + 1:])
    out.append(Check("collisions", "h·d·d·u·u has two or more flows", len(flows) >= 2 and distinct, str(len(flows))))
    return out


def suite_commutation(n: int, table: Dict[str, str]) -> List[Check]:
    out = []
    for m in range(2, max(n, 2) + 1):
        rebuilt_ok = True
        chain_ok = True
        pairs = 0
        for flow in enumerate_flows(m).flows:
            commuting = commuting_steps(flow)
            pairs += len(commuting)
            for pair in commuting:
                i, j = sorted(pair)
                other = swap_rebuild(flow, i, j)
                if other is None or not flows_equal(flow, other):
                    rebuilt_ok = False
            for s, t in flow.heteroclinic_edges:
                if frozenset({flow.step_of_saddle(s), flow.step_of_saddle(t)}) in commuting:
                    chain_ok = False
        out.append(Check("commutation", f"commuting pairs rebuild equal flows (n={m})", rebuilt_ok, f"{pairs} pairs"))
        out.append(Check("commutation", f"2-chains have a non-commuting pair (n={m})", chain_ok))
    four = _resolved("II(II(II(II(h,h),h),h),h)", table)
    found = commuting_steps(four)
    out.append(Check("commutation", "II(II(II(II(h,h),h),h),h): steps 2 and 3 commute",
                     frozenset({2, 3}) in found, ", ".join(str(sorted(p)) for p in sorted(found, key=sorted))))
    return out


def suite_census(n: int, table: Dict[str, str], ledger: Optional[GoldenLedger] = None) -> List[Check]:
    out = []
    for m in range(1, n + 1):
        for dualize in (False, True):
            enumerated = enumerate_flows(m, dualize=dualize).size
            oracle = oracle_count(m, dualize)
            detail = f"enumerator {enumerated}, oracle {oracle}"
            passed = enumerated == oracle
            pinned = PINNED_COUNTS.get((m, dualize))
            if pinned is not None:
                passed = passed and enumerated == pinned
                detail += f", pinned {pinned}"
            if ledger is not None:
                verdict = ledger.check_census(m, dualize, enumerated, oracle)
                passed = passed and verdict["status"] != "mismatch"
                detail += f", ledger {verdict['status']} ({verdict['golden']})"
            out.append(Check("census", f"n={m} dualize={dualize}", passed, detail))
    return out


def suite_invariants(n: int, table: Dict[str, str]) -> List[Check]:
    bad = []
    for m in range(0, n + 1):
        for flow in enumerate_flows(m).flows:
            try:
                check_invariants(flow)
            except FatHandleError as exc:
                bad.append(str(exc))
    return [Check("invariants", f"flow model invariants hold (n<={n})", not bad, "; ".join(bad[:3]))]


# suites that walk whole census levels; the levels are built once, per dualize flag
CENSUS_SUITES = {"class-closure", "heteroclinic", "collisions", "commutation", "census", "invariants"}

SUITES: Dict[str, Callable[..., List[Check]]] = {
    "basic-catalog": suite_basic_catalog,
    "two-saddle": suite_two_saddle,
    "bitorus": suite_bitorus,
    "class-closure": suite_class_closure,
    "heteroclinic": suite_heteroclinic,
    "f3-chain": suite_f3_chain,
    "orders": suite_orders,
    "collisions": suite_collisions,
    "commutation": suite_commutation,
    "census": suite_census,
    "invariants": suite_invariants,
}


def run_suite(
    name: str,
    n: Optional[int] = None,
    table: Optional[Dict[str, str]] = None,
    ledger: Optional[GoldenLedger] = None,
    workers: int = 1,
) -> pd.DataFrame:
    """
    Run one suite, or every suite for name 'all'; n overrides each suite's default size.
    Census levels are built up front with `workers` processes.
    """
    if table is None:
        table = load_selector_table(DEFAULT_SELECTOR_TABLE)
    names = list(SUITES) if name == "all" else [name]
    checks: List[Check] = []
    for suite in names:
        if suite not in SUITES:
            raise FatHandleError(f"Unknown verify suite {suite!r}; choose from {', '.join(SUITES)} or all.")
        size = DEFAULT_N[suite] if n is None else n
        if suite in CENSUS_SUITES:
            enumerate_flows(size, workers=workers)
            if suite == "census":
                enumerate_flows(size, dualize=True, workers=workers)
        if suite == "census":
            checks.extend(suite_census(size, table, ledger))
        else:
            checks.extend(SUITES[suite](size, table))
    return pd.DataFrame([c.__dict__ for c in checks], columns=["suite", "assertion", "passed", "detail"])


def summarize(report: pd.DataFrame) -> Dict[str, Any]:
    failed = report[~report["passed"]]
    issues = [f"[{r.suite}] {r.assertion}: {r.detail}" for r in failed.itertuples()]
    suggestions = []
    if failed["suite"].isin(["census"]).any():
        suggestions.append("Enumerator and oracle disagree: compare the two levels with `enumerate --format json`.")
    if failed["suite"].isin(["orders", "commutation"]).any():
        suggestions.append("Check the selector table entries for the expressions involved.")
    return {
        "status": "needs_attention" if issues else "ok",
        "passed": int(report["passed"].sum()),
        "total": int(len(report)),
        "issues": issues,
        "suggestions": suggestions,
    }
