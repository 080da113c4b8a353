import json
from typing import Any, Dict, List, Optional

import pandas as pd

from calculus.enumeration import FlowCensus
from calculus.flow_model import FlowModel, link_of
from calculus.isomorphism import flow_fingerprint
from calculus.link_algebra import canonicalize
from calculus.order import SaddlePoset

FLOW_SCHEMA = "fat-handles/flow@1"
POSET_SCHEMA = "fat-handles/poset@1"
CENSUS_SCHEMA = "fat-handles/census-record@1"


def save_json(path: str, obj: Any) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2, ensure_ascii=False)


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False, sort_keys=True)


def flow_document(flow: FlowModel) -> Dict[str, Any]:
    link = canonicalize(link_of(flow))
    return {
        "schema": FLOW_SCHEMA,
        "fingerprint": flow_fingerprint(flow),
        "link": link.text,
        "plain_link": link.plain_text,
        "orbits": {str(o): int(i) for o, i in sorted(flow.orbits.items())},
        "hopf_pairs": sorted(sorted(p) for p in flow.hopf_pairs),
        "regions": [
            {"id": r.id, "residents": sorted(r.residents), "adjacent_saddles": sorted(r.adjacent_saddles)}
            for r in flow.regions
        ],
        "heteroclinic_edges": sorted(list(e) for e in flow.heteroclinic_edges),
        "construction_log": [
            {
                "step": n,
                "replaced_orbit": s.replaced_orbit,
                "attached": s.attached.value,
                "polarity": s.polarity.value,
                "d_index": None if s.d_index is None else int(s.d_index),
                "new_saddle": s.new_saddle,
                "derived_handle_class": s.derived_handle_class.value,
                "attached_class": s.attached_class.value,
                "produced_heteroclinic": None if s.produced_heteroclinic is None else list(s.produced_heteroclinic),
            }
            for n, s in enumerate(flow.construction_log, start=1)
        ],
    }


def poset_document(poset: SaddlePoset, total: bool) -> Dict[str, Any]:
    return {
        "schema": POSET_SCHEMA,
        "elements": [poset.label(x) for x in poset.elements],
        "covers": sorted([poset.label(s), poset.label(t)] for s, t in poset.covers),
        "relation": sorted([poset.label(s), poset.label(t)] for s, t in poset.relation),
        "total": total,
    }


def census_records(census: FlowCensus) -> List[Dict[str, Any]]:
    records = []
    for n, flow in enumerate(census.flows):
        link = canonicalize(link_of(flow))
        records.append({
            "schema": CENSUS_SCHEMA,
            "n": census.n,
            "dualize": census.dualize,
            "index": n,
            "fingerprint": flow_fingerprint(flow),
            "link": link.text,
            "plain_link": link.plain_text,
            "heteroclinic_edges": len(flow.heteroclinic_edges),
            "steps": [s.attached.value for s in flow.construction_log],
        })
    return records


def write_census_records(path: str, census: FlowCensus) -> None:
    """Line-delimited JSON, one flow per line."""
    with open(path, "w", encoding="utf-8") as f:
        for record in census_records(census):
            f.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")


def census_table(census: FlowCensus) -> pd.DataFrame:
    rows = [
        {"link": link.text, "plain_link": link.plain_text, "flows": count}
        for link, count in sorted(census.links.items())
    ]
    return pd.DataFrame(rows, columns=["link", "plain_link", "flows"])


def class_table(census: FlowCensus) -> pd.DataFrame:
    table = pd.DataFrame(census.class_table).fillna(0).astype(int)
    return table.reindex(["I", "II", "III"], fill_value=0)


def write_census_report(
    out_path: str,
    ctx: Any,
    census: FlowCensus,
    oracle_size: Optional[int] = None,
) -> None:
    links = census_table(census)
    classes = class_table(census)
    collisions = [
        f"`{canonicalize(link_of(group[0])).text}`: {len(group)} flows" for group in census.collisions
    ]
    oracle = "not run" if oracle_size is None else (
        f"{oracle_size} classes ({'agrees' if oracle_size == census.size else 'DISAGREES'})"
    )

    md = f"""# Fat Handle Census Report

**Run ID:** `{ctx.run_id}`
**Started (UTC):** {ctx.started_at}
**Saddles:** {census.n}
**Dual flows identified:** {census.dualize}

## Summary
- Flows: **{census.size}**
- Distinct links: **{len(census.links)}**
- Links realised by several flows: **{len(census.collisions)}**
- Oracle: {oracle}

## Links
```
{links.to_string(index=False) if len(links) else "(none)"}
```

## Fat handle classes (by polarity)
```
{classes.to_string()}
```

## Link collisions
{chr(10).join([f"- {c}" for c in collisions]) if collisions else "- (none)"}
"""

    with open(out_path, "w", encoding="utf-8") as f:
        f.write(md)
