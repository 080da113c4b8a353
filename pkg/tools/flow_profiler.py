from typing import Any, Dict, List

from calculus.flow_model import FlowModel, link_of, remove_orbit
from calculus.isomorphism import flow_fingerprint
from calculus.link_algebra import canonicalize
from calculus.order import is_f3, is_total, saddle_poset


def describe_removals(flow: FlowModel) -> List[Dict[str, Any]]:
    rows = []
    for k in flow.non_saddles:
        fh = remove_orbit(flow, k)
        rows.append({
            "orbit": k,
            "label": flow.orbit_label(k),
            "index": int(flow.orbits[k]),
            "hopf_member": flow.is_hopf_member(k),
            "handle": fh.name,
            "polarity": fh.polarity.value,
            "class": fh.handle_class.value,
        })
    return rows


def profile_flow(flow: FlowModel) -> Dict[str, Any]:
    link = canonicalize(link_of(flow))
    poset = saddle_poset(flow)
    profile: Dict[str, Any] = {
        "fingerprint": flow_fingerprint(flow),
        "link": link.text,
        "plain_link": link.plain_text,
        "saddles": flow.saddle_count,
        "index_counts": {str(int(i)): c for i, c in link_of(flow).index_counts().items()},
        "hopf_pairs": len(flow.hopf_pairs),
        "regions": len(flow.regions),
        "heteroclinic_edges": len(flow.heteroclinic_edges),
        "total_order": is_total(poset),
        "is_f3": is_f3(flow),
        "removals": describe_removals(flow),
    }

    notes = []
    if flow.saddle_count == 0:
        notes.append("Generator flow: Hopf link with no saddle orbit.")
    if profile["heteroclinic_edges"]:
        notes.append(
            f"{profile['heteroclinic_edges']} heteroclinic trajectory(ies): "
            "saddles are partially ordered."
        )
    if profile["is_f3"]:
        notes.append("Built with operation III only: orbits form a total order.")
    classes = {r["class"] for r in profile["removals"]}
    if "II" in classes and "I" in classes:
        notes.append("Has both thick and empty-region orbits: some identifications generate a bitorus.")
    profile["notes"] = notes
    return profile
