"""
Exhaustive enumeration of F_A flows and fat handles by saddle count.

Level n is obtained from level n-1 by replacing every attractive or
repulsive orbit with every basic fat handle, dropping bitorus cases and
keeping the first flow of every isomorphism class (canonical key). Parents
can be fanned out over worker processes; the merge keeps parent order, so
the census is the same for any number of workers.
"""
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Set, Tuple

from calculus.errors import BitorusError, BoundExceededError
from calculus.flow_model import (
    BasicHandleKind,
    FatHandle,
    FlowModel,
    Polarity,
    hopf_flow,
    link_of,
    remove_orbit,
    replace_orbit,
)
from calculus.isomorphism import census_key, handle_key
from calculus.link_algebra import CanonicalLink, OrbitIndex, canonicalize

MAX_SADDLES_ENV = "FAT_HANDLES_MAX_SADDLES"
DEFAULT_MAX_SADDLES = 6

# below this many parents a level is built in-process
PARALLEL_THRESHOLD = 400

HANDLE_CHOICES: Tuple[Tuple[BasicHandleKind, Optional[OrbitIndex]], ...] = (
    (BasicHandleKind.HDU, None),
    (BasicHandleKind.DDU, OrbitIndex.REPULSIVE),
    (BasicHandleKind.DDU, OrbitIndex.ATTRACTIVE),
    (BasicHandleKind.HU, None),
    (BasicHandleKind.DU, None),
)

FAMILY_ORDER = [k.value for k in BasicHandleKind]

_LEVELS: Dict[bool, List[Tuple[FlowModel, ...]]] = {}


def max_saddles_bound() -> int:
    raw = os.getenv(MAX_SADDLES_ENV)
    if not raw:
        return DEFAULT_MAX_SADDLES
    try:
        return int(raw)
    except ValueError:
        raise BoundExceededError(f"{MAX_SADDLES_ENV} must be an integer, got {raw!r}.")


def check_bound(n: int, max_saddles: Optional[int] = None) -> None:
    bound = max_saddles_bound() if max_saddles is None else max_saddles
    if n < 0:
        raise BoundExceededError(f"Saddle count must be non-negative, got {n}.")
    if n > bound:
        raise BoundExceededError(
            f"Enumeration with {n} saddles exceeds the bound of {bound} "
            f"(raise it with --max-saddles or {MAX_SADDLES_ENV})."
        )


@dataclass
class FlowCensus:
    n: int
    dualize: bool
    flows: List[FlowModel] = field(default_factory=list)
    links: Counter = field(default_factory=Counter)
    collisions: List[List[FlowModel]] = field(default_factory=list)
    _classes: Optional[Dict[str, Counter]] = field(default=None, repr=False)

    @property
    def size(self) -> int:
        return len(self.flows)

    @property
    def class_table(self) -> Dict[str, Counter]:
        """Classes of every fat handle obtained by removing one orbit, by polarity."""
        if self._classes is None:
            self._classes = _class_table(self.flows)
        return self._classes


def _moves(flow: FlowModel) -> Iterator[Tuple[int, int, FlowModel]]:
    for site in flow.non_saddles:
        for choice, (kind, d_index) in enumerate(HANDLE_CHOICES):
            try:
                yield site, choice, replace_orbit(flow, site, kind, d_index)
            except BitorusError:
                continue


def _child_keys(job: Tuple[int, Tuple[FlowModel, ...], bool]) -> List[Tuple[str, int, int, int]]:
    """(key, parent number, site, choice) of the first child of every class found in a chunk."""
    offset, parents, dualize = job
    seen: Set[str] = set()
    out = []
    for number, flow in enumerate(parents, start=offset):
        for site, choice, child in _moves(flow):
            key = census_key(child, dualize)
            if key not in seen:
                seen.add(key)
                out.append((key, number, site, choice))
    return out


def _chunks(parents: Tuple[FlowModel, ...], dualize: bool, count: int) -> List[Tuple[int, Tuple[FlowModel, ...], bool]]:
    size = max(1, -(-len(parents) // count))
    return [(start, parents[start:start + size], dualize) for start in range(0, len(parents), size)]


def _next_level(parents: Tuple[FlowModel, ...], dualize: bool, workers: int) -> Tuple[FlowModel, ...]:
    if workers > 1 and len(parents) >= PARALLEL_THRESHOLD:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            found = list(pool.map(_child_keys, _chunks(parents, dualize, workers * 4)))
    else:
        found = [_child_keys((0, parents, dualize))]
    level: Dict[str, FlowModel] = {}
    for chunk in found:
        for key, number, site, choice in chunk:
            if key not in level:
                kind, d_index = HANDLE_CHOICES[choice]
                level[key] = replace_orbit(parents[number], site, kind, d_index)
    return tuple(level.values())


def _levels(n: int, dualize: bool, workers: int = 1, verbose: bool = False) -> List[Tuple[FlowModel, ...]]:
    levels = _LEVELS.setdefault(dualize, [(hopf_flow(),)])
    while len(levels) <= n:
        levels.append(_next_level(levels[-1], dualize, workers))
        if verbose:
            print(f"[Census] level {len(levels) - 1} (dualize={dualize}): {len(levels[-1])} flows")
    return levels[:n + 1]


def _group_by_link(flows: List[FlowModel]) -> Dict[CanonicalLink, List[FlowModel]]:
    groups: Dict[CanonicalLink, List[FlowModel]] = {}
    for flow in flows:
        groups.setdefault(canonicalize(link_of(flow)), []).append(flow)
    return groups


def _class_table(flows: List[FlowModel]) -> Dict[str, Counter]:
    table = {p.value: Counter() for p in Polarity}
    for flow in flows:
        for k in flow.non_saddles:
            fh = remove_orbit(flow, k)
            table[fh.polarity.value][fh.handle_class.value] += 1
    return table


def default_workers() -> int:
    return max(1, (os.cpu_count() or 1))


def enumerate_flows(
    n: int,
    dualize: bool = False,
    max_saddles: Optional[int] = None,
    verbose: bool = False,
    workers: int = 1,
) -> FlowCensus:
    check_bound(n, max_saddles)
    flows = list(_levels(n, dualize, workers, verbose)[-1])
    groups = _group_by_link(flows)
    census = FlowCensus(
        n=n,
        dualize=dualize,
        flows=flows,
        links=Counter({link: len(members) for link, members in groups.items()}),
        collisions=[members for _, members in sorted(groups.items()) if len(members) > 1],
    )
    if verbose:
        print(f"[Census] n={n} dualize={dualize}: {census.size} flows, "
              f"{len(census.links)} links, {len(census.collisions)} colliding links")
    return census


def link_collisions(n: int, dualize: bool = False, max_saddles: Optional[int] = None) -> List[List[FlowModel]]:
    return enumerate_flows(n, dualize=dualize, max_saddles=max_saddles).collisions


def enumerate_fat_handles(
    n: int,
    polarity: Polarity,
    max_saddles: Optional[int] = None,
) -> List[FatHandle]:
    """Fat handles with n saddles and the given polarity, up to isomorphism."""
    check_bound(n, max_saddles)
    polarity = Polarity(polarity)
    found: Dict[str, FatHandle] = {}
    for flow in _levels(n, False)[-1]:
        for k in flow.non_saddles:
            if flow.orbits[k] != polarity.removed_index:
                continue
            fh = remove_orbit(flow, k)
            found.setdefault(handle_key(fh), fh)
    return list(found.values())


def family_key(a: str, b: str) -> Tuple[str, str]:
    return tuple(sorted((a, b), key=FAMILY_ORDER.index))


def two_saddle_families() -> Tuple[Dict[Tuple[str, str], Set[str]], Set[Tuple[str, str]]]:
    """
    Two-saddle flows grouped by the pair of basic fat handles identified.

    Returns the links (plain notation) of each admissible family and the set
    of families rejected because they generate a bitorus.
    """
    families: Dict[Tuple[str, str], Set[str]] = {}
    rejected: Set[Tuple[str, str]] = set()
    for flow in _levels(1, False)[-1]:
        for site in flow.non_saddles:
            host = remove_orbit(flow, site).name
            for kind, d_index in HANDLE_CHOICES:
                key = family_key(host, kind.value)
                try:
                    child = replace_orbit(flow, site, kind, d_index)
                except BitorusError:
                    rejected.add(key)
                    continue
                families.setdefault(key, set()).add(canonicalize(link_of(child)).plain_text)
    return families, rejected
