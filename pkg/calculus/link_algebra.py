"""
Indexed links in Wada's notation.

A link is a multiset of Hopf pairs plus a multiset of separated unknots, each
component carrying an orbit index (0 repulsive, 1 saddle, 2 attractive).
All values are immutable; every operation returns a new link.
"""
from dataclasses import dataclass
from enum import IntEnum
from typing import Dict, List, Optional, Tuple

from calculus.errors import LinkError


class OrbitIndex(IntEnum):
    REPULSIVE = 0
    SADDLE = 1
    ATTRACTIVE = 2

    @property
    def dual(self) -> "OrbitIndex":
        return OrbitIndex(2 - int(self))


OrbitId = int
Component = Tuple[OrbitId, OrbitIndex]

HOPF_SYMBOL = "h"
SADDLE_SYMBOL = "u"
SEPARATOR = "·"


def _coerce_index(i) -> OrbitIndex:
    try:
        return OrbitIndex(int(i))
    except (TypeError, ValueError):
        raise LinkError(f"Orbit index must be 0, 1 or 2, got {i!r}.")


@dataclass(frozen=True)
class IndexedLink:
    hopf_pairs: Tuple[Tuple[Component, Component], ...] = ()
    separated: Tuple[Component, ...] = ()

    def __post_init__(self) -> None:
        seen = set()
        for pair in self.hopf_pairs:
            for oid, idx in pair:
                if idx == OrbitIndex.SADDLE:
                    raise LinkError("Saddle orbits are never Hopf components in F_A links.")
                if oid in seen:
                    raise LinkError(f"Duplicate orbit id {oid} in link.")
                seen.add(oid)
        for oid, _ in self.separated:
            if oid in seen:
                raise LinkError(f"Duplicate orbit id {oid} in link.")
            seen.add(oid)

    def components(self) -> List[Component]:
        out = [c for pair in self.hopf_pairs for c in pair]
        out.extend(self.separated)
        return sorted(out)

    def ids(self) -> List[OrbitId]:
        return [oid for oid, _ in self.components()]

    def index_of(self, k: OrbitId) -> OrbitIndex:
        for oid, idx in self.components():
            if oid == k:
                return idx
        raise LinkError(f"Unknown orbit id {k}.")

    def partner_of(self, k: OrbitId) -> Optional[Component]:
        for a, b in self.hopf_pairs:
            if a[0] == k:
                return b
            if b[0] == k:
                return a
        return None

    def is_hopf_member(self, k: OrbitId) -> bool:
        return self.partner_of(k) is not None

    @property
    def saddle_count(self) -> int:
        return sum(1 for _, idx in self.separated if idx == OrbitIndex.SADDLE)

    def index_counts(self) -> Dict[OrbitIndex, int]:
        counts = {i: 0 for i in OrbitIndex}
        for _, idx in self.components():
            counts[idx] += 1
        return counts

    def __len__(self) -> int:
        return 2 * len(self.hopf_pairs) + len(self.separated)

    def __str__(self) -> str:
        return canonicalize(self).text


@dataclass(frozen=True, order=True)
class CanonicalLink:
    """Relabeling- and order-invariant normal form of an IndexedLink."""

    hopf: Tuple[Tuple[int, int], ...] = ()
    separated: Tuple[int, ...] = ()

    @property
    def saddle_count(self) -> int:
        return sum(1 for i in self.separated if i == OrbitIndex.SADDLE)

    def _tokens(self, plain: bool) -> List[str]:
        tokens = []
        for i, j in self.hopf:
            if (i, j) == (0, 2):
                tokens.append(HOPF_SYMBOL)
            else:
                tokens.append(f"{HOPF_SYMBOL}[{i},{j}]")
        for i in self.separated:
            if i == OrbitIndex.SADDLE:
                tokens.append(SADDLE_SYMBOL)
            else:
                tokens.append("d" if plain else f"d{i}")
        return tokens

    @property
    def text(self) -> str:
        return SEPARATOR.join(self._tokens(plain=False)) or "∅"

    @property
    def plain_text(self) -> str:
        """Link text where d does not show its index."""
        return SEPARATOR.join(self._tokens(plain=True)) or "∅"

    def __str__(self) -> str:
        return self.text


def _separated_key(i: int) -> Tuple[bool, int]:
    # d0, d2 before u
    return (i == OrbitIndex.SADDLE, i)


def canonicalize(l: IndexedLink) -> CanonicalLink:
    hopf = sorted(tuple(sorted((int(a[1]), int(b[1])))) for a, b in l.hopf_pairs)
    sep = sorted((int(idx) for _, idx in l.separated), key=_separated_key)
    return CanonicalLink(hopf=tuple(hopf), separated=tuple(sep))


def links_equal(l1: IndexedLink, l2: IndexedLink) -> bool:
    return canonicalize(l1) == canonicalize(l2)


def _relabel(l: IndexedLink, offset: int) -> Tuple[IndexedLink, Dict[OrbitId, OrbitId]]:
    """Renumber ids to offset, offset+1, ... keeping their relative order."""
    mapping = {oid: offset + rank for rank, oid in enumerate(l.ids())}
    pairs = tuple(((mapping[a[0]], a[1]), (mapping[b[0]], b[1])) for a, b in l.hopf_pairs)
    sep = tuple((mapping[oid], idx) for oid, idx in l.separated)
    return IndexedLink(pairs, sep), mapping


def make_hopf(i, j) -> IndexedLink:
    i, j = _coerce_index(i), _coerce_index(j)
    if OrbitIndex.SADDLE in (i, j):
        raise LinkError("Hopf components must have index 0 or 2.")
    return IndexedLink(hopf_pairs=(((0, i), (1, j)),))


def make_unknot(i) -> IndexedLink:
    return IndexedLink(separated=((0, _coerce_index(i)),))


def split_sum(l1: IndexedLink, l2: IndexedLink) -> IndexedLink:
    a, _ = _relabel(l1, 0)
    b, _ = _relabel(l2, len(l1))
    return IndexedLink(a.hopf_pairs + b.hopf_pairs, a.separated + b.separated)


def remove_component(l: IndexedLink, k: OrbitId) -> IndexedLink:
    idx = l.index_of(k)
    if idx == OrbitIndex.SADDLE:
        raise LinkError(f"Component {k} is a saddle; only index 0 or 2 can be removed.")
    partner = l.partner_of(k)
    if partner is None:
        return IndexedLink(l.hopf_pairs, tuple(c for c in l.separated if c[0] != k))
    pairs = tuple(p for p in l.hopf_pairs if k not in (p[0][0], p[1][0]))
    return IndexedLink(pairs, l.separated + (partner,))


def _with_new_saddle(l: IndexedLink) -> IndexedLink:
    return split_sum(l, make_unknot(OrbitIndex.SADDLE))


def op_I(l1: IndexedLink, l2: IndexedLink) -> IndexedLink:
    return _with_new_saddle(split_sum(l1, l2))


def op_II(l1: IndexedLink, l2: IndexedLink, k2: OrbitId) -> IndexedLink:
    return _with_new_saddle(split_sum(l1, remove_component(l2, k2)))


def op_III(l1: IndexedLink, l2: IndexedLink, k1: OrbitId, k2: OrbitId) -> IndexedLink:
    if l1.index_of(k1) != OrbitIndex.REPULSIVE:
        raise LinkError(f"Operation III needs k1 of index 0, got index {int(l1.index_of(k1))}.")
    if l2.index_of(k2) != OrbitIndex.ATTRACTIVE:
        raise LinkError(f"Operation III needs k2 of index 2, got index {int(l2.index_of(k2))}.")
    return _with_new_saddle(split_sum(remove_component(l1, k1), remove_component(l2, k2)))


def dual_link(l: IndexedLink) -> IndexedLink:
    """Index reversal 0 <-> 2 (time reversal of the flow)."""
    pairs = tuple(((a[0], a[1].dual), (b[0], b[1].dual)) for a, b in l.hopf_pairs)
    return IndexedLink(pairs, tuple((oid, idx.dual) for oid, idx in l.separated))
