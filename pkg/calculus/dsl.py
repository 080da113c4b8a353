"""
Flow expressions: parsing, printing, link evaluation and elaboration.

Grammar (whitespace-insensitive)::

    expr      := 'h' | op '(' expr ',' expr [';' selectors] ')'
    op        := 'I' | 'II' | 'III'
    selectors := selector (',' selector)*
    selector  := '?' | ['@'] role ['#' INT]
    role      := 'hopf.0' | 'hopf.2' | 'sep.d0' | 'sep.d2'

Operation II takes one selector naming the component removed from its right
argument; operation III takes two, the index-0 component removed from the left
argument and the index-2 component removed from the right one. A selector
prefixed with '@' is a site: the component of the host argument replaced by
the new handle when the expression alone does not fix it. Positions (#n) count
components of the same role in link order (left argument first, as the link
algebra lists them), starting at 1. Orbit selectors on a built flow
(`select_orbit`) count orbits in creation order instead.
"""
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from calculus.errors import (
    AmbiguousSelectorError,
    BitorusError,
    ElaborationError,
    ExprSyntaxError,
    FatHandleError,
    LinkError,
    SelectorError,
)
from calculus.flow_model import BasicHandleKind, FlowModel, hopf_flow, replace_orbit
from calculus.isomorphism import canonical_key
from calculus.link_algebra import (
    IndexedLink,
    OrbitId,
    OrbitIndex,
    canonicalize,
    make_hopf,
    op_I,
    op_II,
    op_III,
)

ROLES = ("hopf.0", "hopf.2", "sep.d0", "sep.d2")
UNRESOLVED = "?"


@dataclass(frozen=True)
class Selector:
    role: str
    position: Optional[int] = None

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise SelectorError(f"Unknown selector role {self.role!r}; expected one of {', '.join(ROLES)}.")
        if self.position is not None and self.position < 1:
            raise SelectorError(f"Selector positions start at 1, got {self.position}.")

    @property
    def index(self) -> OrbitIndex:
        return OrbitIndex(int(self.role[-1]))

    @property
    def is_hopf(self) -> bool:
        return self.role.startswith("hopf")

    def __str__(self) -> str:
        return self.role if self.position is None else f"{self.role}#{self.position}"


@dataclass(frozen=True)
class Leaf:
    pass


@dataclass(frozen=True)
class OpI:
    left: "FlowExpr"
    right: "FlowExpr"
    site: Optional[Selector] = None


@dataclass(frozen=True)
class OpII:
    left: "FlowExpr"
    right: "FlowExpr"
    removed: Optional[Selector] = None
    site: Optional[Selector] = None


@dataclass(frozen=True)
class OpIII:
    left: "FlowExpr"
    right: "FlowExpr"
    removed0: Optional[Selector] = None
    removed2: Optional[Selector] = None
    site: Optional[Selector] = None


FlowExpr = Union[Leaf, OpI, OpII, OpIII]

_REMOVAL_ARITY = {"I": 0, "II": 1, "III": 2}


# ---------------------------------------------------------------- link roles


def link_roles(link: IndexedLink) -> Dict[str, List[OrbitId]]:
    roles: Dict[str, List[OrbitId]] = {}
    paired = {c for pair in link.hopf_pairs for c in pair}
    for oid, idx in link.components():
        if idx == OrbitIndex.SADDLE:
            continue
        role = f"hopf.{int(idx)}" if (oid, idx) in paired else f"sep.d{int(idx)}"
        roles.setdefault(role, []).append(oid)
    return roles


def flow_roles(flow: FlowModel) -> Dict[str, List[OrbitId]]:
    roles: Dict[str, List[OrbitId]] = {}
    for oid in flow.non_saddles:
        idx = int(flow.orbits[oid])
        role = f"hopf.{idx}" if flow.is_hopf_member(oid) else f"sep.d{idx}"
        roles.setdefault(role, []).append(oid)
    return roles


def _legal_roles(roles: Dict[str, List[OrbitId]], index: Optional[OrbitIndex] = None) -> List[str]:
    return [r for r in ROLES if r in roles and (index is None or int(r[-1]) == index)]


def _pick(roles: Dict[str, List[OrbitId]], sel: Selector, what: str) -> List[OrbitId]:
    members = roles.get(sel.role)
    if not members:
        raise SelectorError(f"{what}: no component with role {sel.role} (available: {', '.join(_legal_roles(roles))}).")
    if sel.position is None:
        return list(members)
    if sel.position > len(members):
        raise SelectorError(f"{what}: {sel} is out of range, only {len(members)} component(s) with role {sel.role}.")
    return [members[sel.position - 1]]


def _selector_names(roles: Dict[str, List[OrbitId]], oids: List[OrbitId]) -> List[str]:
    names = []
    for oid in oids:
        for role in ROLES:
            if oid in roles.get(role, []):
                names.append(f"{role}#{roles[role].index(oid) + 1}")
    return names


# ---------------------------------------------------------------- parser


_OP_RE = re.compile(r"(III|II|I)(?![A-Za-z0-9_.])")
_ROLE_RE = re.compile(r"hopf\.[02]|sep\.d[02]")
_INT_RE = re.compile(r"\d+")


class _Parser:
    def __init__(self, text: str, strict: bool):
        self.text = text
        self.pos = 0
        self.strict = strict

    def _skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _peek(self) -> str:
        self._skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def _expect(self, literal: str) -> None:
        if self._peek() != literal:
            found = self._peek() or "end of input"
            raise ExprSyntaxError(f"Expected {literal!r}, found {found!r}", self.pos)
        self.pos += 1

    def _match(self, regex: "re.Pattern") -> Optional[str]:
        self._skip()
        m = regex.match(self.text, self.pos)
        if not m:
            return None
        self.pos = m.end()
        return m.group(0)

    def parse(self) -> FlowExpr:
        e = self.expr()
        if self._peek():
            raise ExprSyntaxError(f"Unexpected {self._peek()!r} after expression", self.pos)
        return e

    def expr(self) -> FlowExpr:
        self._skip()
        start = self.pos
        op = self._match(_OP_RE)
        if op is None:
            if self._peek() == "h":
                self.pos += 1
                return Leaf()
            found = self._peek() or "end of input"
            raise ExprSyntaxError(f"Expected 'h' or an operation I, II, III, found {found!r}", self.pos)
        self._expect("(")
        left = self.expr()
        self._expect(",")
        right = self.expr()
        removals: List[Optional[Selector]] = []
        site = None
        given = False
        if self._peek() == ";":
            self.pos += 1
            given = True
            removals, site = self.selectors()
        self._expect(")")
        return self._build(op, left, right, removals if given else None, site, start)

    def selectors(self) -> Tuple[List[Optional[Selector]], Optional[Selector]]:
        removals: List[Optional[Selector]] = []
        site = None
        while True:
            at = self.pos
            is_site, sel = self.selector()
            if is_site:
                if site is not None:
                    raise ExprSyntaxError("At most one '@' site selector per operation", at)
                site = sel
            else:
                removals.append(sel)
            if self._peek() != ",":
                return removals, site
            self.pos += 1

    def selector(self) -> Tuple[bool, Optional[Selector]]:
        if self._peek() == UNRESOLVED:
            self.pos += 1
            return False, None
        is_site = self._peek() == "@"
        if is_site:
            self.pos += 1
        at = self.pos
        role = self._match(_ROLE_RE)
        if role is None:
            raise ExprSyntaxError(f"Expected a selector role ({', '.join(ROLES)})", at)
        position = None
        if self._peek() == "#":
            self.pos += 1
            digits = self._match(_INT_RE)
            if digits is None:
                raise ExprSyntaxError("Expected a position after '#'", self.pos)
            position = int(digits)
            if position < 1:
                raise ExprSyntaxError("Selector positions start at 1", self.pos - len(digits))
        return is_site, Selector(role, position)

    def _build(self, op, left, right, removals, site, start) -> FlowExpr:
        arity = _REMOVAL_ARITY[op]
        if removals is not None and removals and len(removals) != arity:
            raise ExprSyntaxError(
                f"Operation {op} takes {arity} removal selector(s), got {len(removals)}", start
            )
        omitted = not removals
        if op == "I":
            return OpI(left, right, site)
        if op == "II":
            removed = self._default(right, None, "II") if omitted else removals[0]
            return OpII(left, right, removed, site)
        if omitted:
            removed0 = self._default(left, OrbitIndex.REPULSIVE, "III (left)")
            removed2 = self._default(right, OrbitIndex.ATTRACTIVE, "III (right)")
        else:
            removed0, removed2 = removals
        return OpIII(left, right, removed0, removed2, site)

    def _default(self, arg: FlowExpr, index: Optional[OrbitIndex], what: str) -> Optional[Selector]:
        link = _try_link(arg)
        if link is None:
            if self.strict:
                raise AmbiguousSelectorError(f"Operation {what}: the argument does not determine the removed component")
            return None
        legal = _legal_roles(link_roles(link), index)
        if len(legal) == 1:
            return Selector(legal[0])
        if self.strict:
            raise AmbiguousSelectorError(f"Operation {what} needs a selector for the removed component", legal)
        return None


def _try_link(e: FlowExpr) -> Optional[IndexedLink]:
    try:
        return evaluate_link(e)
    except FatHandleError:
        return None


def parse(text: str, strict: bool = False) -> FlowExpr:
    """
    Parse a flow expression. Omitted selectors default to the only legal role;
    ambiguous ones stay unresolved (printed as '?') and `elaborate` reports
    their candidates. With strict=True they raise AmbiguousSelectorError here.
    """
    return _Parser(text, strict).parse()


def _format_selector(sel: Optional[Selector]) -> str:
    return UNRESOLVED if sel is None else str(sel)


def print_expr(e: FlowExpr) -> str:
    if isinstance(e, Leaf):
        return "h"
    args = f"{print_expr(e.left)},{print_expr(e.right)}"
    if isinstance(e, OpI):
        items = []
        name = "I"
    elif isinstance(e, OpII):
        items = [_format_selector(e.removed)]
        name = "II"
    else:
        items = [_format_selector(e.removed0), _format_selector(e.removed2)]
        name = "III"
    if e.site is not None:
        items.append(f"@{e.site}")
    return f"{name}({args};{','.join(items)})" if items else f"{name}({args})"


def is_resolved(e: FlowExpr) -> bool:
    if isinstance(e, Leaf):
        return True
    if isinstance(e, OpII) and e.removed is None:
        return False
    if isinstance(e, OpIII) and (e.removed0 is None or e.removed2 is None):
        return False
    return is_resolved(e.left) and is_resolved(e.right)


def saddle_count(e: FlowExpr) -> int:
    if isinstance(e, Leaf):
        return 0
    return 1 + saddle_count(e.left) + saddle_count(e.right)


# ---------------------------------------------------------------- link evaluation


def _component(link: IndexedLink, sel: Optional[Selector], index: Optional[OrbitIndex], what: str) -> OrbitId:
    roles = link_roles(link)
    if sel is None:
        raise AmbiguousSelectorError(f"{what}: no selector for the removed component", _legal_roles(roles, index))
    if index is not None and sel.index != index:
        raise SelectorError(f"{what}: the removed component must have index {int(index)}, {sel} has {int(sel.index)}.")
    return _pick(roles, sel, what)[0]


def evaluate_link(e: FlowExpr) -> IndexedLink:
    """The indexed link of an expression, computed with the link algebra alone."""
    if isinstance(e, Leaf):
        return make_hopf(0, 2)
    left, right = evaluate_link(e.left), evaluate_link(e.right)
    if isinstance(e, OpI):
        return op_I(left, right)
    if isinstance(e, OpII):
        return op_II(left, right, _component(right, e.removed, None, "Operation II"))
    k1 = _component(left, e.removed0, OrbitIndex.REPULSIVE, "Operation III (left)")
    k2 = _component(right, e.removed2, OrbitIndex.ATTRACTIVE, "Operation III (right)")
    return op_III(left, right, k1, k2)


# ---------------------------------------------------------------- elaboration

# orbit standing for each Hopf component of the leaf an argument is grown from;
# None marks the component removed by the enclosing operation
Seed = Dict[OrbitIndex, Optional[OrbitId]]
LeafPath = Tuple[str, ...]
Placed = List[Optional[OrbitId]]


def _default_root(e: FlowExpr) -> LeafPath:
    """Leaf grown first: follow the compound argument, the right one when both are."""
    path: List[str] = []
    while not isinstance(e, Leaf):
        if isinstance(e.right, Leaf):
            path.append("L")
            e = e.left
        else:
            path.append("R")
            e = e.right
    return tuple(path)


def _position(link: IndexedLink, k: OrbitId) -> int:
    return link.ids().index(k)


def _without(items: List, position: int) -> List:
    return items[:position] + items[position + 1:]


def _removed(e: FlowExpr) -> Tuple[Optional[OrbitId], Optional[OrbitId]]:
    """Link components removed by an operation from its left and right arguments."""
    if isinstance(e, OpI):
        return None, None
    if isinstance(e, OpII):
        return None, _component(evaluate_link(e.right), e.removed, None, "Operation II")
    k1 = _component(evaluate_link(e.left), e.removed0, OrbitIndex.REPULSIVE, "Operation III (left)")
    k2 = _component(evaluate_link(e.right), e.removed2, OrbitIndex.ATTRACTIVE, "Operation III (right)")
    return k1, k2


def _sources(e: FlowExpr) -> List[Optional[Tuple[LeafPath, OrbitIndex]]]:
    """For each component of the expression's link: the leaf it comes from and its index there."""
    if isinstance(e, Leaf):
        return [((), OrbitIndex.REPULSIVE), ((), OrbitIndex.ATTRACTIVE)]
    left = [None if s is None else (("L",) + s[0], s[1]) for s in _sources(e.left)]
    right = [None if s is None else (("R",) + s[0], s[1]) for s in _sources(e.right)]
    k1, k2 = _removed(e)
    if k1 is not None:
        left = _without(left, _position(evaluate_link(e.left), k1))
    if k2 is not None:
        right = _without(right, _position(evaluate_link(e.right), k2))
    return left + right + [None]


def _placed_roles(link: IndexedLink, placed: Placed) -> Dict[str, List[Optional[OrbitId]]]:
    return {role: [placed[_position(link, oid)] for oid in oids] for role, oids in link_roles(link).items()}


def _sites(link: IndexedLink, placed: Placed, sel: Optional[Selector]) -> List[OrbitId]:
    if sel is None:
        return [o for o, (_, idx) in zip(placed, link.components()) if o is not None and idx != OrbitIndex.SADDLE]
    picked = [o for o in _pick(_placed_roles(link, placed), sel, "Site") if o is not None]
    if not picked:
        raise SelectorError(f"Site {sel} names a component removed by an enclosing operation.")
    return picked


def _replace_at(
    host: FlowModel,
    candidates: List[OrbitId],
    kind: BasicHandleKind,
    d_index: Optional[OrbitIndex],
    roles: Dict[str, List[Optional[OrbitId]]],
) -> Tuple[OrbitId, FlowModel]:
    """Replace one of `candidates`; all admissible choices must give the same flow."""
    results: List[Tuple[OrbitId, FlowModel]] = []
    rejected: Optional[BitorusError] = None
    for k in candidates:
        try:
            results.append((k, replace_orbit(host, k, kind, d_index)))
        except BitorusError as exc:
            rejected = exc
    if not results:
        if rejected is not None:
            raise rejected
        raise ElaborationError(f"No orbit of the host flow can take a {kind.value} handle.")
    first = canonical_key(results[0][1])
    distinct = [k for k, flow in results[1:] if canonical_key(flow) != first]
    if distinct:
        raise AmbiguousSelectorError(
            f"Replacing different orbits with {kind.value} gives different flows; add an '@' site selector",
            _selector_names(roles, [results[0][0]] + distinct),
        )
    return results[0]


def _grow(flow: FlowModel, e: FlowExpr, seed: Seed, root: LeafPath) -> Tuple[FlowModel, Placed]:
    """
    Grow expression `e` inside `flow`, starting from the leaf at `root` whose
    components are the seed orbits. Returns the flow and the orbit placed for
    each component of the expression's link (None where removed).
    """
    if isinstance(e, Leaf):
        return flow, [seed.get(OrbitIndex.REPULSIVE), seed.get(OrbitIndex.ATTRACTIVE)]
    host_right = root[0] == "R"
    host_e, other_e = (e.right, e.left) if host_right else (e.left, e.right)
    flow, placed = _grow(flow, host_e, seed, root[1:])
    link = evaluate_link(host_e)
    k1, k2 = _removed(e)

    if isinstance(e, OpIII) or (isinstance(e, OpII) and host_right):
        if e.site is not None:
            raise SelectorError(
                f"Operation {'III' if isinstance(e, OpIII) else 'II'} already fixes the replaced orbit "
                f"of its {'right' if host_right else 'left'} argument; '@' is not allowed."
            )
        removed = k2 if host_right else k1
        position = _position(link, removed)
        if placed[position] is None:
            raise ElaborationError(f"Cannot elaborate {print_expr(e)}: the removed component has no orbit.")
        kind = BasicHandleKind.HU if isinstance(e, OpII) else BasicHandleKind.DU
        flow = replace_orbit(flow, placed[position], kind)
        placed = _without(placed, position)
    else:
        d_index = None
        kind = BasicHandleKind.HDU
        if isinstance(e, OpII):
            kind, d_index = BasicHandleKind.DDU, evaluate_link(e.right).index_of(k2).dual
        roles = _placed_roles(link, placed)
        site, flow = _replace_at(flow, _sites(link, placed, e.site), kind, d_index, roles)
        created = flow.construction_log[-1].created
        core = created[2] if kind is BasicHandleKind.HDU else created[0]
        placed = [core if o == site else o for o in placed]

    created = flow.construction_log[-1].created
    saddle = created[-1]
    if kind in (BasicHandleKind.HDU, BasicHandleKind.HU):
        # the other argument is grown on the fresh Hopf pair
        flow, others = _grow(flow, other_e, {OrbitIndex.REPULSIVE: created[0], OrbitIndex.ATTRACTIVE: created[1]},
                             _default_root(other_e))
    else:
        # rooted at the leaf that owned the removed component; its partner is the new d
        other_link = evaluate_link(other_e)
        removed = k1 if host_right else k2
        path, idx = _sources(other_e)[_position(other_link, removed)]
        d = created[1] if kind is BasicHandleKind.DDU else created[0]
        flow, others = _grow(flow, other_e, {idx: None, idx.dual: d}, path)
        others = _without(others, _position(other_link, removed))
    parts = others + placed if host_right else placed + others
    return flow, parts + [saddle]


def elaborate(e: FlowExpr) -> FlowModel:
    """
    Turn an expression into a construction sequence on the Hopf generator.

    Each operation replaces one orbit of its host argument (the compound one,
    the right one when both are) by a basic fat handle, then grows the other
    argument on the orbits the handle brought in: on its fresh Hopf pair for
    hdu and hu, or from the leaf whose removed component the new d stands in
    for, for ddu and du.
    """
    evaluate_link(e)
    if isinstance(e, Leaf):
        return hopf_flow()
    flow, _ = _grow(hopf_flow(), e, {OrbitIndex.REPULSIVE: 0, OrbitIndex.ATTRACTIVE: 1}, _default_root(e))
    return flow


# ---------------------------------------------------------------- link notation


_LINK_TOKEN_RE = re.compile(r"h\[\s*([02])\s*,\s*([02])\s*\]|h|d([02])|u|∅")
_LINK_SEP_RE = re.compile(r"\s*[·*]\s*")


def parse_link(text: str) -> IndexedLink:
    """Parse canonical link text such as 'h·d0·d2·u' (the separator may also be '*')."""
    pairs, separated = [], []
    next_id = 0
    pos = 0
    text = text.strip()
    if text in ("", "∅"):
        return IndexedLink()
    while pos < len(text):
        m = _LINK_TOKEN_RE.match(text, pos)
        if not m or m.group(0) == "∅":
            raise LinkError(f"Unrecognised link token at position {pos} in {text!r}.")
        token = m.group(0)
        if token.startswith("h"):
            i, j = (int(m.group(1)), int(m.group(2))) if m.group(1) else (0, 2)
            pairs.append(((next_id, OrbitIndex(i)), (next_id + 1, OrbitIndex(j))))
            next_id += 2
        elif token == "u":
            separated.append((next_id, OrbitIndex.SADDLE))
            next_id += 1
        else:
            separated.append((next_id, OrbitIndex(int(m.group(3)))))
            next_id += 1
        pos = m.end()
        if pos < len(text):
            sep = _LINK_SEP_RE.match(text, pos)
            if not sep or sep.end() == pos:
                raise LinkError(f"Expected '·' between link tokens at position {pos} in {text!r}.")
            pos = sep.end()
    return IndexedLink(tuple(pairs), tuple(separated))


def format_link(link: IndexedLink) -> str:
    return canonicalize(link).text


# ---------------------------------------------------------------- files


def normalize(text: str) -> str:
    return "".join(text.split())


def read_batch(path) -> List[Tuple[int, str]]:
    """(line number, expression) pairs; blank lines and lines starting with '#' are skipped."""
    out = []
    for number, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        out.append((number, line))
    return out


def load_selector_table(path) -> Dict[str, str]:
    """Read 'bare = explicit' lines mapping unresolved expressions to explicit ones."""
    table = {}
    for number, line in read_batch(path):
        bare, sep, explicit = line.partition("=")
        if not sep or not bare.strip() or not explicit.strip():
            raise SelectorError(f"{path}:{number}: expected 'bare = explicit', got {line!r}.")
        table[normalize(bare)] = explicit.strip()
    return table


def apply_selector_table(text: str, table: Dict[str, str]) -> str:
    return table.get(normalize(text), text)


DEFAULT_SELECTOR_TABLE = Path(__file__).resolve().parent.parent / "data" / "selectors.txt"


def f3_expression(n: int) -> str:
    """Explicit expression of the F_3 flow with n saddles, each step extending the chain."""
    if n < 1:
        raise ElaborationError("An F_3 expression needs at least one saddle.")
    text = "III(h,h;hopf.0,hopf.2)"
    for _ in range(n - 1):
        text = f"III(h,{text};hopf.0,sep.d2)"
    return text


def parse_selector(text: str) -> Selector:
    """A single selector such as 'sep.d2' or 'hopf.0#2'."""
    parser = _Parser(text, strict=True)
    is_site, sel = parser.selector()
    if parser._peek():
        raise ExprSyntaxError(f"Unexpected {parser._peek()!r} after selector", parser.pos)
    if sel is None or is_site:
        raise SelectorError(f"Expected a selector naming one orbit, got {text!r}.")
    return sel


def select_orbit(flow: FlowModel, sel: Selector) -> OrbitId:
    roles = flow_roles(flow)
    picked = _pick(roles, sel, "Orbit selector")
    if len(picked) > 1:
        raise AmbiguousSelectorError(
            f"Selector {sel} matches {len(picked)} orbits; add a position", _selector_names(roles, picked)
        )
    return picked[0]
