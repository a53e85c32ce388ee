"""Domain model: topology, routes, route maps, ghost attributes, predicates.

Everything here is an immutable value; the operations are pure functions, so
concurrent use needs no coordination.  Route maps follow the usual term-list
semantics: terms are tried in order, the first term whose match clauses all
hold decides (deny or permit + set actions), and a route matching no term is
rejected.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping, NamedTuple, Optional, Union

from .dfa import regex_matches_path
from .errors import SpecificationError

IMPORT = "import"
EXPORT = "export"

U16_MAX = 0xFFFF
U32_MAX = 0xFFFFFFFF

CMP_OPS = {
    "==": operator.eq,
    "!=": operator.ne,
    "<=": operator.le,
    ">=": operator.ge,
    "<": operator.lt,
    ">": operator.gt,
}


def _check_u32(value: int, what: str) -> int:
    if not 0 <= value <= U32_MAX:
        raise ValueError(f"{what} out of 32-bit range: {value}")
    return value


@dataclass(frozen=True)
class Prefix:
    """IPv4 prefix in canonical form: address bits below (32 - length) are zero."""

    address: int
    length: int

    def __post_init__(self):
        _check_u32(self.address, "prefix address")
        if not 0 <= self.length <= 32:
            raise ValueError(f"prefix length out of range: {self.length}")
        host_bits = 32 - self.length
        if host_bits and self.address & ((1 << host_bits) - 1):
            raise ValueError(f"prefix {self} not in canonical form")

    @classmethod
    def parse(cls, text: str) -> "Prefix":
        addr_part, _, len_part = text.partition("/")
        if not len_part:
            raise ValueError(f"prefix {text!r} missing /length")
        return cls(parse_ipv4(addr_part), int(len_part))

    def __str__(self) -> str:
        return f"{format_ipv4(self.address)}/{self.length}"


def parse_ipv4(text: str) -> int:
    parts = text.split(".")
    if len(parts) != 4 or not all(p.isdigit() and int(p) <= 255 for p in parts):
        raise ValueError(f"bad IPv4 address: {text!r}")
    value = 0
    for p in parts:
        value = (value << 8) | int(p)
    return value


def format_ipv4(value: int) -> str:
    return ".".join(str((value >> shift) & 0xFF) for shift in (24, 16, 8, 0))


class Community(NamedTuple):
    """BGP community tag, printed in the conventional "A:B" form."""

    high: int
    low: int

    @classmethod
    def parse(cls, text: str) -> "Community":
        hi, _, lo = text.partition(":")
        if not lo or not hi.isdigit() or not lo.isdigit():
            raise ValueError(f"bad community: {text!r}")
        c = cls(int(hi), int(lo))
        if c.high > U16_MAX or c.low > U16_MAX:
            raise ValueError(f"community parts exceed 16 bits: {text!r}")
        return c

    def __str__(self) -> str:
        return f"{self.high}:{self.low}"


class Edge(NamedTuple):
    src: str
    dst: str

    def __str__(self) -> str:
        return f"{self.src}->{self.dst}"


Location = Union[str, Edge]


def format_location(loc: Location) -> str:
    return str(loc)


@dataclass(frozen=True)
class Route:
    """A BGP announcement plus named boolean ghost fields.

    ``ghosts`` is stored as a sorted tuple of (name, value) pairs so routes
    are hashable; construct with either a mapping or such a tuple.
    """

    prefix: Prefix
    as_path: tuple[int, ...] = ()
    next_hop: int = 0
    local_pref: int = 0
    med: int = 0
    communities: frozenset[Community] = frozenset()
    ghosts: tuple[tuple[str, bool], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "as_path", tuple(self.as_path))
        for asn in self.as_path:
            _check_u32(asn, "ASN")
        _check_u32(self.next_hop, "next_hop")
        _check_u32(self.local_pref, "local_pref")
        _check_u32(self.med, "med")
        object.__setattr__(self, "communities", frozenset(self.communities))
        ghosts = self.ghosts
        if isinstance(ghosts, Mapping):
            ghosts = tuple(sorted(ghosts.items()))
        else:
            ghosts = tuple(sorted(ghosts))
        object.__setattr__(self, "ghosts", ghosts)

    @property
    def ghost_map(self) -> dict[str, bool]:
        return dict(self.ghosts)

    def ghost(self, name: str) -> bool:
        for g, v in self.ghosts:
            if g == name:
                return v
        raise SpecificationError(f"route has no ghost attribute {name!r}")

    def with_ghosts(self, ghosts: Mapping[str, bool]) -> "Route":
        return replace(self, ghosts=tuple(sorted(ghosts.items())))

    def sort_key(self):
        return (
            self.prefix.address,
            self.prefix.length,
            self.as_path,
            self.next_hop,
            self.local_pref,
            self.med,
            tuple(sorted(self.communities)),
            self.ghosts,
        )

    def __str__(self) -> str:
        comms = ",".join(str(c) for c in sorted(self.communities)) or "-"
        ghosts = ",".join(f"{g}={'T' if v else 'F'}" for g, v in self.ghosts) or "-"
        path = " ".join(str(a) for a in self.as_path) or "(empty)"
        return (
            f"{self.prefix} path=[{path}] nh={format_ipv4(self.next_hop)} "
            f"lp={self.local_pref} med={self.med} comm={{{comms}}} ghosts={{{ghosts}}}"
        )


# ---------------------------------------------------------------------------
# Topology


@dataclass(frozen=True)
class Topology:
    routers: frozenset[str]
    externals: frozenset[str]
    edges: frozenset[Edge]

    @property
    def nodes(self) -> frozenset[str]:
        return self.routers | self.externals

    def is_internal(self, node: str) -> bool:
        return node in self.routers

    def in_edges(self, node: str) -> list[Edge]:
        return sorted(e for e in self.edges if e.dst == node)

    def out_edges(self, node: str) -> list[Edge]:
        return sorted(e for e in self.edges if e.src == node)

    def internal_dst_edges(self) -> list[Edge]:
        return sorted(e for e in self.edges if e.dst in self.routers)

    def internal_src_edges(self) -> list[Edge]:
        return sorted(e for e in self.edges if e.src in self.routers)


# ---------------------------------------------------------------------------
# Route maps


@dataclass(frozen=True)
class PrefixListEntry:
    """One prefix-list line: prefix plus optional ge/le length bounds.

    Matching follows router practice: the candidate's first ``length`` bits
    must equal the entry's, and the candidate length must fall in
    [ge, le] when given, default exact match.
    """

    prefix: Prefix
    ge: Optional[int] = None
    le: Optional[int] = None

    def __post_init__(self):
        lo, hi = self.bounds()
        if not self.prefix.length <= lo <= hi <= 32:
            raise ValueError(f"bad ge/le bounds on {self}")

    def bounds(self) -> tuple[int, int]:
        if self.ge is None and self.le is None:
            return self.prefix.length, self.prefix.length
        lo = self.ge if self.ge is not None else self.prefix.length
        hi = self.le if self.le is not None else (32 if self.ge is not None else None)
        if hi is None:
            hi = self.le
        return lo, hi

    def matches(self, p: Prefix) -> bool:
        lo, hi = self.bounds()
        if not lo <= p.length <= hi:
            return False
        shift = 32 - self.prefix.length
        return (p.address >> shift) == (self.prefix.address >> shift) if shift < 32 else True

    def __str__(self) -> str:
        s = str(self.prefix)
        if self.ge is not None:
            s += f" ge {self.ge}"
        if self.le is not None:
            s += f" le {self.le}"
        return s


@dataclass(frozen=True)
class MatchPrefix:
    entries: tuple[PrefixListEntry, ...]

    def matches(self, r: Route) -> bool:
        return any(e.matches(r.prefix) for e in self.entries)


@dataclass(frozen=True)
class MatchCommunity:
    community: Community
    present: bool = True

    def matches(self, r: Route) -> bool:
        return (self.community in r.communities) == self.present


@dataclass(frozen=True)
class MatchLocalPref:
    op: str
    value: int

    def matches(self, r: Route) -> bool:
        return CMP_OPS[self.op](r.local_pref, self.value)


@dataclass(frozen=True)
class MatchMed:
    op: str
    value: int

    def matches(self, r: Route) -> bool:
        return CMP_OPS[self.op](r.med, self.value)


@dataclass(frozen=True)
class MatchAsPath:
    regex: str

    def matches(self, r: Route) -> bool:
        return regex_matches_path(self.regex, r.as_path)


MatchClause = Union[MatchPrefix, MatchCommunity, MatchLocalPref, MatchMed, MatchAsPath]


@dataclass(frozen=True)
class AddCommunity:
    community: Community


@dataclass(frozen=True)
class DeleteCommunity:
    community: Community


@dataclass(frozen=True)
class DeleteAllCommunities:
    pass


@dataclass(frozen=True)
class SetLocalPref:
    value: int


@dataclass(frozen=True)
class SetMed:
    value: int


@dataclass(frozen=True)
class SetNextHop:
    value: int


@dataclass(frozen=True)
class PrependAsn:
    asn: int


SetAction = Union[
    AddCommunity,
    DeleteCommunity,
    DeleteAllCommunities,
    SetLocalPref,
    SetMed,
    SetNextHop,
    PrependAsn,
]

PERMIT = "permit"
DENY = "deny"


@dataclass(frozen=True)
class Term:
    matches: tuple[MatchClause, ...] = ()
    action: str = PERMIT
    sets: tuple[SetAction, ...] = ()

    def __post_init__(self):
        if self.action not in (PERMIT, DENY):
            raise ValueError(f"bad term action: {self.action!r}")
        if self.action == DENY and self.sets:
            raise ValueError("deny term cannot carry set actions")

    def matched_by(self, r: Route) -> bool:
        return all(m.matches(r) for m in self.matches)


@dataclass(frozen=True)
class RouteMap:
    terms: tuple[Term, ...] = ()


PERMIT_ALL = RouteMap(terms=(Term(),))


def apply_set_action(action: SetAction, r: Route) -> Route:
    if isinstance(action, AddCommunity):
        return replace(r, communities=r.communities | {action.community})
    if isinstance(action, DeleteCommunity):
        return replace(r, communities=r.communities - {action.community})
    if isinstance(action, DeleteAllCommunities):
        return replace(r, communities=frozenset())
    if isinstance(action, SetLocalPref):
        return replace(r, local_pref=action.value)
    if isinstance(action, SetMed):
        return replace(r, med=action.value)
    if isinstance(action, SetNextHop):
        return replace(r, next_hop=action.value)
    if isinstance(action, PrependAsn):
        return replace(r, as_path=(action.asn,) + r.as_path)
    raise SpecificationError(f"unknown set action {action!r}")


def apply_route_map(m: RouteMap, r: Route) -> Optional[Route]:
    """First matching term decides; no match means reject (returns None)."""
    for term in m.terms:
        if term.matched_by(r):
            if term.action == DENY:
                return None
            out = r
            for action in term.sets:
                out = apply_set_action(action, out)
            return out
    return None


# ---------------------------------------------------------------------------
# Ghost attributes


class Effect(Enum):
    SET_TRUE = "set_true"
    SET_FALSE = "set_false"
    PRESERVE = "preserve"


@dataclass(frozen=True, eq=False)
class GhostSpec:
    """Declared ghost names with location-based effects.

    Effects never look at route attributes; unspecified (edge, ghost)
    combinations default to PRESERVE.
    """

    declarations: tuple[str, ...] = ()
    import_effects: Mapping[tuple[Edge, str], Effect] = field(default_factory=dict)
    export_effects: Mapping[tuple[Edge, str], Effect] = field(default_factory=dict)
    origin_defaults: Mapping[str, bool] = field(default_factory=dict)

    def effect(self, e: Edge, direction: str, ghost: str) -> Effect:
        table = self.import_effects if direction == IMPORT else self.export_effects
        return table.get((e, ghost), Effect.PRESERVE)

    def default_ghosts(self) -> dict[str, bool]:
        return {g: self.origin_defaults.get(g, False) for g in self.declarations}

    def __eq__(self, other):
        if not isinstance(other, GhostSpec):
            return NotImplemented
        return (
            self.declarations == other.declarations
            and dict(self.import_effects) == dict(other.import_effects)
            and dict(self.export_effects) == dict(other.export_effects)
            and dict(self.origin_defaults) == dict(other.origin_defaults)
        )


def apply_ghost_effects(g: GhostSpec, e: Edge, direction: str, r: Route) -> Route:
    ghosts = r.ghost_map
    for name in g.declarations:
        eff = g.effect(e, direction, name)
        if eff is Effect.SET_TRUE:
            ghosts[name] = True
        elif eff is Effect.SET_FALSE:
            ghosts[name] = False
    return r.with_ghosts(ghosts)


# ---------------------------------------------------------------------------
# Policy and network


@dataclass(frozen=True, eq=False)
class Policy:
    import_maps: Mapping[Edge, RouteMap] = field(default_factory=dict)
    export_maps: Mapping[Edge, RouteMap] = field(default_factory=dict)
    originate: Mapping[Edge, frozenset[Route]] = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, Policy):
            return NotImplemented
        return (
            dict(self.import_maps) == dict(other.import_maps)
            and dict(self.export_maps) == dict(other.export_maps)
            and dict(self.originate) == dict(other.originate)
        )


@dataclass(frozen=True, eq=False)
class Network:
    topology: Topology
    policy: Policy
    ghosts: GhostSpec = field(default_factory=GhostSpec)
    node_asns: Mapping[str, int] = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, Network):
            return NotImplemented
        return (
            self.topology == other.topology
            and self.policy == other.policy
            and self.ghosts == other.ghosts
            and dict(self.node_asns) == dict(other.node_asns)
        )


def import_transfer_concrete(net: Network, e: Edge, r: Route) -> Optional[Route]:
    """Import filter then ghost effects; None (reject) is absorbing."""
    m = net.policy.import_maps.get(e)
    if m is None:
        raise SpecificationError(f"no import map for edge {e}")
    out = apply_route_map(m, r)
    if out is None:
        return None
    return apply_ghost_effects(net.ghosts, e, IMPORT, out)


def export_transfer_concrete(net: Network, e: Edge, r: Route) -> Optional[Route]:
    m = net.policy.export_maps.get(e)
    if m is None:
        raise SpecificationError(f"no export map for edge {e}")
    out = apply_route_map(m, r)
    if out is None:
        return None
    return apply_ghost_effects(net.ghosts, e, EXPORT, out)


# ---------------------------------------------------------------------------
# Predicate language


class PredicateExpr:
    """Base class for the constraint language over route attributes."""

    def evaluate(self, r: Route) -> bool:
        raise NotImplementedError

    def to_dsl(self) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.to_dsl()


@dataclass(frozen=True)
class BoolConst(PredicateExpr):
    value: bool

    def evaluate(self, r: Route) -> bool:
        return self.value

    def to_dsl(self) -> str:
        return "true" if self.value else "false"


TRUE = BoolConst(True)
FALSE = BoolConst(False)


@dataclass(frozen=True)
class CommunityPred(PredicateExpr):
    community: Community

    def evaluate(self, r: Route) -> bool:
        return self.community in r.communities

    def to_dsl(self) -> str:
        return f"community {self.community}"


@dataclass(frozen=True)
class PrefixPred(PredicateExpr):
    entry: PrefixListEntry

    def evaluate(self, r: Route) -> bool:
        return self.entry.matches(r.prefix)

    def to_dsl(self) -> str:
        return f"prefix in {self.entry}"


@dataclass(frozen=True)
class LocalPrefPred(PredicateExpr):
    op: str
    value: int

    def evaluate(self, r: Route) -> bool:
        return CMP_OPS[self.op](r.local_pref, self.value)

    def to_dsl(self) -> str:
        return f"localpref {self.op} {self.value}"


@dataclass(frozen=True)
class MedPred(PredicateExpr):
    op: str
    value: int

    def evaluate(self, r: Route) -> bool:
        return CMP_OPS[self.op](r.med, self.value)

    def to_dsl(self) -> str:
        return f"med {self.op} {self.value}"


@dataclass(frozen=True)
class GhostPred(PredicateExpr):
    name: str

    def evaluate(self, r: Route) -> bool:
        return r.ghost(self.name)

    def to_dsl(self) -> str:
        return f"ghost {self.name}"


@dataclass(frozen=True)
class AsPathPred(PredicateExpr):
    regex: str

    def evaluate(self, r: Route) -> bool:
        return regex_matches_path(self.regex, r.as_path)

    def to_dsl(self) -> str:
        return f'aspath matches "{self.regex}"'


@dataclass(frozen=True)
class NotPred(PredicateExpr):
    operand: PredicateExpr

    def evaluate(self, r: Route) -> bool:
        return not self.operand.evaluate(r)

    def to_dsl(self) -> str:
        return f"not ({self.operand.to_dsl()})"


@dataclass(frozen=True)
class AndPred(PredicateExpr):
    left: PredicateExpr
    right: PredicateExpr

    def evaluate(self, r: Route) -> bool:
        return self.left.evaluate(r) and self.right.evaluate(r)

    def to_dsl(self) -> str:
        return f"({self.left.to_dsl()} and {self.right.to_dsl()})"


@dataclass(frozen=True)
class OrPred(PredicateExpr):
    left: PredicateExpr
    right: PredicateExpr

    def evaluate(self, r: Route) -> bool:
        return self.left.evaluate(r) or self.right.evaluate(r)

    def to_dsl(self) -> str:
        return f"({self.left.to_dsl()} or {self.right.to_dsl()})"


@dataclass(frozen=True)
class ImpliesPred(PredicateExpr):
    left: PredicateExpr
    right: PredicateExpr

    def evaluate(self, r: Route) -> bool:
        return (not self.left.evaluate(r)) or self.right.evaluate(r)

    def to_dsl(self) -> str:
        return f"({self.left.to_dsl()} implies {self.right.to_dsl()})"


def ghost_atoms(p: PredicateExpr) -> set[str]:
    if isinstance(p, GhostPred):
        return {p.name}
    if isinstance(p, NotPred):
        return ghost_atoms(p.operand)
    if isinstance(p, (AndPred, OrPred, ImpliesPred)):
        return ghost_atoms(p.left) | ghost_atoms(p.right)
    return set()


def eval_predicate(pred: PredicateExpr, r: Route) -> bool:
    """Evaluate a predicate on a concrete route.

    Raises SpecificationError when the predicate mentions a ghost the route
    does not carry.
    """
    declared = {g for g, _ in r.ghosts}
    missing = ghost_atoms(pred) - declared
    if missing:
        raise SpecificationError(f"undeclared ghost atom(s): {sorted(missing)}")
    return pred.evaluate(r)


@dataclass(frozen=True)
class NetworkProperty:
    location: Location
    pred: PredicateExpr


@dataclass(frozen=True, eq=False)
class InvariantMap:
    """One predicate per location (internal node or edge)."""

    entries: Mapping[Location, PredicateExpr]

    def at(self, loc: Location) -> PredicateExpr:
        try:
            return self.entries[loc]
        except KeyError:
            raise SpecificationError(f"no invariant entry for location {format_location(loc)}")

    def __eq__(self, other):
        if not isinstance(other, InvariantMap):
            return NotImplemented
        return dict(self.entries) == dict(other.entries)


# ---------------------------------------------------------------------------
# Validation


def validate_network(
    net: Network,
    invariants: Optional[InvariantMap] = None,
    prop: Optional[NetworkProperty] = None,
) -> list[str]:
    """Collect violations of the structural invariants; empty means valid."""
    v: list[str] = []
    topo = net.topology
    overlap = topo.routers & topo.externals
    if overlap:
        v.append(f"nodes declared both internal and external: {sorted(overlap)}")
    nodes = topo.nodes
    for e in sorted(topo.edges):
        for end in (e.src, e.dst):
            if end not in nodes:
                v.append(f"edge {e} references undeclared node {end}")
        if e.src == e.dst:
            v.append(f"self-loop edge {e}")
        if e.src in topo.externals and e.dst in topo.externals:
            v.append(f"edge {e} connects two external nodes")
    for ext in sorted(topo.externals):
        touches_internal = any(
            (e.src == ext and e.dst in topo.routers) or (e.dst == ext and e.src in topo.routers)
            for e in topo.edges
        )
        if not touches_internal:
            v.append(f"external node {ext} has no edge to an internal router")
    for n in sorted(nodes):
        if n not in net.node_asns:
            v.append(f"node {n} has no declared ASN")

    want_import = set(topo.internal_dst_edges())
    want_export = set(topo.internal_src_edges())
    have_import = set(net.policy.import_maps)
    have_export = set(net.policy.export_maps)
    have_orig = set(net.policy.originate)
    for e in sorted(want_import - have_import):
        v.append(f"missing import map for edge {e}")
    for e in sorted(have_import - want_import):
        v.append(f"import map on edge {e} whose destination is not internal")
    for e in sorted(want_export - have_export):
        v.append(f"missing export map for edge {e}")
    for e in sorted(have_export - want_export):
        v.append(f"export map on edge {e} whose source is not internal")
    for e in sorted(want_export - have_orig):
        v.append(f"missing origination set for edge {e}")
    for e in sorted(have_orig - want_export):
        v.append(f"origination set on edge {e} whose source is not internal")

    gs = net.ghosts
    declared = set(gs.declarations)
    if len(gs.declarations) != len(declared):
        v.append("duplicate ghost declarations")
    for table, direction in ((gs.import_effects, IMPORT), (gs.export_effects, EXPORT)):
        for (e, name) in sorted(table):
            if name not in declared:
                v.append(f"{direction} effect on undeclared ghost {name}")
            if e not in topo.edges:
                v.append(f"{direction} effect on unknown edge {e}")
            elif direction == IMPORT and e.dst not in topo.routers:
                v.append(f"import effect on edge {e} whose destination is not internal")
            elif direction == EXPORT and e.src not in topo.routers:
                v.append(f"export effect on edge {e} whose source is not internal")
    for name in sorted(set(gs.origin_defaults) - declared):
        v.append(f"origin default for undeclared ghost {name}")
    for e, routes in sorted(net.policy.originate.items()):
        for r in sorted(routes, key=Route.sort_key):
            if tuple(g for g, _ in r.ghosts) != tuple(sorted(declared)):
                v.append(f"originated route on {e} is not declared-ghost-complete: {r}")

    if invariants is not None:
        locations: list[Location] = sorted(topo.routers) + sorted(topo.edges)
        for loc in locations:
            if loc not in invariants.entries:
                v.append(f"missing invariant entry for location {format_location(loc)}")
        for loc in invariants.entries:
            if loc not in set(locations):
                v.append(f"invariant entry for unknown location {format_location(loc)}")
        for e in sorted(topo.edges):
            if e.src in topo.externals and e in invariants.entries:
                if invariants.entries[e] != TRUE:
                    v.append(f"external edge invariant must be true on {e}")

    if prop is not None:
        loc = prop.location
        if isinstance(loc, Edge):
            if loc not in topo.edges:
                v.append(f"property location {loc} is not an edge of the topology")
        elif loc not in nodes:
            v.append(f"property location {loc} is not a node of the topology")
        elif loc not in topo.routers:
            v.append(f"property location {loc} is not an internal router")

    return v
