"""Exact reference semantics: least-fixpoint route sets and valid-trace search.

The fixpoint computes, per location, the set of routes that can appear there
under the event semantics (any external announcement, any interleaving, no
best-path arbitration).  Path languages are tracked exactly up to
``aspath_bound`` symbols; routes whose paths grow beyond the bound spill into
a per-location attribute-only overflow tier, so the reported sets stay finite
while the suggested invariants (exact tier plus overflow tier) remain
inductive even for policies that prepend.

The trace side enumerates event sequences satisfying the validity axioms
(receives come from externals or earlier forwards, selections from earlier
receives through the import filter, forwards from originations or earlier
selections through the export filter), and a reachability variant computes
the set of events appearing in any bounded-length valid trace without
materializing the sequences.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

from . import config, model
from .bdd import FALSE
from .dfa import length_greater
from .errors import InstanceTooLargeError, SpecificationError
from .model import (
    Edge,
    GhostSpec,
    InvariantMap,
    Location,
    Network,
    NetworkProperty,
    Route,
)
from .symbolic import (
    Encoding,
    SetPredicate,
    SymbolicRouteSet,
    Witness,
    encode_predicate,
    transfer_attrs_overflow,
    transfer_route_map,
)

logger = logging.getLogger(__name__)

RECV = "recv"
SLCT = "slct"
FRWD = "frwd"

MAX_NODES_GUARD = 6
MAX_SEEDS_GUARD = 4
MAX_EVENTS_GUARD = 12


@dataclass(frozen=True)
class TraceEvent:
    kind: str  # recv | slct | frwd
    router: str
    neighbor: Optional[str]  # recv: sender; frwd: receiver; slct: None
    route: Route

    def sort_key(self):
        return (self.kind, self.router, self.neighbor or "", self.route.sort_key())

    def __str__(self) -> str:
        if self.kind == SLCT:
            return f"slct({self.router}, {self.route})"
        return f"{self.kind}({self.router}, {self.neighbor}, {self.route})"


@dataclass(frozen=True)
class SeedAlphabet:
    """Concrete routes injectable on every external-source edge."""

    routes: tuple[Route, ...]

    def __post_init__(self):
        if not self.routes:
            raise SpecificationError("seed alphabet must be nonempty")

    @classmethod
    def for_network(cls, net: Network, routes: Iterable[Route]) -> "SeedAlphabet":
        defaults = net.ghosts.default_ghosts()
        fixed = tuple(
            sorted((r.with_ghosts(defaults) for r in routes), key=Route.sort_key)
        )
        return cls(fixed)


@dataclass(eq=False)
class FixpointSolution:
    net: Network
    enc: Encoding
    aspath_bound: int
    node_sets: dict[str, SymbolicRouteSet]
    edge_sets: dict[Edge, SymbolicRouteSet]
    node_overflow: dict[str, int]
    edge_overflow: dict[Edge, int]
    iterations: int

    def set_at(self, loc: Location) -> SymbolicRouteSet:
        if isinstance(loc, Edge):
            return self.edge_sets[loc]
        return self.node_sets[loc]

    def cover_set(self, loc: Location) -> SymbolicRouteSet:
        """Exact tier plus the attribute-only overflow tier (paths beyond the bound)."""
        exact = self.set_at(loc)
        over = self.edge_overflow[loc] if isinstance(loc, Edge) else self.node_overflow[loc]
        if over == FALSE:
            return exact
        long_part = SymbolicRouteSet.from_product(
            self.enc, over, length_greater(self.aspath_bound, self.enc.n_symbols)
        )
        return exact.union(long_part)

    def dump_doc(self, samples: bool = False) -> dict:
        """Per-location statistics (and optional witness samples), JSON-ready."""
        out: dict = {"aspath_bound": self.aspath_bound, "iterations": self.iterations}
        locations = []
        for loc in sorted(self.node_sets) + sorted(self.edge_sets):
            s = self.set_at(loc)
            entry: dict = {"location": model.format_location(loc), **s.stats()}
            if samples and not s.is_empty():
                entry["sample"] = s.witness().to_doc()
            locations.append(entry)
        out["locations"] = locations
        return out


def default_aspath_bound(net: Network) -> int:
    return len(net.topology.nodes) + 2


def regex_bound_warnings(
    enc: Encoding, preds: Iterable[model.PredicateExpr], bound: int
) -> list[str]:
    """Spec regexes whose DFAs have more states than the path bound can
    distinguish paths the fixpoint truncates; surface that."""
    warnings = []
    seen = set()

    def walk(p):
        if isinstance(p, model.AsPathPred) and p.regex not in seen:
            seen.add(p.regex)
            d = enc.compile_regex(p.regex)
            if d.n_states > bound:
                warnings.append(
                    f"regex {p.regex!r} has {d.n_states} DFA states, more than the "
                    f"path bound {bound}; fixpoint answers may be truncated"
                )
        elif isinstance(p, model.NotPred):
            walk(p.operand)
        elif isinstance(p, (model.AndPred, model.OrPred, model.ImpliesPred)):
            walk(p.left)
            walk(p.right)

    for p in preds:
        walk(p)
    return warnings


# ---------------------------------------------------------------------------
# Fixpoint


def _split_routes(
    enc: Encoding, routes: Iterable[Route], bound: int
) -> tuple[SymbolicRouteSet, int]:
    short = [r for r in routes if len(r.as_path) <= bound]
    long = [r for r in routes if len(r.as_path) > bound]
    over = enc.mgr.from_vectors([enc.project(r) for r in long]) if long else FALSE
    return SymbolicRouteSet.from_routes(enc, short), over


def compute_fixpoint(
    net: Network,
    aspath_bound: Optional[int] = None,
    seeds: Optional[SeedAlphabet] = None,
    enc: Optional[Encoding] = None,
) -> FixpointSolution:
    """Kleene iteration of the location transfer equations to stabilization.

    External in-edges carry every route, ghosts included (mirroring the
    checker's unconstrained external-edge hypothesis), or exactly the seed
    routes when ``seeds`` is given; node sets are the union of import images
    over in-edges; internal out-edges carry originations plus the export
    image of the node set.
    """
    if enc is None:
        enc = Encoding(config.compute_universe(net))
    bound = aspath_bound if aspath_bound is not None else default_aspath_bound(net)
    topo = net.topology
    mgr = enc.mgr

    empty = SymbolicRouteSet.empty(enc)
    node_sets: dict[str, SymbolicRouteSet] = {r: empty for r in topo.routers}
    node_over: dict[str, int] = {r: FALSE for r in topo.routers}
    edge_sets: dict[Edge, SymbolicRouteSet] = {}
    edge_over: dict[Edge, int] = {}

    origin_seed: dict[Edge, tuple[SymbolicRouteSet, int]] = {}
    for e in sorted(topo.edges):
        if e.src in topo.externals:
            if seeds is None:
                edge_sets[e] = SymbolicRouteSet.full(enc).truncate_paths(bound)
                edge_over[e] = enc.valid
            else:
                exact, over = _split_routes(enc, seeds.routes, bound)
                edge_sets[e] = exact
                edge_over[e] = over
        else:
            exact, over = _split_routes(enc, net.policy.originate[e], bound)
            origin_seed[e] = (exact, over)
            edge_sets[e] = exact
            edge_over[e] = over

    int_src_edges = [e for e in sorted(topo.edges) if e.src in topo.routers]
    iterations = 0
    changed = True
    while changed:
        iterations += 1
        if iterations > 10000:
            raise RuntimeError("fixpoint failed to stabilize (internal)")
        changed = False
        for r in sorted(topo.routers):
            acc = empty
            acc_over = FALSE
            for e in topo.in_edges(r):
                m = net.policy.import_maps[e]
                image = transfer_route_map(m, e, model.IMPORT, net.ghosts, edge_sets[e]).result
                acc = acc.union(image.truncate_paths(bound))
                spill = image.long_paths(bound).attr_projection()
                over_in = transfer_attrs_overflow(
                    m, e, model.IMPORT, net.ghosts, edge_over[e], enc
                )
                acc_over = mgr.or_all((acc_over, spill, over_in))
            if acc != node_sets[r] or acc_over != node_over[r]:
                changed = True
                node_sets[r] = acc
                node_over[r] = acc_over
        for e in int_src_edges:
            m = net.policy.export_maps[e]
            image = transfer_route_map(m, e, model.EXPORT, net.ghosts, node_sets[e.src]).result
            exact0, over0 = origin_seed[e]
            acc = exact0.union(image.truncate_paths(bound))
            acc_over = mgr.or_all(
                (
                    over0,
                    image.long_paths(bound).attr_projection(),
                    transfer_attrs_overflow(
                        m, e, model.EXPORT, net.ghosts, node_over[e.src], enc
                    ),
                )
            )
            if acc != edge_sets[e] or acc_over != edge_over[e]:
                changed = True
                edge_sets[e] = acc
                edge_over[e] = acc_over

    logger.info("fixpoint stabilized after %d iterations", iterations)
    return FixpointSolution(
        net=net,
        enc=enc,
        aspath_bound=bound,
        node_sets=node_sets,
        edge_sets=edge_sets,
        node_overflow=node_over,
        edge_overflow=edge_over,
        iterations=iterations,
    )


@dataclass(frozen=True)
class FixpointVerdict:
    holds: bool
    witness: Optional[Witness] = None


def check_property_fixpoint(fp: FixpointSolution, prop: NetworkProperty) -> FixpointVerdict:
    reachable = fp.set_at(prop.location)
    goal = encode_predicate(prop.pred, fp.enc)
    violating = reachable.difference(goal)
    if violating.is_empty():
        return FixpointVerdict(holds=True)
    return FixpointVerdict(holds=False, witness=violating.witness())


def strongest_invariants(fp: FixpointSolution) -> InvariantMap:
    """Per-location invariant suggestion; inductive by construction.

    External-source edges stay unconstrained (true); other locations get the
    fixpoint set, rendered as a constant where the set is trivial and as an
    opaque set predicate otherwise.
    """
    entries: dict[Location, model.PredicateExpr] = {}
    topo = fp.net.topology

    def render(loc: Location) -> model.PredicateExpr:
        s = fp.cover_set(loc)
        if s.is_empty():
            return model.FALSE
        if s.is_full():
            return model.TRUE
        return SetPredicate(s)

    for r in sorted(topo.routers):
        entries[r] = render(r)
    for e in sorted(topo.edges):
        entries[e] = model.TRUE if e.src in topo.externals else render(e)
    return InvariantMap(entries)


# ---------------------------------------------------------------------------
# Failures


def apply_failures(
    net: Network,
    removed_nodes: Iterable[str] = (),
    removed_edges: Iterable[Edge] = (),
) -> Network:
    """Sub-network after node/link failures.

    Removed nodes take their incident edges along; externals left without any
    edge are dropped as well.
    """
    topo = net.topology
    nodes = set(removed_nodes)
    edges = set(removed_edges)
    unknown = nodes - topo.nodes
    if unknown:
        raise SpecificationError(f"cannot fail unknown node(s) {sorted(unknown)}")
    unknown_e = edges - topo.edges
    if unknown_e:
        raise SpecificationError(f"cannot fail unknown edge(s) {sorted(map(str, unknown_e))}")

    surviving = {
        e for e in topo.edges if e not in edges and e.src not in nodes and e.dst not in nodes
    }
    routers = topo.routers - nodes
    externals = topo.externals - nodes
    externals = frozenset(
        x for x in externals if any(x in (e.src, e.dst) for e in surviving)
    )
    keep_nodes = routers | externals
    surviving = frozenset(
        e for e in surviving if e.src in keep_nodes and e.dst in keep_nodes
    )

    policy = model.Policy(
        import_maps={e: m for e, m in net.policy.import_maps.items() if e in surviving},
        export_maps={e: m for e, m in net.policy.export_maps.items() if e in surviving},
        originate={e: r for e, r in net.policy.originate.items() if e in surviving},
    )
    ghosts = GhostSpec(
        declarations=net.ghosts.declarations,
        import_effects={
            (e, g): eff for (e, g), eff in net.ghosts.import_effects.items() if e in surviving
        },
        export_effects={
            (e, g): eff for (e, g), eff in net.ghosts.export_effects.items() if e in surviving
        },
        origin_defaults=dict(net.ghosts.origin_defaults),
    )
    sub = Network(
        topology=model.Topology(frozenset(routers), externals, surviving),
        policy=policy,
        ghosts=ghosts,
        node_asns={n: a for n, a in net.node_asns.items() if n in keep_nodes},
    )
    violations = model.validate_network(sub)
    if violations:
        raise RuntimeError(f"internal: failure application produced an invalid network: {violations}")
    return sub


# ---------------------------------------------------------------------------
# Trace semantics


def _guard(net: Network, seeds: SeedAlphabet, max_events: int, force: bool):
    n = len(net.topology.nodes)
    if force:
        return
    if n > MAX_NODES_GUARD or len(seeds.routes) > MAX_SEEDS_GUARD or max_events > MAX_EVENTS_GUARD:
        raise InstanceTooLargeError(
            f"instance too large for trace enumeration "
            f"(nodes={n}<= {MAX_NODES_GUARD}, seeds={len(seeds.routes)}<= {MAX_SEEDS_GUARD}, "
            f"events={max_events}<= {MAX_EVENTS_GUARD}); pass force=True to override"
        )


def _successor_events(net: Network, ev: TraceEvent) -> list[TraceEvent]:
    """Events whose validity axiom is discharged by ``ev`` alone."""
    topo = net.topology
    out = []
    if ev.kind == FRWD and ev.neighbor in topo.routers:
        out.append(TraceEvent(RECV, ev.neighbor, ev.router, ev.route))
    elif ev.kind == RECV:
        e = Edge(ev.neighbor, ev.router)
        imported = model.import_transfer_concrete(net, e, ev.route)
        if imported is not None:
            out.append(TraceEvent(SLCT, ev.router, None, imported))
    elif ev.kind == SLCT:
        for e in topo.out_edges(ev.router):
            exported = model.export_transfer_concrete(net, e, ev.route)
            if exported is not None:
                out.append(TraceEvent(FRWD, ev.router, e.dst, exported))
    return out


def _base_events(net: Network, seeds: SeedAlphabet) -> list[TraceEvent]:
    """Events valid with no earlier event: external receives and originations."""
    topo = net.topology
    out = []
    for e in sorted(topo.edges):
        if e.src in topo.externals and e.dst in topo.routers:
            for r in seeds.routes:
                out.append(TraceEvent(RECV, e.dst, e.src, r))
        elif e.src in topo.routers:
            for r in sorted(net.policy.originate[e], key=Route.sort_key):
                out.append(TraceEvent(FRWD, e.src, e.dst, r))
    return out


def enumerate_valid_traces(
    net: Network,
    seeds: SeedAlphabet,
    max_events: int,
    force: bool = False,
) -> Iterator[tuple[TraceEvent, ...]]:
    """All valid event sequences of length <= max_events, shortest first.

    The stream is lazy but the sequence count grows combinatorially with the
    bound; use :func:`reachable_events` for per-event questions at larger
    bounds.
    """
    _guard(net, seeds, max_events, force)
    base = _base_events(net, seeds)

    def candidates(events: tuple[TraceEvent, ...]) -> list[TraceEvent]:
        cand = set(base)
        for ev in events:
            cand.update(_successor_events(net, ev))
        return sorted(cand, key=TraceEvent.sort_key)

    layer: list[tuple[TraceEvent, ...]] = [()]
    yield ()
    for _ in range(max_events):
        nxt = []
        for seq in layer:
            for ev in candidates(seq):
                ext = seq + (ev,)
                nxt.append(ext)
                yield ext
        layer = nxt


def reachable_events(
    net: Network,
    seeds: SeedAlphabet,
    max_events: int,
    force: bool = False,
) -> dict[TraceEvent, int]:
    """Map each event to the length of the shortest valid trace containing it.

    An event occurs in some valid trace of length <= L iff its single-premise
    derivation chain has length <= L, so this is a breadth-first closure; the
    result covers exactly the events appearing in any trace the enumerator
    could yield at the same bound.
    """
    _guard(net, seeds, max_events, force)
    depth: dict[TraceEvent, int] = {}
    frontier = []
    for ev in _base_events(net, seeds):
        if ev not in depth:
            depth[ev] = 1
            frontier.append(ev)
    d = 1
    while frontier and d < max_events:
        d += 1
        nxt = []
        for ev in frontier:
            for succ in _successor_events(net, ev):
                if succ not in depth:
                    depth[succ] = d
                    nxt.append(succ)
        frontier = nxt
    return depth


def event_location(ev: TraceEvent) -> Location:
    if ev.kind == SLCT:
        return ev.router
    if ev.kind == FRWD:
        return Edge(ev.router, ev.neighbor)
    return Edge(ev.neighbor, ev.router)


def property_event_violations(
    net: Network,
    prop: NetworkProperty,
    events: Iterable[TraceEvent],
) -> list[TraceEvent]:
    """Events at the property location whose route falls outside the property."""
    bad = []
    for ev in events:
        if event_location(ev) == prop.location and not model.eval_predicate(prop.pred, ev.route):
            bad.append(ev)
    return sorted(bad, key=TraceEvent.sort_key)
