"""Input documents: the network description and the verification spec.

One self-contained JSON document describes a network (nodes, edges, route
maps, originations, ghost effects); a second one describes what to verify
(property, invariants with a ``default`` entry).  Predicates inside the spec
document are strings in the DSL of :mod:`bgpverify.dsl`.

Missing policies default to a single permit-all term; an explicitly empty
term list is an implicit deny-all.  Missing origination sets default to
empty.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Optional

from . import model
from .dsl import parse_predicate
from .errors import ConfigError
from .model import (
    Community,
    Edge,
    GhostSpec,
    InvariantMap,
    Location,
    Network,
    NetworkProperty,
    Policy,
    PredicateExpr,
    Prefix,
    Route,
    RouteMap,
    Term,
    Topology,
)


@dataclass(frozen=True)
class Universe:
    """Deduplicated, sorted literal pools that parameterize the symbolic encoding."""

    communities: tuple[Community, ...] = ()
    asns: tuple[int, ...] = ()
    ghost_names: tuple[str, ...] = ()


@dataclass(frozen=True)
class NetworkDiff:
    changed_nodes: frozenset[str] = frozenset()
    changed_edges: frozenset[Edge] = frozenset()
    invariant_changed_locations: frozenset[Location] = frozenset()
    property_changed: bool = False

    @property
    def empty(self) -> bool:
        return (
            not self.changed_nodes
            and not self.changed_edges
            and not self.invariant_changed_locations
            and not self.property_changed
        )


# ---------------------------------------------------------------------------
# JSON <-> model conversion helpers


def _require(doc: Mapping, key: str, where: str) -> Any:
    if key not in doc:
        raise ConfigError(f"missing key {key!r}", where)
    return doc[key]


def _community(text: str, where: str) -> Community:
    try:
        return Community.parse(text)
    except ValueError as exc:
        raise ConfigError(str(exc), where)


def _prefix(text: str, where: str) -> Prefix:
    try:
        return Prefix.parse(text)
    except ValueError as exc:
        raise ConfigError(str(exc), where)


def _ip(value: Any, where: str) -> int:
    if isinstance(value, int):
        return value
    try:
        return model.parse_ipv4(value)
    except ValueError as exc:
        raise ConfigError(str(exc), where)


def edge_from_doc(doc: Any, where: str) -> Edge:
    if isinstance(doc, str) and "->" in doc:
        src, _, dst = doc.partition("->")
        return Edge(src.strip(), dst.strip())
    if isinstance(doc, Mapping) and "src" in doc and "dst" in doc:
        return Edge(doc["src"], doc["dst"])
    raise ConfigError(f"bad edge {doc!r}", where)


def edge_to_doc(e: Edge) -> dict:
    return {"src": e.src, "dst": e.dst}


def clause_from_doc(doc: Mapping, where: str) -> model.MatchClause:
    kind = _require(doc, "type", where)
    if kind == "prefix":
        entries = []
        for i, p in enumerate(_require(doc, "prefixes", where)):
            w = f"{where}.prefixes[{i}]"
            try:
                entries.append(
                    model.PrefixListEntry(_prefix(p["prefix"], w), p.get("ge"), p.get("le"))
                )
            except ValueError as exc:
                raise ConfigError(str(exc), w)
        return model.MatchPrefix(tuple(entries))
    if kind == "community":
        if "present" in doc:
            return model.MatchCommunity(_community(doc["present"], where), present=True)
        if "absent" in doc:
            return model.MatchCommunity(_community(doc["absent"], where), present=False)
        raise ConfigError("community clause needs 'present' or 'absent'", where)
    if kind in ("localpref", "med"):
        op = _require(doc, "op", where)
        if op not in model.CMP_OPS:
            raise ConfigError(f"bad comparison operator {op!r}", where)
        value = _require(doc, "value", where)
        cls = model.MatchLocalPref if kind == "localpref" else model.MatchMed
        return cls(op, value)
    if kind == "aspath":
        regex = _require(doc, "regex", where)
        from .dfa import RegexError, parse_regex

        try:
            parse_regex(regex)
        except RegexError as exc:
            raise ConfigError(f"bad AS-path regex: {exc}", where)
        return model.MatchAsPath(regex)
    raise ConfigError(f"unknown match clause type {kind!r}", where)


def clause_to_doc(c: model.MatchClause) -> dict:
    if isinstance(c, model.MatchPrefix):
        out = []
        for e in c.entries:
            d: dict[str, Any] = {"prefix": str(e.prefix)}
            if e.ge is not None:
                d["ge"] = e.ge
            if e.le is not None:
                d["le"] = e.le
            out.append(d)
        return {"type": "prefix", "prefixes": out}
    if isinstance(c, model.MatchCommunity):
        key = "present" if c.present else "absent"
        return {"type": "community", key: str(c.community)}
    if isinstance(c, model.MatchLocalPref):
        return {"type": "localpref", "op": c.op, "value": c.value}
    if isinstance(c, model.MatchMed):
        return {"type": "med", "op": c.op, "value": c.value}
    if isinstance(c, model.MatchAsPath):
        return {"type": "aspath", "regex": c.regex}
    raise TypeError(c)


def action_from_doc(doc: Mapping, where: str) -> model.SetAction:
    kind = _require(doc, "type", where)
    if kind == "add_community":
        return model.AddCommunity(_community(_require(doc, "community", where), where))
    if kind == "delete_community":
        return model.DeleteCommunity(_community(_require(doc, "community", where), where))
    if kind == "delete_all_communities":
        return model.DeleteAllCommunities()
    if kind == "set_local_pref":
        return model.SetLocalPref(_require(doc, "value", where))
    if kind == "set_med":
        return model.SetMed(_require(doc, "value", where))
    if kind == "set_next_hop":
        return model.SetNextHop(_ip(_require(doc, "value", where), where))
    if kind == "prepend_asn":
        return model.PrependAsn(_require(doc, "asn", where))
    raise ConfigError(f"unknown set action type {kind!r}", where)


def action_to_doc(a: model.SetAction) -> dict:
    if isinstance(a, model.AddCommunity):
        return {"type": "add_community", "community": str(a.community)}
    if isinstance(a, model.DeleteCommunity):
        return {"type": "delete_community", "community": str(a.community)}
    if isinstance(a, model.DeleteAllCommunities):
        return {"type": "delete_all_communities"}
    if isinstance(a, model.SetLocalPref):
        return {"type": "set_local_pref", "value": a.value}
    if isinstance(a, model.SetMed):
        return {"type": "set_med", "value": a.value}
    if isinstance(a, model.SetNextHop):
        return {"type": "set_next_hop", "value": model.format_ipv4(a.value)}
    if isinstance(a, model.PrependAsn):
        return {"type": "prepend_asn", "asn": a.asn}
    raise TypeError(a)


def term_from_doc(doc: Mapping, where: str) -> Term:
    action = doc.get("action", model.PERMIT)
    if action not in (model.PERMIT, model.DENY):
        raise ConfigError(f"bad term action {action!r}", where)
    matches = tuple(
        clause_from_doc(c, f"{where}.match[{i}]") for i, c in enumerate(doc.get("match", []))
    )
    sets = tuple(
        action_from_doc(a, f"{where}.set[{i}]") for i, a in enumerate(doc.get("set", []))
    )
    try:
        return Term(matches=matches, action=action, sets=sets)
    except ValueError as exc:
        raise ConfigError(str(exc), where)


def term_to_doc(t: Term) -> dict:
    doc: dict[str, Any] = {"action": t.action}
    if t.matches:
        doc["match"] = [clause_to_doc(c) for c in t.matches]
    if t.sets:
        doc["set"] = [action_to_doc(a) for a in t.sets]
    return doc


def route_map_to_doc(m: RouteMap) -> list:
    return [term_to_doc(t) for t in m.terms]


def route_from_doc(doc: Mapping, ghosts: GhostSpec, where: str) -> Route:
    declared = ghosts.default_ghosts()
    given = doc.get("ghosts", {})
    unknown = set(given) - set(declared)
    if unknown:
        raise ConfigError(f"route sets undeclared ghosts {sorted(unknown)}", where)
    declared.update(given)
    try:
        return Route(
            prefix=_prefix(_require(doc, "prefix", where), where),
            as_path=tuple(doc.get("as_path", [])),
            next_hop=_ip(doc.get("next_hop", 0), where),
            local_pref=doc.get("local_pref", 0),
            med=doc.get("med", 0),
            communities=frozenset(
                _community(c, where) for c in doc.get("communities", [])
            ),
            ghosts=declared,
        )
    except ValueError as exc:
        raise ConfigError(str(exc), where)


def route_to_doc(r: Route) -> dict:
    return {
        "prefix": str(r.prefix),
        "as_path": list(r.as_path),
        "next_hop": model.format_ipv4(r.next_hop),
        "local_pref": r.local_pref,
        "med": r.med,
        "communities": [str(c) for c in sorted(r.communities)],
        "ghosts": dict(r.ghosts),
    }


# ---------------------------------------------------------------------------
# Network document


def network_from_doc(doc: Mapping) -> Network:
    if not isinstance(doc, Mapping):
        raise ConfigError("network document must be a JSON object")
    node_asns: dict[str, int] = {}
    routers = []
    for i, r in enumerate(doc.get("routers", [])):
        where = f"routers[{i}]"
        name = _require(r, "name", where)
        if name in node_asns:
            raise ConfigError(f"duplicate node {name!r}", where)
        node_asns[name] = _require(r, "asn", where)
        routers.append(name)
    externals = []
    for i, r in enumerate(doc.get("externals", [])):
        where = f"externals[{i}]"
        name = _require(r, "name", where)
        if name in node_asns:
            raise ConfigError(f"duplicate node {name!r}", where)
        node_asns[name] = _require(r, "asn", where)
        externals.append(name)

    edges: list[Edge] = []
    seen = set()
    for i, e in enumerate(doc.get("edges", [])):
        where = f"edges[{i}]"
        edge = edge_from_doc(e, where)
        if edge in seen:
            raise ConfigError(f"duplicate edge {edge}", where)
        seen.add(edge)
        for end in edge:
            if end not in node_asns:
                raise ConfigError(f"edge {edge} references undeclared node {end!r}", where)
        edges.append(edge)
    topo = Topology(frozenset(routers), frozenset(externals), frozenset(edges))

    ghosts_doc = doc.get("ghosts", {})
    declarations = tuple(ghosts_doc.get("declarations", []))
    import_effects: dict[tuple[Edge, str], model.Effect] = {}
    export_effects: dict[tuple[Edge, str], model.Effect] = {}
    for i, eff in enumerate(ghosts_doc.get("effects", [])):
        where = f"ghosts.effects[{i}]"
        edge = edge_from_doc(_require(eff, "edge", where), where)
        direction = _require(eff, "direction", where)
        if direction not in (model.IMPORT, model.EXPORT):
            raise ConfigError(f"bad effect direction {direction!r}", where)
        name = _require(eff, "ghost", where)
        try:
            effect = model.Effect(_require(eff, "effect", where))
        except ValueError:
            raise ConfigError(f"bad effect {eff.get('effect')!r}", where)
        if effect is model.Effect.PRESERVE:
            continue  # preserve is the default; listing it is allowed but a no-op
        table = import_effects if direction == model.IMPORT else export_effects
        table[(edge, name)] = effect
    origin_defaults = {
        name: bool(v) for name, v in ghosts_doc.get("origin_defaults", {}).items()
    }
    ghost_spec = GhostSpec(declarations, import_effects, export_effects, origin_defaults)

    import_maps: dict[Edge, RouteMap] = {}
    export_maps: dict[Edge, RouteMap] = {}
    for i, pol in enumerate(doc.get("policies", [])):
        where = f"policies[{i}]"
        edge = edge_from_doc(_require(pol, "edge", where), where)
        direction = _require(pol, "direction", where)
        terms = tuple(
            term_from_doc(t, f"{where}.terms[{j}]")
            for j, t in enumerate(_require(pol, "terms", where))
        )
        table = {"import": import_maps, "export": export_maps}.get(direction)
        if table is None:
            raise ConfigError(f"bad policy direction {direction!r}", where)
        if edge in table:
            raise ConfigError(f"duplicate {direction} policy for edge {edge}", where)
        table[edge] = RouteMap(terms)

    originate: dict[Edge, frozenset[Route]] = {}
    for i, orig in enumerate(doc.get("originations", [])):
        where = f"originations[{i}]"
        edge = edge_from_doc(_require(orig, "edge", where), where)
        routes = frozenset(
            route_from_doc(r, ghost_spec, f"{where}.routes[{j}]")
            for j, r in enumerate(_require(orig, "routes", where))
        )
        if edge in originate:
            raise ConfigError(f"duplicate origination entry for edge {edge}", where)
        originate[edge] = routes

    # Defaults: permit-all maps, empty origination.
    for e in topo.internal_dst_edges():
        import_maps.setdefault(e, model.PERMIT_ALL)
    for e in topo.internal_src_edges():
        export_maps.setdefault(e, model.PERMIT_ALL)
        originate.setdefault(e, frozenset())

    net = Network(
        topology=topo,
        policy=Policy(import_maps, export_maps, originate),
        ghosts=ghost_spec,
        node_asns=node_asns,
    )
    violations = model.validate_network(net)
    if violations:
        raise ConfigError("invalid network: " + "; ".join(violations))
    return net


def parse_network(text: str) -> Network:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"JSON syntax error: {exc.msg}", f"line {exc.lineno}, column {exc.colno}")
    return network_from_doc(doc)


def network_to_doc(net: Network) -> dict:
    topo = net.topology
    policies = []
    for e in topo.internal_dst_edges():
        policies.append(
            {
                "edge": edge_to_doc(e),
                "direction": "import",
                "terms": route_map_to_doc(net.policy.import_maps[e]),
            }
        )
    for e in topo.internal_src_edges():
        policies.append(
            {
                "edge": edge_to_doc(e),
                "direction": "export",
                "terms": route_map_to_doc(net.policy.export_maps[e]),
            }
        )
    originations = [
        {
            "edge": edge_to_doc(e),
            "routes": [route_to_doc(r) for r in sorted(routes, key=Route.sort_key)],
        }
        for e, routes in sorted(net.policy.originate.items())
        if routes
    ]
    effects = []
    for direction, table in (("import", net.ghosts.import_effects), ("export", net.ghosts.export_effects)):
        for (e, name), eff in sorted(table.items()):
            effects.append(
                {
                    "edge": edge_to_doc(e),
                    "direction": direction,
                    "ghost": name,
                    "effect": eff.value,
                }
            )
    return {
        "routers": [
            {"name": n, "asn": net.node_asns[n]} for n in sorted(topo.routers)
        ],
        "externals": [
            {"name": n, "asn": net.node_asns[n]} for n in sorted(topo.externals)
        ],
        "edges": [edge_to_doc(e) for e in sorted(topo.edges)],
        "policies": policies,
        "originations": originations,
        "ghosts": {
            "declarations": list(net.ghosts.declarations),
            "effects": effects,
            "origin_defaults": {
                g: bool(v) for g, v in sorted(net.ghosts.origin_defaults.items())
            },
        },
    }


def print_network(net: Network) -> str:
    return json.dumps(network_to_doc(net), indent=2) + "\n"


# ---------------------------------------------------------------------------
# Spec document


def location_from_doc(doc: Any, net: Network, where: str) -> Location:
    if isinstance(doc, Mapping) or (isinstance(doc, str) and "->" in doc):
        edge = edge_from_doc(doc, where)
        if edge not in net.topology.edges:
            raise ConfigError(f"location {edge} is not an edge of the topology", where)
        return edge
    if isinstance(doc, str):
        if doc not in net.topology.nodes:
            raise ConfigError(f"location {doc!r} is not a node of the topology", where)
        return doc
    raise ConfigError(f"bad location {doc!r}", where)


def location_to_doc(loc: Location) -> str:
    return str(loc)


def parse_spec(text: str, net: Network) -> tuple[NetworkProperty, InvariantMap, GhostSpec]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"JSON syntax error: {exc.msg}", f"line {exc.lineno}, column {exc.colno}")
    return spec_from_doc(doc, net)


def spec_from_doc(doc: Mapping, net: Network) -> tuple[NetworkProperty, InvariantMap, GhostSpec]:
    if not isinstance(doc, Mapping):
        raise ConfigError("spec document must be a JSON object")
    ghost_names = net.ghosts.declarations

    prop_doc = _require(doc, "property", "property")
    loc = location_from_doc(_require(prop_doc, "location", "property"), net, "property.location")
    if isinstance(loc, str) and loc not in net.topology.routers:
        raise ConfigError(f"property location {loc!r} must be an internal router", "property.location")
    pred = parse_predicate(_require(prop_doc, "pred", "property"), ghost_names, "property.pred")
    prop = NetworkProperty(loc, pred)

    inv_doc = doc.get("invariants", {})
    default_pred = parse_predicate(
        inv_doc.get("default", "true"), ghost_names, "invariants.default"
    )
    explicit: dict[Location, PredicateExpr] = {}
    for i, entry in enumerate(inv_doc.get("entries", [])):
        where = f"invariants.entries[{i}]"
        eloc = location_from_doc(_require(entry, "location", where), net, where)
        if isinstance(eloc, str) and eloc not in net.topology.routers:
            raise ConfigError(f"invariant location {eloc!r} must be an internal router", where)
        if eloc in explicit:
            raise ConfigError(f"duplicate invariant entry for {model.format_location(eloc)}", where)
        explicit[eloc] = parse_predicate(_require(entry, "pred", where), ghost_names, where)

    entries: dict[Location, PredicateExpr] = {}
    for node in sorted(net.topology.routers):
        entries[node] = explicit.get(node, default_pred)
    for edge in sorted(net.topology.edges):
        if edge.src in net.topology.externals:
            given = explicit.get(edge)
            if given is not None and given != model.TRUE:
                raise ConfigError(
                    f"invariant on external-source edge {edge} must be true",
                    f"invariants (edge {edge})",
                )
            entries[edge] = model.TRUE
        else:
            entries[edge] = explicit.get(edge, default_pred)
    return prop, InvariantMap(entries), net.ghosts


# ---------------------------------------------------------------------------
# Universe


def _pred_literals(p: PredicateExpr, comms: set[Community], asns: set[int]):
    from .dfa import regex_literals

    if isinstance(p, model.CommunityPred):
        comms.add(p.community)
    elif isinstance(p, model.AsPathPred):
        asns.update(regex_literals(p.regex))
    elif isinstance(p, model.NotPred):
        _pred_literals(p.operand, comms, asns)
    elif isinstance(p, (model.AndPred, model.OrPred, model.ImpliesPred)):
        _pred_literals(p.left, comms, asns)
        _pred_literals(p.right, comms, asns)


def compute_universe(
    net: Network,
    prop: Optional[NetworkProperty] = None,
    invariants: Optional[InvariantMap] = None,
    extra_preds: Iterable[PredicateExpr] = (),
) -> Universe:
    from .dfa import regex_literals

    comms: set[Community] = set()
    asns: set[int] = set(net.node_asns.values())

    def scan_map(m: RouteMap):
        for t in m.terms:
            for c in t.matches:
                if isinstance(c, model.MatchCommunity):
                    comms.add(c.community)
                elif isinstance(c, model.MatchAsPath):
                    asns.update(regex_literals(c.regex))
            for a in t.sets:
                if isinstance(a, (model.AddCommunity, model.DeleteCommunity)):
                    comms.add(a.community)
                elif isinstance(a, model.PrependAsn):
                    asns.add(a.asn)

    for m in net.policy.import_maps.values():
        scan_map(m)
    for m in net.policy.export_maps.values():
        scan_map(m)
    for routes in net.policy.originate.values():
        for r in routes:
            comms.update(r.communities)
            asns.update(r.as_path)
    preds = list(extra_preds)
    if prop is not None:
        preds.append(prop.pred)
    if invariants is not None:
        preds.extend(invariants.entries.values())
    for p in preds:
        _pred_literals(p, comms, asns)

    return Universe(
        communities=tuple(sorted(comms)),
        asns=tuple(sorted(asns)),
        ghost_names=tuple(sorted(net.ghosts.declarations)),
    )


# ---------------------------------------------------------------------------
# Diffing


def _edge_fingerprint(net: Network, e: Edge):
    imp = net.policy.import_maps.get(e)
    exp = net.policy.export_maps.get(e)
    orig = net.policy.originate.get(e, frozenset())
    effects = []
    for name in net.ghosts.declarations:
        effects.append(
            (name, net.ghosts.effect(e, model.IMPORT, name), net.ghosts.effect(e, model.EXPORT, name))
        )
    return (imp, exp, frozenset(orig), tuple(effects))


def diff_networks(old: Network, new: Network) -> NetworkDiff:
    changed_edges: set[Edge] = set()
    all_edges = old.topology.edges | new.topology.edges
    for e in all_edges:
        if e not in old.topology.edges or e not in new.topology.edges:
            changed_edges.add(e)
        elif _edge_fingerprint(old, e) != _edge_fingerprint(new, e):
            changed_edges.add(e)
    changed_nodes: set[str] = set()
    for e in changed_edges:
        changed_nodes.update(e)
    changed_nodes |= old.topology.nodes ^ new.topology.nodes
    return NetworkDiff(frozenset(changed_nodes), frozenset(changed_edges))


def diff_specs(
    old_prop: NetworkProperty,
    old_inv: InvariantMap,
    new_prop: NetworkProperty,
    new_inv: InvariantMap,
) -> tuple[frozenset[Location], bool]:
    changed: set[Location] = set()
    for loc in set(old_inv.entries) | set(new_inv.entries):
        if old_inv.entries.get(loc) != new_inv.entries.get(loc):
            changed.add(loc)
    return frozenset(changed), old_prop != new_prop
