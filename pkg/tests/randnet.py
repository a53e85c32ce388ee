"""Random instances shared by the property and acceptance suites.

Everything takes an explicit random.Random so failures reproduce from the
printed seed.
"""

from __future__ import annotations

import itertools
import random

from bgpverify import model
from bgpverify.config import Universe
from bgpverify.model import (
    AddCommunity,
    Community,
    DeleteAllCommunities,
    DeleteCommunity,
    Edge,
    Effect,
    GhostSpec,
    MatchAsPath,
    MatchCommunity,
    MatchLocalPref,
    MatchMed,
    MatchPrefix,
    Network,
    Policy,
    Prefix,
    PrefixListEntry,
    PrependAsn,
    Route,
    RouteMap,
    SetLocalPref,
    SetMed,
    SetNextHop,
    Term,
    Topology,
)

COMM_POOL = (Community(100, 1), Community(100, 2), Community(100, 3))
ASN_POOL = (65001, 65002)
UNTRACKED_ASN = 999
UNTRACKED_COMM = Community(5, 5)
PREFIX_POOL = tuple(
    Prefix.parse(p) for p in ("0.0.0.0/0", "10.0.0.0/8", "10.0.0.0/16", "11.0.0.0/8")
)
REGEX_POOL = ("^65001 .*$", "^.* 65002$", "^$", "^. .$", "^(65001|65002)+$")


def random_prefix_entry(rng: random.Random) -> PrefixListEntry:
    p = rng.choice(PREFIX_POOL)
    if rng.random() < 0.5:
        return PrefixListEntry(p)
    ge = rng.randint(p.length, 32)
    le = rng.randint(ge, 32)
    return PrefixListEntry(p, ge, le)


def random_term(
    rng: random.Random,
    comms=COMM_POOL,
    asns=ASN_POOL,
    allow_aspath=True,
    small_values=False,
) -> Term:
    matches = []
    for _ in range(rng.randrange(3)):
        kind = rng.randrange(5 if allow_aspath else 4)
        if kind == 0:
            matches.append(MatchPrefix((random_prefix_entry(rng),)))
        elif kind == 1:
            matches.append(MatchCommunity(rng.choice(comms), present=rng.random() < 0.7))
        elif kind == 2:
            value = rng.randint(0, 1) if small_values else rng.choice((0, 1, 100, 200))
            matches.append(MatchLocalPref(rng.choice(list(model.CMP_OPS)), value))
        elif kind == 3:
            value = rng.randint(0, 1) if small_values else rng.choice((0, 1, 50))
            matches.append(MatchMed(rng.choice(list(model.CMP_OPS)), value))
        else:
            matches.append(MatchAsPath(rng.choice(REGEX_POOL)))
    if rng.random() < 0.3:
        return Term(matches=tuple(matches), action=model.DENY)
    sets = []
    for _ in range(rng.randrange(3)):
        kind = rng.randrange(7)
        if kind == 0:
            sets.append(AddCommunity(rng.choice(comms)))
        elif kind == 1:
            sets.append(DeleteCommunity(rng.choice(comms)))
        elif kind == 2:
            sets.append(DeleteAllCommunities())
        elif kind == 3:
            sets.append(SetLocalPref(rng.randint(0, 1) if small_values else rng.choice((0, 50, 200))))
        elif kind == 4:
            sets.append(SetMed(rng.randint(0, 1) if small_values else rng.choice((0, 7))))
        elif kind == 5:
            sets.append(SetNextHop(rng.randint(0, 1)))
        else:
            sets.append(PrependAsn(rng.choice(asns)))
    return Term(matches=tuple(matches), action=model.PERMIT, sets=tuple(sets))


def random_route_map(rng: random.Random, **kw) -> RouteMap:
    return RouteMap(tuple(random_term(rng, **kw) for _ in range(rng.randrange(4))))


def random_route(rng: random.Random, ghost_names=(), comms=COMM_POOL, asns=ASN_POOL) -> Route:
    n_comms = rng.randrange(3)
    return Route(
        prefix=rng.choice(PREFIX_POOL),
        as_path=tuple(rng.choice(asns) for _ in range(rng.randrange(3))),
        next_hop=rng.randint(0, 1),
        local_pref=rng.choice((0, 1, 100)),
        med=rng.choice((0, 1)),
        communities=frozenset(rng.sample(list(comms), n_comms)),
        ghosts={g: rng.random() < 0.5 for g in ghost_names},
    )


def random_network(
    rng: random.Random,
    max_internal: int = 3,
    max_external: int = 2,
    n_comms: int = 3,
    n_ghosts: int = 1,
    allow_aspath: bool = False,
) -> Network:
    n_int = rng.randint(1, max_internal)
    n_ext = rng.randint(1, max_external)
    routers = [f"I{i}" for i in range(1, n_int + 1)]
    externals = [f"X{i}" for i in range(1, n_ext + 1)]
    node_asns = {r: 65000 for r in routers}
    for i, x in enumerate(externals):
        node_asns[x] = ASN_POOL[i % len(ASN_POOL)]

    edges: set[Edge] = set()
    for x in externals:
        r = rng.choice(routers)
        edges.add(Edge(x, r))
        if rng.random() < 0.8:
            edges.add(Edge(r, x))
    for a, b in itertools.permutations(routers, 2):
        if rng.random() < 0.5:
            edges.add(Edge(a, b))

    topo = Topology(frozenset(routers), frozenset(externals), frozenset(edges))
    comms = COMM_POOL[:n_comms]
    ghost_names = tuple(f"G{i}" for i in range(1, rng.randint(0, n_ghosts) + 1))

    import_effects = {}
    export_effects = {}
    for e in topo.internal_dst_edges():
        for g in ghost_names:
            roll = rng.random()
            if roll < 0.3:
                import_effects[(e, g)] = Effect.SET_TRUE
            elif roll < 0.5:
                import_effects[(e, g)] = Effect.SET_FALSE
    for e in topo.internal_src_edges():
        for g in ghost_names:
            roll = rng.random()
            if roll < 0.15:
                export_effects[(e, g)] = Effect.SET_FALSE
    ghosts = GhostSpec(
        declarations=ghost_names,
        import_effects=import_effects,
        export_effects=export_effects,
        origin_defaults={g: rng.random() < 0.3 for g in ghost_names},
    )

    defaults = ghosts.default_ghosts()
    import_maps = {
        e: random_route_map(rng, comms=comms, allow_aspath=allow_aspath)
        for e in topo.internal_dst_edges()
    }
    export_maps = {
        e: random_route_map(rng, comms=comms, allow_aspath=allow_aspath)
        for e in topo.internal_src_edges()
    }
    originate = {}
    for e in topo.internal_src_edges():
        routes = []
        if rng.random() < 0.4:
            routes.append(random_route(rng, comms=comms).with_ghosts(defaults))
        originate[e] = frozenset(routes)

    net = Network(
        topology=topo,
        policy=Policy(import_maps, export_maps, originate),
        ghosts=ghosts,
        node_asns=node_asns,
    )
    assert model.validate_network(net) == []
    return net


# ---------------------------------------------------------------------------
# Exhaustive mini-domain for transfer exactness


def mini_universe() -> Universe:
    return Universe(
        communities=(Community(100, 1), Community(100, 2)),
        asns=(65001, 65002),
        ghost_names=("G",),
    )


def mini_routes() -> list[Route]:
    comm_variants = [
        frozenset(),
        frozenset({Community(100, 1)}),
        frozenset({Community(100, 2)}),
        frozenset({Community(100, 1), Community(100, 2)}),
        frozenset({UNTRACKED_COMM}),
        frozenset({UNTRACKED_COMM, Community(100, 1)}),
    ]
    paths = [
        (),
        (65001,),
        (65002,),
        (UNTRACKED_ASN,),
        (65001, 65002),
        (UNTRACKED_ASN, 65001),
    ]
    routes = []
    for prefix in PREFIX_POOL:
        for lp in (0, 1):
            for med in (0, 1):
                for comm in comm_variants:
                    for g in (False, True):
                        for path in paths:
                            routes.append(
                                Route(
                                    prefix=prefix,
                                    as_path=path,
                                    next_hop=0,
                                    local_pref=lp,
                                    med=med,
                                    communities=comm,
                                    ghosts={"G": g},
                                )
                            )
    return routes


def mini_term(rng: random.Random) -> Term:
    return random_term(
        rng,
        comms=(Community(100, 1), Community(100, 2)),
        asns=(65001, 65002),
        allow_aspath=True,
        small_values=True,
    )


def mini_route_map(rng: random.Random) -> RouteMap:
    return RouteMap(tuple(mini_term(rng) for _ in range(rng.randrange(4))))


def mini_ghost_spec(rng: random.Random, e: Edge, direction: str) -> GhostSpec:
    roll = rng.random()
    table = {}
    if roll < 0.3:
        table[(e, "G")] = Effect.SET_TRUE
    elif roll < 0.5:
        table[(e, "G")] = Effect.SET_FALSE
    return GhostSpec(
        declarations=("G",),
        import_effects=table if direction == model.IMPORT else {},
        export_effects=table if direction == model.EXPORT else {},
        origin_defaults={"G": False},
    )
