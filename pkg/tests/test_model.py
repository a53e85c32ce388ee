import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bgpverify import model
from bgpverify.errors import SpecificationError
from bgpverify.model import (
    AddCommunity,
    Community,
    Edge,
    Effect,
    GhostSpec,
    MatchCommunity,
    Prefix,
    PrefixListEntry,
    Route,
    RouteMap,
    Term,
    apply_ghost_effects,
    apply_route_map,
    eval_predicate,
)

from conftest import load_pair
from randnet import random_route, random_route_map, random_term


def test_prefix_parse_and_canonical_form():
    p = Prefix.parse("10.0.0.0/8")
    assert (p.address, p.length) == (10 << 24, 8)
    assert str(p) == "10.0.0.0/8"
    with pytest.raises(ValueError):
        Prefix.parse("10.0.0.1/8")  # host bits set
    with pytest.raises(ValueError):
        Prefix.parse("10.0.0.0/33")


@pytest.mark.parametrize(
    "entry,candidate,expected",
    [
        # no bounds: exact match only
        (("10.0.0.0/8", None, None), "10.0.0.0/8", True),
        (("10.0.0.0/8", None, None), "10.1.0.0/16", False),
        # le: anything covered up to /24
        (("10.0.0.0/8", None, 24), "10.1.0.0/16", True),
        (("10.0.0.0/8", None, 24), "10.1.1.0/28", False),
        (("10.0.0.0/8", None, 24), "11.0.0.0/16", False),
        # ge: length at least 16, any longer
        (("10.0.0.0/8", 16, None), "10.0.0.0/8", False),
        (("10.0.0.0/8", 16, None), "10.0.255.255/32", True),
        # both
        (("10.0.0.0/8", 12, 16), "10.16.0.0/12", True),
        (("10.0.0.0/8", 12, 16), "10.0.0.0/20", False),
    ],
)
def test_prefix_list_entry_semantics(entry, candidate, expected):
    pfx, ge, le = entry
    e = PrefixListEntry(Prefix.parse(pfx), ge, le)
    assert e.matches(Prefix.parse(candidate)) is expected


def test_community_parse_and_str():
    c = Community.parse("100:1")
    assert str(c) == "100:1"
    with pytest.raises(ValueError):
        Community.parse("100000:1")


def test_route_map_first_match_and_implicit_deny():
    c = Community(100, 1)
    m = RouteMap(
        terms=(
            Term(matches=(MatchCommunity(c),), action="deny"),
            Term(action="permit", sets=(AddCommunity(c),)),
        )
    )
    tagged = Route(prefix=Prefix.parse("10.0.0.0/8"), communities={c})
    plain = Route(prefix=Prefix.parse("10.0.0.0/8"))
    assert apply_route_map(m, tagged) is None
    assert apply_route_map(m, plain).communities == frozenset({c})
    assert apply_route_map(RouteMap(), plain) is None  # empty map rejects


def test_tagging_map_adds_community():
    m = RouteMap(terms=(Term(action="permit", sets=(AddCommunity(Community(100, 1)),)),))
    r = Route(prefix=Prefix.parse("10.0.0.0/8"), as_path=(65001,))
    out = apply_route_map(m, r)
    assert out.communities == frozenset({Community(100, 1)})
    assert out.as_path == (65001,)


def test_route_maps_never_touch_ghosts():
    rng = random.Random(11)
    for _ in range(200):
        m = random_route_map(rng)
        r = random_route(rng, ghost_names=("G1", "G2"))
        out = apply_route_map(m, r)
        if out is not None:
            assert out.ghosts == r.ghosts


def test_first_match_prepending_never_matching_term():
    rng = random.Random(12)
    never = Term(
        matches=(MatchCommunity(Community(999, 999), present=True),), action="permit"
    )
    for _ in range(200):
        m = random_route_map(rng)
        m2 = RouteMap(terms=(never,) + m.terms)
        r = random_route(rng)
        assert apply_route_map(m, r) == apply_route_map(m2, r)


def test_ghost_effects():
    e = Edge("ISP1", "R1")
    gs = GhostSpec(
        declarations=("FromISP1",),
        import_effects={(e, "FromISP1"): Effect.SET_TRUE},
        origin_defaults={"FromISP1": False},
    )
    r = Route(prefix=Prefix.parse("10.0.0.0/8"), ghosts={"FromISP1": False})
    out = apply_ghost_effects(gs, e, model.IMPORT, r)
    assert out.ghost("FromISP1") is True
    # preserve elsewhere
    other = Edge("R1", "R2")
    assert apply_ghost_effects(gs, other, model.IMPORT, r) == r
    # set-false direction
    gs2 = GhostSpec(
        declarations=("FromISP1",),
        import_effects={(Edge("ISP2", "R2"), "FromISP1"): Effect.SET_FALSE},
    )
    r_true = r.with_ghosts({"FromISP1": True})
    assert apply_ghost_effects(gs2, Edge("ISP2", "R2"), model.IMPORT, r_true).ghost("FromISP1") is False


def test_ghost_effects_leave_route_attributes_alone():
    rng = random.Random(13)
    e = Edge("A", "B")
    gs = GhostSpec(
        declarations=("G1",),
        import_effects={(e, "G1"): Effect.SET_TRUE},
    )
    for _ in range(100):
        r = random_route(rng, ghost_names=("G1",))
        out = apply_ghost_effects(gs, e, model.IMPORT, r)
        assert (out.prefix, out.as_path, out.next_hop, out.local_pref, out.med, out.communities) == (
            r.prefix,
            r.as_path,
            r.next_hop,
            r.local_pref,
            r.med,
            r.communities,
        )


@st.composite
def pred_and_route(draw):
    from randnet import COMM_POOL, PREFIX_POOL

    comm = draw(st.sampled_from(COMM_POOL))
    atoms = [
        model.CommunityPred(comm),
        model.GhostPred("G1"),
        model.LocalPrefPred("<=", draw(st.integers(0, 200))),
        model.MedPred("==", draw(st.integers(0, 2))),
        model.PrefixPred(PrefixListEntry(draw(st.sampled_from(PREFIX_POOL)))),
    ]

    def tree(depth):
        if depth == 0:
            return draw(st.sampled_from(atoms))
        kind = draw(st.integers(0, 4))
        if kind == 0:
            return draw(st.sampled_from(atoms))
        if kind == 1:
            return model.NotPred(tree(depth - 1))
        cls = (model.AndPred, model.OrPred, model.ImpliesPred)[kind - 2]
        return cls(tree(depth - 1), tree(depth - 1))

    seed = draw(st.integers(0, 2**32 - 1))
    return tree(2), random_route(random.Random(seed), ghost_names=("G1",))


@settings(max_examples=200, deadline=None)
@given(pred_and_route())
def test_eval_predicate_logical_laws(pr):
    p, r = pr
    assert eval_predicate(model.NotPred(p), r) == (not eval_predicate(p, r))
    q = model.CommunityPred(Community(100, 1))
    assert eval_predicate(model.AndPred(p, q), r) == (
        eval_predicate(p, r) and eval_predicate(q, r)
    )
    assert eval_predicate(model.OrPred(p, q), r) == (
        eval_predicate(p, r) or eval_predicate(q, r)
    )
    assert eval_predicate(model.ImpliesPred(p, q), r) == (
        (not eval_predicate(p, r)) or eval_predicate(q, r)
    )


def test_eval_predicate_undeclared_ghost():
    r = Route(prefix=Prefix.parse("0.0.0.0/0"))
    with pytest.raises(SpecificationError):
        eval_predicate(model.GhostPred("Nope"), r)


def test_eval_predicate_table_style_examples():
    c = Community(100, 1)
    r_tagged = Route(
        prefix=Prefix.parse("10.0.0.0/8"), communities={c}, ghosts={"FromISP1": True}
    )
    assert eval_predicate(model.CommunityPred(c), r_tagged)
    key = model.ImpliesPred(model.GhostPred("FromISP1"), model.CommunityPred(c))
    assert eval_predicate(key, r_tagged)
    r_off = Route(prefix=Prefix.parse("10.0.0.0/8"), ghosts={"FromISP1": False})
    assert eval_predicate(key, r_off)  # vacuous


def test_validate_network_fixtures_clean():
    for name in (
        "running_example_network.json",
        "university_network.json",
        "false_positive_network.json",
        "wan_bogons_network.json",
        "wan_ipreuse_network.json",
        "wan_notransit_network.json",
    ):
        from conftest import load_network

        net = load_network(name)
        assert model.validate_network(net) == []


def test_validate_invariant_map_rules():
    net, prop, inv, _ = load_pair("running_example_network.json", "running_example_spec.json")
    assert model.validate_network(net, inv, prop) == []
    # missing entry
    entries = dict(inv.entries)
    del entries[Edge("R1", "R2")]
    broken = model.InvariantMap(entries)
    violations = model.validate_network(net, broken)
    assert any("missing invariant" in v and "R1->R2" in v for v in violations)
    # non-true invariant on an external-source edge
    entries = dict(inv.entries)
    entries[Edge("ISP1", "R1")] = model.GhostPred("FromISP1")
    violations = model.validate_network(net, model.InvariantMap(entries))
    assert any("external edge invariant must be true" in v for v in violations)


def test_transfer_concrete_composition():
    net, _, _, _ = load_pair("running_example_network.json", "running_example_spec.json")
    e = Edge("ISP1", "R1")
    r = Route(prefix=Prefix.parse("10.0.0.0/8"), as_path=(65001,), ghosts={"FromISP1": False})
    out = model.import_transfer_concrete(net, e, r)
    assert out.communities == frozenset({Community(100, 1)})
    assert out.ghost("FromISP1") is True
    assert out.prefix == r.prefix and out.as_path == r.as_path
    # reject absorbs, ghost effects not applied
    filt = Edge("R2", "ISP2")
    tagged = Route(
        prefix=Prefix.parse("10.0.0.0/8"),
        communities={Community(100, 1)},
        ghosts={"FromISP1": True},
    )
    assert model.export_transfer_concrete(net, filt, tagged) is None
    # missing map
    with pytest.raises(SpecificationError):
        model.import_transfer_concrete(net, Edge("R1", "ISP1"), r)
