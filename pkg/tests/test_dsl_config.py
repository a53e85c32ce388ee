import json

import pytest

from bgpverify import config, model
from bgpverify.config import compute_universe, diff_networks, diff_specs, parse_network
from bgpverify.dsl import parse_predicate
from bgpverify.errors import ConfigError
from bgpverify.model import Community, Edge, Prefix, Route

from conftest import fixture_doc, fixture_text, load_network, load_pair


def test_parse_predicate_atoms():
    p = parse_predicate("community 100:1")
    assert p == model.CommunityPred(Community(100, 1))
    p = parse_predicate("prefix in 10.0.0.0/8 ge 16 le 24")
    assert p.entry.prefix == Prefix.parse("10.0.0.0/8")
    assert (p.entry.ge, p.entry.le) == (16, 24)
    assert parse_predicate("localpref >= 200") == model.LocalPrefPred(">=", 200)
    assert parse_predicate("med != 5") == model.MedPred("!=", 5)
    assert parse_predicate("ghost F", ["F"]) == model.GhostPred("F")
    p = parse_predicate('aspath matches "^65001 .*$"')
    assert p == model.AsPathPred("^65001 .*$")
    assert parse_predicate("true") is model.TRUE
    assert parse_predicate("false") is model.FALSE


def test_parse_predicate_precedence_and_grouping():
    p = parse_predicate("not ghost F and community 100:1", ["F"])
    # "not" binds tighter than "and"
    assert isinstance(p, model.AndPred)
    assert isinstance(p.left, model.NotPred)
    p = parse_predicate("ghost F implies community 100:1 or community 100:2", ["F"])
    # or/implies associate left at the same level
    assert isinstance(p, model.OrPred)
    assert isinstance(p.left, model.ImpliesPred)
    p = parse_predicate("ghost F implies (community 100:1 or community 100:2)", ["F"])
    assert isinstance(p, model.ImpliesPred)


def test_parse_predicate_errors():
    with pytest.raises(ConfigError):
        parse_predicate("ghost Missing", [])
    with pytest.raises(ConfigError):
        parse_predicate("community 100")
    with pytest.raises(ConfigError):
        parse_predicate("localpref >= banana")
    with pytest.raises(ConfigError):
        parse_predicate('aspath matches "65001"')  # missing anchors
    with pytest.raises(ConfigError):
        parse_predicate("community 100:1 community 100:2")
    with pytest.raises(ConfigError):
        parse_predicate("prefix in 10.0.0.1/8")


def test_predicate_dsl_round_trip():
    ghosts = ["FromISP1"]
    texts = [
        "ghost FromISP1 implies community 100:1",
        "not (community 100:1 and localpref <= 5)",
        'aspath matches "^65001 .*$" or prefix in 10.0.0.0/8 le 24',
        "true",
        "med == 0 and not ghost FromISP1",
    ]
    for text in texts:
        p = parse_predicate(text, ghosts)
        assert parse_predicate(p.to_dsl(), ghosts) == p


def test_parse_running_example_network():
    net = load_network("running_example_network.json")
    assert len(net.topology.routers) == 3
    assert len(net.topology.externals) == 3
    assert len(net.topology.edges) == 12
    assert model.validate_network(net) == []


def test_parse_empty_network():
    net = parse_network(json.dumps({"routers": [], "externals": [], "edges": []}))
    assert net.topology.nodes == frozenset()
    assert model.validate_network(net) == []


def test_parse_error_unknown_node():
    doc = {
        "routers": [{"name": "R1", "asn": 1}],
        "externals": [],
        "edges": [{"src": "R1", "dst": "R9"}],
    }
    with pytest.raises(ConfigError) as exc:
        parse_network(json.dumps(doc))
    assert "R9" in str(exc.value) and "R1->R9" in str(exc.value)


def test_parse_error_duplicate_edge_and_syntax():
    doc = {
        "routers": [{"name": "R1", "asn": 1}, {"name": "R2", "asn": 1}],
        "externals": [],
        "edges": [{"src": "R1", "dst": "R2"}, {"src": "R1", "dst": "R2"}],
    }
    with pytest.raises(ConfigError, match="duplicate edge"):
        parse_network(json.dumps(doc))
    with pytest.raises(ConfigError, match="line 1"):
        parse_network("{not json")


def test_network_print_parse_round_trip():
    for name in (
        "running_example_network.json",
        "university_network.json",
        "wan_notransit_network.json",
        "wan_ipreuse_network.json",
    ):
        net = load_network(name)
        again = parse_network(config.print_network(net))
        assert again == net


def test_parse_spec_running_example():
    net, prop, inv, ghosts = load_pair(
        "running_example_network.json", "running_example_spec.json"
    )
    assert prop.location == Edge("R2", "ISP2")
    assert prop.pred == model.NotPred(model.GhostPred("FromISP1"))
    assert inv.at(Edge("ISP1", "R1")) is model.TRUE
    assert inv.at(Edge("R2", "ISP2")) == prop.pred
    key = parse_predicate("ghost FromISP1 implies community 100:1", ["FromISP1"])
    assert inv.at("R1") == key
    assert inv.at(Edge("R1", "R2")) == key
    assert ghosts.declarations == ("FromISP1",)
    assert model.validate_network(net, inv, prop) == []


def test_parse_spec_default_true():
    net = load_network("running_example_network.json")
    spec = {"property": {"location": "R2->ISP2", "pred": "true"}, "invariants": {"default": "true"}}
    prop, inv, _ = config.spec_from_doc(spec, net)
    assert all(p is model.TRUE for p in inv.entries.values())


def test_parse_spec_rejects_nontrue_external_edge_invariant():
    net = load_network("running_example_network.json")
    spec = {
        "property": {"location": "R2->ISP2", "pred": "true"},
        "invariants": {
            "entries": [{"location": "ISP1->R1", "pred": "community 100:1"}],
            "default": "true",
        },
    }
    with pytest.raises(ConfigError, match="external-source edge"):
        config.spec_from_doc(spec, net)


def test_parse_spec_unresolvable_location():
    net = load_network("running_example_network.json")
    spec = {"property": {"location": "R9", "pred": "true"}, "invariants": {"default": "true"}}
    with pytest.raises(ConfigError, match="R9"):
        config.spec_from_doc(spec, net)


def test_compute_universe_running_example():
    net, prop, inv, _ = load_pair("running_example_network.json", "running_example_spec.json")
    u = compute_universe(net, prop, inv)
    assert u.communities == (Community(100, 1),)
    assert u.asns == (65000, 65001, 65002, 65003)
    assert u.ghost_names == ("FromISP1",)


def test_compute_universe_empty_and_containment():
    net = parse_network(json.dumps({"routers": [], "externals": [], "edges": []}))
    u = compute_universe(net)
    assert u == config.Universe()
    # predicate-only literal still lands in the universe
    p = parse_predicate("community 200:5")
    u2 = compute_universe(net, extra_preds=[p])
    assert Community(200, 5) in u2.communities


def test_compute_universe_monotone_under_term_addition():
    net = load_network("running_example_network.json")
    u1 = compute_universe(net)
    doc = fixture_doc("running_example_network.json")
    doc["policies"][0]["terms"].insert(
        0, {"action": "deny", "match": [{"type": "community", "present": "7:7"}]}
    )
    net2 = config.network_from_doc(doc)
    u2 = compute_universe(net2)
    assert set(u1.communities) <= set(u2.communities)
    assert set(u1.asns) <= set(u2.asns)


def test_diff_networks():
    net = load_network("running_example_network.json")
    assert diff_networks(net, net).empty

    doc = fixture_doc("running_example_network.json")
    for pol in doc["policies"]:
        if pol["edge"] == {"src": "ISP1", "dst": "R1"}:
            pol["terms"] = [{"action": "permit"}]
    net2 = config.network_from_doc(doc)
    d = diff_networks(net, net2)
    assert d.changed_edges == frozenset({Edge("ISP1", "R1")})
    assert d.changed_nodes == frozenset({"ISP1", "R1"})
    # symmetric membership
    d2 = diff_networks(net2, net)
    assert (d.changed_nodes, d.changed_edges) == (d2.changed_nodes, d2.changed_edges)

    # removing an edge flags the edge and both endpoints
    doc = fixture_doc("running_example_network.json")
    doc["edges"] = [e for e in doc["edges"] if not (e["src"] == "R2" and e["dst"] == "R3")]
    doc["policies"] = [
        p for p in doc["policies"] if not (p["edge"] == {"src": "R2", "dst": "R3"})
    ]
    net3 = config.network_from_doc(doc)
    d3 = diff_networks(net, net3)
    assert Edge("R2", "R3") in d3.changed_edges
    assert {"R2", "R3"} <= set(d3.changed_nodes)


def test_diff_specs():
    net, prop, inv, _ = load_pair("running_example_network.json", "running_example_spec.json")
    changed, pchanged = diff_specs(prop, inv, prop, inv)
    assert not changed and not pchanged
    entries = dict(inv.entries)
    entries["R1"] = model.TRUE
    inv2 = model.InvariantMap(entries)
    changed, pchanged = diff_specs(prop, inv, prop, inv2)
    assert changed == frozenset({"R1"}) and not pchanged
    prop2 = model.NetworkProperty(prop.location, model.TRUE)
    _, pchanged = diff_specs(prop, inv, prop2, inv)
    assert pchanged


def test_origination_routes_ghost_defaults():
    doc = fixture_doc("running_example_network.json")
    for orig in doc["originations"]:
        del orig["routes"][0]["ghosts"]
    net = config.network_from_doc(doc)
    (routes,) = [r for r in net.policy.originate[Edge("R3", "Cust")]]
    assert routes.ghost("FromISP1") is False
