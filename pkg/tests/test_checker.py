import copy
import json
import random

import pytest

from bgpverify import checker, config, model, oracle
from bgpverify.checker import (
    expected_obligation_count,
    extensional_view,
    generate_checks,
    incremental_recheck,
    localize,
    verify,
)
from bgpverify.model import Community, Edge

from conftest import fixture_doc, load_pair
from randnet import random_network


def running_example():
    return load_pair("running_example_network.json", "running_example_spec.json")


def test_obligation_count_running_example():
    net, prop, inv, _ = running_example()
    obs = generate_checks(net, inv, prop)
    # 3 ext->int + 3 int->ext + 6 int->int directed edges
    assert len(obs) == 3 + 2 * 3 + 3 * 6 + 1 == 28
    assert len(obs) == expected_obligation_count(net)
    assert sum(1 for ob in obs if ob.kind == "implication") == 1


def test_obligation_count_zero_edges():
    net = config.parse_network(
        json.dumps({"routers": [{"name": "R1", "asn": 1}], "externals": [], "edges": []})
    )
    prop, inv, _ = config.spec_from_doc(
        {"property": {"location": "R1", "pred": "true"}, "invariants": {"default": "true"}}, net
    )
    obs = generate_checks(net, inv, prop)
    assert len(obs) == 1 and obs[0].kind == "implication"


def test_obligation_count_formula_random_topologies():
    rng = random.Random(41)
    for _ in range(25):
        net = random_network(rng, max_internal=3, max_external=2)
        prop = model.NetworkProperty(sorted(net.topology.routers)[0], model.TRUE)
        entries = {loc: model.TRUE for loc in list(net.topology.routers) + list(net.topology.edges)}
        inv = model.InvariantMap(entries)
        assert len(generate_checks(net, inv, prop)) == expected_obligation_count(net)


def test_obligation_ids_stable_under_spec_change():
    net, prop, inv, _ = running_example()
    obs1 = {ob.id for ob in generate_checks(net, inv, prop)}
    entries = {loc: model.TRUE for loc in inv.entries}
    obs2 = {ob.id for ob in generate_checks(net, model.InvariantMap(entries), prop)}
    assert obs1 == obs2  # ids depend on maps, not on invariant predicates


def test_verify_running_example_passes():
    net, prop, inv, _ = running_example()
    report = verify(net, inv, prop)
    assert report.passed and report.totals["obligations"] == 28


def test_verify_parallel_determinism():
    net, prop, inv, _ = running_example()
    r1 = verify(net, inv, prop, parallelism=1)
    r8 = verify(net, inv, prop, parallelism=8)
    assert extensional_view(r1.to_doc()) == extensional_view(r8.to_doc())
    b1 = json.dumps(extensional_view(r1.to_doc()), sort_keys=True)
    b8 = json.dumps(extensional_view(r8.to_doc()), sort_keys=True)
    assert b1 == b8  # byte-identical apart from timing fields


def mutated_running_example_no_tag():
    doc = fixture_doc("running_example_network.json")
    for pol in doc["policies"]:
        if pol["edge"] == {"src": "ISP1", "dst": "R1"}:
            pol["terms"] = [{"action": "permit"}]
    net = config.network_from_doc(doc)
    prop, inv, _ = config.spec_from_doc(fixture_doc("running_example_spec.json"), net)
    return net, prop, inv


def test_mutated_tagging_fails_exactly_one_check():
    net, prop, inv = mutated_running_example_no_tag()
    report = verify(net, inv, prop)
    fails = report.failures()
    assert len(fails) == 1
    (f,) = fails
    assert f["kind"] == "import" and f["edge"] == {"src": "ISP1", "dst": "R1"}
    post = f["failure"]["post_witness"]
    assert post["ghosts"]["FromISP1"] is True
    assert "100:1" not in post["communities"]
    pre = f["failure"]["pre_witness"]
    assert pre is not None


def test_fail_witness_validity_concrete_replay():
    net, prop, inv = mutated_running_example_no_tag()
    report = verify(net, inv, prop)
    (fid,) = [e["id"] for e in report.failures()]
    res = report.results[fid]
    ob = res.obligation
    pre, post = res.failure.pre_witness.route, res.failure.post_witness.route
    assert model.eval_predicate(ob.hyp_pred, pre)
    out = model.import_transfer_concrete(net, ob.edge, pre)
    assert out == post
    assert not model.eval_predicate(ob.goal_pred, post)


def test_originate_vacuous_and_violating():
    net, prop, inv, _ = running_example()
    obs = generate_checks(net, inv, prop)
    empties = [ob for ob in obs if ob.kind == "originate" and not ob.origin_routes]
    assert empties
    assert all(checker.discharge(ob).verdict == "pass" for ob in empties)
    # force a violating origination: R2->ISP2 requires not FromISP1
    doc = fixture_doc("running_example_network.json")
    doc["originations"].append(
        {
            "edge": {"src": "R2", "dst": "ISP2"},
            "routes": [{"prefix": "192.0.2.0/24", "ghosts": {"FromISP1": True}}],
        }
    )
    net2 = config.network_from_doc(doc)
    prop2, inv2, _ = config.spec_from_doc(fixture_doc("running_example_spec.json"), net2)
    report = verify(net2, inv2, prop2)
    fails = report.failures()
    assert [f["kind"] for f in fails] == ["originate"]
    assert fails[0]["failure"]["post_witness"]["ghosts"]["FromISP1"] is True


def test_implication_failure_class():
    net, prop, inv, _ = running_example()
    prop2 = model.NetworkProperty(prop.location, model.FALSE)
    report = verify(net, inv, prop2)
    fails = report.failures()
    assert [f["kind"] for f in fails] == ["implication"]
    assert fails[0]["failure"]["failure_class"] == "property_implication"
    assert "invariant-vs-property gap" in fails[0]["failure"]["diagnostic"]


def test_localize_names_term_and_edge():
    net, prop, inv = mutated_running_example_no_tag()
    report = verify(net, inv, prop)
    (fid,) = [e["id"] for e in report.failures()]
    text = localize(report.results[fid], net)
    assert "ISP1->R1" in text
    assert "term 0" in text
    assert "route before" in text and "route after" in text


def test_soundness_bridge_on_passing_networks():
    """Where verify passes, fixpoint sets stay inside the invariants."""
    rng = random.Random(42)
    bridged = 0
    for _ in range(40):
        net = random_network(rng, max_internal=3, max_external=2)
        enc = checker.build_encoding(net)
        fp = oracle.compute_fixpoint(net, aspath_bound=4, enc=enc)
        inv = oracle.strongest_invariants(fp)
        loc = rng.choice(sorted(net.topology.routers) + sorted(net.topology.edges, key=str))
        prop = model.NetworkProperty(loc, inv.at(loc))
        report = verify(net, inv, prop, enc=enc)
        assert report.passed
        from bgpverify.symbolic import encode_predicate

        for l in list(net.topology.routers) + list(net.topology.edges):
            assert fp.set_at(l).subset_of(encode_predicate(inv.at(l), enc))
        bridged += 1
    assert bridged == 40


def test_incremental_noop_and_single_edit():
    net, prop, inv, _ = running_example()
    full = verify(net, inv, prop)
    diff = config.diff_networks(net, net)
    rep = incremental_recheck(full, diff, net, inv, prop)
    assert rep.rechecked_ids == ()
    assert extensional_view(rep.to_doc()) == extensional_view(full.to_doc())

    net2, prop2, inv2 = mutated_running_example_no_tag()
    diff = config.diff_networks(net, net2)
    assert diff.changed_edges == frozenset({Edge("ISP1", "R1")})
    rep2 = incremental_recheck(full, diff, net2, inv2, prop2)
    # rechecked obligations sit on edges incident to ISP1 or R1 only
    incident = {"ISP1", "R1"}
    for e in rep2.entries:
        if e["id"] in rep2.rechecked_ids and e["edge"]:
            assert set(e["edge"].values()) & incident
    full2 = verify(net2, inv2, prop2)
    assert extensional_view(rep2.to_doc()) == extensional_view(full2.to_doc())
    assert rep2.overall == "fail"


def test_incremental_invariant_only_change():
    net, prop, inv, _ = running_example()
    full = verify(net, inv, prop)
    entries = dict(inv.entries)
    entries["R3"] = model.TRUE  # weaken one node invariant
    inv2 = model.InvariantMap(entries)
    changed, pchanged = config.diff_specs(prop, inv, prop, inv2)
    diff = config.NetworkDiff(frozenset(), frozenset(), changed, pchanged)
    rep = incremental_recheck(full, diff, net, inv2, prop)
    # every rechecked obligation involves R3 as hypothesis or goal location
    for e in rep.entries:
        if e["id"] in rep.rechecked_ids:
            assert "R3" in (e["hypothesis_location"], e["goal_location"])
    full2 = verify(net, inv2, prop)
    assert extensional_view(rep.to_doc()) == extensional_view(full2.to_doc())


def test_incremental_stale_report_falls_back():
    net, prop, inv, _ = running_example()
    full = verify(net, inv, prop)
    crippled = {"results": [e for e in full.entries if e["kind"] != "originate"]}
    diff = config.diff_networks(net, net)
    rep = incremental_recheck(crippled, diff, net, inv, prop)
    assert rep.stale_fallback
    assert extensional_view(rep.to_doc()) == extensional_view(full.to_doc())


def test_render_text_report_labels():
    net, prop, inv, _ = load_pair("false_positive_network.json", "false_positive_spec.json")
    report = verify(net, inv, prop)
    text = checker.render_text_report(report)
    # the verdict line labels this a local-invariant failure, not a property violation
    verdict_line = [l for l in text.splitlines() if l.startswith("FAIL")][0]
    assert "local invariant" in verdict_line
    assert "property" not in verdict_line
    for e in report.failures():
        assert e["failure"]["failure_class"] == "local_invariant"
