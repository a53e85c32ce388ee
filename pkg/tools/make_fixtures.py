#!/usr/bin/env python3
"""Regenerate the shipped fixture files under src/bgpverify/fixtures/."""

import json
import sys
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "src" / "bgpverify" / "fixtures"

BOGON_MATCH = {
    "type": "prefix",
    "prefixes": [
        {"prefix": "10.0.0.0/8", "le": 32},
        {"prefix": "172.16.0.0/12", "le": 32},
        {"prefix": "192.168.0.0/16", "le": 32},
    ],
}
BOGON_PRED = (
    "not (prefix in 10.0.0.0/8 le 32 or prefix in 172.16.0.0/12 le 32 "
    "or prefix in 192.168.0.0/16 le 32)"
)


def edge(src, dst):
    return {"src": src, "dst": dst}


def session(a, b):
    return [edge(a, b), edge(b, a)]


def permit():
    return {"action": "permit"}


# ---------------------------------------------------------------------------
# Running example: three routers, two ISPs, one customer; no-transit via
# community tagging.

running_example_network = {
    "routers": [
        {"name": "R1", "asn": 65000},
        {"name": "R2", "asn": 65000},
        {"name": "R3", "asn": 65000},
    ],
    "externals": [
        {"name": "ISP1", "asn": 65001},
        {"name": "ISP2", "asn": 65002},
        {"name": "Cust", "asn": 65003},
    ],
    "edges": (
        session("ISP1", "R1")
        + session("ISP2", "R2")
        + session("Cust", "R3")
        + session("R1", "R2")
        + session("R1", "R3")
        + session("R2", "R3")
    ),
    "policies": [
        {
            "edge": edge("ISP1", "R1"),
            "direction": "import",
            "terms": [
                {"action": "permit", "set": [{"type": "add_community", "community": "100:1"}]}
            ],
        },
        {
            "edge": edge("R2", "ISP2"),
            "direction": "export",
            "terms": [
                {"action": "deny", "match": [{"type": "community", "present": "100:1"}]},
                permit(),
            ],
        },
    ],
    "originations": [
        {
            "edge": edge("R3", "Cust"),
            "routes": [
                {
                    "prefix": "192.0.2.0/24",
                    "as_path": [],
                    "next_hop": "0.0.0.0",
                    "local_pref": 100,
                    "med": 0,
                    "communities": [],
                    "ghosts": {"FromISP1": False},
                }
            ],
        }
    ],
    "ghosts": {
        "declarations": ["FromISP1"],
        "effects": [
            {"edge": edge("ISP1", "R1"), "direction": "import", "ghost": "FromISP1", "effect": "set_true"},
            {"edge": edge("ISP2", "R2"), "direction": "import", "ghost": "FromISP1", "effect": "set_false"},
            {"edge": edge("Cust", "R3"), "direction": "import", "ghost": "FromISP1", "effect": "set_false"},
        ],
        "origin_defaults": {"FromISP1": False},
    },
}

running_example_spec = {
    "property": {"location": "R2->ISP2", "pred": "not ghost FromISP1"},
    "invariants": {
        "entries": [
            {"location": "ISP1->R1", "pred": "true"},
            {"location": "R2->ISP2", "pred": "not ghost FromISP1"},
        ],
        "default": "ghost FromISP1 implies community 100:1",
    },
}

# ---------------------------------------------------------------------------
# False-positive exhibit: the user's invariants are too weak for a local
# proof, yet the fixpoint confirms the property.

false_positive_network = {
    "routers": [{"name": "R1", "asn": 65000}, {"name": "R2", "asn": 65000}],
    "externals": [{"name": "X", "asn": 65001}],
    "edges": session("X", "R1") + session("R1", "R2"),
    "policies": [
        {
            "edge": edge("X", "R1"),
            "direction": "import",
            "terms": [{"action": "permit", "set": [{"type": "set_local_pref", "value": 50}]}],
        }
    ],
    "originations": [],
    "ghosts": {"declarations": [], "effects": [], "origin_defaults": {}},
}

false_positive_spec = {
    "property": {"location": "R2", "pred": "localpref == 50"},
    "invariants": {
        "entries": [{"location": "R2", "pred": "localpref == 50"}],
        "default": "true",
    },
}

# ---------------------------------------------------------------------------
# University campus: only university-owned blocks may reach the ISPs, with a
# blackhole-community escape hatch in the border export filters.

UNI_PRED = "prefix in 131.179.0.0/16 le 24"
NO_BLACKHOLE = "not community 65535:666"
SCRUB = [{"type": "delete_community", "community": "65535:666"}]

university_network = {
    "routers": [
        {"name": "B1", "asn": 65010},
        {"name": "B2", "asn": 65010},
        {"name": "D1", "asn": 65010},
    ],
    "externals": [
        {"name": "ISP1", "asn": 65001},
        {"name": "ISP2", "asn": 65002},
        {"name": "Dept", "asn": 65020},
    ],
    "edges": (
        session("ISP1", "B1")
        + session("ISP2", "B2")
        + session("Dept", "D1")
        + session("B1", "D1")
        + session("B2", "D1")
        + session("B1", "B2")
    ),
    "policies": [
        {
            "edge": edge("ISP1", "B1"),
            "direction": "import",
            "terms": [{"action": "permit", "set": SCRUB}],
        },
        {
            "edge": edge("ISP2", "B2"),
            "direction": "import",
            "terms": [{"action": "permit", "set": SCRUB}],
        },
        {
            "edge": edge("Dept", "D1"),
            "direction": "import",
            "terms": [{"action": "permit", "set": SCRUB}],
        },
        {
            "edge": edge("B1", "ISP1"),
            "direction": "export",
            "terms": [
                {
                    "action": "permit",
                    "match": [
                        {"type": "prefix", "prefixes": [{"prefix": "131.179.0.0/16", "le": 24}]}
                    ],
                },
                {"action": "permit", "match": [{"type": "community", "present": "65535:666"}]},
            ],
        },
        {
            "edge": edge("B2", "ISP2"),
            "direction": "export",
            "terms": [
                {
                    "action": "permit",
                    "match": [
                        {"type": "prefix", "prefixes": [{"prefix": "131.179.0.0/16", "le": 24}]}
                    ],
                },
                {"action": "permit", "match": [{"type": "community", "present": "65535:666"}]},
            ],
        },
    ],
    "originations": [
        {
            "edge": edge("B1", "ISP1"),
            "routes": [
                {"prefix": "131.179.0.0/16", "local_pref": 100, "communities": []}
            ],
        },
        {
            "edge": edge("B2", "ISP2"),
            "routes": [
                {"prefix": "131.179.0.0/16", "local_pref": 100, "communities": []}
            ],
        },
        {
            "edge": edge("D1", "Dept"),
            "routes": [
                {"prefix": "131.179.8.0/24", "local_pref": 100, "communities": []}
            ],
        },
    ],
    "ghosts": {"declarations": [], "effects": [], "origin_defaults": {}},
}

university_spec_initial = {
    "property": {"location": "B1->ISP1", "pred": UNI_PRED},
    "invariants": {
        "entries": [
            {"location": "B1->ISP1", "pred": UNI_PRED},
            {"location": "B2->ISP2", "pred": UNI_PRED},
        ],
        "default": "true",
    },
}

university_spec_refined = {
    "property": {"location": "B1->ISP1", "pred": UNI_PRED},
    "invariants": {
        "entries": [
            {"location": "B1->ISP1", "pred": UNI_PRED},
            {"location": "B2->ISP2", "pred": UNI_PRED},
        ],
        "default": NO_BLACKHOLE,
    },
}


def _university_err1():
    doc = json.loads(json.dumps(university_network))
    doc["policies"].append(
        {
            "edge": edge("D1", "B1"),
            "direction": "export",
            "terms": [
                {"action": "permit", "set": [{"type": "add_community", "community": "65535:666"}]}
            ],
        }
    )
    return doc


def _university_err2():
    doc = json.loads(json.dumps(university_network))
    for pol in doc["policies"]:
        if pol["edge"] == edge("ISP1", "B1") and pol["direction"] == "import":
            pol["terms"] = [permit()]  # propagate instead of removing communities
    return doc


def _university_err3():
    doc = json.loads(json.dumps(university_network))
    for pol in doc["policies"]:
        if pol["edge"] == edge("B2", "ISP2") and pol["direction"] == "export":
            pol["terms"][0]["match"][0]["prefixes"].append({"prefix": "198.18.0.0/15", "le": 24})
    return doc


# ---------------------------------------------------------------------------
# WAN shape (a): no bogons from peers.

wan_bogons_network = {
    "routers": [
        {"name": "B1", "asn": 65000},
        {"name": "B2", "asn": 65000},
        {"name": "C", "asn": 65000},
    ],
    "externals": [
        {"name": "Peer1", "asn": 65001},
        {"name": "Peer2", "asn": 65002},
        {"name": "DC", "asn": 65050},
    ],
    "edges": (
        session("Peer1", "B1")
        + session("Peer2", "B2")
        + session("DC", "C")
        + session("B1", "C")
        + session("B2", "C")
        + session("B1", "B2")
    ),
    "policies": [
        {
            "edge": edge("Peer1", "B1"),
            "direction": "import",
            "terms": [{"action": "deny", "match": [BOGON_MATCH]}, permit()],
        },
        {
            "edge": edge("Peer2", "B2"),
            "direction": "import",
            "terms": [{"action": "deny", "match": [BOGON_MATCH]}, permit()],
        },
    ],
    "originations": [
        {
            "edge": edge("B1", "Peer1"),
            "routes": [{"prefix": "131.179.1.0/24", "local_pref": 100}],
        }
    ],
    "ghosts": {
        "declarations": ["FromPeer"],
        "effects": [
            {"edge": edge("Peer1", "B1"), "direction": "import", "ghost": "FromPeer", "effect": "set_true"},
            {"edge": edge("Peer2", "B2"), "direction": "import", "ghost": "FromPeer", "effect": "set_true"},
            {"edge": edge("DC", "C"), "direction": "import", "ghost": "FromPeer", "effect": "set_false"},
        ],
        "origin_defaults": {"FromPeer": False},
    },
}

wan_bogons_spec = {
    "property": {"location": "C", "pred": f"ghost FromPeer implies {BOGON_PRED}"},
    "invariants": {"entries": [], "default": f"ghost FromPeer implies {BOGON_PRED}"},
}


def _wan_bogons_bug():
    doc = json.loads(json.dumps(wan_bogons_network))
    for pol in doc["policies"]:
        if pol["edge"] == edge("Peer2", "B2"):
            pol["terms"] = [permit()]  # bogon filter dropped
    return doc


# ---------------------------------------------------------------------------
# WAN shape (b): reused private addresses stay inside their region.

REUSED = "prefix in 10.128.0.0/9 le 32"
IN_REGION_PRED = f"(ghost FromRegion and {REUSED}) implies (community 90:1 and not community 90:2)"
IN_REGION_PRED_WEAK = f"(ghost FromRegion and {REUSED}) implies community 90:1"
OUT_REGION_PRED = f"ghost FromRegion implies not {REUSED}"

wan_ipreuse_network = {
    "routers": [{"name": "A", "asn": 65000}, {"name": "B", "asn": 65000}],
    "externals": [{"name": "DC1", "asn": 65050}, {"name": "Ext", "asn": 65060}],
    "edges": session("DC1", "A") + session("Ext", "B") + session("A", "B"),
    "policies": [
        {
            "edge": edge("DC1", "A"),
            "direction": "import",
            "terms": [
                {
                    "action": "permit",
                    "match": [{"type": "prefix", "prefixes": [{"prefix": "10.128.0.0/9", "le": 32}]}],
                    "set": [
                        {"type": "delete_all_communities"},
                        {"type": "add_community", "community": "90:1"},
                    ],
                },
                {"action": "permit", "set": [{"type": "delete_all_communities"}]},
            ],
        },
        {
            "edge": edge("A", "B"),
            "direction": "import",
            "terms": [
                {"action": "deny", "match": [{"type": "community", "present": "90:1"}]},
                permit(),
            ],
        },
    ],
    "originations": [],
    "ghosts": {
        "declarations": ["FromRegion"],
        "effects": [
            {"edge": edge("DC1", "A"), "direction": "import", "ghost": "FromRegion", "effect": "set_true"},
            {"edge": edge("Ext", "B"), "direction": "import", "ghost": "FromRegion", "effect": "set_false"},
        ],
        "origin_defaults": {"FromRegion": False},
    },
}

wan_ipreuse_spec = {
    "property": {"location": "B", "pred": OUT_REGION_PRED},
    "invariants": {
        "entries": [
            {"location": "A", "pred": IN_REGION_PRED},
            {"location": "B", "pred": OUT_REGION_PRED},
            {"location": "A->B", "pred": IN_REGION_PRED},
            {"location": "B->A", "pred": OUT_REGION_PRED},
            {"location": "A->DC1", "pred": IN_REGION_PRED},
            {"location": "B->Ext", "pred": OUT_REGION_PRED},
        ],
        "default": "true",
    },
}


def _wan_ipreuse_weakened():
    """No community deletion anywhere; the matching spec weakens the regional
    invariant accordingly."""
    doc = json.loads(json.dumps(wan_ipreuse_network))
    for pol in doc["policies"]:
        if pol["edge"] == edge("DC1", "A"):
            pol["terms"] = [
                {
                    "action": "permit",
                    "match": [{"type": "prefix", "prefixes": [{"prefix": "10.128.0.0/9", "le": 32}]}],
                    "set": [{"type": "add_community", "community": "90:1"}],
                },
                permit(),
            ]
    return doc


wan_ipreuse_weakened_spec = {
    "property": {"location": "B", "pred": OUT_REGION_PRED},
    "invariants": {
        "entries": [
            {"location": "A", "pred": IN_REGION_PRED_WEAK},
            {"location": "B", "pred": OUT_REGION_PRED},
            {"location": "A->B", "pred": IN_REGION_PRED_WEAK},
            {"location": "B->A", "pred": OUT_REGION_PRED},
            {"location": "A->DC1", "pred": IN_REGION_PRED_WEAK},
            {"location": "B->Ext", "pred": OUT_REGION_PRED},
        ],
        "default": "true",
    },
}


def _wan_ipreuse_bug():
    """Scrub-then-tag degraded to tag-only while the strict invariant stays."""
    return _wan_ipreuse_weakened()


# ---------------------------------------------------------------------------
# WAN shape (c): no transit between peers, enforced with AS-path regexes.

VALID_PATHS = "^(65001|65002) .*$"
VALID_PFXS = "prefix in 193.0.0.0/8 le 24"
PEER_NODE_PRED = f'ghost FromPeer implies (aspath matches "{VALID_PATHS}" and {VALID_PFXS})'

wan_notransit_network = {
    "routers": [
        {"name": "P1", "asn": 65000},
        {"name": "P2", "asn": 65000},
        {"name": "C", "asn": 65000},
    ],
    "externals": [
        {"name": "PeerA", "asn": 65001},
        {"name": "PeerB", "asn": 65002},
        {"name": "CustX", "asn": 65003},
    ],
    "edges": (
        session("PeerA", "P1")
        + session("PeerB", "P2")
        + session("CustX", "C")
        + session("P1", "C")
        + session("P2", "C")
        + session("P1", "P2")
    ),
    "policies": [
        {
            "edge": edge("PeerA", "P1"),
            "direction": "import",
            "terms": [
                {
                    "action": "permit",
                    "match": [
                        {"type": "aspath", "regex": "^65001 .*$"},
                        {"type": "prefix", "prefixes": [{"prefix": "193.0.0.0/8", "le": 24}]},
                    ],
                }
            ],
        },
        {
            "edge": edge("PeerB", "P2"),
            "direction": "import",
            "terms": [
                {
                    "action": "permit",
                    "match": [
                        {"type": "aspath", "regex": "^65002 .*$"},
                        {"type": "prefix", "prefixes": [{"prefix": "193.0.0.0/8", "le": 24}]},
                    ],
                }
            ],
        },
        {
            "edge": edge("P1", "PeerA"),
            "direction": "export",
            "terms": [
                {"action": "deny", "match": [{"type": "aspath", "regex": VALID_PATHS}]},
                permit(),
            ],
        },
        {
            "edge": edge("P2", "PeerB"),
            "direction": "export",
            "terms": [
                {"action": "deny", "match": [{"type": "aspath", "regex": VALID_PATHS}]},
                permit(),
            ],
        },
    ],
    "originations": [
        {
            "edge": edge("P1", "PeerA"),
            "routes": [{"prefix": "198.51.100.0/24", "local_pref": 100}],
        },
        {
            "edge": edge("C", "CustX"),
            "routes": [{"prefix": "198.51.100.0/24", "local_pref": 100}],
        },
    ],
    "ghosts": {
        "declarations": ["FromPeer"],
        "effects": [
            {"edge": edge("PeerA", "P1"), "direction": "import", "ghost": "FromPeer", "effect": "set_true"},
            {"edge": edge("PeerB", "P2"), "direction": "import", "ghost": "FromPeer", "effect": "set_true"},
            {"edge": edge("CustX", "C"), "direction": "import", "ghost": "FromPeer", "effect": "set_false"},
        ],
        "origin_defaults": {"FromPeer": False},
    },
}

wan_notransit_spec = {
    "property": {"location": "P2->PeerB", "pred": "not ghost FromPeer"},
    "invariants": {
        "entries": [
            {"location": "P1->PeerA", "pred": "not ghost FromPeer"},
            {"location": "P2->PeerB", "pred": "not ghost FromPeer"},
            {"location": "C->CustX", "pred": "true"},
        ],
        "default": PEER_NODE_PRED,
    },
}


def _wan_notransit_bug():
    doc = json.loads(json.dumps(wan_notransit_network))
    for pol in doc["policies"]:
        if pol["edge"] == edge("P2", "PeerB") and pol["direction"] == "export":
            pol["terms"] = [permit()]  # AS-path filter dropped
    return doc


FIXTURES = {
    "running_example_network.json": running_example_network,
    "running_example_spec.json": running_example_spec,
    "false_positive_network.json": false_positive_network,
    "false_positive_spec.json": false_positive_spec,
    "university_network.json": university_network,
    "university_spec_initial.json": university_spec_initial,
    "university_spec_refined.json": university_spec_refined,
    "university_err1_network.json": _university_err1(),
    "university_err2_network.json": _university_err2(),
    "university_err3_network.json": _university_err3(),
    "wan_bogons_network.json": wan_bogons_network,
    "wan_bogons_spec.json": wan_bogons_spec,
    "wan_bogons_bug_network.json": _wan_bogons_bug(),
    "wan_ipreuse_network.json": wan_ipreuse_network,
    "wan_ipreuse_spec.json": wan_ipreuse_spec,
    "wan_ipreuse_weakened_network.json": _wan_ipreuse_weakened(),
    "wan_ipreuse_weakened_spec.json": wan_ipreuse_weakened_spec,
    "wan_ipreuse_bug_network.json": _wan_ipreuse_bug(),
    "wan_notransit_network.json": wan_notransit_network,
    "wan_notransit_spec.json": wan_notransit_spec,
    "wan_notransit_bug_network.json": _wan_notransit_bug(),
}


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, doc in sorted(FIXTURES.items()):
        path = OUT / name
        path.write_text(json.dumps(doc, indent=2) + "\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    sys.exit(main())
