"""Synthetic full-mesh networks for scaling runs.

Layout: N internal routers in a full directed mesh (N*(N-1) directed edges)
sharing one ASN, each with one external neighbor over two directed edges, so
the network has N*(N-1) + 2N directed edges in total.  (Counting sessions
instead of directed edges, or only one direction of the external pairing,
gives the smaller quadratic counts sometimes quoted elsewhere; this module
always reports directed-edge counts.)

Policy shape: imports from external neighbor i drop a fixed bogon prefix
list and tag community 100:i; the export towards the designated second
external filters routes tagged 100:1; everything else permits unchanged.
The spec is the matching no-transit property: nothing learned from the
first external may reach the second, proven via a FromISP1 ghost and the
"tagged routes carry 100:1" maintenance invariant.
"""

from __future__ import annotations

import random

BOGON_PREFIXES = ["10.0.0.0/8", "172.16.0.0/12", "192.168.0.0/16"]

INTERNAL_ASN = 65000


def router_name(i: int) -> str:
    return f"R{i:03d}"


def external_name(i: int) -> str:
    return f"E{i:03d}"


def generate_mesh(n: int, seed: int = 0) -> tuple[dict, dict]:
    """Deterministic (network_doc, spec_doc) pair for a mesh of size n >= 2."""
    if n < 2:
        raise ValueError("mesh size must be at least 2")
    rng = random.Random(seed)

    routers = [{"name": router_name(i), "asn": INTERNAL_ASN} for i in range(1, n + 1)]
    externals = [{"name": external_name(i), "asn": 65100 + i} for i in range(1, n + 1)]

    edges = []
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i != j:
                edges.append({"src": router_name(i), "dst": router_name(j)})
    for i in range(1, n + 1):
        edges.append({"src": external_name(i), "dst": router_name(i)})
        edges.append({"src": router_name(i), "dst": external_name(i)})

    bogon_match = {
        "type": "prefix",
        "prefixes": [{"prefix": p, "le": 32} for p in BOGON_PREFIXES],
    }
    policies = []
    for i in range(1, n + 1):
        policies.append(
            {
                "edge": {"src": external_name(i), "dst": router_name(i)},
                "direction": "import",
                "terms": [
                    {"action": "deny", "match": [bogon_match]},
                    {"action": "permit", "set": [{"type": "add_community", "community": f"100:{i}"}]},
                ],
            }
        )
    policies.append(
        {
            "edge": {"src": router_name(2), "dst": external_name(2)},
            "direction": "export",
            "terms": [
                {"action": "deny", "match": [{"type": "community", "present": "100:1"}]},
                {"action": "permit"},
            ],
        }
    )

    originations = []
    for i in range(1, n + 1):
        third = rng.randrange(0, 256)
        prefix = f"131.{(i - 1) % 256}.{third}.0/24"
        route = {
            "prefix": prefix,
            "as_path": [],
            "next_hop": "0.0.0.0",
            "local_pref": 100,
            "med": 0,
            "communities": [],
            "ghosts": {"FromISP1": False},
        }
        for j in range(1, n + 1):
            if i != j:
                originations.append(
                    {"edge": {"src": router_name(i), "dst": router_name(j)}, "routes": [route]}
                )
        originations.append(
            {"edge": {"src": router_name(i), "dst": external_name(i)}, "routes": [route]}
        )

    effects = [
        {
            "edge": {"src": external_name(1), "dst": router_name(1)},
            "direction": "import",
            "ghost": "FromISP1",
            "effect": "set_true",
        }
    ]
    for i in range(2, n + 1):
        effects.append(
            {
                "edge": {"src": external_name(i), "dst": router_name(i)},
                "direction": "import",
                "ghost": "FromISP1",
                "effect": "set_false",
            }
        )

    network_doc = {
        "routers": routers,
        "externals": externals,
        "edges": edges,
        "policies": policies,
        "originations": originations,
        "ghosts": {
            "declarations": ["FromISP1"],
            "effects": effects,
            "origin_defaults": {"FromISP1": False},
        },
    }
    spec_doc = {
        "property": {
            "location": f"{router_name(2)}->{external_name(2)}",
            "pred": "not ghost FromISP1",
        },
        "invariants": {
            "entries": [
                {
                    "location": f"{router_name(2)}->{external_name(2)}",
                    "pred": "not ghost FromISP1",
                }
            ],
            "default": "ghost FromISP1 implies community 100:1",
        },
    }
    return network_doc, spec_doc
