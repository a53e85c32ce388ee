"""Modular BGP control-plane verifier.

End-to-end safety properties are discharged through purely local checks on
individual import/export/origination filters, with an exact fixpoint/trace
oracle for cross-validation at desk scale.
"""

from .checker import (
    CheckObligation,
    CheckResult,
    VerificationReport,
    discharge,
    generate_checks,
    incremental_recheck,
    localize,
    verify,
)
from .config import (
    NetworkDiff,
    Universe,
    compute_universe,
    diff_networks,
    diff_specs,
    parse_network,
    parse_spec,
    print_network,
)
from .errors import ConfigError, InstanceTooLargeError, SpecificationError
from .model import (
    Community,
    Edge,
    GhostSpec,
    InvariantMap,
    Network,
    NetworkProperty,
    Prefix,
    Route,
    RouteMap,
    apply_ghost_effects,
    apply_route_map,
    eval_predicate,
    export_transfer_concrete,
    import_transfer_concrete,
    validate_network,
)
from .oracle import (
    FixpointSolution,
    SeedAlphabet,
    TraceEvent,
    apply_failures,
    check_property_fixpoint,
    compute_fixpoint,
    enumerate_valid_traces,
    reachable_events,
    strongest_invariants,
)
from .symbolic import Encoding, SetPredicate, SymbolicRouteSet, Witness, encode_predicate, transfer_route_map

__version__ = "0.1.0"
