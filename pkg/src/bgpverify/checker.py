"""Local proof obligations: generation, discharge, aggregation, incremental runs.

Per directed edge A->B the generator emits an Import obligation when B is
internal, plus Export and Originate obligations when A is internal, and one
Implication obligation tying the invariant at the property location to the
property itself.  Every obligation can be discharged in isolation, so the
count formula |ext->int| + 2*|int->ext| + 3*|int->int| + 1 holds exactly.

A failing Import/Export discharge re-runs the concrete route-map semantics
on the extracted witness pair before reporting, so a reported counterexample
is always replayable.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence

from . import config, model
from .config import NetworkDiff, Universe
from .errors import SpecificationError
from .model import (
    Edge,
    GhostSpec,
    InvariantMap,
    Location,
    Network,
    NetworkProperty,
    PredicateExpr,
    Route,
    RouteMap,
)
from .symbolic import (
    Encoding,
    SymbolicRouteSet,
    Witness,
    encode_predicate,
    preimage_witness,
    transfer_route_map,
)

logger = logging.getLogger(__name__)

IMPORT = "import"
EXPORT = "export"
ORIGINATE = "originate"
IMPLICATION = "implication"

LOCAL_INVARIANT = "local_invariant"
PROPERTY_IMPLICATION = "property_implication"


@dataclass(frozen=True, eq=False)
class CheckObligation:
    id: str
    kind: str
    edge: Optional[Edge]
    direction: Optional[str]
    hypothesis: Optional[SymbolicRouteSet]
    goal: SymbolicRouteSet
    hyp_pred: Optional[PredicateExpr]
    goal_pred: PredicateExpr
    hyp_location: Optional[Location]
    goal_location: Location
    route_map: Optional[RouteMap] = None
    ghosts: Optional[GhostSpec] = None
    origin_routes: tuple[Route, ...] = ()


@dataclass(eq=False)
class Failure:
    failure_class: str
    violated_location: Location
    violated_pred: PredicateExpr
    post_witness: Witness
    pre_witness: Optional[Witness] = None
    term_index: Optional[int] = None
    diagnostic: str = ""


@dataclass(eq=False)
class CheckResult:
    obligation: CheckObligation
    verdict: str  # "pass" | "fail"
    time_s: float
    failure: Optional[Failure] = None


def _ghost_effect_doc(ghosts: GhostSpec, e: Edge, direction: str) -> list:
    out = []
    for name in ghosts.declarations:
        eff = ghosts.effect(e, direction, name)
        if eff is not model.Effect.PRESERVE:
            out.append([name, eff.value])
    return out


def obligation_id(kind: str, edge: Optional[Edge], payload: Any) -> str:
    doc = {"kind": kind, "edge": str(edge) if edge else None, "payload": payload}
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def expected_obligation_count(net: Network) -> int:
    topo = net.topology
    ext_int = sum(1 for e in topo.edges if e.src in topo.externals)
    int_ext = sum(1 for e in topo.edges if e.src in topo.routers and e.dst in topo.externals)
    int_int = sum(1 for e in topo.edges if e.src in topo.routers and e.dst in topo.routers)
    return ext_int + 2 * int_ext + 3 * int_int + 1


def build_encoding(
    net: Network, inv: Optional[InvariantMap] = None, prop: Optional[NetworkProperty] = None
) -> Encoding:
    return Encoding(config.compute_universe(net, prop, inv))


def generate_checks(
    net: Network,
    inv: InvariantMap,
    prop: NetworkProperty,
    enc: Optional[Encoding] = None,
) -> list[CheckObligation]:
    if enc is None:
        enc = build_encoding(net, inv, prop)
    topo = net.topology
    obligations: list[CheckObligation] = []

    for e in sorted(topo.edges):
        if e.dst in topo.routers:
            m = net.policy.import_maps[e]
            obligations.append(
                CheckObligation(
                    id=obligation_id(
                        IMPORT,
                        e,
                        {
                            "map": config.route_map_to_doc(m),
                            "effects": _ghost_effect_doc(net.ghosts, e, model.IMPORT),
                        },
                    ),
                    kind=IMPORT,
                    edge=e,
                    direction=model.IMPORT,
                    hypothesis=encode_predicate(inv.at(e), enc),
                    goal=encode_predicate(inv.at(e.dst), enc),
                    hyp_pred=inv.at(e),
                    goal_pred=inv.at(e.dst),
                    hyp_location=e,
                    goal_location=e.dst,
                    route_map=m,
                    ghosts=net.ghosts,
                )
            )
        if e.src in topo.routers:
            m = net.policy.export_maps[e]
            obligations.append(
                CheckObligation(
                    id=obligation_id(
                        EXPORT,
                        e,
                        {
                            "map": config.route_map_to_doc(m),
                            "effects": _ghost_effect_doc(net.ghosts, e, model.EXPORT),
                        },
                    ),
                    kind=EXPORT,
                    edge=e,
                    direction=model.EXPORT,
                    hypothesis=encode_predicate(inv.at(e.src), enc),
                    goal=encode_predicate(inv.at(e), enc),
                    hyp_pred=inv.at(e.src),
                    goal_pred=inv.at(e),
                    hyp_location=e.src,
                    goal_location=e,
                    route_map=m,
                    ghosts=net.ghosts,
                )
            )
            routes = tuple(sorted(net.policy.originate[e], key=Route.sort_key))
            obligations.append(
                CheckObligation(
                    id=obligation_id(
                        ORIGINATE, e, {"routes": [config.route_to_doc(r) for r in routes]}
                    ),
                    kind=ORIGINATE,
                    edge=e,
                    direction=None,
                    hypothesis=None,
                    goal=encode_predicate(inv.at(e), enc),
                    hyp_pred=None,
                    goal_pred=inv.at(e),
                    hyp_location=None,
                    goal_location=e,
                    origin_routes=routes,
                )
            )

    obligations.append(
        CheckObligation(
            id=obligation_id(IMPLICATION, None, {"location": str(prop.location)}),
            kind=IMPLICATION,
            edge=None,
            direction=None,
            hypothesis=encode_predicate(inv.at(prop.location), enc),
            goal=encode_predicate(prop.pred, enc),
            hyp_pred=inv.at(prop.location),
            goal_pred=prop.pred,
            hyp_location=prop.location,
            goal_location=prop.location,
        )
    )
    return obligations


# ---------------------------------------------------------------------------
# Discharge


def _concrete_transfer(ob: CheckObligation, r: Route) -> Optional[Route]:
    out = model.apply_route_map(ob.route_map, r)
    if out is None:
        return None
    return model.apply_ghost_effects(ob.ghosts, ob.edge, ob.direction, out)


def _validate_fail_witnesses(ob: CheckObligation, pre: Witness, post: Witness):
    if not model.eval_predicate(ob.hyp_pred, pre.route):
        raise RuntimeError("internal: failure pre-witness does not satisfy the hypothesis")
    out = _concrete_transfer(ob, pre.route)
    if out != post.route:
        raise RuntimeError("internal: concrete transfer of pre-witness disagrees with post-witness")
    if model.eval_predicate(ob.goal_pred, post.route):
        raise RuntimeError("internal: failure post-witness satisfies the goal")


def discharge(ob: CheckObligation) -> CheckResult:
    t0 = time.perf_counter()
    failure: Optional[Failure] = None

    if ob.kind in (IMPORT, EXPORT):
        tr = transfer_route_map(ob.route_map, ob.edge, ob.direction, ob.ghosts, ob.hypothesis)
        violating = tr.result.difference(ob.goal)
        if not violating.is_empty():
            part = next(p for p in tr.parts if not p.post.intersect(violating).is_empty())
            post = part.post.intersect(violating).witness()
            pre = preimage_witness(part, post)
            _validate_fail_witnesses(ob, pre, post)
            failure = Failure(
                failure_class=LOCAL_INVARIANT,
                violated_location=ob.goal_location,
                violated_pred=ob.goal_pred,
                post_witness=post,
                pre_witness=pre,
                term_index=part.term_index,
            )
    elif ob.kind == ORIGINATE:
        for r in ob.origin_routes:
            if not model.eval_predicate(ob.goal_pred, r):
                failure = Failure(
                    failure_class=LOCAL_INVARIANT,
                    violated_location=ob.goal_location,
                    violated_pred=ob.goal_pred,
                    post_witness=Witness(route=r),
                )
                break
    elif ob.kind == IMPLICATION:
        violating = ob.hypothesis.difference(ob.goal)
        if not violating.is_empty():
            failure = Failure(
                failure_class=PROPERTY_IMPLICATION,
                violated_location=ob.goal_location,
                violated_pred=ob.goal_pred,
                post_witness=violating.witness(),
            )
    else:
        raise SpecificationError(f"unknown obligation kind {ob.kind!r}")

    return CheckResult(
        obligation=ob,
        verdict="fail" if failure else "pass",
        time_s=time.perf_counter() - t0,
        failure=failure,
    )


# ---------------------------------------------------------------------------
# Localization


def _describe_clause(c: model.MatchClause) -> str:
    return json.dumps(config.clause_to_doc(c), sort_keys=True)


def _describe_action(a: model.SetAction) -> str:
    return json.dumps(config.action_to_doc(a), sort_keys=True)


def localize(res: CheckResult, net: Network) -> str:
    """Human-readable diagnosis of a failed check."""
    if res.verdict != "fail":
        raise SpecificationError("localize called on a passing result")
    ob = res.obligation
    f = res.failure
    lines: list[str] = []
    if ob.kind == IMPLICATION:
        lines.append(
            f"invariant-vs-property gap at {model.format_location(f.violated_location)}: "
            f"the local invariant admits a route outside the property"
        )
        lines.append(f"  property: {f.violated_pred.to_dsl()}")
        lines.append(f"  witness:  {f.post_witness}")
        return "\n".join(lines)
    if ob.kind == ORIGINATE:
        lines.append(
            f"originated route on edge {ob.edge} violates the local invariant at "
            f"{model.format_location(f.violated_location)}"
        )
        lines.append(f"  invariant: {f.violated_pred.to_dsl()}")
        lines.append(f"  route:     {f.post_witness}")
        return "\n".join(lines)

    term = ob.route_map.terms[f.term_index]
    matches = ", ".join(_describe_clause(c) for c in term.matches) or "(match all)"
    actions = ", ".join(_describe_action(a) for a in term.sets) or "(no set actions)"
    lines.append(
        f"{ob.kind} check failed on edge {ob.edge}: term {f.term_index} of the "
        f"{ob.direction} route map produces a route that violates the local invariant "
        f"at {model.format_location(f.violated_location)}"
    )
    lines.append(f"  term matches:  {matches}")
    lines.append(f"  term actions:  {actions}")
    lines.append(f"  invariant:     {f.violated_pred.to_dsl()}")
    lines.append(f"  route before:  {f.pre_witness}")
    lines.append(f"  route after:   {f.post_witness}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Reports


def result_to_doc(res: CheckResult, net: Network) -> dict:
    ob = res.obligation
    doc: dict[str, Any] = {
        "id": ob.id,
        "kind": ob.kind,
        "edge": config.edge_to_doc(ob.edge) if ob.edge else None,
        "direction": ob.direction,
        "hypothesis_location": (
            model.format_location(ob.hyp_location) if ob.hyp_location is not None else None
        ),
        "goal_location": model.format_location(ob.goal_location),
        "goal_pred": ob.goal_pred.to_dsl(),
        "verdict": res.verdict,
        "time_s": res.time_s,
        "failure": None,
    }
    if res.failure is not None:
        f = res.failure
        doc["failure"] = {
            "failure_class": f.failure_class,
            "violated_location": model.format_location(f.violated_location),
            "violated_pred": f.violated_pred.to_dsl(),
            "term_index": f.term_index,
            "pre_witness": f.pre_witness.to_doc() if f.pre_witness else None,
            "post_witness": f.post_witness.to_doc(),
            "diagnostic": localize(res, net),
        }
    return doc


@dataclass(eq=False)
class VerificationReport:
    entries: tuple[dict, ...]  # one canonical dict per obligation, sorted by id
    overall: str  # "pass" | "fail"
    totals: dict
    total_check_time_s: float
    rechecked_ids: Optional[tuple[str, ...]] = None
    stale_fallback: bool = False
    results: dict[str, CheckResult] = field(default_factory=dict, repr=False)

    @property
    def passed(self) -> bool:
        return self.overall == "pass"

    def failures(self) -> list[dict]:
        return [e for e in self.entries if e["verdict"] == "fail"]

    def to_doc(self, inputs: Optional[dict] = None, meta: Optional[dict] = None) -> dict:
        doc: dict[str, Any] = {
            "overall": self.overall,
            "totals": self.totals,
            "total_check_time_s": self.total_check_time_s,
            "results": list(self.entries),
        }
        if self.rechecked_ids is not None:
            doc["rechecked_ids"] = list(self.rechecked_ids)
            doc["stale_fallback"] = self.stale_fallback
        if inputs is not None:
            doc["inputs"] = inputs
        if meta is not None:
            doc["meta"] = meta
        return doc


def extensional_view(report_doc: Mapping) -> dict:
    """Report content with timings and incremental bookkeeping stripped."""
    results = []
    for e in report_doc["results"]:
        e = dict(e)
        e.pop("time_s", None)
        results.append(e)
    return {
        "overall": report_doc["overall"],
        "totals": report_doc["totals"],
        "results": results,
    }


def _totals(entries: Sequence[dict]) -> dict:
    by_kind: dict[str, int] = {}
    failed = 0
    for e in entries:
        by_kind[e["kind"]] = by_kind.get(e["kind"], 0) + 1
        if e["verdict"] == "fail":
            failed += 1
    return {
        "obligations": len(entries),
        "passed": len(entries) - failed,
        "failed": failed,
        "by_kind": dict(sorted(by_kind.items())),
    }


def _aggregate(results: list[CheckResult], net: Network, **kw) -> VerificationReport:
    results = sorted(results, key=lambda r: r.obligation.id)
    entries = tuple(result_to_doc(r, net) for r in results)
    return VerificationReport(
        entries=entries,
        overall="pass" if all(r.verdict == "pass" for r in results) else "fail",
        totals=_totals(entries),
        total_check_time_s=sum(r.time_s for r in results),
        results={r.obligation.id: r for r in results},
        **kw,
    )


def verify(
    net: Network,
    inv: InvariantMap,
    prop: NetworkProperty,
    parallelism: int = 1,
    enc: Optional[Encoding] = None,
) -> VerificationReport:
    """Generate and discharge every obligation; deterministic apart from timings."""
    obligations = generate_checks(net, inv, prop, enc)
    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(discharge, obligations))
    else:
        results = [discharge(ob) for ob in obligations]
    return _aggregate(results, net)


# ---------------------------------------------------------------------------
# Incremental re-verification


def _needs_recheck(ob: CheckObligation, diff: NetworkDiff) -> bool:
    if ob.kind == IMPLICATION:
        return bool(
            diff.property_changed or ob.hyp_location in diff.invariant_changed_locations
        )
    e = ob.edge
    if e in diff.changed_edges or e.src in diff.changed_nodes or e.dst in diff.changed_nodes:
        return True
    if ob.hyp_location is not None and ob.hyp_location in diff.invariant_changed_locations:
        return True
    return ob.goal_location in diff.invariant_changed_locations


def incremental_recheck(
    prev: "VerificationReport | Mapping",
    diff: NetworkDiff,
    net: Network,
    inv: InvariantMap,
    prop: NetworkProperty,
    parallelism: int = 1,
    enc: Optional[Encoding] = None,
) -> VerificationReport:
    """Re-discharge only obligations touched by the diff; carry the rest over.

    Falls back to a full run (with a warning) when the previous report does
    not line up with the regenerated obligation set.
    """
    if isinstance(prev, VerificationReport):
        prev_entries = {e["id"]: e for e in prev.entries}
    else:
        prev_entries = {e["id"]: e for e in prev["results"]}

    obligations = generate_checks(net, inv, prop, enc)
    to_run = [ob for ob in obligations if _needs_recheck(ob, diff)]
    carried_obs = [ob for ob in obligations if not _needs_recheck(ob, diff)]

    carried_entries = []
    for ob in carried_obs:
        entry = prev_entries.get(ob.id)
        if entry is None:
            logger.warning(
                "stale previous report (missing obligation %s); running full verification", ob.id
            )
            report = verify(net, inv, prop, parallelism, enc)
            report.rechecked_ids = tuple(e["id"] for e in report.entries)
            report.stale_fallback = True
            return report
        carried_entries.append(entry)

    if parallelism > 1 and to_run:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            fresh = list(pool.map(discharge, to_run))
    else:
        fresh = [discharge(ob) for ob in to_run]

    fresh_entries = [result_to_doc(r, net) for r in fresh]
    entries = tuple(sorted(carried_entries + fresh_entries, key=lambda e: e["id"]))
    return VerificationReport(
        entries=entries,
        overall="pass" if all(e["verdict"] == "pass" for e in entries) else "fail",
        totals=_totals(entries),
        total_check_time_s=sum(r.time_s for r in fresh),
        rechecked_ids=tuple(sorted(r.obligation.id for r in fresh)),
        stale_fallback=False,
        results={r.obligation.id: r for r in fresh},
    )


# ---------------------------------------------------------------------------
# Text rendering


def render_text_report(report: VerificationReport, verbose: bool = False) -> str:
    lines = []
    t = report.totals
    lines.append(
        f"{t['obligations']} obligations: {t['passed']} passed, {t['failed']} failed "
        f"({report.total_check_time_s:.3f}s check time)"
    )
    if report.rechecked_ids is not None:
        lines.append(f"{len(report.rechecked_ids)} obligations re-checked")
        if report.stale_fallback:
            lines.append("warning: previous report was stale; full verification was run")
    if verbose:
        for e in report.entries:
            edge = f" {e['edge']['src']}->{e['edge']['dst']}" if e["edge"] else ""
            lines.append(f"  [{e['verdict'].upper():4}] {e['kind']}{edge} ({e['id']})")
    for e in report.failures():
        lines.append("")
        lines.append(e["failure"]["diagnostic"])
    verdict = "PASS" if report.passed else "FAIL"
    kind = (
        "all local checks and the property implication hold"
        if report.passed
        else (
            "local invariant check(s) failed"
            if any(
                e["failure"]["failure_class"] == LOCAL_INVARIANT for e in report.failures()
            )
            else "the invariants do not imply the property"
        )
    )
    lines.append("")
    lines.append(f"{verdict}: {kind}")
    return "\n".join(lines)
