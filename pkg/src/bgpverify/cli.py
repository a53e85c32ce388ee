"""Command-line front end.

Commands: ``verify`` (local checks), ``oracle`` (fixpoint ground truth with
optional trace cross-check), ``gen`` (synthetic mesh files), ``incremental``
(re-check against a previous report).  Exit codes: 0 pass/holds, 1 a check
or the property failed, 2 usage or input errors.

Reported timings cover check discharge only, never file parsing.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import checker, config, generator, model, oracle
from .errors import ConfigError, InstanceTooLargeError, SpecificationError
from .model import Route
from .symbolic import Encoding

TRACE_CROSS_CHECK_EVENTS = 4


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}")


def _load_inputs(args) -> tuple[model.Network, model.NetworkProperty, model.InvariantMap, dict]:
    net = config.parse_network(_read(args.network))
    spec_doc = json.loads(_read(args.spec))
    prop, inv, _ = config.spec_from_doc(spec_doc, net)
    return net, prop, inv, spec_doc


def _emit_report(report: checker.VerificationReport, args, inputs: dict) -> None:
    if args.format == "json":
        doc = report.to_doc(inputs=inputs, meta={"parallelism": args.jobs})
        print(json.dumps(doc, indent=2))
    else:
        print(checker.render_text_report(report, verbose=args.verbose))


def cmd_verify(args) -> int:
    net, prop, inv, spec_doc = _load_inputs(args)
    report = checker.verify(net, inv, prop, parallelism=args.jobs)
    inputs = {"network": config.network_to_doc(net), "spec": spec_doc}
    _emit_report(report, args, inputs)
    return 0 if report.passed else 1


def _default_seeds(net: model.Network, enc: Encoding) -> oracle.SeedAlphabet:
    routes = [Route(prefix=model.Prefix.parse("203.0.113.0/24"))]
    if enc.universe.communities:
        routes.append(
            Route(
                prefix=model.Prefix.parse("198.51.100.0/24"),
                communities=frozenset({enc.universe.communities[0]}),
            )
        )
    return oracle.SeedAlphabet.for_network(net, routes)


def cmd_oracle(args) -> int:
    net, prop, inv, _ = _load_inputs(args)
    enc = checker.build_encoding(net, inv, prop)
    bound = args.aspath_bound or oracle.default_aspath_bound(net)
    warnings = oracle.regex_bound_warnings(enc, [prop.pred, *inv.entries.values()], bound)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    fp = oracle.compute_fixpoint(net, bound, enc=enc)
    verdict = oracle.check_property_fixpoint(fp, prop)

    trace_doc = None
    if args.traces:
        seeds = _default_seeds(net, enc)
        events = oracle.reachable_events(net, seeds, TRACE_CROSS_CHECK_EVENTS)
        fp_seeded = oracle.compute_fixpoint(net, bound, seeds=seeds, enc=enc)
        for ev in events:
            loc = oracle.event_location(ev)
            if not fp_seeded.cover_set(loc).contains_route(ev.route):
                raise RuntimeError(
                    f"internal: trace event {ev} escapes the seeded fixpoint at {loc}"
                )
        violations = oracle.property_event_violations(net, prop, events)
        n_traces = sum(
            1 for _ in oracle.enumerate_valid_traces(net, seeds, TRACE_CROSS_CHECK_EVENTS)
        )
        trace_doc = {
            "max_events": TRACE_CROSS_CHECK_EVENTS,
            "traces_enumerated": n_traces,
            "distinct_events": len(events),
            "agreement": True,
            "violating_events": [str(ev) for ev in violations],
        }
        if violations and verdict.holds:
            raise RuntimeError("internal: trace violations contradict the fixpoint verdict")

    if args.format == "json":
        doc = {
            "verdict": "holds" if verdict.holds else "violated",
            "witness": verdict.witness.to_doc() if verdict.witness else None,
            "fixpoint": fp.dump_doc(samples=False),
            "warnings": warnings,
            "traces": trace_doc,
        }
        print(json.dumps(doc, indent=2))
    else:
        print(f"fixpoint stabilized after {fp.iterations} iterations (path bound {fp.aspath_bound})")
        if trace_doc:
            print(
                f"trace cross-check: {trace_doc['traces_enumerated']} traces, "
                f"{trace_doc['distinct_events']} distinct events, agreement confirmed"
            )
        if verdict.holds:
            print(f"property holds at {model.format_location(prop.location)}")
        else:
            print(f"property VIOLATED at {model.format_location(prop.location)}")
            print(f"  witness: {verdict.witness}")
    return 0 if verdict.holds else 1


def cmd_gen(args) -> int:
    net_doc, spec_doc = generator.generate_mesh(args.n, args.seed)
    out_network = args.out_network or f"mesh_n{args.n}_network.json"
    out_spec = args.out_spec or f"mesh_n{args.n}_spec.json"
    Path(out_network).write_text(json.dumps(net_doc, indent=2, sort_keys=True) + "\n")
    Path(out_spec).write_text(json.dumps(spec_doc, indent=2, sort_keys=True) + "\n")
    net = config.network_from_doc(net_doc)
    n_edges = len(net.topology.edges)
    n_obl = checker.expected_obligation_count(net)
    print(
        f"wrote {out_network} and {out_spec}: {args.n} routers, {args.n} externals, "
        f"{n_edges} directed edges, {n_obl} obligations"
    )
    return 0


def cmd_incremental(args) -> int:
    try:
        prev_doc = json.loads(_read(args.prev_report))
        old_net = config.network_from_doc(prev_doc["inputs"]["network"])
        old_prop, old_inv, _ = config.spec_from_doc(prev_doc["inputs"]["spec"], old_net)
    except (KeyError, TypeError):
        raise ConfigError(
            "previous report does not embed its inputs; re-run verify with --format json"
        )
    net, prop, inv, spec_doc = _load_inputs(args)
    diff = config.diff_networks(old_net, net)
    changed_locs, prop_changed = config.diff_specs(old_prop, old_inv, prop, inv)
    diff = config.NetworkDiff(
        diff.changed_nodes, diff.changed_edges, changed_locs, prop_changed
    )
    report = checker.incremental_recheck(prev_doc, diff, net, inv, prop, parallelism=args.jobs)
    inputs = {"network": config.network_to_doc(net), "spec": spec_doc}
    _emit_report(report, args, inputs)
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bgpverify",
        description="Modular BGP control-plane verifier with a fixpoint oracle.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, need_inputs=True):
        if need_inputs:
            p.add_argument("--network", required=True, help="network JSON file")
            p.add_argument("--spec", required=True, help="spec JSON file")
        p.add_argument("--jobs", type=int, default=1, help="parallel check workers")
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--aspath-bound", type=int, default=None)
        p.add_argument("--verbose", action="store_true", help="list every obligation")

    p_verify = sub.add_parser("verify", help="generate and discharge all local checks")
    add_common(p_verify)
    p_verify.set_defaults(func=cmd_verify)

    p_oracle = sub.add_parser("oracle", help="fixpoint ground truth for the property")
    add_common(p_oracle)
    p_oracle.add_argument(
        "--traces", action="store_true", help="also run the bounded trace cross-check"
    )
    p_oracle.set_defaults(func=cmd_oracle)

    p_gen = sub.add_parser("gen", help="generate a synthetic full-mesh network and spec")
    p_gen.add_argument("--n", type=int, required=True, help="number of internal routers (>= 2)")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out-network", default=None)
    p_gen.add_argument("--out-spec", default=None)
    p_gen.set_defaults(func=cmd_gen)

    p_inc = sub.add_parser("incremental", help="re-check only what a change touched")
    add_common(p_inc)
    p_inc.add_argument("--prev-report", required=True, help="JSON report of the previous run")
    p_inc.set_defaults(func=cmd_incremental)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "n", None) is not None and args.command == "gen" and args.n < 2:
        parser.error("--n must be at least 2")
    try:
        return args.func(args)
    except (ConfigError, SpecificationError, InstanceTooLargeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
