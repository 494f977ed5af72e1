"""Command line entry point: ``ttplan <subcommand> ...``.

Exit status is 0 on success, 1 when the oracle reports a violation and 2
for usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .errors import PlannerError
from .flows import FlowRequest
from .gfh import ALPHA, N_RERUNS
from .network import Network
from .plan import plan_from_dict, plan_to_dict
from .planner import Planner, emit_subplans
from .scenario import (
    ScenarioSpec,
    build_scenario,
    check_update,
    gen_topology,
    load_scenario,
    run_sequence,
)
from .oracle.sim import simulate_plan, simulate_transition

log = logging.getLogger("ttplan")


def _read_json(path):
    with open(path) as fh:
        return json.load(fh)


def _write_json(path, data):
    if path in (None, "-"):
        json.dump(data, sys.stdout, indent=1)
        sys.stdout.write("\n")
        return
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1)


def _parse_params(items):
    params = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"expected key=value, got {item!r}")
        try:
            params[key] = json.loads(value)
        except json.JSONDecodeError:
            params[key] = value
    return params


def _load_spec(args) -> ScenarioSpec:
    data = _read_json(args.spec) if args.spec else {}
    if args.seed is not None:
        data["seed"] = args.seed
    return ScenarioSpec.from_dict(data)


def _planner_options(parser):
    parser.add_argument("--n-ub", type=int, help="candidate increment per flow and step")
    parser.add_argument("--n-path", type=int, help="candidate paths per flow")
    parser.add_argument("--n-reruns", type=int, default=N_RERUNS)
    parser.add_argument("--alpha", type=int, default=ALPHA)


# -- subcommands ------------------------------------------------------------------

def cmd_gen_topology(args) -> int:
    net = gen_topology(args.model, args.nodes, _parse_params(args.param), args.seed)
    _write_json(args.output, net.to_dict())
    return 0


def cmd_gen_scenario(args) -> int:
    _write_json(args.output, build_scenario(_load_spec(args)))
    return 0


def cmd_run_sequence(args) -> int:
    if args.scenario:
        spec, net, steps = load_scenario(_read_json(args.scenario))
    else:
        spec = _load_spec(args)
        data = build_scenario(spec)
        spec, net, steps = load_scenario(data)
    os.makedirs(args.out_dir, exist_ok=True)
    result = run_sequence(
        net, steps,
        n_ub=args.n_ub or spec.n_ub,
        n_path=args.n_path or spec.n_path,
        mode=args.mode,
        alpha=args.alpha,
        n_reruns=args.n_reruns,
        validate=not args.no_validate,
        out_dir=args.out_dir,
        timing=not args.no_timing,
    )
    print(f"{len(result.rows)} steps, {result.total_rejected} rejected, "
          f"stats in {os.path.join(args.out_dir, 'stats.csv')}")
    if result.failures:
        print(f"{len(result.failures)} oracle violations, see "
              f"{os.path.join(args.out_dir, 'violations.json')}", file=sys.stderr)
        return 1
    return 0


def cmd_plan_step(args) -> int:
    net = Network.load(args.topology)
    opts = {"n_reruns": args.n_reruns, "alpha": args.alpha}
    if args.n_ub:
        opts["n_ub"] = args.n_ub
    if args.n_path:
        opts["n_path"] = args.n_path
    if args.plan:
        doc = _read_json(args.plan)
        opts.setdefault("n_path", int(doc.get("n_path", 3)))
        planner = Planner.restore(net, plan_from_dict(net, doc), **opts)
    else:
        planner = Planner(net, **opts)
    req = _read_json(args.requests)
    add = [FlowRequest.from_dict(r) for r in req.get("add", [])]
    update = planner.process_request(add, req.get("remove", []), req.get("ready"))
    problems = check_update(net, update) if args.validate else []
    subplans = emit_subplans(update.plan, net, update.previous)
    doc = plan_to_dict(update.plan, update.reconfigured, subplans, planner.n_path)
    doc["step"] = {k: v for k, v in update.stats_row(0, not args.no_timing).items() if k != "step"}
    doc["step"].update(admitted=update.admitted, rejected=update.rejected)
    _write_json(args.output, doc)
    for msg in problems:
        print(f"violation: {msg}", file=sys.stderr)
    return 1 if problems else 0


def cmd_validate(args) -> int:
    net = Network.load(args.topology)
    plan = plan_from_dict(net, _read_json(args.plan))
    problems = [f"conflict {a} / {b}" for a, b in plan.conflicts()]
    problems += [f"queuing: {v}" for v in simulate_plan(net, plan)]
    if args.previous:
        old = plan_from_dict(net, _read_json(args.previous))
        report = simulate_transition(net, old, plan)
        problems += [f"transition: {v}" for v in report.violations]
    report_doc = {"plan": args.plan, "clean": not problems, "violations": problems}
    if args.report:
        _write_json(args.report, report_doc)
    if problems:
        for msg in problems[:20]:
            print(msg, file=sys.stderr)
        return 1
    print(f"{args.plan}: clean ({len(plan.configs)} flows)")
    return 0


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ttplan", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-topology", help="generate a network")
    p.add_argument("--model", default="ring", choices=["ring", "erdos-renyi", "waxman", "price"])
    p.add_argument("--nodes", type=int, default=16)
    p.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="model parameter, e.g. k=2, p=0.3, alpha=0.4, m=1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_gen_topology)

    p = sub.add_parser("gen-scenario", help="generate topology plus request sequence")
    p.add_argument("--spec", help="scenario spec JSON (defaults otherwise)")
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_gen_scenario)

    p = sub.add_parser("run-sequence", help="plan and validate a whole request sequence")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--scenario", help="scenario JSON from gen-scenario")
    src.add_argument("--spec", help="scenario spec JSON, generated on the fly")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--mode", choices=["offensive", "defensive"], default="offensive")
    p.add_argument("--no-validate", action="store_true", help="skip the packet simulator")
    p.add_argument("--no-timing", action="store_true",
                   help="write runtime_ms as 0 so the CSV is reproducible byte for byte")
    _planner_options(p)
    p.set_defaults(func=cmd_run_sequence)

    p = sub.add_parser("plan-step", help="process one request against a saved plan")
    p.add_argument("--topology", required=True)
    p.add_argument("--plan", help="current plan JSON (omit for an empty network)")
    p.add_argument("--requests", required=True,
                   help='JSON {"add": [...], "remove": [...], "ready": optional}')
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--validate", action="store_true", help="run the oracle on the result")
    p.add_argument("--no-timing", action="store_true")
    _planner_options(p)
    p.set_defaults(func=cmd_plan_step)

    p = sub.add_parser("validate", help="check a plan (and its transition) by simulation")
    p.add_argument("--topology", required=True)
    p.add_argument("--plan", required=True)
    p.add_argument("--previous", help="plan active before this one")
    p.add_argument("--report", help="write a JSON violation report here")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (PlannerError, ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"ttplan: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
