"""Command-line entry points: validate scenarios, run batches, sweep the
success matrix, serve a live session."""

import argparse
import json
import math
import sys

from .experiment import emit_metrics, run_experiment, run_matrix
from .scenario import ScenarioError, load_scenario
from .service import serve_session


def _add_override_flags(p: argparse.ArgumentParser):
    p.add_argument("--strategy", choices=("fixed-topology", "laplacian", "topo-opt"))
    p.add_argument("--metric", choices=("d_hull", "d_hull_cos", "d_los_approx"))
    p.add_argument("--r-flip", type=float, dest="r_flip")
    p.add_argument("--delta-theta-deg", type=float, dest="delta_theta_deg")
    p.add_argument("--d-los-max", type=float, dest="d_los_max")
    p.add_argument("--seed", type=int)
    p.add_argument("--max-ticks", type=int, dest="max_ticks")


def cmd_validate(args) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except ScenarioError as exc:
        print(f"INVALID: {exc}", file=sys.stderr)
        return 1
    print(
        f"OK: {scenario.name}: {len(scenario.robot_specs)} robots, "
        f"{len(scenario.world.obstacles)} obstacles, "
        f"{scenario.world.targets.shape[0]} targets"
    )
    return 0


def cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    log = run_experiment(
        scenario,
        strategy=args.strategy,
        metric=args.metric,
        r_flip=args.r_flip,
        delta_theta=math.radians(args.delta_theta_deg) if args.delta_theta_deg else None,
        d_los_max=args.d_los_max,
        seed=args.seed,
        max_ticks=args.max_ticks,
    )
    files = emit_metrics(log, args.out_dir)
    print(json.dumps(log.summary(), indent=2, sort_keys=True))
    for f in files:
        print(f"wrote {f}", file=sys.stderr)
    return 0 if log.success else 2


def cmd_matrix(args) -> int:
    scenario = load_scenario(args.scenario)
    rows = run_matrix(
        scenario,
        metrics=args.metrics.split(","),
        topo_opt=[x == "w" for x in args.topo.split(",")],
        r_flips=[float(x) for x in args.r_flips.split(",")],
        seeds=[int(x) for x in args.seeds.split(",")],
        d_los_max=args.d_los_max,
        out_dir=args.out_dir,
    )
    width = max(len(r["metric"]) for r in rows)
    for row in rows:
        mark = "ok" if row["success"] else "FAIL"
        print(
            f"{row['metric']:<{width}}  topo={'w' if row['topo_opt'] else 'w/o':<3} "
            f"r_flip={row['r_flip']:<6g} seed={row['seed']:<3} {mark}"
        )
    return 0


def cmd_serve(args) -> int:
    scenario = load_scenario(args.scenario)
    print(f"serving {scenario.name} on ws://{args.host}:{args.port}", file=sys.stderr)
    serve_session(scenario, port=args.port, host=args.host)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sightline",
        description="LoS-connectivity multi-robot simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="lint a scenario file")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="run one experiment")
    p.add_argument("scenario")
    _add_override_flags(p)
    p.add_argument("--out-dir", default="out", dest="out_dir")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("matrix", help="success matrix sweep")
    p.add_argument("scenario")
    p.add_argument("--metrics", default="d_los_approx,d_hull")
    p.add_argument("--topo", default="w,wo", help="comma list of w|wo")
    p.add_argument("--r-flips", default="150,500,1000", dest="r_flips")
    p.add_argument("--seeds", default="0,1,2,3,4")
    p.add_argument("--d-los-max", type=float, dest="d_los_max")
    p.add_argument("--out-dir", default=None, dest="out_dir")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("serve", help="live teleop session")
    p.add_argument("scenario")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
