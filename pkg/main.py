# main.py
import argparse
import logging
import sys

from src import cli, settings
from src.exceptions import CtrPlacementError, UsageError


def setup_logging(debug: bool):
    """Configure logging globally."""
    level = logging.DEBUG if debug else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    )

    for noisy in ["openpyxl"]:
        logging.getLogger(noisy).setLevel(logging.WARNING)


def _leader(value: str):
    if value == "sweep":
        return value
    try:
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an index or 'sweep', got {value!r}")


def _intList(value: str):
    try:
        return [int(v) for v in value.replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {value!r}")


def _nSwRange(value: str):
    low, sep, high = value.partition("..")
    try:
        return (int(low), int(high)) if sep else (int(low), int(low))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or LOW..HIGH, got {value!r}")


def buildParser(defaults: dict) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--topology", type=str, help="Path to a GraphML or JSON topology")
    common.add_argument("--controllers", type=int, default=3, help="Number of controllers C")
    common.add_argument("--algo", choices=cli.ALGORITHMS, default="exa", help="Pareto search algorithm")
    common.add_argument("--iterations", type=int, default=50, help="i_max for rnd/evo")
    common.add_argument("--seed", type=int, default=0, help="Seed of the first run")
    common.add_argument("--seeds", type=int, default=1, help="Number of consecutive seeds to average over")
    common.add_argument("--model", choices=cli.MODELS, default="sdo", help="Consistency model for traces")
    common.add_argument("--leader", type=_leader, default="sweep", help="Leader index or 'sweep'")
    common.add_argument("--tc-ms", type=float, help="Controller processing time t_c, overrides the scenario value")
    common.add_argument("--speed-kmms", type=float, default=defaults["propagationSpeedKmPerMs"],
                        help="Propagation speed used for geographic latencies")
    common.add_argument("--majority-rule", choices=("paper", "raft"), default=defaults["majorityRule"])
    common.add_argument("--scatter", action="store_true", help="Also write every enumerated placement")
    common.add_argument("--trace", type=str, help="Write the simulated message trace as JSON lines")
    common.add_argument("--out", type=str, default=defaults["outputDir"], help="Report directory")
    common.add_argument("--excel", action="store_true", help="Also export reports as .xlsx")
    common.add_argument("--workers", type=int, default=1, help="Processes for exact enumeration")
    common.add_argument("--debug", action="store_true", help="Enable debug logging")

    parser = argparse.ArgumentParser(description="SDN controller placement and reaction-time toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("frontier", parents=[common], help="Pareto frontier of placements")

    errors = sub.add_parser("errors", parents=[common], help="rnd/evo frontier errors against exa")
    errors.add_argument("--imax", type=_intList, default=[], help="Comma-separated iteration counts")
    errors.add_argument("--strict", action="store_true", help="Fail instead of comparing means above the cap")

    react = sub.add_parser("react", parents=[common], help="Reaction times and owner sweeps")
    react.add_argument("--placement", type=_intList, help="Single placement, e.g. 0,3,7")
    react.add_argument("--switch", type=int, default=0, help="Switch whose update is traced")

    scenario = sub.add_parser("scenario", parents=[common], help="Testbed flow-setup scenarios")
    scenario.add_argument("--scenario", type=str, required=True, help="TT, TMC, TMF, TPC or TPF")
    scenario.add_argument("--nsw", type=_nSwRange, default=(3, 36), help="Switch counts, N or LOW..HIGH")

    compare = sub.add_parser("compare", parents=[common], help="Ctr-Ctr reduction across topologies")
    compare.add_argument("--topologies", nargs="+", default=[], help="Topology files")
    compare.add_argument("--controllers-list", type=_intList, default=[3, 4], help="Controller counts")

    return parser


def toRunConfig(args: argparse.Namespace, defaults: dict) -> cli.RunConfig:
    return cli.RunConfig(
        topology=args.topology,
        controllers=args.controllers,
        algorithm=args.algo,
        iterations=args.iterations,
        seed=args.seed,
        seeds=args.seeds,
        model=args.model,
        leader=args.leader,
        tcMs=args.tc_ms,
        speed=args.speed_kmms,
        majorityRule=args.majority_rule,
        outDir=args.out,
        cap=defaults["enumerationCap"],
        scatter=args.scatter,
        trace=args.trace,
        excel=args.excel,
        workers=args.workers,
        strict=getattr(args, "strict", False),
        placement=tuple(args.placement) if getattr(args, "placement", None) else None,
        switch=getattr(args, "switch", 0),
        iMaxList=getattr(args, "imax", []),
        scenario=getattr(args, "scenario", None),
        nSwRange=getattr(args, "nsw", (3, 36)),
        topologies=getattr(args, "topologies", []),
        controllersList=getattr(args, "controllers_list", [3, 4]),
    )


COMMANDS = {
    "frontier": cli.cmdFrontier,
    "errors": cli.cmdErrors,
    "react": cli.cmdReact,
    "scenario": cli.cmdScenario,
    "compare": cli.cmdCompare,
}


def main(argv=None) -> int:
    defaults = settings.loadDefaults()
    parser = buildParser(defaults)
    args = parser.parse_args(argv)

    setup_logging(args.debug)

    try:
        cfg = toRunConfig(args, defaults)
        summary = COMMANDS[args.command](cfg)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"error: {e}", file=sys.stderr)
        return e.exitCode
    except CtrPlacementError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exitCode

    if args.command == "frontier":
        print(f"Frontier has {summary['frontier_size']} points")
        print(f"Extreme gains: Sw-Ctr x{summary['sw_ratio']}, Ctr-Ctr x{summary['cc_ratio']}")
    else:
        print(", ".join(f"{k}={v}" for k, v in summary.items()))
    return 0


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\nInterrupted by user, exiting.")
        sys.exit(0)
