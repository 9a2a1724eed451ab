"""
davnsim command line.

    davnsim analyze-queue [--vehicles N] [--validate N] [--note PATH]
    davnsim gen-trajectory [--out PATH]
    davnsim simulate [--density 40,80,120] [--check]

Every configuration key is also a flag (`paper_moments` -> `--paper-moments`);
flags win over DAVN_* environment variables, which win over --config FILE.
Exit codes: 0 success, 1 configuration/input/I/O error, 2 model-domain error.
"""

import argparse
import logging
import sys
import typing
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from . import __version__
from .core.errors import InputError, ModelDomainError
from .core.queue_simulator import discrepancy_report, simulate_priority_queue, write_note
from .core.queueing import analyze_priority_queue, build_arrivals, class_specs
from .core.scenario_engine import validate_dataset
from .core.settings_manager import SettingsManager, field_index
from .core.sweep_service import SweepService
from .core.trajectory import export_trajectory, generate_fleet

logger = logging.getLogger("davnsim")

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

EXIT_OK, EXIT_INPUT, EXIT_DOMAIN = 0, 1, 2


# --- Flags generated from the configuration model ---

def _shape(annotation) -> str:
    """bool, list, pairs (list of tuples) or scalar."""
    args = [a for a in typing.get_args(annotation) if a is not type(None)]
    if typing.get_origin(annotation) is typing.Union and len(args) == 1:
        annotation = args[0]
    if annotation is bool:
        return "bool"
    if typing.get_origin(annotation) in (list, List):
        inner = typing.get_args(annotation)
        if inner and typing.get_origin(inner[0]) is tuple:
            return "pairs"
        return "list"
    return "scalar"


def _is_optional(annotation) -> bool:
    return typing.get_origin(annotation) is typing.Union and type(None) in typing.get_args(annotation)


def _help(info) -> str:
    default = info.get_default(call_default_factory=True)
    text = info.title or info.description or ""
    return f"{text} (default: {default})".strip().replace("%", "%%")


def add_config_flags(parser: argparse.ArgumentParser) -> None:
    groups: Dict[str, Any] = {}
    for key, (section, info) in field_index().items():
        group = groups.setdefault(section, parser.add_argument_group(f"[{section}]"))
        flag = "--" + key.replace("_", "-")
        shape = _shape(info.annotation)
        if shape == "bool":
            group.add_argument(flag, dest=key, action=argparse.BooleanOptionalAction,
                               default=argparse.SUPPRESS, help=_help(info))
        else:
            metavar = {"list": "A,B,...", "pairs": "A:B,...", "scalar": None}[shape]
            group.add_argument(flag, dest=key, default=argparse.SUPPRESS, metavar=metavar, help=_help(info))


def parse_flag_value(key: str, raw: Any) -> Any:
    """CLI string -> value pydantic can validate for `key`."""
    if not isinstance(raw, str):
        return raw
    info = field_index()[key][1]
    if _is_optional(info.annotation) and raw.strip().lower() in ("", "none"):
        return None
    shape = _shape(info.annotation)
    if shape == "list":
        return [item.strip() for item in raw.split(",") if item.strip()]
    if shape == "pairs":
        return [[part.strip() for part in item.split(":")] for item in raw.split(",") if item.strip()]
    return raw


def collect_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    keys = field_index()
    return {k: parse_flag_value(k, v) for k, v in vars(args).items() if k in keys}


# --- Subcommands ---

def cmd_analyze_queue(args: argparse.Namespace, manager: SettingsManager) -> int:
    settings = manager.settings
    lambda_1, lambda_2 = build_arrivals(args.vehicles, settings.queue)
    high, low = class_specs(lambda_1, lambda_2, settings.queue)
    analysis = analyze_priority_queue(high, low)

    print(f"vehicles           {args.vehicles}")
    print(f"lambda_1, lambda_2 {lambda_1:.6g}, {lambda_2:.6g} 1/s")
    print(f"E[B1], E[B2]       {high.mean_service:.6g}, {low.mean_service:.6g} s")
    print(f"rho_1, rho_2, rho  {analysis.high.occupation:.6g}, {analysis.low.occupation:.6g}, {analysis.occupation:.6g}")
    print(f"E[W1]              {analysis.high.wait:.6g} s")
    print(f"E[S1]              {analysis.high.sojourn:.6g} s")
    print(f"E[W2]              {analysis.low.wait:.6g} s")
    print(f"E[S2]              {analysis.low.sojourn:.6g} s")
    print(f"E[S2] classical    {analysis.sojourn_low_classical:.6g} s")

    if args.validate:
        des = simulate_priority_queue(high, low, args.validate, settings.run.seed)
        note = discrepancy_report(analysis, des, args.tolerance)
        print()
        print(note.to_text(), end="")
        if args.note:
            write_note(note, args.note)
            logger.info(f"Discrepancy note written to {args.note}")
    return EXIT_OK


def cmd_gen_trajectory(args: argparse.Namespace, manager: SettingsManager) -> int:
    settings = manager.settings
    ellipses, trajectories = settings.fleet()
    fleet = generate_fleet(trajectories, ellipses, settings.run.steps, settings.run.seed)
    out = Path(args.out) if args.out else Path(settings.run.output_dir) / "trajectory.csv"
    export_trajectory(fleet, out)
    logger.info(f"Trajectory of {len(fleet)} UAVs x {settings.run.steps} steps written to {out}")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace, manager: SettingsManager) -> int:
    settings = manager.settings
    manager.save_settings(Path(settings.run.output_dir) / "effective_config.json")
    members = SweepService(settings).run(
        callback=lambda kind, payload: logger.info(payload) if kind == "status" else None
    )
    if args.check:
        failed = False
        for member in members:
            report = validate_dataset(member.dataset_path, uavs=len(settings.uav.ellipse_centers))
            if not report.ok:
                failed = True
                for error in report.errors:
                    print(f"{member.dataset_path}: {error}", file=sys.stderr)
        if failed:
            return EXIT_INPUT
    return EXIT_OK


COMMANDS = {
    "analyze-queue": cmd_analyze_queue,
    "gen-trajectory": cmd_gen_trajectory,
    "simulate": cmd_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="TOML configuration file")
    add_config_flags(common)

    parser = argparse.ArgumentParser(prog="davnsim", description="Drone-assisted vehicular network dataset simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze-queue", parents=[common], help="closed-form queue analysis")
    analyze.add_argument("--vehicles", type=int, default=10, help="vehicles served by the UAV (default: 10)")
    analyze.add_argument("--validate", type=int, default=0, metavar="N",
                         help="also run the discrete-event simulation for N arrivals")
    analyze.add_argument("--tolerance", type=float, default=0.05, help="relative error flagged in the note")
    analyze.add_argument("--note", type=Path, default=None, help="write the discrepancy note to PATH")

    trajectory = sub.add_parser("gen-trajectory", parents=[common], help="write UAV trajectories")
    trajectory.add_argument("--out", type=Path, default=None, help="output CSV (default: OUTPUT_DIR/trajectory.csv)")

    simulate = sub.add_parser("simulate", parents=[common], help="generate datasets over the density sweep")
    simulate.add_argument("--check", action=argparse.BooleanOptionalAction, default=False,
                          help="validate every written dataset")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        manager = SettingsManager.load(args.config, collect_overrides(args))
        logging.basicConfig(level=manager.get("run.log_level", "INFO"), format=LOG_FORMAT)
        return COMMANDS[args.command](args, manager)
    except ModelDomainError as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except (InputError, ValidationError, OSError) as e:
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
