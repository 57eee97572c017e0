"""Command-line front end: design, analyze, tradeoff, reproduce and scenario commands.

Budgets are stored in nats. ``--log-base 2`` reads --eps in bits and prints leakage in bits.
"""

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from dotenv import load_dotenv
from pydantic import ValidationError

from pml_design.bootstrap import get_artifact_repository, get_optimizer, get_scenario_repository
from pml_design.entities import CliConfig, LeakageReport, PriorPattern, ToolkitConfig
from pml_design.errors import SolverNumericalError
from pml_design.services.experiments import (
    counting_query_scenario,
    curve_to_frame,
    cyclic_scenario,
    example1_scenario,
    experiment_metadata,
    fig1_run,
    fig2_run,
    fig3_run,
    fig_tables_to_frame,
)
from pml_design.services.feasibility import build_program, program_document
from pml_design.services.leakage import leakage_report
from pml_design.services.structure import check_shapes
from pml_design.structured_logging import RunContext, configure_structlog, get_logger

from .error_handlers import EXIT_OK, ErrorHandler

load_dotenv()

logger = get_logger("CLI")


def _to_display(value: float, log_base: str) -> float:
    return value / math.log(2.0) if log_base == "2" else value


def _unit(log_base: str) -> str:
    return "bits" if log_base == "2" else "nats"


def _emit(payload: dict[str, Any]) -> None:
    print(json.dumps(payload, sort_keys=True))


def _report_payload(report: LeakageReport, log_base: str) -> dict[str, Any]:
    payload = report.model_dump(mode="json")
    payload["worst_case"] = _to_display(report.worst_case, log_base)
    for record in payload["per_output"]:
        for key in ("pml", "support_term", "residual_term"):
            record[key] = _to_display(record[key], log_base)
    payload["unit"] = _unit(log_base)
    return payload


def cmd_design(config: CliConfig, toolkit: ToolkitConfig) -> int:
    assert config.scenario_path is not None
    scenario = get_scenario_repository().read_scenario(config.scenario_path)
    optimizer = get_optimizer(toolkit, tol=config.tol, prune=config.prune, workers=config.workers)
    if config.eps is not None:
        eps = config.eps * math.log(2.0) if config.log_base == "2" else config.eps
        point = optimizer.max_h_for_budget(scenario.prior, scenario.order, eps, config.mode)
    else:
        assert config.h is not None
        point = optimizer.min_epsilon(scenario.prior, scenario.order, config.h, config.mode)
    assert point.witness is not None

    report = leakage_report(scenario.prior, point.witness, scenario.order, scenario.values)
    artifacts = get_artifact_repository(config.out)
    get_scenario_repository().write_mechanism(point.witness, config.out / "mechanism.json")
    artifacts.write_report(report, "report.json")
    if config.dump_program:
        prog = build_program(scenario.prior, scenario.order, point.h, point.min_eps, prune=config.prune)
        artifacts.write_document(program_document(prog), "program.json")

    _emit(
        {
            "h": point.h,
            "mode": point.mode,
            "min_eps": _to_display(point.min_eps, config.log_base),
            "worst_case": _to_display(report.worst_case, config.log_base),
            "worst_case_value": report.worst_case_value,
            "unit": _unit(config.log_base),
        }
    )
    return EXIT_OK


def cmd_analyze(config: CliConfig, toolkit: ToolkitConfig) -> int:
    assert config.scenario_path is not None and config.mechanism_path is not None
    repo = get_scenario_repository()
    scenario = repo.read_scenario(config.scenario_path)
    mech = repo.read_mechanism(config.mechanism_path)
    check_shapes(mech, scenario.shape, "scenario")
    report = leakage_report(scenario.prior, mech, scenario.order, scenario.values)
    _emit(_report_payload(report, config.log_base))
    return EXIT_OK


def cmd_tradeoff(config: CliConfig, toolkit: ToolkitConfig) -> int:
    assert config.scenario_path is not None
    scenario = get_scenario_repository().read_scenario(config.scenario_path)
    optimizer = get_optimizer(toolkit, tol=config.tol, prune=config.prune, workers=config.workers)
    points = optimizer.tradeoff_curve(scenario.prior, scenario.order, config.mode)

    witness_files: dict[int, str] = {}
    for point in points:
        if point.witness is not None:
            name = f"witness_h{point.h}.json"
            get_scenario_repository().write_mechanism(point.witness, config.out / name)
            witness_files[point.h] = name

    frame = curve_to_frame(points, witness_files)
    path = get_artifact_repository(config.out).write_table(frame, f"tradeoff_{config.mode}.csv")
    display = frame
    if config.log_base == "2":
        bits = frame["min_eps_nats"].map(lambda v: _to_display(v, config.log_base))
        display = frame.assign(min_eps_nats=bits).rename(columns={"min_eps_nats": "min_eps_bits"})
    print(display.to_csv(index=False, float_format="%.6f", lineterminator="\n"), end="")
    logger.info("Trade-off curve written", path=str(path), points=len(points))

    if points and all(point.failed for point in points):
        return ErrorHandler.handle_numerical_error(
            SolverNumericalError("every trade-off point failed"), "tradeoff", mode=config.mode
        )
    return EXIT_OK


def cmd_reproduce(config: CliConfig, toolkit: ToolkitConfig) -> int:
    figure = config.figure
    workers = config.workers or toolkit.curve_workers
    artifacts = get_artifact_repository(config.out)
    tolerances = {
        "bisection_tol": config.tol,
        "feasibility_tol": toolkit.feasibility_tol,
        "witness_tol": toolkit.witness_tol,
        "zero_snap_tol": toolkit.zero_snap_tol,
    }

    if figure == "fig1":
        frame = fig_tables_to_frame(fig1_run(trials=config.trials, seed=config.seed, workers=workers))
    else:
        optimizer = get_optimizer(toolkit, tol=config.tol, prune=config.prune)
        run = fig2_run if figure == "fig2" else fig3_run
        frame = fig_tables_to_frame(run(optimizer=optimizer, workers=workers))

    path = artifacts.write_table(frame, f"{figure}.csv")
    artifacts.write_document(
        experiment_metadata(str(figure), config.seed, config.trials, tolerances, toolkit.artifact_version),
        f"{figure}.json",
    )
    _emit({"figure": figure, "rows": len(frame), "path": str(path)})
    return EXIT_OK


def cmd_scenario(config: CliConfig, toolkit: ToolkitConfig) -> int:
    if config.builtin == "counting":
        scenario = counting_query_scenario()
    elif config.builtin == "cyclic":
        scenario = cyclic_scenario(PriorPattern(kind="uniform"))
    else:
        scenario = example1_scenario()
    path = get_scenario_repository().write_scenario(scenario, config.out / f"{config.builtin}.json")
    _emit({"scenario": config.builtin, "path": str(path)})
    return EXIT_OK


COMMANDS = {
    "design": cmd_design,
    "analyze": cmd_analyze,
    "tradeoff": cmd_tradeoff,
    "reproduce": cmd_reproduce,
    "scenario": cmd_scenario,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pml-design",
        description="Design and analyze PML mechanisms with worst-case utility guarantees",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  pml-design scenario counting --out scenarios
  pml-design design --scenario scenarios/counting.json --eps 1.0 --mode safe --out run
  pml-design design --scenario scenarios/counting.json --h 3 --mode optimal --dump-program --out run
  pml-design analyze --scenario scenarios/counting.json --mechanism run/mechanism.json
  pml-design tradeoff --scenario scenarios/counting.json --mode optimal
  pml-design reproduce fig2 --out results
        """,
    )
    commands = parser.add_subparsers(dest="command", required=True)

    def common(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--out", type=Path, default=Path("."), help="Output directory (default: current)")
        sub.add_argument("--log-base", choices=["e", "2"], default="e", help="Display unit: e (nats) or 2 (bits)")

    def optimizer_flags(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--mode", choices=["safe", "optimal"], default="safe")
        sub.add_argument("--tol", type=float, default=1e-6, help="Bisection tolerance in nats")
        sub.add_argument("--no-prune", dest="prune", action="store_false", help="Disable column pruning")
        sub.add_argument("--workers", type=int, default=None, help="Worker threads for curve points")

    design = commands.add_parser("design", help="Design a mechanism for a budget or a utility threshold")
    design.add_argument("--scenario", dest="scenario_path", type=Path)
    budget = design.add_mutually_exclusive_group()
    budget.add_argument("--eps", type=float, help="PML budget; report the best worst-case order")
    budget.add_argument("--h", type=int, help="Utility order threshold; report the least PML budget")
    design.add_argument(
        "--dump-program", action="store_true", help="Also write the feasibility program at the reported point"
    )
    optimizer_flags(design)
    common(design)

    analyze = commands.add_parser("analyze", help="Leakage report for a mechanism file")
    analyze.add_argument("--scenario", dest="scenario_path", type=Path)
    analyze.add_argument("--mechanism", dest="mechanism_path", type=Path)
    common(analyze)

    tradeoff = commands.add_parser("tradeoff", help="Least PML budget for every utility threshold")
    tradeoff.add_argument("--scenario", dest="scenario_path", type=Path)
    optimizer_flags(tradeoff)
    common(tradeoff)

    reproduce = commands.add_parser("reproduce", help="Regenerate a figure table")
    reproduce.add_argument("figure", choices=["fig1", "fig2", "fig3"])
    reproduce.add_argument("--seed", type=int, default=0)
    reproduce.add_argument("--trials", type=int, default=1000)
    optimizer_flags(reproduce)
    common(reproduce)

    scenario = commands.add_parser("scenario", help="Write a built-in scenario file")
    scenario.add_argument("builtin", choices=["counting", "cyclic", "example1"])
    common(scenario)

    return parser


def parse_config(argv: Optional[Sequence[str]] = None) -> CliConfig:
    args = build_parser().parse_args(argv)
    fields = {key: value for key, value in vars(args).items() if value is not None}
    return CliConfig(**fields)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command and return its exit code."""
    with RunContext() as run_id:
        try:
            config = parse_config(argv)
        except ValidationError as err:
            print(f"error: {err.errors()[0]['msg']}", file=sys.stderr)
            return ErrorHandler.handle_validation_error(err)

        with RunContext(run_id=run_id, command=config.command):
            logger.info("Command started", command=config.command)
            try:
                return COMMANDS[config.command](config, ToolkitConfig())
            except Exception as err:
                print(f"error: {err}", file=sys.stderr)
                return ErrorHandler.exit_code(err, config.command)


def main() -> None:
    configure_structlog()
    sys.exit(run())


if __name__ == "__main__":
    main()
