import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

# Dynamically adjust path to import the sisnet package
# Assuming runner/cli.py is run from the project root (e.g., python -m runner.cli)
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, project_root)

try:
    from sisnet import settings
    from sisnet.errors import ScenarioError, StateSpaceTooLarge
    from sisnet.exports import write_csv
    from runner.harness import (
        EXACT_CHAIN,
        MDP,
        METHODS,
        TRANSNN,
        TRANSNN_CONTROL,
        RunOptions,
        benchmark,
        run_scenario,
    )
except ImportError as e:
    print(f"Error importing sisnet modules: {e}")
    print("Ensure the script is run correctly relative to the project structure, e.g., using 'python -m runner.cli'")
    sys.exit(1)

logger = logging.getLogger(__name__)

# Exit codes
EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_WARNINGS = 3

DEFAULT_SCENARIO = "data/scenarios/five_node.json"

COMMAND_METHODS = {
    "simulate": (EXACT_CHAIN,),
    "bound-check": (EXACT_CHAIN, TRANSNN),
    "solve-mdp": (MDP,),
    "solve-transnn": (TRANSNN_CONTROL,),
    "compare": METHODS,
}


def configure_logging() -> None:
    # Ensure logs directory exists
    os.makedirs(settings.LOG_DIR, exist_ok=True)
    # Configure logging to file and console
    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL, logging.INFO),
        format='%(asctime)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(os.path.join(settings.LOG_DIR, 'sisnet.log'), mode='a', encoding='utf-8'),
            logging.StreamHandler()
        ]
    )


def _int_list(value: str) -> List[int]:
    try:
        items = [int(v) for v in value.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got '{value}'")
    if not items:
        raise argparse.ArgumentTypeError("list must not be empty")
    return items


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="SIS epidemic simulation, mean-field bounds and vaccination control.")
    sub = parser.add_subparsers(dest='command', required=True)

    for name, help_text in (
        ("simulate", "Monte Carlo marginals and sample trajectories of the exact chain"),
        ("bound-check", "Check the mean-field iterates against Monte Carlo and exact marginals"),
        ("solve-mdp", "Solve the exact vaccination MDP and simulate its policy"),
        ("solve-transnn", "Solve the TransNN vaccination schedule by forward-backward sweep"),
        ("compare", "Run all four methods and compare actions, costs and times"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument('--scenario', type=str, default=DEFAULT_SCENARIO, help=f"Scenario JSON file (default: {DEFAULT_SCENARIO})")
        p.add_argument('--out', type=str, default=None, help="Run output directory (default: <SISNET_OUTPUT_DIR>/<scenario>_<command>)")
        p.add_argument('--seed', type=int, default=None, help="Override the scenario seed")
        p.add_argument('--trials', type=int, default=None, help=f"Monte Carlo trials (default: {settings.DEFAULT_TRIALS})")
        p.add_argument('--max-iters', type=int, default=None, help=f"Sweep iteration limit (default: {settings.DEFAULT_MAX_ITERS})")
        p.add_argument('--skip-mdp', action='store_true', help="Do not run the MDP solver")
        p.add_argument('--workers', type=int, default=None, help=f"Worker processes (default: {settings.WORKERS})")

    bench = sub.add_parser("bench", help="Time MDP and TransNN control over size and horizon grids")
    bench.add_argument('--sizes', type=_int_list, default=[3, 4, 5, 6], help="Comma-separated node counts (default: 3,4,5,6)")
    bench.add_argument('--horizons', type=_int_list, default=[10], help="Comma-separated horizons (default: 10)")
    bench.add_argument('--repeats', type=int, default=3, help="Timed repeats per cell (default: 3)")
    bench.add_argument('--seed', type=int, default=0, help="Seed for the generated networks (default: 0)")
    bench.add_argument('--max-iters', type=int, default=None, help="Sweep iteration limit")
    bench.add_argument('--out', type=str, default=None, help="Output directory (default: <SISNET_OUTPUT_DIR>/bench)")
    return parser


def _run_command(args: argparse.Namespace) -> int:
    if args.command == "bench":
        out_dir = Path(args.out or os.path.join(settings.OUTPUT_DIR, "bench"))
        table = benchmark(args.sizes, args.horizons, args.repeats, seed=args.seed, max_iters=args.max_iters)
        write_csv(table, out_dir / "bench.csv")
        summary = {"command": "bench", "rows": table.to_dict('records'), "output": str(out_dir)}
        logger.info(f"Run summary:\n{json.dumps(summary, indent=2, default=str)}")
        return EXIT_OK

    scenario_stem = Path(args.scenario).stem
    out_dir = args.out or os.path.join(settings.OUTPUT_DIR, f"{scenario_stem}_{args.command.replace('-', '_')}")
    options = RunOptions(
        methods=COMMAND_METHODS[args.command],
        trials=args.trials,
        max_iters=args.max_iters,
        seed=args.seed,
        skip_mdp=args.skip_mdp,
        require_mdp=args.command == "solve-mdp",
        workers=args.workers,
        out_dir=out_dir,
    )
    result = run_scenario(args.scenario, options)

    summary = {
        "command": args.command,
        "scenario": result.scenario_id,
        "seed": result.seed,
        "timing": result.timing,
        "costs": result.costs,
        "skipped": result.skipped,
        "warnings": result.warnings,
        "output": out_dir,
    }
    if result.comparison is not None:
        summary["comparison"] = {k: v for k, v in result.comparison.items() if k != "entries"}
    logger.info(f"Run summary:\n{json.dumps(summary, indent=2, default=str)}")

    if result.has_warnings:
        logger.warning(f"Completed with {len(result.warnings)} warning(s)")
        return EXIT_WARNINGS
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging()
    logger.info(f"Starting sisnet {args.command}")
    try:
        code = _run_command(args)
    except StateSpaceTooLarge as e:
        logger.error(f"State space too large: {e}")
        return EXIT_RUNTIME
    except (ScenarioError, ValueError) as e:
        logger.error(f"Validation error: {e}")
        return EXIT_VALIDATION
    except Exception as e:
        logger.exception(f"Unexpected error during {args.command}: {e}")
        return EXIT_RUNTIME
    logger.info(f"Finished sisnet {args.command} with exit code {code}")
    return code


if __name__ == "__main__":
    sys.exit(main())
