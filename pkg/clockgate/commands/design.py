"""
`design`: resolve the laser design of a config and print it with the validity checks,
the error-budget line and a re-applicable `[design]` block.
"""
import argparse

from clockgate.core.logging import logger
from clockgate.services import budget_service, config_service, design_service, report_service


def register(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser("design", help="Solve the gate design and print the validity report")
    parser.add_argument("--config", required=True, help="Run config (YAML)")
    parser.add_argument("--out", help="Write the [design] key=value block to this file")
    parser.set_defaults(handler=run)
    return parser


def run(args: argparse.Namespace) -> int:
    _, config = config_service.load_run_config(args.config)
    design = config_service.build_design(config)
    validity = design_service.validity_report(design, n_bar=config.sim.initial.n_bar)
    budget = budget_service.scenario_report(budget_service.scenario_from_design(design))
    if not validity.all_passed:
        logger.warning("design violates at least one validity check")

    print(report_service.design_report(design, validity, budget), end="")
    if args.out:
        report_service.write_text(report_service.design_block(design), args.out)
    return 0
