"""
`budget`: spontaneous-emission budget for the built-in encodings or a config.
"""
import argparse

from clockgate.services import budget_service, config_service, report_service


def register(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser("budget", help="Print the spontaneous-emission budget")
    parser.add_argument("--config", help="Scenario list (`scenarios:`) or a run config; built-ins otherwise")
    parser.add_argument("--out", help="Write the budget as CSV to this file")
    parser.set_defaults(handler=run)
    return parser


def load_scenarios(path):
    if path is None:
        return budget_service.load_builtin_scenarios()
    raw = config_service.load_yaml(path)
    if "scenarios" in raw:
        return budget_service.parse_scenarios(raw["scenarios"])
    design = config_service.build_design(config_service.parse_run_config(raw))
    return [budget_service.scenario_from_design(design)]


def run(args: argparse.Namespace) -> int:
    reports = budget_service.budget_report(load_scenarios(args.config))
    print(report_service.budget_table(reports), end="")
    if args.out:
        report_service.write_text(report_service.frame_to_csv(report_service.budget_frame(reports)), args.out)
    return 0
