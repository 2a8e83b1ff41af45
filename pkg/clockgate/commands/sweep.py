"""
`sweep`: one CSV row per value of a dotted config parameter.
"""
import argparse

from clockgate.constants.enums import ModelTier
from clockgate.services import config_service, report_service, sweep_service


def register(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser("sweep", help="Sweep one config parameter and write CSV")
    parser.add_argument("--config", required=True, help="Base run config (YAML)")
    parser.add_argument("--sweep", required=True, help="Sweep specification (YAML)")
    parser.add_argument("--tier", choices=[t.value for t in ModelTier.all_types()], help="Override sim.tier")
    parser.add_argument("--echo", action="store_true", help="Use the spin-echo schedule")
    parser.add_argument("--workers", type=int, help="Worker threads (default: available cores)")
    parser.add_argument("--out", help="Write the CSV to this file instead of stdout")
    parser.set_defaults(handler=run)
    return parser


def run(args: argparse.Namespace) -> int:
    raw, _ = config_service.load_run_config(args.config)
    spec = config_service.load_sweep_spec(args.sweep)
    tier = ModelTier(args.tier) if args.tier else None
    frame = sweep_service.run_sweep(raw, spec, tier=tier, echo=True if args.echo else None, workers=args.workers)
    text = report_service.emit(report_service.frame_to_csv(frame), args.out)
    if text is not None:
        print(text, end="")
    return 0
