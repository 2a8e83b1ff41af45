"""
`simulate`: run the designed gate on one model tier and report phases and fidelities.
"""
import argparse
import time

from clockgate.constants.enums import ModelTier
from clockgate.core.logging import logger
from clockgate.services import analysis_service, config_service, dynamics_service, report_service


def register(subparsers) -> argparse.ArgumentParser:
    parser = subparsers.add_parser("simulate", help="Propagate the gate and report phase and fidelity")
    parser.add_argument("--config", required=True, help="Run config (YAML)")
    parser.add_argument("--tier", choices=[t.value for t in ModelTier.all_types()], help="Override sim.tier")
    parser.add_argument("--echo", action="store_true", help="Use the spin-echo schedule")
    parser.add_argument("--out", help="Write the report to this file instead of stdout")
    parser.set_defaults(handler=run)
    return parser


def run(args: argparse.Namespace) -> int:
    _, config = config_service.load_run_config(args.config)
    tier = ModelTier(args.tier) if args.tier else None
    plan = config_service.build_plan(config, tier=tier, echo=True if args.echo else None)

    trajectory_path = config.output.trajectory_csv
    start = time.perf_counter()
    result = dynamics_service.run_gate(plan.design, plan.tier, prop=plan.prop, sequence=plan.sequence,
                                       n_max=plan.n_max, preparation=plan.preparation,
                                       record_trajectory=trajectory_path is not None)
    fidelity = analysis_service.fidelity_report(result)
    wall_time = time.perf_counter() - start
    logger.app_info(f"simulate finished in {wall_time:.3f} s")

    text = report_service.emit(report_service.simulate_report(result, fidelity), args.out or config.output.report)
    if text is not None:
        print(text, end="")
    if trajectory_path:
        frame = report_service.trajectory_frame(result.trajectory)
        report_service.write_text(report_service.frame_to_csv(frame), trajectory_path)
    print(report_service.simulate_summary(result, fidelity, wall_time))
    return 0
