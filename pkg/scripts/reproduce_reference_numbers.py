#!/usr/bin/env python3
"""
Print the headline numbers of the gate in one table:
- designed coupling, gate time and predicted phase at the reference point
- simulated conditional phase, fidelity and concurrence (EFFECTIVE tier, with and without echo)
- error budget of the built-in encodings
- optionally the FULL vs EFFECTIVE comparison on the scaled set (--full, slow)
"""
import os
import sys
import argparse
import math

from tabulate import tabulate

# Make the package importable when the script is run from a checkout
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from clockgate.constants.enums import ModelTier
from clockgate.core.utils import format_float, to_2pi_hz
from clockgate.services import (
    analysis_service,
    budget_service,
    config_service,
    design_service,
    dynamics_service,
    sequencer_service,
)

CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "configs")


def design_rows(design):
    coeffs = design_service.stark_coefficients(design.lasers, design.encoding)
    return [
        ("designed |g|", f"2pi x {format_float(to_2pi_hz(design.lasers.max_coupling), 6)} Hz", "2pi x 2.0 MHz"),
        ("gate time", f"{format_float(design.gate_time, 6)} s", "1 ms"),
        ("predicted phase", f"{format_float(design_service.predicted_phase(design) / math.pi, 8)} pi", "0.5 pi"),
        ("|chi| / |eta theta|", format_float(design_service.stark_to_force_ratio(coeffs, design.trap), 6), "20"),
    ]


def gate_rows(design):
    plain = dynamics_service.run_gate(design, ModelTier.EFFECTIVE, record_trajectory=False)
    report = analysis_service.fidelity_report(plain)
    half = dynamics_service.run_gate(design.evolve(lasers=design.lasers.scaled(0.5)), ModelTier.EFFECTIVE,
                                     record_trajectory=False)
    stark = design.evolve(include_static_stark=True)
    echo = dynamics_service.run_gate(stark, ModelTier.EFFECTIVE, sequence=sequencer_service.compose_echo(stark),
                                     record_trajectory=False)
    echo_report = analysis_service.fidelity_report(echo)
    return [
        ("conditional phase", f"{format_float(plain.conditional_phase / math.pi, 8)} pi", "0.5 pi"),
        ("process fidelity (Z compensated)", format_float(report.process_fidelity_z_compensated, 10), "1"),
        ("Bell concurrence", format_float(report.bell_concurrence, 10), "1"),
        ("conditional phase at g/2", f"{format_float(half.conditional_phase / math.pi, 8)} pi", "1/32 pi"),
        ("echo conditional phase", f"{format_float(echo.conditional_phase / math.pi, 8)} pi", "0.5 pi"),
        ("echo raw process fidelity", format_float(echo_report.process_fidelity_raw, 10), "1"),
        ("echo gate time / T", format_float(echo.gate_time / design.gate_time, 8), "sqrt(2)"),
    ]


def budget_rows():
    rows = []
    for report in budget_service.budget_report(budget_service.load_builtin_scenarios()):
        quoted = "n/a" if report.quoted_p_total is None else format_float(report.quoted_p_total, 3)
        status = "PASS" if report.passes else "FAIL"
        rows.append((f"p_total ({report.label})", f"{format_float(report.p_total, 4)} {status}", quoted))
    return rows


def full_rows():
    _, config = config_service.load_run_config(os.path.join(CONFIG_DIR, "scaled_full.yaml"))
    design = config_service.build_design(config)
    full = dynamics_service.run_gate(design, ModelTier.FULL, n_max=config.sim.n_max, record_trajectory=False)
    effective = dynamics_service.run_gate(design, ModelTier.EFFECTIVE, n_max=config.sim.n_max,
                                          record_trajectory=False)
    exact = dynamics_service.run_gate(design.evolve(exact_sideband=True), ModelTier.EFFECTIVE,
                                      n_max=config.sim.n_max, record_trajectory=False)
    comparison = analysis_service.compare_tiers(full, effective)
    exact_comparison = analysis_service.compare_tiers(full, exact)
    return [
        ("FULL vs EFFECTIVE F_z (scaled set)", format_float(comparison.process_fidelity_z, 8), ">= 0.999"),
        ("FULL leakage", format_float(full.leakage, 4), "small"),
        ("FULL conditional phase", f"{format_float(full.conditional_phase / math.pi, 6)} pi", "0.5 pi"),
        ("FULL loop closed", str(full.loop_closed), "True"),
        ("FULL vs exact-sideband EFFECTIVE F_z", format_float(exact_comparison.process_fidelity_z, 8), "~1"),
        ("exact-sideband phase", f"{format_float(exact.conditional_phase / math.pi, 6)} pi", "~0.49 pi"),
    ]


def main():
    parser = argparse.ArgumentParser(description="Print the reference numbers of the clock-qubit gate")
    parser.add_argument("--config", default=os.path.join(CONFIG_DIR, "reference.yaml"),
                        help="Run config of the reference point")
    parser.add_argument("--full", action="store_true", help="Also run the FULL tier on the scaled set")
    args = parser.parse_args()

    _, config = config_service.load_run_config(args.config)
    design = config_service.build_design(config)

    rows = design_rows(design) + gate_rows(design) + budget_rows()
    if args.full:
        rows += full_rows()
    print(tabulate(rows, headers=["quantity", "computed", "reference"], tablefmt="github", disable_numparse=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
