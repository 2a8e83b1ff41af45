"""
Text and CSV rendering for the command handlers. Everything here is deterministic: no
timestamps or wall times end up in tables, blocks or CSV files.
"""
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd
from tabulate import tabulate

from clockgate.constants.enums import BRANCH_LABELS
from clockgate.core.config import settings
from clockgate.core.utils import exact_float, format_float, to_2pi_hz
from clockgate.models.physics import GateDesign, ValidityReport
from clockgate.models.results import ErrorBudgetReport, FidelityReport, GateResult, Trajectory
from clockgate.services import design_service
from clockgate.services.config_service import DESIGN_HEADER, design_block_entries

TABLE_FORMAT = "github"
TRAJECTORY_COLUMNS = ["t_s", "branch", "re_alpha", "im_alpha", "phase_rad", "n_mean", "norm_err"]
BUDGET_COLUMNS = ["label", "formula_kind", "p_off", "p_total", "threshold", "threshold_ratio", "passes",
                  "quoted_p_total", "quoted_p_off"]


def _table(rows: Sequence[Sequence[Any]], headers: Sequence[str]) -> str:
    return tabulate(rows, headers=headers, tablefmt=TABLE_FORMAT, disable_numparse=True)


def _hz(value: float) -> str:
    return f"2pi x {format_float(to_2pi_hz(value), 6)} Hz"


def _status(passed: bool) -> str:
    return "PASS" if passed else "FAIL"


def frame_to_csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format=settings.CSV_FLOAT_FORMAT, lineterminator="\n")


def write_text(text: str, path: str) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def design_table(design: GateDesign) -> str:
    coeffs = design_service.stark_coefficients(design.lasers, design.encoding)
    offsets = design_service.laser_frequency_offsets(design)
    lasers = design.lasers
    forces = design_service.design_forces(design)
    phase = design_service.predicted_phase(design)
    rows = [
        ("encoding", design.encoding.label),
        ("omega0", _hz(design.encoding.omega0)),
        ("Delta", _hz(lasers.delta_raman)),
        ("max |g|", _hz(lasers.max_coupling)),
        ("delta", _hz(design.delta_loop)),
        ("n_loops", str(design.n_loops)),
        ("gate time", f"{format_float(design.gate_time, 10)} s"),
        ("chi_up / chi_down", f"{_hz(coeffs.chi_up)} / {_hz(coeffs.chi_down)}"),
        ("|theta_up| / |theta_down|", f"{_hz(abs(coeffs.theta_up))} / {_hz(abs(coeffs.theta_down))}"),
        ("|f_ud| / |delta|", format_float(abs(forces["ud"]) / abs(design.delta_loop), 10)),
        ("predicted phase", f"{format_float(phase, 10)} rad ({format_float(phase / math.pi, 8)} pi)"),
        ("discrimination residual", format_float(design_service.discrimination_residual(
            lasers, design.encoding, design.trap, design.delta_loop), 6)),
        ("ion spacing", f"{format_float(design.geometry.z0_2 - design.geometry.z0_1, 10)} m"),
        ("omega_A - omega_up,e", _hz(offsets["omega_a"])),
        ("omega_B - omega_up,e", _hz(offsets["omega_b"])),
        ("|chi| / |eta theta|", format_float(design_service.stark_to_force_ratio(coeffs, design.trap), 6)),
    ]
    return _table(rows, ["quantity", "value"])


def validity_table(report: ValidityReport) -> str:
    rows = []
    for name, label in (("check_I_up", "(I) |g|/|Delta|"), ("check_I_down", "(I) |g|/|Delta - omega0|"),
                        ("check_II", "(II) |theta|/nu"), ("check_III", "(III) eta^2 (n + 1/2)")):
        check = getattr(report, name)
        rows.append((label, format_float(check.value, 6), format_float(check.bound, 3), _status(check.passed)))
    return _table(rows, ["check", "value", "bound", "status"])


def budget_line(report: ErrorBudgetReport) -> str:
    p_off = "n/a" if report.p_off is None else format_float(report.p_off, 4)
    return (f"error budget: p_off={p_off} p_total={format_float(report.p_total, 4)} "
            f"threshold_ratio={format_float(report.threshold_ratio, 4)} {_status(report.passes)}")


def _block_value(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, complex):
        return f"{value.real:.17g}{value.imag:+.17g}j"
    return exact_float(value)


def design_block(design: GateDesign) -> str:
    """`[design]` header and dotted key=value lines, directly re-applicable to a config"""
    lines = [DESIGN_HEADER] + [f"{key}={_block_value(value)}" for key, value in design_block_entries(design)]
    return "\n".join(lines) + "\n"


def design_report(design: GateDesign, validity: ValidityReport, budget: ErrorBudgetReport) -> str:
    return "\n".join([design_table(design), "", validity_table(validity), "", budget_line(budget), "",
                      design_block(design)])


def simulate_report(result: GateResult, fidelity: FidelityReport) -> str:
    rows = [
        ("tier", result.tier.value),
        ("echo", str(result.echo).lower()),
        ("gate time", f"{format_float(result.gate_time, 10)} s"),
        ("propagation steps", str(result.total_steps)),
        ("conditional phase", f"{format_float(result.conditional_phase, 10)} rad"),
        ("conditional phase (unwrapped)", f"{format_float(result.conditional_phase_unwrapped, 10)} rad"),
        ("conditional phase error", f"{format_float(fidelity.conditional_phase_error, 6)} rad"),
        ("single-ion phases", f"{format_float(result.single_ion_phases[0], 10)}, "
                              f"{format_float(result.single_ion_phases[1], 10)} rad"),
        ("single-ion phase spread", f"{format_float(result.single_ion_phase_spread, 6)} rad"),
        ("process fidelity (raw)", format_float(fidelity.process_fidelity_raw, 10)),
        ("process fidelity (Z compensated)", format_float(fidelity.process_fidelity_z_compensated, 10)),
        ("optimal Z angles", f"{format_float(fidelity.optimal_z_angles[0], 8)}, "
                             f"{format_float(fidelity.optimal_z_angles[1], 8)} rad"),
        ("average gate fidelity", format_float(fidelity.average_gate_fidelity, 10)),
        ("Bell concurrence", format_float(fidelity.bell_concurrence, 10)),
        ("max motional residual", format_float(result.max_motional_residual, 4)),
        ("leakage", format_float(result.leakage, 4)),
        ("loop closed", str(result.loop_closed).lower()),
    ]
    if fidelity.thermal_averaged_fidelity is not None:
        rows.append(("thermal-averaged fidelity", format_float(fidelity.thermal_averaged_fidelity, 10)))
    if not fidelity.optimizer_converged:
        rows.append(("Z optimizer", "grid maximum (refinement failed)"))
    branch_rows = [(label, format_float(result.branch_phases[label], 10),
                    format_float(result.motional_residual[label], 4),
                    format_float(result.phonon_excess.get(label, 0.0), 4)) for label in BRANCH_LABELS]
    parts = [_table(rows, ["quantity", "value"]), "",
             _table(branch_rows, ["branch", "phase_rad", "residual", "phonon_excess"])]
    if result.warnings:
        parts += [""] + [f"warning: {w}" for w in result.warnings]
    return "\n".join(parts) + "\n"


def simulate_summary(result: GateResult, fidelity: FidelityReport, wall_time: float) -> str:
    return (f"conditional_phase={format_float(result.conditional_phase, 10)} "
            f"fidelity_z_compensated={format_float(fidelity.process_fidelity_z_compensated, 10)} "
            f"concurrence={format_float(fidelity.bell_concurrence, 10)} "
            f"motional_residual={format_float(result.max_motional_residual, 4)} "
            f"wall_time={wall_time:.3f}s")


def trajectory_frame(trajectory: Trajectory) -> pd.DataFrame:
    """Time-major rows, branches in {uu, ud, du, dd} order"""
    rows = []
    labels = [label for label in BRANCH_LABELS if label in trajectory.branches]
    for k, t in enumerate(trajectory.times):
        for label in labels:
            trace = trajectory.branches[label]
            rows.append((float(t), label, float(trace.alpha[k].real), float(trace.alpha[k].imag),
                         float(trace.phase[k]), float(trace.n_mean[k]), float(trace.norm_err[k])))
    return pd.DataFrame(rows, columns=TRAJECTORY_COLUMNS)


def budget_table(reports: List[ErrorBudgetReport]) -> str:
    rows = []
    for r in reports:
        rows.append((r.label, r.formula_kind.value,
                     "n/a" if r.p_off is None else format_float(r.p_off, 4),
                     format_float(r.p_total, 4),
                     "n/a" if r.quoted_p_total is None else format_float(r.quoted_p_total, 3),
                     format_float(r.threshold_ratio, 4), _status(r.passes)))
    lines = [_table(rows, ["scenario", "formula", "p_off", "p_total", "quoted p_total",
                           "p_total / threshold", "status"])]
    for r in reports:
        lines.append("")
        lines.append(f"{r.label}:")
        lines.extend(f"  {step}" for step in r.chain_steps)
        if r.note:
            lines.append(f"  note: {r.note}")
    return "\n".join(lines) + "\n"


def budget_frame(reports: List[ErrorBudgetReport]) -> pd.DataFrame:
    rows = [(r.label, r.formula_kind.value, r.p_off, r.p_total, r.threshold, r.threshold_ratio, r.passes,
             r.quoted_p_total, r.quoted_p_off) for r in reports]
    return pd.DataFrame(rows, columns=BUDGET_COLUMNS)


def sweep_frame(parameter: str, rows: List[Dict[str, Any]], observables: Sequence[str]) -> pd.DataFrame:
    return pd.DataFrame(rows, columns=[parameter] + list(observables))


def emit(text: str, path: Optional[str]) -> Optional[str]:
    """Write to `path`, or hand the text back for stdout"""
    if path:
        write_text(text, path)
        return None
    return text
