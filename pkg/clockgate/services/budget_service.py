"""
Analytic spontaneous-emission budget per qubit encoding and the comparison with the
fault-tolerance threshold.
"""
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from clockgate.constants.enums import FormulaKind
from clockgate.core.config import settings
from clockgate.core.exceptions import BudgetError, ConfigError
from clockgate.core.logging import logger
from clockgate.core.utils import TWO_PI, ingest_2pi_hz, to_2pi_hz
from clockgate.models.physics import GateDesign
from clockgate.models.results import BudgetScenario, ErrorBudgetReport
from clockgate.services import design_service

AUTO = "auto"
# Above this the off-resonant formula is outside its range of validity
OFF_RESONANT_VALIDITY = 0.1


def p_offresonant(g: float, omega0: float) -> float:
    """Mean mediator population 8|g|^2 / omega0^2 of a ground-state clock qubit"""
    value = 8.0 * abs(g) ** 2 / omega0 ** 2
    if value > 1.0 + 1e-12:
        raise BudgetError(f"p_off = {value:.4g} exceeds the formula ceiling 1 (|g| >= omega0/sqrt(8))")
    if value >= OFF_RESONANT_VALIDITY:
        logger.warning(f"p_off = {value:.4g} lies outside the perturbative range of the formula")
    return min(1.0, value)


def p_total_ground(eta: float, gamma_d: float, omega0: float) -> float:
    """(4 pi / eta) (gamma_d / omega0): the chain below with the designed coupling substituted"""
    return 4.0 * math.pi / eta * gamma_d / omega0


def p_total_chain(g: float, omega0: float, gamma_d: float, gate_time: float) -> float:
    """2 p_off gamma_d T for two ions scattering off-resonantly during the gate"""
    return 2.0 * p_offresonant(g, omega0) * gamma_d * gate_time


def p_total_metastable(gamma_d: float, gate_time: float) -> float:
    """2 gamma_d T with both ions held in the metastable manifold"""
    product = gamma_d * gate_time
    if product >= settings.METASTABLE_LINEARIZATION_LIMIT:
        raise BudgetError(f"gamma_d * T = {product:.4g} is too large for the linearized decay probability")
    return 2.0 * product


def _off_resonant_report(scenario: BudgetScenario) -> Dict[str, Any]:
    encoding = scenario.encoding
    g, omega0, gamma = scenario.coupling, encoding.omega0, encoding.gamma_d
    p_off = p_offresonant(g, omega0)
    p_total = p_total_chain(g, omega0, gamma, scenario.gate_time)
    steps = [
        f"p_off = 8|g|^2/omega0^2 = 8 x ({to_2pi_hz(g):.6g} Hz)^2 / ({to_2pi_hz(omega0):.6g} Hz)^2 = {p_off:.6g}",
        f"p_T = 2 p_off gamma_D T = 2 x {p_off:.6g} x {gamma:.6g} rad/s x {scenario.gate_time:.6g} s "
        f"= {p_total:.6g}",
    ]
    if scenario.eta is not None and scenario.delta_loop is not None:
        closed = p_total_ground(scenario.eta, gamma, omega0)
        steps.append("with |g|^2 = delta omega0 / (8 eta) and T = 2 pi / delta: "
                     "p_T = 2 (delta/eta)(gamma_D/omega0)(2 pi/delta) = (4 pi/eta)(gamma_D/omega0)")
        steps.append(f"(4 pi/{scenario.eta:g}) x ({gamma:.6g} / {omega0:.6g}) = {closed:.6g}")
    return {"p_off": p_off, "p_total": p_total, "chain_steps": steps}


def _metastable_report(scenario: BudgetScenario) -> Dict[str, Any]:
    gamma = scenario.encoding.gamma_d
    p_total = p_total_metastable(gamma, scenario.gate_time)
    steps = [f"p_T = 2 gamma_D T = 2 x {gamma:.6g} rad/s x {scenario.gate_time:.6g} s = {p_total:.6g}"]
    # 8|g|^2/omega0^2 does not apply while the mediator is populated
    return {"p_off": None, "p_total": p_total, "chain_steps": steps}


def _literature_report(scenario: BudgetScenario) -> Dict[str, Any]:
    if scenario.literature_p_total is None:
        raise BudgetError(f"scenario '{scenario.label}' is a literature row without literature_p_total")
    return {"p_off": None, "p_total": scenario.literature_p_total,
            "chain_steps": [f"p_T = {scenario.literature_p_total:.6g} (literature value)"]}


def scenario_report(scenario: BudgetScenario, threshold: Optional[float] = None) -> ErrorBudgetReport:
    threshold = settings.FAULT_TOLERANCE_THRESHOLD if threshold is None else threshold
    if scenario.formula_kind is FormulaKind.OFF_RESONANT:
        values = _off_resonant_report(scenario)
    elif scenario.formula_kind is FormulaKind.MEDIATOR_OCCUPIED:
        values = _metastable_report(scenario)
    else:
        values = _literature_report(scenario)

    inputs = {"omega0": scenario.encoding.omega0, "gamma_d": scenario.encoding.gamma_d,
              "gate_time": scenario.gate_time, "coupling": scenario.coupling}
    if scenario.eta is not None:
        inputs["eta"] = scenario.eta
    if scenario.delta_loop is not None:
        inputs["delta_loop"] = scenario.delta_loop

    p_total = values["p_total"]
    return ErrorBudgetReport(
        label=scenario.label,
        formula_kind=scenario.formula_kind,
        p_off=values["p_off"],
        p_total=p_total,
        threshold=threshold,
        threshold_ratio=p_total / threshold,
        passes=p_total < threshold,
        chain_steps=values["chain_steps"],
        inputs=inputs,
        quoted_p_total=scenario.quoted_p_total,
        quoted_p_off=scenario.quoted_p_off,
        note=scenario.note,
    )


def budget_report(scenarios: List[BudgetScenario], threshold: Optional[float] = None) -> List[ErrorBudgetReport]:
    """One report per scenario, in input order"""
    reports = [scenario_report(s, threshold) for s in scenarios]
    if reports:
        logger.app_info(f"Error budget: {len(reports)} scenarios, "
                        f"{sum(r.passes for r in reports)} below threshold")
    return reports


def scenario_from_design(design: GateDesign, label: Optional[str] = None) -> BudgetScenario:
    """Budget row of a designed gate, using the encoding to pick the formula"""
    encoding = design.encoding
    kind = FormulaKind.MEDIATOR_OCCUPIED if encoding.mediator_occupied_during_gate else FormulaKind.OFF_RESONANT
    return BudgetScenario(
        label=label or encoding.label,
        encoding=encoding,
        gate_time=design.gate_time,
        coupling=design.lasers.max_coupling,
        formula_kind=kind,
        eta=design.trap.eta,
        delta_loop=design.delta_loop if design.n_loops == 1 else None,
    )


def _resolve_entry(entry: Dict[str, Any], index: int) -> Dict[str, Any]:
    """Fill 'auto' couplings and gate times from delta, eta and omega0"""
    data = dict(entry)
    omega0 = data.get("encoding", {}).get("omega0")
    delta = data.get("delta_loop")
    if data.get("coupling") == AUTO:
        if delta is None or data.get("eta") is None or omega0 is None:
            raise ConfigError(f"scenarios[{index}].coupling: 'auto' needs delta_loop, eta and encoding.omega0",
                              field_path=f"scenarios[{index}].coupling")
        data["coupling"] = design_service.coupling_for(delta, data["eta"], omega0)
    if data.get("gate_time") == AUTO:
        if delta is None:
            raise ConfigError(f"scenarios[{index}].gate_time: 'auto' needs delta_loop",
                              field_path=f"scenarios[{index}].gate_time")
        data["gate_time"] = TWO_PI / abs(delta)
    return data


def parse_scenarios(entries: List[Dict[str, Any]]) -> List[BudgetScenario]:
    """
    Build scenarios from raw mappings; `_2pi_hz` keys are converted and 'auto' resolved

    Raises:
        ConfigError: for malformed entries
    """
    if not isinstance(entries, list):
        raise ConfigError("scenarios: expected a list", field_path="scenarios")
    scenarios = []
    for index, raw in enumerate(entries):
        data = _resolve_entry(ingest_2pi_hz(raw, f"scenarios[{index}]"), index)
        try:
            scenarios.append(BudgetScenario(**data))
        except ValidationError as e:
            first = e.errors()[0]
            path = ".".join(str(p) for p in first["loc"])
            raise ConfigError(f"scenarios[{index}].{path}: {first['msg']}",
                              field_path=f"scenarios[{index}].{path}")
    return scenarios


def load_builtin_scenarios(path: Optional[str] = None) -> List[BudgetScenario]:
    """Scenarios shipped with the package (ground-state clock qubit, D-manifold, S-D)"""
    source = Path(path or settings.BUDGET_SCENARIOS_PATH)
    try:
        with source.open("r", encoding="utf-8") as f:
            payload = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read budget scenarios from {source}: {e}")
    return parse_scenarios(payload.get("scenarios", []))
