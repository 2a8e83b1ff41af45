"""
Parameter sweeps: one gate design per point, evaluated on a thread pool, rows in input order.
"""
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional

import pandas as pd
from tqdm import tqdm

from clockgate.constants.enums import ModelTier, Observable
from clockgate.core.config import settings
from clockgate.core.exceptions import ConfigError
from clockgate.core.logging import logger
from clockgate.models.request import SweepSpec
from clockgate.services import analysis_service, budget_service, config_service, dynamics_service, report_service

# Observables that need a propagated gate
DYNAMIC_OBSERVABLES = {
    Observable.CONDITIONAL_PHASE, Observable.FIDELITY_Z, Observable.CONCURRENCE,
    Observable.MOTIONAL_RESIDUAL, Observable.LEAKAGE, Observable.AVERAGE_GATE_FIDELITY,
    Observable.SINGLE_ION_PHASE_SPREAD,
}


def evaluate_point(raw: Dict[str, Any], spec: SweepSpec, value: Any, tier: Optional[ModelTier] = None,
                   echo: Optional[bool] = None) -> Dict[str, Any]:
    config = config_service.override(raw, spec.parameter, value)
    plan = config_service.build_plan(config, tier=tier, echo=echo)
    row: Dict[str, Any] = {spec.parameter: value}

    if Observable.P_TOTAL in spec.observables:
        scenario = budget_service.scenario_from_design(plan.design)
        row[Observable.P_TOTAL.value] = budget_service.scenario_report(scenario).p_total

    if not DYNAMIC_OBSERVABLES.intersection(spec.observables):
        return row

    result = dynamics_service.run_gate(plan.design, plan.tier, prop=plan.prop, sequence=plan.sequence,
                                       n_max=plan.n_max, preparation=plan.preparation,
                                       record_trajectory=False)
    fidelity = None
    if {Observable.FIDELITY_Z, Observable.CONCURRENCE, Observable.AVERAGE_GATE_FIDELITY}.intersection(spec.observables):
        fidelity = analysis_service.fidelity_report(result)

    for observable in spec.observables:
        if observable is Observable.CONDITIONAL_PHASE:
            row[observable.value] = analysis_service.conditional_phase(result)
        elif observable is Observable.FIDELITY_Z:
            row[observable.value] = fidelity.process_fidelity_z_compensated
        elif observable is Observable.CONCURRENCE:
            row[observable.value] = fidelity.bell_concurrence
        elif observable is Observable.AVERAGE_GATE_FIDELITY:
            row[observable.value] = fidelity.average_gate_fidelity
        elif observable is Observable.MOTIONAL_RESIDUAL:
            row[observable.value] = result.max_motional_residual
        elif observable is Observable.LEAKAGE:
            row[observable.value] = result.leakage
        elif observable is Observable.SINGLE_ION_PHASE_SPREAD:
            row[observable.value] = result.single_ion_phase_spread
    return row


def _check_cap(raw: Dict[str, Any], spec: SweepSpec, tier: Optional[ModelTier]) -> None:
    effective_tier = tier or config_service.parse_run_config(raw).sim.tier
    cap = spec.full_tier_cap or settings.FULL_TIER_SWEEP_CAP
    if effective_tier is ModelTier.FULL and len(spec.points) > cap:
        raise ConfigError(f"sweep.values: {len(spec.points)} FULL-tier points exceed the cap of {cap} "
                          f"(set full_tier_cap to override)", field_path="sweep.full_tier_cap")


def run_sweep(raw: Dict[str, Any], spec: SweepSpec, tier: Optional[ModelTier] = None,
              echo: Optional[bool] = None, workers: Optional[int] = None) -> pd.DataFrame:
    """
    Evaluate every sweep point; the parameter path is checked on the first point before
    the pool starts.
    """
    _check_cap(raw, spec, tier)
    points = spec.points
    config_service.override(raw, spec.parameter, points[0])
    workers = workers or settings.sweep_workers
    logger.app_info(f"Sweep over {spec.parameter}: {len(points)} points on {workers} workers")

    with ThreadPoolExecutor(max_workers=workers) as executor:
        rows = list(tqdm(executor.map(lambda v: evaluate_point(raw, spec, v, tier, echo), points),
                         total=len(points), desc="sweep", file=sys.stderr,
                         disable=not settings.SHOW_PROGRESS))
    return report_service.sweep_frame(spec.parameter, rows, [o.value for o in spec.observables])
