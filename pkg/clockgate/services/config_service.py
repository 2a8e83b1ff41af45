"""
Config ingestion: YAML files -> RunConfig / SweepSpec -> GateDesign and run plan.
"""
import copy
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

import yaml
from pydantic import ValidationError

from clockgate.constants.enums import ModelTier
from clockgate.core.exceptions import ConfigError
from clockgate.core.logging import logger
from clockgate.core.utils import HZ_SUFFIX, ingest_2pi_hz, set_dotted
from clockgate.models.physics import Encoding, GateDesign, IonGeometry, LaserPair, TrapMode
from clockgate.models.request import RunConfig, SweepSpec
from clockgate.models.results import EchoSequence, MotionalPreparation, PropagationSettings
from clockgate.services import design_service, sequencer_service

DESIGN_HEADER = "[design]"


class RunPlan(NamedTuple):
    design: GateDesign
    tier: ModelTier
    prop: PropagationSettings
    n_max: int
    preparation: MotionalPreparation
    sequence: Optional[EchoSequence]


def format_validation_error(error: ValidationError, prefix: str = "") -> str:
    """One `dotted.path: reason` line per error; missing fields read `required`"""
    lines = []
    for item in error.errors():
        path = ".".join(str(part) for part in item["loc"])
        if prefix:
            path = f"{prefix}.{path}" if path else prefix
        reason = "required" if item["type"] == "missing" else item["msg"]
        lines.append(f"{path}: {reason}")
    return "\n".join(lines)


def _first_path(error: ValidationError) -> Optional[str]:
    errors = error.errors()
    return ".".join(str(p) for p in errors[0]["loc"]) if errors else None


def load_yaml(path: str) -> Dict[str, Any]:
    source = Path(path)
    if not source.is_file():
        raise ConfigError(f"{path}: config file not found")
    try:
        with source.open("r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"{path}: invalid YAML: {e}")
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping at the top level")
    return data


def parse_run_config(raw: Dict[str, Any]) -> RunConfig:
    """
    Validate a raw config mapping

    Raises:
        ConfigError: with one `path: reason` line per problem
    """
    try:
        return RunConfig.model_validate(ingest_2pi_hz(raw))
    except ValidationError as e:
        raise ConfigError(format_validation_error(e), field_path=_first_path(e))


def load_run_config(path: str) -> Tuple[Dict[str, Any], RunConfig]:
    raw = load_yaml(path)
    return raw, parse_run_config(raw)


def parse_sweep_spec(raw: Dict[str, Any]) -> SweepSpec:
    data = raw.get("sweep", raw)
    try:
        return SweepSpec.model_validate(data)
    except ValidationError as e:
        raise ConfigError(format_validation_error(e, "sweep"), field_path=_first_path(e))


def load_sweep_spec(path: str) -> SweepSpec:
    return parse_sweep_spec(load_yaml(path))


def _coupling_shape(config: RunConfig) -> Tuple[Any, Any]:
    lasers = config.lasers
    base = 1.0 if lasers.auto else lasers.g
    if base is None and (lasers.g_a is None or lasers.g_b is None):
        raise ConfigError("lasers.g: required unless both g_a and g_b are given", field_path="lasers.g")
    g_a = lasers.g_a if lasers.g_a is not None else base
    g_b = lasers.g_b if lasers.g_b is not None else base
    return g_a, g_b


def build_design(config: RunConfig) -> GateDesign:
    """
    Resolve "optimal" Delta and "auto" couplings and build the validated design.

    Pydantic errors raised by the domain models are reported as config errors; physics
    checks (pole guard, spacing) keep their numeric error types.
    """
    try:
        encoding = Encoding(**config.encoding.model_dump())
        trap = TrapMode(nu=config.trap.nu_cm, eta=config.trap.eta, mode_kind=config.trap.mode_kind)
        delta_raman = config.lasers.delta_raman
        if delta_raman == "optimal":
            delta_raman = design_service.optimal_raman_detuning(encoding)
        g_a, g_b = _coupling_shape(config)
        lasers = LaserPair(g_a=g_a, g_b=g_b, delta_raman=delta_raman, phi_a=config.lasers.phi_a,
                           phi_b=config.lasers.phi_b, dkz=config.lasers.dkz)
        gate = config.gate
        if config.lasers.auto:
            lasers = design_service.solve_coupling(lasers, encoding, trap, gate.delta, gate.n_loops,
                                                   gate.target_phase)
        geometry_config = config.geometry
        if geometry_config.z0_1 is not None:
            geometry = IonGeometry(z0_1=geometry_config.z0_1, z0_2=geometry_config.z0_2)
        else:
            geometry = design_service.default_geometry(lasers, geometry_config.spacing_order, trap.mode_kind)
        design = GateDesign(
            encoding=encoding, trap=trap, lasers=lasers, geometry=geometry,
            delta_loop=gate.delta, n_loops=gate.n_loops,
            include_static_stark=gate.include_static_stark,
            exact_sideband=gate.exact_sideband,
            require_opposite_forces=geometry_config.require_opposite_forces,
            target_phase=gate.target_phase,
        )
    except ValidationError as e:
        raise ConfigError(format_validation_error(e, "design"), field_path=_first_path(e))
    logger.app_info(f"Design built: T = {design.gate_time:.9g} s, max|g| = {design.lasers.max_coupling:.9g} rad/s")
    return design


def propagation_settings(config: RunConfig) -> PropagationSettings:
    sim = config.sim
    data = {"steps_per_fastest_period": sim.steps_per_fastest_period, "integrator": sim.integrator,
            "record_stride": sim.record_stride, "convergence_check": sim.convergence_check}
    if sim.max_steps is not None:
        data["max_steps"] = sim.max_steps
    return PropagationSettings(**data)


def build_plan(config: RunConfig, tier: Optional[ModelTier] = None, echo: Optional[bool] = None) -> RunPlan:
    """Everything run_gate needs; command-line overrides win over the file"""
    design = build_design(config)
    use_echo = config.gate.echo if echo is None else echo
    sequence = sequencer_service.compose_echo(design) if use_echo else None
    return RunPlan(design=design, tier=tier or config.sim.tier, prop=propagation_settings(config),
                   n_max=config.sim.n_max, preparation=config.sim.initial, sequence=sequence)


def resolve_parameter_path(raw: Dict[str, Any], path: str) -> str:
    """
    Map a sweep path onto the raw config: `gate.delta` addresses `gate.delta_2pi_hz` when only
    the Hz form is present (values are then in Hz).
    """
    parts = path.split(".")
    node: Any = raw
    for part in parts[:-1]:
        if not isinstance(node, dict) or not isinstance(node.get(part), dict):
            raise ConfigError(f"{path}: section '{part}' not found", field_path=path)
        node = node[part]
    leaf = parts[-1]
    if leaf not in node and not leaf.endswith(HZ_SUFFIX) and leaf + HZ_SUFFIX in node:
        return path + HZ_SUFFIX
    return path


def override(raw: Dict[str, Any], path: str, value: Any) -> RunConfig:
    """Validated config with one dotted parameter replaced"""
    return parse_run_config(set_dotted(raw, resolve_parameter_path(raw, path), value))


def _parse_block_value(text: str) -> Any:
    text = text.strip()
    for parse in (int, float):
        try:
            return parse(text)
        except ValueError:
            continue
    return text


def _ensure_sections(data: Dict[str, Any], path: str) -> None:
    node = data
    for part in path.split(".")[:-1]:
        if not isinstance(node.get(part), dict):
            node.pop(part + HZ_SUFFIX, None)
            node[part] = {}
        node = node[part]


def apply_design_block(config: Dict[str, Any], block_text: str) -> Dict[str, Any]:
    """
    Apply the `[design]` key=value block printed by `design` to a raw config mapping.
    Lines before the header, blank lines and `#` comments are ignored.
    """
    updated = dict(config)
    in_block = DESIGN_HEADER not in block_text
    for number, line in enumerate(block_text.splitlines(), start=1):
        stripped = line.strip()
        if stripped == DESIGN_HEADER:
            in_block = True
            continue
        if not in_block or not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("["):
            break
        if "=" not in stripped:
            raise ConfigError(f"design block line {number}: expected key=value")
        key, value = stripped.split("=", 1)
        key = key.strip()
        updated = copy.deepcopy(updated)
        _ensure_sections(updated, key)
        updated = set_dotted(updated, key, _parse_block_value(value))
    return updated


def design_block_entries(design: GateDesign) -> List[Tuple[str, Any]]:
    """Resolved values that reproduce `design` when applied to its config"""
    lasers = design.lasers
    couplings = list(lasers.g_a.values()) + list(lasers.g_b.values())
    entries: List[Tuple[str, Any]] = [
        ("encoding.omega0", design.encoding.omega0),
        ("trap.nu_cm", design.trap.nu),
        ("trap.eta", design.trap.eta),
        ("gate.delta", design.delta_loop),
        ("gate.n_loops", design.n_loops),
        ("lasers.delta_raman", lasers.delta_raman),
    ]
    if all(c == couplings[0] and c.imag == 0.0 for c in couplings):
        entries.append(("lasers.g", couplings[0].real))
    else:
        for name, values in (("g_a", lasers.g_a), ("g_b", lasers.g_b)):
            for level, value in values.items():
                entries.append((f"lasers.{name}.{level.value}", value))
    entries.append(("geometry.z0_1", design.geometry.z0_1))
    entries.append(("geometry.z0_2", design.geometry.z0_2))
    return entries
