import math
from pathlib import Path

import pytest
import yaml

from clockgate.constants.enums import Integrator, ModelTier, Observable
from clockgate.core.exceptions import ConfigError
from clockgate.core.utils import ingest_2pi_hz, set_dotted
from clockgate.services import config_service, design_service, report_service

TWO_PI = 2.0 * math.pi
CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def test_hz_keys_are_converted(reference_design):
    assert reference_design.encoding.omega0 == pytest.approx(TWO_PI * 3.226e9)
    assert reference_design.trap.nu == pytest.approx(TWO_PI * 1.2e6)
    assert reference_design.delta_loop == pytest.approx(TWO_PI * 1.0e3)
    assert reference_design.lasers.delta_raman == pytest.approx(reference_design.encoding.omega0 / 2), \
        "'optimal' resolves to omega0 / 2"
    assert reference_design.gate_time == pytest.approx(1e-3)


def test_yaml_exponent_without_dot(tmp_path):
    text = (
        "encoding: {omega0_2pi_hz: 3.226e+9}\n"
        "trap: {nu_cm_2pi_hz: 1.2e+6, eta: 0.1}\n"
        "gate: {delta_2pi_hz: 1e3}\n"
    )
    assert yaml.safe_load(text)["gate"]["delta_2pi_hz"] == "1e3", "YAML reads 1e3 as a string"
    path = tmp_path / "exponent.yaml"
    path.write_text(text, encoding="utf-8")
    _, config = config_service.load_run_config(str(path))
    assert config.gate.delta == pytest.approx(TWO_PI * 1e3)
    assert config.encoding.omega0 == pytest.approx(TWO_PI * 3.226e9)


def test_ingest_handles_pairs_and_passthrough():
    converted = ingest_2pi_hz({"lasers": {"g_2pi_hz": [1.0, -2.0], "delta_raman": "optimal"},
                               "gate": {"delta_2pi_hz": "auto"}})
    assert converted["lasers"]["g"] == [TWO_PI, -2 * TWO_PI]
    assert converted["lasers"]["delta_raman"] == "optimal"
    assert converted["gate"]["delta"] == "auto"


def test_conflicting_frequency_forms():
    with pytest.raises(ConfigError) as info:
        ingest_2pi_hz({"gate": {"delta": 1.0, "delta_2pi_hz": 2.0}})
    assert info.value.field_path == "gate.delta_2pi_hz"


def test_missing_field_reads_required(reference_raw):
    del reference_raw["trap"]["eta"]
    with pytest.raises(ConfigError) as info:
        config_service.parse_run_config(reference_raw)
    assert "trap.eta: required" in str(info.value)
    assert info.value.field_path == "trap.eta"


def test_unknown_fields_are_rejected(reference_raw):
    reference_raw["gate"]["loops"] = 2
    with pytest.raises(ConfigError) as info:
        config_service.parse_run_config(reference_raw)
    assert str(info.value).startswith("gate.loops:")


@pytest.mark.parametrize("section, key, value", [
    ("trap", "eta", 1.5),
    ("gate", "n_loops", 0),
    ("sim", "n_max", 1),
    ("sim", "tier", "exact"),
    ("gate", "delta", 0.0),
])
def test_invalid_values(reference_raw, section, key, value):
    reference_raw[section].pop(f"{key}_2pi_hz", None)
    reference_raw[section][key] = value
    with pytest.raises(ConfigError) as info:
        config_service.parse_run_config(reference_raw)
    assert info.value.field_path == f"{section}.{key}"
    assert info.value.exit_code == 2


def test_sim_defaults_and_initial_motion(reference_raw):
    reference_raw["sim"] = {"initial": {"thermal": 0.3}}
    config = config_service.parse_run_config(reference_raw)
    assert config.sim.tier is ModelTier.EFFECTIVE
    assert config.sim.integrator is Integrator.MAGNUS4
    assert config.sim.n_max == 20
    assert config.sim.initial.n_bar == pytest.approx(0.3)


def test_sweep_spec_validation():
    spec = config_service.parse_sweep_spec({"sweep": {"parameter": "gate.delta",
                                                      "linspace": {"start": 1.0, "stop": 2.0, "count": 3}}})
    assert spec.points == [1.0, 1.5, 2.0]
    assert spec.observables == [Observable.CONDITIONAL_PHASE]

    with pytest.raises(ConfigError):
        config_service.parse_sweep_spec({"parameter": "gate.delta", "values": [1, 2],
                                         "linspace": {"start": 1.0, "stop": 2.0, "count": 3}})
    with pytest.raises(ConfigError):
        config_service.parse_sweep_spec({"parameter": "gate.delta"})
    with pytest.raises(ConfigError):
        config_service.parse_sweep_spec({"parameter": "gate.delta", "values": [1.0]})
    with pytest.raises(ConfigError) as info:
        config_service.parse_sweep_spec({"parameter": "gate.delta", "values": [1, 2], "observables": ["mood"]})
    assert "sweep.observables" in str(info.value)


def test_parameter_path_resolution(reference_raw):
    assert config_service.resolve_parameter_path(reference_raw, "gate.delta") == "gate.delta_2pi_hz"
    assert config_service.resolve_parameter_path(reference_raw, "trap.eta") == "trap.eta"
    with pytest.raises(ConfigError):
        config_service.resolve_parameter_path(reference_raw, "laser.g")

    config = config_service.override(reference_raw, "gate.delta", 2.0e3)
    assert config.gate.delta == pytest.approx(TWO_PI * 2.0e3), "Hz path keeps Hz values"
    config = config_service.override(reference_raw, "gate.delta", 100.0)
    assert config.gate.delta == pytest.approx(TWO_PI * 100.0)


def test_set_dotted_replaces_the_other_form(reference_raw):
    updated = set_dotted(reference_raw, "gate.delta", 5.0)
    assert "delta_2pi_hz" not in updated["gate"] and updated["gate"]["delta"] == 5.0
    assert reference_raw["gate"]["delta_2pi_hz"] == 1.0e3, "the input mapping is not modified"


def test_design_block_round_trip(reference_raw, reference_design):
    block = report_service.design_block(reference_design)
    assert block.startswith("[design]\n")
    rebuilt = config_service.build_design(config_service.parse_run_config(
        config_service.apply_design_block(reference_raw, "some text\n" + block)))
    assert rebuilt.lasers.max_coupling == reference_design.lasers.max_coupling
    assert rebuilt.delta_loop == reference_design.delta_loop
    assert rebuilt.lasers.delta_raman == reference_design.lasers.delta_raman
    assert rebuilt.geometry.z0_2 == reference_design.geometry.z0_2
    assert rebuilt.gate_time == reference_design.gate_time

    with pytest.raises(ConfigError):
        config_service.apply_design_block(reference_raw, "[design]\ngate.delta\n")


def test_build_plan_with_echo(reference_raw):
    reference_raw["gate"]["echo"] = True
    plan = config_service.build_plan(config_service.parse_run_config(reference_raw))
    assert plan.sequence is not None and len(plan.sequence.segments) == 2
    plan = config_service.build_plan(config_service.parse_run_config(reference_raw), tier=ModelTier.FORCE, echo=False)
    assert plan.sequence is None
    assert plan.tier is ModelTier.FORCE


def test_exact_sideband_flag_reaches_design(reference_raw, reference_design):
    assert not reference_design.exact_sideband, "first-order sideband by default"
    reference_raw["gate"]["exact_sideband"] = True
    design = config_service.build_design(config_service.parse_run_config(reference_raw))
    assert design.exact_sideband
    assert design.delta_loop == reference_design.delta_loop, "the flag does not move the design point"


def test_fixed_coupling_is_not_rescaled(reference_raw, reference_design):
    reference_raw["lasers"]["g_2pi_hz"] = 0.5 * reference_design.lasers.max_coupling / TWO_PI
    design = config_service.build_design(config_service.parse_run_config(reference_raw))
    assert design.lasers.max_coupling == pytest.approx(0.5 * reference_design.lasers.max_coupling, rel=1e-12)


def test_load_yaml_errors(tmp_path):
    with pytest.raises(ConfigError):
        config_service.load_yaml(str(tmp_path / "missing.yaml"))
    broken = tmp_path / "broken.yaml"
    broken.write_text("gate: [1, 2\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        config_service.load_yaml(str(broken))
    scalar = tmp_path / "scalar.yaml"
    scalar.write_text("42\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        config_service.load_yaml(str(scalar))


def test_shipped_configs_load():
    for name in ("reference.yaml", "d_manifold.yaml", "scaled_full.yaml"):
        _, config = config_service.load_run_config(str(CONFIG_DIR / name))
        design = config_service.build_design(config)
        assert design_service.predicted_phase(design) == pytest.approx(math.pi / 2, rel=1e-9), name
