import copy
import math
from pathlib import Path

import pytest
import yaml

from clockgate.services import config_service

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

TWO_PI = 2.0 * math.pi

# Ground-state clock qubit at the reference design point (Hz values)
REFERENCE_RAW = {
    "encoding": {"label": "43Ca+ ground-state clock qubit", "omega0_2pi_hz": 3.226e9,
                 "gamma_d_2pi_hz": 0.18},
    "trap": {"nu_cm_2pi_hz": 1.2e6, "eta": 0.1},
    "lasers": {"g_2pi_hz": "auto", "delta_raman": "optimal"},
    "gate": {"delta_2pi_hz": 1.0e3},
    "sim": {"tier": "effective", "n_max": 20},
}

# Dimensionless set for the FULL tier (rad/s)
SCALED_RAW = {
    "encoding": {"label": "scaled clock qubit", "omega0": 200.0},
    "trap": {"nu_cm": 1.0, "eta": 0.1},
    "lasers": {"g": "auto", "delta_raman": "optimal"},
    "gate": {"delta": 0.02},
    "sim": {"tier": "full", "n_max": 14},
}


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: FULL-tier propagation, takes tens of seconds")


@pytest.fixture
def reference_raw():
    return copy.deepcopy(REFERENCE_RAW)


@pytest.fixture
def scaled_raw():
    return copy.deepcopy(SCALED_RAW)


@pytest.fixture
def reference_design(reference_raw):
    return config_service.build_design(config_service.parse_run_config(reference_raw))


@pytest.fixture
def scaled_design(scaled_raw):
    return config_service.build_design(config_service.parse_run_config(scaled_raw))


@pytest.fixture
def write_yaml(tmp_path):
    """Dump a mapping to a YAML file under tmp_path and return its path as str"""
    def _write(data, name="config.yaml"):
        path = tmp_path / name
        with path.open("w", encoding="utf-8") as f:
            yaml.safe_dump(data, f, sort_keys=False)
        return str(path)
    return _write
