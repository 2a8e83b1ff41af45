import os
from pathlib import Path
from typing import Optional
from pydantic_settings import BaseSettings
from pydantic import field_validator
from dotenv import load_dotenv

# Load environment variables from .env when present
load_dotenv(override=True)

_PACKAGE_ROOT = Path(__file__).resolve().parent.parent


class Settings(BaseSettings):
    # Basic information
    APP_NAME: str = "clockgate"
    APP_VERSION: str = "0.1.0"
    DEBUG: bool = False

    # Logging
    LOG_FILE: str = "logs/clockgate.log"
    LOG_LEVEL: str = "APP_INFO"

    # Numerical defaults
    DEFAULT_N_MAX: int = 20
    STEPS_PER_FASTEST_PERIOD: int = 64
    INTEGRATOR: str = "magnus4"
    MAX_HILBERT_DIMENSION: int = 4096
    MAX_PROPAGATION_STEPS: int = 2_000_000

    # Tolerances
    TRUNCATION_TOLERANCE: float = 1e-8
    NORM_TOLERANCE: float = 1e-7
    CONVERGENCE_TOLERANCE: float = 1e-6
    LOOP_CLOSURE_WARNING: float = 0.01
    # Extra closure allowance per eta^2 (1 + peak phonon number) when the drive keeps
    # the full motional exponential (FULL tier, exact-sideband EFFECTIVE)
    LAMB_DICKE_CLOSURE_FACTOR: float = 1.0
    PHASE_WRAP_TOLERANCE: float = 1e-5
    THERMAL_TAIL_TOLERANCE: float = 1e-3
    MAX_THERMAL_N_BAR: float = 2.0

    # Physics thresholds
    VALIDITY_THRESHOLD: float = 0.1
    POLE_GUARD_FACTOR: float = 10.0
    FAULT_TOLERANCE_THRESHOLD: float = 1e-4
    METASTABLE_LINEARIZATION_LIMIT: float = 0.1

    # Sweeps and output
    SWEEP_WORKERS: Optional[int] = None
    FULL_TIER_SWEEP_CAP: int = 32
    CSV_FLOAT_FORMAT: str = "%.12g"
    SHOW_PROGRESS: bool = False
    BUDGET_SCENARIOS_PATH: str = str(_PACKAGE_ROOT / "data" / "budget_scenarios.json")

    @field_validator(
        "TRUNCATION_TOLERANCE",
        "NORM_TOLERANCE",
        "CONVERGENCE_TOLERANCE",
        "LOOP_CLOSURE_WARNING",
        "LAMB_DICKE_CLOSURE_FACTOR",
        "PHASE_WRAP_TOLERANCE",
        "THERMAL_TAIL_TOLERANCE",
        "VALIDITY_THRESHOLD",
        "POLE_GUARD_FACTOR",
        "FAULT_TOLERANCE_THRESHOLD",
        "METASTABLE_LINEARIZATION_LIMIT",
    )
    def validate_positive(cls, v, info):
        if v <= 0:
            raise ValueError(f"{info.field_name} must be positive")
        return v

    @field_validator("STEPS_PER_FASTEST_PERIOD")
    def validate_steps(cls, v):
        if v < 16:
            raise ValueError("STEPS_PER_FASTEST_PERIOD must be at least 16")
        return v

    @field_validator("INTEGRATOR")
    def validate_integrator(cls, v):
        """
        Accept the integrator names known to the dynamics service, case-insensitively
        """
        value = v.strip().lower()
        if value not in ("magnus4", "midpoint"):
            raise ValueError("INTEGRATOR must be 'magnus4' or 'midpoint'")
        return value

    @field_validator("LOG_LEVEL")
    def validate_log_level(cls, v):
        value = v.strip().upper()
        if value not in ("DEBUG", "INFO", "APP_INFO", "WARNING", "ERROR"):
            raise ValueError(f"Unknown LOG_LEVEL: {v}")
        return value

    @property
    def sweep_workers(self) -> int:
        """Worker count for sweeps, falling back to the available parallelism"""
        if self.SWEEP_WORKERS is not None and self.SWEEP_WORKERS > 0:
            return self.SWEEP_WORKERS
        return os.cpu_count() or 1

    model_config = {
        "env_file": ".env",
        "case_sensitive": True,
        "extra": "ignore",
    }


settings = Settings()
