import math
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from clockgate.constants.enums import InitialMotion, Integrator, ModeKind, ModelTier, Observable
from clockgate.core.config import settings
from clockgate.core.utils import linspace_values
from clockgate.models.physics import DEFAULT_DKZ, parse_complex
from clockgate.models.results import MotionalPreparation

# scalar, [re, im], "re+imj" or a per-level map {up, down}
CouplingInput = Union[float, complex, List[float], str, Dict[str, Any]]


class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class EncodingConfig(_Section):
    label: str = "clock qubit"
    omega0: float = Field(..., gt=0, description="Qubit splitting (rad/s); omega0_2pi_hz in files")
    gamma_d: float = Field(0.0, ge=0, description="Mediator linewidth (rad/s)")
    mediator_occupied_during_gate: bool = False


class TrapConfig(_Section):
    nu_cm: float = Field(..., gt=0, description="Gate mode frequency (rad/s)")
    eta: float = Field(..., gt=0, lt=1, description="Lamb-Dicke parameter of the gate mode")
    mode_kind: ModeKind = ModeKind.CM


class LasersConfig(_Section):
    """
    `g` is "auto" (solved from the discrimination condition) or a fixed coupling applied to
    both lasers. `g_a`/`g_b` set a per-laser shape; with g = "auto" the shape is rescaled.
    """
    g: Optional[CouplingInput] = Field("auto", description="Coupling (rad/s) or 'auto'")
    g_a: Optional[CouplingInput] = None
    g_b: Optional[CouplingInput] = None
    delta_raman: Union[Literal["optimal"], float] = Field("optimal", description="Raman detuning (rad/s)")
    phi_a: float = 0.0
    phi_b: float = 0.0
    dkz: float = Field(DEFAULT_DKZ, gt=0)

    @field_validator("g", "g_a", "g_b", mode="before")
    def validate_coupling(cls, v):
        if v is None or v == "auto" or isinstance(v, dict):
            return v
        return parse_complex(v)

    @property
    def auto(self) -> bool:
        return self.g == "auto"


class GeometryConfig(_Section):
    spacing_order: int = Field(9, ge=0, description="n in the opposite-force spacing")
    z0_1: Optional[float] = None
    z0_2: Optional[float] = None
    require_opposite_forces: bool = True

    @model_validator(mode="after")
    def validate_positions(self):
        if (self.z0_1 is None) != (self.z0_2 is None):
            raise ValueError("give both z0_1 and z0_2 or neither")
        return self


class GateConfig(_Section):
    delta: float = Field(..., description="Loop detuning (rad/s); delta_2pi_hz in files")
    n_loops: int = Field(1, ge=1)
    echo: bool = False
    include_static_stark: bool = False
    exact_sideband: bool = False
    target_phase: float = Field(math.pi / 2, description="Designed conditional phase (rad)")

    @field_validator("delta")
    def validate_delta(cls, v):
        if v == 0:
            raise ValueError("must be non-zero")
        return v


class SimConfig(_Section):
    tier: ModelTier = ModelTier.EFFECTIVE
    n_max: int = Field(default_factory=lambda: settings.DEFAULT_N_MAX, ge=2)
    steps_per_fastest_period: int = Field(default_factory=lambda: settings.STEPS_PER_FASTEST_PERIOD, ge=16)
    integrator: Integrator = Field(default_factory=lambda: Integrator(settings.INTEGRATOR))
    record_stride: int = Field(1, ge=1)
    convergence_check: bool = False
    max_steps: Optional[int] = Field(None, ge=1)
    initial: MotionalPreparation = Field(default_factory=MotionalPreparation)

    @field_validator("initial", mode="before")
    def validate_initial(cls, v):
        """ground | {thermal: n_bar} | {coherent: [re, im]}"""
        if isinstance(v, (MotionalPreparation, type(None))):
            return v or MotionalPreparation()
        if isinstance(v, str):
            return MotionalPreparation(kind=InitialMotion(v))
        if isinstance(v, dict) and len(v) == 1:
            (kind, value), = v.items()
            kind = InitialMotion(kind)
            if kind is InitialMotion.THERMAL:
                return MotionalPreparation(kind=kind, n_bar=value)
            if kind is InitialMotion.COHERENT:
                return MotionalPreparation(kind=kind, alpha=value)
            return MotionalPreparation(kind=kind)
        return v


class OutputConfig(_Section):
    trajectory_csv: Optional[str] = None
    report: Optional[str] = None


class RunConfig(_Section):
    """One gate run as read from a YAML file, after `_2pi_hz` conversion"""
    encoding: EncodingConfig
    trap: TrapConfig
    lasers: LasersConfig = Field(default_factory=LasersConfig)
    geometry: GeometryConfig = Field(default_factory=GeometryConfig)
    gate: GateConfig
    sim: SimConfig = Field(default_factory=SimConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)


class LinspaceSpec(_Section):
    start: float
    stop: float
    count: int = Field(..., ge=2)


class SweepSpec(_Section):
    parameter: str = Field(..., min_length=1, description="Dotted path into the run config")
    values: Optional[List[Any]] = None
    linspace: Optional[LinspaceSpec] = None
    observables: List[Observable] = Field(default_factory=lambda: [Observable.CONDITIONAL_PHASE], min_length=1)
    full_tier_cap: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def validate_points(self):
        if (self.values is None) == (self.linspace is None):
            raise ValueError("give exactly one of 'values' and 'linspace'")
        if len(self.points) < 2:
            raise ValueError("a sweep needs at least 2 points")
        return self

    @property
    def points(self) -> List[Any]:
        if self.linspace is not None:
            return linspace_values(self.linspace.start, self.linspace.stop, self.linspace.count)
        return list(self.values)
