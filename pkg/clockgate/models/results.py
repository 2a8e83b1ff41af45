import math
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from clockgate.constants.enums import FormulaKind, InitialMotion, Integrator, ModelTier
from clockgate.core.config import settings
from clockgate.core.exceptions import UnitarityError
from clockgate.models.physics import Encoding, GateDesign, parse_complex
from clockgate.models.quantum import QuantumState


def _readonly(value, dtype) -> np.ndarray:
    array = np.array(value, dtype=dtype)
    array.setflags(write=False)
    return array


class PropagationSettings(BaseModel):
    """Step control for the fixed-step propagator"""
    model_config = ConfigDict(frozen=True)

    t_final: Optional[float] = Field(None, gt=0, description="Total time (s); run_gate fills it from the design")
    steps_per_fastest_period: int = Field(
        default_factory=lambda: settings.STEPS_PER_FASTEST_PERIOD, ge=16,
        description="Exponentials per period of the fastest generator frequency")
    record_stride: int = Field(1, ge=1, description="Record every k-th step")
    convergence_check: bool = Field(False, description="Repeat at half the step and compare")
    integrator: Integrator = Field(default_factory=lambda: Integrator(settings.INTEGRATOR))
    max_steps: int = Field(default_factory=lambda: settings.MAX_PROPAGATION_STEPS, ge=1)
    stroboscopic: bool = Field(True, description="Reuse the one-period propagator when possible")

    def refined(self) -> "PropagationSettings":
        return self.model_copy(update={"steps_per_fastest_period": 2 * self.steps_per_fastest_period,
                                       "convergence_check": False})


class MotionalPreparation(BaseModel):
    """Initial motional state: ground, thermal mixture or coherent state"""
    model_config = ConfigDict(frozen=True)

    kind: InitialMotion = InitialMotion.GROUND
    n_bar: float = Field(0.0, ge=0, description="Mean phonon number of the thermal mixture")
    alpha: complex = Field(0j, description="Coherent amplitude")

    @field_validator("alpha", mode="before")
    def validate_alpha(cls, v):
        return parse_complex(v)

    @model_validator(mode="after")
    def validate_n_bar(self):
        if self.kind is InitialMotion.THERMAL and self.n_bar > settings.MAX_THERMAL_N_BAR:
            raise ValueError(f"thermal n_bar={self.n_bar} exceeds {settings.MAX_THERMAL_N_BAR}")
        return self


class BranchTrace(BaseModel):
    """Recorded observables of one computational branch"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    alpha: np.ndarray = Field(..., description="Displacement <a> within the branch block")
    phase: np.ndarray = Field(..., description="Unwrapped arg<branch, motion0|psi> (rad)")
    n_mean: np.ndarray
    norm_err: np.ndarray

    @field_validator("alpha", mode="before")
    def validate_alpha(cls, v):
        return _readonly(v, np.complex128)

    @field_validator("phase", "n_mean", "norm_err", mode="before")
    def validate_real(cls, v):
        return _readonly(v, float)


class Trajectory(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    times: np.ndarray = Field(..., description="Record times (s)")
    branches: Dict[str, BranchTrace]
    states: List[QuantumState] = Field(default_factory=list, description="Sampled states, when kept")

    @field_validator("times", mode="before")
    def validate_times(cls, v):
        return _readonly(v, float)

    @model_validator(mode="after")
    def validate_monotone(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must increase strictly")
        for label, trace in self.branches.items():
            if trace.phase.shape != self.times.shape:
                raise ValueError(f"branch {label} has {trace.phase.shape[0]} records for {self.times.shape[0]} times")
        return self


class FidelityReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    process_fidelity_raw: float = Field(..., ge=0.0, le=1.0)
    process_fidelity_z_compensated: float = Field(..., ge=0.0, le=1.0)
    optimal_z_angles: Tuple[float, float]
    bell_concurrence: float = Field(..., ge=0.0, le=1.0)
    conditional_phase_error: float
    average_gate_fidelity: float = Field(..., ge=0.0, le=1.0)
    thermal_averaged_fidelity: Optional[float] = None
    leakage: float = 0.0
    optimizer_converged: bool = True

    @model_validator(mode="after")
    def validate_compensation(self):
        if self.process_fidelity_z_compensated < self.process_fidelity_raw - 1e-12:
            raise ValueError("compensated fidelity below the raw fidelity")
        return self


class GateResult(BaseModel):
    """Outcome of one gate run: qubit-block propagator, phases and motional residuals"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    tier: ModelTier
    design: GateDesign
    echo: bool = False
    gate_time: float
    total_steps: int
    final_states: List[QuantumState] = Field(
        ..., description="Final states, four basis inputs per motional component (component-major)")
    qubit_propagator: np.ndarray = Field(..., description="4x4 block <j, motion0|psi_b(T)>")
    component_weights: np.ndarray = Field(..., description="Classical weights of the motional components")
    component_propagators: List[np.ndarray] = Field(..., description="Qubit block per motional component")
    branch_phases: Dict[str, float] = Field(..., description="Unwrapped branch phases (rad)")
    conditional_phase: float = Field(..., description="Half alternating branch sum, wrapped to (-pi, pi]")
    conditional_phase_unwrapped: float
    single_ion_phases: Tuple[float, float]
    single_ion_phase_spread: float
    motional_residual: Dict[str, float] = Field(..., description="|<a>_final - <a>_initial| per branch")
    phonon_excess: Dict[str, float]
    leakage: float = 0.0
    mean_excited_population: Tuple[float, float] = (0.0, 0.0)
    loop_closed: bool
    warnings: List[str] = Field(default_factory=list)
    trajectory: Optional[Trajectory] = None
    fidelity: Optional[FidelityReport] = None

    @field_validator("qubit_propagator", mode="before")
    def validate_propagator(cls, v):
        matrix = _readonly(v, np.complex128)
        if matrix.shape != (4, 4):
            raise ValueError(f"qubit propagator must be 4x4, got {matrix.shape}")
        return matrix

    @field_validator("component_weights", mode="before")
    def validate_weights(cls, v):
        return _readonly(v, float)

    @property
    def max_motional_residual(self) -> float:
        return max(self.motional_residual.values())


class EchoSegment(BaseModel):
    model_config = ConfigDict(frozen=True)

    delta_loop: float = Field(..., description="Loop detuning of the segment (rad/s)")
    duration: float = Field(..., gt=0, description="Segment length (s)")
    drive_on: bool = True

    @model_validator(mode="after")
    def validate_closed_loop(self):
        if self.drive_on:
            loop = 2.0 * math.pi / abs(self.delta_loop)
            if abs(self.duration - loop) > 1e-12 * loop:
                raise ValueError(f"driven segment lasts {self.duration:.12g} s, not one loop ({loop:.12g} s)")
        return self


class EchoPulse(BaseModel):
    """Instantaneous qubit pulse applied after segment `position`"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    position: int = Field(..., ge=0)
    unitary: np.ndarray
    label: str = ""

    @field_validator("unitary", mode="before")
    def validate_unitary(cls, v):
        matrix = _readonly(v, np.complex128)
        if matrix.shape != (4, 4):
            raise UnitarityError(f"pulse must be 4x4, got {matrix.shape}")
        deviation = float(np.max(np.abs(matrix.conj().T @ matrix - np.eye(4))))
        if deviation > 1e-12:
            raise UnitarityError(f"pulse is not unitary (deviation {deviation:.3e})")
        return matrix


class EchoSequence(BaseModel):
    model_config = ConfigDict(frozen=True)

    segments: List[EchoSegment]
    pulses: List[EchoPulse] = Field(default_factory=list)

    @model_validator(mode="after")
    def validate_positions(self):
        if not self.segments:
            raise ValueError("a sequence needs at least one segment")
        for pulse in self.pulses:
            if pulse.position >= len(self.segments):
                raise ValueError(f"pulse position {pulse.position} beyond {len(self.segments)} segments")
        return self

    def pulses_after(self, index: int) -> List[EchoPulse]:
        return [p for p in self.pulses if p.position == index]


class TierComparison(BaseModel):
    """Agreement of the FULL-tier qubit block with the EFFECTIVE tier"""
    model_config = ConfigDict(frozen=True)

    process_fidelity_z: float
    optimal_z_angles: Tuple[float, float]
    leakage: float
    mean_excited_population: float
    subspace_error: float = Field(..., description="(1 - F_z) + mean excited population per ion")
    full_conditional_phase: float
    effective_conditional_phase: float


class BudgetScenario(BaseModel):
    model_config = ConfigDict(frozen=True)

    label: str
    encoding: Encoding
    gate_time: float = Field(..., gt=0, description="Gate duration (s)")
    coupling: float = Field(..., ge=0, description="|g| (rad/s)")
    formula_kind: FormulaKind
    eta: Optional[float] = Field(None, gt=0, lt=1)
    delta_loop: Optional[float] = Field(None, description="Loop detuning (rad/s), ground-state chain")
    literature_p_total: Optional[float] = Field(None, ge=0, le=1)
    quoted_p_total: Optional[float] = None
    quoted_p_off: Optional[float] = None
    note: str = ""


class ErrorBudgetReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    label: str
    formula_kind: FormulaKind
    p_off: Optional[float] = Field(None, ge=0, le=1)
    p_total: float = Field(..., ge=0, le=1)
    threshold: float
    threshold_ratio: float
    passes: bool
    chain_steps: List[str] = Field(default_factory=list)
    inputs: Dict[str, float] = Field(default_factory=dict)
    quoted_p_total: Optional[float] = None
    quoted_p_off: Optional[float] = None
    note: str = ""
