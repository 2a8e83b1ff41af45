import math
from typing import Any, Dict, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from clockgate.constants.enums import ModeKind, SpinLevel
from clockgate.core.config import settings
from clockgate.core.exceptions import GeometryError, SingularDetuningError

# Effective wave-vector difference of two 729 nm beams crossing at 90 degrees
DEFAULT_DKZ = math.sqrt(2.0) * 2.0 * math.pi / 729.147e-9
SPACING_TOLERANCE = 1e-6


def parse_complex(value: Any) -> complex:
    """Accept numbers, strings such as '1+2j' and [re, im] pairs"""
    if isinstance(value, complex):
        return value
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if isinstance(value, str):
        return complex(value.replace(" ", ""))
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ValueError(f"cannot interpret {value!r} as a complex number")


class Encoding(BaseModel):
    """Qubit encoding: splitting, mediator linewidth and where the population sits"""
    model_config = ConfigDict(frozen=True)

    omega0: float = Field(..., gt=0, description="Qubit angular splitting (rad/s)")
    gamma_d: float = Field(0.0, ge=0, description="Mediator linewidth, angular (rad/s)")
    label: str = Field("clock qubit", description="Scenario name")
    mediator_occupied_during_gate: bool = Field(
        False, description="True when the qubit itself is stored in the metastable manifold")


class TrapMode(BaseModel):
    model_config = ConfigDict(frozen=True)

    nu: float = Field(..., gt=0, description="Mode angular frequency (rad/s)")
    eta: float = Field(..., gt=0, lt=1, description="Lamb-Dicke parameter")
    mode_kind: ModeKind = Field(ModeKind.CM, description="Collective mode driven by the gate")


class LaserPair(BaseModel):
    """
    Raman beam pair A/B. Couplings are stored per qubit level; a scalar input applies to
    both levels.
    """
    model_config = ConfigDict(frozen=True)

    g_a: Dict[SpinLevel, complex] = Field(..., description="Laser A couplings per level (rad/s)")
    g_b: Dict[SpinLevel, complex] = Field(..., description="Laser B couplings per level (rad/s)")
    delta_raman: float = Field(..., description="Raman detuning Delta from the up -> e transition (rad/s)")
    phi_a: float = Field(0.0, description="Optical phase of laser A (rad)")
    phi_b: float = Field(0.0, description="Optical phase of laser B (rad)")
    dkz: float = Field(DEFAULT_DKZ, gt=0, description="k_Bz - k_Az along the trap axis (rad/m)")

    @field_validator("g_a", "g_b", mode="before")
    def validate_couplings(cls, v):
        if isinstance(v, dict):
            levels = {SpinLevel(k): parse_complex(val) for k, val in v.items()}
            if set(levels) != {SpinLevel.UP, SpinLevel.DOWN}:
                raise ValueError("per-level couplings need exactly the keys 'up' and 'down'")
            return levels
        value = parse_complex(v)
        return {SpinLevel.UP: value, SpinLevel.DOWN: value}

    def coupling(self, laser: str, level: SpinLevel) -> complex:
        return (self.g_a if laser == "a" else self.g_b)[level]

    @property
    def max_coupling(self) -> float:
        return max(abs(g) for g in list(self.g_a.values()) + list(self.g_b.values()))

    @property
    def is_active(self) -> bool:
        return self.max_coupling > 0.0

    def scaled(self, factor: float) -> "LaserPair":
        """Same coupling shape, every coupling multiplied by a real factor"""
        data = self.model_dump()
        data["g_a"] = {k: v * factor for k, v in self.g_a.items()}
        data["g_b"] = {k: v * factor for k, v in self.g_b.items()}
        return LaserPair(**data)

    def with_detuning(self, delta_raman: float) -> "LaserPair":
        data = self.model_dump()
        data["delta_raman"] = delta_raman
        return LaserPair(**data)


class IonGeometry(BaseModel):
    model_config = ConfigDict(frozen=True)

    z0_1: float = Field(..., description="Equilibrium position of ion 1 (m)")
    z0_2: float = Field(..., description="Equilibrium position of ion 2 (m)")

    @model_validator(mode="after")
    def validate_distinct(self):
        if self.z0_1 == self.z0_2:
            raise ValueError("ion positions must differ")
        return self

    def spacing_phase(self, dkz: float) -> float:
        """dkz * (z0_1 - z0_2), equal to phi_2 - phi_1"""
        return dkz * (self.z0_1 - self.z0_2)

    def phases(self, lasers: LaserPair) -> Tuple[float, float]:
        """phi_i = phi_B - phi_A - dkz * z0_i"""
        base = lasers.phi_b - lasers.phi_a
        return base - lasers.dkz * self.z0_1, base - lasers.dkz * self.z0_2


def opposite_force_offset(spacing_phase: float, mode_kind: ModeKind) -> float:
    """
    Distance (rad) of the spacing phase from the opposite-force condition:
    pi mod 2pi for the CM mode, 0 mod 2pi for the stretch mode
    """
    target = math.pi if mode_kind is ModeKind.CM else 0.0
    return abs(math.remainder(spacing_phase - target, 2.0 * math.pi))


class StarkCoefficients(BaseModel):
    """Time-averaged (chi) and modulated (theta) Stark terms after elimination of |e>"""
    model_config = ConfigDict(frozen=True)

    chi_up: float
    chi_down: float
    theta_up: complex
    theta_down: complex

    def chi(self, level: SpinLevel) -> float:
        return self.chi_up if level is SpinLevel.UP else self.chi_down

    def theta(self, level: SpinLevel) -> complex:
        return self.theta_up if level is SpinLevel.UP else self.theta_down


class GateDesign(BaseModel):
    """All physical parameters of one gate run"""
    model_config = ConfigDict(frozen=True)

    encoding: Encoding
    trap: TrapMode
    lasers: LaserPair
    geometry: IonGeometry
    delta_loop: float = Field(..., description="Loop detuning delta (rad/s)")
    n_loops: int = Field(1, ge=1, description="Number of phase-space loops")
    include_static_stark: bool = Field(False, description="Keep the chi terms in the dynamics")
    exact_sideband: bool = Field(False, description="EFFECTIVE drive keeps the full sideband elements "
                                                   "of exp(i eta (a + a^dag))")
    require_opposite_forces: bool = Field(True, description="Enforce the opposite-force spacing")
    target_phase: float = Field(math.pi / 2, description="Designed conditional phase (rad)")

    @model_validator(mode="after")
    def validate_design(self):
        if self.delta_loop == 0.0:
            raise ValueError("delta_loop must be non-zero")
        if abs(self.delta_loop) > self.trap.nu / 50.0:
            raise ValueError(f"delta_loop={self.delta_loop:.6g} violates |delta| <= nu/50")
        check_pole_guard(self.lasers, self.encoding)
        if self.require_opposite_forces:
            offset = opposite_force_offset(self.geometry.spacing_phase(self.lasers.dkz),
                                           self.trap.mode_kind)
            if offset > SPACING_TOLERANCE:
                raise GeometryError(
                    f"ion spacing misses the opposite-force condition by {offset:.3e} rad")
        return self

    @property
    def gate_time(self) -> float:
        """n_loops * 2pi / |delta|"""
        return self.n_loops * 2.0 * math.pi / abs(self.delta_loop)

    def phases(self) -> Tuple[float, float]:
        return self.geometry.phases(self.lasers)

    def evolve(self, **changes) -> "GateDesign":
        """Validated copy with some fields replaced"""
        data = {name: getattr(self, name) for name in type(self).model_fields}
        data.update(changes)
        return GateDesign(**data)


def check_pole_guard(lasers: LaserPair, encoding: Encoding) -> None:
    """
    Reject detunings within POLE_GUARD_FACTOR couplings of either pole, and Delta in {0, omega0}
    """
    band = settings.POLE_GUARD_FACTOR * lasers.max_coupling
    for name, detuning in (("Delta", lasers.delta_raman),
                           ("Delta - omega0", lasers.delta_raman - encoding.omega0)):
        if detuning == 0.0 or abs(detuning) < band:
            raise SingularDetuningError(
                f"{name}={detuning:.6g} rad/s lies within {settings.POLE_GUARD_FACTOR:g} x max|g| of a pole")


class ValidityCheck(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float
    bound: float
    passed: bool


class ValidityReport(BaseModel):
    """Ratios behind the approximations (I)-(III)"""
    model_config = ConfigDict(frozen=True)

    check_I_up: ValidityCheck = Field(..., description="max|g| / |Delta|")
    check_I_down: ValidityCheck = Field(..., description="max|g| / |Delta - omega0|")
    check_II: ValidityCheck = Field(..., description="max|theta| / nu")
    check_III: ValidityCheck = Field(..., description="eta^2 (n_bar + 1/2)")
    threshold: float

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in (self.check_I_up, self.check_I_down, self.check_II, self.check_III))
