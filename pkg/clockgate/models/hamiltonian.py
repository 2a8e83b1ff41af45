import math
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from clockgate.constants.enums import ModelTier
from clockgate.core.exceptions import InvalidDimensionError
from clockgate.models.physics import GateDesign
from clockgate.models.quantum import SpaceDims

FRAME_INTERACTION = "interaction"
FRAME_OPTICAL_RWA = "optical_rwa"


class HamiltonianSpec(BaseModel):
    """What to build: tier, design and the composite space"""
    model_config = ConfigDict(frozen=True)

    tier: ModelTier
    design: GateDesign
    dims: SpaceDims

    @model_validator(mode="after")
    def validate_dims(self):
        expected = 3 if self.tier is ModelTier.FULL else 2
        factors = self.dims.factors
        if len(factors) != 3 or factors[0] != expected or factors[1] != expected:
            raise InvalidDimensionError(
                f"{self.tier.value} tier needs dims [{expected}, {expected}, n_max], got {list(factors)}")
        return self

    @property
    def frame(self) -> str:
        return FRAME_OPTICAL_RWA if self.tier is ModelTier.FULL else FRAME_INTERACTION

    @property
    def levels(self) -> int:
        return self.dims.factors[0]

    @property
    def n_max(self) -> int:
        return self.dims.factors[-1]


class HarmonicTerm(BaseModel):
    """O e^{i w t} + h.c."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    frequency: float
    operator: np.ndarray

    @field_validator("operator", mode="before")
    def validate_operator(cls, v):
        array = np.array(v, dtype=np.complex128)
        array.setflags(write=False)
        return array


class Generator(BaseModel):
    """
    Time-dependent Hamiltonian H(t) = H_s + sum_k (O_k e^{i w_k t} + O_k^dag e^{-i w_k t}),
    in units of hbar (rad/s). Evaluation is pure, so one instance can be shared by threads.

    When `frame_energies` is set, integration runs in a frame where the state picks up
    exp(-i h_f t) relative to the interaction picture; `to_interaction` undoes it.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    tier: ModelTier
    dims: SpaceDims
    static: np.ndarray = Field(..., description="Time-independent Hermitian part")
    terms: Tuple[HarmonicTerm, ...] = ()
    fastest_frequency: float = Field(..., gt=0, description="Sets the integration step (rad/s)")
    period: Optional[float] = Field(None, gt=0, description="Common period of all terms (s)")
    frame_energies: Optional[np.ndarray] = None
    levels: int = Field(0, description="Levels per ion; 0 for a bare oscillator")
    frame: str = FRAME_INTERACTION

    @field_validator("static", mode="before")
    def validate_static(cls, v):
        array = np.array(v, dtype=np.complex128)
        array = 0.5 * (array + array.conj().T)
        array.setflags(write=False)
        return array

    @field_validator("frame_energies", mode="before")
    def validate_frame(cls, v):
        if v is None:
            return None
        array = np.array(v, dtype=float)
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def validate_shapes(self):
        side = self.dims.total
        if self.static.shape != (side, side):
            raise InvalidDimensionError(f"static part {self.static.shape} does not match dims {self.dims.factors}")
        for term in self.terms:
            if term.operator.shape != (side, side):
                raise InvalidDimensionError(f"harmonic term {term.operator.shape} does not match dims")
        if self.frame_energies is not None and self.frame_energies.shape != (side,):
            raise InvalidDimensionError("frame energies must be a vector over the full space")
        return self

    @property
    def n_max(self) -> int:
        return self.dims.factors[-1]

    def at(self, t: float) -> np.ndarray:
        """H(t); Hermitian elementwise by construction"""
        if not self.terms:
            return np.array(self.static)
        rotating = sum(term.operator * complex(math.cos(term.frequency * t), math.sin(term.frequency * t))
                       for term in self.terms)
        return self.static + (rotating + rotating.conj().T)

    def to_interaction(self, block: np.ndarray, t: float) -> np.ndarray:
        """Apply exp(i h_f t) row-wise to a state block"""
        if self.frame_energies is None:
            return block
        phases = np.exp(1j * self.frame_energies * t)
        return phases[:, None] * block if block.ndim == 2 else phases * block
