from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from clockgate.core.config import settings
from clockgate.core.exceptions import InvalidDimensionError, NonPhysicalStateError


def _frozen_array(value, ndim: int) -> np.ndarray:
    array = np.array(value, dtype=np.complex128)
    if array.ndim != ndim:
        raise InvalidDimensionError(f"expected a {ndim}-dimensional array, got shape {array.shape}")
    array.setflags(write=False)
    return array


class SpaceDims(BaseModel):
    """
    Ordered subsystem dimensions of a composite space, e.g. (3, 3, n_max) for
    ion-1 levels ⊗ ion-2 levels ⊗ Fock
    """
    model_config = ConfigDict(frozen=True)

    factors: Tuple[int, ...] = Field(..., description="Subsystem dimensions in tensor order")

    @field_validator("factors")
    def validate_factors(cls, v):
        if len(v) == 0:
            raise InvalidDimensionError("a space needs at least one factor")
        if any(int(f) < 2 for f in v):
            raise InvalidDimensionError(f"every factor must be >= 2, got {list(v)}")
        total = int(np.prod(v))
        if total > settings.MAX_HILBERT_DIMENSION:
            raise InvalidDimensionError(
                f"total dimension {total} exceeds {settings.MAX_HILBERT_DIMENSION}")
        return tuple(int(f) for f in v)

    @classmethod
    def of(cls, *factors: int) -> "SpaceDims":
        return cls(factors=tuple(factors))

    @property
    def total(self) -> int:
        return int(np.prod(self.factors))

    def __add__(self, other: "SpaceDims") -> "SpaceDims":
        return SpaceDims(factors=self.factors + other.factors)


class QuantumState(BaseModel):
    """Dense state vector over a composite space"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dims: SpaceDims
    amplitudes: np.ndarray = Field(..., description="Complex amplitudes, length = dims.total")
    truncation_weight: Optional[float] = Field(
        None, description="Top-two Fock level population of a truncated construction")

    @field_validator("amplitudes", mode="before")
    def validate_amplitudes(cls, v):
        return _frozen_array(v, 1)

    @model_validator(mode="after")
    def validate_length(self):
        if self.amplitudes.shape[0] != self.dims.total:
            raise InvalidDimensionError(
                f"state length {self.amplitudes.shape[0]} does not match dims {self.dims.factors}")
        return self

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "QuantumState":
        norm = self.norm
        if norm == 0.0:
            raise NonPhysicalStateError("cannot normalize the zero vector")
        return QuantumState(dims=self.dims, amplitudes=self.amplitudes / norm,
                            truncation_weight=self.truncation_weight)


class Operator(BaseModel):
    """Dense square matrix over a composite space"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dims: SpaceDims
    entries: np.ndarray = Field(..., description="Complex square matrix, side = dims.total")
    hermitian: bool = Field(False, description="When set, Hermiticity is verified on construction")

    @field_validator("entries", mode="before")
    def validate_entries(cls, v):
        return _frozen_array(v, 2)

    @model_validator(mode="after")
    def validate_shape(self):
        side = self.dims.total
        if self.entries.shape != (side, side):
            raise InvalidDimensionError(
                f"operator shape {self.entries.shape} does not match dims {self.dims.factors}")
        if self.hermitian:
            deviation = float(np.max(np.abs(self.entries - self.entries.conj().T)))
            if deviation >= 1e-12:
                raise NonPhysicalStateError(f"operator flagged Hermitian deviates by {deviation:.3e}")
        return self

    def dag(self) -> "Operator":
        return Operator(dims=self.dims, entries=self.entries.conj().T, hermitian=self.hermitian)

    def apply(self, state: QuantumState) -> QuantumState:
        if state.dims.factors != self.dims.factors:
            raise InvalidDimensionError(
                f"operator dims {self.dims.factors} do not match state dims {state.dims.factors}")
        return QuantumState(dims=self.dims, amplitudes=self.entries @ state.amplitudes)

    def __matmul__(self, other: "Operator") -> "Operator":
        if other.dims.factors != self.dims.factors:
            raise InvalidDimensionError("operator dims do not match")
        return Operator(dims=self.dims, entries=self.entries @ other.entries)
