"""
Exception hierarchy. Every class carries the process exit code used by the CLI.
"""
from typing import Optional


class ClockGateError(Exception):
    """Base class for all package errors"""
    exit_code = 1


class ConfigError(ClockGateError):
    """Invalid run configuration, sweep specification or parameter path"""
    exit_code = 2

    def __init__(self, message: str, field_path: Optional[str] = None):
        super().__init__(message)
        self.field_path = field_path


class NumericError(ClockGateError):
    """Numerical or physical failure during a design, propagation or analysis step"""
    exit_code = 3


class InvalidDimensionError(NumericError):
    pass


class NonPhysicalStateError(NumericError):
    pass


class SingularDetuningError(NumericError):
    """Raman detuning too close to a pole of the adiabatic elimination"""
    pass


class GeometryError(NumericError):
    """Ion spacing does not satisfy the opposite-force condition"""
    pass


class TruncationError(NumericError):
    """Fock truncation too small for the motional excursion"""

    def __init__(self, message: str, required_n_max: int):
        super().__init__(f"{message} (required n_max >= {required_n_max})")
        self.required_n_max = required_n_max


class ConvergenceError(NumericError):
    """Half-step comparison exceeded the convergence tolerance"""

    def __init__(self, message: str, achieved_error: float):
        super().__init__(f"{message} (achieved error {achieved_error:.3e})")
        self.achieved_error = achieved_error


class StepBudgetError(NumericError):
    pass


class UnitarityError(NumericError):
    pass


class LoopNotClosedError(NumericError):
    pass


class BudgetError(NumericError):
    """Error-budget formula evaluated outside its range of validity"""
    pass
