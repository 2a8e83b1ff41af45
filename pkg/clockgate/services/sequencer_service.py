"""
Multi-segment gate schedules. The spin echo splits the gate into two closed loops at
sqrt(2) * delta with an X(x)X population swap after each loop.
"""
import math

import numpy as np

from clockgate.core.exceptions import InvalidDimensionError, NumericError
from clockgate.core.logging import logger
from clockgate.models.physics import GateDesign
from clockgate.models.quantum import Operator, QuantumState, SpaceDims
from clockgate.models.results import EchoPulse, EchoSegment, EchoSequence
from clockgate.services import design_service
from clockgate.services.linalg_service import assert_unitary, kron_all, sigma_x

X_PAIR = kron_all([sigma_x(), sigma_x()]).entries
ECHO_DETUNING_FACTOR = math.sqrt(2.0)


def compose_echo(design: GateDesign) -> EchoSequence:
    """
    Two loops at delta' = sqrt(2) delta per designed loop, each followed by X(x)X.
    Each loop then carries half the designed phase, and the drive time grows by sqrt(2).
    """
    delta_echo = ECHO_DETUNING_FACTOR * design.delta_loop
    if abs(delta_echo) > design.trap.nu / 50.0:
        raise NumericError(f"echo detuning {delta_echo:.6g} rad/s violates |delta| <= nu/50")
    loop = 2.0 * math.pi / abs(delta_echo)
    segments = [EchoSegment(delta_loop=delta_echo, duration=loop) for _ in range(2 * design.n_loops)]
    pulses = [EchoPulse(position=i, unitary=X_PAIR, label="XX") for i in range(len(segments))]
    logger.app_info(f"Echo schedule: {len(segments)} loops at {delta_echo:.9g} rad/s")
    return EchoSequence(segments=segments, pulses=pulses)


def total_drive_time(sequence: EchoSequence) -> float:
    return sum(segment.duration for segment in sequence.segments if segment.drive_on)


def echo_loop_phase(design: GateDesign) -> float:
    """Conditional phase of one echo loop"""
    return design_service.predicted_phase(
        design.evolve(delta_loop=ECHO_DETUNING_FACTOR * design.delta_loop, n_loops=1))


def embed_qubit_pulse(pulse: np.ndarray, dims: SpaceDims) -> Operator:
    """
    Lift a 4x4 qubit-pair unitary to [2, 2, n] or [3, 3, n]; identity on |e> and on motion
    """
    pulse = np.asarray(pulse, dtype=np.complex128)
    if pulse.shape != (4, 4):
        raise InvalidDimensionError(f"qubit pulse must be 4x4, got {pulse.shape}")
    assert_unitary(pulse, tol=1e-12, what="qubit pulse")
    factors = dims.factors
    if len(factors) != 3 or factors[0] != factors[1] or factors[0] not in (2, 3):
        raise InvalidDimensionError(f"pulses act on [2, 2, n] or [3, 3, n], got {list(factors)}")
    levels, n_max = factors[0], factors[2]
    spin = pulse
    if levels == 3:
        spin = np.eye(9, dtype=np.complex128)
        qubit = [m1 * 3 + m2 for m1 in (0, 1) for m2 in (0, 1)]
        spin[np.ix_(qubit, qubit)] = pulse
    return Operator(dims=dims, entries=np.kron(spin, np.eye(n_max)))


def apply_pulse(state: QuantumState, pulse: np.ndarray) -> QuantumState:
    """Instantaneous (pulse (x) 1_Fock) applied to a state"""
    return embed_qubit_pulse(pulse, state.dims).apply(state)
