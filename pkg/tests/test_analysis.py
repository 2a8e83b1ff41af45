import math

import numpy as np
import pytest

from clockgate.constants.enums import ModelTier
from clockgate.core.exceptions import LoopNotClosedError, UnitarityError
from clockgate.core.utils import wrap_phase
from clockgate.services import analysis_service, dynamics_service


def test_ideal_gate_and_phase_readout():
    gate = analysis_service.ideal_gate(math.pi / 2)
    assert np.allclose(np.diag(gate), [1, 1j, 1j, 1]), "diag(1, i, i, 1) in {uu, ud, du, dd}"
    assert analysis_service.phase_from_propagator(gate) == pytest.approx(math.pi / 2)

    dressed = analysis_service.local_z(0.7, -1.3) @ analysis_service.ideal_gate(0.4)
    assert analysis_service.phase_from_propagator(dressed) == pytest.approx(0.4, abs=1e-12), \
        "local Z rotations do not change the conditional phase"


def test_phase_near_pi_reads_plus_pi():
    assert wrap_phase(-math.pi + 1e-7, 1e-5) == math.pi, "just above -pi snaps to +pi"
    assert wrap_phase(math.pi + 1e-7, 1e-5) == math.pi, "just past +pi wraps to -pi and snaps back"
    assert wrap_phase(-math.pi + 0.1, 1e-5) == pytest.approx(-math.pi + 0.1), "far from the cut nothing moves"
    assert analysis_service.phase_from_propagator(np.diag([1, -1, -1, 1]).astype(complex)) == math.pi
    assert analysis_service.phase_from_propagator(analysis_service.ideal_gate(math.pi + 1e-7)) == math.pi


def test_local_z_convention():
    z = analysis_service.local_z(0.5, 0.0)
    assert np.allclose(np.diag(z), np.exp(-0.25j * np.array([1, 1, -1, -1]))), "Z(b) = diag(e^{-ib/2}, e^{ib/2})"


def test_z_compensation_recovers_local_rotations():
    target = analysis_service.ideal_gate(math.pi / 2)
    unitary = analysis_service.local_z(0.3, -1.1) @ target
    fidelity, beta, converged = analysis_service.z_compensated_process_fidelity(unitary, target)
    assert converged, "BFGS should refine the grid maximum"
    assert fidelity == pytest.approx(1.0, abs=1e-12), f"compensated fidelity should be 1, got {fidelity}"

    corrected = analysis_service.local_z(*beta) @ unitary
    overlap = abs(np.trace(target.conj().T @ corrected)) / 4.0
    assert overlap == pytest.approx(1.0, abs=1e-9), "returned angles should undo the rotations"
    assert analysis_service.process_fidelity(unitary, target) < 0.9, "raw fidelity sees the rotations"


def test_z_compensation_on_random_phase_errors():
    rng = np.random.default_rng(5)
    target = analysis_service.ideal_gate(math.pi / 2)
    for _ in range(50):
        error = rng.uniform(-0.5, 0.5)
        unitary = analysis_service.local_z(*rng.uniform(-math.pi, math.pi, 2)) @ \
            analysis_service.ideal_gate(math.pi / 2 + error)
        fidelity, _, _ = analysis_service.z_compensated_process_fidelity(unitary, target)
        raw = analysis_service.process_fidelity(unitary, target)
        assert fidelity == pytest.approx(math.cos(error / 2) ** 2, abs=1e-9), \
            f"a conditional-phase error e leaves cos^2(e/2), got {fidelity}"
        assert fidelity >= raw - 1e-12, "compensation never lowers the fidelity"


def test_z_compensation_rejects_non_unitary():
    target = analysis_service.ideal_gate()
    with pytest.raises(UnitarityError):
        analysis_service.z_compensated_process_fidelity(0.9 * target, target)
    fidelity, _, _ = analysis_service.z_compensated_process_fidelity(0.9 * target, target, check_unitary=False)
    assert fidelity == pytest.approx(0.81, abs=1e-9)


def test_average_gate_fidelity():
    assert analysis_service.average_gate_fidelity(1.0) == pytest.approx(1.0)
    assert analysis_service.average_gate_fidelity(0.5) == pytest.approx(0.6)


def test_conditional_phase_requires_closed_loop(reference_design):
    result = dynamics_service.run_gate(reference_design, ModelTier.EFFECTIVE, record_trajectory=False)
    assert analysis_service.conditional_phase(result) == pytest.approx(math.pi / 2, abs=1e-5)
    open_loop = result.model_copy(update={"loop_closed": False})
    with pytest.raises(LoopNotClosedError):
        analysis_service.conditional_phase(open_loop)


def test_compare_tiers_on_identical_runs(reference_design):
    result = dynamics_service.run_gate(reference_design, ModelTier.EFFECTIVE, record_trajectory=False)
    comparison = analysis_service.compare_tiers(result, result)
    assert comparison.process_fidelity_z == pytest.approx(1.0, abs=1e-12)
    assert comparison.subspace_error == pytest.approx(0.0, abs=1e-12)
    assert comparison.full_conditional_phase == comparison.effective_conditional_phase
