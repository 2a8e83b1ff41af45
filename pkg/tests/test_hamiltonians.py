import math

import numpy as np
import pytest

from clockgate.constants.enums import ModelTier
from clockgate.core.exceptions import InvalidDimensionError
from clockgate.models.hamiltonian import FRAME_INTERACTION, FRAME_OPTICAL_RWA, HamiltonianSpec
from clockgate.models.quantum import SpaceDims
from clockgate.services import design_service, hamiltonian_service
from clockgate.services.linalg_service import create


def _hermitian_deviation(matrix):
    return float(np.max(np.abs(matrix - matrix.conj().T)))


def test_force_generator_layout(reference_design):
    n_max = 6
    generator = hamiltonian_service.build_force(reference_design, SpaceDims.of(2, 2, n_max))
    forces = design_service.design_forces(reference_design)
    assert np.count_nonzero(generator.static) == 0, "FORCE tier has no static part"
    term = generator.terms[0]
    assert term.frequency == reference_design.delta_loop, "drive rotates at delta"
    for index, label in enumerate(("uu", "ud", "du", "dd")):
        element = term.operator[index * n_max + 1, index * n_max]
        assert abs(element - forces[label]) <= 1e-9 * abs(forces["ud"]), \
            f"<{label},1|O|{label},0> should be f_{label}"
    assert generator.period == pytest.approx(reference_design.gate_time), "one loop per drive period"


def test_generators_are_hermitian(reference_design, scaled_design):
    effective = hamiltonian_service.build_effective(reference_design, SpaceDims.of(2, 2, 8), include_static_stark=True)
    full = hamiltonian_service.build_full(scaled_design, SpaceDims.of(3, 3, 5))
    for generator in (effective, full):
        for t in (0.0, 0.37 * generator.period, 1.91 * generator.period):
            h = generator.at(t)
            scale = float(np.max(np.abs(h)))
            assert _hermitian_deviation(h) <= 1e-12 * scale, f"{generator.tier.value} H(t) should be Hermitian"


def test_effective_matches_force_at_opposite_spacing(reference_design):
    dims = SpaceDims.of(2, 2, 6)
    force = hamiltonian_service.build_force(reference_design, dims)
    effective = hamiltonian_service.build_effective(reference_design, dims, include_static_stark=False)
    scale = float(np.max(np.abs(force.terms[0].operator)))
    difference = float(np.max(np.abs(force.terms[0].operator - effective.terms[0].operator)))
    assert difference <= 1e-9 * scale, f"EFFECTIVE without chi should reduce to the force model, diff {difference}"
    assert effective.frame == FRAME_INTERACTION


def test_effective_static_stark_shifts(reference_design):
    n_max = 4
    generator = hamiltonian_service.build_effective(reference_design, SpaceDims.of(2, 2, n_max),
                                                    include_static_stark=True)
    coeffs = design_service.stark_coefficients(reference_design.lasers, reference_design.encoding)
    diagonal = np.real(np.diag(generator.static)).reshape(4, n_max)
    expected = [2 * coeffs.chi_up, coeffs.chi_up + coeffs.chi_down, coeffs.chi_down + coeffs.chi_up,
                2 * coeffs.chi_down]
    assert np.allclose(diagonal, np.array(expected)[:, None], rtol=1e-12), "static part is chi_m1 + chi_m2"
    # 4|chi| with |chi| = delta / (2 eta)
    assert generator.fastest_frequency == pytest.approx(20.0 * reference_design.delta_loop, rel=1e-9), \
        "step size follows the static spread"


def test_full_generator_frame(scaled_design):
    n_max = 5
    generator = hamiltonian_service.build_full(scaled_design, SpaceDims.of(3, 3, n_max))
    assert generator.frame == FRAME_OPTICAL_RWA
    assert generator.levels == 3
    assert generator.frame_energies.shape == (9 * n_max,)
    drive = scaled_design.trap.nu - scaled_design.delta_loop
    assert generator.terms[0].frequency == pytest.approx(drive), "laser A rotates at nu - delta"
    assert generator.period == pytest.approx(2.0 * math.pi / drive)
    assert generator.fastest_frequency == pytest.approx(100.0), "fastest scale is Delta = omega0 / 2"
    # T = 2 pi / delta spans an integer number of drive periods at the scaled point
    periods = scaled_design.gate_time / generator.period
    assert abs(periods - round(periods)) < 1e-9, f"gate should span whole periods, got {periods}"


def test_spec_rejects_mismatched_dims(reference_design):
    with pytest.raises(InvalidDimensionError):
        HamiltonianSpec(tier=ModelTier.FULL, design=reference_design, dims=SpaceDims.of(2, 2, 10))
    with pytest.raises(InvalidDimensionError):
        hamiltonian_service.build_force(reference_design, SpaceDims.of(3, 3, 10))
    with pytest.raises(InvalidDimensionError):
        hamiltonian_service.build_driven_oscillator(1.0, 0.0, 10)


def test_build_generator_dispatch(reference_design):
    spec = HamiltonianSpec(tier=ModelTier.EFFECTIVE, design=reference_design, dims=SpaceDims.of(2, 2, 6))
    assert hamiltonian_service.build_generator(spec).tier is ModelTier.EFFECTIVE
    spec = HamiltonianSpec(tier=ModelTier.FORCE, design=reference_design, dims=SpaceDims.of(2, 2, 6))
    assert hamiltonian_service.build_generator(spec).tier is ModelTier.FORCE


def test_numeric_elimination_matches_closed_form(scaled_design):
    analytic = design_service.stark_coefficients(scaled_design.lasers, scaled_design.encoding)
    first_order = hamiltonian_service.eliminate_excited_numeric(scaled_design, first_order=True)
    eta_sq = scaled_design.trap.eta ** 2

    for level in ("up", "down"):
        theta = getattr(analytic, f"theta_{level}")
        chi = getattr(analytic, f"chi_{level}")
        assert abs(getattr(first_order, f"theta_{level}") - theta) <= 1e-9 * abs(theta), \
            f"theta_{level} should match the elimination formula"
        # the first-order motional factors add eta^2/4 to the diagonal
        assert getattr(first_order, f"chi_{level}") == pytest.approx(chi * (1 + eta_sq / 4), rel=1e-9), \
            f"chi_{level} should match up to the eta^2 dressing"

    exact = hamiltonian_service.eliminate_excited_numeric(scaled_design, n_max=12, first_order=False)
    assert abs(exact.theta_up - analytic.theta_up) <= 2 * eta_sq * abs(analytic.theta_up), \
        "exact motional factors agree to O(eta^2)"


def test_sideband_raising_limits():
    n_max = 12
    small = hamiltonian_service.sideband_raising(n_max, 1e-6)
    assert np.allclose(small, create(n_max).entries, atol=1e-10), "eta -> 0 recovers a^dag"

    eta = 0.1
    exact = hamiltonian_service.sideband_raising(n_max, eta)
    factor = hamiltonian_service.motional_factor(40, eta, +1)
    for n in range(10):
        expected = factor[n + 1, n] / (1j * eta)
        assert abs(exact[n + 1, n] - expected) < 1e-10, f"<{n + 1}|exp(i eta X)|{n}> / (i eta) mismatch at n={n}"
    assert np.count_nonzero(np.tril(exact, -2)) == 0 and np.count_nonzero(np.triu(exact)) == 0, \
        "only the first lower diagonal is filled"


def test_exact_sideband_effective_drive(reference_design):
    n_max = 6
    eta = reference_design.trap.eta
    plain = hamiltonian_service.build_effective(reference_design, SpaceDims.of(2, 2, n_max))
    exact = hamiltonian_service.build_effective(reference_design.evolve(exact_sideband=True),
                                                SpaceDims.of(2, 2, n_max))
    # ud branch, |0> -> |1>: e^{-eta^2/2} L_0^(1) = e^{-eta^2/2}
    ud = n_max
    assert exact.terms[0].operator[ud + 1, ud] == pytest.approx(
        math.exp(-0.5 * eta ** 2) * plain.terms[0].operator[ud + 1, ud], rel=1e-12)
    assert np.allclose(exact.static, plain.static), "only the drive changes"
