import math

import numpy as np
import pytest

from clockgate.constants.enums import ModeKind, SpinLevel
from clockgate.core.exceptions import GeometryError, SingularDetuningError
from clockgate.models.physics import Encoding, IonGeometry, LaserPair, TrapMode
from clockgate.services import design_service

TWO_PI = 2.0 * math.pi
OMEGA0 = TWO_PI * 3.226e9
NU = TWO_PI * 1.2e6
DELTA = TWO_PI * 1.0e3
ETA = 0.1


def _encoding(omega0=OMEGA0):
    return Encoding(omega0=omega0, gamma_d=TWO_PI * 0.18)


def _lasers(g, delta_raman=OMEGA0 / 2.0, **kwargs):
    return LaserPair(g_a=g, g_b=g, delta_raman=delta_raman, **kwargs)


def test_stark_coefficients_at_optimal_detuning():
    g = TWO_PI * 2.0e6
    coeffs = design_service.stark_coefficients(_lasers(g), _encoding())
    scale = g ** 2 / OMEGA0
    assert coeffs.theta_up == pytest.approx(-2.0 * scale, rel=1e-12), "theta_up = -2 g^2 / omega0"
    assert coeffs.theta_down == pytest.approx(2.0 * scale, rel=1e-12), "theta_down = +2 g^2 / omega0"
    assert coeffs.chi_up == pytest.approx(-4.0 * scale, rel=1e-12), "chi_up = -4 g^2 / omega0"
    assert coeffs.chi_down == pytest.approx(4.0 * scale, rel=1e-12), "chi_down = +4 g^2 / omega0"
    assert abs(abs(coeffs.theta_up) / TWO_PI - 2479.85) < 0.1, \
        f"|theta_up| should be 2pi x 2479.85 Hz, got {abs(coeffs.theta_up) / TWO_PI}"


def test_stark_coefficients_vanish_without_drive():
    coeffs = design_service.stark_coefficients(_lasers(0.0), _encoding())
    assert coeffs.chi_up == 0.0 and coeffs.chi_down == 0.0, "chi should vanish for g = 0"
    assert coeffs.theta_up == 0.0 and coeffs.theta_down == 0.0, "theta should vanish for g = 0"


@pytest.mark.parametrize("delta_raman", [0.0, OMEGA0, OMEGA0 + TWO_PI * 1.0e6])
def test_pole_guard(delta_raman):
    with pytest.raises(SingularDetuningError):
        design_service.stark_coefficients(_lasers(TWO_PI * 2.0e6, delta_raman), _encoding())


def test_required_coupling_reference_values():
    trap = TrapMode(nu=NU, eta=ETA)
    g = design_service.required_coupling(DELTA, trap, _encoding())
    assert abs(g / TWO_PI - 2.0081e6) / 2.0081e6 < 5e-3, f"|g| should be 2pi x 2.0081 MHz, got {g / TWO_PI}"
    assert design_service.required_coupling(4.0 * DELTA, trap, _encoding()) == pytest.approx(2.0 * g, rel=1e-12), \
        "|g| scales with sqrt(delta)"

    d_manifold = Encoding(omega0=TWO_PI * 6.452e6, gamma_d=TWO_PI * 0.18, mediator_occupied_during_gate=True)
    g_d = design_service.required_coupling(TWO_PI * 1.0e4, trap, d_manifold)
    assert abs(g_d / TWO_PI - 2.84e5) < 1.0e3, f"D-manifold |g| should be 2pi x 284 kHz, got {g_d / TWO_PI}"


def test_discrimination_residual():
    trap = TrapMode(nu=NU, eta=ETA)
    encoding = _encoding()
    g = design_service.required_coupling(DELTA, trap, encoding)
    target = DELTA / (2.0 * ETA)

    residual = design_service.discrimination_residual(_lasers(g), encoding, trap, DELTA)
    assert abs(residual) < 1e-9 * target, f"designed coupling should zero the residual, got {residual}"
    assert design_service.discrimination(_lasers(g), encoding) == pytest.approx(4.0 * g ** 2 / OMEGA0, rel=1e-12)

    off = design_service.discrimination_residual(_lasers(1.1 * g), encoding, trap, DELTA)
    assert off == pytest.approx(0.21 * target, rel=1e-6), f"10% more coupling gives +21% discrimination, got {off}"


def test_solve_coupling_random_shapes():
    rng = np.random.default_rng(11)
    encoding = _encoding()
    for _ in range(100):
        trap = TrapMode(nu=NU, eta=rng.uniform(0.05, 0.3))
        delta = TWO_PI * rng.uniform(200.0, 2000.0) * rng.choice([-1.0, 1.0])
        shape = {"up": complex(*rng.normal(size=2)), "down": complex(*rng.normal(size=2))}
        lasers = LaserPair(g_a=shape, g_b={"up": complex(*rng.normal(size=2)), "down": complex(*rng.normal(size=2))},
                           delta_raman=OMEGA0 * rng.uniform(0.3, 0.7))
        solved = design_service.solve_coupling(lasers, encoding, trap, delta)
        residual = design_service.discrimination_residual(solved, encoding, trap, delta)
        assert abs(residual) < 1e-9 * abs(delta / (2.0 * trap.eta)), f"residual {residual} after solve"


def test_solve_coupling_matches_scan_off_optimum():
    trap = TrapMode(nu=NU, eta=ETA)
    encoding = _encoding()
    delta_raman = OMEGA0 / 4.0
    solved = design_service.solve_coupling(_lasers(1.0, delta_raman), encoding, trap, DELTA)

    scan = np.linspace(TWO_PI * 1.0e6, TWO_PI * 4.0e6, 30001)
    residuals = np.array([design_service.discrimination_residual(_lasers(g, delta_raman), encoding, trap, DELTA)
                          for g in scan[::100]])
    crossing = int(np.argmax(residuals > 0))
    lower, upper = scan[::100][crossing - 1], scan[::100][crossing]
    assert lower <= solved.max_coupling <= upper, \
        f"solved |g| {solved.max_coupling} should lie in the bracketing scan interval [{lower}, {upper}]"
    # |g|^2 (1/Delta + 1/(omega0 - Delta)) = delta / (2 eta)
    expected = math.sqrt(DELTA / (2.0 * ETA) / (1.0 / delta_raman + 1.0 / (OMEGA0 - delta_raman)))
    assert solved.max_coupling == pytest.approx(expected, rel=1e-12)


def test_validity_report_reference_ratios(reference_design):
    report = design_service.validity_report(reference_design)
    assert abs(report.check_I_up.value - 1.245e-3) < 1e-5, f"(I) ratio, got {report.check_I_up.value}"
    assert abs(report.check_I_down.value - 1.245e-3) < 1e-5, f"(I) ratio, got {report.check_I_down.value}"
    assert abs(report.check_II.value - 2.08e-3) < 5e-5, f"(II) ratio, got {report.check_II.value}"
    assert report.check_III.value == pytest.approx(0.005, rel=1e-12), f"(III) ratio, got {report.check_III.value}"
    assert report.all_passed, "reference design should pass every check"

    strict = design_service.validity_report(reference_design, threshold=1e-3)
    assert not strict.check_I_up.passed and not strict.all_passed, "a tighter bound should fail (I)"


def test_branch_forces_at_design_point(reference_design):
    forces = design_service.design_forces(reference_design)
    assert abs(forces["uu"]) < 1e-9 * abs(forces["ud"]), "aligned spins feel no force"
    assert abs(forces["dd"]) < 1e-9 * abs(forces["ud"]), "aligned spins feel no force"
    assert abs(forces["ud"] + forces["du"]) < 1e-9 * abs(forces["ud"]), "opposite spins feel opposite forces"
    ratio = abs(forces["ud"]) / abs(reference_design.delta_loop)
    assert abs(ratio - 0.5) < 1e-9, f"|f_ud| / delta should be 1/2, got {ratio}"

    coeffs = design_service.stark_coefficients(reference_design.lasers, reference_design.encoding)
    direct = design_service.branch_force(SpinLevel.UP, SpinLevel.DOWN, coeffs, reference_design.trap,
                                         reference_design.geometry, reference_design.lasers)
    assert abs(direct - forces["ud"]) < 1e-9 * abs(direct), "both force expressions agree at the spacing"


def test_branch_force_rejects_wrong_spacing(reference_design):
    coeffs = design_service.stark_coefficients(reference_design.lasers, reference_design.encoding)
    geometry = IonGeometry(z0_1=0.0, z0_2=1.1 * reference_design.geometry.z0_2)
    with pytest.raises(GeometryError):
        design_service.branch_force(SpinLevel.UP, SpinLevel.DOWN, coeffs, reference_design.trap, geometry,
                                    reference_design.lasers)
    with pytest.raises(GeometryError):
        reference_design.evolve(geometry=geometry)


def test_predicted_phase_scaling(reference_design):
    assert abs(design_service.predicted_phase(reference_design) - math.pi / 2) < 1e-9, "design point gives pi/2"
    half = reference_design.evolve(lasers=reference_design.lasers.scaled(0.5))
    assert design_service.predicted_phase(half) == pytest.approx(math.pi / 32, rel=1e-9), "Phi scales as |g|^4"
    double = reference_design.evolve(lasers=reference_design.lasers.scaled(2.0))
    assert design_service.predicted_phase(double) == pytest.approx(8.0 * math.pi, rel=1e-9), "Phi scales as |g|^4"
    two_loops = reference_design.evolve(n_loops=2)
    assert design_service.predicted_phase(two_loops) == pytest.approx(math.pi, rel=1e-9), "Phi scales with loops"


def test_ion_spacing():
    dkz = 1.2e7
    assert dkz * design_service.ion_spacing(dkz, 9) == pytest.approx(19.0 * math.pi), "CM: (2n+1) pi"
    assert dkz * design_service.ion_spacing(dkz, 3, ModeKind.STRETCH) == pytest.approx(6.0 * math.pi), \
        "stretch: 2n pi"
    with pytest.raises(GeometryError):
        design_service.ion_spacing(dkz, 0, ModeKind.STRETCH)
    with pytest.raises(GeometryError):
        design_service.ion_spacing(dkz, -1)


def test_stretch_mode_design(reference_design):
    trap = TrapMode(nu=NU * math.sqrt(3.0), eta=ETA / 3 ** 0.25, mode_kind=ModeKind.STRETCH)
    geometry = design_service.default_geometry(reference_design.lasers, 9, ModeKind.STRETCH)
    design = reference_design.evolve(trap=trap, geometry=geometry)
    forces = design_service.design_forces(design)
    assert abs(forces["uu"]) < 1e-9 * abs(forces["ud"]), "stretch spacing also cancels aligned forces"


def test_stark_to_force_ratio_and_offsets(reference_design):
    coeffs = design_service.stark_coefficients(reference_design.lasers, reference_design.encoding)
    ratio = design_service.stark_to_force_ratio(coeffs, reference_design.trap)
    assert ratio == pytest.approx(2.0 / ETA, rel=1e-9), f"|chi| / |eta theta| should be 2/eta, got {ratio}"

    offsets = design_service.laser_frequency_offsets(reference_design)
    assert offsets["omega_b"] == pytest.approx(OMEGA0 / 2.0)
    assert offsets["omega_b"] - offsets["omega_a"] == pytest.approx(NU - DELTA, rel=1e-9), \
        "the beat note sits delta below the mode"
