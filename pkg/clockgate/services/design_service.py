"""
Gate design: Stark coefficients after eliminating the mediator level, the coupling
solve for a target conditional phase, validity ratios and spin-dependent forces.
"""
import math
from typing import Dict, Optional, Tuple

from clockgate.constants.enums import BRANCH_LABELS, BRANCH_SPINS, ModeKind, SpinLevel
from clockgate.core.config import settings
from clockgate.core.exceptions import GeometryError, NumericError
from clockgate.core.logging import logger
from clockgate.models.physics import (
    SPACING_TOLERANCE,
    Encoding,
    GateDesign,
    IonGeometry,
    LaserPair,
    StarkCoefficients,
    TrapMode,
    ValidityCheck,
    ValidityReport,
    check_pole_guard,
    opposite_force_offset,
)


def stark_coefficients(lasers: LaserPair, encoding: Encoding) -> StarkCoefficients:
    """
    chi_m = -(|g_A,m|^2 + |g_B,m|^2) / D_m and theta_m = -g_B,m g_A,m^* / D_m,
    with D_up = Delta and D_down = Delta - omega0

    Raises:
        SingularDetuningError: when Delta sits on (or too close to) a pole
    """
    check_pole_guard(lasers, encoding)
    denominators = {SpinLevel.UP: lasers.delta_raman,
                    SpinLevel.DOWN: lasers.delta_raman - encoding.omega0}
    chi: Dict[SpinLevel, float] = {}
    theta: Dict[SpinLevel, complex] = {}
    for level, denominator in denominators.items():
        g_a = lasers.g_a[level]
        g_b = lasers.g_b[level]
        chi[level] = -(abs(g_a) ** 2 + abs(g_b) ** 2) / denominator
        theta[level] = -g_b * g_a.conjugate() / denominator
    return StarkCoefficients(chi_up=chi[SpinLevel.UP], chi_down=chi[SpinLevel.DOWN],
                             theta_up=theta[SpinLevel.UP], theta_down=theta[SpinLevel.DOWN])


def optimal_raman_detuning(encoding: Encoding) -> float:
    """Maximal discrimination: Delta = omega0 / 2"""
    return encoding.omega0 / 2.0


def required_coupling(delta_loop: float, trap: TrapMode, encoding: Encoding) -> float:
    """
    |g| = sqrt(delta * omega0 / (8 eta)) for |g_A| = |g_B| at Delta = omega0/2,
    one loop and a pi/2 conditional phase
    """
    return coupling_for(delta_loop, trap.eta, encoding.omega0)


def coupling_for(delta_loop: float, eta: float, omega0: float) -> float:
    return math.sqrt(abs(delta_loop) * omega0 / (8.0 * eta))


def target_discrimination(delta_loop: float, trap: TrapMode, n_loops: int = 1,
                          target_phase: float = math.pi / 2) -> float:
    """|theta_up - theta_down| giving `target_phase` over `n_loops` loops"""
    return abs(delta_loop) / trap.eta * math.sqrt(abs(target_phase) / (2.0 * math.pi * n_loops))


def discrimination(lasers: LaserPair, encoding: Encoding) -> float:
    """|g_B,up g_A,up^* / Delta - g_B,down g_A,down^* / (Delta - omega0)|"""
    coeffs = stark_coefficients(lasers, encoding)
    return abs(coeffs.theta_up - coeffs.theta_down)


def discrimination_residual(lasers: LaserPair, encoding: Encoding, trap: TrapMode,
                            delta_loop: float) -> float:
    """Signed distance from the maximal-entanglement condition; zero when Phi = pi/2"""
    return discrimination(lasers, encoding) - abs(delta_loop / (2.0 * trap.eta))


def solve_coupling(lasers: LaserPair, encoding: Encoding, trap: TrapMode, delta_loop: float,
                   n_loops: int = 1, target_phase: float = math.pi / 2) -> LaserPair:
    """
    Rescale every coupling by one real factor so the discrimination condition holds at the
    given Delta. The coupling shape (ratios and phases) is kept.

    The discrimination is quadratic in the scale factor s, so s = sqrt(target / current).
    """
    current = discrimination(lasers, encoding)
    if current == 0.0:
        raise NumericError("coupling shape produces no spin discrimination; cannot solve for |g|")
    target = target_discrimination(delta_loop, trap, n_loops, target_phase)
    scale = math.sqrt(target / current)
    solved = lasers.scaled(scale)
    check_pole_guard(solved, encoding)
    logger.app_info(f"Solved couplings: scale {scale:.9g}, max|g| = {solved.max_coupling:.9g} rad/s "
                    f"at Delta = {lasers.delta_raman:.9g} rad/s")
    return solved


def validity_report(design: GateDesign, n_bar: float = 0.0,
                    threshold: Optional[float] = None) -> ValidityReport:
    """
    Ratios behind the approximations: far detuning (I), slow Stark modulation (II) and the
    Lamb-Dicke limit (III). A check passes when its ratio is below `threshold`.
    """
    threshold = settings.VALIDITY_THRESHOLD if threshold is None else threshold
    lasers = design.lasers
    coeffs = stark_coefficients(lasers, design.encoding)
    g_max = lasers.max_coupling

    def check(value: float) -> ValidityCheck:
        return ValidityCheck(value=value, bound=threshold, passed=value < threshold)

    return ValidityReport(
        check_I_up=check(g_max / abs(lasers.delta_raman)),
        check_I_down=check(g_max / abs(lasers.delta_raman - design.encoding.omega0)),
        check_II=check(max(abs(coeffs.theta_up), abs(coeffs.theta_down)) / design.trap.nu),
        check_III=check(design.trap.eta ** 2 * (n_bar + 0.5)),
        threshold=threshold,
    )


def ion_spacing(dkz: float, order: int = 9, mode_kind: ModeKind = ModeKind.CM) -> float:
    """
    Ion separation meeting the opposite-force condition:
    (2n+1) pi / dkz for the CM mode and 2n pi / dkz (n >= 1) for the stretch mode
    """
    if order < 0 or (mode_kind is ModeKind.STRETCH and order < 1):
        raise GeometryError(f"spacing order {order} is not valid for the {mode_kind.value} mode")
    multiple = 2 * order + 1 if mode_kind is ModeKind.CM else 2 * order
    return multiple * math.pi / dkz


def default_geometry(lasers: LaserPair, order: int = 9,
                     mode_kind: ModeKind = ModeKind.CM) -> IonGeometry:
    return IonGeometry(z0_1=0.0, z0_2=ion_spacing(lasers.dkz, order, mode_kind))


def branch_force(m1: SpinLevel, m2: SpinLevel, coeffs: StarkCoefficients, trap: TrapMode,
                 geometry: IonGeometry, lasers: LaserPair) -> complex:
    """
    f_{m1,m2} = i eta exp(-i phi_1) (theta_m1 - theta_m2), valid when the ions sit at an
    opposite-force spacing

    Raises:
        GeometryError: spacing misses the condition by more than 1e-6 rad
    """
    offset = opposite_force_offset(geometry.spacing_phase(lasers.dkz), trap.mode_kind)
    if offset > SPACING_TOLERANCE:
        raise GeometryError(
            f"ion spacing misses the opposite-force condition by {offset:.3e} rad; "
            "use the per-ion phases of the effective tier for general spacings")
    phi_1, _ = geometry.phases(lasers)
    return 1j * trap.eta * complex(math.cos(phi_1), -math.sin(phi_1)) * (
        coeffs.theta(m1) - coeffs.theta(m2))


def general_branch_force(m1: SpinLevel, m2: SpinLevel, coeffs: StarkCoefficients,
                         trap: TrapMode, phases: Tuple[float, float]) -> complex:
    """Sum of the per-ion forces i eta s_i theta_{m_i} exp(-i phi_i) for any spacing"""
    force = 0j
    for sign, level, phi in zip(trap.mode_kind.participation, (m1, m2), phases):
        force += sign * 1j * trap.eta * coeffs.theta(level) * complex(math.cos(phi), -math.sin(phi))
    return force


def design_forces(design: GateDesign) -> Dict[str, complex]:
    """Force amplitude for every computational branch, keyed by branch label"""
    coeffs = stark_coefficients(design.lasers, design.encoding)
    phases = design.phases()
    return {label: general_branch_force(m1, m2, coeffs, design.trap, phases)
            for label, (m1, m2) in zip(BRANCH_LABELS, BRANCH_SPINS)}


def predicted_phase(design: GateDesign) -> float:
    """
    Conditional phase from the geometric phases 2 pi n |f_b/delta|^2 of each branch,
    combined as half the alternating branch sum (unwrapped, rad)
    """
    loops = 2.0 * math.pi * design.n_loops * math.copysign(1.0, design.delta_loop)
    phases = {label: loops * abs(force / design.delta_loop) ** 2
              for label, force in design_forces(design).items()}
    return 0.5 * (phases["ud"] + phases["du"] - phases["uu"] - phases["dd"])


def laser_frequency_offsets(design: GateDesign) -> Dict[str, float]:
    """Laser frequencies relative to the up -> e transition (rad/s)"""
    return {"omega_a": design.lasers.delta_raman - (design.trap.nu - design.delta_loop),
            "omega_b": design.lasers.delta_raman}


def stark_to_force_ratio(coeffs: StarkCoefficients, trap: TrapMode) -> float:
    """max|chi| / (eta max|theta|); about 2/eta at Delta = omega0/2"""
    theta = max(abs(coeffs.theta_up), abs(coeffs.theta_down))
    if theta == 0.0:
        return math.inf
    return max(abs(coeffs.chi_up), abs(coeffs.chi_down)) / (trap.eta * theta)
