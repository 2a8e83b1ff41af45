"""
Generators for the three model tiers.

FORCE and EFFECTIVE live in the interaction picture on [2, 2, n_max]. FULL keeps the
mediator level |e> on [3, 3, n_max] in a frame where laser B is static and laser A
rotates at nu - delta; see docs/derivation_notes.md for the frame.
"""
import math
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.linalg import expm
from scipy.special import eval_genlaguerre

from clockgate.constants.enums import BRANCH_SPINS, ModelTier, SpinLevel
from clockgate.core.exceptions import InvalidDimensionError
from clockgate.core.logging import logger
from clockgate.models.hamiltonian import FRAME_OPTICAL_RWA, Generator, HamiltonianSpec, HarmonicTerm
from clockgate.models.physics import GateDesign, StarkCoefficients
from clockgate.models.quantum import SpaceDims
from clockgate.services import design_service
from clockgate.services.linalg_service import create, destroy, number


def _qubit_space(dims: SpaceDims, levels: int) -> int:
    factors = dims.factors
    if len(factors) != 3 or factors[0] != levels or factors[1] != levels:
        raise InvalidDimensionError(f"expected dims [{levels}, {levels}, n_max], got {list(factors)}")
    return factors[2]


def _drive_term(forces: Dict[int, complex], delta: float, raising: np.ndarray) -> HarmonicTerm:
    """sum_b f_b |b><b| (x) raising, rotating at delta"""
    diagonal = np.zeros(4, dtype=np.complex128)
    for index, force in forces.items():
        diagonal[index] = force
    operator = np.kron(np.diag(diagonal), raising)
    return HarmonicTerm(frequency=delta, operator=operator)


def _interaction_frequency(static: np.ndarray, delta: float) -> float:
    energies = np.real(np.diag(static))
    spread = float(energies.max() - energies.min()) if energies.size else 0.0
    return max(abs(delta), spread)


def build_driven_oscillator(f: complex, delta: float, n_max: int) -> Generator:
    """Single-branch block f a^dag e^{i delta t} + h.c. on [n_max]"""
    if delta == 0.0:
        raise InvalidDimensionError("a driven oscillator needs a non-zero detuning")
    dims = SpaceDims.of(n_max)
    term = HarmonicTerm(frequency=delta, operator=complex(f) * create(n_max).entries)
    return Generator(tier=ModelTier.FORCE, dims=dims, static=np.zeros((n_max, n_max)),
                     terms=(term,), fastest_frequency=abs(delta), period=2.0 * math.pi / abs(delta))


def build_force(design: GateDesign, dims: SpaceDims) -> Generator:
    """
    Spin-dependent force of the opposite-force geometry:
    H = sum_{m1,m2} (f_{m1,m2} a^dag e^{i delta t} + h.c.) |m1 m2><m1 m2|

    Raises:
        GeometryError: the ion spacing misses the opposite-force condition
    """
    n_max = _qubit_space(dims, 2)
    coeffs = design_service.stark_coefficients(design.lasers, design.encoding)
    forces = {index: design_service.branch_force(m1, m2, coeffs, design.trap, design.geometry, design.lasers)
              for index, (m1, m2) in enumerate(BRANCH_SPINS)}
    delta = design.delta_loop
    return Generator(tier=ModelTier.FORCE, dims=dims, static=np.zeros((dims.total, dims.total)),
                     terms=(_drive_term(forces, delta, create(n_max).entries),),
                     fastest_frequency=abs(delta),
                     period=2.0 * math.pi / abs(delta), levels=2)


def build_effective(design: GateDesign, dims: SpaceDims,
                    include_static_stark: Optional[bool] = None) -> Generator:
    """
    Lamb-Dicke effective Hamiltonian after eliminating |e>: static chi shifts per ion
    (optional) plus the drive i eta theta_{m_i} exp(-i phi_i) a^dag e^{i delta t} + h.c.
    summed over ions with their own phases, so any spacing is allowed.
    With design.exact_sideband the drive uses sideband_raising in place of a^dag.
    """
    n_max = _qubit_space(dims, 2)
    if include_static_stark is None:
        include_static_stark = design.include_static_stark
    coeffs = design_service.stark_coefficients(design.lasers, design.encoding)
    phases = design.phases()
    forces = {index: design_service.general_branch_force(m1, m2, coeffs, design.trap, phases)
              for index, (m1, m2) in enumerate(BRANCH_SPINS)}

    raising = create(n_max).entries
    if design.exact_sideband:
        raising = sideband_raising(n_max, design.trap.eta)

    shifts = np.zeros(4)
    if include_static_stark:
        shifts = np.array([coeffs.chi(m1) + coeffs.chi(m2) for m1, m2 in BRANCH_SPINS])
    static = np.kron(np.diag(shifts), np.eye(n_max))

    delta = design.delta_loop
    return Generator(tier=ModelTier.EFFECTIVE, dims=dims, static=static,
                     terms=(_drive_term(forces, delta, raising),),
                     fastest_frequency=_interaction_frequency(static, delta),
                     period=2.0 * math.pi / abs(delta), levels=2)


def sideband_raising(n_max: int, eta: float) -> np.ndarray:
    """
    Resonant first-sideband part of exp(i eta (a + a^dag)) divided by i eta:
    sum_n e^{-eta^2/2} L_n^(1)(eta^2) / sqrt(n+1) |n+1><n|, which tends to a^dag as eta -> 0.
    """
    n = np.arange(n_max - 1)
    elements = np.exp(-0.5 * eta ** 2) * eval_genlaguerre(n, 1, eta ** 2) / np.sqrt(n + 1.0)
    return np.diag(elements.astype(np.complex128), k=-1)


def motional_factor(n_max: int, eta_l: float, sign: int, first_order: bool = False) -> np.ndarray:
    """exp(i s eta_l (a + a^dag)), or its first-order expansion"""
    position = destroy(n_max).entries + create(n_max).entries
    if first_order:
        return np.eye(n_max) + 1j * sign * eta_l * position
    return expm(1j * sign * eta_l * position)


def ion_couplings(design: GateDesign, n_max: int, ion: int,
                  first_order: bool = False) -> Dict[Tuple[str, SpinLevel], np.ndarray]:
    """
    Motional operators multiplying |e><m| for one ion, per (laser, level). Laser A carries
    the relative optical phase exp(i phi_i); laser B is the phase reference.
    """
    lasers = design.lasers
    sign = design.trap.mode_kind.participation[ion]
    phi = design.phases()[ion]
    eta = design.trap.eta
    factor_b = motional_factor(n_max, +0.5 * eta, sign, first_order)
    factor_a = motional_factor(n_max, -0.5 * eta, sign, first_order)
    phase_a = complex(math.cos(phi), math.sin(phi))
    couplings = {}
    for level in SpinLevel.qubit_levels():
        couplings[("b", level)] = lasers.g_b[level] * factor_b
        couplings[("a", level)] = lasers.g_a[level] * phase_a * factor_a
    return couplings


def level_energies(design: GateDesign) -> np.ndarray:
    """Per-ion energies of (up, down, e) in the FULL-tier frame"""
    omega0 = design.encoding.omega0
    return np.array([-0.5 * omega0, 0.5 * omega0, design.lasers.delta_raman - 0.5 * omega0])


def build_full(design: GateDesign, dims: SpaceDims) -> Generator:
    """
    Pre-elimination Hamiltonian with the mediator level and the exact motional exponential.

    H = sum_i [E_m |m><m|_i] + nu a^dag a
        + sum_i sum_m (g_B,m |e><m|_i D_B,i + g_A,m e^{i phi_i} e^{i (nu - delta) t} |e><m|_i D_A,i + h.c.)
    """
    n_max = _qubit_space(dims, 3)
    energies = level_energies(design)
    nu = design.trap.nu
    eye3 = np.eye(3)

    frame = (np.kron(np.kron(energies, np.ones(3)), np.ones(n_max))
             + np.kron(np.kron(np.ones(3), energies), np.ones(n_max))
             + np.kron(np.ones(9), nu * np.real(np.diag(number(n_max).entries))))

    static_coupling = np.zeros((dims.total, dims.total), dtype=np.complex128)
    rotating = np.zeros((dims.total, dims.total), dtype=np.complex128)
    excited = SpinLevel.EXCITED.index
    for ion in (0, 1):
        for (laser, level), motion in ion_couplings(design, n_max, ion).items():
            transition = np.zeros((3, 3))
            transition[excited, level.index] = 1.0
            spin = np.kron(transition, eye3) if ion == 0 else np.kron(eye3, transition)
            operator = np.kron(spin, motion)
            if laser == "b":
                static_coupling += operator
            else:
                rotating += operator

    static = np.diag(frame).astype(np.complex128) + static_coupling + static_coupling.conj().T
    lasers = design.lasers
    fastest = max(abs(lasers.delta_raman), abs(lasers.delta_raman - design.encoding.omega0), nu)
    drive = nu - design.delta_loop
    logger.debug(f"FULL generator: dim {dims.total}, fastest {fastest:.6g} rad/s, drive {drive:.6g} rad/s")
    return Generator(tier=ModelTier.FULL, dims=dims, static=static,
                     terms=(HarmonicTerm(frequency=drive, operator=rotating),),
                     fastest_frequency=fastest, period=2.0 * math.pi / abs(drive),
                     frame_energies=frame, levels=3, frame=FRAME_OPTICAL_RWA)


def build_generator(spec: HamiltonianSpec) -> Generator:
    if spec.tier is ModelTier.FORCE:
        return build_force(spec.design, spec.dims)
    if spec.tier is ModelTier.EFFECTIVE:
        return build_effective(spec.design, spec.dims)
    return build_full(spec.design, spec.dims)


def eliminate_excited_numeric(design: GateDesign, n_max: int = 6,
                              first_order: bool = True) -> StarkCoefficients:
    """
    Eliminate |e> from the FULL-tier couplings of ion 1 by a Schur complement
    K_{ll'} = -V_l^dag (E_e - E_m)^-1 V_{l'} and read back the effective coefficients:
    chi_m = <0|K_AA + K_BB|0> and theta_m = <1|K_AB|0> / (i eta exp(-i phi_1)).
    """
    energies = level_energies(design)
    couplings = ion_couplings(design, n_max, 0, first_order)
    phi_1 = design.phases()[0]
    sign = design.trap.mode_kind.participation[0]
    reference = 1j * sign * design.trap.eta * complex(math.cos(phi_1), -math.sin(phi_1))

    chi: Dict[SpinLevel, float] = {}
    theta: Dict[SpinLevel, complex] = {}
    for level in SpinLevel.qubit_levels():
        gap = (energies[SpinLevel.EXCITED.index] - energies[level.index]) * np.eye(n_max)
        v_a = couplings[("a", level)]
        v_b = couplings[("b", level)]
        k_aa = -v_a.conj().T @ np.linalg.solve(gap, v_a)
        k_bb = -v_b.conj().T @ np.linalg.solve(gap, v_b)
        k_ab = -v_a.conj().T @ np.linalg.solve(gap, v_b)
        chi[level] = float(np.real(k_aa[0, 0] + k_bb[0, 0]))
        theta[level] = complex(k_ab[1, 0] / reference)
    return StarkCoefficients(chi_up=chi[SpinLevel.UP], chi_down=chi[SpinLevel.DOWN],
                             theta_up=theta[SpinLevel.UP], theta_down=theta[SpinLevel.DOWN])
