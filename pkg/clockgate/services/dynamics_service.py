"""
Fixed-step propagation of state blocks under time-dependent generators, the closed-form
forced-oscillator oracle, and the gate runner that turns a design into a GateResult.
"""
import math
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from clockgate.constants.enums import BRANCH_LABELS, BRANCH_SPINS, InitialMotion, Integrator, ModelTier
from clockgate.core.config import settings
from clockgate.core.exceptions import (
    ConvergenceError,
    InvalidDimensionError,
    NumericError,
    StepBudgetError,
    TruncationError,
    UnitarityError,
)
from clockgate.core.logging import logger
from clockgate.core.utils import unwrap_step, wrap_angle, wrap_phase
from clockgate.models.hamiltonian import Generator, HamiltonianSpec
from clockgate.models.physics import GateDesign
from clockgate.models.quantum import QuantumState, SpaceDims
from clockgate.models.results import (
    BranchTrace,
    EchoSequence,
    GateResult,
    MotionalPreparation,
    PropagationSettings,
    Trajectory,
)
from clockgate.services import design_service, hamiltonian_service, sequencer_service
from clockgate.services.linalg_service import (
    basis_state,
    coherent_state,
    destroy,
    fock_state,
    thermal_weights,
)

GAUSS_OFFSET = math.sqrt(3.0) / 6.0
MAGNUS_COMMUTATOR = math.sqrt(3.0) / 12.0


def forced_oscillator_oracle(f: complex, delta: float, t: float) -> Tuple[complex, float]:
    """
    Closed-form solution of H = f a^dag e^{i delta t} + h.c. from the vacuum:
    alpha(t) = -(f/delta)(e^{i delta t} - 1), phase(t) = |f/delta|^2 (delta t - sin delta t)
    """
    if delta == 0.0:
        raise NumericError("the forced-oscillator oracle needs delta != 0")
    ratio = complex(f) / delta
    alpha = -ratio * (complex(math.cos(delta * t), math.sin(delta * t)) - 1.0)
    phase = abs(ratio) ** 2 * (delta * t - math.sin(delta * t))
    return alpha, phase


def step_propagator(generator: Generator, t: float, dt: float,
                    integrator: Integrator = Integrator.MAGNUS4) -> np.ndarray:
    """One-step propagator from t to t + dt"""
    if integrator is Integrator.MIDPOINT:
        return expm(-1j * dt * generator.at(t + 0.5 * dt))
    h1 = generator.at(t + (0.5 - GAUSS_OFFSET) * dt)
    h2 = generator.at(t + (0.5 + GAUSS_OFFSET) * dt)
    omega = -0.5j * dt * (h1 + h2) + MAGNUS_COMMUTATOR * dt * dt * (h1 @ h2 - h2 @ h1)
    return expm(omega)


def step_count(generator: Generator, duration: float, steps_per_fastest_period: int) -> int:
    periods = duration * generator.fastest_frequency / (2.0 * math.pi)
    return max(1, int(math.ceil(periods * steps_per_fastest_period - 1e-9)))


class Track(NamedTuple):
    """One observed branch: a column of the state block and its reference motion"""
    label: str
    column: int
    spin: int
    reference: np.ndarray
    component: int


class BranchRecorder:
    """
    Reads branch observables from state blocks in the interaction picture: unwrapped
    phases, displacements, phonon numbers and norm errors, plus the truncation guard.
    """

    def __init__(self, tracks: Sequence[Track], n_max: int, levels: int, record: bool = True,
                 keep_states: bool = False, dims: Optional[SpaceDims] = None,
                 component_weights: Optional[np.ndarray] = None):
        self.tracks = list(tracks)
        self.n_max = n_max
        self.levels = levels
        self.record = record
        self.keep_states = keep_states
        self.dims = dims
        self.weights = np.ones(1) if component_weights is None else np.asarray(component_weights)
        self.annihilation = destroy(n_max).entries
        self.occupation = np.arange(n_max, dtype=float)
        self.phases = np.zeros(len(self.tracks))
        self.spins = np.array([p.spin for p in self.tracks])
        self.times: List[float] = []
        self.rows: List[Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = []
        self.states: List[QuantumState] = []
        self.max_norm_error = 0.0
        self.excited_sum = np.zeros(2)
        self.excited_samples = 0
        self.initial_alpha = np.array([self._moments(p.reference)[0] for p in self.tracks])
        self.initial_n = np.array([self._moments(p.reference)[1] for p in self.tracks])

    def _moments(self, vector: np.ndarray) -> Tuple[complex, float]:
        population = float(np.vdot(vector, vector).real)
        if population <= 1e-300:
            return 0j, 0.0
        alpha = complex(np.vdot(vector, self.annihilation @ vector)) / population
        n_mean = float(np.sum(self.occupation * np.abs(vector) ** 2)) / population
        return alpha, n_mean

    def branch_block(self, column: np.ndarray, spin: int) -> np.ndarray:
        return column.reshape(-1, self.n_max)[spin]

    def measure(self, block: np.ndarray):
        raw = np.empty(len(self.tracks))
        alpha = np.empty(len(self.tracks), dtype=np.complex128)
        n_mean = np.empty(len(self.tracks))
        norm_err = np.empty(len(self.tracks))
        for i, track in enumerate(self.tracks):
            column = block[:, track.column]
            vector = self.branch_block(column, self.spins[i])
            raw[i] = np.angle(np.vdot(track.reference, vector))
            alpha[i], n_mean[i] = self._moments(vector)
            norm_err[i] = abs(np.linalg.norm(column) - 1.0)
        return raw, alpha, n_mean, norm_err

    def check_truncation(self, block: np.ndarray) -> None:
        tensor = block.reshape(-1, self.n_max, block.shape[1])
        top = np.sum(np.abs(tensor[:, self.n_max - 2:, :]) ** 2, axis=(0, 1))
        worst = float(top.max())
        if worst > settings.TRUNCATION_TOLERANCE:
            occupation = np.sum(self.occupation[None, :, None] * np.abs(tensor) ** 2, axis=(0, 1))
            n_mean = float(occupation.max())
            required = max(self.n_max + 4, int(math.ceil(n_mean + 6.0 * math.sqrt(n_mean) + 12.0)))
            raise TruncationError(
                f"population {worst:.3e} in the top two Fock levels of n_max={self.n_max}", required)

    def accumulate_excited(self, block: np.ndarray) -> None:
        if self.levels != 3:
            return
        tensor = np.abs(block.reshape(3, 3, self.n_max, block.shape[1])) ** 2
        per_column = np.stack([tensor[2].sum(axis=(0, 1)), tensor[:, 2].sum(axis=(0, 1))])
        columns = block.shape[1]
        if 4 * len(self.weights) == columns:
            column_weights = np.repeat(self.weights, 4) / 4.0
        else:
            column_weights = np.full(columns, 1.0 / columns)
        self.excited_sum += per_column @ column_weights
        self.excited_samples += 1

    def observe(self, t: float, block: np.ndarray, record: bool,
                increments: Optional[np.ndarray] = None, accumulate: bool = False) -> None:
        self.check_truncation(block)
        raw, alpha, n_mean, norm_err = self.measure(block)
        if increments is None:
            self.phases = np.array([unwrap_step(prev, cur) for prev, cur in zip(self.phases, raw)])
        else:
            predicted = self.phases + increments
            self.phases = np.array([p + wrap_angle(r - p) for p, r in zip(predicted, raw)])
        self.max_norm_error = max(self.max_norm_error, float(norm_err.max()))
        if accumulate:
            self.accumulate_excited(block)
        if record and self.record:
            self.times.append(t)
            self.rows.append((alpha, self.phases.copy(), n_mean, norm_err))
            if self.keep_states and self.dims is not None:
                self.states.append(QuantumState(dims=self.dims, amplitudes=block[:, 0]))

    def apply_pulse(self, pulse: np.ndarray) -> None:
        """Follow each track to the spin configuration a qubit pulse maps it to"""
        for i, spin in enumerate(self.spins):
            m1, m2 = divmod(int(spin), self.levels)
            if m1 > 1 or m2 > 1:
                continue
            source = 2 * m1 + m2
            target = int(np.argmax(np.abs(pulse[:, source])))
            self.phases[i] += np.angle(pulse[target, source])
            t1, t2 = divmod(target, 2)
            self.spins[i] = t1 * self.levels + t2

    @property
    def mean_excited(self) -> Tuple[float, float]:
        if self.excited_samples == 0:
            return 0.0, 0.0
        mean = self.excited_sum / self.excited_samples
        return float(mean[0]), float(mean[1])

    def trajectory(self, component: int = 0) -> Trajectory:
        selected = [i for i, p in enumerate(self.tracks) if p.component == component]
        branches = {}
        for i in selected:
            branches[self.tracks[i].label] = BranchTrace(
                alpha=[row[0][i] for row in self.rows],
                phase=[row[1][i] for row in self.rows],
                n_mean=[row[2][i] for row in self.rows],
                norm_err=[row[3][i] for row in self.rows],
            )
        return Trajectory(times=self.times, branches=branches, states=self.states)


class Segment(NamedTuple):
    generator: Generator
    duration: float
    pulses: List[np.ndarray]


def march(generator: Generator, duration: float, block: np.ndarray, prop: PropagationSettings,
          recorder: BranchRecorder, t_offset: float = 0.0) -> Tuple[np.ndarray, int]:
    """
    Propagate a state block (columns are states) for `duration` starting at local time 0.
    Returns the final block in the interaction picture and the number of exponentials.

    When the duration is an integer number N >= 2 of generator periods, the one-period
    propagator is built once and applied N times.
    """
    stride = prop.record_stride
    period = generator.period
    n_periods = 0
    if prop.stroboscopic and period is not None:
        n_periods = int(round(duration / period))
        if abs(duration - n_periods * period) > 1e-9 * duration:
            n_periods = 0

    if n_periods >= 2:
        steps = step_count(generator, period, prop.steps_per_fastest_period)
        _check_budget(steps, prop)
        dt = period / steps
        unitary = np.eye(block.shape[0], dtype=np.complex128)
        start = recorder.phases.copy()
        for k in range(steps):
            unitary = step_propagator(generator, k * dt, dt, prop.integrator) @ unitary
            t_next = period if k == steps - 1 else (k + 1) * dt
            current = generator.to_interaction(unitary @ block, t_next)
            recorder.observe(t_offset + t_next, current, record=((k + 1) % stride == 0 or k == steps - 1),
                             accumulate=True)
        increments = recorder.phases - start
        raw = unitary @ block
        for p in range(2, n_periods + 1):
            raw = unitary @ raw
            recorder.observe(t_offset + p * period, generator.to_interaction(raw, p * period),
                             record=True, increments=increments)
        logger.debug(f"stroboscopic march: {steps} steps per period, {n_periods} periods")
        return generator.to_interaction(raw, duration), steps

    steps = step_count(generator, duration, prop.steps_per_fastest_period)
    _check_budget(steps, prop)
    dt = duration / steps
    first_period = period if period is not None else duration
    for k in range(steps):
        block = step_propagator(generator, k * dt, dt, prop.integrator) @ block
        t_next = duration if k == steps - 1 else (k + 1) * dt
        recorder.observe(t_offset + t_next, generator.to_interaction(block, t_next),
                         record=((k + 1) % stride == 0 or k == steps - 1),
                         accumulate=t_next <= first_period * (1.0 + 1e-12))
    return generator.to_interaction(block, duration), steps


def _check_budget(steps: int, prop: PropagationSettings) -> None:
    if steps > prop.max_steps:
        raise StepBudgetError(f"propagation needs {steps} exponentials, budget is {prop.max_steps}")


def evolve(segments: Sequence[Segment], block: np.ndarray, prop: PropagationSettings,
           recorder: BranchRecorder) -> Tuple[np.ndarray, int]:
    """Run segments back to back; pulses act between segments in the interaction picture"""
    recorder.observe(0.0, block, record=True)
    t_offset = 0.0
    total_steps = 0
    for segment in segments:
        block, steps = march(segment.generator, segment.duration, block, prop, recorder, t_offset)
        total_steps += steps
        t_offset += segment.duration
        for pulse in segment.pulses:
            full = sequencer_service.embed_qubit_pulse(pulse, segment.generator.dims)
            block = full.entries @ block
            recorder.apply_pulse(pulse)
    if recorder.max_norm_error > settings.NORM_TOLERANCE:
        raise UnitarityError(f"norm drifted by {recorder.max_norm_error:.3e} during propagation")
    return block, total_steps


def _converged(segments: Sequence[Segment], block0: np.ndarray, final: np.ndarray,
               prop: PropagationSettings, recorder: BranchRecorder) -> None:
    """Repeat at half the step size and compare the final blocks"""
    shadow = BranchRecorder(recorder.tracks, recorder.n_max, recorder.levels, record=False,
                            component_weights=recorder.weights)
    refined, _ = evolve(segments, block0, prop.refined(), shadow)
    error = float(np.max(np.linalg.norm(refined - final, axis=0)))
    if error > settings.CONVERGENCE_TOLERANCE:
        raise ConvergenceError(
            f"step size too coarse at {prop.steps_per_fastest_period} steps per fastest period", error)
    logger.debug(f"convergence check passed, error {error:.3e}")


def propagate(generator: Generator, initial: QuantumState,
              prop: PropagationSettings) -> Trajectory:
    """
    Propagate one state for prop.t_final and record per-branch observables. For a
    spin-spin-oscillator space each populated qubit configuration is a branch; a bare
    oscillator is recorded as branch 'osc'.
    """
    if prop.t_final is None:
        raise NumericError("propagate needs t_final")
    if initial.dims.factors != generator.dims.factors:
        raise InvalidDimensionError(
            f"state dims {initial.dims.factors} do not match generator dims {generator.dims.factors}")
    n_max = generator.n_max
    amplitudes = np.array(initial.amplitudes)
    tracks: List[Track] = []
    if len(generator.dims.factors) == 1:
        tracks.append(Track("osc", 0, 0, amplitudes / np.linalg.norm(amplitudes), 0))
        levels = 0
    else:
        levels = generator.dims.factors[0]
        blocks = amplitudes.reshape(-1, n_max)
        for index, label in enumerate(BRANCH_LABELS):
            m1, m2 = divmod(index, 2)
            spin = m1 * levels + m2
            population = float(np.vdot(blocks[spin], blocks[spin]).real)
            if population > 1e-12:
                tracks.append(Track(label, 0, spin, blocks[spin] / math.sqrt(population), 0))

    recorder = BranchRecorder(tracks, n_max, levels, keep_states=True, dims=generator.dims)
    block0 = amplitudes[:, None]
    segments = [Segment(generator, prop.t_final, [])]
    final, steps = evolve(segments, block0, prop, recorder)
    if prop.convergence_check:
        _converged(segments, block0, final, prop, recorder)
    logger.app_info(f"Propagated dim {generator.dims.total} for {prop.t_final:.6g} s in {steps} steps")
    return recorder.trajectory()


def motional_components(preparation: MotionalPreparation, n_max: int) -> List[Tuple[float, np.ndarray]]:
    """(weight, motional vector) pairs mixed classically"""
    if preparation.kind is InitialMotion.COHERENT:
        return [(1.0, np.array(coherent_state(preparation.alpha, n_max).amplitudes))]
    if preparation.kind is InitialMotion.THERMAL:
        weights = thermal_weights(preparation.n_bar, settings.THERMAL_TAIL_TOLERANCE)
        if len(weights) > n_max - 2:
            raise TruncationError(f"thermal state n_bar={preparation.n_bar} needs {len(weights)} Fock components",
                                  len(weights) + 12)
        return [(float(w), np.array(fock_state(n, n_max).amplitudes)) for n, w in enumerate(weights)]
    return [(1.0, np.array(fock_state(0, n_max).amplitudes))]


def build_segments(design: GateDesign, tier: ModelTier, dims: SpaceDims,
                   sequence: Optional[EchoSequence] = None) -> List[Segment]:
    if sequence is None:
        generator = hamiltonian_service.build_generator(HamiltonianSpec(tier=tier, design=design, dims=dims))
        return [Segment(generator, design.gate_time, [])]
    segments = []
    for index, part in enumerate(sequence.segments):
        lasers = design.lasers if part.drive_on else design.lasers.scaled(0.0)
        segment_design = design.evolve(delta_loop=part.delta_loop, n_loops=1, lasers=lasers)
        generator = hamiltonian_service.build_generator(
            HamiltonianSpec(tier=tier, design=segment_design, dims=dims))
        pulses = [np.array(p.unitary) for p in sequence.pulses_after(index)]
        segments.append(Segment(generator, part.duration, pulses))
    return segments


def run_gate(design: GateDesign, tier: ModelTier, prop: Optional[PropagationSettings] = None,
             sequence: Optional[EchoSequence] = None, n_max: Optional[int] = None,
             preparation: Optional[MotionalPreparation] = None,
             record_trajectory: bool = True) -> GateResult:
    """
    Propagate the four computational basis states times each motional component through
    the gate (or echo schedule) as one batched block and collect phases and residuals.
    """
    prop = prop or PropagationSettings()
    preparation = preparation or MotionalPreparation()
    n_max = n_max or settings.DEFAULT_N_MAX
    levels = 3 if tier is ModelTier.FULL else 2
    dims = SpaceDims.of(levels, levels, n_max)

    components = motional_components(preparation, n_max)
    weights = np.array([w for w, _ in components])
    tracks: List[Track] = []
    columns = []
    for c, (_, motion) in enumerate(components):
        for b, (label, (m1, m2)) in enumerate(zip(BRANCH_LABELS, BRANCH_SPINS)):
            spin = m1.index * levels + m2.index
            spin_state = basis_state(SpaceDims.of(levels, levels), [m1.index, m2.index]).amplitudes
            columns.append(np.kron(spin_state, motion))
            tracks.append(Track(label, len(columns) - 1, spin, motion, c))
    block0 = np.stack(columns, axis=1)

    segments = build_segments(design, tier, dims, sequence)
    total_time = sum(s.duration for s in segments)
    logger.app_info(f"Running {tier.value} gate: dim {dims.total}, {block0.shape[1]} columns, "
                    f"T = {total_time:.9g} s{' (echo)' if sequence else ''}")

    recorder = BranchRecorder(tracks, n_max, levels, record=record_trajectory, component_weights=weights)
    final, total_steps = evolve(segments, block0, prop, recorder)
    if prop.convergence_check:
        _converged(segments, block0, final, prop, recorder)
    return _collect(design, tier, dims, components, tracks, recorder, final, total_steps, total_time,
                    echo=sequence is not None, record_trajectory=record_trajectory)


def loop_closure_threshold(design: GateDesign, tier: ModelTier) -> float:
    """
    Largest final displacement still counted as a closed loop. Drives that keep the full
    motional exponential (FULL, exact-sideband EFFECTIVE) leave a Lamb-Dicke residual of
    order eta^2 (1 + n_peak); those get LAMB_DICKE_CLOSURE_FACTOR times that on top.
    """
    threshold = settings.LOOP_CLOSURE_WARNING
    if tier is ModelTier.FULL or (tier is ModelTier.EFFECTIVE and design.exact_sideband):
        ratio = max(abs(f) for f in design_service.design_forces(design).values()) / abs(design.delta_loop)
        n_peak = 4.0 * ratio ** 2
        threshold += settings.LAMB_DICKE_CLOSURE_FACTOR * design.trap.eta ** 2 * (1.0 + n_peak)
    return threshold


def _collect(design: GateDesign, tier: ModelTier, dims: SpaceDims,
             components: List[Tuple[float, np.ndarray]], tracks: List[Track], recorder: BranchRecorder,
             final: np.ndarray, total_steps: int, total_time: float, echo: bool,
             record_trajectory: bool) -> GateResult:
    levels = dims.factors[0]
    n_max = dims.factors[-1]
    qubit_spins = [m1.index * levels + m2.index for m1, m2 in BRANCH_SPINS]
    weights = np.array([w for w, _ in components])

    propagators = []
    for c, (_, motion) in enumerate(components):
        block = np.zeros((4, 4), dtype=np.complex128)
        for b in range(4):
            rows = final[:, 4 * c + b].reshape(-1, n_max)
            for j, spin in enumerate(qubit_spins):
                block[j, b] = np.vdot(motion, rows[spin])
        propagators.append(block)

    phases = {p.label: float(recorder.phases[i]) for i, p in enumerate(tracks) if p.component == 0}
    unwrapped = 0.5 * (phases["ud"] + phases["du"] - phases["uu"] - phases["dd"])
    single_ion = (0.5 * ((phases["uu"] + phases["ud"]) - (phases["du"] + phases["dd"])),
                  0.5 * ((phases["uu"] + phases["du"]) - (phases["ud"] + phases["dd"])))
    residual_phase = [phases[label] - (unwrapped if label in ("ud", "du") else 0.0) for label in BRANCH_LABELS]
    spread = float(max(residual_phase) - min(residual_phase))

    _, alpha_final, n_final, _ = recorder.measure(final)
    residual: Dict[str, float] = {label: 0.0 for label in BRANCH_LABELS}
    excess: Dict[str, float] = {}
    for i, track in enumerate(tracks):
        shift = abs(alpha_final[i] - recorder.initial_alpha[i])
        residual[track.label] = max(residual[track.label], float(shift))
        if track.component == 0:
            excess[track.label] = float(n_final[i] - recorder.initial_n[i])

    leakage = 0.0
    if levels == 3:
        populations = np.abs(final.reshape(levels * levels, n_max, -1)) ** 2
        outside = 1.0 - populations[qubit_spins].sum(axis=(0, 1))
        leakage = float(np.mean(outside.reshape(len(components), 4), axis=1) @ weights)

    warnings: List[str] = []
    worst = max(residual.values())
    loop_closed = worst <= loop_closure_threshold(design, tier)
    if not loop_closed:
        message = f"motional loop not closed: residual displacement {worst:.3e}"
        warnings.append(message)
        logger.warning(message)

    final_states = [QuantumState(dims=dims, amplitudes=final[:, k]) for k in range(final.shape[1])]
    trajectory = recorder.trajectory(0) if record_trajectory else None
    result = GateResult(
        tier=tier, design=design, echo=echo, gate_time=total_time, total_steps=total_steps,
        final_states=final_states, qubit_propagator=propagators[0], component_weights=weights,
        component_propagators=propagators, branch_phases=phases,
        conditional_phase=wrap_phase(unwrapped, settings.PHASE_WRAP_TOLERANCE),
        conditional_phase_unwrapped=unwrapped,
        single_ion_phases=single_ion, single_ion_phase_spread=spread,
        motional_residual=residual, phonon_excess=excess, leakage=leakage,
        mean_excited_population=recorder.mean_excited, loop_closed=loop_closed,
        warnings=warnings, trajectory=trajectory,
    )
    logger.app_info(f"{tier.value} gate done: conditional phase {result.conditional_phase:.9f} rad, "
                    f"max residual {worst:.3e}, {total_steps} steps")
    return result
