from enum import Enum


class ModelTier(str, Enum):
    FORCE = 'force'
    EFFECTIVE = 'effective'
    FULL = 'full'

    @classmethod
    def all_types(cls):
        return list(cls)


class ModeKind(str, Enum):
    CM = 'cm'
    STRETCH = 'stretch'

    @property
    def participation(self):
        """Per-ion sign of the mode amplitude"""
        return (1, 1) if self is ModeKind.CM else (1, -1)


class SpinLevel(str, Enum):
    UP = 'up'
    DOWN = 'down'
    EXCITED = 'e'

    @property
    def index(self) -> int:
        return {SpinLevel.UP: 0, SpinLevel.DOWN: 1, SpinLevel.EXCITED: 2}[self]

    @classmethod
    def qubit_levels(cls):
        return [cls.UP, cls.DOWN]


class FormulaKind(str, Enum):
    OFF_RESONANT = 'off_resonant'
    MEDIATOR_OCCUPIED = 'mediator_occupied'
    LITERATURE = 'literature'


class Observable(str, Enum):
    CONDITIONAL_PHASE = 'conditional_phase'
    FIDELITY_Z = 'fidelity_z'
    CONCURRENCE = 'concurrence'
    P_TOTAL = 'p_total'
    MOTIONAL_RESIDUAL = 'motional_residual'
    LEAKAGE = 'leakage'
    AVERAGE_GATE_FIDELITY = 'average_gate_fidelity'
    SINGLE_ION_PHASE_SPREAD = 'single_ion_phase_spread'


class Integrator(str, Enum):
    MAGNUS4 = 'magnus4'
    MIDPOINT = 'midpoint'


class InitialMotion(str, Enum):
    GROUND = 'ground'
    THERMAL = 'thermal'
    COHERENT = 'coherent'


# Computational basis order {uu, ud, du, dd}, index 0 = up
BRANCH_LABELS = ('uu', 'ud', 'du', 'dd')
BRANCH_SPINS = ((SpinLevel.UP, SpinLevel.UP), (SpinLevel.UP, SpinLevel.DOWN),
                (SpinLevel.DOWN, SpinLevel.UP), (SpinLevel.DOWN, SpinLevel.DOWN))
