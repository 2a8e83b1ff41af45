"""
Dense linear algebra for small composite spaces: ladder operators, tensor products,
states, fidelities and entanglement measures.
"""
from functools import reduce
from typing import Sequence, Union

import numpy as np

from clockgate.core.config import settings
from clockgate.core.exceptions import (
    InvalidDimensionError,
    NonPhysicalStateError,
    TruncationError,
    UnitarityError,
)
from clockgate.core.logging import logger
from clockgate.models.quantum import Operator, QuantumState, SpaceDims

SIGMA_Y_PAIR = np.array([[0, 0, 0, -1],
                         [0, 0, 1, 0],
                         [0, 1, 0, 0],
                         [-1, 0, 0, 0]], dtype=np.complex128)


def destroy(n_max: int) -> Operator:
    """
    Truncated annihilation operator with a[n-1, n] = sqrt(n)

    Args:
        n_max: Number of Fock levels kept

    Returns:
        Operator: n_max x n_max lowering operator
    """
    if n_max < 2:
        raise InvalidDimensionError(f"n_max must be >= 2, got {n_max}")
    entries = np.diag(np.sqrt(np.arange(1, n_max, dtype=float)), k=1).astype(np.complex128)
    return Operator(dims=SpaceDims.of(n_max), entries=entries)


def create(n_max: int) -> Operator:
    return destroy(n_max).dag()


def number(n_max: int) -> Operator:
    if n_max < 2:
        raise InvalidDimensionError(f"n_max must be >= 2, got {n_max}")
    return Operator(dims=SpaceDims.of(n_max), entries=np.diag(np.arange(n_max, dtype=float)),
                    hermitian=True)


def identity(n: int) -> Operator:
    return Operator(dims=SpaceDims.of(n), entries=np.eye(n), hermitian=True)


def sigma_x() -> Operator:
    return Operator(dims=SpaceDims.of(2), entries=[[0, 1], [1, 0]], hermitian=True)


def sigma_y() -> Operator:
    return Operator(dims=SpaceDims.of(2), entries=[[0, -1j], [1j, 0]], hermitian=True)


def sigma_z() -> Operator:
    # index 0 = up
    return Operator(dims=SpaceDims.of(2), entries=[[1, 0], [0, -1]], hermitian=True)


def kron_all(ops: Sequence[Operator]) -> Operator:
    """
    Kronecker product in list order; the factor dims are concatenated
    """
    if len(ops) == 0:
        raise InvalidDimensionError("kron_all needs at least one operator")
    dims = reduce(lambda acc, op: acc + op.dims, ops[1:], ops[0].dims)
    entries = reduce(np.kron, [op.entries for op in ops])
    return Operator(dims=dims, entries=entries, hermitian=all(op.hermitian for op in ops))


def embed(op: Operator, position: int, dims: SpaceDims) -> Operator:
    """Place a single-factor operator at `position` of a composite space"""
    if op.dims.factors != (dims.factors[position],):
        raise InvalidDimensionError(
            f"operator dims {op.dims.factors} do not fit factor {position} of {dims.factors}")
    ops = [identity(d) for d in dims.factors]
    ops[position] = op
    return kron_all(ops)


def basis_state(dims: SpaceDims, indices: Sequence[int]) -> QuantumState:
    if len(indices) != len(dims.factors) or any(
            not 0 <= i < d for i, d in zip(indices, dims.factors)):
        raise InvalidDimensionError(f"basis indices {list(indices)} invalid for {dims.factors}")
    amplitudes = np.zeros(dims.total, dtype=np.complex128)
    amplitudes[int(np.ravel_multi_index(tuple(indices), dims.factors))] = 1.0
    return QuantumState(dims=dims, amplitudes=amplitudes)


def fock_state(n: int, n_max: int) -> QuantumState:
    return basis_state(SpaceDims.of(n_max), [n])


def top_levels_population(amplitudes: np.ndarray, n_max: int, levels: int = 2) -> float:
    """
    Population in the top `levels` Fock levels; the Fock factor is assumed last
    """
    tensor = np.asarray(amplitudes).reshape(-1, n_max)
    return float(np.sum(np.abs(tensor[:, n_max - levels:]) ** 2))


def coherent_state(alpha: complex, n_max: int) -> QuantumState:
    """
    Truncated coherent state c_n = exp(-|alpha|^2/2) alpha^n / sqrt(n!), renormalized
    with truncation_weight set to the top-two-level population before renormalization

    Raises:
        TruncationError: when |alpha|^2 > n_max/4
    """
    if n_max < 2:
        raise InvalidDimensionError(f"n_max must be >= 2, got {n_max}")
    alpha = complex(alpha)
    if abs(alpha) ** 2 > n_max / 4.0:
        raise TruncationError(f"coherent amplitude |alpha|={abs(alpha):.4g} too large for n_max={n_max}",
                              required_n_max=int(np.ceil(4.0 * abs(alpha) ** 2)))
    amplitudes = np.empty(n_max, dtype=np.complex128)
    amplitudes[0] = np.exp(-abs(alpha) ** 2 / 2.0)
    for n in range(1, n_max):
        amplitudes[n] = amplitudes[n - 1] * alpha / np.sqrt(n)
    weight = top_levels_population(amplitudes, n_max)
    logger.debug(f"coherent_state alpha={alpha} n_max={n_max} truncation weight {weight:.3e}")
    state = QuantumState(dims=SpaceDims.of(n_max), amplitudes=amplitudes, truncation_weight=weight)
    return state.normalized()


def thermal_weights(n_bar: float, tail_tolerance: float = settings.THERMAL_TAIL_TOLERANCE) -> np.ndarray:
    """
    Fock weights p_n = n_bar^n / (n_bar+1)^(n+1) kept until the geometric tail
    (n_bar/(n_bar+1))^N falls below `tail_tolerance`, renormalized
    """
    if n_bar < 0:
        raise NonPhysicalStateError(f"mean phonon number must be >= 0, got {n_bar}")
    if n_bar == 0:
        return np.array([1.0])
    ratio = n_bar / (n_bar + 1.0)
    count = max(1, int(np.ceil(np.log(tail_tolerance) / np.log(ratio))))
    weights = ratio ** np.arange(count) / (n_bar + 1.0)
    return weights / weights.sum()


def expectation(state: QuantumState, op: Operator) -> complex:
    if state.dims.factors != op.dims.factors:
        raise InvalidDimensionError("state and operator dims do not match")
    psi = state.amplitudes
    return complex(np.vdot(psi, op.entries @ psi))


def state_fidelity(psi: QuantumState, phi: QuantumState) -> float:
    """|<psi|phi>|^2 for pure states"""
    if psi.dims.factors != phi.dims.factors:
        raise InvalidDimensionError(f"dims {psi.dims.factors} and {phi.dims.factors} do not match")
    overlap = np.vdot(psi.amplitudes, phi.amplitudes)
    return float(min(1.0, abs(overlap) ** 2))


def partial_trace(target: Union[QuantumState, Operator], keep: Sequence[int]) -> Operator:
    """
    Reduced density operator over the factors listed in `keep` (kept in ascending order)

    Args:
        target: Pure state or density operator over a composite space
        keep: Indices of the factors to keep
    """
    factors = target.dims.factors
    keep = sorted(set(int(k) for k in keep))
    if not keep or any(k < 0 or k >= len(factors) for k in keep):
        raise InvalidDimensionError(f"bad keep set {keep} for dims {factors}")
    traced = [i for i in range(len(factors)) if i not in keep]
    d_keep = int(np.prod([factors[k] for k in keep]))
    d_traced = int(np.prod([factors[t] for t in traced])) if traced else 1
    kept_dims = SpaceDims(factors=tuple(factors[k] for k in keep))

    if isinstance(target, QuantumState):
        tensor = target.amplitudes.reshape(factors)
        matrix = np.transpose(tensor, keep + traced).reshape(d_keep, d_traced)
        rho = matrix @ matrix.conj().T
    else:
        n = len(factors)
        tensor = target.entries.reshape(factors + factors)
        order = keep + traced + [k + n for k in keep] + [t + n for t in traced]
        tensor = np.transpose(tensor, order).reshape(d_keep, d_traced, d_keep, d_traced)
        rho = np.einsum('ijkj->ik', tensor)
    return Operator(dims=kept_dims, entries=rho)


def validate_density(rho: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Check Hermiticity, unit trace and positivity; return the eigenvalues"""
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise NonPhysicalStateError("density operator is not Hermitian")
    trace = np.trace(rho)
    if abs(trace - 1.0) > tol:
        raise NonPhysicalStateError(f"density operator trace {trace.real:.12g} != 1")
    eigenvalues = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if eigenvalues[0] < -tol:
        raise NonPhysicalStateError(f"density operator has negative eigenvalue {eigenvalues[0]:.3e}")
    return eigenvalues


def concurrence(rho: Union[Operator, np.ndarray]) -> float:
    """
    Wootters concurrence of a two-qubit density operator

    Rank-one inputs use |psi^T (sy x sy) psi| on the dominant eigenvector, which avoids
    square roots of vanishing eigenvalues; mixed inputs use max(0, l1 - l2 - l3 - l4) with
    l_i the square roots of the eigenvalues of rho (sy x sy) rho* (sy x sy).
    """
    matrix = np.asarray(rho.entries if isinstance(rho, Operator) else rho, dtype=np.complex128)
    if matrix.shape != (4, 4):
        raise InvalidDimensionError(f"concurrence needs a 4x4 density operator, got {matrix.shape}")
    validate_density(matrix)

    hermitian = 0.5 * (matrix + matrix.conj().T)
    eigenvalues, eigenvectors = np.linalg.eigh(hermitian)
    if eigenvalues[-1] >= 1.0 - 1e-10:
        psi = eigenvectors[:, -1]
        value = abs(psi @ SIGMA_Y_PAIR @ psi)
    else:
        rho_tilde = matrix @ SIGMA_Y_PAIR @ matrix.conj() @ SIGMA_Y_PAIR
        evals = np.sort(np.abs(np.real(np.linalg.eigvals(rho_tilde))))[::-1]
        roots = np.sqrt(evals)
        value = roots[0] - roots[1] - roots[2] - roots[3]
    return float(min(1.0, max(0.0, value)))


def is_unitary(matrix: np.ndarray, tol: float = 1e-9) -> bool:
    matrix = np.asarray(matrix)
    return bool(np.max(np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[0]))) < tol)


def assert_unitary(matrix: np.ndarray, tol: float = 1e-9, what: str = "matrix") -> None:
    matrix = np.asarray(matrix)
    deviation = float(np.max(np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[0]))))
    if deviation >= tol:
        raise UnitarityError(f"{what} is not unitary (deviation {deviation:.3e} >= {tol:.1e})")


def norm_preserved(propagator: np.ndarray, state: QuantumState, tol: float = 1e-9) -> bool:
    """Unitarity witness: ||U psi|| = ||psi||"""
    return abs(np.linalg.norm(np.asarray(propagator) @ state.amplitudes) - state.norm) < tol


def nearest_unitary(matrix: np.ndarray) -> np.ndarray:
    """Unitary polar factor of a square matrix"""
    u, _, vh = np.linalg.svd(np.asarray(matrix))
    return u @ vh
