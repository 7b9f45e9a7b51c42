"""
Exact complex linear algebra for one and two qubits: states, operators,
tensor products, density matrices, partial trace, purity, computational-basis
measurement and global-phase comparison.

Basis order is |00>, |01>, |10>, |11>. The left symbol is qubit 1, which is the
qubit Alice operates on and sends over channel 1.
"""

import warnings
from enum import Enum
from functools import cached_property

import numpy as np
import scipy.linalg as sla

STATE_TOLERANCE = 1e-9
CONSTRUCTION_TOLERANCE = 1e-12
DRIFT_TOLERANCE = 1e-12

RandomStream = np.random.Generator

_SQRT2_INV = 1 / np.sqrt(2)


class NumericDriftWarning(RuntimeWarning):
    """Emitted when a state had to be renormalized after applying an operator."""


class NonUnitaryOperatorError(ValueError):
    """An operator handed to apply() is not unitary."""


class QuantumState:
    """
    Normalized pure state of a fixed number of qubits. The amplitude vector is
    stored read-only, so states behave as immutable values.

    Attributes:
        amp (np.ndarray): complex amplitudes in computational-basis order
        drift_flag (bool): True if the state was renormalized somewhere along
            the chain of operations that produced it
    """

    n_qubits = None

    def __init__(self, amplitudes, drift_flag: bool = False) -> None:
        """
        Args:
            amplitudes: sequence of 2**n_qubits complex amplitudes
            drift_flag (bool, optional): marks a renormalized state. Defaults to False.

        Raises:
            ValueError: if the shape is wrong, an entry is not finite or the
                L2 norm differs from 1 by more than STATE_TOLERANCE.
        """
        amp = np.array(amplitudes, dtype=complex).reshape(-1)
        dim = 2**self.n_qubits
        if amp.shape != (dim,):
            raise ValueError(
                f"A {self.n_qubits}-qubit state needs {dim} amplitudes, got {amp.size}."
            )
        if not np.all(np.isfinite(amp)):
            raise ValueError(f"State amplitudes must be finite, got {amp}.")
        norm = np.linalg.norm(amp)
        if abs(norm - 1) > STATE_TOLERANCE:
            raise ValueError(f"State is not normalized (norm {norm:.12f}).")
        amp.flags.writeable = False
        self.amp = amp
        self.drift_flag = drift_flag

    @property
    def dim(self) -> int:
        return self.amp.size

    def __eq__(self, other):
        """Exact amplitude equality; phase-insensitive comparisons use
        equal_up_to_global_phase."""
        if not isinstance(other, QuantumState):
            return NotImplemented
        return self.n_qubits == other.n_qubits and np.array_equal(self.amp, other.amp)

    __hash__ = None

    def __repr__(self):
        amps = ", ".join(f"{a:.4g}" for a in self.amp)
        return f"{type(self).__name__}([{amps}])"


class SingleQubitState(QuantumState):
    """Pure state of one qubit over |0>, |1>."""

    n_qubits = 1


class TwoQubitState(QuantumState):
    """Pure state of two qubits over |00>, |01>, |10>, |11>."""

    n_qubits = 2


class GateLabel(Enum):
    """Named single-qubit operators. XZ and iYZ apply Z first."""

    I = "I"
    X = "X"
    Y = "Y"
    IY = "iY"
    Z = "Z"
    H = "H"
    XZ = "XZ"
    IYZ = "iYZ"

    def __str__(self):
        return self.value


class BellKind(Enum):
    """The four Bell states; the value is the name used in tables and reports."""

    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"

    def __str__(self):
        return self.value


_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT2_INV

_GATE_MATRICES = {
    GateLabel.I: _I,
    GateLabel.X: _X,
    GateLabel.Y: _Y,
    GateLabel.IY: 1j * _Y,
    GateLabel.Z: _Z,
    GateLabel.H: _H,
    GateLabel.XZ: _X @ _Z,
    GateLabel.IYZ: (1j * _Y) @ _Z,
}
for _m in _GATE_MATRICES.values():
    _m.flags.writeable = False

_BELL_AMPLITUDES = {
    BellKind.PHI_PLUS: np.array([1, 0, 0, 1]) * _SQRT2_INV,
    BellKind.PHI_MINUS: np.array([1, 0, 0, -1]) * _SQRT2_INV,
    BellKind.PSI_PLUS: np.array([0, 1, 1, 0]) * _SQRT2_INV,
    BellKind.PSI_MINUS: np.array([0, 1, -1, 0]) * _SQRT2_INV,
}


def matrix(label: GateLabel) -> np.ndarray:
    """
    The literal 2x2 matrix of a named single-qubit operator.

    Args:
        label (GateLabel): the operator name

    Returns:
        np.ndarray: read-only 2x2 complex matrix

    Raises:
        TypeError: if label is not a GateLabel
    """
    if not isinstance(label, GateLabel):
        raise TypeError(f"Expected a GateLabel, got {label!r}.")
    return _GATE_MATRICES[label]


class FourByFourOperator:
    """
    A 4x4 complex operator on two qubits. Composition with `@` follows matrix
    multiplication, so `(a @ b)` applies b first.

    Attributes:
        entries (np.ndarray): read-only 4x4 complex matrix
    """

    def __init__(self, entries) -> None:
        m = np.array(entries, dtype=complex)
        if m.shape != (4, 4):
            raise ValueError(f"A two-qubit operator must be 4x4, got {m.shape}.")
        if not np.all(np.isfinite(m)):
            raise ValueError("Operator entries must be finite.")
        m.flags.writeable = False
        self.entries = m

    @classmethod
    def identity(cls) -> "FourByFourOperator":
        return cls(np.eye(4))

    @cached_property
    def unitarity_error(self) -> float:
        """Largest entry-wise deviation of U^dagger U from the identity."""
        product = self.entries.conj().T @ self.entries
        return float(np.max(np.abs(product - np.eye(4))))

    def is_unitary(self, tol: float = CONSTRUCTION_TOLERANCE) -> bool:
        return self.unitarity_error <= tol

    @property
    def dagger(self) -> "FourByFourOperator":
        return FourByFourOperator(self.entries.conj().T)

    def __matmul__(self, other):
        if not isinstance(other, FourByFourOperator):
            return NotImplemented
        return FourByFourOperator(self.entries @ other.entries)

    def __repr__(self):
        return f"FourByFourOperator(\n{np.array2string(self.entries, precision=4)})"


def _single_qubit_matrix(op) -> np.ndarray:
    if isinstance(op, GateLabel):
        return matrix(op)
    m = np.asarray(op, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError(f"A single-qubit operator must be 2x2, got {m.shape}.")
    return m


def tensor(a, b) -> FourByFourOperator:
    """
    Kronecker product a (x) b; a acts on qubit 1, b on qubit 2.

    Args:
        a: GateLabel or 2x2 matrix for qubit 1 (channel 1)
        b: GateLabel or 2x2 matrix for qubit 2 (channel 2)

    Returns:
        FourByFourOperator: the two-qubit lift
    """
    return FourByFourOperator(np.kron(_single_qubit_matrix(a), _single_qubit_matrix(b)))


def apply(op: FourByFourOperator, s: TwoQubitState) -> TwoQubitState:
    """
    Applies a unitary two-qubit operator to a state. If the result's norm
    drifted by more than DRIFT_TOLERANCE it is renormalized, a
    NumericDriftWarning is emitted and the drift flag is set.

    Args:
        op (FourByFourOperator): the operator, unitary within CONSTRUCTION_TOLERANCE
        s (TwoQubitState): the input state

    Returns:
        TwoQubitState: op|s>

    Raises:
        NonUnitaryOperatorError: if op is not unitary
    """
    if not op.is_unitary():
        raise NonUnitaryOperatorError(
            f"apply() needs a unitary operator, this one deviates by "
            f"{op.unitarity_error:.3e}."
        )
    out = op.entries @ s.amp
    norm = np.linalg.norm(out)
    drifted = abs(norm - 1) > DRIFT_TOLERANCE
    if drifted:
        warnings.warn(
            f"State norm drifted to {norm:.15f}; renormalizing.", NumericDriftWarning
        )
        out = out / norm
    return TwoQubitState(out, drift_flag=drifted or s.drift_flag)


def bell_state(kind: BellKind) -> TwoQubitState:
    """Canonical amplitudes of a Bell state, positive leading phase."""
    if not isinstance(kind, BellKind):
        raise TypeError(f"Expected a BellKind, got {kind!r}.")
    return TwoQubitState(_BELL_AMPLITUDES[kind])


def basis_state(index: int, n_qubits: int = 2) -> QuantumState:
    """Computational basis vector |index> (|k> with k = 2*b1 + b2 for two qubits)."""
    state_class = TwoQubitState if n_qubits == 2 else SingleQubitState
    dim = 2**n_qubits
    if not 0 <= index < dim:
        raise ValueError(f"Basis index {index} outside [0, {dim - 1}].")
    amp = np.zeros(dim, dtype=complex)
    amp[index] = 1
    return state_class(amp)


class DensityMatrix:
    """
    A 2x2 or 4x4 density matrix. Construction checks hermiticity, unit trace
    and positivity on a fixed witness set (basis vectors plus Bell states for
    dim 4; basis vectors plus the X and Y eigenstates for dim 2).

    Attributes:
        entries (np.ndarray): read-only dim x dim complex matrix
    """

    def __init__(self, entries) -> None:
        rho = np.array(entries, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] not in (2, 4):
            raise ValueError(f"Density matrices are 2x2 or 4x4, got {rho.shape}.")
        rho.flags.writeable = False
        self.entries = rho
        self._validate()

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim) / dim)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def _validate(self) -> None:
        rho = self.entries
        if not np.all(np.isfinite(rho)):
            raise ValueError("Density matrix entries must be finite.")
        if np.max(np.abs(rho - rho.conj().T)) > STATE_TOLERANCE:
            raise ValueError("Density matrix is not Hermitian.")
        trace = np.trace(rho)
        if abs(trace - 1) > STATE_TOLERANCE:
            raise ValueError(f"Density matrix trace is {trace}, not 1.")
        for v in _witness_vectors(self.dim):
            if np.real(np.vdot(v, rho @ v)) < -STATE_TOLERANCE:
                raise ValueError("Density matrix is not positive semidefinite.")

    def __repr__(self):
        return f"DensityMatrix(\n{np.array2string(self.entries, precision=4)})"


def _witness_vectors(dim: int) -> list[np.ndarray]:
    if dim == 4:
        return [np.eye(4)[k] for k in range(4)] + list(_BELL_AMPLITUDES.values())
    return [
        np.array([1, 0]),
        np.array([0, 1]),
        np.array([1, 1]) * _SQRT2_INV,
        np.array([1, -1]) * _SQRT2_INV,
        np.array([1, 1j]) * _SQRT2_INV,
        np.array([1, -1j]) * _SQRT2_INV,
    ]


def density(s: QuantumState) -> DensityMatrix:
    """Outer product |s><s| of a one- or two-qubit state."""
    return DensityMatrix(np.outer(s.amp, s.amp.conj()))


def purity(rho: DensityMatrix) -> float:
    """Tr(rho^2): 1 for pure states, 1/dim when maximally mixed."""
    return float(np.real(np.trace(rho.entries @ rho.entries)))


def _check_qubit(qubit: int) -> None:
    if qubit not in (1, 2):
        raise ValueError(f"Qubits are numbered 1 and 2, got {qubit}.")


def partial_trace(rho: DensityMatrix, keep: int) -> DensityMatrix:
    """
    Reduces a two-qubit density matrix to the marginal of one qubit.

    Args:
        rho (DensityMatrix): 4x4 density matrix
        keep (int): 1 or 2, the qubit whose state is returned

    Returns:
        DensityMatrix: the 2x2 reduced state

    Raises:
        ValueError: if rho is not 4x4 or keep is not 1 or 2
    """
    if rho.dim != 4:
        raise ValueError(f"partial_trace needs a 4x4 density matrix, got dim {rho.dim}.")
    _check_qubit(keep)
    # indices (row q1, row q2, col q1, col q2)
    t = rho.entries.reshape(2, 2, 2, 2)
    if keep == 1:
        reduced = np.trace(t, axis1=1, axis2=3)
    else:
        reduced = np.trace(t, axis1=0, axis2=2)
    return DensityMatrix(reduced)


def spectrum(rho: DensityMatrix) -> tuple[np.ndarray, np.ndarray]:
    """
    Eigen-decomposition of a density matrix.

    Returns:
        tuple[np.ndarray, np.ndarray]: eigenvalues in ascending order and the
            matching eigenvectors as columns
    """
    eigenvalues, eigenvectors = sla.eigh(rho.entries)
    return eigenvalues, eigenvectors


def born_probabilities(s: QuantumState) -> np.ndarray:
    """Outcome probabilities |amp[k]|^2 in basis order."""
    probs = np.abs(s.amp) ** 2
    return probs / probs.sum()


def _draw(probs: np.ndarray, rng: RandomStream) -> int:
    # side="right" never selects an outcome of probability zero
    index = int(np.searchsorted(np.cumsum(probs), rng.random(), side="right"))
    return min(index, probs.size - 1)


def measure_computational(
    s: TwoQubitState, rng: RandomStream
) -> tuple[tuple[int, int], TwoQubitState]:
    """
    Measures both qubits in the computational basis.

    Args:
        s (TwoQubitState): the state before measurement
        rng (RandomStream): caller-owned random stream

    Returns:
        tuple: ((bit of qubit 1, bit of qubit 2), the collapsed basis state)
    """
    k = _draw(born_probabilities(s), rng)
    return (k >> 1, k & 1), basis_state(k)


def qubit_probabilities(s: TwoQubitState, qubit: int) -> tuple[float, float]:
    """Marginal probabilities (Pr(0), Pr(1)) of one qubit."""
    _check_qubit(qubit)
    probs = (np.abs(s.amp) ** 2).reshape(2, 2)
    marginal = probs.sum(axis=1) if qubit == 1 else probs.sum(axis=0)
    marginal = marginal / marginal.sum()
    return float(marginal[0]), float(marginal[1])


def collapse_qubit(s: TwoQubitState, qubit: int, bit: int) -> TwoQubitState:
    """
    Post-measurement state after observing `bit` on `qubit`; the other qubit
    keeps its (renormalized) superposition.

    Raises:
        ValueError: if the outcome has probability zero
    """
    _check_qubit(qubit)
    t = np.array(s.amp).reshape(2, 2)
    if qubit == 1:
        t[1 - bit, :] = 0
    else:
        t[:, 1 - bit] = 0
    norm = np.linalg.norm(t)
    if norm == 0:
        raise ValueError(f"Outcome {bit} on qubit {qubit} has probability zero.")
    return TwoQubitState(t.reshape(-1) / norm, drift_flag=s.drift_flag)


def measure_qubit(
    s: TwoQubitState, qubit: int, rng: RandomStream
) -> tuple[int, TwoQubitState]:
    """
    Measures a single qubit in the computational basis.

    Args:
        s (TwoQubitState): the state before measurement
        qubit (int): 1 or 2
        rng (RandomStream): caller-owned random stream

    Returns:
        tuple[int, TwoQubitState]: the observed bit and the collapsed state
    """
    _, p1 = qubit_probabilities(s, qubit)
    bit = int(rng.random() < p1)
    return bit, collapse_qubit(s, qubit, bit)


def inner(a: QuantumState, b: QuantumState) -> complex:
    """<a|b>"""
    return complex(np.vdot(a.amp, b.amp))


def equal_up_to_global_phase(
    a: QuantumState, b: QuantumState, tol: float = STATE_TOLERANCE
) -> bool:
    """True iff |<a|b>| >= 1 - tol."""
    return abs(inner(a, b)) >= 1 - tol
