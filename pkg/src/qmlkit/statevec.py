"""Exact statevector simulation of small qubit registers.

Conventions used throughout the toolkit:

* Qubit 0 is the most significant bit of the basis-state index, i.e.
  ``|q0 q1 ... q_{n-1}>`` maps to the integer ``q0*2^(n-1) + ... + q_{n-1}``.
* Amplitudes are ``complex128``. Batched kernels operate on arrays of shape
  ``(batch, 2**n)`` so that many parameter settings of the same circuit can
  be simulated in one pass; rotation angles broadcast along the batch axis.
* Gates are applied with strided slice arithmetic on a reshaped view of the
  amplitude array. No ``2**n x 2**n`` matrix is ever built here; the dense
  construction lives only in the test suite as an independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_MAX_QUBITS = 16

SINGLE_QUBIT_GATES = frozenset({"H", "X", "Y", "Z", "RX", "RY", "RZ"})
ROTATION_GATES = frozenset({"RX", "RY", "RZ"})
TWO_QUBIT_GATES = frozenset({"CNOT"})
GATE_NAMES = SINGLE_QUBIT_GATES | TWO_QUBIT_GATES

PAULI_NAMES = ("X", "Y", "Z")

_INV_SQRT2 = 1.0 / np.sqrt(2.0)


def gate_matrix(kind: str, theta: float | None = None) -> np.ndarray:
    """Return the unitary matrix of a gate (2x2, or 4x4 for CNOT).

    Used for documentation and unitarity checks; the simulator itself never
    multiplies by these matrices.
    """
    if kind in ROTATION_GATES:
        if theta is None:
            raise ValueError(f"{kind} requires an angle")
        c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
        if kind == "RX":
            return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
        if kind == "RY":
            return np.array([[c, -s], [s, c]], dtype=np.complex128)
        return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]],
                        dtype=np.complex128)
    if theta is not None:
        raise ValueError(f"{kind} takes no angle")
    if kind == "H":
        return np.array([[1, 1], [1, -1]], dtype=np.complex128) * _INV_SQRT2
    if kind == "X":
        return np.array([[0, 1], [1, 0]], dtype=np.complex128)
    if kind == "Y":
        return np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
    if kind == "Z":
        return np.array([[1, 0], [0, -1]], dtype=np.complex128)
    if kind == "CNOT":
        m = np.eye(4, dtype=np.complex128)
        m[2:, 2:] = [[0, 1], [1, 0]]
        return m
    raise ValueError(f"unknown gate kind: {kind!r}")


@dataclass(frozen=True)
class ObservableSpec:
    """Tensor product of single-qubit Paulis; identity on unlisted qubits.

    ``factors`` is a tuple of ``(qubit_index, pauli)`` pairs with distinct
    qubit indices and ``pauli`` in ``{"X", "Y", "Z"}``.
    """

    factors: tuple[tuple[int, str], ...]

    def __post_init__(self):
        seen = set()
        for qubit, pauli in self.factors:
            if pauli not in PAULI_NAMES:
                raise ValueError(f"unknown Pauli: {pauli!r}")
            if qubit < 0:
                raise ValueError(f"negative qubit index: {qubit}")
            if qubit in seen:
                raise ValueError(f"duplicate qubit {qubit} in observable")
            seen.add(qubit)

    def validate_for(self, n_qubits: int) -> None:
        for qubit, _ in self.factors:
            if qubit >= n_qubits:
                raise ValueError(
                    f"observable acts on qubit {qubit} but state has "
                    f"{n_qubits} qubits")


def pauli_z(*qubits: int) -> ObservableSpec:
    """Shorthand for a Z-string observable on the given qubits."""
    return ObservableSpec(tuple((q, "Z") for q in qubits))


@dataclass
class Statevector:
    """Pure state of ``n_qubits`` qubits as a length ``2**n`` amplitude array."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be >= 1, got {self.n_qubits}")
        if self.amplitudes.shape != (2 ** self.n_qubits,):
            raise ValueError(
                f"expected {2 ** self.n_qubits} amplitudes, "
                f"got shape {self.amplitudes.shape}")

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def copy(self) -> "Statevector":
        return Statevector(self.n_qubits, self.amplitudes.copy())


def init_state(n_qubits: int, max_qubits: int = DEFAULT_MAX_QUBITS) -> Statevector:
    """All-qubits-zero state |0...0>."""
    if n_qubits < 1 or n_qubits > max_qubits:
        raise ValueError(
            f"n_qubits must be in [1, {max_qubits}], got {n_qubits}")
    amps = np.zeros(2 ** n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return Statevector(n_qubits, amps)


def zero_amplitudes(n_qubits: int, batch: int) -> np.ndarray:
    """Batched |0...0> amplitudes of shape ``(batch, 2**n)``."""
    amps = np.zeros((batch, 2 ** n_qubits), dtype=np.complex128)
    amps[:, 0] = 1.0
    return amps


def _check_targets(n_qubits: int, kind: str, targets: tuple[int, ...]) -> None:
    if kind in SINGLE_QUBIT_GATES:
        if len(targets) != 1:
            raise ValueError(f"{kind} takes exactly one target, got {targets}")
    elif kind == "CNOT":
        if len(targets) != 2:
            raise ValueError(f"CNOT takes (control, target), got {targets}")
        if targets[0] == targets[1]:
            raise ValueError(f"CNOT control and target must differ, got {targets}")
    else:
        raise ValueError(f"unknown gate kind: {kind!r}")
    for q in targets:
        if q < 0 or q >= n_qubits:
            raise ValueError(
                f"target qubit {q} out of range for {n_qubits}-qubit state")


def _bcast(coef, batch_shape):
    """Reshape a per-batch coefficient so it broadcasts over (B, pre, post)."""
    arr = np.asarray(coef)
    if arr.ndim == 0:
        return arr
    return arr.reshape(batch_shape + (1, 1))


def _apply_1q_batch(amps: np.ndarray, n_qubits: int, q: int,
                    m00, m01, m10, m11) -> None:
    """In-place generic single-qubit update on ``(B, 2**n)`` amplitudes.

    Matrix entries may be scalars or shape-``(B,)`` arrays (angle batches).
    """
    pre = 1 << q
    post = 1 << (n_qubits - 1 - q)
    batch = amps.shape[0]
    v = amps.reshape(batch, pre, 2, post)
    a0 = v[:, :, 0, :].copy()
    a1 = v[:, :, 1, :]
    bs = (batch,)
    v[:, :, 0, :] = _bcast(m00, bs) * a0 + _bcast(m01, bs) * a1
    v[:, :, 1, :] = _bcast(m10, bs) * a0 + _bcast(m11, bs) * a1


def apply_gate_batch(amps: np.ndarray, n_qubits: int, kind: str,
                     targets: tuple[int, ...], theta=None) -> None:
    """Apply one gate in place to batched amplitudes of shape ``(B, 2**n)``.

    ``theta`` is required for RX/RY/RZ and may be a scalar or a ``(B,)``
    array giving one angle per batch row.
    """
    _check_targets(n_qubits, kind, targets)

    if kind == "X":
        q = targets[0]
        pre, post = 1 << q, 1 << (n_qubits - 1 - q)
        v = amps.reshape(-1, pre, 2, post)
        tmp = v[:, :, 0, :].copy()
        v[:, :, 0, :] = v[:, :, 1, :]
        v[:, :, 1, :] = tmp
        return
    if kind == "Z":
        q = targets[0]
        pre, post = 1 << q, 1 << (n_qubits - 1 - q)
        v = amps.reshape(-1, pre, 2, post)
        v[:, :, 1, :] *= -1.0
        return
    if kind == "Y":
        _apply_1q_batch(amps, n_qubits, targets[0], 0.0, -1j, 1j, 0.0)
        return
    if kind == "H":
        _apply_1q_batch(amps, n_qubits, targets[0],
                        _INV_SQRT2, _INV_SQRT2, _INV_SQRT2, -_INV_SQRT2)
        return
    if kind in ROTATION_GATES:
        if theta is None:
            raise ValueError(f"{kind} requires an angle")
        theta = np.asarray(theta, dtype=np.float64)
        half = 0.5 * theta
        q = targets[0]
        if kind == "RZ":
            pre, post = 1 << q, 1 << (n_qubits - 1 - q)
            batch = amps.shape[0]
            v = amps.reshape(batch, pre, 2, post)
            v[:, :, 0, :] *= _bcast(np.exp(-1j * half), (batch,))
            v[:, :, 1, :] *= _bcast(np.exp(1j * half), (batch,))
            return
        c, s = np.cos(half), np.sin(half)
        if kind == "RY":
            _apply_1q_batch(amps, n_qubits, q, c, -s, s, c)
        else:  # RX
            _apply_1q_batch(amps, n_qubits, q, c, -1j * s, -1j * s, c)
        return
    if kind == "CNOT":
        control, target = targets
        i, j = (control, target) if control < target else (target, control)
        pre = 1 << i
        mid = 1 << (j - i - 1)
        post = 1 << (n_qubits - 1 - j)
        v = amps.reshape(-1, pre, 2, mid, 2, post)
        if control == i:
            tmp = v[:, :, 1, :, 0, :].copy()
            v[:, :, 1, :, 0, :] = v[:, :, 1, :, 1, :]
            v[:, :, 1, :, 1, :] = tmp
        else:
            tmp = v[:, :, 0, :, 1, :].copy()
            v[:, :, 0, :, 1, :] = v[:, :, 1, :, 1, :]
            v[:, :, 1, :, 1, :] = tmp
        return
    raise ValueError(f"unknown gate kind: {kind!r}")


def apply_gate(state: Statevector, kind: str, targets, theta=None) -> Statevector:
    """Return a new state with the gate applied. The input is not modified."""
    targets = tuple(int(t) for t in (targets if hasattr(targets, "__iter__")
                                     else (targets,)))
    amps = state.amplitudes.copy().reshape(1, -1)
    apply_gate_batch(amps, state.n_qubits, kind, targets, theta)
    return Statevector(state.n_qubits, amps[0])


def apply_pauli_string_batch(amps: np.ndarray, n_qubits: int,
                             factors: tuple[tuple[int, str], ...]) -> np.ndarray:
    """Return a copy of batched amplitudes with each Pauli factor applied."""
    out = amps.copy()
    for qubit, pauli in factors:
        apply_gate_batch(out, n_qubits, pauli, (qubit,))
    return out


def expectation_batch(amps: np.ndarray, n_qubits: int,
                      obs: ObservableSpec) -> np.ndarray:
    """Real expectation values ``<psi|B|psi>`` per batch row."""
    obs.validate_for(n_qubits)
    transformed = apply_pauli_string_batch(amps, n_qubits, obs.factors)
    return np.einsum("bi,bi->b", amps.conj(), transformed).real


def expectation(state: Statevector, obs: ObservableSpec) -> float:
    """Expectation of a Pauli-string observable; always in [-1, 1]."""
    return float(expectation_batch(state.amplitudes.reshape(1, -1),
                                   state.n_qubits, obs)[0])


def basis_probabilities(state: Statevector) -> np.ndarray:
    """Measurement probabilities ``p_i = |amp_i|^2`` over all basis states."""
    return np.abs(state.amplitudes) ** 2


def probabilities_batch(amps: np.ndarray) -> np.ndarray:
    return np.abs(amps) ** 2


def index_to_bitstring(index: int, n_qubits: int) -> str:
    """Basis index to bitstring, qubit 0 leftmost."""
    return format(index, f"0{n_qubits}b")


def sample_shots(state: Statevector, shots: int,
                 rng: np.random.Generator) -> dict[str, int]:
    """Sample measurement outcomes; returns bitstring -> count for observed
    outcomes only. Identical generators give identical counts."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    probs = basis_probabilities(state)
    probs = probs / probs.sum()
    counts = rng.multinomial(shots, probs)
    return {index_to_bitstring(i, state.n_qubits): int(c)
            for i, c in enumerate(counts) if c > 0}
