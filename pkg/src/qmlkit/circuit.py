"""Parameterized-circuit intermediate representation.

A circuit is an ordered gate list over ``n_qubits`` plus a list of Pauli
observables. Rotation angles are bound either to a constant, to an input
slot (data encoding), or to a variational slot (trainable parameter).
Execution order is list order, left to right.

Circuits are immutable after construction and safe to share across threads;
running one allocates its own working state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import CircuitParseError
from .statevec import (
    DEFAULT_MAX_QUBITS,
    GATE_NAMES,
    ROTATION_GATES,
    ObservableSpec,
    Statevector,
    apply_gate_batch,
    expectation_batch,
    pauli_z,
    zero_amplitudes,
)

CONST = "const"
INPUT = "input"
VAR = "var"

FORMAT_VERSION = 1


@dataclass(frozen=True)
class Binding:
    """Angle source for one rotation gate: a constant, an input slot, or a
    variational slot."""

    kind: str
    index: int | None = None
    value: float | None = None

    def __post_init__(self):
        if self.kind == CONST:
            if self.value is None or self.index is not None:
                raise ValueError("const binding takes a value only")
        elif self.kind in (INPUT, VAR):
            if self.index is None or self.index < 0 or self.value is not None:
                raise ValueError(f"{self.kind} binding takes a non-negative index")
        else:
            raise ValueError(f"unknown binding kind: {self.kind!r}")

    @staticmethod
    def const(value: float) -> "Binding":
        return Binding(CONST, value=float(value))

    @staticmethod
    def input_slot(index: int) -> "Binding":
        return Binding(INPUT, index=int(index))

    @staticmethod
    def var_slot(index: int) -> "Binding":
        return Binding(VAR, index=int(index))


@dataclass(frozen=True)
class GateOp:
    """One gate: kind, target qubits, and (for rotations) an angle binding."""

    gate: str
    targets: tuple[int, ...]
    param: Binding | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if self.gate not in GATE_NAMES:
            raise ValueError(f"unknown gate kind: {self.gate!r}")
        if self.gate in ROTATION_GATES:
            if self.param is None:
                raise ValueError(f"{self.gate} requires an angle binding")
        elif self.param is not None:
            raise ValueError(f"{self.gate} takes no angle binding")


@dataclass(frozen=True)
class ParamCircuit:
    """Gate list plus measurement heads.

    ``input_dim`` and ``n_params`` declare how many input and variational
    slots the bindings may reference; every op is validated on construction.
    """

    n_qubits: int
    ops: tuple[GateOp, ...]
    observables: tuple[ObservableSpec, ...] = ()
    input_dim: int = 0
    n_params: int = 0
    max_qubits: int = DEFAULT_MAX_QUBITS

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))
        object.__setattr__(self, "observables", tuple(self.observables))
        if self.n_qubits < 1 or self.n_qubits > self.max_qubits:
            raise ValueError(
                f"n_qubits must be in [1, {self.max_qubits}], got {self.n_qubits}")
        for pos, op in enumerate(self.ops):
            for q in op.targets:
                if q < 0 or q >= self.n_qubits:
                    raise ValueError(f"ops[{pos}]: target {q} out of range")
            n_targets = 2 if op.gate == "CNOT" else 1
            if len(op.targets) != n_targets:
                raise ValueError(
                    f"ops[{pos}]: {op.gate} takes {n_targets} target(s)")
            if op.gate == "CNOT" and op.targets[0] == op.targets[1]:
                raise ValueError(f"ops[{pos}]: CNOT targets must differ")
            b = op.param
            if b is not None:
                if b.kind == INPUT and b.index >= self.input_dim:
                    raise ValueError(
                        f"ops[{pos}]: input slot {b.index} out of range "
                        f"(input_dim={self.input_dim})")
                if b.kind == VAR and b.index >= self.n_params:
                    raise ValueError(
                        f"ops[{pos}]: variational slot {b.index} out of range "
                        f"(n_params={self.n_params})")
        for i, obs in enumerate(self.observables):
            try:
                obs.validate_for(self.n_qubits)
            except ValueError as exc:
                raise ValueError(f"observables[{i}]: {exc}") from exc

    @property
    def n_outputs(self) -> int:
        return len(self.observables)

    def param_op_positions(self) -> list[int]:
        """Positions of ops whose angle is bound to a variational slot."""
        return [i for i, op in enumerate(self.ops)
                if op.param is not None and op.param.kind == VAR]

    def input_op_positions(self) -> list[int]:
        return [i for i, op in enumerate(self.ops)
                if op.param is not None and op.param.kind == INPUT]


def _as_batch(arr, length: int, name: str) -> np.ndarray:
    a = np.zeros((1, length)) if arr is None else np.atleast_2d(
        np.asarray(arr, dtype=np.float64))
    if a.shape[1] != length:
        raise ValueError(f"{name} must have length {length}, got {a.shape[1]}")
    return a


def op_angles(circuit: ParamCircuit, x, theta) -> np.ndarray:
    """Resolve bindings to one angle column per parameterized op.

    ``x`` and ``theta`` may be single vectors or ``(B, dim)`` batches; the
    result has shape ``(B, n_parameterized_ops)`` in op order.
    """
    xb = _as_batch(x, circuit.input_dim, "x")
    tb = _as_batch(theta, circuit.n_params, "theta")
    batch = max(xb.shape[0], tb.shape[0])
    if xb.shape[0] not in (1, batch) or tb.shape[0] not in (1, batch):
        raise ValueError("x and theta batch sizes are incompatible")
    xb = np.broadcast_to(xb, (batch, circuit.input_dim))
    tb = np.broadcast_to(tb, (batch, circuit.n_params))
    cols = []
    for op in circuit.ops:
        b = op.param
        if b is None:
            continue
        if b.kind == CONST:
            cols.append(np.full(batch, b.value))
        elif b.kind == INPUT:
            cols.append(xb[:, b.index])
        else:
            cols.append(tb[:, b.index])
    if not cols:
        return np.zeros((batch, 0))
    return np.stack(cols, axis=1)


def simulate_from_op_angles(circuit: ParamCircuit,
                            angles: np.ndarray) -> np.ndarray:
    """Run the gate list with explicit per-op angles; returns final batched
    amplitudes of shape ``(B, 2**n)``.

    ``angles`` has one column per parameterized op, in op order. This is the
    single execution engine under ``run``/``run_batch`` and the shift-rule
    differentiation, which perturbs individual columns.
    """
    amps = zero_amplitudes(circuit.n_qubits, angles.shape[0])
    col = 0
    for op in circuit.ops:
        if op.param is None:
            apply_gate_batch(amps, circuit.n_qubits, op.gate, op.targets)
        else:
            apply_gate_batch(amps, circuit.n_qubits, op.gate, op.targets,
                             angles[:, col])
            col += 1
    return amps


def final_amplitudes_batch(circuit: ParamCircuit, x=None, theta=None) -> np.ndarray:
    return simulate_from_op_angles(circuit, op_angles(circuit, x, theta))


def final_state(circuit: ParamCircuit, x=None, theta=None) -> Statevector:
    """Statevector after the full gate list, starting from |0...0>."""
    return Statevector(circuit.n_qubits, final_amplitudes_batch(circuit, x, theta)[0])


def measure_batch(circuit: ParamCircuit, amps: np.ndarray,
                  observables=None) -> np.ndarray:
    obs = circuit.observables if observables is None else tuple(observables)
    out = np.empty((amps.shape[0], len(obs)))
    for k, o in enumerate(obs):
        out[:, k] = expectation_batch(amps, circuit.n_qubits, o)
    return out


def run(circuit: ParamCircuit, x=None, theta=None, observables=None) -> np.ndarray:
    """Evaluate the circuit as a function of (x, theta): one expectation per
    observable, each in [-1, 1]."""
    return run_batch(circuit, x, theta, observables)[0]


def run_batch(circuit: ParamCircuit, x=None, theta=None,
              observables=None) -> np.ndarray:
    """Batched ``run``: rows of ``x``/``theta`` are independent evaluations."""
    amps = final_amplitudes_batch(circuit, x, theta)
    return measure_batch(circuit, amps, observables)


def variational_layer_ops(n_qubits: int, n_layers: int, entangler: str = "ring",
                          start_slot: int = 0) -> tuple[list[GateOp], int]:
    """Hardware-efficient trainable layers: per layer, an entangling CNOT
    pattern followed by RY and RZ rotations on every qubit.

    Returns the ops and the number of variational slots consumed
    (``2 * n_qubits * n_layers``), starting at ``start_slot``.
    """
    if entangler not in ("ring", "chain"):
        raise ValueError(f"unknown entangler scheme: {entangler!r}")
    ops: list[GateOp] = []
    slot = start_slot
    for _ in range(n_layers):
        if n_qubits > 1:
            last = n_qubits if entangler == "ring" else n_qubits - 1
            for q in range(last):
                ops.append(GateOp("CNOT", (q, (q + 1) % n_qubits)))
        for q in range(n_qubits):
            ops.append(GateOp("RY", (q,), Binding.var_slot(slot)))
            ops.append(GateOp("RZ", (q,), Binding.var_slot(slot + 1)))
            slot += 2
    return ops, slot - start_slot


def build_layered(n_qubits: int, input_dim: int, n_layers: int,
                  encoding: str = "angle", entangler: str = "ring",
                  observables=None) -> ParamCircuit:
    """Standard layered ansatz: Hadamard wall, one RY(x_i) per input feature,
    then ``n_layers`` entangle-and-rotate layers (2*n_qubits*n_layers slots).

    Inputs are used as raw angles; callers pre-scale features into [-pi, pi].
    Default observables are Pauli-Z on every qubit.
    """
    if n_layers < 0:
        raise ValueError(f"n_layers must be >= 0, got {n_layers}")
    if encoding != "angle":
        raise ValueError(f"unknown encoding scheme: {encoding!r}")
    if input_dim > n_qubits:
        raise ValueError(
            f"angle encoding fits at most {n_qubits} features on "
            f"{n_qubits} qubits, got input_dim={input_dim}")
    ops = [GateOp("H", (q,)) for q in range(n_qubits)]
    ops += [GateOp("RY", (i,), Binding.input_slot(i)) for i in range(input_dim)]
    layer_ops, n_params = variational_layer_ops(n_qubits, n_layers, entangler)
    ops += layer_ops
    if observables is None:
        observables = tuple(pauli_z(q) for q in range(n_qubits))
    return ParamCircuit(n_qubits=n_qubits, ops=tuple(ops),
                        observables=tuple(observables),
                        input_dim=input_dim, n_params=n_params)


# --- serialization ----------------------------------------------------------
#
# Documented schema (version 1), JSON:
# {
#   "version": 1,
#   "n_qubits": 4, "input_dim": 4, "n_params": 16,
#   "ops": [
#     {"gate": "H", "targets": [0]},
#     {"gate": "RY", "targets": [0], "param": {"kind": "input", "index": 0}},
#     {"gate": "RZ", "targets": [1], "param": {"kind": "var", "index": 3}},
#     {"gate": "RX", "targets": [2], "param": {"kind": "const", "value": 0.5}},
#     {"gate": "CNOT", "targets": [0, 1]}
#   ],
#   "observables": [[{"qubit": 0, "pauli": "Z"}]]
# }


def _binding_to_json(b: Binding) -> dict:
    if b.kind == CONST:
        return {"kind": CONST, "value": b.value}
    return {"kind": b.kind, "index": b.index}


def serialize(circuit: ParamCircuit) -> str:
    """Circuit to its JSON document (schema version 1)."""
    doc = {
        "version": FORMAT_VERSION,
        "n_qubits": circuit.n_qubits,
        "input_dim": circuit.input_dim,
        "n_params": circuit.n_params,
        "ops": [
            {"gate": op.gate, "targets": list(op.targets)}
            | ({"param": _binding_to_json(op.param)} if op.param else {})
            for op in circuit.ops
        ],
        "observables": [
            [{"qubit": q, "pauli": p} for q, p in obs.factors]
            for obs in circuit.observables
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def _require(doc: dict, key: str, types, where: str):
    if key not in doc:
        raise CircuitParseError(f"{where}: missing key {key!r}")
    value = doc[key]
    if not isinstance(value, types):
        raise CircuitParseError(f"{where}.{key}: unexpected type {type(value).__name__}")
    return value


def _parse_binding(raw, where: str) -> Binding:
    if not isinstance(raw, dict):
        raise CircuitParseError(f"{where}: binding must be an object")
    kind = _require(raw, "kind", str, where)
    try:
        if kind == CONST:
            return Binding.const(_require(raw, "value", (int, float), where))
        if kind in (INPUT, VAR):
            return Binding(kind, index=_require(raw, "index", int, where))
    except ValueError as exc:
        raise CircuitParseError(f"{where}: {exc}") from exc
    raise CircuitParseError(f"{where}.kind: unknown binding kind {kind!r}")


def deserialize(text: str) -> ParamCircuit:
    """Parse a circuit document; raises CircuitParseError naming the
    offending location."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitParseError(f"document: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise CircuitParseError("document: top level must be an object")
    version = _require(doc, "version", int, "document")
    if version != FORMAT_VERSION:
        raise CircuitParseError(f"document.version: unsupported version {version}")
    n_qubits = _require(doc, "n_qubits", int, "document")
    input_dim = doc.get("input_dim", 0)
    n_params = doc.get("n_params", 0)
    raw_ops = _require(doc, "ops", list, "document")
    ops = []
    for i, raw in enumerate(raw_ops):
        where = f"ops[{i}]"
        if not isinstance(raw, dict):
            raise CircuitParseError(f"{where}: must be an object")
        gate = _require(raw, "gate", str, where)
        if gate not in GATE_NAMES:
            raise CircuitParseError(f"{where}.gate: unknown gate {gate!r}")
        targets = _require(raw, "targets", list, where)
        if not all(isinstance(t, int) for t in targets):
            raise CircuitParseError(f"{where}.targets: must be integers")
        param = None
        if "param" in raw:
            param = _parse_binding(raw["param"], f"{where}.param")
        try:
            ops.append(GateOp(gate, tuple(targets), param))
        except ValueError as exc:
            raise CircuitParseError(f"{where}: {exc}") from exc
    raw_obs = doc.get("observables", [])
    if not isinstance(raw_obs, list):
        raise CircuitParseError("document.observables: must be a list")
    observables = []
    for i, factors in enumerate(raw_obs):
        where = f"observables[{i}]"
        if not isinstance(factors, list):
            raise CircuitParseError(f"{where}: must be a list of factors")
        parsed = []
        for j, f in enumerate(factors):
            fwhere = f"{where}[{j}]"
            if not isinstance(f, dict):
                raise CircuitParseError(f"{fwhere}: must be an object")
            parsed.append((_require(f, "qubit", int, fwhere),
                           _require(f, "pauli", str, fwhere)))
        try:
            observables.append(ObservableSpec(tuple(parsed)))
        except ValueError as exc:
            raise CircuitParseError(f"{where}: {exc}") from exc
    try:
        return ParamCircuit(n_qubits=n_qubits, ops=tuple(ops),
                            observables=tuple(observables),
                            input_dim=input_dim, n_params=n_params)
    except ValueError as exc:
        raise CircuitParseError(f"document: {exc}") from exc


def save_circuit(circuit: ParamCircuit, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(circuit))


def load_circuit(path) -> ParamCircuit:
    with open(path, encoding="utf-8") as fh:
        return deserialize(fh.read())
