"""Quantum LSTM: four gate QNNs, elementwise cell arithmetic, and BPTT.

The cell follows the standard LSTM recurrences with each gate pre-activation
produced by a quantum circuit:

    v_t = [h_{t-1}; x_t]
    f_t = sigmoid(QNN_f(v_t))      i_t = sigmoid(QNN_i(v_t))
    g_t = tanh(QNN_g(v_t))         o_t = sigmoid(QNN_o(v_t))
    c_t = f_t * c_{t-1} + i_t * g_t
    h_t = o_t * tanh(c_t)

v_t enters each circuit through arctan pre-scaling, keeping the encoding
angles in (-pi/2, pi/2). The cell state is clipped to [-cell_clip, cell_clip]
for numerical hygiene; pass cell_clip=inf to disable.

BPTT combines analytic derivatives of the cell arithmetic with shift-rule
Jacobians of every QNN w.r.t. both its variational and its input angles, so
the gradient is exact up to the clip's kink.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..autodiff import Adam, batched_value_and_jacobian
from ..circuit import build_layered
from ..statevec import pauli_z
from .vqc import VqcModel, vqc_init

__all__ = [
    "QlstmParams",
    "QlstmState",
    "QlstmRegressor",
    "qlstm_init",
    "cell_update",
    "qlstm_step",
    "qlstm_forward",
    "qlstm_backward",
    "qlstm_bptt_grad",
    "train_qlstm",
]

GATE_ORDER = ("forget", "input", "update", "output")


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-z))


@dataclass(frozen=True)
class QlstmParams:
    """Four gate QNNs over the concatenated input v_t = [h; x]."""

    qnns: tuple[VqcModel, VqcModel, VqcModel, VqcModel]
    hidden_dim: int
    input_dim: int
    cell_clip: float = 10.0

    def __post_init__(self) -> None:
        if len(self.qnns) != 4:
            raise ValueError("need exactly four gate QNNs")
        if self.hidden_dim < 1 or self.input_dim < 1:
            raise ValueError("hidden_dim and input_dim must be >= 1")
        if not self.cell_clip > 0:
            raise ValueError("cell_clip must be positive")
        concat = self.hidden_dim + self.input_dim
        for name, qnn in zip(GATE_ORDER, self.qnns):
            if qnn.circuit.input_dim != concat:
                raise ValueError(
                    f"{name} QNN encodes {qnn.circuit.input_dim} angles, "
                    f"expected hidden+input = {concat}")
            if qnn.n_outputs != self.hidden_dim:
                raise ValueError(
                    f"{name} QNN emits {qnn.n_outputs} values, "
                    f"expected hidden_dim = {self.hidden_dim}")

    @property
    def n_params(self) -> int:
        """Total variational slots across the four QNNs."""
        return sum(q.circuit.n_params for q in self.qnns)

    def pack_theta(self) -> np.ndarray:
        """Concatenated [forget; input; update; output] angle vector."""
        return np.concatenate([q.theta for q in self.qnns])

    def with_theta(self, flat: np.ndarray) -> "QlstmParams":
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} angles, got {flat.shape}")
        qnns = []
        pos = 0
        for q in self.qnns:
            n = q.circuit.n_params
            qnns.append(replace(q, theta=flat[pos:pos + n]))
            pos += n
        return replace(self, qnns=tuple(qnns))


@dataclass(frozen=True)
class QlstmState:
    """Hidden and cell vectors, both of length hidden_dim."""

    h: np.ndarray
    c: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", np.asarray(self.h, dtype=np.float64))
        object.__setattr__(self, "c", np.asarray(self.c, dtype=np.float64))
        if self.h.shape != self.c.shape:
            raise ValueError(f"h shape {self.h.shape} != c shape {self.c.shape}")

    @staticmethod
    def zeros(hidden_dim: int) -> "QlstmState":
        return QlstmState(np.zeros(hidden_dim), np.zeros(hidden_dim))


def qlstm_init(hidden_dim: int, input_dim: int, n_qubits: int, n_layers: int,
               seed: int, cell_clip: float = 10.0) -> QlstmParams:
    """Four independently seeded layered gate QNNs.

    Each QNN reads hidden_dim Pauli-Z expectations, so n_qubits must be at
    least hidden_dim and at least hidden_dim + input_dim (encoding width).
    """
    concat = hidden_dim + input_dim
    if n_qubits < max(hidden_dim, concat):
        raise ValueError(
            f"n_qubits={n_qubits} too small for hidden_dim={hidden_dim}, "
            f"input_dim={input_dim}")
    obs = tuple(pauli_z(q) for q in range(hidden_dim))
    seeds = np.random.SeedSequence(seed).spawn(4)
    qnns = tuple(
        vqc_init(build_layered(n_qubits, concat, n_layers, observables=obs),
                 seed=s)
        for s in seeds)
    return QlstmParams(qnns, hidden_dim, input_dim, cell_clip)


def cell_update(raw_f, raw_i, raw_u, raw_o, c_prev, cell_clip: float = 10.0):
    """Elementwise LSTM arithmetic on the four gate pre-activations.

    Returns (h, c). Shapes broadcast elementwise; this is the single place
    the recurrences live, shared by forward, step, and tests.
    """
    f = _sigmoid(np.asarray(raw_f, dtype=np.float64))
    i = _sigmoid(np.asarray(raw_i, dtype=np.float64))
    g = np.tanh(np.asarray(raw_u, dtype=np.float64))
    o = _sigmoid(np.asarray(raw_o, dtype=np.float64))
    c = np.clip(f * np.asarray(c_prev, dtype=np.float64) + i * g,
                -cell_clip, cell_clip)
    h = o * np.tanh(c)
    return h, c


def _gate_raws(params: QlstmParams, angles: np.ndarray) -> list[np.ndarray]:
    """Raw pre-activations of the four QNNs at encoding angles (B, concat)."""
    from ..circuit import run_batch
    outs = []
    for qnn in params.qnns:
        e = run_batch(qnn.circuit, angles, qnn.theta)
        outs.append(qnn.output_scale * e + qnn.output_bias)
    return outs


def qlstm_step(params: QlstmParams, x_t, prev: QlstmState) -> QlstmState:
    """One cell step on a single input vector."""
    x_t = np.asarray(x_t, dtype=np.float64).reshape(-1)
    if x_t.shape != (params.input_dim,):
        raise ValueError(f"x_t shape {x_t.shape} != ({params.input_dim},)")
    if prev.h.shape != (params.hidden_dim,):
        raise ValueError(
            f"state dimension {prev.h.shape} != ({params.hidden_dim},)")
    v = np.concatenate([prev.h, x_t])
    raws = _gate_raws(params, np.arctan(v)[None, :])
    h, c = cell_update(*(r[0] for r in raws), prev.c, params.cell_clip)
    return QlstmState(h, c)


def qlstm_forward(params: QlstmParams, X_seq: np.ndarray):
    """Run the cell over a batch of sequences.

    X_seq has shape (B, T, input_dim). Returns (H, tape) where H is the
    hidden trajectory of shape (B, T, hidden_dim) and tape holds per-step
    intermediates for the backward pass.
    """
    X_seq = np.asarray(X_seq, dtype=np.float64)
    if X_seq.ndim == 2:  # single sequence (T, input_dim)
        X_seq = X_seq[None]
    if X_seq.ndim != 3 or X_seq.shape[2] != params.input_dim:
        raise ValueError(
            f"X_seq must be (B, T, {params.input_dim}), got {X_seq.shape}")
    B, T, _ = X_seq.shape
    if T < 1:
        raise ValueError("sequence length must be >= 1")
    h = np.zeros((B, params.hidden_dim))
    c = np.zeros((B, params.hidden_dim))
    tape = []
    H = np.empty((B, T, params.hidden_dim))
    for t in range(T):
        v = np.concatenate([h, X_seq[:, t, :]], axis=1)
        angles = np.arctan(v)
        raw_f, raw_i, raw_u, raw_o = _gate_raws(params, angles)
        f, i = _sigmoid(raw_f), _sigmoid(raw_i)
        g, o = np.tanh(raw_u), _sigmoid(raw_o)
        c_raw = f * c + i * g
        c_new = np.clip(c_raw, -params.cell_clip, params.cell_clip)
        h_new = o * np.tanh(c_new)
        tape.append({"v": v, "angles": angles, "f": f, "i": i, "g": g, "o": o,
                     "c_prev": c, "c_raw": c_raw, "c": c_new})
        h, c = h_new, c_new
        H[:, t, :] = h
    return H, tape


def qlstm_backward(params: QlstmParams, tape, dH: np.ndarray) -> np.ndarray:
    """Gradient of a loss w.r.t. all QNN angles given dL/dh_t.

    dH has shape (B, T, hidden_dim). Returns the flat gradient in
    pack_theta order. Shift-rule Jacobians are evaluated per (step, gate)
    in batched passes.
    """
    B, T, hidden = dH.shape
    grads = [np.zeros(q.circuit.n_params) for q in params.qnns]
    gh = np.zeros((B, hidden))
    gc = np.zeros((B, hidden))
    for t in range(T - 1, -1, -1):
        rec = tape[t]
        gh = gh + dH[:, t, :]
        tanh_c = np.tanh(rec["c"])
        gc_total = gc + gh * rec["o"] * (1.0 - tanh_c ** 2)
        # through the clip: zero where the cell saturated
        g_craw = gc_total * (rec["c_raw"] == rec["c"])
        g_raw = {
            "forget": g_craw * rec["c_prev"] * rec["f"] * (1.0 - rec["f"]),
            "input": g_craw * rec["g"] * rec["i"] * (1.0 - rec["i"]),
            "update": g_craw * rec["i"] * (1.0 - rec["g"] ** 2),
            "output": gh * tanh_c * rec["o"] * (1.0 - rec["o"]),
        }
        gv = np.zeros_like(rec["v"])
        for k, (name, qnn) in enumerate(zip(GATE_ORDER, params.qnns)):
            _, jac_var, jac_in = batched_value_and_jacobian(
                qnn.circuit, rec["angles"], qnn.theta, inputs=True)
            grads[k] += np.einsum("bh,h,bhp->p", g_raw[name],
                                  qnn.output_scale, jac_var)
            gv += np.einsum("bh,h,bhd->bd", g_raw[name], qnn.output_scale,
                            jac_in)
        gv *= 1.0 / (1.0 + rec["v"] ** 2)  # through arctan
        gh = gv[:, :hidden]
        gc = g_craw * rec["f"]
    return np.concatenate(grads)


def qlstm_bptt_grad(params: QlstmParams, sequence, targets) -> np.ndarray:
    """Gradient of the summed squared error sum_t |h_t - target_t|^2 over
    one sequence, w.r.t. all four QNN parameter vectors (pack_theta order)."""
    sequence = np.asarray(sequence, dtype=np.float64)
    if sequence.size == 0:
        raise ValueError("sequence must not be empty")
    if sequence.ndim == 1:
        sequence = sequence[:, None]
    targets = np.asarray(targets, dtype=np.float64)
    H, tape = qlstm_forward(params, sequence[None])
    if targets.shape != H[0].shape:
        raise ValueError(f"targets shape {targets.shape} != {H[0].shape}")
    dH = 2.0 * (H - targets[None])
    return qlstm_backward(params, tape, dH)


def qlstm_loss(params: QlstmParams, sequence, targets) -> float:
    """The loss differentiated by qlstm_bptt_grad."""
    sequence = np.asarray(sequence, dtype=np.float64)
    if sequence.ndim == 1:
        sequence = sequence[:, None]
    H, _ = qlstm_forward(params, sequence[None])
    return float(np.sum((H[0] - np.asarray(targets, dtype=np.float64)) ** 2))


@dataclass(frozen=True)
class QlstmRegressor:
    """QLSTM encoder with an affine readout on the final hidden state."""

    params: QlstmParams
    w_out: np.ndarray
    b_out: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "w_out",
                           np.asarray(self.w_out, dtype=np.float64))
        if self.w_out.shape != (self.params.hidden_dim,):
            raise ValueError(
                f"w_out shape {self.w_out.shape} != "
                f"({self.params.hidden_dim},)")


def regressor_init(hidden_dim: int, input_dim: int, n_qubits: int,
                   n_layers: int, seed: int) -> QlstmRegressor:
    params = qlstm_init(hidden_dim, input_dim, n_qubits, n_layers, seed)
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(5)[4])
    return QlstmRegressor(params, rng.normal(scale=0.5, size=hidden_dim), 0.0)


def regressor_predict(model: QlstmRegressor, X_seq) -> np.ndarray:
    """Scalar prediction per sequence from the final hidden state."""
    H, _ = qlstm_forward(model.params, X_seq)
    return H[:, -1, :] @ model.w_out + model.b_out


def train_qlstm(model: QlstmRegressor, X_seq, y, steps: int, lr: float = 0.05
                ) -> tuple[QlstmRegressor, list[float]]:
    """Adam on mean squared next-step error; returns (model, loss curve).

    X_seq is (B, T, input_dim), y is (B,). Gradients flow through BPTT into
    all four QNNs and analytically into the readout.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    y = np.asarray(y, dtype=np.float64)
    opt = Adam(lr=lr)
    n_theta = model.params.n_params
    flat = np.concatenate([model.params.pack_theta(), model.w_out,
                           [model.b_out]])
    losses = []
    for _ in range(steps):
        params = model.params.with_theta(flat[:n_theta])
        w_out = flat[n_theta:-1]
        b_out = flat[-1]
        H, tape = qlstm_forward(params, X_seq)
        h_last = H[:, -1, :]
        pred = h_last @ w_out + b_out
        resid = pred - y
        loss = float(np.mean(resid ** 2))
        losses.append(loss)
        dpred = 2.0 * resid / resid.size
        dH = np.zeros_like(H)
        dH[:, -1, :] = dpred[:, None] * w_out[None, :]
        g_theta = qlstm_backward(params, tape, dH)
        g_w = dpred @ h_last
        g_b = dpred.sum()
        flat = opt.step(flat, np.concatenate([g_theta, g_w, [g_b]]))
    params = model.params.with_theta(flat[:n_theta])
    model = QlstmRegressor(params, flat[n_theta:-1], float(flat[-1]))
    return model, losses
