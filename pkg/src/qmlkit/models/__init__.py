"""Hybrid model zoo: VQC, QLSTM (trained and reservoir), QFWP, and
quantum-train weight compression."""

from .vqc import (
    VqcModel,
    default_classifier,
    train_vqc,
    vqc_forward,
    vqc_forward_batch,
    vqc_init,
    vqc_loss_and_grads,
)
from .qlstm import (
    QlstmParams,
    QlstmRegressor,
    QlstmState,
    qlstm_bptt_grad,
    qlstm_forward,
    qlstm_init,
    qlstm_step,
    regressor_init,
    regressor_predict,
    train_qlstm,
)
from .reservoir import ReservoirModel, reservoir_forward, reservoir_init, train_readout
from .qfwp import QfwpModel, qfwp_episode_grad, qfwp_init, qfwp_step, train_qfwp
from .qtrain import (
    QtCompressor,
    qt_generate_weights,
    qt_init,
    qt_loss_and_grads,
    qt_train,
    required_qubits,
)

__all__ = [
    "VqcModel", "default_classifier", "vqc_init", "vqc_forward",
    "vqc_forward_batch", "vqc_loss_and_grads", "train_vqc",
    "QlstmParams", "QlstmState", "QlstmRegressor",
    "qlstm_init", "qlstm_step", "qlstm_forward", "qlstm_bptt_grad",
    "regressor_init", "regressor_predict", "train_qlstm",
    "ReservoirModel", "reservoir_init", "reservoir_forward", "train_readout",
    "QfwpModel", "qfwp_init", "qfwp_step", "qfwp_episode_grad", "train_qfwp",
    "QtCompressor", "required_qubits", "qt_init", "qt_generate_weights",
    "qt_loss_and_grads", "qt_train",
]
