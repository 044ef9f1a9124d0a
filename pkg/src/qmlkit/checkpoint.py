"""Model checkpoints: JSON documents bundling circuits, parameter arrays,
rescale values, and seed provenance.

Schema (version 1):

{
  "format": "qmlkit-checkpoint", "version": 1,
  "kind": "vqc" | "qlstm" | "qlstm-regressor" | "reservoir" | "qfwp" | "qt",
  "seed": 42,                  # master seed the artifact came from, or null
  "model": { ... kind-specific fields; circuits embed the circuit schema ... }
}

A cell_clip of infinity is stored as null.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .circuit import deserialize, serialize
from .classical import MlpSpec
from .errors import CircuitParseError
from .models import (
    QfwpModel,
    QlstmParams,
    QlstmRegressor,
    QtCompressor,
    ReservoirModel,
    VqcModel,
)

__all__ = ["save_checkpoint", "load_checkpoint", "model_to_doc",
           "model_from_doc"]

FORMAT = "qmlkit-checkpoint"
VERSION = 1


def _vqc_doc(model: VqcModel) -> dict:
    return {
        "circuit": json.loads(serialize(model.circuit)),
        "theta": model.theta.tolist(),
        "output_scale": model.output_scale.tolist(),
        "output_bias": model.output_bias.tolist(),
    }


def _vqc_from(doc: dict) -> VqcModel:
    circuit = deserialize(json.dumps(doc["circuit"]))
    return VqcModel(circuit, np.asarray(doc["theta"]),
                    np.asarray(doc["output_scale"]),
                    np.asarray(doc["output_bias"]))


def _qlstm_doc(params: QlstmParams) -> dict:
    clip = params.cell_clip
    return {
        "qnns": [_vqc_doc(q) for q in params.qnns],
        "hidden_dim": params.hidden_dim,
        "input_dim": params.input_dim,
        "cell_clip": None if math.isinf(clip) else clip,
    }


def _qlstm_from(doc: dict) -> QlstmParams:
    clip = doc.get("cell_clip")
    return QlstmParams(tuple(_vqc_from(q) for q in doc["qnns"]),
                       doc["hidden_dim"], doc["input_dim"],
                       math.inf if clip is None else float(clip))


def model_to_doc(model) -> tuple[str, dict]:
    """(kind, document) for any supported model object."""
    if isinstance(model, VqcModel):
        return "vqc", _vqc_doc(model)
    if isinstance(model, QlstmParams):
        return "qlstm", _qlstm_doc(model)
    if isinstance(model, QlstmRegressor):
        return "qlstm-regressor", {
            "params": _qlstm_doc(model.params),
            "w_out": model.w_out.tolist(),
            "b_out": model.b_out,
        }
    if isinstance(model, ReservoirModel):
        return "reservoir", {
            "cell": _qlstm_doc(model.cell),
            "w_out": model.w_out.tolist(),
            "b_out": model.b_out,
            "seed": model.seed,
        }
    if isinstance(model, QfwpModel):
        return "qfwp", {
            "slow_layer_sizes": list(model.slow_spec.layer_sizes),
            "slow_weights": model.slow_weights.tolist(),
            "fast": _vqc_doc(model.fast),
        }
    if isinstance(model, QtCompressor):
        return "qt", {
            "qnn": _vqc_doc(model.qnn),
            "m": model.m,
            "scale": model.scale,
            "shift": model.shift,
        }
    raise TypeError(f"cannot checkpoint object of type {type(model).__name__}")


def model_from_doc(kind: str, doc: dict):
    """Inverse of model_to_doc."""
    if kind == "vqc":
        return _vqc_from(doc)
    if kind == "qlstm":
        return _qlstm_from(doc)
    if kind == "qlstm-regressor":
        return QlstmRegressor(_qlstm_from(doc["params"]),
                              np.asarray(doc["w_out"]), float(doc["b_out"]))
    if kind == "reservoir":
        return ReservoirModel(_qlstm_from(doc["cell"]),
                              np.asarray(doc["w_out"]), float(doc["b_out"]),
                              int(doc["seed"]))
    if kind == "qfwp":
        return QfwpModel(MlpSpec(tuple(doc["slow_layer_sizes"])),
                         np.asarray(doc["slow_weights"]), _vqc_from(doc["fast"]))
    if kind == "qt":
        return QtCompressor(_vqc_from(doc["qnn"]), int(doc["m"]),
                            float(doc["scale"]), float(doc["shift"]))
    raise CircuitParseError(f"checkpoint.kind: unknown kind {kind!r}")


def save_checkpoint(path, model, seed: int | None = None) -> None:
    """Write a model checkpoint document to path."""
    kind, doc = model_to_doc(model)
    payload = {"format": FORMAT, "version": VERSION, "kind": kind,
               "seed": seed, "model": doc}
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def load_checkpoint(path):
    """Read a checkpoint; returns (model, seed)."""
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise CircuitParseError(f"checkpoint: not valid JSON ({exc})") from exc
    if not isinstance(payload, dict) or payload.get("format") != FORMAT:
        raise CircuitParseError("checkpoint: missing format marker")
    if payload.get("version") != VERSION:
        raise CircuitParseError(
            f"checkpoint.version: unsupported version {payload.get('version')}")
    model = model_from_doc(payload.get("kind"), payload.get("model", {}))
    return model, payload.get("seed")
