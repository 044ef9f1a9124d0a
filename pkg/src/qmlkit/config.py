"""Experiment config loading and schema validation.

Configs are flat JSON objects, one schema per subcommand. Unknown keys are
hard errors (silent typos poison experiments), missing required keys and
out-of-range values are reported with the offending key's path, and
cross-field rules (register capacity, encoding width) run after the
per-field checks so their inputs are already typed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Callable

__all__ = ["ConfigError", "SCHEMAS", "SUBCOMMANDS", "load_config",
           "validate_config", "resolve_config", "describe_schema"]

_MISSING = object()


class ConfigError(Exception):
    """Carries the full list of validation errors."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


@dataclass(frozen=True)
class Field:
    """One config key: expected type, optional default, optional check."""

    type: type | tuple
    default: Any = _MISSING
    check: Callable[[Any], str | None] | None = None
    doc: str = ""

    @property
    def required(self) -> bool:
        return self.default is _MISSING


def _positive(v) -> str | None:
    return None if v > 0 else f"must be > 0 (got {v})"


def _non_negative(v) -> str | None:
    return None if v >= 0 else f"must be >= 0 (got {v})"


def _at_least(n):
    def check(v):
        return None if v >= n else f"must be >= {n} (got {v})"
    return check


def _unit_interval(v) -> str | None:
    return None if 0.0 <= v <= 1.0 else f"must be in [0, 1] (got {v})"


def _open_unit(v) -> str | None:
    return None if 0.0 < v <= 1.0 else f"must be in (0, 1] (got {v})"


def _choice(*options):
    def check(v):
        if v in options:
            return None
        listed = ", ".join(repr(o) for o in options)
        return f"must be one of {listed} (got {v!r})"
    return check


def _int_list(v) -> str | None:
    for i, item in enumerate(v):
        if isinstance(item, bool) or not isinstance(item, int):
            return f"[{i}] must be an integer (got {item!r})"
        if item < 1:
            return f"[{i}] must be >= 1 (got {item})"
    return None if len(v) >= 2 else "needs at least input and output sizes"


def _number_list(v) -> str | None:
    for i, item in enumerate(v):
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            return f"[{i}] must be a number (got {item!r})"
    return None


def _type_name(t) -> str:
    if isinstance(t, tuple):
        return "/".join(x.__name__ for x in t)
    return t.__name__


_SEED = Field(int, default=0, check=_non_negative, doc="master seed")
_OUT = Field((str, type(None)), default=None,
             doc="output directory (overridden by --out)")

_SERIES = {
    "series_len": Field(int, default=80, check=_at_least(8),
                        doc="damped-sine length"),
    "omega": Field(float, default=0.5, check=_positive,
                   doc="sine angular frequency"),
    "decay": Field(float, default=0.02, check=_non_negative,
                   doc="exponential decay rate"),
    "window": Field(int, default=4, check=_positive,
                    doc="input window length"),
}

SCHEMAS: dict[str, dict[str, Field]] = {
    "train-vqc": {
        "dataset": Field(str, default="blobs", check=_choice("blobs", "xor"),
                         doc="training dataset"),
        "dataset_size": Field(int, default=20, check=_positive,
                              doc="per-class count (blobs) or repeats (xor)"),
        "n_qubits": Field(int, default=4, check=_positive),
        "n_layers": Field(int, default=2, check=_positive),
        "steps": Field(int, default=120, check=_positive),
        "lr": Field(float, default=0.1, check=_positive),
        "seed": _SEED, "out_dir": _OUT,
    },
    "train-qlstm": {
        **_SERIES,
        "hidden_dim": Field(int, default=2, check=_positive),
        "n_qubits": Field(int, default=3, check=_positive),
        "n_layers": Field(int, default=1, check=_positive),
        "steps": Field(int, default=60, check=_positive),
        "lr": Field(float, default=0.05, check=_positive),
        "seed": _SEED, "out_dir": _OUT,
    },
    "train-reservoir": {
        **_SERIES,
        "hidden_dim": Field(int, default=2, check=_positive),
        "n_qubits": Field(int, default=3, check=_positive),
        "n_layers": Field(int, default=1, check=_positive),
        "ridge": Field(float, default=1e-8, check=_positive,
                       doc="readout regularizer"),
        "seed": _SEED, "out_dir": _OUT,
    },
    "train-qfwp": {
        **{k: v for k, v in _SERIES.items() if k != "window"},
        "window": Field(int, default=2, check=_positive,
                        doc="observation width"),
        "episode_len": Field(int, default=6, check=_positive,
                             doc="steps per episode"),
        "n_qubits": Field(int, default=2, check=_positive),
        "n_layers": Field(int, default=1, check=_positive),
        "slow_hidden": Field(int, default=8, check=_positive,
                             doc="slow-net hidden width"),
        "steps": Field(int, default=80, check=_positive),
        "lr": Field(float, default=0.05, check=_positive),
        "seed": _SEED, "out_dir": _OUT,
    },
    "qt-compress": {
        "layer_sizes": Field(list, default=[2, 2, 1], check=_int_list,
                             doc="target MLP layer sizes"),
        "dataset": Field(str, default="xor", check=_choice("xor")),
        "dataset_size": Field(int, default=1, check=_positive,
                              doc="repeats of the truth table"),
        "n_qubits": Field((int, type(None)), default=None,
                          doc="expected register width (validated)"),
        "n_layers": Field(int, default=2, check=_positive),
        "epochs": Field(int, default=80, check=_positive),
        "lr": Field(float, default=0.05, check=_positive),
        "seed": _SEED, "out_dir": _OUT,
    },
    "qrl": {
        "map": Field(str, default="4x4", check=_choice("4x4")),
        "slippery": Field(bool, default=False),
        "step_limit": Field(int, default=50, check=_positive),
        "episodes": Field(int, default=1500, check=_positive),
        "n_qubits": Field(int, default=4, check=_positive),
        "n_layers": Field(int, default=4, check=_positive),
        "gamma": Field(float, default=0.8, check=_open_unit),
        "lr": Field(float, default=0.02, check=_positive),
        "batch_size": Field(int, default=16, check=_positive),
        "warmup": Field(int, default=32, check=_positive),
        "eval_every": Field(int, default=25, check=_positive),
        "stop_when_solved": Field(bool, default=True),
        "seed": _SEED, "out_dir": _OUT,
    },
    "fed-sim": {
        "clients": Field(int, default=4, check=_positive),
        "rounds": Field(int, default=20, check=_positive),
        "local_epochs": Field(int, default=2, check=_positive),
        "lr": Field(float, default=0.1, check=_positive),
        "dataset_size": Field(int, default=24, check=_positive,
                              doc="blobs per class"),
        "n_qubits": Field(int, default=4, check=_positive),
        "n_layers": Field(int, default=2, check=_positive),
        "seed": _SEED, "out_dir": _OUT,
    },
    "qas-evo": {
        "library": Field(str, default="bell", check=_choice("bell")),
        "population": Field(int, default=20, check=_at_least(2)),
        "generations": Field(int, default=30, check=_positive),
        "mutation_rate": Field(float, default=0.9, check=_unit_interval),
        "depth_penalty": Field(float, default=0.0, check=_non_negative),
        "seed": _SEED, "out_dir": _OUT,
    },
    "qas-rl": {
        "library": Field(str, default="bell", check=_choice("bell")),
        "budget": Field(int, default=3, check=_non_negative,
                        doc="ops per built circuit"),
        "episodes": Field(int, default=500, check=_positive),
        "alpha": Field(float, default=0.5, check=_open_unit,
                       doc="tabular learning rate"),
        "gamma": Field(float, default=1.0, check=_open_unit),
        "seed": _SEED, "out_dir": _OUT,
    },
    "qas-diff": {
        "task": Field(str, default="cosine-gap", check=_choice("cosine-gap")),
        "n_points": Field(int, default=16, check=_at_least(2)),
        "epochs": Field(int, default=150, check=_positive),
        "lr": Field(float, default=0.05, check=_positive),
        "seed": _SEED, "out_dir": _OUT,
    },
    "simulate": {
        "circuit": Field(str, doc="circuit JSON path, relative to the config"),
        "x": Field((list, type(None)), default=None, check=_number_list,
                   doc="input features"),
        "theta": Field((list, type(None)), default=None, check=_number_list,
                       doc="variational angles"),
        "out_dir": _OUT,
    },
}

SUBCOMMANDS = tuple(SCHEMAS)


def _cross_checks(name: str, cfg: dict) -> list[str]:
    errors = []
    if name == "train-vqc" and cfg["n_qubits"] < 2:
        errors.append(f"{name}.n_qubits: dataset has 2 features; "
                      f"input_dim 2 exceeds n_qubits={cfg['n_qubits']}")
    if name in ("train-qlstm", "train-reservoir"):
        need = cfg["hidden_dim"] + 1
        if cfg["n_qubits"] < need:
            errors.append(
                f"{name}.n_qubits: must be >= hidden_dim + 1 = {need} "
                f"(hidden state plus one input feature)")
    if name == "train-qfwp":
        if cfg["n_qubits"] < cfg["window"]:
            errors.append(f"{name}.n_qubits: window={cfg['window']} features "
                          f"need at least as many qubits")
        if cfg["series_len"] <= cfg["window"]:
            errors.append(f"{name}.series_len: must exceed window")
    if name in ("train-qlstm", "train-reservoir") \
            and cfg["series_len"] <= cfg["window"]:
        errors.append(f"{name}.series_len: must exceed window")
    if name == "qt-compress":
        from .models.qtrain import required_qubits

        sizes = cfg["layer_sizes"]
        m = sum(sizes[i] * sizes[i + 1] + sizes[i + 1]
                for i in range(len(sizes) - 1))
        n = cfg["n_qubits"]
        if n is not None:
            if 2 ** n < m:
                errors.append(
                    f"{name}.n_qubits: capacity 2^{n} = {2 ** n} cannot "
                    f"host M = {m} target weights")
            elif n != required_qubits(m):
                errors.append(f"{name}.n_qubits: M = {m} weights need "
                              f"exactly ceil(log2 M) = "
                              f"{required_qubits(m)} qubits")
        if sizes[0] != 2 or sizes[-1] != 1:
            errors.append(f"{name}.layer_sizes: the xor task needs 2 inputs "
                          f"and 1 output")
    if name == "qrl":
        if 2 ** cfg["n_qubits"] < 16:
            errors.append(f"{name}.n_qubits: 16 grid states need at least "
                          f"4 qubits for basis encoding")
        if cfg["n_qubits"] < 4:
            errors.append(f"{name}.n_qubits: four actions need four "
                          f"readout qubits")
        if cfg["warmup"] < cfg["batch_size"]:
            errors.append(f"{name}.warmup: must be >= batch_size so the "
                          f"first update has a full batch")
    if name == "fed-sim":
        if cfg["n_qubits"] < 2:
            errors.append(f"{name}.n_qubits: dataset has 2 features; "
                          f"input_dim 2 exceeds n_qubits={cfg['n_qubits']}")
        if 2 * cfg["dataset_size"] < cfg["clients"]:
            errors.append(f"{name}.clients: {cfg['clients']} clients cannot "
                          f"shard {2 * cfg['dataset_size']} samples")
    return errors


def load_config(path: str) -> dict:
    """Parse a JSON config file; raises ConfigError with a diagnostic."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError([f"{path}: {exc.strerror or exc}"]) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError([f"{path}: not valid JSON ({exc})"]) from exc
    if not isinstance(doc, dict):
        raise ConfigError([f"{path}: top level must be a JSON object"])
    return doc


def validate_config(doc: dict, subcommand: str) -> list[str]:
    """Schema plus cross-field checks; returns all errors, never raises."""
    if subcommand not in SCHEMAS:
        return [f"unknown subcommand {subcommand!r}"]
    schema = SCHEMAS[subcommand]
    errors = []
    for key in sorted(set(doc) - set(schema)):
        errors.append(f"{subcommand}: unknown key {key!r}")
    resolved = {}
    for key, field in schema.items():
        if key not in doc:
            if field.required:
                errors.append(f"{subcommand}.{key}: required key is missing")
            else:
                resolved[key] = field.default
            continue
        value = doc[key]
        if isinstance(value, int) and not isinstance(value, bool) \
                and field.type is float:
            value = float(value)
        if isinstance(value, bool) and field.type in (int, float):
            errors.append(f"{subcommand}.{key}: must be "
                          f"{_type_name(field.type)} (got a boolean)")
            continue
        if not isinstance(value, field.type):
            errors.append(f"{subcommand}.{key}: must be "
                          f"{_type_name(field.type)} (got {value!r})")
            continue
        if field.check is not None and value is not None:
            problem = field.check(value)
            if problem is not None:
                errors.append(f"{subcommand}.{key}: {problem}")
                continue
        resolved[key] = value
    if not errors:
        errors.extend(_cross_checks(subcommand, resolved))
    return errors


def resolve_config(doc: dict, subcommand: str) -> dict:
    """Validated config with defaults filled in; raises on any error."""
    errors = validate_config(doc, subcommand)
    if errors:
        raise ConfigError(errors)
    out = {}
    for key, field in SCHEMAS[subcommand].items():
        value = doc.get(key, field.default)
        if isinstance(value, int) and not isinstance(value, bool) \
                and field.type is float:
            value = float(value)
        out[key] = value
    return out


def describe_schema(subcommand: str) -> str:
    """Human-readable schema listing for --help style output."""
    lines = []
    for key, field in SCHEMAS[subcommand].items():
        kind = _type_name(field.type)
        tail = "required" if field.required else f"default {field.default!r}"
        doc = f"  {field.doc}" if field.doc else ""
        lines.append(f"{key} ({kind}, {tail}){doc}")
    return "\n".join(lines)
