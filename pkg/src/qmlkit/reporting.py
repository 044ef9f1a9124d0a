"""Deterministic run artifacts: CSV metrics, JSONL events, PNG figures.

Metrics files must be byte-identical across reruns of the same (config,
seed), so every writer here is order-preserving, timestamp-free, and formats
floats with repr (shortest round-trip). Figures render through the Agg
backend; they sit next to the delimited output so a run is plot-ready
without any UI.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from . import __version__  # noqa: E402

__all__ = ["write_csv", "write_jsonl", "write_resolved_config",
           "save_curves"]


def _cell(value):
    if isinstance(value, float):
        return repr(value)
    return value


def write_csv(path, rows, fieldnames) -> Path:
    """One row per dict, column order fixed by ``fieldnames``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(fieldnames))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _cell(row[k]) for k in fieldnames})
    return path


def write_jsonl(path, events) -> Path:
    """One sorted-key JSON object per line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for event in events:
            fh.write(json.dumps(event, sort_keys=True) + "\n")
    return path


def write_resolved_config(out_dir, subcommand: str, config: dict) -> Path:
    """Echo the fully resolved config plus the tool version into the run."""
    path = Path(out_dir) / "config.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"tool": "qmlkit", "version": __version__,
           "subcommand": subcommand, "config": config}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def save_curves(path, curves: dict, title: str = "", xlabel: str = "",
                ylabel: str = "", x=None) -> Path:
    """Line plot of named series over a shared (default integer) axis."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, ys in curves.items():
        xs = range(len(ys)) if x is None else x
        ax.plot(xs, ys, label=label)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if len(curves) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
