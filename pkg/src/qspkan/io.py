"""Schema-versioned JSON documents (phases files, checkpoints) and CSV output.

Floats in JSON use Python's shortest round-trip repr; CSV reals use 17
significant digits.  Both are byte-stable for identical inputs.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .datasets import build_model, model_topology
from .errors import InvalidInput
from .training import Model

PHASES_SCHEMA = "qspkan.phases/1"
CHECKPOINT_SCHEMA = "qspkan.checkpoint/1"
CONFIG_SCHEMA_VERSION = 1


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def _dump(path, doc: dict) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _load(path, schema: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path}: not valid JSON ({exc.msg})") from exc
    if doc.get("schema") != schema:
        raise InvalidInput(f"{path}: expected schema {schema!r}, found {doc.get('schema')!r}")
    return doc


def save_phases(path, phases, report: dict, target: str, degree: int) -> None:
    _dump(path, {
        "schema": PHASES_SCHEMA,
        "target": target,
        "degree": int(degree),
        "phases": [float(p) for p in phases],
        "report": report,
    })


def load_phases(path) -> np.ndarray:
    doc = _load(path, PHASES_SCHEMA)
    return np.asarray(doc["phases"], dtype=float)


def save_checkpoint(path, model: Model, *, target_dim: int, config: dict, seed: int,
                    dataset: dict, final_loss: float, iterations: int) -> None:
    _dump(path, {
        "schema": CHECKPOINT_SCHEMA,
        "model": model_topology(model),
        "params": [float(p) for p in model.flatten()],
        "target_dim": int(target_dim),
        "config": config,
        "seed": int(seed),
        "dataset": dataset,
        "final_loss": float(final_loss),
        "iterations": int(iterations),
    })


def load_checkpoint(path) -> tuple[Model, dict]:
    doc = _load(path, CHECKPOINT_SCHEMA)
    model = build_model(doc["model"])
    return model.with_params(doc["params"]), doc
