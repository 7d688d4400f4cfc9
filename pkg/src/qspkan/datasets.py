"""Built-in regression datasets and model topologies used by the CLI and scripts."""
from __future__ import annotations

import csv
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidInput
from .layer import LayerParams
from .sim import make_rng
from .stack import StackLayerSpec, StackSpec
from .training import Dataset, Model, model_outputs

GENERATORS = ("product-of-sines", "sum-of-squares", "sine-plus-square", "realizable-by-known-phases", "file")


# ---------------------------------------------------------------------------
# topology <-> dict


def model_topology(model: Model) -> dict:
    if isinstance(model, LayerParams):
        return {"kind": "layer", "num_features": model.num_features, "degree": model.degree}
    return {
        "kind": "stack",
        "input_dim": model.input_dim,
        "layers": [
            {"width": l.width, "degree": l.degree, "readout": l.readout_policy} for l in model.layers
        ],
    }


def build_model(topology: dict) -> Model:
    """Zero-phase model from a topology dict.

    Stacks accept either an explicit ``layers`` list or ``depth`` + ``degree``
    (+ ``readout``), in which case every layer takes the previous padded width.
    """
    kind = topology.get("kind")
    if kind == "layer":
        return LayerParams.zeros(int(topology["num_features"]), int(topology["degree"]))
    if kind == "stack":
        input_dim = int(topology["input_dim"])
        if "layers" in topology:
            layers = [
                StackLayerSpec(np.zeros((int(l["width"]), int(l["degree"]))), l.get("readout", "real_part"))
                for l in topology["layers"]
            ]
            return StackSpec(tuple(layers), input_dim)
        return StackSpec.zeros(input_dim, int(topology["depth"]), int(topology["degree"]),
                               topology.get("readout", "real_part"))
    raise InvalidInput(f"unknown model kind {kind!r}")


# ---------------------------------------------------------------------------
# datasets


@dataclass
class DatasetSpec:
    generator: str = "sine-plus-square"
    num_samples: int = 64
    input_dim: int = 2
    target_dim: int = 1
    seed: int = 0
    path: str | None = None

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise InvalidInput(f"unknown dataset generator {self.generator!r}; choose from {GENERATORS}")
        if self.num_samples < 0 or self.input_dim < 1 or self.target_dim < 1:
            raise InvalidInput("dataset sizes must be positive")

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def known_phases(model: Model, seed: int) -> np.ndarray:
    """Phases of the hidden teacher used by ``realizable-by-known-phases``."""
    rng = make_rng(np.random.SeedSequence(seed).spawn(2)[1])
    return rng.uniform(-np.pi, np.pi, model.num_params)


def make_dataset(spec: DatasetSpec, model: Model | None = None) -> Dataset:
    if spec.generator == "file":
        return load_dataset_csv(spec.path)
    if spec.num_samples == 0:
        raise InvalidInput("dataset has no samples")
    x_rng = make_rng(np.random.SeedSequence(spec.seed).spawn(2)[0])
    X = x_rng.uniform(-1.0, 1.0, (spec.num_samples, spec.input_dim))
    if spec.generator == "product-of-sines":
        Y = np.prod(np.sin(np.pi * X), axis=1)
    elif spec.generator == "sum-of-squares":
        Y = np.mean(X ** 2, axis=1)
    elif spec.generator == "sine-plus-square":
        if spec.input_dim != 2:
            raise InvalidInput("sine-plus-square needs input_dim = 2")
        Y = (np.sin(np.pi * X[:, 0]) + X[:, 1] ** 2) / 2
    else:
        if model is None:
            raise InvalidInput("realizable-by-known-phases needs a model topology")
        if spec.target_dim > model.output_width:
            raise InvalidInput(f"target_dim {spec.target_dim} exceeds model width {model.output_width}")
        teacher = model.with_params(known_phases(model, spec.seed))
        Y = model_outputs(teacher, X)[:, : spec.target_dim]
    return Dataset(X, np.asarray(Y).reshape(spec.num_samples, -1), name=spec.generator)


def load_dataset_csv(path) -> Dataset:
    """CSV with a header of ``x0..x{N-1}`` and ``t0..t{T-1}`` columns."""
    if path is None:
        raise InvalidInput("file dataset needs a path")
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise InvalidInput(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    xi = [i for i, h in enumerate(header) if h.startswith("x")]
    ti = [i for i, h in enumerate(header) if h.startswith("t")]
    if not xi or not ti:
        raise InvalidInput(f"{path}: header needs x* and t* columns")
    if not body:
        raise InvalidInput(f"{path}: dataset has no samples")
    data = np.array([[float(v) for v in r] for r in body])
    return Dataset(data[:, xi], data[:, ti], name=Path(path).stem)
