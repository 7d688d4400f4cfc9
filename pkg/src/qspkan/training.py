"""Classical optimization of layer and stack phases.

Parameters are flattened layer-major, unit-major (feature-major for a single
layer), phase-index-minor; this order is also the checkpoint order.

Sample reductions go through ``np.mean`` on fixed-shape arrays (pairwise
summation), so a given model and dataset always produce the same bits.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import InvalidInput
from .layer import LayerParams, layer_values_batch
from .qsp import check_signal
from .stack import StackSpec, _factors, stack_outputs_batch

Model = Union[LayerParams, StackSpec]

GRADIENT_METHODS = ("central_difference", "trig_shift")
OPTIMIZERS = ("adam", "gd")


@dataclass(frozen=True, eq=False)
class Dataset:
    X: np.ndarray
    Y: np.ndarray
    name: str = "dataset"

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        Y = np.array(self.Y, dtype=float)
        if Y.ndim == 1:
            Y = Y[:, None]
        if X.ndim != 2 or X.shape[0] == 0:
            raise InvalidInput("dataset must contain at least one sample")
        if Y.ndim != 2 or Y.shape[0] != X.shape[0]:
            raise InvalidInput(f"inputs {X.shape} and targets {Y.shape} disagree on sample count")
        check_signal(X)
        if not np.all(np.isfinite(Y)):
            raise InvalidInput("targets must be finite")
        X.setflags(write=False)
        Y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def num_samples(self) -> int:
        return self.X.shape[0]

    @property
    def input_dim(self) -> int:
        return self.X.shape[1]

    @property
    def target_dim(self) -> int:
        return self.Y.shape[1]


@dataclass
class OptimizerConfig:
    learning_rate: float = 0.01
    max_iters: int = 2000
    seed: int = 0
    gradient_method: str = "central_difference"
    fd_step: float = 1e-5
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    tol: float = 1e-10
    optimizer: str = "adam"
    window: int = 20
    grad_tol: float = 1e-8

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise InvalidInput("learning_rate must be positive")
        if self.max_iters < 0:
            raise InvalidInput("max_iters must be non-negative")
        if not (0 < self.adam_beta1 < 1 and 0 < self.adam_beta2 < 1):
            raise InvalidInput("Adam betas must lie in (0, 1)")
        if self.fd_step <= 0:
            raise InvalidInput("fd_step must be positive")
        if self.gradient_method not in GRADIENT_METHODS:
            raise InvalidInput(f"gradient_method must be one of {GRADIENT_METHODS}")
        if self.optimizer not in OPTIMIZERS:
            raise InvalidInput(f"optimizer must be one of {OPTIMIZERS}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TrainRecord:
    iteration: int
    loss: float
    grad_norm: float
    elapsed: float = field(compare=False)


# ---------------------------------------------------------------------------
# forward passes


def _check_pairing(model: Model, data: Dataset):
    in_dim = model.num_features if isinstance(model, LayerParams) else model.input_dim
    if data.input_dim != in_dim:
        raise InvalidInput(f"model takes {in_dim} inputs, dataset has {data.input_dim}")
    if data.target_dim > model.output_width:
        raise InvalidInput(f"model has {model.output_width} outputs, dataset has {data.target_dim} targets")


def outputs_batch(model: Model, flats: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Real outputs for a batch of flattened parameter vectors: ``(M, P)`` -> ``(M, S, out)``."""
    flats = np.atleast_2d(np.asarray(flats, dtype=float))
    M = flats.shape[0]
    if isinstance(model, LayerParams):
        phases = flats.reshape((M,) + model.feature_phases.shape)
        return np.real(layer_values_batch(phases, X))
    if not model.layers:
        return np.broadcast_to(np.asarray(X, dtype=float), (M,) + np.shape(X)).copy()
    per_layer, pos = [], 0
    for layer in model.layers:
        k = layer.phases.size
        per_layer.append(flats[:, pos:pos + k].reshape((M,) + layer.phases.shape))
        pos += k
    return stack_outputs_batch(per_layer, model, X)


def model_outputs(model: Model, X) -> np.ndarray:
    return outputs_batch(model, model.flatten()[None, :], np.asarray(X, dtype=float))[0]


def _loss_batch(model: Model, flats: np.ndarray, data: Dataset) -> np.ndarray:
    out = outputs_batch(model, flats, data.X)[..., : data.target_dim]
    return np.mean((out - data.Y) ** 2, axis=(-2, -1))


def mse_loss(model: Model, data: Dataset) -> float:
    """Mean over samples of the mean squared error on the first target-width outputs."""
    _check_pairing(model, data)
    return float(_loss_batch(model, model.flatten()[None, :], data)[0])


# ---------------------------------------------------------------------------
# gradients

_C_HALF = np.pi / 2
_C_QUARTER = np.pi / 4
_SHIFT_W = (np.sqrt(2.0) - 1.0) / 2.0


def _four_point(f_q_plus, f_q_minus, f_h_plus, f_h_minus):
    # exact for trig polynomials with frequencies {1, 2}
    return (f_q_plus - f_q_minus) - _SHIFT_W * (f_h_plus - f_h_minus)


def _central_difference(model: Model, data: Dataset, theta: np.ndarray, h: float) -> np.ndarray:
    P = theta.size
    steps = np.eye(P) * h
    losses = _loss_batch(model, np.concatenate([theta + steps, theta - steps]), data)
    return (losses[:P] - losses[P:]) / (2 * h)


def _layer_trig_shift(model: LayerParams, data: Dataset, theta: np.ndarray) -> np.ndarray:
    # the loss is quadratic in Re(values), values are frequency-1 in every phase
    P = theta.size
    eye = np.eye(P)
    shifted = np.concatenate([theta + _C_QUARTER * eye, theta - _C_QUARTER * eye,
                              theta + _C_HALF * eye, theta - _C_HALF * eye])
    L = _loss_batch(model, shifted, data).reshape(4, P)
    return _four_point(L[0], L[1], L[2], L[3])


def _others_product(f: np.ndarray) -> np.ndarray:
    """prod_{j != k} f[..., j] for every k, without division."""
    ones = np.ones(f.shape[:-1] + (1,), dtype=f.dtype)
    prefix = np.cumprod(np.concatenate([ones, f[..., :-1]], axis=-1), axis=-1)
    suffix = np.cumprod(np.concatenate([ones, f[..., :0:-1]], axis=-1), axis=-1)[..., ::-1]
    return prefix * suffix


def _stack_trig_shift(model: StackSpec, data: Dataset) -> np.ndarray:
    """Shift-rule derivatives of each unit amplitude, chained through later layers.

    Unit amplitudes are frequency-1 in their own phases, so their phase
    derivatives are exact from values at phi +- pi/4 and phi +- pi/2.  Downstream
    layers depend on earlier phases through sqrt(1 - x^2), which is not a trig
    polynomial, so those contributions use the analytic input derivative.
    """
    S, T = data.num_samples, data.target_dim
    if not model.layers:
        return np.zeros(0)
    cache, x = [], data.X
    for layer in model.layers:
        f = _factors(layer.phases, x)                       # (S, W, d)
        u = np.prod(f, axis=-1)
        Wp = layer.padded_width
        if Wp > layer.width:
            u = np.concatenate([u, np.full((S, Wp - layer.width), 2.0 ** (-layer.degree / 2))], axis=-1)
        mixed = u @ layer.mixing.T / Wp
        out = np.real(mixed) if layer.readout_policy == "real_part" else np.abs(mixed)
        cache.append((x, f, mixed, out))
        x = np.clip(out, -1.0, 1.0)
    g = np.zeros_like(x)
    g[:, :T] = 2.0 * (x[:, :T] - data.Y) / (S * T)
    grads = [None] * len(model.layers)
    for li in range(len(model.layers) - 1, -1, -1):
        layer = model.layers[li]
        xin, f, mixed, out = cache[li]
        mask = np.abs(out) <= 1.0
        if layer.readout_policy == "real_part":
            c = np.ones_like(mixed)
        else:
            mag = np.abs(mixed)
            c = np.divide(mixed, mag, out=np.zeros_like(mixed), where=mag > 0)
        gamma = ((g * mask) * c) @ layer.mixing / layer.padded_width
        gamma = gamma[:, : layer.width, None]            # (S, W, 1)
        others = _others_product(f)
        x3 = xin[..., None]
        s3 = np.sqrt(np.clip(1.0 - x3 * x3, 0.0, None))

        def factor(shift):
            e = np.exp(1j * (layer.phases + shift))
            return (e * x3 + 1j * np.conj(e) * s3) / np.sqrt(2.0)

        du_dphi = others * _four_point(factor(_C_QUARTER), factor(-_C_QUARTER),
                                       factor(_C_HALF), factor(-_C_HALF))
        grads[li] = np.sum(np.real(np.conj(gamma) * du_dphi), axis=0).reshape(-1)
        if li > 0:
            e = np.exp(1j * layer.phases)
            ds = np.divide(-x3, s3, out=np.zeros_like(x3), where=s3 > 0)
            df_dx = (e + 1j * np.conj(e) * ds) / np.sqrt(2.0)
            du_dx = np.sum(others * df_dx, axis=-1)
            g = np.real(np.conj(gamma[..., 0]) * du_dx)
    return np.concatenate(grads)


def gradient(model: Model, data: Dataset, cfg: OptimizerConfig | None = None) -> np.ndarray:
    cfg = cfg or OptimizerConfig()
    _check_pairing(model, data)
    theta = model.flatten()
    if theta.size == 0:
        return theta
    if cfg.gradient_method == "central_difference":
        return _central_difference(model, data, theta, cfg.fd_step)
    if isinstance(model, LayerParams):
        return _layer_trig_shift(model, data, theta)
    return _stack_trig_shift(model, data)


# ---------------------------------------------------------------------------
# training loop


def train(
    model: Model,
    data: Dataset,
    cfg: OptimizerConfig | None = None,
    clock: Callable[[], float] | None = time.perf_counter,
) -> tuple[Model, list[TrainRecord]]:
    """Adam (or plain gradient descent) on the MSE loss.

    Record ``i`` holds the loss and gradient norm after ``i`` updates.  The run
    stops after ``max_iters`` updates, when the gradient norm falls below
    ``grad_tol``, or when the best loss improved by less than ``tol`` over the
    last ``window`` iterations.  The best parameters seen are returned.
    ``clock=None`` records ``elapsed = 0`` for byte-reproducible logs.
    """
    cfg = cfg or OptimizerConfig()
    _check_pairing(model, data)
    theta = model.flatten()
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    t0 = clock() if clock else 0.0
    records: list[TrainRecord] = []
    best_hist: list[float] = []
    best_loss, best_theta = np.inf, theta.copy()
    b1, b2 = cfg.adam_beta1, cfg.adam_beta2
    for it in range(cfg.max_iters + 1):
        current = model.with_params(theta)
        loss = mse_loss(current, data)
        g = gradient(current, data, cfg)
        gnorm = float(np.linalg.norm(g))
        records.append(TrainRecord(it, loss, gnorm, (clock() - t0) if clock else 0.0))
        if loss < best_loss:
            best_loss, best_theta = loss, theta.copy()
        best_hist.append(best_loss)
        if it == cfg.max_iters or gnorm <= cfg.grad_tol:
            break
        if it >= cfg.window and best_hist[it - cfg.window] - best_loss < cfg.tol:
            break
        if cfg.optimizer == "gd":
            theta = theta - cfg.learning_rate * g
            continue
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        mhat = m / (1 - b1 ** (it + 1))
        vhat = v / (1 - b2 ** (it + 1))
        theta = theta - cfg.learning_rate * mhat / (np.sqrt(vhat) + cfg.adam_eps)
    return model.with_params(best_theta), records
