"""One quantum KAN layer: a direct sum of per-feature QSP circuits mixed by Hadamards.

Register layout for ``layer_forward``: qubit 0 is the QSP signal qubit and
qubits ``1..m`` hold the block (feature) index, so block ``i`` occupies basis
states ``2i`` and ``2i + 1``.  After the block-diagonal operator and a
Hadamard on every index qubit, the amplitude at (index ``j``, signal 0) is

    y_j = (1/n) * sum_i (-1)^popcount(i & j) * P_i(x_i)

where ``n`` is the padded feature count and padding blocks are identities
(``P = 1``).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from .errors import InvalidInput
from .qsp import as_phases, check_signal, qsp_matrices, qsp_p
from .sim import apply_hadamard_layer, apply_matrix, make_state, outcome_probability


def next_pow2(n: int) -> int:
    return 1 if n <= 1 else 1 << (int(n) - 1).bit_length()


def is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def mixing_coefficients(n: int) -> np.ndarray:
    """Walsh sign matrix ``alpha[j, i] = (-1)^popcount(j & i)``."""
    if not isinstance(n, (int, np.integer)) or not is_pow2(int(n)):
        raise InvalidInput(f"mixing size must be a power of two, got {n!r}")
    idx = np.arange(n)
    anded = idx[:, None] & idx[None, :]
    parity = np.zeros_like(anded)
    while np.any(anded):
        parity ^= anded & 1
        anded >>= 1
    return 1 - 2 * parity


@dataclass(frozen=True, eq=False)
class LayerParams:
    """Phase sequences for N features, stored as an ``(N, d+1)`` array."""

    feature_phases: np.ndarray

    def __post_init__(self):
        try:
            ph = np.array(self.feature_phases, dtype=float)
        except ValueError as exc:
            raise InvalidInput("all feature phase sequences must share one degree") from exc
        if ph.ndim != 2 or ph.shape[0] < 1 or ph.shape[1] < 1:
            raise InvalidInput(f"expected an (N, d+1) phase array, got shape {ph.shape}")
        for row in ph:
            as_phases(row)
        ph.setflags(write=False)
        object.__setattr__(self, "feature_phases", ph)

    @property
    def num_features(self) -> int:
        return self.feature_phases.shape[0]

    @property
    def degree(self) -> int:
        return self.feature_phases.shape[1] - 1

    @property
    def padded_size(self) -> int:
        return next_pow2(self.num_features)

    @property
    def output_width(self) -> int:
        return self.padded_size

    @property
    def num_params(self) -> int:
        return self.feature_phases.size

    def flatten(self) -> np.ndarray:
        """Feature-major, phase-index-minor."""
        return self.feature_phases.reshape(-1).copy()

    def with_params(self, flat) -> "LayerParams":
        flat = np.asarray(flat, dtype=float)
        if flat.size != self.num_params:
            raise InvalidInput(f"expected {self.num_params} parameters, got {flat.size}")
        return LayerParams(flat.reshape(self.feature_phases.shape))

    @classmethod
    def zeros(cls, num_features: int, degree: int) -> "LayerParams":
        return cls(np.zeros((num_features, degree + 1)))


@dataclass(frozen=True)
class LayerOutput:
    values: np.ndarray
    postselect_prob: float


def _check_features(params: LayerParams, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != params.num_features:
        raise InvalidInput(f"expected {params.num_features} features, got shape {x.shape}")
    return check_signal(x)


def build_block_diagonal(params: LayerParams, x) -> np.ndarray:
    x = _check_features(params, x)
    blocks = list(qsp_matrices(params.feature_phases, x))
    blocks += [np.eye(2, dtype=complex)] * (params.padded_size - params.num_features)
    return block_diag(*blocks)


def layer_forward(params: LayerParams, x) -> LayerOutput:
    """Statevector simulation of the layer followed by the Hadamard readout."""
    u = build_block_diagonal(params, x)
    m = params.padded_size.bit_length() - 1
    index_qubits = list(range(1, m + 1))
    state = apply_hadamard_layer(make_state(m + 1, 0), index_qubits)
    state = apply_matrix(state, u)
    state = apply_hadamard_layer(state, index_qubits)
    return LayerOutput(values=state.amps[0::2].copy(), postselect_prob=outcome_probability(state, 0, 0))


def layer_closed_form(params: LayerParams, x) -> LayerOutput:
    """Same quantities from the direct Walsh-weighted sum of P values."""
    x = _check_features(params, x)
    n = params.padded_size
    p = np.ones(n, dtype=complex)
    p[: params.num_features] = qsp_p(params.feature_phases, x)
    values = mixing_coefficients(n) @ p / n
    return LayerOutput(values=values, postselect_prob=float(np.sum(np.abs(p) ** 2) / n))


def layer_values_batch(phases: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Closed-form outputs for many parameter sets and samples at once.

    ``phases``: ``(..., N, d+1)``; ``X``: ``(S, N)``.  Returns ``(..., S, n)``.
    """
    phases = np.asarray(phases, dtype=float)
    X = check_signal(X)
    N = phases.shape[-2]
    n = next_pow2(N)
    p = qsp_p(phases[..., None, :, :], X)
    if n > N:
        pad = np.ones(p.shape[:-1] + (n - N,), dtype=complex)
        p = np.concatenate([p, pad], axis=-1)
    return p @ mixing_coefficients(n).T / n
