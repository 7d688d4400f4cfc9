"""Stacked quantum KAN layers built from qubitized polynomial terms.

A unit of degree d prepares d copies of the signal qubit ``(x, i sqrt(1-x^2))``,
rotates qubit k by ``exp(i phi_k Z)`` and reads the all-zeros amplitude after a
Hadamard on every qubit:

    u(x) = prod_k (exp(i phi_k) x + i exp(-i phi_k) sqrt(1-x^2)) / 2^(d/2)

Units of one layer are Walsh-mixed exactly like block outputs of
:mod:`qspkan.layer`; each mixed amplitude is turned into a real number by the
layer's readout policy and clamped to [-1, 1] before feeding the next layer.
Padding units (when the width is not a power of two) have zero phases and
see ``x = 1``, contributing ``2^(-d/2)`` to every row.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput
from .layer import mixing_coefficients, next_pow2
from .qsp import check_signal, phase_gate
from .sim import StateVector, apply_gate, apply_hadamard_layer, tensor_all

READOUTS = ("real_part", "magnitude")


def encode_signal(x: float) -> StateVector:
    x = float(check_signal(x))
    return StateVector([x, 1j * np.sqrt(max(0.0, 1.0 - x * x))])


def qubitize(x: float, d: int) -> StateVector:
    if d < 1:
        raise InvalidInput(f"qubitized degree must be >= 1, got {d}")
    return tensor_all([encode_signal(x)] * d)


@dataclass(frozen=True, eq=False)
class QubitizedUnit:
    phases: np.ndarray

    def __post_init__(self):
        ph = np.array(self.phases, dtype=float).reshape(-1)
        if ph.size < 1 or not np.all(np.isfinite(ph)):
            raise InvalidInput("a qubitized unit needs at least one finite phase")
        ph.setflags(write=False)
        object.__setattr__(self, "phases", ph)

    @property
    def degree(self) -> int:
        return self.phases.size


def apply_phase_layer(state: StateVector, unit: QubitizedUnit) -> StateVector:
    """``phase_gate(phases[k])`` on qubit k."""
    if state.num_qubits != unit.degree:
        raise InvalidInput(f"unit of degree {unit.degree} applied to {state.num_qubits} qubits")
    for k, phi in enumerate(unit.phases):
        state = apply_gate(state, phase_gate(phi), k)
    return state


def unit_forward(x: float, unit: QubitizedUnit) -> complex:
    """All-zeros amplitude of the qubitized unit, by statevector simulation."""
    state = apply_phase_layer(qubitize(x, unit.degree), unit)
    state = apply_hadamard_layer(state, range(unit.degree))
    return complex(state.amps[0])


def _factors(phases, x):
    """Per-qubit factors (e x + i conj(e) s) / sqrt 2; shape broadcast(x[..., None], phases)."""
    x = np.asarray(x, dtype=float)[..., None]
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    e = np.exp(1j * np.asarray(phases, dtype=float))
    return (e * x + 1j * np.conj(e) * s) / np.sqrt(2.0)


def unit_closed_form(phases, x) -> np.ndarray:
    """Product formula for ``unit_forward``; broadcasts ``x`` against ``phases[..., :-1]``."""
    return np.prod(_factors(phases, check_signal(x)), axis=-1)


@dataclass(frozen=True, eq=False)
class StackLayerSpec:
    """A layer of W qubitized units sharing degree d, stored as a ``(W, d)`` phase array."""

    phases: np.ndarray
    readout_policy: str = "real_part"

    def __post_init__(self):
        ph = np.array(self.phases, dtype=float)
        if ph.ndim != 2 or ph.shape[0] < 1 or ph.shape[1] < 1:
            raise InvalidInput(f"expected a (W, d) phase array, got shape {ph.shape}")
        if not np.all(np.isfinite(ph)):
            raise InvalidInput("phases must be finite")
        if self.readout_policy not in READOUTS:
            raise InvalidInput(f"readout_policy must be one of {READOUTS}, got {self.readout_policy!r}")
        ph.setflags(write=False)
        object.__setattr__(self, "phases", ph)

    @classmethod
    def from_units(cls, units, readout_policy="real_part") -> "StackLayerSpec":
        degrees = {u.degree for u in units}
        if len(degrees) != 1:
            raise InvalidInput(f"units of one layer must share a degree, got {sorted(degrees)}")
        return cls(np.stack([u.phases for u in units]), readout_policy)

    @property
    def units(self) -> list[QubitizedUnit]:
        return [QubitizedUnit(row) for row in self.phases]

    @property
    def width(self) -> int:
        return self.phases.shape[0]

    @property
    def degree(self) -> int:
        return self.phases.shape[1]

    @property
    def padded_width(self) -> int:
        return next_pow2(self.width)

    @property
    def mixing(self) -> np.ndarray:
        return mixing_coefficients(self.padded_width)


@dataclass(frozen=True, eq=False)
class StackSpec:
    layers: tuple
    input_dim: int

    def __post_init__(self):
        layers = tuple(self.layers)
        if self.input_dim < 1:
            raise InvalidInput("input_dim must be >= 1")
        width = self.input_dim
        for i, layer in enumerate(layers):
            if layer.width != width:
                raise InvalidInput(f"layer {i} has {layer.width} units but receives {width} inputs")
            width = layer.padded_width
        object.__setattr__(self, "layers", layers)

    @property
    def output_width(self) -> int:
        return self.layers[-1].padded_width if self.layers else self.input_dim

    @property
    def num_params(self) -> int:
        return sum(layer.phases.size for layer in self.layers)

    def flatten(self) -> np.ndarray:
        """Layer-major, unit-major, phase-index-minor."""
        if not self.layers:
            return np.zeros(0)
        return np.concatenate([layer.phases.reshape(-1) for layer in self.layers])

    def with_params(self, flat) -> "StackSpec":
        flat = np.asarray(flat, dtype=float)
        if flat.size != self.num_params:
            raise InvalidInput(f"expected {self.num_params} parameters, got {flat.size}")
        layers, pos = [], 0
        for layer in self.layers:
            k = layer.phases.size
            layers.append(StackLayerSpec(flat[pos:pos + k].reshape(layer.phases.shape), layer.readout_policy))
            pos += k
        return StackSpec(tuple(layers), self.input_dim)

    @classmethod
    def zeros(cls, input_dim: int, depth: int, degree: int, readout_policy: str = "real_part") -> "StackSpec":
        """``depth`` layers; every layer after the first takes the previous padded width."""
        layers, width = [], input_dim
        for _ in range(depth):
            layers.append(StackLayerSpec(np.zeros((width, degree)), readout_policy))
            width = next_pow2(width)
        return cls(tuple(layers), input_dim)


def _readout(mixed: np.ndarray, policy: str) -> np.ndarray:
    out = np.real(mixed) if policy == "real_part" else np.abs(mixed)
    return np.clip(out, -1.0, 1.0)


def _padded_units(phases: np.ndarray, inputs: np.ndarray) -> np.ndarray:
    """Unit amplitudes, padded; phases ``(..., W, d)``, inputs ``(..., S, W)`` -> ``(..., S, Wp)``."""
    W, d = phases.shape[-2:]
    u = unit_closed_form(phases[..., None, :, :], inputs)
    Wp = next_pow2(W)
    if Wp > W:
        pad = np.full(u.shape[:-1] + (Wp - W,), 2.0 ** (-d / 2), dtype=complex)
        u = np.concatenate([u, pad], axis=-1)
    return u


def mixed_amplitudes(layer: StackLayerSpec, inputs) -> np.ndarray:
    inputs = check_signal(np.asarray(inputs, dtype=float))
    if inputs.shape[-1] != layer.width:
        raise InvalidInput(f"layer of width {layer.width} received {inputs.shape[-1]} inputs")
    single = inputs.ndim == 1
    u = _padded_units(layer.phases, inputs[None, :] if single else inputs)
    mixed = u @ layer.mixing.T / layer.padded_width
    return mixed[0] if single else mixed


def stack_layer_forward(inputs, layer: StackLayerSpec, simulate: bool = False) -> np.ndarray:
    """Real outputs of one stacked layer (length = padded width).

    With ``simulate=True`` each unit amplitude comes from :func:`unit_forward`
    rather than the product formula.
    """
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim != 1 or inputs.size != layer.width:
        raise InvalidInput(f"layer of width {layer.width} received inputs of shape {inputs.shape}")
    if not simulate:
        return _readout(mixed_amplitudes(layer, inputs), layer.readout_policy)
    check_signal(inputs)
    u = np.full(layer.padded_width, 2.0 ** (-layer.degree / 2), dtype=complex)
    for w, unit in enumerate(layer.units):
        u[w] = unit_forward(inputs[w], unit)
    return _readout(layer.mixing @ u / layer.padded_width, layer.readout_policy)


def stack_forward(x, spec: StackSpec, simulate: bool = False) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != spec.input_dim:
        raise InvalidInput(f"stack expects {spec.input_dim} inputs, got shape {x.shape}")
    check_signal(x)
    for layer in spec.layers:
        x = stack_layer_forward(x, layer, simulate=simulate)
    return x


def stack_outputs_batch(layer_phases: list, spec: StackSpec, X: np.ndarray) -> np.ndarray:
    """Outputs for many parameter sets: ``layer_phases[l]`` has shape ``(M, W_l, d_l)``, X ``(S, in)``."""
    out = np.asarray(X, dtype=float)
    for phases, layer in zip(layer_phases, spec.layers):
        u = _padded_units(phases, out)
        out = _readout(u @ layer.mixing.T / layer.padded_width, layer.readout_policy)
    return out
