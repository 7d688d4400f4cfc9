"""Dense statevector primitives.

Conventions used throughout the package:

* qubit 0 is the least significant bit of the basis index;
* ``tensor(a, b)`` places the qubits of ``a`` above those of ``b``, so the
  result is ``np.kron(a.amps, b.amps)``;
* gates are plain ``(2, 2)`` complex arrays.

Sampling uses numpy's PCG64 bit generator (64-bit output, 128-bit state),
seeded through ``np.random.SeedSequence`` so a seed can be split into
independent child streams with ``SeedSequence.spawn``.  Counts are drawn with
``Generator.multinomial`` over the Born probabilities, so a given
``(state, shots, seed)`` always yields the same counts.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInput, ZeroProbability

NORM_TOL = 1e-10
UNITARY_TOL = 1e-12
ZERO_PROB = 1e-14
MAX_QUBITS = 24

_SQRT1_2 = 1.0 / np.sqrt(2.0)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT1_2
S = np.array([[1, 0], [0, 1j]], dtype=complex)
S_DAG = S.conj().T
for _g in (I2, X, Z, H, S, S_DAG):
    _g.setflags(write=False)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Immutable normalized amplitude vector over ``num_qubits`` qubits."""

    amps: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        n = amps.size.bit_length() - 1
        if amps.size == 0 or (1 << n) != amps.size:
            raise InvalidInput(f"state length {amps.size} is not a power of two")
        if not np.all(np.isfinite(amps)):
            raise InvalidInput("state has non-finite amplitudes")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def num_qubits(self) -> int:
        return self.amps.size.bit_length() - 1

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def __len__(self):
        return self.amps.size

    def __getitem__(self, idx):
        return self.amps[idx]

    def __repr__(self):
        return f"StateVector(num_qubits={self.num_qubits}, amps={self.amps!r})"


def _check_qubit(state: StateVector, q: int) -> int:
    if not isinstance(q, (int, np.integer)) or not 0 <= q < state.num_qubits:
        raise InvalidInput(f"qubit {q!r} out of range for {state.num_qubits} qubits")
    return int(q)


def is_unitary(g: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    g = np.asarray(g)
    return bool(np.max(np.abs(g.conj().T @ g - np.eye(g.shape[0]))) <= tol)


def make_state(num_qubits: int, basis_index: int = 0) -> StateVector:
    """Computational basis state ``|basis_index>``."""
    if num_qubits < 0 or num_qubits > MAX_QUBITS:
        raise InvalidInput(f"num_qubits must be in [0, {MAX_QUBITS}], got {num_qubits}")
    dim = 1 << num_qubits
    if not 0 <= basis_index < dim:
        raise InvalidInput(f"basis index {basis_index} out of range for {num_qubits} qubits")
    amps = np.zeros(dim, dtype=complex)
    amps[basis_index] = 1.0
    return StateVector(amps)


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Kronecker product with ``a`` on the more significant qubits."""
    return StateVector(np.kron(a.amps, b.amps))


def tensor_all(states: Iterable[StateVector]) -> StateVector:
    out = make_state(0, 0)
    for s in states:
        out = tensor(out, s)
    return out


def _as_tensor(state: StateVector) -> np.ndarray:
    # axis k of the result addresses qubit n-1-k
    return state.amps.reshape((2,) * state.num_qubits)


def _axis(state: StateVector, q: int) -> int:
    return state.num_qubits - 1 - q


def apply_gate(state: StateVector, g: np.ndarray, q: int) -> StateVector:
    """Apply the 2x2 unitary ``g`` to qubit ``q``."""
    q = _check_qubit(state, q)
    g = np.asarray(g, dtype=complex)
    if g.shape != (2, 2):
        raise InvalidInput(f"expected a 2x2 gate, got shape {g.shape}")
    n = state.num_qubits
    psi = state.amps.reshape(1 << (n - q - 1), 2, 1 << q)
    out = np.einsum("ij,ajb->aib", g, psi)
    return StateVector(out.reshape(-1))


def apply_controlled_gate(state: StateVector, g: np.ndarray, control: int, target: int) -> StateVector:
    """Apply ``g`` to ``target`` on the branch where ``control`` is 1."""
    control = _check_qubit(state, control)
    target = _check_qubit(state, target)
    if control == target:
        raise InvalidInput("control and target must differ")
    g = np.asarray(g, dtype=complex)
    psi = _as_tensor(state).copy()
    ca, ta = _axis(state, control), _axis(state, target)
    sl = [slice(None)] * state.num_qubits
    sl[ca] = 1
    branch = psi[tuple(sl)]
    # the target axis index shifts down by one if it sat after the control axis
    t = ta - (1 if ta > ca else 0)
    branch = np.moveaxis(np.tensordot(g, branch, axes=([1], [t])), 0, t)
    psi[tuple(sl)] = branch
    return StateVector(psi.reshape(-1))


def apply_controlled_swap(
    state: StateVector, control: int, qubits_a: Sequence[int], qubits_b: Sequence[int]
) -> StateVector:
    """Swap register ``qubits_a`` with ``qubits_b`` (pairwise) when ``control`` is 1."""
    control = _check_qubit(state, control)
    qa = [_check_qubit(state, q) for q in qubits_a]
    qb = [_check_qubit(state, q) for q in qubits_b]
    if len(qa) != len(qb):
        raise InvalidInput("swapped registers must have equal size")
    used = [control, *qa, *qb]
    if len(set(used)) != len(used):
        raise InvalidInput("control and swapped registers must be disjoint")
    psi = _as_tensor(state).copy()
    perm = list(range(state.num_qubits))
    for x, y in zip(qa, qb):
        ax, ay = _axis(state, x), _axis(state, y)
        perm[ax], perm[ay] = perm[ay], perm[ax]
    ca = _axis(state, control)
    sl = [slice(None)] * state.num_qubits
    sl[ca] = 1
    swapped = np.transpose(psi, perm)
    psi[tuple(sl)] = swapped[tuple(sl)]
    return StateVector(psi.reshape(-1))


def apply_hadamard_layer(state: StateVector, qubits: Sequence[int]) -> StateVector:
    """Hadamard on each listed qubit."""
    qubits = list(qubits)
    if len(set(int(q) for q in qubits)) != len(qubits):
        raise InvalidInput(f"duplicate qubits in {qubits}")
    for q in qubits:
        state = apply_gate(state, H, q)
    return state


def apply_matrix(state: StateVector, u: np.ndarray) -> StateVector:
    """Apply a full ``2^n x 2^n`` matrix to the whole register."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (len(state), len(state)):
        raise InvalidInput(f"matrix shape {u.shape} does not match state of length {len(state)}")
    return StateVector(u @ state.amps)


def outcome_probability(state: StateVector, q: int, outcome: int) -> float:
    q = _check_qubit(state, q)
    if outcome not in (0, 1):
        raise InvalidInput(f"outcome must be 0 or 1, got {outcome!r}")
    n = state.num_qubits
    psi = state.amps.reshape(1 << (n - q - 1), 2, 1 << q)
    return float(np.sum(np.abs(psi[:, outcome, :]) ** 2))


def postselect(state: StateVector, q: int, outcome: int) -> tuple[StateVector, float]:
    """Project qubit ``q`` onto ``outcome``; returns the renormalized (n-1)-qubit state."""
    q = _check_qubit(state, q)
    prob = outcome_probability(state, q, outcome)
    if prob < ZERO_PROB:
        raise ZeroProbability(f"outcome {outcome} on qubit {q} has probability {prob:.3g}")
    n = state.num_qubits
    psi = state.amps.reshape(1 << (n - q - 1), 2, 1 << q)[:, outcome, :]
    return StateVector(psi.reshape(-1) / np.sqrt(prob)), prob


def overlap(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugating ``a``."""
    if a.num_qubits != b.num_qubits:
        raise InvalidInput(f"qubit counts differ: {a.num_qubits} vs {b.num_qubits}")
    return complex(np.vdot(a.amps, b.amps))


def make_rng(seed: int | np.random.SeedSequence) -> np.random.Generator:
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(int(seed))
    return np.random.Generator(np.random.PCG64(seed))


def sample(state: StateVector, shots: int, seed: int) -> dict[int, int]:
    """Draw ``shots`` computational-basis measurements; returns nonzero counts."""
    if shots < 0:
        raise InvalidInput(f"shots must be non-negative, got {shots}")
    if shots == 0:
        return {}
    probs = state.probabilities()
    probs = probs / probs.sum()
    counts = make_rng(seed).multinomial(shots, probs)
    return {int(i): int(c) for i, c in enumerate(counts) if c}
