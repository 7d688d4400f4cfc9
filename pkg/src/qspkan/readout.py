"""Swap test and Hadamard test, simulated gate by gate on a dense register.

The ancilla is always the most significant qubit.
"""
from __future__ import annotations

import numpy as np

from .errors import InvalidInput
from .qsp import as_phases, check_signal, qsp_unitary
from .sim import (
    H,
    S_DAG,
    StateVector,
    apply_controlled_gate,
    apply_controlled_swap,
    apply_gate,
    make_state,
    outcome_probability,
    sample,
    tensor,
)


def _ancilla_zero_frequency(state: StateVector, anc: int, shots: int, seed: int) -> float:
    counts = sample(state, shots, seed)
    zeros = sum(c for idx, c in counts.items() if not (idx >> anc) & 1)
    return zeros / shots


def swap_test_state(a: StateVector, b: StateVector) -> StateVector:
    if a.num_qubits != b.num_qubits:
        raise InvalidInput(f"swap test needs equal registers, got {a.num_qubits} and {b.num_qubits}")
    n = a.num_qubits
    anc = 2 * n
    state = tensor(make_state(1, 0), tensor(a, b))
    state = apply_gate(state, H, anc)
    state = apply_controlled_swap(state, anc, range(n, 2 * n), range(n))
    return apply_gate(state, H, anc)


def swap_test(a: StateVector, b: StateVector, shots: int | None = None, seed: int = 0) -> float:
    """Probability of ancilla outcome 0, i.e. (1 + |<a|b>|^2) / 2.

    With ``shots`` the probability is estimated from sampled measurements.
    """
    state = swap_test_state(a, b)
    anc = state.num_qubits - 1
    if shots is None:
        return outcome_probability(state, anc, 0)
    return _ancilla_zero_frequency(state, anc, shots, seed)


def hadamard_test(phi, a: float, part: str = "re", shots: int | None = None, seed: int = 0) -> float:
    """Ancilla-0 probability (1 + Re or Im of <0|U_phi(a)|0>) / 2."""
    if part not in ("re", "im"):
        raise InvalidInput(f"part must be 're' or 'im', got {part!r}")
    phi = as_phases(phi)
    a = float(check_signal(a))
    u = qsp_unitary(phi, a)
    state = apply_gate(make_state(2, 0), H, 1)
    if part == "im":
        state = apply_gate(state, S_DAG, 1)
    state = apply_controlled_gate(state, u, control=1, target=0)
    state = apply_gate(state, H, 1)
    if shots is None:
        return outcome_probability(state, 1, 0)
    return _ancilla_zero_frequency(state, 1, shots, seed)
