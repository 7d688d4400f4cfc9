import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_state
from qspkan.errors import InvalidInput, ZeroProbability
from qspkan.sim import (
    H,
    I2,
    X,
    StateVector,
    apply_controlled_gate,
    apply_controlled_swap,
    apply_gate,
    apply_hadamard_layer,
    is_unitary,
    make_state,
    overlap,
    postselect,
    sample,
    tensor,
)

S2 = 1 / np.sqrt(2)


def random_unitary(rng):
    z = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


class TestMakeState:
    @pytest.mark.parametrize("n, idx, expected", [
        (1, 0, [1, 0]),
        (2, 3, [0, 0, 0, 1]),
        (0, 0, [1]),
    ])
    def test_basis(self, n, idx, expected):
        s = make_state(n, idx)
        assert s.num_qubits == n
        np.testing.assert_array_equal(s.amps, expected)

    @pytest.mark.parametrize("idx", [-1, 4, 100])
    def test_out_of_range(self, idx):
        with pytest.raises(InvalidInput):
            make_state(2, idx)

    def test_immutable(self):
        s = make_state(1, 0)
        with pytest.raises(ValueError):
            s.amps[0] = 0


class TestTensor:
    def test_basis_examples(self):
        np.testing.assert_array_equal(tensor(make_state(1, 0), make_state(1, 1)).amps, [0, 1, 0, 0])
        np.testing.assert_array_equal(tensor(make_state(1, 0), make_state(1, 0)).amps, [1, 0, 0, 0])

    def test_hand_expansion(self):
        a = StateVector([0.6, 0.8j])
        np.testing.assert_allclose(tensor(a, a).amps, [0.36, 0.48j, 0.48j, -0.64], atol=1e-15)

    def test_first_argument_is_most_significant(self):
        # |1> (x) |0> = |10> = index 2
        np.testing.assert_array_equal(tensor(make_state(1, 1), make_state(1, 0)).amps, [0, 0, 1, 0])

    def test_associative(self, rng):
        a, b, c = (random_state(rng, n) for n in (1, 2, 1))
        lhs = tensor(tensor(a, b), c).amps
        rhs = tensor(a, tensor(b, c)).amps
        assert np.max(np.abs(lhs - rhs)) <= 1e-14

    def test_norm_preserved(self, rng):
        assert abs(tensor(random_state(rng, 2), random_state(rng, 3)).norm - 1) < 1e-12


class TestApplyGate:
    def test_x(self):
        np.testing.assert_array_equal(apply_gate(make_state(1, 0), X, 0).amps, [0, 1])

    def test_identity(self, rng):
        s = random_state(rng, 3)
        np.testing.assert_array_equal(apply_gate(s, I2, 1).amps, s.amps)

    def test_hadamard(self):
        np.testing.assert_allclose(apply_gate(make_state(1, 0), H, 0).amps, [S2, S2], atol=1e-15)

    def test_targets_least_significant_first(self):
        # X on qubit 0 of |00> gives index 1; on qubit 1 gives index 2
        assert apply_gate(make_state(2, 0), X, 0).amps[1] == 1
        assert apply_gate(make_state(2, 0), X, 1).amps[2] == 1

    @pytest.mark.parametrize("q", [-1, 2, 5])
    def test_bad_qubit(self, q):
        with pytest.raises(InvalidInput):
            apply_gate(make_state(2, 0), X, q)

    def test_disjoint_gates_commute(self, rng):
        s = random_state(rng, 3)
        g1, g2 = random_unitary(rng), random_unitary(rng)
        ab = apply_gate(apply_gate(s, g1, 0), g2, 2).amps
        ba = apply_gate(apply_gate(s, g2, 2), g1, 0).amps
        assert np.max(np.abs(ab - ba)) <= 1e-12

    @given(st.integers(min_value=0, max_value=2**31 - 1))
    def test_norm_preserved_under_random_chains(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 6))
        s = random_state(rng, n)
        for _ in range(20):
            s = apply_gate(s, random_unitary(rng), int(rng.integers(n)))
        assert abs(s.norm - 1) <= 1e-10

    def test_matches_kron_operator(self, rng):
        s = random_state(rng, 3)
        g = random_unitary(rng)
        full = np.kron(I2, np.kron(g, I2))  # qubit 1 is the middle factor
        np.testing.assert_allclose(apply_gate(s, g, 1).amps, full @ s.amps, atol=1e-14)


class TestControlled:
    def test_cnot_truth_table(self):
        # control qubit 1, target qubit 0: |10> -> |11>
        out = apply_controlled_gate(make_state(2, 2), X, control=1, target=0)
        np.testing.assert_array_equal(out.amps, [0, 0, 0, 1])
        out = apply_controlled_gate(make_state(2, 1), X, control=1, target=0)
        np.testing.assert_array_equal(out.amps, [0, 1, 0, 0])

    def test_controlled_gate_matches_block_matrix(self, rng):
        s = random_state(rng, 3)
        g = random_unitary(rng)
        # control = qubit 2 (most significant), target = qubit 0
        full = np.block([[np.eye(4), np.zeros((4, 4))], [np.zeros((4, 4)), np.kron(I2, g)]])
        out = apply_controlled_gate(s, g, control=2, target=0)
        np.testing.assert_allclose(out.amps, full @ s.amps, atol=1e-14)

    def test_controlled_swap(self):
        # |1>|0>|1> with control qubit 2 swaps qubits 1 and 0 -> |1>|1>|0>
        out = apply_controlled_swap(make_state(3, 0b101), 2, [1], [0])
        assert out.amps[0b110] == 1
        out = apply_controlled_swap(make_state(3, 0b001), 2, [1], [0])
        assert out.amps[0b001] == 1


class TestHadamardLayer:
    def test_all_qubits(self):
        np.testing.assert_allclose(apply_hadamard_layer(make_state(2, 0), [0, 1]).amps, [0.5] * 4, atol=1e-15)

    def test_empty(self, rng):
        s = random_state(rng, 2)
        np.testing.assert_array_equal(apply_hadamard_layer(s, []).amps, s.amps)

    def test_most_significant(self):
        out = apply_hadamard_layer(StateVector([0, 1, 0, 0]), [1])
        np.testing.assert_allclose(out.amps, [0, S2, 0, S2], atol=1e-15)

    def test_duplicates(self):
        with pytest.raises(InvalidInput):
            apply_hadamard_layer(make_state(2, 0), [0, 0])


class TestPostselect:
    def test_trivial(self):
        s, p = postselect(make_state(1, 0), 0, 0)
        np.testing.assert_array_equal(s.amps, [1])
        assert p == 1.0

    def test_zero_probability(self):
        with pytest.raises(ZeroProbability):
            postselect(make_state(1, 0), 0, 1)

    def test_uniform(self):
        s, p = postselect(StateVector([0.5] * 4), 0, 0)
        np.testing.assert_allclose(s.amps, [S2, S2], atol=1e-15)
        assert p == pytest.approx(0.5, abs=1e-15)

    def test_probabilities_sum_to_one(self, rng):
        for n in range(1, 5):
            s = random_state(rng, n)
            for q in range(n):
                _, p0 = postselect(s, q, 0)
                _, p1 = postselect(s, q, 1)
                assert abs(p0 + p1 - 1) <= 1e-12


class TestOverlap:
    def test_examples(self, rng):
        s = random_state(rng, 3)
        assert overlap(s, s) == pytest.approx(1, abs=1e-14)
        assert overlap(make_state(1, 0), make_state(1, 1)) == 0
        assert overlap(StateVector([S2, S2]), make_state(1, 0)) == pytest.approx(S2, abs=1e-15)

    def test_conjugates_first(self):
        a = StateVector([0, 1j])
        b = StateVector([0, 1])
        assert overlap(a, b) == pytest.approx(-1j)

    def test_size_mismatch(self):
        with pytest.raises(InvalidInput):
            overlap(make_state(1, 0), make_state(2, 0))


class TestSample:
    def test_deterministic_state(self):
        assert sample(make_state(1, 0), 100, seed=123) == {0: 100}

    def test_zero_shots(self):
        assert sample(make_state(1, 0), 0, seed=1) == {}

    def test_half_half(self):
        counts = sample(StateVector([S2, S2]), 10**5, seed=7)
        assert sum(counts.values()) == 10**5
        assert abs(counts[0] / 10**5 - 0.5) < 0.01

    def test_same_seed_same_counts(self, rng):
        s = random_state(rng, 3)
        assert sample(s, 5000, seed=42) == sample(s, 5000, seed=42)
        assert sample(s, 5000, seed=42) != sample(s, 5000, seed=43)

    def test_convergence(self, rng):
        s = random_state(rng, 2)
        shots = 10**6
        counts = sample(s, shots, seed=99)
        freq = np.array([counts.get(i, 0) for i in range(4)]) / shots
        assert np.max(np.abs(freq - s.probabilities())) <= 5e-3

    def test_negative_shots(self):
        with pytest.raises(InvalidInput):
            sample(make_state(1, 0), -1, seed=0)


def test_constructor_gates_are_unitary():
    for g in (I2, X, H):
        assert is_unitary(g)
