import numpy as np
import pytest

from conftest import random_state
from qspkan.errors import DomainError, InvalidInput
from qspkan.qsp import qsp_unitary
from qspkan.readout import hadamard_test, swap_test
from qspkan.sim import StateVector, make_state, overlap

S2 = 1 / np.sqrt(2)


class TestSwapTest:
    def test_examples(self, rng):
        s = random_state(rng, 2)
        assert swap_test(s, s) == pytest.approx(1.0, abs=1e-12)
        assert swap_test(make_state(1, 0), make_state(1, 1)) == pytest.approx(0.5, abs=1e-12)
        assert swap_test(make_state(1, 0), StateVector([S2, S2])) == pytest.approx(0.75, abs=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_matches_overlap(self, rng, n):
        for _ in range(10):
            a, b = random_state(rng, n), random_state(rng, n)
            p = swap_test(a, b)
            assert 0.5 - 1e-12 <= p <= 1 + 1e-12
            assert abs(p - (0.5 + abs(overlap(a, b)) ** 2 / 2)) <= 1e-12

    def test_sampled(self, rng):
        a, b = random_state(rng, 2), random_state(rng, 2)
        est = swap_test(a, b, shots=10**5, seed=11)
        assert abs(est - swap_test(a, b)) < 0.01
        assert est == swap_test(a, b, shots=10**5, seed=11)

    def test_size_mismatch(self):
        with pytest.raises(InvalidInput):
            swap_test(make_state(1, 0), make_state(2, 0))


class TestHadamardTest:
    def test_examples(self):
        assert hadamard_test([0, 0], 0.5, "re") == pytest.approx(0.75, abs=1e-12)
        assert hadamard_test([0, 0], 0.5, "im") == pytest.approx(0.5, abs=1e-12)
        assert hadamard_test([np.pi / 2], 0.9, "re") == pytest.approx(0.5, abs=1e-12)

    def test_matches_amplitude(self, rng):
        for _ in range(20):
            phi = rng.uniform(-np.pi, np.pi, rng.integers(1, 8))
            a = rng.uniform(-1, 1)
            p = qsp_unitary(phi, a)[0, 0]
            assert abs(hadamard_test(phi, a, "re") - (1 + p.real) / 2) <= 1e-12
            assert abs(hadamard_test(phi, a, "im") - (1 + p.imag) / 2) <= 1e-12

    def test_sampled(self, rng):
        phi = rng.normal(size=4)
        for part in ("re", "im"):
            exact = hadamard_test(phi, 0.3, part)
            assert abs(hadamard_test(phi, 0.3, part, shots=10**5, seed=5) - exact) < 0.01

    def test_errors(self):
        with pytest.raises(DomainError):
            hadamard_test([0, 0], 1.2)
        with pytest.raises(InvalidInput):
            hadamard_test([0, 0], 0.2, "abs")
