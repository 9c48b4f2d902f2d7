import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import PAULI, cnot, kron_op
from toric_ladder.core import (
    Gate,
    apply_gate,
    apply_pauli,
    basis_state,
    circuit_unitary,
    estimate_star_expectations,
    expectation,
    merge_histograms,
    sample_z_basis,
    zero_state,
)
from toric_ladder.lattice import PauliString, to_matrix


def random_gate(rng, n):
    kind = rng.choice(["H", "X", "Z", "CNOT", "RZ", "RX"])
    if kind == "CNOT":
        c, t = rng.choice(n, size=2, replace=False)
        return Gate("CNOT", (c, t))
    theta = float(rng.uniform(-np.pi, np.pi)) if kind in ("RZ", "RX") else None
    return Gate(kind, (int(rng.integers(n)),), theta)


class TestApplyGate:
    def test_hadamard(self):
        out = apply_gate(basis_state("0"), Gate("H", (0,)))
        assert np.allclose(out, [1 / np.sqrt(2), 1 / np.sqrt(2)])

    def test_cnot(self):
        out = apply_gate(basis_state("10"), Gate("CNOT", (0, 1)))
        assert np.allclose(out, basis_state("11"))

    def test_cnot_reversed_control(self):
        out = apply_gate(basis_state("01"), Gate("CNOT", (1, 0)))
        assert np.allclose(out, basis_state("11"))

    def test_rz_convention(self):
        plus = np.array([1, 1]) / np.sqrt(2)
        out = apply_gate(plus, Gate("RZ", (0,), np.pi))
        assert np.allclose(out, np.array([np.exp(-1j * np.pi / 2), np.exp(1j * np.pi / 2)]) / np.sqrt(2))

    def test_rx_is_exponential(self):
        import scipy.linalg

        theta = 0.731
        assert np.allclose(Gate("RX", (0,), theta).matrix(), scipy.linalg.expm(-0.5j * theta * PAULI["X"]))
        assert np.allclose(Gate("RZ", (0,), theta).matrix(), scipy.linalg.expm(-0.5j * theta * PAULI["Z"]))

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            apply_gate(zero_state(2), Gate("X", (2,)))

    def test_duplicate_cnot_targets(self):
        with pytest.raises(ValueError):
            Gate("CNOT", (1, 1))

    def test_unknown_gate(self):
        with pytest.raises(ValueError):
            Gate("T", (0,))

    @pytest.mark.parametrize("seed", range(5))
    def test_kernel_matches_dense_matrices(self, seed):
        rng = np.random.default_rng(seed)
        n = 4
        psi = rng.normal(size=16) + 1j * rng.normal(size=16)
        psi /= np.linalg.norm(psi)
        for _ in range(20):
            g = random_gate(rng, n)
            if g.kind == "CNOT":
                dense = cnot(n, *g.targets)
            else:
                dense = kron_op(n, {g.targets[0]: g.matrix()})
            assert np.abs(apply_gate(psi, g) - dense @ psi).max() < 1e-12

    def test_pauli_gates_match_to_matrix(self):
        rng = np.random.default_rng(3)
        psi = rng.normal(size=8) + 0j
        for kind in ("X", "Z"):
            for q in range(3):
                expected = to_matrix(PauliString(((q, kind),)), 3) @ psi
                assert np.abs(apply_gate(psi, Gate(kind, (q,))) - expected).max() < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_norm_preserved_by_random_circuits(n, seed):
    rng = np.random.default_rng(seed)
    if n == 1:
        gates = [Gate(rng.choice(["H", "X", "Z"]), (0,)) for _ in range(100)]
    else:
        gates = [random_gate(rng, n) for _ in range(100)]
    psi = zero_state(n)
    for g in gates:
        psi = apply_gate(psi, g)
    assert abs(np.linalg.norm(psi) - 1) < 1e-10


def test_circuit_unitary_is_unitary():
    rng = np.random.default_rng(0)
    u = circuit_unitary([random_gate(rng, 3) for _ in range(30)], 3)
    assert np.allclose(u.conj().T @ u, np.eye(8), atol=1e-12)


class TestExpectation:
    def test_star_on_zero(self, ladder3):
        assert expectation(zero_state(8), ladder3.star_ops[0]) == 1.0

    def test_plaquette_on_zero(self, ladder3):
        psi = zero_state(8)
        oracle = np.vdot(psi, to_matrix(ladder3.plaquette_ops[1], 8) @ psi).real
        assert expectation(psi, ladder3.plaquette_ops[1]) == oracle == 0.0

    def test_maximally_mixed(self, ladder3):
        rho = np.eye(256) / 256
        for a in ladder3.star_ops:
            assert abs(expectation(rho, a)) < 1e-15

    def test_density_matrix_matches_trace(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        rho = x @ x.conj().T
        rho /= np.trace(rho)
        for op in [PauliString(((0, "X"), (2, "Y"))), PauliString(((1, "Z"),)), PauliString(((0, "Y"),), 2)]:
            assert abs(expectation(rho, op) - np.trace(rho @ to_matrix(op, 3)).real) < 1e-12

    def test_vector_matches_matrix(self):
        rng = np.random.default_rng(2)
        psi = rng.normal(size=16) + 1j * rng.normal(size=16)
        psi /= np.linalg.norm(psi)
        op = PauliString(((0, "Y"), (1, "X"), (3, "Z")))
        assert abs(expectation(psi, op) - expectation(np.outer(psi, psi.conj()), op)) < 1e-12
        assert np.allclose(apply_pauli(psi, op), to_matrix(op, 4) @ psi)


class TestSampling:
    def test_basis_state(self):
        hist = sample_z_basis(basis_state("10000000"), 1000, seed=7)
        assert hist == {"10000000": 1000}

    @pytest.mark.parametrize("seed", [0, 1, 2, 99, 12345])
    def test_bell_state_binomial(self, seed):
        bell = (basis_state("00") + basis_state("11")) / np.sqrt(2)
        hist = sample_z_basis(bell, 1000, seed)
        assert set(hist) <= {"00", "11"}
        assert abs(hist.get("00", 0) - 500) <= 3 * np.sqrt(250)

    def test_deterministic(self):
        rng = np.random.default_rng(0)
        psi = rng.normal(size=32) + 1j * rng.normal(size=32)
        psi /= np.linalg.norm(psi)
        assert sample_z_basis(psi, 500, 42) == sample_z_basis(psi, 500, 42)

    def test_rejects_zero_shots(self):
        with pytest.raises(ValueError):
            sample_z_basis(basis_state("0"), 0, 0)

    def test_merge(self):
        assert merge_histograms([{"01": 2}, {"01": 1, "10": 3}]) == {"01": 3, "10": 3}


class TestStarEstimator:
    def test_all_zero(self, ladder3):
        assert np.array_equal(estimate_star_expectations({"00000000": 1000}, ladder3), [1, 1, 1])

    def test_first_qubit_flipped(self, ladder3):
        assert np.array_equal(estimate_star_expectations({"10000000": 1000}, ladder3), [-1, 1, 1])

    def test_mixture(self, ladder3):
        est = estimate_star_expectations({"00000000": 500, "10000000": 500}, ladder3)
        assert est[0] == 0

    @pytest.mark.parametrize("bad", [{"0000000": 1}, {"0000000x": 1}])
    def test_malformed(self, ladder3, bad):
        with pytest.raises(ValueError):
            estimate_star_expectations(bad, ladder3)

    def test_converges_to_exact(self, ladder2):
        rng = np.random.default_rng(5)
        psi = rng.normal(size=64) + 1j * rng.normal(size=64)
        psi /= np.linalg.norm(psi)
        shots = 100_000
        est = estimate_star_expectations(sample_z_basis(psi, shots, 11), ladder2)
        for e, op in zip(est, ladder2.star_ops):
            m = expectation(psi, op)
            assert abs(e - m) <= 3 * np.sqrt((1 - m * m) / shots)
