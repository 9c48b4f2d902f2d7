import itertools

import numpy as np
import pytest
import scipy.linalg

from oracles import ladder_hamiltonian, ladder_ops, prep_state
from toric_ladder.circuits import (
    QuenchSpec,
    VisonConfig,
    dumps,
    full_circuit,
    loads,
    prep_circuit,
    quench,
    spinon_qubit,
    star_exponential_circuit,
    step_angles,
    trotter_circuit,
    trotter_step_circuit,
)
from toric_ladder.core import Gate, apply_circuit, circuit_unitary, expectation, zero_state
from toric_ladder.lattice import PauliString, build_ladder, to_matrix


def prepared(model, spec):
    return apply_circuit(zero_state(model.n_qubits), prep_circuit(model, spec))


def stars_and_plaquettes(model, psi):
    return (
        np.array([expectation(psi, a) for a in model.star_ops]),
        np.array([expectation(psi, b) for b in model.plaquette_ops]),
    )


class TestPrep:
    def test_spinon_no_vison(self, ladder3):
        a, b = stars_and_plaquettes(ladder3, prepared(ladder3, quench(ladder3, 1)))
        assert np.abs(a - [-1, 1, 1]).max() < 1e-12
        assert np.abs(b - 1).max() < 1e-12

    def test_ground_state(self, ladder3):
        a, b = stars_and_plaquettes(ladder3, prepared(ladder3, quench(ladder3, None)))
        assert np.abs(a - 1).max() < 1e-12 and np.abs(b - 1).max() < 1e-12

    def test_spinon_vison_two(self, ladder3):
        a, b = stars_and_plaquettes(ladder3, prepared(ladder3, quench(ladder3, 1, (2,))))
        assert np.abs(a - [-1, 1, 1]).max() < 1e-12
        assert np.abs(b - [1, -1, 1, 1]).max() < 1e-12

    def test_gate_layout(self, ladder2):
        gates = prep_circuit(ladder2, quench(ladder2, 2, (2,)))
        assert gates == (
            Gate("H", (0,)), Gate("H", (2,)), Gate("H", (4,)),
            Gate("CNOT", (0, 1)), Gate("CNOT", (2, 3)), Gate("CNOT", (4, 5)),
            Gate("X", (4,)), Gate("Z", (2,)),
        )

    @pytest.mark.parametrize("stars", [1, 2, 3, 4])
    def test_every_configuration(self, stars):
        model = build_ladder(stars)
        spinons = [None] + sorted({1, stars})
        for spinon in spinons:
            for signs in itertools.product((1, -1), repeat=stars + 1):
                spec = QuenchSpec(spinon, VisonConfig(signs))
                psi = prepared(model, spec)
                a, b = stars_and_plaquettes(model, psi)
                want_a = np.ones(stars)
                if spinon is not None:
                    want_a[spinon - 1] = -1
                assert np.abs(a - want_a).max() < 1e-12
                assert np.abs(b - np.array(signs)).max() < 1e-12
                # equal-weight mixture of both string sectors
                assert abs(expectation(psi, model.string_op)) < 1e-12

    @pytest.mark.parametrize("visons", [(), (2,), (3,)])
    def test_matches_kron_oracle(self, ladder3, visons):
        psi = prepared(ladder3, quench(ladder3, 1, visons))
        assert np.abs(psi - prep_state(3, True, visons)).max() < 1e-12

    def test_interior_spinon_rejected(self, ladder3):
        with pytest.raises(ValueError, match="interior star 2"):
            prep_circuit(ladder3, quench(ladder3, 2))

    def test_spinon_qubit(self, ladder3):
        assert spinon_qubit(ladder3, 1) == 0
        assert spinon_qubit(ladder3, 3) == 6

    def test_validation(self, ladder3):
        with pytest.raises(ValueError):
            quench(ladder3, 4)
        with pytest.raises(ValueError):
            quench(ladder3, 1, (5,))
        with pytest.raises(ValueError):
            QuenchSpec(1, VisonConfig.none(2)).validate(ladder3)
        with pytest.raises(ValueError):
            VisonConfig((1, 0, 1))
        with pytest.raises(ValueError):
            QuenchSpec(1, VisonConfig.none(3), trotter_steps=0)


class TestStarExponential:
    def test_zero_angle(self, ladder3):
        u = circuit_unitary(star_exponential_circuit(ladder3.star_ops[0], 0.0), 8)
        assert np.abs(u - np.eye(256)).max() < 1e-12

    @pytest.mark.parametrize("s", [0, 1, 2])
    def test_headline_angle(self, ladder3, s):
        star = ladder3.star_ops[s]
        u = circuit_unitary(star_exponential_circuit(star, 1.25), 8)
        exact = scipy.linalg.expm(1j * 1.25 * to_matrix(star, 8))
        assert np.linalg.norm(u - exact, 2) < 1e-12

    def test_quarter_turn(self, ladder2):
        star = ladder2.star_ops[1]
        u = circuit_unitary(star_exponential_circuit(star, np.pi / 2), 6)
        assert np.abs(u - 1j * to_matrix(star, 6)).max() < 1e-12

    def test_structure(self, ladder3):
        gates = star_exponential_circuit(ladder3.star_ops[1], 0.3)
        assert [g.kind for g in gates] == ["CNOT"] * 3 + ["RZ"] + ["CNOT"] * 3
        assert gates[3] == Gate("RZ", (5,), -0.6)

    @pytest.mark.parametrize(
        "op",
        [
            PauliString.from_axes("Z", [0, 1, 2]),
            PauliString.from_axes("X", [0, 1, 2, 3]),
            PauliString(((0, "Z"), (1, "Z"), (2, "Z"), (3, "Z")), phase=2),
        ],
    )
    def test_rejects_non_star(self, op):
        with pytest.raises(ValueError):
            star_exponential_circuit(op, 0.1)


class TestTrotter:
    def test_headline_angles(self, ladder3):
        assert step_angles(ladder3, 10 / 8) == (1.25, 0.125)
        step = trotter_step_circuit(ladder3, 10 / 8)
        rz = [g for g in step if g.kind == "RZ"]
        rx = [g for g in step if g.kind == "RX"]
        assert [g.theta for g in rz] == [-2.5] * 3
        assert [g.theta for g in rx] == [-0.25] * 8

    def test_stars_before_fields(self, ladder3):
        kinds = [g.kind for g in trotter_step_circuit(ladder3, 0.5)]
        assert kinds[-8:] == ["RX"] * 8 and "RX" not in kinds[:-8]

    def test_step_unitary(self, ladder2):
        _, a_ops, _, _, x_ops = ladder_ops(2)
        dt = 0.37
        u = circuit_unitary(trotter_step_circuit(ladder2, dt), 6)
        want = scipy.linalg.expm(1j * 0.1 * dt * sum(x_ops)) @ scipy.linalg.expm(1j * dt * sum(a_ops))
        assert np.abs(u - want).max() < 1e-12

    def test_commuting_limit_is_exact(self):
        model = build_ladder(2, 1.0, 0.0)
        spec = quench(model, 1, (), total_time=10.0, trotter_steps=1)
        u = circuit_unitary(trotter_circuit(model, spec), 6)
        exact = scipy.linalg.expm(-1j * 10.0 * ladder_hamiltonian(2, 1.0, 0.0))
        assert np.abs(u - exact).max() < 1e-12

    def test_plaquettes_invariant(self, ladder3):
        spec = quench(ladder3, 1, (2,), trotter_steps=4)
        before = prepared(ladder3, spec)
        after = apply_circuit(before, trotter_circuit(ladder3, spec))
        for b in ladder3.plaquette_ops:
            assert abs(expectation(after, b) - expectation(before, b)) < 1e-10
            u = to_matrix(b, 8)
            rng = np.random.default_rng(0)
            psi = rng.normal(size=256) + 0j
            psi /= np.linalg.norm(psi)
            lhs = apply_circuit(u @ psi, trotter_step_circuit(ladder3, 1.25))
            rhs = u @ apply_circuit(psi, trotter_step_circuit(ladder3, 1.25))
            assert np.abs(lhs - rhs).max() < 1e-12

    def test_convergence(self, ladder2):
        exact = scipy.linalg.expm(-1j * 10.0 * ladder_hamiltonian(2))

        def err(n):
            u = circuit_unitary(trotter_circuit(ladder2, quench(ladder2, 1, (), 10.0, n)), 6)
            return np.linalg.norm(u - exact, 2)

        assert err(64) < err(4)

    def test_full_circuit_concatenates(self, ladder2):
        spec = quench(ladder2, 1, (2,), 4.0, 3)
        assert full_circuit(ladder2, spec) == prep_circuit(ladder2, spec) + trotter_circuit(ladder2, spec)


class TestTextFormat:
    def test_round_trip(self, ladder3):
        circ = full_circuit(ladder3, quench(ladder3, 1, (3,), 10.0, 3))
        assert loads(dumps(circ)) == circ

    def test_labels_are_one_based(self):
        text = dumps([Gate("CNOT", (0, 1)), Gate("RZ", (3,), -2.5)])
        assert text == "CNOT 1,2\nRZ 4,-2.5\n"

    def test_comments_and_blanks(self):
        assert loads("# prep\n\nh 1\n") == (Gate("H", (0,)),)

    @pytest.mark.parametrize("bad", ["FOO 1", "RZ 1,x", "CNOT 1", "H 1,2,3", "H"])
    def test_parse_errors(self, bad):
        with pytest.raises(ValueError, match="line 1"):
            loads(bad)
