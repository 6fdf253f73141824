"""Statevector core: gates, measurement, partial trace, Schmidt, fidelity."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdbg.errors import DegenerateState, SizeError, SubsetError, TargetError
from qdbg.gates import gate_matrix
from qdbg.state import (StateVector, apply_gate, fidelity, init_basis,
                        measure, partial_trace, project, schmidt,
                        schmidt_factors, tensor)

from conftest import CX4, H2, fig1_premeasure_amps, full_matrix, random_state

BELL = StateVector(2, np.array([1, 0, 0, 1]) / np.sqrt(2))
MINUS = np.array([1, -1]) / np.sqrt(2)


def eq1_state() -> StateVector:
    # (|00> + |11>)/sqrt(2) on q0,q1 tensor (|0> - |1>)/sqrt(2) on q2
    amps = np.zeros(8, dtype=complex)
    amps[0b000] = 0.5
    amps[0b100] = -0.5  # q2=1, q0=q1=0
    amps[0b011] = 0.5
    amps[0b111] = -0.5
    return StateVector(3, amps)


class TestInitBasis:
    def test_010(self):
        s = init_basis(3, "010")
        assert s.amps[0b010] == 1.0  # q1 = 1 -> index bit 1
        assert s.norm_sq() == pytest.approx(1.0)
        assert s.bitstring(0b010) == "010"

    def test_single_qubit(self):
        assert init_basis(1, "0").amps[0] == 1.0

    def test_all_ones(self):
        s = init_basis(2, "11")
        assert s.amps[3] == 1.0

    def test_size_errors(self):
        with pytest.raises(SizeError):
            init_basis(0, "")
        with pytest.raises(SizeError):
            init_basis(27, "0" * 27)
        with pytest.raises(SizeError):
            init_basis(2, "012")


class TestApplyGate:
    def test_h_on_zero(self):
        s = apply_gate(init_basis(1, "0"), gate_matrix("h"), [0])
        assert np.allclose(s.amps, [1 / np.sqrt(2), 1 / np.sqrt(2)])

    def test_cnot_10(self):
        # control=1 (first target) flips the second
        s = apply_gate(init_basis(2, "10"), gate_matrix("cx"), [0, 1])
        assert s.amps[0b11] == pytest.approx(1.0)

    def test_x_flip(self):
        s = apply_gate(init_basis(1, "0"), gate_matrix("x"), [0])
        assert s.amps[1] == 1.0

    def test_fig1_prefix_matches_oracle(self):
        s = init_basis(3, "000")
        s = apply_gate(s, gate_matrix("x"), [1])
        for q in range(3):
            s = apply_gate(s, gate_matrix("h"), [q])
        s = apply_gate(s, gate_matrix("cx"), [1, 2])
        assert np.allclose(s.amps, fig1_premeasure_amps(), atol=1e-12)

    def test_target_errors(self):
        s = init_basis(2, "00")
        with pytest.raises(TargetError):
            apply_gate(s, gate_matrix("cx"), [0, 0])
        with pytest.raises(TargetError):
            apply_gate(s, gate_matrix("x"), [5])

    @pytest.mark.parametrize("seed", range(10))
    def test_random_circuits_match_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n = 3
        amps = random_state(n, rng)
        s = StateVector(n, amps.copy())
        oracle = amps.copy()
        for _ in range(15):
            if rng.random() < 0.5:
                g = gate_matrix(rng.choice(["h", "x", "t", "s", "y", "z"]))
                t = [int(rng.integers(n))]
            else:
                g = gate_matrix(rng.choice(["cx", "cz"]))
                t = list(rng.choice(n, size=2, replace=False))
            s = apply_gate(s, g, t)
            oracle = full_matrix(g.matrix, t, n) @ oracle
        assert np.max(np.abs(s.amps - oracle)) < 1e-10

    @given(st.integers(0, 2 ** 31), st.integers(1, 4))
    @settings(max_examples=40, deadline=None)
    def test_norm_preserved_and_unitary(self, seed, n):
        rng = np.random.default_rng(seed)
        s = StateVector(n, random_state(n, rng))
        name = rng.choice(["h", "x", "s", "t", "rx"])
        params = (float(rng.uniform(0, 6.28)),) if name == "rx" else ()
        g = gate_matrix(name, params)
        t = [int(rng.integers(n))]
        out = apply_gate(s, g, t)
        assert abs(out.norm_sq() - 1.0) < 1e-9
        ginv = type(g)(g.name + "_dag", g.matrix.conj().T)
        back = apply_gate(out, ginv, t)
        assert np.max(np.abs(back.amps - s.amps)) < 1e-10


class TestMeasure:
    def test_fig1_outcome0(self):
        s = StateVector(3, fig1_premeasure_amps())
        record, post = measure(s, 2, 0.3)
        assert record.outcome == 0
        assert record.probability == pytest.approx(0.5, abs=1e-12)
        # 1/2(|00>-|01>+|10>-|11>) x |0>, printed q0-leftmost: the sign
        # follows q1, which is index bit 1
        expected = np.zeros(8, dtype=complex)
        expected[[0b000, 0b001]] = 0.5
        expected[[0b010, 0b011]] = -0.5
        assert fidelity(post, StateVector(3, expected)) == pytest.approx(1.0)

    def test_deterministic_one(self):
        for u in (0.0, 0.5, 0.999):
            record, post = measure(init_basis(1, "1"), 0, u)
            assert record.outcome == 1
            assert record.probability == pytest.approx(1.0)

    def test_bell_correlated(self):
        for u in (0.1, 0.9):
            r0, post = measure(BELL, 0, u)
            r1, _ = measure(post, 1, 0.5)
            assert r0.outcome == r1.outcome
            assert r1.probability == pytest.approx(1.0)

    def test_threshold_semantics(self):
        # fraction of u-grid yielding outcome 0 equals p0 exactly
        s = StateVector(3, fig1_premeasure_amps())
        grid = np.arange(0.0005, 1.0, 0.001)
        outcomes = [measure(s, 2, u)[0].outcome for u in grid]
        assert outcomes.count(0) / len(grid) == pytest.approx(0.5, abs=1e-12)

    def test_degenerate_norm(self):
        bad = StateVector.__new__(StateVector)
        bad.n_qubits = 1
        bad.amps = np.array([0.5, 0.0], dtype=complex)
        with pytest.raises(DegenerateState):
            measure(bad, 0, 0.5)


class TestPartialTrace:
    def test_bell_marginal(self):
        rho = partial_trace(BELL, [0])
        # oracle: outer product of the 4-vector, traced by hand
        psi = BELL.amps
        full = np.outer(psi, psi.conj())
        expected = np.array([[full[0, 0] + full[2, 2], full[0, 1] + full[2, 3]],
                             [full[1, 0] + full[3, 2], full[1, 1] + full[3, 3]]])
        assert np.allclose(rho.rho, expected)
        assert np.allclose(rho.rho, np.eye(2) / 2)
        assert rho.purity() == pytest.approx(0.5)

    def test_eq1_last_qubit_pure(self):
        rho = partial_trace(eq1_state(), [2])
        assert rho.purity() == pytest.approx(1.0)
        assert np.allclose(rho.rho, np.outer(MINUS, MINUS))

    def test_product_state(self):
        rho = partial_trace(init_basis(2, "00"), [0])
        assert np.allclose(rho.rho, [[1, 0], [0, 0]])

    def test_properties(self):
        rng = np.random.default_rng(5)
        s = StateVector(4, random_state(4, rng))
        rho = partial_trace(s, [1, 3])
        assert np.allclose(rho.rho, rho.rho.conj().T)
        assert np.trace(rho.rho).real == pytest.approx(1.0)
        assert np.all(rho.eigenvalues() > -1e-9)

    def test_no_signaling(self):
        # marginal of q1 unchanged by measuring q0 first and discarding
        rho_before = partial_trace(BELL, [1]).rho
        averaged = np.zeros((2, 2), dtype=complex)
        for outcome in (0, 1):
            from qdbg.state import outcome_probability
            p = outcome_probability(BELL, 0, outcome)
            post = project(BELL, 0, outcome)
            averaged += p * partial_trace(post, [1]).rho
        assert np.max(np.abs(averaged - rho_before)) < 1e-10

    def test_subset_errors(self):
        with pytest.raises(SubsetError):
            partial_trace(BELL, [])
        with pytest.raises(SubsetError):
            partial_trace(BELL, [0, 0])
        with pytest.raises(SubsetError):
            partial_trace(BELL, [3])


class TestSchmidt:
    def test_bell(self):
        sv = schmidt(BELL, [0], [1])
        # oracle: SVD of the explicit 2x2 reshape [[a00,a01],[a10,a11]]
        m = np.array([[BELL.amps[0], BELL.amps[2]], [BELL.amps[1], BELL.amps[3]]])
        expected = np.linalg.svd(m, compute_uv=False)
        assert np.allclose(sv, expected)
        assert np.allclose(sv, [1 / np.sqrt(2), 1 / np.sqrt(2)])

    def test_eq1_cut(self):
        sv = schmidt(eq1_state(), [0, 1], [2])
        assert sv[0] == pytest.approx(1.0)
        assert sv[1] == pytest.approx(0.0, abs=1e-12)

    def test_basis_state(self):
        sv = schmidt(init_basis(3, "000"), [0], [1, 2])
        assert sv[0] == pytest.approx(1.0)
        assert np.all(sv[1:] < 1e-12)

    def test_sum_of_squares(self):
        rng = np.random.default_rng(11)
        s = StateVector(4, random_state(4, rng))
        sv = schmidt(s, [0, 2], [1, 3])
        assert np.sum(sv ** 2) == pytest.approx(1.0, abs=1e-9)

    def test_consistency_with_purity(self):
        # sigma2 < tol across a cut iff purity of the reduced state ~ 1
        for s in (BELL, eq1_state(), init_basis(3, "010")):
            n = s.n_qubits
            for q in range(n):
                rest = [r for r in range(n) if r != q]
                sv = schmidt(s, [q], rest)
                sep = sv[1] < 1e-9
                pure = partial_trace(s, [q]).purity() >= 1 - 1e-9
                assert sep == pure

    def test_partition_required(self):
        with pytest.raises(SubsetError):
            schmidt(BELL, [0], [0])

    def test_factor_extraction(self):
        sv, fa, fb = schmidt_factors(eq1_state(), [0, 1], [2])
        assert fidelity(fb, StateVector(1, MINUS.astype(complex))) == pytest.approx(1.0)
        bell_amps = np.zeros(4, dtype=complex)
        bell_amps[[0, 3]] = 1 / np.sqrt(2)
        assert fidelity(fa, StateVector(2, bell_amps)) == pytest.approx(1.0)


class TestFidelity:
    def test_self(self):
        s = StateVector(2, random_state(2, np.random.default_rng(1)))
        assert fidelity(s, s) == pytest.approx(1.0)

    def test_global_phase(self):
        s = StateVector(2, random_state(2, np.random.default_rng(2)))
        rotated = StateVector(2, np.exp(1j * 1.234) * s.amps)
        assert fidelity(s, rotated) == pytest.approx(1.0)

    def test_zero_plus(self):
        plus = apply_gate(init_basis(1, "0"), gate_matrix("h"), [0])
        # oracle: |<0|+>|^2 by direct inner product
        expected = abs(np.vdot(init_basis(1, "0").amps, plus.amps)) ** 2
        assert fidelity(init_basis(1, "0"), plus) == pytest.approx(expected)
        assert expected == pytest.approx(0.5)

    def test_size_mismatch(self):
        with pytest.raises(SizeError):
            fidelity(init_basis(1, "0"), init_basis(2, "00"))


class TestDump:
    def test_format(self):
        lines = init_basis(2, "10").dump_lines()
        assert lines == ["10  1  0"]

    def test_threshold(self):
        s = apply_gate(init_basis(2, "00"), gate_matrix("h"), [0])
        assert len(s.dump_lines()) == 2
        assert all(line.split()[0] in ("00", "10") for line in s.dump_lines())


def test_tensor_convention():
    s = tensor(init_basis(1, "1"), init_basis(1, "0"))
    assert s.amps[0b01] == 1.0  # first factor is qubit 0
