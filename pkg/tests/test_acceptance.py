"""Acceptance suite: one criterion per test, one printed pass/fail line each.

Run with `pytest tests/test_acceptance.py -s` to see the report lines.
"""

import itertools
import json
import time

import numpy as np
import pytest
from scipy.stats import unitary_group

from qdbg.engine import export_io_log, launch
from qdbg.inspect import classical_description, factor_state, regenerate
from qdbg.qasm import parse
from qdbg.qasm.ast import pretty_print
from qdbg.server import ProtocolHandler, encode
from qdbg.state import (StateVector, apply_gate, fidelity, init_basis,
                        schmidt, state_fidelity_mixed)
from qdbg.stats import (approximate_clone, bloch_vector, run_shots,
                        sample_clone_measurements, tomography)
from qdbg.errors import SourceError

from conftest import (FIG1_SRC, FIG2_SRC, full_matrix, haar_qubit,
                      oracle_apply, random_state)


def report(name: str, ok: bool, started: float, budget: float):
    elapsed = time.perf_counter() - started
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name} ({elapsed:.2f}s / {budget:g}s)")
    assert ok
    assert elapsed < budget


class TestAcceptance:
    def test_fig1_reproduction(self):
        t0 = time.perf_counter()
        s = launch(parse(FIG1_SRC), seed=0)
        for _ in range(5):
            s.step()
        p0 = s.measure_probability(0)
        s.step(force=0)
        expected = np.zeros(8, dtype=complex)
        expected[[0b000, 0b001]] = 0.5
        expected[[0b010, 0b011]] = -0.5
        f = fidelity(s.state, StateVector(3, expected))
        ok = f >= 1 - 1e-9 and abs(p0 - 0.5) < 1e-12
        report("fig1 forced-outcome collapse", ok, t0, 1)

    def test_eq1_eq2_reproduction(self):
        t0 = time.perf_counter()
        s = launch(parse(FIG2_SRC), seed=0)
        for _ in range(4):
            s.step()
        rep = factor_state(s.state)
        blocks = {tuple(bs): factor for bs, factor in rep.blocks}
        bell = StateVector(2, np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2))
        minus = StateVector(1, np.array([1, -1], dtype=complex) / np.sqrt(2))
        ok = set(blocks) == {(0, 1), (2,)} and \
            fidelity(blocks[(0, 1)], bell) >= 1 - 1e-9 and \
            fidelity(blocks[(2,)], minus) >= 1 - 1e-9
        desc = classical_description(s.provenance, s.state)
        ok = ok and desc.initial_bits == "001"
        trace = [(name, qs) for name, _, qs in desc.operator_trace]
        ok = ok and trace == [("h", (0,)), ("cx", (0, 1)), ("h", (2,))]
        report("eq1/eq2 factorization and classical description", ok, t0, 1)

    def test_bell_correlation(self):
        t0 = time.perf_counter()
        dist = run_shots(parse(FIG2_SRC), 10000, seed=7)
        ok = set(dist.counts) == {"00", "11"} and \
            0.47 <= dist.frequency("00") <= 0.53
        report("bell correlation, 10^4 shots", ok, t0, 5)

    def test_hamming_weight_state(self):
        t0 = time.perf_counter()
        ok = True
        for n in range(1, 11):
            src = ('OPENQASM 2.0;\ninclude "qelib1.inc";\n'
                   f"qreg q[{n}];\ncreg c[1];\n"
                   + "".join(f"x q[{i}];\n" for i in range(n))
                   + "".join(f"h q[{i}];\n" for i in range(n)))
            s = launch(parse(src), seed=0)
            s.run_to_end()
            regen = regenerate(s.provenance)
            scale = 2 ** (-n / 2)
            for x in range(1 << n):
                want = scale * (-1) ** bin(x).count("1")
                if abs(regen.amps[x] - want) > 1e-12 or \
                        abs(s.state.amps[x] - want) > 1e-12:
                    ok = False
        report("hamming-weight state signs and magnitudes", ok, t0, 5)

    def test_cloner_fidelity(self):
        t0 = time.perf_counter()
        rng = np.random.default_rng(0)
        ok = True
        for _ in range(1000):
            psi = StateVector(1, haar_qubit(rng))
            c = approximate_clone(psi, [0])
            if abs(state_fidelity_mixed(psi, c.clone) - 5 / 6) > 1e-12:
                ok = False
        clone0 = approximate_clone(init_basis(1, "0"), [0])
        dist = sample_clone_measurements(clone0, 100000, seed=0)
        ok = ok and abs(dist.frequency("0") - 5 / 6) <= 0.01
        bell = StateVector(2, np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2))
        ok = ok and abs(approximate_clone(bell, [0, 1]).expected_fidelity
                        - 7 / 10) <= 1e-12
        report("cloner fidelity 5/6 and 7/10", ok, t0, 10)

    def test_separability_classification(self):
        t0 = time.perf_counter()
        rng = np.random.default_rng(1)
        correct = 0
        for _ in range(100):
            amps = np.array([1.0 + 0j])
            for _ in range(4):
                amps = np.kron(haar_qubit(rng), amps)
            rep = factor_state(StateVector(4, amps))
            ours = sorted(tuple(bs) for bs, _ in rep.blocks)
            correct += ours == [(0,), (1,), (2,), (3,)] and \
                self._oracle_splits(StateVector(4, amps)) == ours
        planted = 0
        while planted < 100:
            pair = np.asarray(unitary_group.rvs(4, random_state=rng))[:, 0]
            s2 = np.linalg.svd(pair.reshape(2, 2), compute_uv=False)[1]
            if s2 < 0.1:
                continue
            planted += 1
            qa, qb = sorted(rng.choice(4, size=2, replace=False))
            amps = self._embed_pair(pair, qa, qb, rng)
            rep = factor_state(StateVector(4, amps))
            ours = sorted(tuple(bs) for bs, _ in rep.blocks)
            merged = any(qa in bs and qb in bs for bs, _ in rep.blocks)
            correct += merged and self._oracle_splits(StateVector(4, amps)) == ours
        ok = correct == 200
        report("separability classification 200/200", ok, t0, 30)

    @staticmethod
    def _embed_pair(pair, qa, qb, rng):
        """4-qubit state with `pair` entangled across (qa, qb), rest random."""
        singles = [haar_qubit(rng) for _ in range(2)]
        amps = np.zeros(16, dtype=complex)
        rest = [q for q in range(4) if q not in (qa, qb)]
        for x in range(16):
            a, b = (x >> qa) & 1, (x >> qb) & 1
            # pair amplitude indexes (b, a) with qb the higher-order bit
            val = pair[(b << 1) | a] if qb > qa else pair[(a << 1) | b]
            for s, q in zip(singles, rest):
                val *= s[(x >> q) & 1]
            amps[x] = val
        return amps / np.linalg.norm(amps)

    @staticmethod
    def _oracle_splits(s):
        """Finest partition by brute-force SVD over all bipartitions."""
        n = s.n_qubits
        blocks = [list(range(n))]
        done = []
        while blocks:
            block = blocks.pop()
            if len(block) == 1:
                done.append(tuple(block))
                continue
            split = None
            for r in range(1, len(block)):
                for part in itertools.combinations(block, r):
                    # part is a factor iff it is separable from all other qubits
                    complement = [q for q in range(n) if q not in part]
                    if schmidt(s, list(part), complement)[1] < 1e-9:
                        split = (list(part), [q for q in block if q not in part])
                        break
                if split:
                    break
            if split:
                blocks.extend(split)
            else:
                done.append(tuple(sorted(block)))
        return sorted(done)

    def test_simulator_oracle_equivalence(self):
        t0 = time.perf_counter()
        from qdbg.gates import gate_matrix
        rng = np.random.default_rng(2)
        one_q = ["x", "y", "z", "h", "s", "t", "sdg", "tdg"]
        worst = 0.0
        for _ in range(50):
            state = init_basis(3, "000")
            dense = np.zeros(8, dtype=complex)
            dense[0] = 1.0
            for _ in range(20):
                if rng.random() < 0.3:
                    a, b = rng.choice(3, size=2, replace=False)
                    name, targets = "cx", [int(a), int(b)]
                else:
                    name = one_q[rng.integers(len(one_q))]
                    targets = [int(rng.integers(3))]
                g = gate_matrix(name)
                state = apply_gate(state, g, targets)
                dense = full_matrix(g.matrix, targets, 3) @ dense
            worst = max(worst, np.max(np.abs(state.amps - dense)))
        report(f"simulator oracle equivalence (max dev {worst:.2e})",
               worst < 1e-10, t0, 10)

    def test_tomography(self):
        t0 = time.perf_counter()
        rng = np.random.default_rng(3)
        ok = True
        for n, subset in ((2, [0]), (3, [1, 2])):
            s = StateVector(n, random_state(n, rng))
            est = tomography(s, subset, None, override=True)
            from qdbg.state import partial_trace
            if np.max(np.abs(est.rho_hat.rho
                             - partial_trace(s, sorted(subset)).rho)) > 1e-9:
                ok = False
        from qdbg.gates import gate_matrix
        plus = apply_gate(init_basis(1, "0"), gate_matrix("h"), [0])
        good = 0
        for seed in range(100):
            est = tomography(plus, [0], 10000, seed=seed)
            err = np.linalg.norm(bloch_vector(est.rho_hat) - np.array([1, 0, 0]))
            good += err < 0.05
        ok = ok and good >= 95
        report(f"tomography exact + sampled ({good}/100 seeds)", ok, t0, 60)

    def test_frontend_corpus(self):
        t0 = time.perf_counter()
        ok = True
        for src in (FIG1_SRC, FIG2_SRC):
            session = launch(parse(src), seed=0)
            ok = ok and len(session.program) == 6
            again = parse(pretty_print(parse(src)))
            ok = ok and parse(src).statements == again.statements
        malformed = [
            "", "OPENQASM 3.0;", "OPENQASM 2.0", "qreg q[2];",
            "OPENQASM 2.0;\nqreg q[0];", "OPENQASM 2.0;\nqreg q[2",
            "OPENQASM 2.0;\nqreg q[2];\nqreg q[2];",
            "OPENQASM 2.0;\nh q[0];",
            'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[1];\nh q[1];',
            'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[2];\ncx q[0], q[0];',
            'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[1];\nh q;\nh p;',
            'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[1];\nbogus q[0];',
            'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[1];\nrx q[0];',
            'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[1];\nh q[0]',
            'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[1];\ncreg c[1];\n'
            "measure q[0] -> q[0];",
            'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[1];\ncreg c[1];\n'
            "if(c==4) x q[0];",
            'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[1];\nh $q;',
            'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[1];\n'
            "gate g a { g a; }\ng q[0];",
            'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[2];\ncreg c[1];\n'
            "measure q -> c;",
            'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[1];\nu1(3,) q[0];',
        ]
        assert len(malformed) == 20
        for bad in malformed:
            try:
                ast = parse(bad)
                from qdbg.qasm.expand import expand
                expand(ast)
                ok = False
            except SourceError as exc:
                ok = ok and exc.location is not None
        report("frontend corpus and malformed inputs", ok, t0, 1)

    def test_protocol_determinism(self):
        t0 = time.perf_counter()
        h = ProtocolHandler()
        for i, (cmd, args) in enumerate([
                ("launch", {"source": FIG1_SRC, "seed": 42}),
                ("step", {}), ("step", {}), ("step", {}),
                ("step", {}), ("step", {}), ("step", {}),
                ("exportLog", {})]):
            out = h.handle_line(encode({"id": i + 1, "cmd": cmd, "args": args}))
            resp = json.loads(out[0])
            assert resp["ok"], resp
        protocol_log = resp["result"]["log"]
        direct = launch(parse(FIG1_SRC), seed=42)
        direct.run_to_end()
        ok = protocol_log == export_io_log(direct)
        report("protocol io_log determinism", ok, t0, 1)
