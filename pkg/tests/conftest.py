import numpy as np
import pytest

from qdbg.qasm import parse
from qdbg.qasm.ast import SourceProgram

# the two worked examples used throughout the suite
FIG1_SRC = """OPENQASM 2.0;
include "qelib1.inc";

qreg q[3];
creg c[1];

x q[1];
h q[0];
h q[1];
h q[2];
cx q[1],q[2];
measure q[2] -> c[0];
"""

FIG2_SRC = """OPENQASM 2.0;
include "qelib1.inc";

qreg q[3];
creg c[2];

x q[2];
h q[0];
cx q[0], q[1];
h q[2];
measure q[0] -> c[0];
measure q[1] -> c[1];
"""


@pytest.fixture
def fig1_ast():
    return parse(SourceProgram(FIG1_SRC, "fig1.qasm"))


@pytest.fixture
def fig2_ast():
    return parse(SourceProgram(FIG2_SRC, "fig2.qasm"))


# --- independent brute-force oracle ------------------------------------------
# Builds the full 2^n x 2^n operator entry by entry, sharing no code with the
# simulator's tensor-reshape path.  Index convention under test: bit k of an
# amplitude index is the value of qubit k; a gate matrix indexes its first
# listed target as the most significant bit.

def full_matrix(gate: np.ndarray, targets, n: int) -> np.ndarray:
    dim = 1 << n
    m = len(targets)
    full = np.zeros((dim, dim), dtype=complex)
    for x in range(dim):
        col = sum(((x >> targets[j]) & 1) << (m - 1 - j) for j in range(m))
        for row in range(1 << m):
            y = x
            for j in range(m):
                bit = (row >> (m - 1 - j)) & 1
                y = (y & ~(1 << targets[j])) | (bit << targets[j])
            full[y, x] += gate[row, col]
    return full


def oracle_apply(amps: np.ndarray, gate: np.ndarray, targets, n: int) -> np.ndarray:
    return full_matrix(gate, targets, n) @ amps


H2 = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
X2 = np.array([[0, 1], [1, 0]], dtype=complex)
CX4 = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
               dtype=complex)


def fig1_premeasure_amps() -> np.ndarray:
    """Fig. 1 state just before the measurement, via the dense oracle."""
    amps = np.zeros(8, dtype=complex)
    amps[0] = 1.0
    amps = oracle_apply(amps, X2, [1], 3)
    for q in (0, 1, 2):
        amps = oracle_apply(amps, H2, [q], 3)
    return oracle_apply(amps, CX4, [1, 2], 3)


def random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return amps / np.linalg.norm(amps)


def haar_qubit(rng: np.random.Generator) -> np.ndarray:
    return random_state(1, rng)
