"""Exact dense statevector simulation.

Conventions (fixed across the whole debugger):
  * bit k of an amplitude-array index is the value of qubit q[k], so the
    basis index of |b0 b1 ... b_{n-1}> is sum(b_k << k);
  * bitstrings are printed q[0]-leftmost, e.g. "010" means q0=0, q1=1, q2=0;
  * multi-qubit gate matrices index their rows/columns with the FIRST listed
    target as the most significant bit (textbook |control, target> order).

All operations are pure: states are never mutated, new arrays are returned.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateState, SizeError, SubsetError, TargetError

MAX_QUBITS = 26

NORM_TOL = 1e-9
UNITARY_TOL = 1e-12
MEASURE_NORM_TOL = 1e-6


@dataclass(frozen=True)
class MeasurementRecord:
    qubit: int
    outcome: int
    probability: float


class StateVector:
    """Normalized complex amplitude vector over n qubits."""

    def __init__(self, n_qubits: int, amps: np.ndarray):
        if not (1 <= n_qubits <= MAX_QUBITS):
            raise SizeError(f"n_qubits must be in 1..{MAX_QUBITS}, got {n_qubits}")
        amps = np.asarray(amps, dtype=np.complex128)
        if amps.shape != (1 << n_qubits,):
            raise SizeError(f"expected {1 << n_qubits} amplitudes, got {amps.shape}")
        self.n_qubits = n_qubits
        self.amps = amps
        self.amps.flags.writeable = False

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def norm_sq(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def bitstring(self, index: int) -> str:
        """Basis label of an amplitude index, q[0]-leftmost."""
        return "".join(str((index >> k) & 1) for k in range(self.n_qubits))

    def dump_lines(self, threshold: float = 1e-12):
        """`bitstring  re  im` lines for amplitudes with |amp|^2 > threshold."""
        out = []
        for i, a in enumerate(self.amps):
            if abs(a) ** 2 > threshold:
                out.append(f"{self.bitstring(i)}  {a.real:.17g}  {a.imag:.17g}")
        return out

    def __repr__(self):
        return f"StateVector(n_qubits={self.n_qubits})"


class GateMatrix:
    """Unitary matrix on 1..3 qubits."""

    def __init__(self, name: str, matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=np.complex128)
        d = matrix.shape[0]
        if matrix.shape != (d, d) or d not in (2, 4, 8):
            raise SizeError(f"gate matrix must be 2/4/8 square, got {matrix.shape}")
        dev = np.max(np.abs(matrix.conj().T @ matrix - np.eye(d)))
        if dev > 1e-10:
            raise SizeError(f"matrix for {name} is not unitary (deviation {dev:.3g})")
        self.name = name
        self.matrix = matrix
        self.arity = d.bit_length() - 1


class DensityMatrix:
    """Hermitian trace-1 operator over m qubits."""

    def __init__(self, m_qubits: int, rho: np.ndarray):
        rho = np.asarray(rho, dtype=np.complex128)
        d = 1 << m_qubits
        if rho.shape != (d, d):
            raise SizeError(f"expected {d}x{d} density matrix, got {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
            raise SizeError("density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1.0) > 1e-9:
            raise SizeError(f"density matrix trace {np.trace(rho).real} != 1")
        self.m_qubits = m_qubits
        self.rho = rho

    def purity(self) -> float:
        return float(np.trace(self.rho @ self.rho).real)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.rho)


def init_basis(n: int, bits: str) -> StateVector:
    """Computational basis state |bits>, bits[k] = value of qubit k."""
    if not (1 <= n <= MAX_QUBITS):
        raise SizeError(f"qubit count must be in 1..{MAX_QUBITS}, got {n}")
    if len(bits) != n or any(b not in "01" for b in bits):
        raise SizeError(f"bitstring {bits!r} does not match {n} qubits")
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[sum(int(b) << k for k, b in enumerate(bits))] = 1.0
    return StateVector(n, amps)


def _check_targets(s: StateVector, targets) -> None:
    if len(set(targets)) != len(targets):
        raise TargetError(f"duplicate targets {targets}")
    for t in targets:
        if not (0 <= t < s.n_qubits):
            raise TargetError(f"target {t} out of range for {s.n_qubits} qubits")


def apply_gate(s: StateVector, g: GateMatrix, targets) -> StateVector:
    """Apply g to the target qubits, identity on the rest."""
    targets = list(targets)
    if len(targets) != g.arity:
        raise TargetError(f"gate {g.name} has arity {g.arity}, got {len(targets)} targets")
    _check_targets(s, targets)
    n = s.n_qubits
    # axis i of the reshaped tensor is qubit n-1-i (C order, MSB first)
    psi = s.amps.reshape([2] * n)
    axes = [n - 1 - t for t in targets]
    psi = np.moveaxis(psi, axes, range(len(axes)))
    shape = psi.shape
    out = g.matrix @ psi.reshape(1 << g.arity, -1)
    psi = np.moveaxis(out.reshape(shape), range(len(axes)), axes)
    return StateVector(n, psi.reshape(s.dim).copy())


def measure(s: StateVector, qubit: int, u: float):
    """Measure one qubit given a uniform draw u; returns (record, post-state).

    Outcome is 0 iff u < p0 (threshold semantics, deterministic replay).
    """
    if not (0 <= qubit < s.n_qubits):
        raise TargetError(f"qubit {qubit} out of range")
    if abs(s.norm_sq() - 1.0) > MEASURE_NORM_TOL:
        raise DegenerateState(f"state norm^2 = {s.norm_sq()} before measurement")
    probs = s.probabilities()
    idx = np.arange(s.dim)
    mask0 = (idx >> qubit) & 1 == 0
    p0 = float(probs[mask0].sum())
    outcome = 0 if u < p0 else 1
    p = p0 if outcome == 0 else 1.0 - p0
    post = project(s, qubit, outcome)
    return MeasurementRecord(qubit, outcome, p), post


def project(s: StateVector, qubit: int, outcome: int) -> StateVector:
    """Project onto a measurement outcome and renormalize."""
    idx = np.arange(s.dim)
    keep = ((idx >> qubit) & 1) == outcome
    amps = np.where(keep, s.amps, 0.0)
    norm = np.linalg.norm(amps)
    if norm < 1e-12:
        raise DegenerateState(
            f"projection of qubit {qubit} onto {outcome} has zero probability")
    return StateVector(s.n_qubits, amps / norm)


def outcome_probability(s: StateVector, qubit: int, outcome: int) -> float:
    probs = s.probabilities()
    idx = np.arange(s.dim)
    mask = ((idx >> qubit) & 1) == outcome
    return float(probs[mask].sum())


def _subset_axes(s: StateVector, subset):
    subset = list(subset)
    if not subset or len(set(subset)) != len(subset):
        raise SubsetError(f"invalid qubit subset {subset}")
    for q in subset:
        if not (0 <= q < s.n_qubits):
            raise SubsetError(f"qubit {q} out of range")
    return subset


def _reshape_cut(s: StateVector, part_a, part_b) -> np.ndarray:
    """Amplitudes as a 2^|A| x 2^|B| matrix.

    Row index bit j is the value of part_a[j] (local convention matches the
    global one), same for columns.
    """
    n = s.n_qubits
    psi = s.amps.reshape([2] * n)
    # flatten in C order: first axis is most significant, so list each part
    # highest local bit first
    order = [n - 1 - q for q in reversed(part_a)] + [n - 1 - q for q in reversed(part_b)]
    return psi.transpose(order).reshape(1 << len(part_a), 1 << len(part_b))


def partial_trace(s: StateVector, keep) -> DensityMatrix:
    """Reduced density matrix of the kept qubits (sorted order preserved)."""
    keep = _subset_axes(s, keep)
    if len(keep) > s.n_qubits:
        raise SubsetError("subset larger than register")
    rest = [q for q in range(s.n_qubits) if q not in keep]
    if not rest:
        m = _reshape_cut(s, keep, [])
        v = m[:, 0]
        return DensityMatrix(len(keep), np.outer(v, v.conj()))
    m = _reshape_cut(s, keep, rest)
    return DensityMatrix(len(keep), m @ m.conj().T)


def schmidt(s: StateVector, part_a, part_b) -> np.ndarray:
    """Non-increasing Schmidt coefficients across the (A, B) bipartition."""
    part_a = _subset_axes(s, part_a)
    part_b = _subset_axes(s, part_b)
    if sorted(part_a + part_b) != list(range(s.n_qubits)):
        raise SubsetError("parts must partition all qubits")
    m = _reshape_cut(s, part_a, part_b)
    return np.linalg.svd(m, compute_uv=False)


def schmidt_factors(s: StateVector, part_a, part_b):
    """(sigma, factor_a, factor_b) for the leading Schmidt term.

    For a separable cut (sigma_2 ~ 0) the factors reconstruct the state up
    to global phase.
    """
    part_a = _subset_axes(s, part_a)
    part_b = _subset_axes(s, part_b)
    m = _reshape_cut(s, part_a, part_b)
    u, sv, vh = np.linalg.svd(m)
    fa = StateVector(len(part_a), u[:, 0].copy())
    fb = StateVector(len(part_b), vh[0, :].copy())
    return sv, fa, fb


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2; invariant under global phase of either state."""
    if a.n_qubits != b.n_qubits:
        raise SizeError(f"qubit counts differ: {a.n_qubits} vs {b.n_qubits}")
    return float(abs(np.vdot(a.amps, b.amps)) ** 2)


def state_fidelity_mixed(psi: StateVector, rho: DensityMatrix) -> float:
    """<psi|rho|psi> for a pure state against a density matrix."""
    if psi.dim != rho.rho.shape[0]:
        raise SizeError("dimension mismatch")
    return float(np.real(psi.amps.conj() @ rho.rho @ psi.amps))


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Tensor product with a's qubits becoming the low-index ones."""
    n = a.n_qubits + b.n_qubits
    # index bit k<n_a from a, higher bits from b: out[ib*2^na + ia] = a[ia]*b[ib]
    amps = (b.amps[:, None] * a.amps[None, :]).reshape(-1)
    return StateVector(n, amps)
