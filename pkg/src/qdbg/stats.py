"""Statistical debugging machinery: approximate cloning, multi-shot runs,
distribution assertions, and small-subsystem tomography.

Everything that samples accepts a seed and draws from counter-based streams
(see rng.py), so results are reproducible and order-independent.  Wherever
sampling is offered, an exact-probability mode exists for deterministic CI.
"""

import itertools
import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.stats import chi2 as chi2_dist

from .errors import DomainMismatch, SizeError, SubsetError
from .inspect import SEP_TOL
from .rng import Stream
from .state import DensityMatrix, StateVector, partial_trace, schmidt


# --- universal cloning -------------------------------------------------------

@dataclass
class CloneResult:
    subset: Tuple[int, ...]
    clone: DensityMatrix
    shrink_factor: float
    expected_fidelity: float


def shrink_factor(d: int) -> float:
    """Optimal universal 1->2 cloner shrink factor for dimension d."""
    return (d + 2) / (2 * (d + 1))


def clone_fidelity(d: int) -> float:
    """Expected fidelity of the universal clone: eta + (1-eta)/d."""
    return (d + 3) / (2 * (d + 1))


def approximate_clone(s: StateVector, subset) -> CloneResult:
    """Universal-cloner marginal of a subsystem; the live state is untouched.

    The clone is eta*rho + (1-eta)*I/d, the best state-independent copy
    quantum mechanics allows (no-cloning forbids an exact one).
    """
    subset = tuple(subset)
    if not subset:
        raise SubsetError("subset must be non-empty")
    m = len(subset)
    if m > 3:
        raise SizeError(f"cloning limited to 3 qubits, got {m}")
    rho = partial_trace(s, sorted(subset))
    d = 1 << m
    eta = shrink_factor(d)
    out = eta * rho.rho + (1 - eta) * np.eye(d) / d
    return CloneResult(subset, DensityMatrix(m, out), eta, clone_fidelity(d))


def clone_density(rho: DensityMatrix) -> DensityMatrix:
    """Apply the shrink channel to an already-mixed state (fixed point: I/d)."""
    d = rho.rho.shape[0]
    eta = shrink_factor(d)
    return DensityMatrix(rho.m_qubits, eta * rho.rho + (1 - eta) * np.eye(d) / d)


# --- empirical distributions -------------------------------------------------

@dataclass
class EmpiricalDistribution:
    shots: int
    counts: Dict[str, int]
    seed: int

    def frequency(self, key: str) -> float:
        return self.counts.get(key, 0) / self.shots

    def to_json(self) -> str:
        return json.dumps({"shots": self.shots, "counts": dict(sorted(self.counts.items()))})


@dataclass
class ExpectedDistribution:
    probs: Dict[str, float]

    def __post_init__(self):
        total = sum(self.probs.values())
        if any(p < 0 for p in self.probs.values()) or abs(total - 1.0) > 1e-9:
            raise SizeError(f"probabilities must be >= 0 and sum to 1, sum={total}")

    @classmethod
    def from_json(cls, text: str) -> "ExpectedDistribution":
        return cls(json.loads(text)["probs"])


@dataclass
class AssertionVerdict:
    method: str  # "tv" | "chi2"
    statistic: float
    threshold_or_alpha: float
    passed: bool


def sample_clone_measurements(c: CloneResult, n_samples: int, seed: int) -> EmpiricalDistribution:
    """Computational-basis samples from the clone's diagonal."""
    if n_samples < 1:
        raise SizeError("n_samples must be >= 1")
    probs = np.real(np.diag(c.clone.rho))
    cumulative = np.cumsum(probs)
    m = c.clone.m_qubits
    counts: Dict[str, int] = {}
    stream = Stream(seed)
    for i in range(n_samples):
        u = stream.uniform_at(i)
        idx = int(np.searchsorted(cumulative, u, side="right"))
        idx = min(idx, len(probs) - 1)
        key = "".join(str((idx >> k) & 1) for k in range(m))
        counts[key] = counts.get(key, 0) + 1
    return EmpiricalDistribution(n_samples, counts, seed)


def run_shots(ast, shots: int, seed: int) -> EmpiricalDistribution:
    """Execute the full program `shots` times; counts keyed by creg readout.

    Shot i uses stream (seed, i), so the result is independent of execution
    order.  Runs vectorized in lockstep; counts are bit-identical to the
    per-session path below (asserted in tests).
    """
    from .batch import run_shots_batch

    if shots < 1:
        raise SizeError("shots must be >= 1")
    return EmpiricalDistribution(shots, run_shots_batch(ast, shots, seed), seed)


def run_shots_sessions(ast, shots: int, seed: int) -> EmpiricalDistribution:
    """Reference implementation of run_shots via one DebugSession per shot."""
    from .engine import DebugSession

    if shots < 1:
        raise SizeError("shots must be >= 1")
    counts: Dict[str, int] = {}
    for i in range(shots):
        session = DebugSession(ast, seed, shot_index=i)
        session.run_to_end()
        key = session.creg_readout()
        counts[key] = counts.get(key, 0) + 1
    return EmpiricalDistribution(shots, counts, seed)


def exact_distribution(ast, seed: int = 0) -> ExpectedDistribution:
    """Exact final creg distribution by enumerating measurement branches."""
    from .engine import DebugSession

    probs: Dict[str, float] = {}

    def walk(session: "DebugSession", weight: float):
        while not session.finished():
            if session.at_measurement():
                p0 = session.measure_probability(0)
                for outcome, p in ((0, p0), (1, 1.0 - p0)):
                    if p > 1e-12:
                        branch = session.fork()
                        branch.step(force=outcome)
                        walk(branch, weight * p)
                return
            session.step()
        key = session.creg_readout()
        probs[key] = probs.get(key, 0.0) + weight

    walk(DebugSession(ast, seed), 1.0)
    return ExpectedDistribution(probs)


def assert_distribution(e: EmpiricalDistribution, x: ExpectedDistribution,
                        method: str, param: float) -> AssertionVerdict:
    """Goodness-of-fit check of observed shot counts against expectation.

    tv:   statistic = total variation distance, pass iff <= threshold.
    chi2: Pearson statistic with <5-expected-count pooling, pass iff below
          the (1 - alpha) quantile.
    """
    if method not in ("tv", "chi2") or not (0 < param < 1):
        raise SizeError(f"bad method/param: {method} {param}")
    if method == "tv":
        keys = set(e.counts) | set(x.probs)
        stat = 0.5 * sum(abs(e.counts.get(k, 0) / e.shots - x.probs.get(k, 0.0))
                         for k in keys)
        return AssertionVerdict("tv", stat, param, stat <= param)

    for k in e.counts:
        if x.probs.get(k, 0.0) == 0.0 and e.counts[k] > 0:
            raise DomainMismatch(
                f"observed outcome {k!r} has zero expected probability")
    buckets = []  # (obs, exp)
    pooled_obs, pooled_exp = 0, 0.0
    for k, p in sorted(x.probs.items()):
        obs = e.counts.get(k, 0)
        exp = p * e.shots
        if exp < 5:
            pooled_obs += obs
            pooled_exp += exp
        else:
            buckets.append((obs, exp))
    if pooled_exp > 0:
        buckets.append((pooled_obs, pooled_exp))
    if len(buckets) < 2:
        # nothing to test against; exact match is the only passing case
        stat = 0.0
        return AssertionVerdict("chi2", stat, param, True)
    stat = sum((obs - exp) ** 2 / exp for obs, exp in buckets)
    crit = float(chi2_dist.ppf(1 - param, df=len(buckets) - 1))
    return AssertionVerdict("chi2", stat, param, stat <= crit)


# --- tomography --------------------------------------------------------------

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_SQ2 = 1 / np.sqrt(2)
# rotation into the measurement basis: diag of R rho R^H gives outcome probs
_BASIS_ROT = {
    "X": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),          # H
    "Y": np.array([[_SQ2, -1j * _SQ2], [_SQ2, 1j * _SQ2]], dtype=complex),  # H Sdg
    "Z": np.eye(2, dtype=complex),
}


@dataclass
class TomographyEstimate:
    subset: Tuple[int, ...]
    rho_hat: DensityMatrix
    shots_per_setting: Optional[int]
    settings: List[str] = field(default_factory=list)


def _pauli_string_matrix(setting: str) -> np.ndarray:
    """Tensor product over the subset; local bit j (= j-th qubit) is the
    fast index, so qubit j's letter is the j-th kron factor from the right."""
    m = np.eye(1, dtype=complex)
    for letter in setting:  # setting[j] = letter for local qubit j
        m = np.kron(_PAULI[letter], m)
    return m


def _setting_rotation(setting: str) -> np.ndarray:
    m = np.eye(1, dtype=complex)
    for letter in setting:
        m = np.kron(_BASIS_ROT[letter], m)
    return m


def tomography(s: StateVector, subset, shots_per_setting: Optional[int],
               seed: int = 0, override: bool = False) -> TomographyEstimate:
    """Linear-inversion state tomography of a small subsystem.

    Measures all 3^m Pauli settings on the reduced state, inverts, and
    projects to the PSD cone.  shots_per_setting=None selects the exact
    probability mode (no sampling noise at all).
    """
    subset = tuple(sorted(subset))
    m = len(subset)
    if not (1 <= m <= 3):
        raise SizeError(f"tomography limited to 1..3 qubits, got {m}")
    rest = [q for q in range(s.n_qubits) if q not in subset]
    if rest and not override:
        sv = schmidt(s, list(subset), rest)
        if len(sv) > 1 and sv[1] >= SEP_TOL:
            raise SubsetError(
                f"subset {subset} is entangled with the rest "
                f"(sigma_2 = {sv[1]:.3g}); pass override to estimate the "
                f"reduced mixed state")
    rho = partial_trace(s, list(subset)).rho
    d = 1 << m

    settings = ["".join(p) for p in itertools.product("XYZ", repeat=m)]
    # expectation estimate for every non-identity Pauli string; identity
    # components come for free from marginals of any compatible setting
    expectations: Dict[str, float] = {"I" * m: 1.0}
    for si, setting in enumerate(settings):
        rot = _setting_rotation(setting)
        probs = np.real(np.diag(rot @ rho @ rot.conj().T))
        probs = np.clip(probs, 0.0, None)
        probs /= probs.sum()
        if shots_per_setting is None:
            outcome_freq = probs
        else:
            cumulative = np.cumsum(probs)
            counts = np.zeros(d)
            stream = Stream(seed, si)
            for i in range(shots_per_setting):
                u = stream.uniform_at(i)
                idx = min(int(np.searchsorted(cumulative, u, side="right")), d - 1)
                counts[idx] += 1
            outcome_freq = counts / shots_per_setting
        # this setting estimates every Pauli string whose non-I letters match
        for support in itertools.product([False, True], repeat=m):
            if not any(support):
                continue
            pstring = "".join(setting[j] if support[j] else "I" for j in range(m))
            if pstring in expectations:
                continue  # keep the first (deterministic) compatible setting
            signs = np.array([
                (-1) ** sum((idx >> j) & 1 for j in range(m) if support[j])
                for idx in range(d)])
            expectations[pstring] = float(np.dot(signs, outcome_freq))

    rho_hat = np.zeros((d, d), dtype=complex)
    for pstring, val in expectations.items():
        rho_hat += val * _pauli_string_matrix(pstring)
    rho_hat /= d

    # PSD projection: clip negative eigenvalues, renormalize the trace
    vals, vecs = np.linalg.eigh(rho_hat)
    vals = np.clip(vals, 0.0, None)
    vals /= vals.sum()
    rho_hat = (vecs * vals) @ vecs.conj().T
    return TomographyEstimate(subset, DensityMatrix(m, rho_hat),
                              shots_per_setting, settings)


def bloch_vector(rho: DensityMatrix) -> np.ndarray:
    """(x, y, z) Bloch components of a single-qubit density matrix."""
    if rho.m_qubits != 1:
        raise SizeError("bloch_vector needs a single-qubit state")
    return np.array([np.real(np.trace(rho.rho @ _PAULI[p])) for p in "XYZ"])
