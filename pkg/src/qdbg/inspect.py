"""White-box debugging checks over a live state.

These answer the questions a programmer asks at a breakpoint: is this
register in superposition, which qubits are entangled with which, and can
the state be written down classically / regenerated from its history.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from .errors import (ForcedOutcomeImpossible, ProvenanceUnavailable,
                     SubsetError)
from .state import (StateVector, fidelity, partial_trace, schmidt,
                    schmidt_factors, tensor)

SEP_TOL = 1e-9         # sigma_2 threshold for separability
SUP_TOL = 1e-6         # default support-probability threshold
BASIS_AMP_TOL = 1e-9   # |amp| >= 1 - tol on one entry counts as classical


@dataclass
class SuperpositionReport:
    subset: Tuple[int, ...]
    separable_from_rest: bool
    in_superposition: Union[bool, str]  # bool or "indeterminate-entangled"
    support: List[Tuple[str, float]]


@dataclass
class FactorizationReport:
    blocks: List[Tuple[Tuple[int, ...], StateVector]]
    residual: float  # largest sigma_2 over the block cuts actually used


@dataclass
class ClassicalDescription:
    initial_bits: str
    operator_trace: List[tuple]       # (gate name, params, targets)
    forced_outcomes: List             # MeasurementRecords from provenance
    per_block_basis: dict             # block tuple -> bitstring or "non-classical"


def _complement(s: StateVector, subset):
    return [q for q in range(s.n_qubits) if q not in subset]


def check_superposition(s: StateVector, subset, tol_sup: float = SUP_TOL) -> SuperpositionReport:
    """Report whether the subset's state is a superposition.

    Decidable only when the subset is separable from the rest; otherwise
    the verdict is "indeterminate-entangled".
    """
    subset = tuple(subset)
    if not subset:
        raise SubsetError("subset must be non-empty")
    rest = _complement(s, subset)
    if not rest:
        factor = s
        separable = True
    else:
        sv, fa, _ = schmidt_factors(s, list(subset), rest)
        separable = len(sv) < 2 or sv[1] < SEP_TOL
        factor = fa if separable else None
    if not separable:
        return SuperpositionReport(subset, False, "indeterminate-entangled", [])
    probs = factor.probabilities()
    support = [(factor.bitstring(i), float(p))
               for i, p in enumerate(probs) if p > tol_sup]
    return SuperpositionReport(subset, True, len(support) >= 2, support)


def is_separable(s: StateVector, part_a, part_b, tol: float = SEP_TOL):
    """(separable, sigma_2 witness) for a bipartition of all qubits."""
    sv = schmidt(s, list(part_a), list(part_b))
    sigma2 = float(sv[1]) if len(sv) > 1 else 0.0
    return sigma2 < tol, sigma2


def _marginal_is_product(s: StateVector, block, qubit, tol) -> bool:
    """True if rho_{block+qubit} factors as rho_block x rho_qubit."""
    joint = partial_trace(s, sorted(block) + [qubit]).rho
    # local index: bit j = j-th kept qubit (ascending); qubit is the top bit
    rb = partial_trace(s, sorted(block)).rho
    rq = partial_trace(s, [qubit]).rho
    prod = np.kron(rq, rb)  # top bit varies slowest = kron's left factor
    return bool(np.max(np.abs(joint - prod)) < tol)


def factor_state(s: StateVector, tol: float = SEP_TOL) -> FactorizationReport:
    """Finest partition into mutually separable blocks, with factor states.

    Pure singletons stand alone; an entangled qubit seeds a block that grows
    (lowest index first, preferring qubits actually correlated with the
    block) until the block is separable from everything else.
    """
    n = s.n_qubits
    unassigned = list(range(n))
    block_sets = []
    residual = 0.0
    corr_tol = max(np.sqrt(tol), 1e-8)
    while unassigned:
        q = unassigned.pop(0)
        block = [q]
        while True:
            rest = [r for r in range(n) if r not in block]
            if not rest:
                break
            sep, sigma2 = is_separable(s, block, rest, tol)
            if sep:
                break
            residual = max(residual, sigma2)
            candidates = [r for r in unassigned
                          if not _marginal_is_product(s, block, r, corr_tol)]
            if not candidates:
                candidates = unassigned  # fall back: keep growing
            r = candidates[0]
            unassigned.remove(r)
            block.append(r)
        block_sets.append(tuple(sorted(block)))

    blocks = []
    for bs in block_sets:
        rest = [r for r in range(n) if r not in bs]
        if not rest:
            blocks.append((bs, s))
            continue
        _, fa, _ = schmidt_factors(s, list(bs), rest)
        blocks.append((bs, fa))
    return FactorizationReport(blocks, residual)


def reconstruct(report: FactorizationReport, n_qubits: int) -> StateVector:
    """Tensor the block factors back together in qubit order (test helper)."""
    # build amplitude by summing over block-local indices
    order = []
    for bs, _ in sorted(report.blocks):
        order.extend(bs)
    state = None
    for bs, factor in sorted(report.blocks):
        state = factor if state is None else tensor(state, factor)
    # state's qubit k corresponds to global qubit order[k]; permute back
    amps = state.amps.reshape([2] * n_qubits)
    # axis i of reshaped = local qubit n-1-i = global order[n-1-i]
    perm = [0] * n_qubits
    for local, global_q in enumerate(order):
        perm[n_qubits - 1 - global_q] = n_qubits - 1 - local
    return StateVector(n_qubits, amps.transpose(perm).reshape(-1).copy())


def basis_label(factor: StateVector, tol: float = BASIS_AMP_TOL) -> Optional[str]:
    """Bitstring if the factor is a basis state up to global phase, else None."""
    mags = np.abs(factor.amps)
    top = int(np.argmax(mags))
    if mags[top] >= 1.0 - tol:
        return factor.bitstring(top)
    return None


def classical_description(provenance, live: StateVector) -> ClassicalDescription:
    """Classical summary of how the live state was produced.

    Leading X gates on otherwise-untouched qubits are folded into the
    initial bits, so `x q[2]; h q[0]; ...` reads as starting from |001>.
    """
    if not provenance.available:
        raise ProvenanceUnavailable("session was started from an imported state")
    bits = list(provenance.initial_bits)
    trace = []
    touched = set()
    for ev in provenance.events:
        if ev.kind == "unitary":
            if (ev.name == "x" and len(ev.qubits) == 1
                    and ev.qubits[0] not in touched):
                bits[ev.qubits[0]] = "1" if bits[ev.qubits[0]] == "0" else "0"
            else:
                trace.append((ev.name, tuple(ev.params), tuple(ev.qubits)))
                touched.update(ev.qubits)
        elif ev.kind in ("measure", "reset"):
            touched.update(ev.qubits)

    forced = [ev.record for ev in provenance.events if ev.kind == "measure"]
    report = factor_state(live)
    per_block = {}
    for bs, factor in report.blocks:
        label = basis_label(factor)
        per_block[bs] = label if label is not None else "non-classical"
    return ClassicalDescription("".join(bits), trace, forced, per_block)


def regenerate(provenance) -> StateVector:
    """Re-execute the provenance log, forcing recorded measurement outcomes."""
    from .state import apply_gate, outcome_probability, project
    from .gates import gate_matrix

    if not provenance.available:
        raise ProvenanceUnavailable("session was started from an imported state")
    s = provenance.initial_state()
    for ev in provenance.events:
        if ev.kind == "unitary":
            s = apply_gate(s, gate_matrix(ev.name, ev.params), ev.qubits)
        elif ev.kind in ("measure", "reset"):
            q, outcome = ev.record.qubit, ev.record.outcome
            if outcome_probability(s, q, outcome) < 1e-12:
                raise ForcedOutcomeImpossible(
                    f"recorded outcome {outcome} on qubit {q} has ~zero probability "
                    f"on replay; state history is corrupt")
            s = project(s, q, outcome)
            if ev.kind == "reset" and outcome == 1:
                s = apply_gate(s, gate_matrix("x"), [q])
    return s


def regenerate_and_compare(provenance, live: StateVector) -> float:
    """Fidelity between the live state and a from-scratch replay of its history."""
    return fidelity(live, regenerate(provenance))
