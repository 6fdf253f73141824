"""Debug sessions: stepping, breakpoints, provenance, inspection dispatch.

A session owns the flat program, the live statevector, the classical
registers, and an append-only provenance log from which the state can be
regenerated at any time.
"""

import copy
import hashlib
import json
import time
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import rng
from .errors import (BreakpointIndexError, CapacityError,
                     ForcedOutcomeImpossible, SessionFinished, SubsetError)
from .gates import gate_matrix
from .inspect import (check_superposition, classical_description, factor_state,
                      is_separable, regenerate_and_compare)
from .qasm.ast import Ast, pretty_print
from .qasm.expand import (FlatBarrier, FlatGate, FlatIf, FlatMeasure,
                          FlatReset, format_flat)
from .rng import Stream
from .state import (MeasurementRecord, StateVector, apply_gate, init_basis,
                    measure, outcome_probability, project)

MAX_QUBITS = 26


@dataclass
class ProvEvent:
    kind: str                 # "unitary" | "measure" | "reset"
    name: str = ""
    params: tuple = ()
    qubits: tuple = ()
    record: Optional[MeasurementRecord] = None
    forced: bool = False
    stmt_index: int = -1


@dataclass
class Provenance:
    available: bool
    n_qubits: int
    initial_bits: str
    events: List[ProvEvent] = field(default_factory=list)

    def initial_state(self) -> StateVector:
        return init_basis(self.n_qubits, self.initial_bits)


class DebugSession:
    """One live execution of a flat program."""

    _next_id = 0

    def __init__(self, ast: Ast, seed: int, shot_index: int = 0):
        from .qasm.expand import expand

        n = ast.n_qubits()
        if n > MAX_QUBITS:
            raise CapacityError(f"program declares {n} qubits, cap is {MAX_QUBITS}")
        DebugSession._next_id += 1
        self.id = f"s{DebugSession._next_id}"
        self.ast = ast
        self.program = expand(ast)
        self.pc = 0
        self.state = init_basis(n, "0" * n)
        self.cregs = {name: [0] * size for name, size in ast.cregs}
        self.breakpoints = set()
        self.seed = seed
        self.shot_index = shot_index
        self.stream = Stream(seed, shot_index)
        self.provenance = Provenance(True, n, "0" * n)
        self.io_events = []  # (stmt index, qubit, outcome) for the io_log
        self.status = "stopped:entry"
        self.started_at = time.time()

    @classmethod
    def from_state(cls, ast: Ast, state: StateVector, seed: int) -> "DebugSession":
        """Resume from a dumped state; provenance is unavailable."""
        session = cls(ast, seed)
        if state.n_qubits != ast.n_qubits():
            raise CapacityError("dumped state size does not match the program")
        session.state = state
        session.provenance = Provenance(False, state.n_qubits, "")
        return session

    # --- small queries -------------------------------------------------------

    def finished(self) -> bool:
        return self.pc >= len(self.program)

    def current_stmt(self):
        return self.program[self.pc] if not self.finished() else None

    def creg_value(self, name: str) -> int:
        return sum(bit << i for i, bit in enumerate(self.cregs[name]))

    def creg_readout(self) -> str:
        """Concatenated creg bits, c[0]-leftmost, registers in declaration order."""
        return "".join("".join(str(b) for b in self.cregs[name])
                       for name, _ in self.ast.cregs)

    def at_measurement(self) -> bool:
        stmt = self.current_stmt()
        if isinstance(stmt, FlatIf) and self._if_taken(stmt):
            stmt = stmt.inner
        return isinstance(stmt, (FlatMeasure, FlatReset))

    def measure_probability(self, outcome: int) -> float:
        stmt = self.current_stmt()
        if isinstance(stmt, FlatIf):
            stmt = stmt.inner
        return outcome_probability(self.state, stmt.qubit, outcome)

    def fork(self) -> "DebugSession":
        """Independent copy for branch exploration (used by exact enumeration)."""
        return copy.deepcopy(self)

    def _if_taken(self, stmt: FlatIf) -> bool:
        return self.creg_value(stmt.creg) == stmt.value

    # --- execution -----------------------------------------------------------

    def step(self, force: Optional[int] = None) -> dict:
        """Execute one flat statement.

        force picks the measurement outcome (projection + renormalize)
        instead of sampling; recorded as forced in provenance.
        """
        if self.finished():
            raise SessionFinished("program has already finished")
        stmt = self.program[self.pc]
        self._execute(stmt, self.pc, force)
        self.pc += 1
        self.status = "stopped:finished" if self.finished() else "stopped:step"
        return self.stop_event()

    def _execute(self, stmt, index: int, force: Optional[int] = None):
        if isinstance(stmt, FlatGate):
            g = gate_matrix(stmt.name, stmt.params)
            self.state = apply_gate(self.state, g, stmt.qubits)
            self.provenance.events.append(ProvEvent(
                "unitary", stmt.name, stmt.params, stmt.qubits, stmt_index=index))
        elif isinstance(stmt, FlatMeasure):
            if force is None:
                record, post = measure(self.state, stmt.qubit, self.stream.uniform())
                forced = False
            else:
                p = outcome_probability(self.state, stmt.qubit, force)
                if p < 1e-12:
                    raise ForcedOutcomeImpossible(
                        f"outcome {force} on qubit {stmt.qubit} has probability {p:g}")
                post = project(self.state, stmt.qubit, force)
                record = MeasurementRecord(stmt.qubit, force, p)
                forced = True
            self.state = post
            self.cregs[stmt.creg][stmt.bit] = record.outcome
            self.provenance.events.append(ProvEvent(
                "measure", qubits=(stmt.qubit,), record=record, forced=forced,
                stmt_index=index))
            self.io_events.append((index, stmt.qubit, record.outcome))
        elif isinstance(stmt, FlatReset):
            # standard QASM2 semantics: measure, then flip to |0> if needed
            record, post = measure(self.state, stmt.qubit, self.stream.uniform())
            if record.outcome == 1:
                post = apply_gate(post, gate_matrix("x"), [stmt.qubit])
            self.state = post
            self.provenance.events.append(ProvEvent(
                "reset", qubits=(stmt.qubit,), record=record, stmt_index=index))
        elif isinstance(stmt, FlatBarrier):
            pass
        elif isinstance(stmt, FlatIf):
            if self._if_taken(stmt):
                self._execute(stmt.inner, index, force)

    def continue_run(self) -> dict:
        """Step until a breakpoint (statement about to execute) or the end."""
        if self.finished():
            self.status = "stopped:finished"
            return self.stop_event()
        while True:
            self.step()
            if self.finished():
                self.status = "stopped:finished"
                return self.stop_event()
            if self.pc in self.breakpoints and self._would_execute(self.pc):
                self.status = "stopped:breakpoint"
                return self.stop_event()

    def _would_execute(self, index: int) -> bool:
        # a breakpoint inside a skipped `if` branch is not hit
        stmt = self.program[index]
        if isinstance(stmt, FlatIf):
            return self._if_taken(stmt)
        return True

    def run_to_end(self):
        while not self.finished():
            self.step()
        self.status = "stopped:finished"

    def set_breakpoint(self, index: int):
        if not (0 <= index < len(self.program)):
            raise BreakpointIndexError(
                f"statement index {index} out of range 0..{len(self.program) - 1}")
        self.breakpoints.add(index)

    def clear_breakpoint(self, index: int):
        if not (0 <= index < len(self.program)):
            raise BreakpointIndexError(f"statement index {index} out of range")
        self.breakpoints.discard(index)

    def stop_event(self) -> dict:
        stmt = self.current_stmt()
        ev = {
            "status": self.status,
            "pc": self.pc,
            "finished": self.finished(),
            "cregs": {name: "".join(str(b) for b in bits)
                      for name, bits in self.cregs.items()},
        }
        if stmt is not None:
            ev["next"] = format_flat(stmt)
            if stmt.span is not None:
                ev["span"] = {"line": stmt.span.line, "column": stmt.span.column}
        return ev

    # --- inspection dispatch -------------------------------------------------

    def inspect(self, kind: str, **args) -> dict:
        """Run an inspection and return a JSON-ready report."""
        from . import stats

        if kind == "state":
            return {
                "n_qubits": self.state.n_qubits,
                "amplitudes": [
                    {"bits": self.state.bitstring(i),
                     "re": float(a.real), "im": float(a.imag),
                     "prob": float(abs(a) ** 2)}
                    for i, a in enumerate(self.state.amps)
                    if abs(a) ** 2 > 1e-12
                ],
            }
        if kind == "superposition":
            rep = check_superposition(self.state, args["subset"],
                                      args.get("tol_sup", 1e-6))
            return {
                "subset": list(rep.subset),
                "separable_from_rest": rep.separable_from_rest,
                "in_superposition": rep.in_superposition,
                "support": [{"bits": b, "prob": p} for b, p in rep.support],
            }
        if kind == "separable":
            part_a = args["subset"]
            part_b = [q for q in range(self.state.n_qubits) if q not in part_a]
            if not part_b:
                raise SubsetError("subset must be a proper subset")
            sep, sigma2 = is_separable(self.state, part_a, part_b,
                                       args.get("tol", 1e-9))
            return {"separable": sep, "sigma2": sigma2}
        if kind == "factor":
            rep = factor_state(self.state, args.get("tol", 1e-9))
            return {
                "residual": rep.residual,
                "blocks": [
                    {"qubits": list(bs),
                     "amplitudes": [
                         {"bits": factor.bitstring(i),
                          "re": float(a.real), "im": float(a.imag)}
                         for i, a in enumerate(factor.amps)
                         if abs(a) ** 2 > 1e-12]}
                    for bs, factor in rep.blocks
                ],
            }
        if kind == "classical":
            desc = classical_description(self.provenance, self.state)
            return {
                "initial_bits": desc.initial_bits,
                "operator_trace": [
                    {"gate": name, "params": list(params), "qubits": list(qs)}
                    for name, params, qs in desc.operator_trace],
                "forced_outcomes": [
                    {"qubit": r.qubit, "outcome": r.outcome,
                     "probability": r.probability}
                    for r in desc.forced_outcomes],
                "per_block_basis": {
                    ",".join(map(str, bs)): label
                    for bs, label in desc.per_block_basis.items()},
            }
        if kind == "regenerate":
            return {"fidelity": regenerate_and_compare(self.provenance, self.state)}
        if kind == "clone":
            result = stats.approximate_clone(self.state, args["subset"])
            from .state import partial_trace
            live = partial_trace(self.state, sorted(args["subset"]))
            # --physical-clone: report the degraded post-cloning marginal as
            # the live subset's statistics instead of the undisturbed state
            reported = result.clone if args.get("physical") else live
            out = {
                "subset": list(result.subset),
                "shrink_factor": result.shrink_factor,
                "expected_fidelity": result.expected_fidelity,
                "diagonal": [float(p.real) for p in np.diag(result.clone.rho)],
                "live_diagonal": [float(p.real) for p in np.diag(reported.rho)],
                "physical": bool(args.get("physical", False)),
            }
            if args.get("samples"):
                dist = stats.sample_clone_measurements(
                    result, args["samples"], args.get("seed", self.seed))
                out["counts"] = dist.counts
            return out
        if kind == "tomography":
            est = stats.tomography(self.state, args["subset"],
                                   args.get("shots_per_setting"),
                                   args.get("seed", self.seed),
                                   args.get("override", False))
            rho = est.rho_hat.rho
            return {
                "subset": list(est.subset),
                "purity": est.rho_hat.purity(),
                "rho": [[[float(z.real), float(z.imag)] for z in row]
                        for row in rho],
            }
        if kind == "distribution":
            from . import stats as _s
            dist = _s.run_shots(self.ast, args.get("shots", 1024),
                                args.get("seed", self.seed))
            return {"shots": dist.shots, "counts": dist.counts}
        raise SubsetError(f"unknown inspect kind {kind!r}")

    # --- io_log --------------------------------------------------------------

    def program_hash(self) -> str:
        return hashlib.sha256(pretty_print(self.ast).encode()).hexdigest()

    def io_log_header(self) -> str:
        return json.dumps({"seed": self.seed, "rng": rng.ALGORITHM,
                           "program": self.program_hash()})

    def io_log_record(self) -> str:
        return json.dumps({
            "shot": self.shot_index,
            "init": self.provenance.initial_bits,
            "events": [{"stmt": k, "qubit": q, "outcome": b}
                       for k, q, b in self.io_events],
            "creg": {name: "".join(str(b) for b in bits)
                     for name, bits in self.cregs.items()},
        })


def launch(ast: Ast, seed: int) -> DebugSession:
    """New interactive session, stopped at entry on the all-zero state."""
    return DebugSession(ast, seed)


def export_io_log(sessions, path=None) -> str:
    """Newline-delimited io_log for one or more (finished or live) sessions."""
    if isinstance(sessions, DebugSession):
        sessions = [sessions]
    lines = []
    if sessions:
        lines.append(sessions[0].io_log_header())
    for s in sessions:
        if s.pc > 0:  # a session with no steps contributes only the header
            lines.append(s.io_log_record())
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(text)
    return text


def run_batch(ast: Ast, shots: int, seed: int):
    """Run shots as independent sessions (deterministic per shot index)."""
    sessions = []
    for i in range(shots):
        s = DebugSession(ast, seed, shot_index=i)
        s.run_to_end()
        sessions.append(s)
    return sessions
