"""Flatten an Ast: inline gate macros, unroll register-wide operations.

Flat statements reference global qubit indices (qregs concatenated in
declaration order) and keep their original source spans so breakpoints on
expanded code still point into the file.
"""

from dataclasses import dataclass, field
from typing import Optional, Union

from ..errors import ExpansionError, Location
from ..gates import SIGNATURES
from .ast import Ast, Barrier, BitRef, GateApply, If, Measure, Reset


@dataclass(frozen=True)
class FlatGate:
    name: str
    params: tuple  # resolved floats
    qubits: tuple  # global indices
    span: Location = field(compare=False, default=None)


@dataclass(frozen=True)
class FlatMeasure:
    qubit: int
    creg: str
    bit: int
    span: Location = field(compare=False, default=None)


@dataclass(frozen=True)
class FlatReset:
    qubit: int
    span: Location = field(compare=False, default=None)


@dataclass(frozen=True)
class FlatBarrier:
    qubits: tuple
    span: Location = field(compare=False, default=None)


@dataclass(frozen=True)
class FlatIf:
    creg: str
    value: int
    inner: Union[FlatGate, FlatMeasure, FlatReset]
    span: Location = field(compare=False, default=None)


FlatStmt = Union[FlatGate, FlatMeasure, FlatReset, FlatBarrier, FlatIf]


def format_flat(stmt: FlatStmt) -> str:
    if isinstance(stmt, FlatGate):
        head = stmt.name
        if stmt.params:
            head += "(" + ", ".join(f"{p:g}" for p in stmt.params) + ")"
        return f"{head} {' '.join('q' + str(q) for q in stmt.qubits)}"
    if isinstance(stmt, FlatMeasure):
        return f"measure q{stmt.qubit} -> {stmt.creg}[{stmt.bit}]"
    if isinstance(stmt, FlatReset):
        return f"reset q{stmt.qubit}"
    if isinstance(stmt, FlatBarrier):
        return "barrier " + " ".join("q" + str(q) for q in stmt.qubits)
    return f"if({stmt.creg}=={stmt.value}) {format_flat(stmt.inner)}"


class _Expander:
    def __init__(self, ast: Ast):
        self.ast = ast
        self.gate_defs = {gd.name: gd for gd in ast.gate_defs}
        self.qreg_sizes = dict(ast.qregs)
        self.creg_sizes = dict(ast.cregs)
        self.out = []

    def qubit_index(self, ref: BitRef) -> int:
        return self.ast.qubit_offset(ref.reg) + ref.index

    def broadcast(self, targets, span):
        """Expand register-wide refs into per-index lists of BitRef."""
        sizes = {self.qreg_sizes[t.reg] for t in targets if t.index is None}
        if not sizes:
            return [list(targets)]
        if len(sizes) > 1:
            raise ExpansionError(span,
                                 f"register size mismatch in broadcast: {sorted(sizes)}")
        width = sizes.pop()
        rows = []
        for i in range(width):
            rows.append([t if t.index is not None else BitRef(t.reg, i)
                         for t in targets])
        return rows

    def emit_gate(self, name, params, qubit_refs, span):
        if name in self.gate_defs:
            gd = self.gate_defs[name]
            env = dict(zip(gd.params, params))
            binding = dict(zip(gd.qubits, qubit_refs))
            for stmt in gd.body:
                inner_params = tuple(p.eval(env) for p in stmt.params)
                inner_refs = [binding[t.reg] for t in stmt.targets]
                self.emit_gate(stmt.name, inner_params, inner_refs, span)
        else:
            assert name in SIGNATURES, name
            qubits = tuple(self.qubit_index(r) for r in qubit_refs)
            if len(set(qubits)) != len(qubits):
                raise ExpansionError(span, f"gate {name} targets collide after broadcast")
            self.out.append(FlatGate(name, tuple(params), qubits, span))

    def flatten_simple(self, stmt, collect=None):
        sink = self.out if collect is None else collect
        if isinstance(stmt, GateApply):
            for refs in self.broadcast(stmt.targets, stmt.span):
                before = len(self.out)
                self.emit_gate(stmt.name, tuple(p.eval({}) for p in stmt.params),
                               refs, stmt.span)
                if collect is not None:
                    collect.extend(self.out[before:])
                    del self.out[before:]
        elif isinstance(stmt, Measure):
            q, c = stmt.qubit, stmt.clbit
            if (q.index is None) != (c.index is None):
                raise ExpansionError(stmt.span,
                                     "measure must map bit to bit or register to register")
            if q.index is None:
                qs, cs = self.qreg_sizes[q.reg], self.creg_sizes[c.reg]
                if qs != cs:
                    raise ExpansionError(stmt.span,
                                         f"register size mismatch: {q.reg}[{qs}] -> {c.reg}[{cs}]")
                for i in range(qs):
                    sink.append(FlatMeasure(self.qubit_index(BitRef(q.reg, i)),
                                            c.reg, i, stmt.span))
            else:
                sink.append(FlatMeasure(self.qubit_index(q), c.reg, c.index, stmt.span))
        elif isinstance(stmt, Reset):
            q = stmt.qubit
            if q.index is None:
                for i in range(self.qreg_sizes[q.reg]):
                    sink.append(FlatReset(self.qubit_index(BitRef(q.reg, i)), stmt.span))
            else:
                sink.append(FlatReset(self.qubit_index(q), stmt.span))
        else:
            raise TypeError(f"unexpected statement {stmt}")

    def run(self):
        for stmt in self.ast.statements:
            if isinstance(stmt, Barrier):
                qubits = []
                for t in stmt.targets:
                    if t.index is None:
                        qubits.extend(self.qubit_index(BitRef(t.reg, i))
                                      for i in range(self.qreg_sizes[t.reg]))
                    else:
                        qubits.append(self.qubit_index(t))
                self.out.append(FlatBarrier(tuple(qubits), stmt.span))
            elif isinstance(stmt, If):
                inner = []
                self.flatten_simple(stmt.inner, collect=inner)
                for fs in inner:
                    self.out.append(FlatIf(stmt.creg, stmt.value, fs, stmt.span))
            else:
                self.flatten_simple(stmt)
        return self.out


def expand(ast: Ast):
    """Flat statement list with all macros inlined and broadcasts unrolled."""
    return _Expander(ast).run()
