"""Vectorized multi-shot execution.

Runs many shots in lockstep over a (shots, 2^n) amplitude array, drawing
measurement randomness from the same counter-based streams a per-shot
DebugSession would use, so the counts are bit-identical to running shots
one session at a time (asserted in tests).
"""

import numpy as np

from .gates import gate_matrix
from .qasm.expand import (FlatBarrier, FlatGate, FlatIf, FlatMeasure,
                          FlatReset, expand)
from .rng import stream_keys, uniforms

# cap the amplitude block at ~64 MiB; more shots run in chunks
_MAX_BLOCK = 1 << 22


class _Batch:
    def __init__(self, ast, shot_ids, seed):
        self.n = ast.n_qubits()
        self.dim = 1 << self.n
        self.k = len(shot_ids)
        self.states = np.zeros((self.k, self.dim), dtype=np.complex128)
        self.states[:, 0] = 1.0
        self.cregs = {name: np.zeros((self.k, size), dtype=np.int8)
                      for name, size in ast.cregs}
        self.creg_order = [name for name, _ in ast.cregs]
        self.keys = stream_keys(seed, np.asarray(shot_ids))
        self.counters = np.zeros(self.k, dtype=np.uint64)

    def apply_gate(self, g, targets, mask):
        rows = self.states if mask is None else self.states[mask]
        if rows.shape[0] == 0:
            return
        k = rows.shape[0]
        m = len(targets)
        psi = rows.reshape([k] + [2] * self.n)
        axes = [1 + self.n - 1 - t for t in targets]
        psi = np.moveaxis(psi, axes, range(1, 1 + m))
        shape = psi.shape
        flat = psi.reshape(k, 1 << m, -1)
        flat = np.einsum("ab,kbr->kar", g.matrix, flat)
        psi = np.moveaxis(flat.reshape(shape), range(1, 1 + m), axes)
        out = psi.reshape(k, self.dim)
        if mask is None:
            self.states = out
        else:
            self.states[mask] = out

    def measure(self, qubit, mask):
        """Returns (rows, outcomes) for the measured shots."""
        rows = np.arange(self.k) if mask is None else np.flatnonzero(mask)
        if rows.size == 0:
            return rows, np.zeros(0, dtype=np.int8)
        idx = np.arange(self.dim)
        zero_cols = ((idx >> qubit) & 1) == 0
        sub = self.states[rows]
        p0 = np.sum(np.abs(sub[:, zero_cols]) ** 2, axis=1)
        u = uniforms(self.keys[rows], self.counters[rows])
        self.counters[rows] += np.uint64(1)
        outcomes = (u >= p0).astype(np.int8)
        keep = zero_cols[None, :] ^ (outcomes[:, None] == 1)
        sub = np.where(keep, sub, 0.0)
        norms = np.linalg.norm(sub, axis=1, keepdims=True)
        self.states[rows] = sub / norms
        return rows, outcomes

    def execute(self, stmt, mask=None):
        if isinstance(stmt, FlatGate):
            self.apply_gate(gate_matrix(stmt.name, stmt.params), stmt.qubits, mask)
        elif isinstance(stmt, FlatMeasure):
            rows, outcomes = self.measure(stmt.qubit, mask)
            self.cregs[stmt.creg][rows, stmt.bit] = outcomes
        elif isinstance(stmt, FlatReset):
            rows, outcomes = self.measure(stmt.qubit, mask)
            ones = rows[outcomes == 1]
            if ones.size:
                flip = np.zeros(self.k, dtype=bool)
                flip[ones] = True
                self.apply_gate(gate_matrix("x"), (stmt.qubit,), flip)
        elif isinstance(stmt, FlatBarrier):
            pass
        elif isinstance(stmt, FlatIf):
            bits = self.cregs[stmt.creg]
            values = bits @ (1 << np.arange(bits.shape[1]))
            cond = values == stmt.value
            if mask is not None:
                cond &= mask
            self.execute(stmt.inner, cond)

    def readouts(self):
        parts = [self.cregs[name] for name in self.creg_order]
        all_bits = np.concatenate(parts, axis=1) if parts else \
            np.zeros((self.k, 0), dtype=np.int8)
        return ["".join(map(str, row)) for row in all_bits]


def run_shots_batch(ast, shots: int, seed: int) -> dict:
    """Shot counts, identical to running per-shot debug sessions."""
    program = expand(ast)
    dim = 1 << ast.n_qubits()
    chunk = max(1, _MAX_BLOCK // dim)
    counts = {}
    for start in range(0, shots, chunk):
        ids = np.arange(start, min(start + chunk, shots))
        batch = _Batch(ast, ids, seed)
        for stmt in program:
            batch.execute(stmt)
        for key in batch.readouts():
            counts[key] = counts.get(key, 0) + 1
    return counts
