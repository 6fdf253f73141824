"""Built-in gate matrices: the OpenQASM primitives U/CX plus the qelib1 set."""

import math

import numpy as np

from .errors import SemanticError
from .state import GateMatrix


def u_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([
        [c, -np.exp(1j * lam) * s],
        [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c],
    ])


_SQ2 = 1 / math.sqrt(2)

_X = np.array([[0, 1], [1, 0]])
_Y = np.array([[0, -1j], [1j, 0]])
_Z = np.array([[1, 0], [0, -1]])
_H = np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]])
_S = np.diag([1, 1j])
_T = np.diag([1, np.exp(1j * math.pi / 4)])

# row/col index: first listed qubit is the most significant bit
_CX = np.array([
    [1, 0, 0, 0],
    [0, 1, 0, 0],
    [0, 0, 0, 1],
    [0, 0, 1, 0],
])
_CZ = np.diag([1, 1, 1, -1])
_CCX = np.eye(8)
_CCX[[6, 7]] = _CCX[[7, 6]]


def _rx(theta):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def _ry(theta):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]])


def _rz(theta):
    return np.diag([np.exp(-1j * theta / 2), np.exp(1j * theta / 2)])


_FIXED = {
    "x": _X, "y": _Y, "z": _Z, "h": _H,
    "s": _S, "sdg": _S.conj().T, "t": _T, "tdg": _T.conj().T,
    "cx": _CX, "CX": _CX, "cz": _CZ, "ccx": _CCX,
    "id": np.eye(2),
}

_PARAMETRIC = {
    "rx": (1, _rx), "ry": (1, _ry), "rz": (1, _rz),
    "u1": (1, lambda l: u_matrix(0, 0, l)),
    "u2": (2, lambda p, l: u_matrix(math.pi / 2, p, l)),
    "u3": (3, u_matrix),
    "U": (3, u_matrix),
}

# (n_params, n_qubits) signature for every supported gate name
SIGNATURES = {name: (0, m.shape[0].bit_length() - 1) for name, m in _FIXED.items()}
SIGNATURES.update({name: (np_, 1) for name, (np_, _) in _PARAMETRIC.items()})
SIGNATURES["cx"] = (0, 2)

# names only available after `include "qelib1.inc"` (U and CX are primitive)
QELIB1 = frozenset(SIGNATURES) - {"U", "CX"}


def gate_matrix(name: str, params=()) -> GateMatrix:
    """Matrix for a builtin gate; raises SemanticError for unknown names."""
    if name in _FIXED:
        if params:
            raise SemanticError(None, f"gate {name} takes no parameters")
        return GateMatrix(name, _FIXED[name])
    if name in _PARAMETRIC:
        n, fn = _PARAMETRIC[name]
        if len(params) != n:
            raise SemanticError(None, f"gate {name} takes {n} parameter(s)")
        return GateMatrix(name, fn(*params))
    raise SemanticError(None, f"unknown gate {name}")
