"""Gate catalog: kinds, arities, parameter counts and unitary matrices."""

from __future__ import annotations

import cmath
import math
from enum import Enum

import numpy as np


class GateKind(Enum):
    H = "H"
    S = "S"
    T = "T"
    X = "X"
    Y = "Y"
    Z = "Z"
    U3 = "U3"
    CNOT = "CNOT"
    CZ = "CZ"
    SWAP = "SWAP"
    CU = "CU"
    TOFFOLI = "TOFFOLI"
    CR = "CR"
    ISWAP = "ISWAP"
    MEASURE = "MEASURE"


# operand count per kind
GATE_ARITY = {
    GateKind.H: 1,
    GateKind.S: 1,
    GateKind.T: 1,
    GateKind.X: 1,
    GateKind.Y: 1,
    GateKind.Z: 1,
    GateKind.U3: 1,
    GateKind.CNOT: 2,
    GateKind.CZ: 2,
    GateKind.SWAP: 2,
    GateKind.CU: 2,
    GateKind.TOFFOLI: 3,
    GateKind.CR: 2,
    GateKind.ISWAP: 2,
    GateKind.MEASURE: 1,
}

# real parameter count per kind (CU carries a 2x2 complex matrix as re/im pairs)
GATE_PARAM_COUNT = {
    GateKind.U3: 3,
    GateKind.CR: 1,
    GateKind.ISWAP: 1,
    GateKind.CU: 8,
}

NATIVE_KINDS = frozenset({GateKind.U3, GateKind.CZ, GateKind.MEASURE})


def u3_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array(
        [
            [c, -cmath.exp(1j * lam) * s],
            [cmath.exp(1j * phi) * s, cmath.exp(1j * (lam + phi)) * c],
        ],
        dtype=complex,
    )


def _cu_matrix(params: tuple[float, ...]) -> np.ndarray:
    re = params[0::2]
    im = params[1::2]
    u = np.array(
        [[re[0] + 1j * im[0], re[1] + 1j * im[1]], [re[2] + 1j * im[2], re[3] + 1j * im[3]]],
        dtype=complex,
    )
    if not np.allclose(u @ u.conj().T, np.eye(2), atol=1e-9):
        raise ValueError("CU parameters do not form a unitary 2x2 matrix")
    out = np.eye(4, dtype=complex)
    out[2:, 2:] = u
    return out


_SQ2 = 1.0 / math.sqrt(2.0)

_FIXED = {
    GateKind.H: np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    GateKind.S: np.array([[1, 0], [0, 1j]], dtype=complex),
    GateKind.T: np.array([[1, 0], [0, cmath.exp(1j * math.pi / 4)]], dtype=complex),
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    GateKind.Z: np.array([[1, 0], [0, -1]], dtype=complex),
    GateKind.CNOT: np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    GateKind.CZ: np.diag([1, 1, 1, -1]).astype(complex),
    GateKind.SWAP: np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}

_TOFFOLI = np.eye(8, dtype=complex)
_TOFFOLI[[6, 7]] = _TOFFOLI[[7, 6]]


def gate_matrix(kind: GateKind, params: tuple[float, ...] = ()) -> np.ndarray:
    """Unitary matrix of a catalog gate. MEASURE has no unitary."""
    if not isinstance(kind, GateKind):
        raise ValueError(f"unknown gate kind: {kind!r}")
    expected = GATE_PARAM_COUNT.get(kind, 0)
    if len(params) != expected:
        raise ValueError(f"{kind.value} takes {expected} parameter(s), got {len(params)}")
    if kind is GateKind.MEASURE:
        raise ValueError("MEASURE has no unitary matrix")
    if kind in _FIXED:
        return _FIXED[kind].copy()
    if kind is GateKind.U3:
        return u3_matrix(*params)
    if kind is GateKind.TOFFOLI:
        return _TOFFOLI.copy()
    if kind is GateKind.CR:
        return np.diag([1, 1, 1, cmath.exp(1j * params[0])]).astype(complex)
    if kind is GateKind.ISWAP:
        c, s = math.cos(params[0] / 2.0), math.sin(params[0] / 2.0)
        return np.array(
            [[1, 0, 0, 0], [0, c, 1j * s, 0], [0, 1j * s, c, 0], [0, 0, 0, 1]], dtype=complex
        )
    if kind is GateKind.CU:
        return _cu_matrix(params)
    raise ValueError(f"unknown gate kind: {kind!r}")
