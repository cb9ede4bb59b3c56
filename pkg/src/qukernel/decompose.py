"""Rewrite catalog circuits into the native gate set {U3, CZ, MEASURE}.

All rules are exact up to a global phase (CNOT, SWAP, CR and TOFFOLI are exact
outright), so the noiseless output distribution is always preserved.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .circuit import Circuit, Gate, check_valid
from .gates import GateKind, gate_matrix

_PI = math.pi

# fixed single-qubit gates as exact U3 angles
_SINGLE_AS_U3 = {
    GateKind.H: (_PI / 2, 0.0, _PI),
    GateKind.X: (_PI, 0.0, _PI),
    GateKind.Y: (_PI, _PI / 2, _PI / 2),
    GateKind.Z: (0.0, 0.0, _PI),
    GateKind.S: (0.0, 0.0, _PI / 2),
    GateKind.T: (0.0, 0.0, _PI / 4),
}


def _u3(q: int, theta: float, phi: float, lam: float) -> Gate:
    return Gate(GateKind.U3, (q,), (theta, phi, lam))


def _hadamard(q: int) -> Gate:
    return _u3(q, _PI / 2, 0.0, _PI)


def _phase(q: int, angle: float) -> Gate:
    # diag(1, e^{i*angle})
    return _u3(q, 0.0, 0.0, angle)


def _rx(q: int, angle: float) -> Gate:
    return _u3(q, angle, -_PI / 2, _PI / 2)


def _cnot(c: int, t: int) -> list[Gate]:
    return [_hadamard(t), Gate(GateKind.CZ, (c, t)), _hadamard(t)]


def _swap(a: int, b: int) -> list[Gate]:
    return _cnot(a, b) + _cnot(b, a) + _cnot(a, b)


def _cr(c: int, t: int, theta: float) -> list[Gate]:
    # controlled phase: P(t/2) on both, then CNOT-conjugated P(-t/2); exact
    return (
        [_phase(c, theta / 2), _phase(t, theta / 2)]
        + _cnot(c, t)
        + [_phase(t, -theta / 2)]
        + _cnot(c, t)
    )


def _rzz(a: int, b: int, angle: float) -> list[Gate]:
    return _cnot(a, b) + [_phase(b, angle)] + _cnot(a, b)


def _iswap(a: int, b: int, theta: float) -> list[Gate]:
    # exp(i*(theta/4)*(XX+YY)) as commuting XX and YY rotations
    rxx = [_hadamard(a), _hadamard(b)] + _rzz(a, b, -theta / 2) + [_hadamard(a), _hadamard(b)]
    ryy = (
        [_rx(a, _PI / 2), _rx(b, _PI / 2)]
        + _rzz(a, b, -theta / 2)
        + [_rx(a, -_PI / 2), _rx(b, -_PI / 2)]
    )
    return rxx + ryy


def _toffoli(a: int, b: int, t: int) -> list[Gate]:
    tg = _phase(t, _PI / 4)
    out = [_hadamard(t)]
    out += _cnot(b, t)
    out += [_phase(t, -_PI / 4)]
    out += _cnot(a, t)
    out += [tg]
    out += _cnot(b, t)
    out += [_phase(t, -_PI / 4)]
    out += _cnot(a, t)
    out += [_phase(b, _PI / 4), tg, _hadamard(t)]
    out += _cnot(a, b)
    out += [_phase(a, _PI / 4), _phase(b, -_PI / 4)]
    out += _cnot(a, b)
    return out


def native_swap_gates(a: int, b: int) -> list[Gate]:
    """A routed SWAP in native form: three CNOTs, each as H-CZ-H."""
    return _swap(a, b)


def zyz_angles(u: np.ndarray) -> tuple[float, float, float, float]:
    """Decompose a 2x2 unitary as e^{i*alpha} Rz(beta) Ry(gamma) Rz(delta)."""
    det = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]
    alpha = cmath.phase(det) / 2.0
    v = u * cmath.exp(-1j * alpha)
    gamma = 2.0 * math.atan2(abs(v[1, 0]), abs(v[0, 0]))
    if abs(v[0, 0]) < 1e-12:
        # anti-diagonal: only beta - delta matters
        beta = 2.0 * cmath.phase(v[1, 0])
        delta = 0.0
    elif abs(v[1, 0]) < 1e-12:
        # diagonal: only beta + delta matters
        beta = 2.0 * cmath.phase(v[1, 1])
        delta = 0.0
    else:
        beta = cmath.phase(v[1, 1]) + cmath.phase(v[1, 0])
        delta = cmath.phase(v[1, 1]) - cmath.phase(v[1, 0])
    return alpha, beta, gamma, delta


def u3_params(u: np.ndarray) -> tuple[float, float, float]:
    """Angles such that U3(theta, phi, lam) equals ``u`` up to a global phase."""
    _, beta, gamma, delta = zyz_angles(u)
    return gamma, beta, delta


def _rz_mat(angle: float) -> np.ndarray:
    return np.diag([cmath.exp(-1j * angle / 2), cmath.exp(1j * angle / 2)])


def _ry_mat(angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _cu(c: int, t: int, params: tuple[float, ...]) -> list[Gate]:
    # ABC construction: U = e^{i*alpha} A X B X C with A B C = I
    u = gate_matrix(GateKind.CU, params)[2:, 2:]
    alpha, beta, gamma, delta = zyz_angles(u)
    a_mat = _rz_mat(beta) @ _ry_mat(gamma / 2)
    b_mat = _ry_mat(-gamma / 2) @ _rz_mat(-(delta + beta) / 2)
    out = [_phase(t, (delta - beta) / 2)]
    out += _cnot(c, t)
    out += [_u3(t, *u3_params(b_mat))]
    out += _cnot(c, t)
    out += [_u3(t, *u3_params(a_mat))]
    out += [_phase(c, alpha)]
    return out


def decompose_gate(g: Gate) -> list[Gate]:
    if g.kind in (GateKind.U3, GateKind.CZ, GateKind.MEASURE):
        return [g]
    if g.kind in _SINGLE_AS_U3:
        return [_u3(g.qubits[0], *_SINGLE_AS_U3[g.kind])]
    if g.kind is GateKind.CNOT:
        return _cnot(*g.qubits)
    if g.kind is GateKind.SWAP:
        return _swap(*g.qubits)
    if g.kind is GateKind.CR:
        return _cr(g.qubits[0], g.qubits[1], g.params[0])
    if g.kind is GateKind.ISWAP:
        return _iswap(g.qubits[0], g.qubits[1], g.params[0])
    if g.kind is GateKind.TOFFOLI:
        return _toffoli(*g.qubits)
    if g.kind is GateKind.CU:
        return _cu(g.qubits[0], g.qubits[1], g.params)
    raise ValueError(f"no decomposition rule for {g.kind!r}")


def decompose_to_native(c: Circuit) -> Circuit:
    """Rewrite onto {U3, CZ, MEASURE} preserving the output distribution."""
    check_valid(c)
    out = Circuit(c.n_qubits)
    for g in c.gates:
        out.gates.extend(decompose_gate(g))
    return out


def is_native(c: Circuit) -> bool:
    return all(g.kind in (GateKind.U3, GateKind.CZ, GateKind.MEASURE) for g in c.gates)
