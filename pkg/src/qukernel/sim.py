"""Simulation of native circuits: pure-state ideal evolution and deterministic
density-matrix evolution under depolarizing gate noise and measurement bit flips.

Convention: qubit 0 is the leftmost character of a bitstring (most significant
bit of a basis index). Distributions are reported over the measured qubits in
ascending order, or over all qubits when the circuit has no MEASURE gates.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, check_valid
from .decompose import decompose_to_native
from .gates import GateKind, gate_matrix

MAX_QUBITS = 10
_TRACE_TOL = 1e-9
_PROB_EPS = 1e-15


class SimulationError(ValueError):
    pass


@dataclass
class NoiseSpec:
    """Per-element error probabilities: depolarizing after each gate, classical
    bit flip on measurement. Dict entries override the class-wide default."""

    single_default: float = 0.0
    two_default: float = 0.0
    measure_default: float = 0.0
    single: dict[int, float] = field(default_factory=dict)
    two: dict[tuple[int, int], float] = field(default_factory=dict)
    measure: dict[int, float] = field(default_factory=dict)

    def p_single(self, q: int) -> float:
        return self.single.get(q, self.single_default)

    def p_two(self, a: int, b: int) -> float:
        return self.two.get((min(a, b), max(a, b)), self.two_default)

    def p_measure(self, q: int) -> float:
        return self.measure.get(q, self.measure_default)

    def validate(self) -> None:
        values = (
            [self.single_default, self.two_default, self.measure_default]
            + list(self.single.values())
            + list(self.two.values())
            + list(self.measure.values())
        )
        for p in values:
            if not 0.0 <= p <= 1.0:
                raise SimulationError(f"noise probability {p} outside [0, 1]")


def noise_from_qpu(qpu) -> NoiseSpec:
    """p = 1 - fidelity for each element class of a QPU model."""
    fs = qpu.fidelity
    spec = NoiseSpec(
        single={q: 1.0 - fs.single[q] for q in range(qpu.topology.n_qubits)},
        two={e: 1.0 - f for e, f in fs.two.items()},
        measure={q: 1.0 - fs.measure[q] for q in range(qpu.topology.n_qubits)},
    )
    spec.validate()
    return spec


@dataclass
class IdealResult:
    state: np.ndarray  # flat statevector of length 2^n
    dist: dict[str, float]
    measured: list[int]


@dataclass
class NoisyResult:
    rho: np.ndarray  # (2^n, 2^n) density matrix
    dist: dict[str, float]
    measured: list[int]
    max_trace_error: float


def _check_native(c: Circuit) -> None:
    check_valid(c)
    if c.n_qubits > MAX_QUBITS:
        raise SimulationError(f"{c.n_qubits} qubits exceeds the {MAX_QUBITS}-qubit limit")
    for g in c.gates:
        if g.kind not in (GateKind.U3, GateKind.CZ, GateKind.MEASURE):
            raise SimulationError(f"non-native gate {g.kind.value}; decompose first")


def _apply_gate_state(state: np.ndarray, u: np.ndarray, qubits: tuple[int, ...]) -> np.ndarray:
    k = len(qubits)
    ut = u.reshape((2,) * (2 * k))
    out = np.tensordot(ut, state, axes=(list(range(k, 2 * k)), list(qubits)))
    return np.moveaxis(out, list(range(k)), list(qubits))


def _apply_gate_rho(rho: np.ndarray, n: int, u: np.ndarray, qubits: tuple[int, ...]) -> np.ndarray:
    k = len(qubits)
    ut = u.reshape((2,) * (2 * k))
    rho = np.tensordot(ut, rho, axes=(list(range(k, 2 * k)), list(qubits)))
    rho = np.moveaxis(rho, list(range(k)), list(qubits))
    col_axes = [n + q for q in qubits]
    rho = np.tensordot(ut.conj(), rho, axes=(list(range(k, 2 * k)), col_axes))
    return np.moveaxis(rho, list(range(k)), col_axes)


def _replace_with_mixed(rho: np.ndarray, n: int, qubits: tuple[int, ...], weight: float) -> np.ndarray:
    """rho <- (1-weight)*rho + weight * (I/2^k on qubits) (x) tr_qubits(rho)."""
    if weight == 0.0:
        return rho
    k = len(qubits)
    rest = [q for q in range(n) if q not in qubits]
    letters = string.ascii_letters
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for q in qubits:
        col[q] = row[q]
    out_sub = "".join(row[q] for q in rest) + "".join(col[q] for q in rest)
    traced = np.einsum("".join(row) + "".join(col) + "->" + out_sub, rho)
    mixed = (np.eye(2**k, dtype=complex) / 2**k).reshape((2,) * (2 * k))
    prod = np.tensordot(traced, mixed, axes=0)
    r = len(rest)
    src = list(range(2 * r + 2 * k))
    dst = (
        [rest[i] for i in range(r)]
        + [n + rest[i] for i in range(r)]
        + [qubits[j] for j in range(k)]
        + [n + qubits[j] for j in range(k)]
    )
    rebuilt = np.moveaxis(prod, src, dst)
    return (1.0 - weight) * rho + weight * rebuilt


def _probs_from_state(state: np.ndarray) -> np.ndarray:
    return (state.real**2 + state.imag**2).astype(float)


def _probs_from_rho(rho: np.ndarray, n: int) -> np.ndarray:
    letters = string.ascii_letters
    sub = letters[:n] + letters[:n] + "->" + letters[:n]
    return np.real(np.einsum(sub, rho))


def marginal_probs(probs: np.ndarray, qubits: list[int]) -> np.ndarray:
    """Marginal over ``qubits`` in the given order (not necessarily ascending)."""
    n = probs.ndim
    drop = [q for q in range(n) if q not in qubits]
    out = probs.sum(axis=tuple(drop)) if drop else probs
    kept = [q for q in range(n) if q in qubits]  # ascending survivors
    perm = [kept.index(q) for q in qubits]
    return out.transpose(perm)


def _dist_dict(probs: np.ndarray) -> dict[str, float]:
    flat = probs.reshape(-1)
    m = probs.ndim
    out = {}
    for idx in range(flat.size):
        p = float(flat[idx])
        if p > _PROB_EPS:
            out[format(idx, f"0{m}b")] = p
    return out


def _apply_measure_flips(probs: np.ndarray, measured: list[int], noise: NoiseSpec) -> np.ndarray:
    for axis, q in enumerate(measured):
        p = noise.p_measure(q)
        if p > 0.0:
            probs = (1.0 - p) * probs + p * np.flip(probs, axis=axis)
    return probs


def tv_distance(d1: dict[str, float], d2: dict[str, float]) -> float:
    keys = set(d1) | set(d2)
    return 0.5 * sum(abs(d1.get(k, 0.0) - d2.get(k, 0.0)) for k in keys)


def _measured_or_all(c: Circuit) -> list[int]:
    measured = c.measured_qubits()
    return measured if measured else list(range(c.n_qubits))


def simulate_ideal(c: Circuit) -> IdealResult:
    """Noiseless pure-state evolution from |0...0> with the Born-rule distribution."""
    _check_native(c)
    n = c.n_qubits
    state = np.zeros((2,) * n, dtype=complex)
    state[(0,) * n] = 1.0
    for g in c.gates:
        if g.kind is GateKind.MEASURE:
            continue
        state = _apply_gate_state(state, gate_matrix(g.kind, g.params), g.qubits)
    measured = _measured_or_all(c)
    probs = marginal_probs(_probs_from_state(state), measured)
    return IdealResult(state.reshape(-1), _dist_dict(probs), measured)


def simulate_noisy(c: Circuit, noise: NoiseSpec) -> NoisyResult:
    """Density-matrix evolution: a depolarizing channel after every gate on its
    operands, then independent classical bit flips on the measured qubits. Fully
    deterministic; no sampling."""
    _check_native(c)
    noise.validate()
    n = c.n_qubits
    rho = np.zeros((2,) * (2 * n), dtype=complex)
    rho[(0,) * (2 * n)] = 1.0
    max_err = 0.0
    for g in c.gates:
        if g.kind is GateKind.MEASURE:
            continue
        rho = _apply_gate_rho(rho, n, gate_matrix(g.kind, g.params), g.qubits)
        if g.kind is GateKind.CZ:
            p = noise.p_two(g.qubits[0], g.qubits[1])
            # the uniform 15-Pauli channel, folded into one mixed-replacement step
            rho = _replace_with_mixed(rho, n, g.qubits, 16.0 * p / 15.0)
        else:
            rho = _replace_with_mixed(rho, n, g.qubits, noise.p_single(g.qubits[0]))
        err = abs(float(np.real(np.einsum(_trace_sub(n), rho))) - 1.0)
        max_err = max(max_err, err)
        if err > _TRACE_TOL:
            raise SimulationError(f"trace drifted by {err:.3e} after gate {g.kind.value}")
    measured = _measured_or_all(c)
    probs = marginal_probs(_probs_from_rho(rho, n), measured)
    probs = _apply_measure_flips(probs, measured, noise)
    return NoisyResult(rho.reshape(2**n, 2**n), _dist_dict(probs), measured, max_err)


def _trace_sub(n: int) -> str:
    letters = string.ascii_letters
    return letters[:n] + letters[:n] + "->"


def state_fidelity(psi: np.ndarray, rho: np.ndarray) -> float:
    """<psi|rho|psi> for a pure reference state against a density matrix."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (psi.size, psi.size):
        raise SimulationError(f"dimension mismatch: state {psi.size}, rho {rho.shape}")
    return float(np.real(psi.conj() @ rho @ psi))


@dataclass
class EquivalenceReport:
    passed: bool
    tv: float


def assert_equivalent(
    original: Circuit, mapped: Circuit, final_map: dict[int, int], tol: float = 1e-9
) -> EquivalenceReport:
    """Check that the mapped circuit reproduces the original's noiseless output
    distribution once logical labels are relabeled through ``final_map``."""
    orig = decompose_to_native(original)
    phys = decompose_to_native(mapped)
    measured = _measured_or_all(orig)
    for q in measured:
        if q not in final_map:
            raise SimulationError(f"final map is missing logical qubit {q}")
        if not 0 <= final_map[q] < phys.n_qubits:
            raise SimulationError(f"final map sends qubit {q} outside the mapped circuit")
    if len(set(final_map.values())) != len(final_map):
        raise SimulationError("final map is not injective")

    n_o, n_m = orig.n_qubits, phys.n_qubits
    state_o = np.zeros((2,) * n_o, dtype=complex)
    state_o[(0,) * n_o] = 1.0
    for g in orig.gates:
        if g.kind is not GateKind.MEASURE:
            state_o = _apply_gate_state(state_o, gate_matrix(g.kind, g.params), g.qubits)
    state_m = np.zeros((2,) * n_m, dtype=complex)
    state_m[(0,) * n_m] = 1.0
    for g in phys.gates:
        if g.kind is not GateKind.MEASURE:
            state_m = _apply_gate_state(state_m, gate_matrix(g.kind, g.params), g.qubits)

    d_o = _dist_dict(marginal_probs(_probs_from_state(state_o), measured))
    d_m = _dist_dict(marginal_probs(_probs_from_state(state_m), [final_map[q] for q in measured]))
    tv = tv_distance(d_o, d_m)
    return EquivalenceReport(tv < tol, tv)


def distribution_csv(dist: dict[str, float]) -> str:
    """Export a distribution as ``bitstring,probability`` rows."""
    lines = ["bitstring,probability"]
    for key in sorted(dist):
        lines.append(f"{key},{dist[key]!r}")
    return "\n".join(lines) + "\n"
