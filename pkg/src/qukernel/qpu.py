"""Simulated quantum processor: coupling topology, per-element fidelities with
exponential drift toward a floor, qubit allocation, and the executable /
calibration region split."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

FREE, BUSY, CALIBRATING = "free", "busy", "calibrating"


class QpuError(ValueError):
    pass


@dataclass(frozen=True)
class Topology:
    n_qubits: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n_qubits < 2:
            raise QpuError(f"topology needs at least 2 qubits, got {self.n_qubits}")
        seen = set()
        for a, b in self.edges:
            if a == b:
                raise QpuError(f"self-loop on qubit {a}")
            if not (0 <= a < self.n_qubits and 0 <= b < self.n_qubits):
                raise QpuError(f"edge ({a},{b}) out of range")
            key = (min(a, b), max(a, b))
            if key in seen:
                raise QpuError(f"duplicate edge {key}")
            seen.add(key)
        object.__setattr__(self, "edges", tuple(sorted(seen)))
        if not self._connected():
            raise QpuError("topology is not connected")

    def _connected(self) -> bool:
        adj = self.adjacency()
        seen = {0}
        dq = deque([0])
        while dq:
            u = dq.popleft()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    dq.append(v)
        return len(seen) == self.n_qubits

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n_qubits)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return [sorted(ns) for ns in adj]

    def has_edge(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in set(self.edges)

    def distances(self) -> list[list[int]]:
        """All-pairs BFS hop counts; -1 where unreachable."""
        n = self.n_qubits
        adj = self.adjacency()
        dist = [[-1] * n for _ in range(n)]
        for s in range(n):
            dist[s][s] = 0
            dq = deque([s])
            while dq:
                u = dq.popleft()
                for v in adj[u]:
                    if dist[s][v] == -1:
                        dist[s][v] = dist[s][u] + 1
                        dq.append(v)
        return dist


def grid_topology(rows: int, cols: int) -> Topology:
    """Grid with qubit index r*cols + c and nearest-neighbour coupling."""
    edges = []
    for r in range(rows):
        for c in range(cols):
            q = r * cols + c
            if c + 1 < cols:
                edges.append((q, q + 1))
            if r + 1 < rows:
                edges.append((q, q + cols))
    return Topology(rows * cols, tuple(edges))


@dataclass
class FidelityState:
    single: np.ndarray  # per-qubit single-gate fidelity
    measure: np.ndarray  # per-qubit measurement fidelity
    two: dict[tuple[int, int], float]  # per-edge two-qubit fidelity
    baseline_single: np.ndarray
    baseline_measure: np.ndarray
    baseline_two: dict[tuple[int, int], float]
    last_update: int = 0


@dataclass
class DriftParams:
    """Exponential relaxation toward a floor, optionally with multiplicative
    log-normal jitter. jitter_sigma=0 consumes no randomness."""

    tau_single: float = 100000.0
    tau_two: float = 100000.0
    tau_measure: float = 100000.0
    floor_single: float = 0.8
    floor_two: float = 0.8
    floor_measure: float = 0.8
    jitter_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for tau in (self.tau_single, self.tau_two, self.tau_measure):
            if tau <= 0:
                raise QpuError(f"tau must be positive, got {tau}")
        for floor in (self.floor_single, self.floor_two, self.floor_measure):
            if not 0.0 <= floor < 1.0:
                raise QpuError(f"floor must be in [0, 1), got {floor}")

    @classmethod
    def uniform(cls, tau: float, floor: float, jitter_sigma: float = 0.0, seed: int = 0):
        return cls(tau, tau, tau, floor, floor, floor, jitter_sigma, seed)


@dataclass
class QpuModel:
    id: str
    topology: Topology
    fidelity: FidelityState
    drift: DriftParams
    allocation: dict[int, str] = field(default_factory=dict)
    executable: set[int] = field(default_factory=set)
    calibration_region: set[int] = field(default_factory=set)
    rng: np.random.Generator = None  # type: ignore[assignment]
    fidelity_version: int = 0
    allocation_version: int = 0

    @property
    def n_qubits(self) -> int:
        return self.topology.n_qubits

    def free_executable(self) -> set[int]:
        return {q for q in self.executable if self.allocation[q] == FREE}

    def apply_drift(self, dt: int) -> "QpuModel":
        """Relax every fidelity toward its floor over ``dt`` simulated seconds."""
        if dt < 0:
            raise QpuError(f"dt must be >= 0, got {dt}")
        if dt == 0:
            return self
        fs = self.fidelity
        dp = self.drift

        def decay(value, floor, tau):
            return floor + (value - floor) * math.exp(-dt / tau)

        fs.single = dp.floor_single + (fs.single - dp.floor_single) * math.exp(-dt / dp.tau_single)
        for e in sorted(fs.two):
            fs.two[e] = decay(fs.two[e], dp.floor_two, dp.tau_two)
        fs.measure = dp.floor_measure + (fs.measure - dp.floor_measure) * math.exp(
            -dt / dp.tau_measure
        )
        if dp.jitter_sigma > 0.0:
            jit = np.exp(self.rng.normal(0.0, dp.jitter_sigma, size=fs.single.size))
            fs.single = np.clip(fs.single * jit, dp.floor_single, 1.0)
            for e in sorted(fs.two):
                j = math.exp(self.rng.normal(0.0, dp.jitter_sigma))
                fs.two[e] = min(1.0, max(dp.floor_two, fs.two[e] * j))
            jit = np.exp(self.rng.normal(0.0, dp.jitter_sigma, size=fs.measure.size))
            fs.measure = np.clip(fs.measure * jit, dp.floor_measure, 1.0)
        fs.last_update += dt
        self.fidelity_version += 1
        return self

    def partition_regions(self, calib_targets: set[int]) -> "QpuModel":
        """Move ``calib_targets`` into the calibration region (marking them
        calibrating); everything else becomes executable."""
        targets = set(calib_targets)
        for q in targets:
            if not 0 <= q < self.n_qubits:
                raise QpuError(f"qubit {q} out of range")
            if self.allocation[q] != FREE:
                raise QpuError(f"qubit {q} is {self.allocation[q]}, cannot enter calibration")
        for q in sorted(self.calibration_region - targets):
            if self.allocation[q] == CALIBRATING:
                self.allocation[q] = FREE
        self.calibration_region = targets
        self.executable = set(range(self.n_qubits)) - targets
        for q in targets:
            self.allocation[q] = CALIBRATING
        self.allocation_version += 1
        return self

    def allocate_qubits(self, qubits: set[int]) -> bool:
        """Grant the set only if every qubit is free and executable; refusal is a
        plain False, not an error."""
        qubits = set(qubits)
        for q in qubits:
            if not 0 <= q < self.n_qubits:
                return False
            if self.allocation[q] != FREE or q not in self.executable:
                return False
        for q in qubits:
            self.allocation[q] = BUSY
        self.allocation_version += 1
        return True

    def release_qubits(self, qubits: set[int]) -> "QpuModel":
        for q in sorted(qubits):
            if self.allocation.get(q) not in (BUSY, CALIBRATING):
                raise QpuError(f"qubit {q} is not busy or calibrating")
        for q in sorted(qubits):
            if self.allocation[q] == CALIBRATING:
                self.calibration_region.discard(q)
                self.executable.add(q)
            self.allocation[q] = FREE
        self.allocation_version += 1
        return self

    def fidelity_rows(self, t: int) -> list[tuple[int, str, float]]:
        """Trace rows (timestamp, element, value) for CSV export."""
        rows = []
        for q in range(self.n_qubits):
            rows.append((t, f"single:{q}", float(self.fidelity.single[q])))
        for a, b in sorted(self.fidelity.two):
            rows.append((t, f"two:{a}-{b}", self.fidelity.two[(a, b)]))
        for q in range(self.n_qubits):
            rows.append((t, f"measure:{q}", float(self.fidelity.measure[q])))
        return rows


def build_qpu(
    qpu_id: str,
    topology: Topology,
    single: float | dict[int, float],
    two: float | dict[tuple[int, int], float],
    measure: float | dict[int, float],
    drift: DriftParams | None = None,
) -> QpuModel:
    """Assemble a QPU with all qubits free and the whole chip executable.
    Scalar fidelities apply uniformly; dicts override per element."""
    n = topology.n_qubits
    drift = drift or DriftParams()

    def per_qubit(spec) -> np.ndarray:
        arr = np.full(n, spec if isinstance(spec, (int, float)) else spec.get("default", 1.0))
        if isinstance(spec, dict):
            for q, v in spec.items():
                if q == "default":
                    continue
                arr[q] = v
        return arr.astype(float)

    def per_edge(spec) -> dict[tuple[int, int], float]:
        if isinstance(spec, (int, float)):
            return {e: float(spec) for e in topology.edges}
        out = {e: float(spec.get("default", 1.0)) for e in topology.edges}
        for key, v in spec.items():
            if key == "default":
                continue
            e = (min(key), max(key))
            if e not in out:
                raise QpuError(f"fidelity for non-edge {e}")
            out[e] = float(v)
        return out

    single_arr, measure_arr = per_qubit(single), per_qubit(measure)
    two_map = per_edge(two)
    for v in list(single_arr) + list(measure_arr) + list(two_map.values()):
        if not 0.0 <= v <= 1.0:
            raise QpuError(f"fidelity {v} outside [0, 1]")
    floors = {"single": drift.floor_single, "two": drift.floor_two, "measure": drift.floor_measure}
    if single_arr.min() < floors["single"] or measure_arr.min() < floors["measure"]:
        raise QpuError("initial qubit fidelity below the drift floor")
    if two_map and min(two_map.values()) < floors["two"]:
        raise QpuError("initial edge fidelity below the drift floor")

    fidelity = FidelityState(
        single=single_arr.copy(),
        measure=measure_arr.copy(),
        two=dict(two_map),
        baseline_single=single_arr.copy(),
        baseline_measure=measure_arr.copy(),
        baseline_two=dict(two_map),
    )
    return QpuModel(
        id=qpu_id,
        topology=topology,
        fidelity=fidelity,
        drift=drift,
        allocation={q: FREE for q in range(n)},
        executable=set(range(n)),
        calibration_region=set(),
        rng=np.random.default_rng(drift.seed),
    )


def split_grid_qpu(
    qpu_id: str = "qpu0",
    right_single: float = 0.99,
    left_single: float = 0.90,
    right_two: float = 0.97,
    left_two: float = 0.88,
    drift: DriftParams | None = None,
) -> QpuModel:
    """The 8-qubit 2x4 grid with better fidelity on the right half (columns 2-3,
    qubits {2,3,6,7}). Edges count as right only when both endpoints are."""
    topo = grid_topology(2, 4)
    right = {2, 3, 6, 7}
    single = {q: (right_single if q in right else left_single) for q in range(8)}
    measure = dict(single)
    two = {e: (right_two if e[0] in right and e[1] in right else left_two) for e in topo.edges}
    return build_qpu(qpu_id, topo, single, two, measure, drift)
