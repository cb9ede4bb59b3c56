"""Online automatic calibration: threshold checks, adaptive check intervals,
calibration-task generation, and fidelity restoration inside the calibration
region."""

from __future__ import annotations

from dataclasses import dataclass, field

from .qpu import QpuModel
from .scheduler import CALIBRATION, QuantumTask


class CalibrationError(ValueError):
    pass


@dataclass
class CalibrationPolicy:
    single_threshold: float = 0.98  # also applied to measurement fidelity
    double_threshold: float = 0.95
    interval_max: int = 3600
    interval_min: int = 1200
    interval_step: int = 1200
    calib_duration: int = 300  # seconds per target qubit
    priority: int = 100

    def __post_init__(self):
        if not (0.0 < self.single_threshold < 1.0 and 0.0 < self.double_threshold < 1.0):
            raise CalibrationError("thresholds must lie strictly inside (0, 1)")
        if self.interval_min > self.interval_max:
            raise CalibrationError("interval_min must not exceed interval_max")
        if self.interval_step <= 0:
            raise CalibrationError("interval_step must be positive")
        if self.calib_duration <= 0:
            raise CalibrationError("calib_duration must be positive")


@dataclass
class CalibrationState:
    current_interval: int
    next_check_time: int
    flagged_qubits: set[int] = field(default_factory=set)
    flagged_edges: set[tuple[int, int]] = field(default_factory=set)


def check_fidelities(qpu: QpuModel, policy: CalibrationPolicy):
    """Elements currently below threshold: qubits whose single-gate or
    measurement fidelity dropped, and edges whose two-gate fidelity dropped."""
    fs = qpu.fidelity
    qubits = sorted(
        q
        for q in range(qpu.n_qubits)
        if fs.single[q] < policy.single_threshold or fs.measure[q] < policy.single_threshold
    )
    edges = sorted(e for e in fs.two if fs.two[e] < policy.double_threshold)
    return qubits, edges


def update_interval(state: CalibrationState, policy: CalibrationPolicy, triggered: bool):
    """Shorten the check interval stepwise while quiet; reset to the maximum
    whenever a calibration fires."""
    if triggered:
        state.current_interval = policy.interval_max
    else:
        state.current_interval = max(policy.interval_min, state.current_interval - policy.interval_step)
    return state


def build_calibration_task(
    qpu: QpuModel,
    flagged_qubits: list[int],
    flagged_edges: list[tuple[int, int]],
    policy: CalibrationPolicy,
    now: int,
) -> QuantumTask:
    """Calibration task covering the flagged qubits and flagged edges' endpoints."""
    targets = set(flagged_qubits)
    for a, b in flagged_edges:
        targets.update((a, b))
    if not targets:
        raise CalibrationError("no flagged elements to calibrate")
    return QuantumTask(
        n_qubits_required=len(targets),
        program=None,
        qpu_id=qpu.id,
        task_type=CALIBRATION,
        priority=policy.priority,
        submit_time=now,
        est_runtime=policy.calib_duration * len(targets),
        explicit_qubits=frozenset(targets),
    )


def apply_calibration(
    qpu: QpuModel, targets: set[int], policy: CalibrationPolicy | None = None
) -> QpuModel:
    """Restore each target element to baseline times a seeded factor in
    [0.998, 1.0]; edges are restored only when both endpoints are targets, so
    the executable region is never touched."""
    targets = set(targets)
    for q in sorted(targets):
        if q not in qpu.calibration_region:
            raise CalibrationError(f"qubit {q} is not in the calibration region")
    fs = qpu.fidelity
    for q in sorted(targets):
        fs.single[q] = min(1.0, fs.baseline_single[q] * qpu.rng.uniform(0.998, 1.0))
        fs.measure[q] = min(1.0, fs.baseline_measure[q] * qpu.rng.uniform(0.998, 1.0))
    for e in sorted(fs.two):
        if e[0] in targets and e[1] in targets:
            fs.two[e] = min(1.0, fs.baseline_two[e] * qpu.rng.uniform(0.998, 1.0))
    if policy is not None:
        for q in sorted(targets):
            assert fs.single[q] >= policy.single_threshold, (
                f"restored single fidelity {fs.single[q]} below threshold on qubit {q}"
            )
            assert fs.measure[q] >= policy.single_threshold, (
                f"restored measure fidelity {fs.measure[q]} below threshold on qubit {q}"
            )
        for e in sorted(fs.two):
            if e[0] in targets and e[1] in targets:
                assert fs.two[e] >= policy.double_threshold, (
                    f"restored two-gate fidelity {fs.two[e]} below threshold on edge {e}"
                )
    qpu.fidelity_version += 1
    return qpu


class CalibrationService:
    """Periodic monitor wired into the kernel event loop: check fidelities at
    the adaptive interval, enqueue one calibration task per flagged batch, and
    clear flags when the scheduler reports restoration."""

    def __init__(self, qpu: QpuModel, policy: CalibrationPolicy, start_time: int = 0):
        self.qpu = qpu
        self.policy = policy
        self.state = CalibrationState(
            current_interval=policy.interval_max,
            next_check_time=start_time + policy.interval_max,
        )

    def run_check(self, now: int, scheduler) -> QuantumTask | None:
        """Execute one check: flag fresh offenders, submit a calibration task for
        them, adapt the interval, and schedule the next check."""
        qubits, edges = check_fidelities(self.qpu, self.policy)
        new_qubits = [q for q in qubits if q not in self.state.flagged_qubits]
        new_edges = [e for e in edges if e not in self.state.flagged_edges]
        task = None
        triggered = bool(new_qubits or new_edges)
        if triggered:
            task = build_calibration_task(self.qpu, new_qubits, new_edges, self.policy, now)
            self.state.flagged_qubits.update(new_qubits)
            self.state.flagged_edges.update(new_edges)
            scheduler.submit_task(task, now)
        update_interval(self.state, self.policy, triggered)
        self.state.next_check_time = now + self.state.current_interval
        return task

    def on_calibrated(self, targets: set[int]) -> None:
        self.state.flagged_qubits -= set(targets)
        self.state.flagged_edges = {
            e for e in self.state.flagged_edges if not (e[0] in targets and e[1] in targets)
        }
