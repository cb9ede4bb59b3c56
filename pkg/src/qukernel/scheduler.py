"""Multi-QPU task scheduling: HRRN ordering for general tasks, FCFS precedence
for calibration tasks, all-or-nothing transactions packing disjoint circuits,
thread binding and completion demultiplexing."""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, field

from .circuit import Circuit, format_circuit
from .mapper import MappingError, MappingResult, map_circuit
from .qpu import QpuModel

GENERAL, CALIBRATION = "general", "calibration"


class SchedulerError(ValueError):
    pass


class TaskRejected(SchedulerError):
    """The task cannot run on any managed QPU."""


@dataclass
class QuantumTask:
    id: int | None = None
    n_qubits_required: int = 1
    program: Circuit | None = None
    qpu_id: str | None = None
    task_type: str = GENERAL
    priority: int = 0
    submit_time: int | None = None
    est_runtime: int | None = None
    explicit_qubits: frozenset[int] | None = None


@dataclass
class QuantumTransaction:
    id: int
    qpu_id: str
    tasks: list[QuantumTask]
    footprint: set[int]
    mappings: dict[int, MappingResult | None]
    calib_targets: set[int]
    duration: int


@dataclass
class QuantumThread:
    transaction_id: int
    qpu_id: str
    task_ids: list[int]
    start_time: int
    expected_completion: int
    transaction: QuantumTransaction


def response_ratio(task: QuantumTask, now: int) -> float:
    """HRRN priority: (waiting + runtime) / runtime."""
    if task.submit_time is None or task.est_runtime is None:
        raise SchedulerError("task has not been submitted")
    if now < task.submit_time:
        raise SchedulerError(f"now={now} precedes submit_time={task.submit_time}")
    waiting = now - task.submit_time
    return (waiting + task.est_runtime) / task.est_runtime


def estimate_runtime(program: Circuit, gate_duration: float, shots: int) -> int:
    return max(1, round(len(program.gates) * gate_duration * shots))


class Scheduler:
    """Single logical event loop over ordered submit/tick/complete events."""

    def __init__(
        self,
        qpus: dict[str, QpuModel],
        beam: int = 64,
        min_fidelity_score: float = 0.0,
        packing: bool = True,
        gate_duration: float = 0.001,
        shots: int = 1000,
        calibration_policy=None,
    ):
        self.qpus = dict(qpus)
        self.beam = beam
        self.min_fidelity_score = min_fidelity_score
        self.packing = packing
        self.gate_duration = gate_duration
        self.shots = shots
        self.calibration_policy = calibration_policy
        self.waiting: list[QuantumTask] = []
        self.calib_queue: deque[QuantumTask] = deque()
        self.running: dict[int, QuantumThread] = {}
        self.completed: dict[int, dict] = {}
        self.rejected: dict[int, dict] = {}
        self.events: list[dict] = []
        self.clock = 0
        self._next_task_id = 0
        self._next_txn_id = 0
        self._sigs: dict[int, str] = {}
        self._map_cache: dict[tuple, MappingResult | None] = {}

    # -- submission ------------------------------------------------------

    def submit_task(self, task: QuantumTask, now: int) -> int:
        self.clock = max(self.clock, now)
        if task.id is None:
            task.id = self._next_task_id
        if task.id in self._sigs or task.id in self.completed or task.id in self.rejected:
            raise SchedulerError(f"duplicate task id {task.id}")
        self._next_task_id = max(self._next_task_id, task.id + 1)
        task.submit_time = now

        if task.task_type == CALIBRATION:
            if not task.explicit_qubits:
                raise SchedulerError("calibration task needs explicit_qubits")
            if task.qpu_id is None or task.qpu_id not in self.qpus:
                raise SchedulerError(f"calibration task needs a managed qpu_id, got {task.qpu_id}")
            if not task.est_runtime or task.est_runtime <= 0:
                raise SchedulerError("calibration task needs est_runtime > 0")
            self._sigs[task.id] = f"calib:{sorted(task.explicit_qubits)}"
            self.calib_queue.append(task)
            self._log("submit", now, task=task.id, type=task.task_type, qpu=task.qpu_id,
                      targets=sorted(task.explicit_qubits))
            return task.id

        if task.program is None:
            raise SchedulerError("general task needs a program")
        if task.est_runtime is None:
            task.est_runtime = estimate_runtime(task.program, self.gate_duration, self.shots)
        if task.est_runtime <= 0:
            raise SchedulerError("est_runtime must be positive")
        if task.n_qubits_required < 1:
            task.n_qubits_required = max(1, len(task.program.used_qubits()))
        if task.qpu_id is not None and task.qpu_id not in self.qpus:
            raise SchedulerError(f"unknown qpu_id {task.qpu_id}")
        largest = max(q.n_qubits for q in self.qpus.values()) if self.qpus else 0
        if task.n_qubits_required > largest:
            self.rejected[task.id] = {"task": task.id, "submit": now, "reason": "too-large"}
            self._log("reject", now, task=task.id, reason="too-large",
                      needed=task.n_qubits_required, largest=largest)
            raise TaskRejected(
                f"task {task.id} needs {task.n_qubits_required} qubits; largest QPU has {largest}"
            )
        self._sigs[task.id] = hashlib.sha256(format_circuit(task.program).encode()).hexdigest()[:16]
        self.waiting.append(task)
        self._log("submit", now, task=task.id, type=task.task_type,
                  qubits=task.n_qubits_required, est=task.est_runtime)
        return task.id

    # -- selection and formation -----------------------------------------

    def _trial_map(self, task: QuantumTask, qpu: QpuModel, available: tuple[int, ...]):
        key = (qpu.id, qpu.fidelity_version, qpu.allocation_version,
               self._sigs[task.id], available)
        if key in self._map_cache:
            return self._map_cache[key]
        try:
            result = map_circuit(task.program, qpu, beam=self.beam, available=list(available))
        except MappingError:
            result = None
        self._map_cache[key] = result
        if len(self._map_cache) > 4096:
            self._map_cache.clear()
        return result

    def select_qpu(self, task: QuantumTask, now: int):
        """Best-fitting QPU by trial-map fidelity; None when nothing fits now."""
        best = None
        for qpu_id in sorted(self.qpus):
            qpu = self.qpus[qpu_id]
            if any(t.qpu_id == qpu_id for t in self.running.values()):
                continue
            available = tuple(sorted(qpu.free_executable()))
            if len(available) < task.n_qubits_required:
                continue
            result = self._trial_map(task, qpu, available)
            if result is None or result.fidelity_score < self.min_fidelity_score:
                continue
            key = (-result.fidelity_score, qpu_id)
            if best is None or key < best[0]:
                best = (key, qpu_id, result)
        if best is None:
            return None
        return best[1], best[2]

    def form_transaction(
        self,
        seed: QuantumTask,
        qpu: QpuModel,
        now: int,
        seed_mapping: MappingResult | None = None,
    ) -> QuantumTransaction | None:
        """Greedy packing: highest response ratio first, footprints disjoint."""
        members: list[QuantumTask] = []
        mappings: dict[int, MappingResult | None] = {}
        used: set[int] = set()
        calib_targets: set[int] = set()

        if seed.task_type == CALIBRATION:
            calib_targets = set(seed.explicit_qubits)
            for q in calib_targets:
                if qpu.allocation.get(q) != "free":
                    return None
            members.append(seed)
            mappings[seed.id] = None
        else:
            available = tuple(sorted(qpu.free_executable()))
            mapping = seed_mapping or self._trial_map(seed, qpu, available)
            if mapping is None or mapping.fidelity_score < self.min_fidelity_score:
                return None
            members.append(seed)
            mappings[seed.id] = mapping
            used = set(mapping.circuit.used_qubits())

        if self.packing:
            base_avail = sorted(qpu.free_executable() - calib_targets)
            candidates = [t for t in self.waiting if t is not seed]
            candidates.sort(key=lambda t: (-response_ratio(t, now), t.submit_time, t.id))
            local: dict[tuple, MappingResult | None] = {}
            for cand in candidates:
                if cand.qpu_id is not None and cand.qpu_id != qpu.id:
                    continue
                avail = tuple(p for p in base_avail if p not in used)
                if len(avail) < cand.n_qubits_required:
                    continue
                lkey = (self._sigs[cand.id], avail)
                if lkey in local:
                    result = local[lkey]
                else:
                    result = self._trial_map(cand, qpu, avail)
                    local[lkey] = result
                if result is None or result.fidelity_score < self.min_fidelity_score:
                    continue
                members.append(cand)
                mappings[cand.id] = result
                used |= set(result.circuit.used_qubits())

        duration = max(t.est_runtime for t in members)
        txn = QuantumTransaction(
            id=self._next_txn_id,
            qpu_id=qpu.id,
            tasks=members,
            footprint=used | calib_targets,
            mappings=mappings,
            calib_targets=calib_targets,
            duration=duration,
        )
        self._next_txn_id += 1
        return txn

    # -- binding and completion ------------------------------------------

    def bind_thread(self, txn: QuantumTransaction, now: int) -> QuantumThread:
        qpu = self.qpus[txn.qpu_id]
        if any(t.qpu_id == txn.qpu_id for t in self.running.values()):
            raise SchedulerError(f"{txn.qpu_id} is already running a thread")
        if txn.calib_targets:
            qpu.partition_regions(txn.calib_targets)
        general_fp = txn.footprint - txn.calib_targets
        if general_fp and not qpu.allocate_qubits(general_fp):
            if txn.calib_targets:
                qpu.release_qubits(txn.calib_targets)
            raise SchedulerError(f"allocation refused for footprint {sorted(general_fp)}")
        thread = QuantumThread(
            transaction_id=txn.id,
            qpu_id=txn.qpu_id,
            task_ids=[t.id for t in txn.tasks],
            start_time=now,
            expected_completion=now + txn.duration,
            transaction=txn,
        )
        self.running[txn.id] = thread
        member_ids = set(thread.task_ids)
        self.waiting = [t for t in self.waiting if t.id not in member_ids]
        self.calib_queue = deque(t for t in self.calib_queue if t.id not in member_ids)
        for t in txn.tasks:
            result = txn.mappings.get(t.id)
            self._log(
                "dispatch", now, task=t.id, transaction=txn.id, qpu=txn.qpu_id,
                footprint=sorted(set(result.circuit.used_qubits()) if result else txn.calib_targets),
                score=(result.fidelity_score if result else None),
                expected_end=thread.expected_completion,
            )
        return thread

    def schedule_tick(self, now: int) -> list[QuantumThread]:
        """Dispatch everything dispatchable: calibration FIFO first, then general
        tasks in HRRN order. Ties break by submit time, then id."""
        self.clock = max(self.clock, now)
        threads: list[QuantumThread] = []

        for task in list(self.calib_queue):
            qpu = self.qpus[task.qpu_id]
            if any(t.qpu_id == task.qpu_id for t in self.running.values()):
                continue
            txn = self.form_transaction(task, qpu, now)
            if txn is None:
                continue
            threads.append(self.bind_thread(txn, now))

        progress = True
        while progress:
            progress = False
            ranked = sorted(
                self.waiting, key=lambda t: (-response_ratio(t, now), t.submit_time, t.id)
            )
            for task in ranked:
                if task.qpu_id is not None:
                    qpu = self.qpus[task.qpu_id]
                    if any(t.qpu_id == task.qpu_id for t in self.running.values()):
                        continue
                    available = tuple(sorted(qpu.free_executable()))
                    if len(available) < task.n_qubits_required:
                        continue
                    mapping = self._trial_map(task, qpu, available)
                    if mapping is None or mapping.fidelity_score < self.min_fidelity_score:
                        continue
                    choice = (task.qpu_id, mapping)
                else:
                    choice = self.select_qpu(task, now)
                if choice is None:
                    continue
                qpu_id, mapping = choice
                txn = self.form_transaction(task, self.qpus[qpu_id], now, seed_mapping=mapping)
                if txn is None:
                    continue
                threads.append(self.bind_thread(txn, now))
                progress = True
                break
        return threads

    def complete_thread(self, thread: QuantumThread, results: dict[int, dict], now: int) -> None:
        """Demultiplex per-task results, restore calibrated elements, free qubits."""
        if thread.transaction_id not in self.running:
            raise SchedulerError(f"unknown thread {thread.transaction_id}")
        self.clock = max(self.clock, now)
        txn = thread.transaction
        qpu = self.qpus[txn.qpu_id]
        if txn.calib_targets:
            from .calibration import apply_calibration

            apply_calibration(qpu, txn.calib_targets, self.calibration_policy)
            self._log("calibration", now, qpu=qpu.id, targets=sorted(txn.calib_targets))
        for task in txn.tasks:
            result = txn.mappings.get(task.id)
            self.completed[task.id] = {
                "task": task.id,
                "type": task.task_type,
                "qpu": txn.qpu_id,
                "submit": task.submit_time,
                "start": thread.start_time,
                "end": now,
                "score": result.fidelity_score if result else None,
                "result": results.get(task.id),
            }
            self._log("complete", now, task=task.id, transaction=txn.id, qpu=txn.qpu_id)
        general_fp = txn.footprint - txn.calib_targets
        if general_fp:
            qpu.release_qubits(general_fp)
        if txn.calib_targets:
            qpu.release_qubits(txn.calib_targets)
        del self.running[thread.transaction_id]

    # -- bookkeeping -------------------------------------------------------

    def _log(self, event: str, t: int, **fields) -> None:
        entry = {"t": t, "event": event}
        entry.update(fields)
        self.events.append(entry)

    def pending_count(self) -> int:
        return len(self.waiting) + len(self.calib_queue) + sum(
            len(th.task_ids) for th in self.running.values()
        )
