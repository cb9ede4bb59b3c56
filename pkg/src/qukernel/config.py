"""Scenario and QPU configuration: YAML loading with strict validation.
Unknown keys are rejected and every complaint names the offending field."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import yaml

from .benchmarks import generate_benchmark
from .calibration import CalibrationPolicy
from .circuit import Circuit, parse_circuit
from .qpu import DriftParams, QpuModel, Topology, build_qpu, grid_topology


class ConfigError(ValueError):
    pass


def _require(cfg: dict, key: str, path: str):
    if key not in cfg:
        raise ConfigError(f"{path}: missing required field '{key}'")
    return cfg[key]


def _check_keys(cfg: dict, allowed: set[str], path: str) -> None:
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: expected a mapping, got {type(cfg).__name__}")
    unknown = sorted(set(cfg) - allowed)
    if unknown:
        raise ConfigError(f"{path}: unknown field(s) {', '.join(map(repr, unknown))}")


def _int_field(cfg: dict, key: str, path: str, default=None, minimum=None):
    value = cfg.get(key, default)
    if value is None:
        raise ConfigError(f"{path}: missing required field '{key}'")
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}.{key}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{path}.{key}: must be >= {minimum}, got {value}")
    return value


def _num_field(cfg: dict, key: str, path: str, default=None):
    value = cfg.get(key, default)
    if value is None:
        raise ConfigError(f"{path}: missing required field '{key}'")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}.{key}: expected a number, got {value!r}")
    return float(value)


@dataclass
class QpuSpec:
    id: str
    topology: Topology
    single: float | dict
    two: float | dict
    measure: float | dict
    tau: dict[str, float]
    floor: dict[str, float]
    jitter_sigma: float = 0.0

    def build(self, seed: int = 0) -> QpuModel:
        drift = DriftParams(
            tau_single=self.tau["single"],
            tau_two=self.tau["two"],
            tau_measure=self.tau["measure"],
            floor_single=self.floor["single"],
            floor_two=self.floor["two"],
            floor_measure=self.floor["measure"],
            jitter_sigma=self.jitter_sigma,
            seed=seed,
        )
        return build_qpu(self.id, self.topology, self.single, self.two, self.measure, drift)


@dataclass
class Workload:
    template: dict
    count: int = 0
    interval: int | None = None
    arrivals: list[int] | None = None
    shots: int = 1000
    base_dir: str = "."

    def arrival_times(self) -> list[int]:
        if self.arrivals is not None:
            return list(self.arrivals)
        return [i * self.interval for i in range(self.count)]

    def make_circuit(self) -> Circuit:
        t = self.template
        if "circuit_file" in t:
            with open(os.path.join(self.base_dir, t["circuit_file"])) as fh:
                return parse_circuit(fh.read())
        if "circuit_text" in t:
            return parse_circuit(t["circuit_text"])
        kwargs = {k: v for k, v in t.items() if k not in ("benchmark", "n_qubits")}
        return generate_benchmark(t["benchmark"], t.get("n_qubits", 2), **kwargs)


@dataclass
class Policy:
    beam: int = 64
    packing: bool = True
    min_fidelity_score: float = 0.0
    gate_duration: float = 0.001
    calibration: CalibrationPolicy | None = None


@dataclass
class Scenario:
    name: str
    duration: int
    qpus: list[QpuSpec]
    workload: Workload
    policy: Policy = field(default_factory=Policy)
    seed: int = 0
    trace_interval: int = 600
    window: int = 3600
    simulate_results: bool = False


def _parse_topology(cfg, path: str) -> Topology:
    _check_keys(cfg, {"kind", "rows", "cols", "n_qubits", "edges"}, path)
    kind = cfg.get("kind", "grid")
    if kind == "grid":
        return grid_topology(_int_field(cfg, "rows", path, minimum=1),
                             _int_field(cfg, "cols", path, minimum=1))
    if kind == "edges":
        n = _int_field(cfg, "n_qubits", path, minimum=2)
        edges = _require(cfg, "edges", path)
        if not isinstance(edges, list) or not all(
            isinstance(e, list) and len(e) == 2 for e in edges
        ):
            raise ConfigError(f"{path}.edges: expected a list of [a, b] pairs")
        return Topology(n, tuple((int(a), int(b)) for a, b in edges))
    raise ConfigError(f"{path}.kind: expected 'grid' or 'edges', got {kind!r}")


def _parse_fidelity_entry(value, path: str, edge_keys: bool):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        v = float(value)
        if not 0.0 <= v <= 1.0:
            raise ConfigError(f"{path}: fidelity {v} outside [0, 1]")
        return v
    _check_keys(value, {"default", "overrides"}, path)
    out = {"default": _num_field(value, "default", path)}
    for key, v in value.get("overrides", {}).items():
        if edge_keys:
            try:
                a, b = (int(x) for x in str(key).split("-"))
            except ValueError:
                raise ConfigError(f"{path}.overrides: edge key {key!r} is not 'a-b'") from None
            out[(min(a, b), max(a, b))] = float(v)
        else:
            out[int(key)] = float(v)
    return out


def _parse_class_values(cfg, key: str, path: str, default: float) -> dict[str, float]:
    value = cfg.get(key, default)
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return {"single": float(value), "two": float(value), "measure": float(value)}
    _check_keys(value, {"single", "two", "measure"}, f"{path}.{key}")
    return {
        "single": _num_field(value, "single", f"{path}.{key}", default),
        "two": _num_field(value, "two", f"{path}.{key}", default),
        "measure": _num_field(value, "measure", f"{path}.{key}", default),
    }


def _parse_qpu(cfg, idx: int) -> QpuSpec:
    path = f"qpus[{idx}]"
    _check_keys(cfg, {"id", "topology", "fidelity", "drift"}, path)
    qpu_id = cfg.get("id", f"qpu{idx}")
    topo = _parse_topology(_require(cfg, "topology", path), f"{path}.topology")
    fid = _require(cfg, "fidelity", path)
    _check_keys(fid, {"single", "two", "measure"}, f"{path}.fidelity")
    single = _parse_fidelity_entry(_require(fid, "single", f"{path}.fidelity"),
                                   f"{path}.fidelity.single", edge_keys=False)
    two = _parse_fidelity_entry(_require(fid, "two", f"{path}.fidelity"),
                                f"{path}.fidelity.two", edge_keys=True)
    measure = _parse_fidelity_entry(_require(fid, "measure", f"{path}.fidelity"),
                                    f"{path}.fidelity.measure", edge_keys=False)
    drift_cfg = cfg.get("drift", {})
    _check_keys(drift_cfg, {"tau", "floor", "jitter_sigma"}, f"{path}.drift")
    tau = _parse_class_values(drift_cfg, "tau", f"{path}.drift", 100000.0)
    floor = _parse_class_values(drift_cfg, "floor", f"{path}.drift", 0.8)
    jitter = _num_field(drift_cfg, "jitter_sigma", f"{path}.drift", 0.0)
    return QpuSpec(qpu_id, topo, single, two, measure, tau, floor, jitter)


def _parse_workload(cfg, path: str, base_dir: str) -> Workload:
    _check_keys(cfg, {"template", "count", "interval", "arrivals", "shots"}, path)
    template = _require(cfg, "template", path)
    _check_keys(
        template,
        {"benchmark", "n_qubits", "secret", "oracle", "circuit_file", "circuit_text", "measure"},
        f"{path}.template",
    )
    if "benchmark" not in template and "circuit_file" not in template and "circuit_text" not in template:
        raise ConfigError(f"{path}.template: needs 'benchmark', 'circuit_file' or 'circuit_text'")
    arrivals = cfg.get("arrivals")
    if arrivals is not None:
        if not isinstance(arrivals, list) or not all(
            isinstance(a, int) and not isinstance(a, bool) and a >= 0 for a in arrivals
        ):
            raise ConfigError(f"{path}.arrivals: expected a list of non-negative integers")
        count = len(arrivals)
        interval = None
    else:
        count = _int_field(cfg, "count", path, default=0, minimum=0)
        interval = _int_field(cfg, "interval", path, default=10, minimum=1)
    shots = _int_field(cfg, "shots", path, default=1000, minimum=1)
    return Workload(dict(template), count, interval, arrivals, shots, base_dir)


def _parse_policy(cfg, path: str) -> Policy:
    _check_keys(
        cfg, {"beam", "packing", "min_fidelity_score", "gate_duration", "calibration"}, path
    )
    policy = Policy(
        beam=_int_field(cfg, "beam", path, default=64, minimum=1),
        packing=bool(cfg.get("packing", True)),
        min_fidelity_score=_num_field(cfg, "min_fidelity_score", path, 0.0),
        gate_duration=_num_field(cfg, "gate_duration", path, 0.001),
    )
    calib = cfg.get("calibration")
    if calib is not None:
        _check_keys(
            calib,
            {"enabled", "single_threshold", "double_threshold", "interval_max",
             "interval_min", "interval_step", "calib_duration"},
            f"{path}.calibration",
        )
        if calib.get("enabled", True):
            policy.calibration = CalibrationPolicy(
                single_threshold=_num_field(calib, "single_threshold", f"{path}.calibration", 0.98),
                double_threshold=_num_field(calib, "double_threshold", f"{path}.calibration", 0.95),
                interval_max=_int_field(calib, "interval_max", f"{path}.calibration", 3600, 1),
                interval_min=_int_field(calib, "interval_min", f"{path}.calibration", 1200, 1),
                interval_step=_int_field(calib, "interval_step", f"{path}.calibration", 1200, 1),
                calib_duration=_int_field(calib, "calib_duration", f"{path}.calibration", 300, 1),
            )
    return policy


def scenario_from_dict(cfg: dict, name: str = "scenario", base_dir: str = ".") -> Scenario:
    _check_keys(
        cfg,
        {"name", "seed", "duration", "qpus", "workload", "policy", "trace_interval",
         "window", "simulate_results"},
        "scenario",
    )
    duration = _int_field(cfg, "duration", "scenario", minimum=1)
    qpus_cfg = _require(cfg, "qpus", "scenario")
    if not isinstance(qpus_cfg, list) or not qpus_cfg:
        raise ConfigError("scenario.qpus: expected a non-empty list")
    qpus = [_parse_qpu(q, i) for i, q in enumerate(qpus_cfg)]
    ids = [q.id for q in qpus]
    if len(set(ids)) != len(ids):
        raise ConfigError("scenario.qpus: duplicate qpu ids")
    workload = _parse_workload(_require(cfg, "workload", "scenario"), "workload", base_dir)
    policy = _parse_policy(cfg.get("policy", {}), "policy")
    return Scenario(
        name=str(cfg.get("name", name)),
        duration=duration,
        qpus=qpus,
        workload=workload,
        policy=policy,
        seed=_int_field(cfg, "seed", "scenario", default=0),
        trace_interval=_int_field(cfg, "trace_interval", "scenario", default=600, minimum=1),
        window=_int_field(cfg, "window", "scenario", default=3600, minimum=1),
        simulate_results=bool(cfg.get("simulate_results", False)),
    )


def load_scenario(path: str) -> Scenario:
    """Parse and validate a scenario config file. Syntax errors carry the YAML
    line number; validation errors name the field."""
    with open(path) as fh:
        text = fh.read()
    try:
        cfg = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}" if mark is not None else ""
        raise ConfigError(f"{path}: parse error{where}: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: expected a top-level mapping")
    name = os.path.splitext(os.path.basename(path))[0]
    return scenario_from_dict(cfg, name=name, base_dir=os.path.dirname(path) or ".")


def load_qpu_config(path: str, seed: int = 0) -> QpuModel:
    """Build a QPU directly from a config file holding a single ``qpus`` entry
    (or a bare QPU mapping)."""
    with open(path) as fh:
        try:
            cfg = yaml.safe_load(fh.read())
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            where = f" at line {mark.line + 1}" if mark is not None else ""
            raise ConfigError(f"{path}: parse error{where}: {exc}") from None
    if isinstance(cfg, dict) and "qpus" in cfg:
        specs = cfg["qpus"]
        if not isinstance(specs, list) or not specs:
            raise ConfigError(f"{path}: qpus must be a non-empty list")
        return _parse_qpu(specs[0], 0).build(seed)
    return _parse_qpu(cfg, 0).build(seed)
