"""Dependency DAG of two-qubit interactions.

Vertices are the circuit's two-qubit gates in program order; an edge connects
consecutive two-qubit gates sharing a qubit. Single-qubit gates (and measures)
ride along as vertex annotations so they can be re-emitted after mapping:
``before`` gates precede the vertex on one of its qubits, ``after`` gates follow
the last vertex on their qubit. Gates on qubits that never see a two-qubit gate
are kept separately as orphans.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .circuit import Circuit, Gate, check_valid
from .gates import GATE_ARITY, GateKind


@dataclass
class DagVertex:
    index: int
    gate_index: int
    gate: Gate
    qubits: tuple[int, int]
    before: list[Gate] = field(default_factory=list)
    after: list[Gate] = field(default_factory=list)


@dataclass
class InteractionDag:
    n_qubits: int
    vertices: list[DagVertex]
    edges: list[tuple[int, int]]
    orphans: list[Gate]

    def predecessors(self, v: int) -> list[int]:
        return [u for u, w in self.edges if w == v]

    def successors(self, v: int) -> list[int]:
        return [w for u, w in self.edges if u == v]

    def in_degrees(self) -> list[int]:
        deg = [0] * len(self.vertices)
        for _, w in self.edges:
            deg[w] += 1
        return deg


def build_interaction_dag(c: Circuit) -> InteractionDag:
    """Extract the two-qubit dependency DAG. Gates wider than two qubits must be
    decomposed first."""
    check_valid(c)
    for i, g in enumerate(c.gates):
        if GATE_ARITY[g.kind] > 2:
            raise ValueError(
                f"gate {i} ({g.kind.value}) has arity > 2; decompose to native gates first"
            )

    vertices: list[DagVertex] = []
    edges: set[tuple[int, int]] = set()
    last_vertex_on: dict[int, int] = {}
    # single-qubit gates waiting for their next two-qubit vertex, per qubit
    pending: dict[int, list[Gate]] = {}

    for gi, g in enumerate(c.gates):
        if len(g.qubits) == 2 and g.kind is not GateKind.MEASURE:
            v = DagVertex(len(vertices), gi, g, (g.qubits[0], g.qubits[1]))
            for q in g.qubits:
                if q in pending:
                    v.before.extend(pending.pop(q))
                if q in last_vertex_on:
                    edges.add((last_vertex_on[q], v.index))
                last_vertex_on[q] = v.index
            vertices.append(v)
        else:
            pending.setdefault(g.qubits[0], []).append(g)

    orphans: list[Gate] = []
    for q, gates in sorted(pending.items()):
        if q in last_vertex_on:
            vertices[last_vertex_on[q]].after.extend(gates)
        else:
            orphans.extend(gates)

    return InteractionDag(c.n_qubits, vertices, sorted(edges), orphans)


def expand_dag(dag: InteractionDag, order: list[int] | None = None) -> Circuit:
    """Re-emit a circuit from the DAG in a topological order (default: vertex order).
    The result has the same noiseless output distribution as the source circuit."""
    if order is None:
        order = list(range(len(dag.vertices)))
    position = {v: i for i, v in enumerate(order)}
    for u, w in dag.edges:
        if position[u] > position[w]:
            raise ValueError(f"order is not topological: edge {u}->{w}")
    out = Circuit(dag.n_qubits)
    measures: list[Gate] = []
    for vid in order:
        v = dag.vertices[vid]
        out.gates.extend(v.before)
        out.gates.append(v.gate)
    for vid in order:
        for g in dag.vertices[vid].after:
            (measures if g.kind is GateKind.MEASURE else out.gates).append(g)
    for g in dag.orphans:
        (measures if g.kind is GateKind.MEASURE else out.gates).append(g)
    out.gates.extend(measures)
    return out
