"""Fidelity-aware qubit mapping in three phases: grow maximal embedding
sequences over the interaction DAG with a beam search, connect consecutive
embeddings with greedy token-swap routes, then emit the highest-fidelity
candidate as a native circuit over physical qubits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .circuit import Circuit, Gate, check_valid
from .dag import InteractionDag, build_interaction_dag
from .decompose import decompose_to_native, native_swap_gates
from .gates import GateKind
from .qpu import QpuModel
from .token_swap import all_pairs_distances, apply_route, token_swap_route

DEFAULT_BEAM = 64


class MappingError(ValueError):
    pass


@dataclass
class Embedding:
    mapping: dict[int, int]  # logical -> physical, partial and injective
    vertices: list[int]  # covered DAG vertices in coverage order


@dataclass
class MappingPath:
    embeddings: list[Embedding]
    routes: list[list[tuple[int, int]]]  # routes[k] runs before embeddings[k]
    fidelity_score: float = 0.0


@dataclass
class MappingResult:
    circuit: Circuit
    final_map: dict[int, int]
    fidelity_score: float
    swap_count: int
    path: MappingPath | None = None


@dataclass
class _Candidate:
    sealed: list[Embedding] = field(default_factory=list)
    mapping: dict[int, int] = field(default_factory=dict)
    vertices: list[int] = field(default_factory=list)
    score: float = 1.0

    def key(self) -> tuple:
        hist = tuple(
            (tuple(sorted(e.mapping.items())), tuple(e.vertices)) for e in self.sealed
        )
        return hist + ((tuple(sorted(self.mapping.items())), tuple(self.vertices)),)


def _annotation_factor(vertex, mapping: dict[int, int], fid) -> float:
    factor = 1.0
    for g in vertex.before + vertex.after:
        q = mapping[g.qubits[0]] if g.qubits[0] in mapping else None
        if q is None:
            continue
        if g.kind is GateKind.MEASURE:
            factor *= float(fid.measure[q])
        else:
            factor *= float(fid.single[q])
    return factor


def _extensions(cand: _Candidate, vertex, edges: list[tuple[int, int]], adj, fid):
    """Placements of a vertex's qubit pair consistent with the partial mapping."""
    a, b = vertex.qubits
    m = cand.mapping
    used = set(m.values())
    placements = []
    if a in m and b in m:
        pa, pb = m[a], m[b]
        if (min(pa, pb), max(pa, pb)) in edges:
            placements.append({})
    elif a in m or b in m:
        anchored, free = (a, b) if a in m else (b, a)
        for p in adj[m[anchored]]:
            if p not in used:
                placements.append({free: p})
    else:
        for pa, pb in edges:
            if pa not in used and pb not in used:
                placements.append({a: pa, b: pb})
                placements.append({a: pb, b: pa})
    out = []
    for extra in placements:
        new_map = {**m, **extra}
        edge = (min(new_map[a], new_map[b]), max(new_map[a], new_map[b]))
        gain = fid.two[edge] * _annotation_factor(vertex, {a: new_map[a], b: new_map[b]}, fid)
        out.append(
            _Candidate(
                sealed=cand.sealed,
                mapping=new_map,
                vertices=cand.vertices + [vertex.index],
                score=cand.score * gain,
            )
        )
    return out


def embedding_sequences(
    dag: InteractionDag,
    edges: list[tuple[int, int]],
    fid,
    beam: int = DEFAULT_BEAM,
) -> list[list[Embedding]]:
    """Phase 1: consume DAG vertices in dependency order (lowest index first),
    extending every live candidate; when no candidate extends, seal the current
    embedding everywhere and restart on the remaining DAG. At most ``beam``
    candidates survive each step, ranked by partial fidelity."""
    if beam < 1:
        raise MappingError(f"beam must be >= 1, got {beam}")
    if not dag.vertices:
        return [[]]
    edge_set = sorted({(min(a, b), max(a, b)) for a, b in edges})
    adjacency: dict[int, list[int]] = {}
    for a, b in edge_set:
        adjacency.setdefault(a, []).append(b)
        adjacency.setdefault(b, []).append(a)
    adjacency = {p: sorted(ns) for p, ns in adjacency.items()}
    indeg = dag.in_degrees()
    succ = [dag.successors(v) for v in range(len(dag.vertices))]
    remaining = set(range(len(dag.vertices)))

    pool = [_Candidate()]
    while remaining:
        v_id = min(v for v in remaining if indeg[v] == 0)
        vertex = dag.vertices[v_id]
        children = []
        for cand in pool:
            children.extend(_extensions(cand, vertex, edge_set, adjacency, fid))
        if not children:
            # nothing extends: close the current embedding in every candidate
            for cand in pool:
                if not cand.vertices:
                    continue
                sealed = cand.sealed + [Embedding(dict(cand.mapping), list(cand.vertices))]
                base = _Candidate(sealed=sealed, score=cand.score)
                children.extend(_extensions(base, vertex, edge_set, adjacency, fid))
            if not children:
                raise MappingError(
                    f"no placement for gate on qubits {vertex.qubits}; region has no usable edge"
                )
        pool = _prune(children, beam)
        remaining.discard(v_id)
        for w in succ[v_id]:
            indeg[w] -= 1

    return [cand.sealed + [Embedding(dict(cand.mapping), list(cand.vertices))] for cand in pool]


def _prune(children: list[_Candidate], beam: int) -> list[_Candidate]:
    seen = set()
    unique = []
    for cand in children:
        k = cand.key()
        if k not in seen:
            seen.add(k)
            unique.append(cand)
    unique.sort(key=lambda c: (-c.score, len(c.sealed), c.key()))
    return unique[:beam]


def path_fidelity(circuit: Circuit, qpu: QpuModel) -> float:
    """Product of element fidelities over an emitted physical circuit."""
    fid = qpu.fidelity
    score = 1.0
    for g in circuit.gates:
        if g.kind is GateKind.CZ:
            edge = (min(g.qubits), max(g.qubits))
            if edge not in fid.two:
                raise MappingError(f"two-qubit gate on non-edge {edge}")
            score *= fid.two[edge]
        elif g.kind is GateKind.MEASURE:
            score *= float(fid.measure[g.qubits[0]])
        else:
            score *= float(fid.single[g.qubits[0]])
    return score


def _realize(
    dag: InteractionDag,
    seq: list[Embedding],
    qpu: QpuModel,
    available: list[int],
    avail_edges: list[tuple[int, int]],
    dist,
    n_logical: int,
) -> tuple[Circuit, dict[int, int], float, int, MappingPath]:
    """Phase 2+3 for one candidate sequence: route between embeddings and emit."""
    n = qpu.n_qubits
    out = Circuit(n)
    placement: dict[int, int] = {}
    routes: list[list[tuple[int, int]]] = []
    swap_count = 0
    for emb in seq:
        route = token_swap_route(placement, emb.mapping, n, avail_edges, dist)
        routes.append(route)
        placement = apply_route(placement, route)
        for q, p in emb.mapping.items():
            placement.setdefault(q, p)
            if placement[q] != p:
                raise MappingError(f"route left logical {q} at {placement[q]}, expected {p}")
        swap_count += len(route)
        for u, v in route:
            out.gates.extend(native_swap_gates(u, v))
        for vid in emb.vertices:
            vertex = dag.vertices[vid]
            for g in vertex.before:
                out.gates.append(Gate(g.kind, (placement[g.qubits[0]],), g.params))
            a, b = vertex.qubits
            out.gates.append(Gate(vertex.gate.kind, (placement[a], placement[b]), vertex.gate.params))

    # terminal single-qubit work: vertex afters, then orphan-qubit gates, with
    # measures last; orphan logicals take the best remaining physical qubits
    tail: list[Gate] = []
    for emb in seq:
        for vid in emb.vertices:
            tail.extend(dag.vertices[vid].after)
    orphan_gates = list(dag.orphans)
    orphan_qubits = sorted({g.qubits[0] for g in orphan_gates} - set(placement))
    free = [p for p in available if p not in set(placement.values())]
    fid = qpu.fidelity
    for q in orphan_qubits:
        best = None
        for p in free:
            weight = 1.0
            for g in orphan_gates:
                if g.qubits[0] != q:
                    continue
                weight *= float(fid.measure[p] if g.kind is GateKind.MEASURE else fid.single[p])
            key = (-weight, p)
            if best is None or key < best:
                best = key
        if best is None:
            raise MappingError("not enough free qubits for unplaced logical qubits")
        placement[q] = best[1]
        free.remove(best[1])
    for q in range(n_logical):
        if q not in placement:
            if not free:
                raise MappingError("not enough free qubits for unplaced logical qubits")
            placement[q] = free.pop(0)
    tail.extend(orphan_gates)
    measures = [g for g in tail if g.kind is GateKind.MEASURE]
    for g in tail:
        if g.kind is not GateKind.MEASURE:
            out.gates.append(Gate(g.kind, (placement[g.qubits[0]],), g.params))
    for g in measures:
        out.gates.append(Gate(GateKind.MEASURE, (placement[g.qubits[0]],), g.params))

    score = path_fidelity(out, qpu)
    path = MappingPath([Embedding(dict(e.mapping), list(e.vertices)) for e in seq], routes, score)
    return out, placement, score, swap_count, path


def map_circuit(
    c: Circuit,
    qpu: QpuModel,
    beam: int = DEFAULT_BEAM,
    available: list[int] | None = None,
) -> MappingResult:
    """Map a logical circuit onto a QPU's free executable region, returning the
    native physical circuit, the final logical-to-physical map and its fidelity
    score. Ties break by fewer swaps, then lexicographically smallest placement."""
    check_valid(c)
    if available is None:
        available = sorted(qpu.free_executable())
    avail_set = set(available)
    native = decompose_to_native(c)
    used = native.used_qubits()
    if len(used) > len(available):
        raise MappingError(
            f"circuit uses {len(used)} qubits but only {len(available)} are available"
        )
    dag = build_interaction_dag(native)
    avail_edges = [e for e in qpu.topology.edges if e[0] in avail_set and e[1] in avail_set]
    dist = all_pairs_distances(qpu.n_qubits, avail_edges)

    sequences = embedding_sequences(dag, avail_edges, qpu.fidelity, beam)
    best = None
    for seq in sequences:
        circuit, final_map, score, swaps, path = _realize(
            dag, seq, qpu, available, avail_edges, dist, c.n_qubits
        )
        placement_key = tuple(sorted(final_map.items()))
        key = (-score, swaps, placement_key)
        if best is None or key < best[0]:
            best = (key, MappingResult(circuit, final_map, score, swaps, path))
    assert best is not None
    return best[1]


def naive_map_circuit(
    c: Circuit, qpu: QpuModel, available: list[int] | None = None
) -> MappingResult:
    """Baseline router: logical i sits on the i-th available physical qubit and
    non-adjacent gates are fixed by walking one operand along a shortest path.
    Fidelities are ignored entirely."""
    check_valid(c)
    if available is None:
        available = sorted(qpu.free_executable())
    native = decompose_to_native(c)
    if c.n_qubits > len(available):
        raise MappingError(
            f"circuit uses {c.n_qubits} qubits but only {len(available)} are available"
        )
    avail_set = set(available)
    avail_edges = [e for e in qpu.topology.edges if e[0] in avail_set and e[1] in avail_set]
    edge_set = set(avail_edges)
    adjacency: dict[int, list[int]] = {p: [] for p in available}
    for a, b in avail_edges:
        adjacency[a].append(b)
        adjacency[b].append(a)
    adjacency = {p: sorted(ns) for p, ns in adjacency.items()}
    dist = all_pairs_distances(qpu.n_qubits, avail_edges)

    l2p = {q: available[q] for q in range(c.n_qubits)}
    out = Circuit(qpu.n_qubits)
    measures: list[Gate] = []
    swap_count = 0
    for g in native.gates:
        if g.kind is GateKind.MEASURE:
            measures.append(g)
            continue
        if len(g.qubits) == 1:
            out.gates.append(Gate(g.kind, (l2p[g.qubits[0]],), g.params))
            continue
        a, b = g.qubits
        while (min(l2p[a], l2p[b]), max(l2p[a], l2p[b])) not in edge_set:
            pa, pb = l2p[a], l2p[b]
            if dist[pa][pb] < 0:
                raise MappingError(f"no path between {pa} and {pb} in the available region")
            step = min(p for p in adjacency[pa] if dist[p][pb] == dist[pa][pb] - 1)
            out.gates.extend(native_swap_gates(pa, step))
            swap_count += 1
            displaced = [q for q, p in l2p.items() if p == step]
            l2p[a] = step
            if displaced:
                l2p[displaced[0]] = pa
        out.gates.append(Gate(g.kind, (l2p[a], l2p[b]), g.params))
    for g in measures:
        out.gates.append(Gate(GateKind.MEASURE, (l2p[g.qubits[0]],), g.params))
    score = path_fidelity(out, qpu)
    return MappingResult(out, dict(l2p), score, swap_count)


def dump_mapping_path(result: MappingResult) -> str:
    """Structured text dump of a mapping for golden-file comparison."""
    lines = [f"score {result.fidelity_score!r}", f"swaps {result.swap_count}"]
    if result.path is not None:
        for i, emb in enumerate(result.path.embeddings):
            placed = " ".join(f"{q}->{p}" for q, p in sorted(emb.mapping.items()))
            lines.append(f"embedding {i}: {placed} | vertices {list(emb.vertices)}")
            route = result.path.routes[i]
            if route:
                lines.append(f"route {i}: " + " ".join(f"swap({a},{b})" for a, b in route))
    final = " ".join(f"{q}->{p}" for q, p in sorted(result.final_map.items()))
    lines.append(f"final {final}")
    return "\n".join(lines) + "\n"
