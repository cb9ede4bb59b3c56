"""Circuit intermediate representation: gates over logical qubits, validation and
the line-oriented text format (one gate per line, ``KIND q0[,q1[,q2]] [param,...]``)."""

from __future__ import annotations

from dataclasses import dataclass, field

from .gates import GATE_ARITY, GATE_PARAM_COUNT, GateKind


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()


@dataclass
class Circuit:
    n_qubits: int
    gates: list[Gate] = field(default_factory=list)

    def add(self, kind: GateKind, *qubits: int, params: tuple[float, ...] = ()) -> "Circuit":
        self.gates.append(Gate(kind, tuple(qubits), tuple(float(p) for p in params)))
        return self

    # thin helpers for the common kinds
    def h(self, q):
        return self.add(GateKind.H, q)

    def x(self, q):
        return self.add(GateKind.X, q)

    def u3(self, q, theta, phi, lam):
        return self.add(GateKind.U3, q, params=(theta, phi, lam))

    def cnot(self, c, t):
        return self.add(GateKind.CNOT, c, t)

    def cz(self, a, b):
        return self.add(GateKind.CZ, a, b)

    def swap(self, a, b):
        return self.add(GateKind.SWAP, a, b)

    def cr(self, c, t, theta):
        return self.add(GateKind.CR, c, t, params=(theta,))

    def measure(self, q):
        return self.add(GateKind.MEASURE, q)

    def measured_qubits(self) -> list[int]:
        return sorted({g.qubits[0] for g in self.gates if g.kind is GateKind.MEASURE})

    def used_qubits(self) -> list[int]:
        return sorted({q for g in self.gates for q in g.qubits})

    def copy(self) -> "Circuit":
        return Circuit(self.n_qubits, list(self.gates))


def validate_circuit(c: Circuit) -> list[str]:
    """Return every invariant violation; an empty list means the circuit is valid."""
    violations = []
    if c.n_qubits < 1:
        violations.append(f"n_qubits must be >= 1, got {c.n_qubits}")
    measured: set[int] = set()
    for i, g in enumerate(c.gates):
        arity = GATE_ARITY.get(g.kind)
        if arity is None:
            violations.append(f"gate {i}: unknown kind {g.kind!r}")
            continue
        if len(g.qubits) != arity:
            violations.append(
                f"gate {i} ({g.kind.value}): expected {arity} operand(s), got {len(g.qubits)}"
            )
        if len(set(g.qubits)) != len(g.qubits):
            violations.append(f"gate {i} ({g.kind.value}): duplicate operands {g.qubits}")
        for q in g.qubits:
            if not 0 <= q < c.n_qubits:
                violations.append(
                    f"gate {i} ({g.kind.value}): qubit {q} out of range for {c.n_qubits}-qubit circuit"
                )
        n_params = GATE_PARAM_COUNT.get(g.kind, 0)
        if len(g.params) != n_params:
            violations.append(
                f"gate {i} ({g.kind.value}): expected {n_params} parameter(s), got {len(g.params)}"
            )
        if g.kind is GateKind.MEASURE:
            q = g.qubits[0]
            if q in measured:
                violations.append(f"gate {i}: qubit {q} measured twice")
            measured.add(q)
        else:
            for q in g.qubits:
                if q in measured:
                    violations.append(
                        f"gate {i} ({g.kind.value}): unitary on qubit {q} after its MEASURE"
                    )
    return violations


def check_valid(c: Circuit) -> Circuit:
    violations = validate_circuit(c)
    if violations:
        raise CircuitError("invalid circuit: " + "; ".join(violations))
    return c


def format_circuit(c: Circuit, header: bool = True) -> str:
    """Serialize to the line-oriented text format."""
    lines = []
    if header:
        lines.append(f"QUBITS {c.n_qubits}")
    for g in c.gates:
        line = g.kind.value + " " + ",".join(str(q) for q in g.qubits)
        if g.params:
            line += " " + ",".join(format(p, ".17g") for p in g.params)
        lines.append(line)
    return "\n".join(lines) + "\n"


def parse_circuit(text: str) -> Circuit:
    """Parse the text format. An optional ``QUBITS n`` directive fixes the width;
    otherwise it is inferred from the largest operand."""
    n_qubits = None
    gates = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        head = parts[0].upper()
        if head == "QUBITS":
            if len(parts) != 2 or not parts[1].isdigit():
                raise CircuitError(f"line {lineno}: malformed QUBITS directive")
            n_qubits = int(parts[1])
            continue
        try:
            kind = GateKind(head)
        except ValueError:
            raise CircuitError(f"line {lineno}: unknown gate kind {head!r}") from None
        if len(parts) < 2:
            raise CircuitError(f"line {lineno}: missing operands")
        try:
            qubits = tuple(int(q) for q in parts[1].split(","))
        except ValueError:
            raise CircuitError(f"line {lineno}: malformed operand list {parts[1]!r}") from None
        params: tuple[float, ...] = ()
        if len(parts) > 2:
            try:
                params = tuple(float(p) for p in parts[2].split(","))
            except ValueError:
                raise CircuitError(f"line {lineno}: malformed parameter list {parts[2]!r}") from None
        if len(parts) > 3:
            raise CircuitError(f"line {lineno}: unexpected trailing tokens")
        gates.append(Gate(kind, qubits, params))
    if n_qubits is None:
        n_qubits = 1 + max((q for g in gates for q in g.qubits), default=0)
    c = Circuit(n_qubits, gates)
    return check_valid(c)
