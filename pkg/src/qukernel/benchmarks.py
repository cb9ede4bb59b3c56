"""Standard benchmark circuit generators: GHZ, QFT, DJ and BV."""

from __future__ import annotations

import math

from .circuit import Circuit

BENCHMARK_KINDS = ("ghz", "qft", "dj", "bv")


def ghz(n_qubits: int, measure: bool = True) -> Circuit:
    """Cat state: H then a CNOT chain."""
    if n_qubits < 2:
        raise ValueError("GHZ needs at least 2 qubits")
    c = Circuit(n_qubits)
    c.h(0)
    for q in range(n_qubits - 1):
        c.cnot(q, q + 1)
    if measure:
        for q in range(n_qubits):
            c.measure(q)
    return c


def qft(n_qubits: int, measure: bool = True) -> Circuit:
    """Fourier transform: H plus a controlled-phase ladder, no terminal reversal
    swaps. Gate count is n H + n(n-1)/2 CR."""
    if n_qubits < 1:
        raise ValueError("QFT needs at least 1 qubit")
    c = Circuit(n_qubits)
    for i in range(n_qubits):
        c.h(i)
        for j in range(i + 1, n_qubits):
            c.cr(j, i, math.pi / 2 ** (j - i))
    if measure:
        for q in range(n_qubits):
            c.measure(q)
    return c


def dj(n_qubits: int, oracle: str = "balanced", measure: bool = True) -> Circuit:
    """Deutsch-Jozsa over ``n_qubits`` data qubits plus one ancilla. The balanced
    oracle is f(x) = x0; the constant oracle is f(x) = 0."""
    if n_qubits < 1:
        raise ValueError("DJ needs at least 1 data qubit")
    if oracle not in ("balanced", "constant"):
        raise ValueError(f"unknown oracle selector {oracle!r}")
    anc = n_qubits
    c = Circuit(n_qubits + 1)
    c.x(anc)
    for q in range(n_qubits + 1):
        c.h(q)
    if oracle == "balanced":
        c.cnot(0, anc)
    for q in range(n_qubits):
        c.h(q)
    if measure:
        for q in range(n_qubits):
            c.measure(q)
    return c


def bv(secret: str, measure: bool = True) -> Circuit:
    """Bernstein-Vazirani: measuring the data register yields ``secret`` exactly.
    Bit i of the secret corresponds to data qubit i."""
    if not secret or any(b not in "01" for b in secret):
        raise ValueError(f"secret must be a nonempty bitstring, got {secret!r}")
    n = len(secret)
    anc = n
    c = Circuit(n + 1)
    c.x(anc)
    for q in range(n + 1):
        c.h(q)
    for i, bit in enumerate(secret):
        if bit == "1":
            c.cnot(i, anc)
    for q in range(n):
        c.h(q)
    if measure:
        for q in range(n):
            c.measure(q)
    return c


def generate_benchmark(kind: str, n_qubits: int, **params) -> Circuit:
    """Dispatch by kind. BV takes ``secret`` (default all-ones of length
    n_qubits); DJ takes ``oracle`` ("balanced" or "constant")."""
    kind = kind.lower()
    if kind == "ghz":
        return ghz(n_qubits, **params)
    if kind == "qft":
        return qft(n_qubits, **params)
    if kind == "dj":
        return dj(n_qubits, **params)
    if kind == "bv":
        secret = params.pop("secret", "1" * n_qubits)
        return bv(secret, **params)
    raise ValueError(f"unsupported benchmark kind {kind!r}")
