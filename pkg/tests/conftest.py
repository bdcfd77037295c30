"""Shared random generators and independent dense oracles for the tests."""

from __future__ import annotations

import math
from functools import reduce

import numpy as np
import pytest
from scipy.stats import ortho_group, unitary_group

from rebitsim.circuit import Circuit
from rebitsim.gates import g, kl_gate
from rebitsim.rlinear import Language

I2 = np.eye(2)
X2 = np.array([[0.0, 1.0], [1.0, 0.0]])
Z2 = np.diag([1.0, -1.0])
XZ2 = X2 @ Z2  # [[0, -1], [1, 0]]

# wire counts of the fixed-arity logical kinds
ARITY = {
    "X": 1, "Y": 1, "Z": 1, "H": 1, "S": 1, "T": 1, "YROT": 1, "ZROT": 1, "R": 1,
    "CX": 2, "CZ": 2, "CS": 2, "CH": 2, "CYROT": 2, "CCZ": 3, "CCX": 3,
    "G": 0, "K": 0, "CK": 1, "CCK": 2,
}
ANGLED = {"YROT", "ZROT", "R", "CYROT", "G"}
FULL_ALPHABET = sorted(ARITY) + ["CHZ", "CHX", "CHK", "KL"]
RCLIFFORD_ALPHABET = ["H", "S", "K", "CX", "CK"]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def kron_all(mats):
    return reduce(np.kron, mats)


def random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return psi / np.linalg.norm(psi)


def random_real_state(m: int, rng: np.random.Generator) -> np.ndarray:
    phi = rng.normal(size=1 << m)
    return phi / np.linalg.norm(phi)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    return unitary_group.rvs(d, random_state=rng) if d > 1 else np.exp(2j * math.pi * rng.random()) * np.eye(1)


def random_orthogonal(d: int, rng: np.random.Generator) -> np.ndarray:
    return ortho_group.rvs(d, random_state=rng)


def random_language(n: int, rng: np.random.Generator) -> Language:
    return Language(n, rng.random(1 << n) < 0.5)


def random_gate(kind: str, n: int, rng: np.random.Generator):
    """A random instance of ``kind`` on ``n`` wires, or None when it does not fit."""
    if kind == "KL":
        return kl_gate(random_language(n, rng))
    if kind in ("CHZ", "CHX"):
        k = int(rng.integers(1, n + 1))
        wires = rng.choice(n, size=k, replace=False) + 1
        return g(kind, *[int(w) for w in wires])
    if kind == "CHK":
        k = int(rng.integers(0, n + 1))
        wires = rng.choice(n, size=k, replace=False) + 1 if k else []
        return g(kind, *[int(w) for w in wires])
    arity = ARITY[kind]
    if arity > n:
        return None
    wires = [int(w) for w in rng.choice(n, size=arity, replace=False) + 1]
    param = float(rng.uniform(-math.pi, math.pi)) if kind in ANGLED else None
    return g(kind, *wires, param=param)


def random_circuit(n: int, length: int, rng: np.random.Generator, alphabet=FULL_ALPHABET) -> Circuit:
    gates = []
    while len(gates) < length:
        gate = random_gate(str(rng.choice(alphabet)), n, rng)
        if gate is not None:
            gates.append(gate)
    return Circuit(n, gates)


def kron_encode_operator(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Rebit image via the tensor formula, ancilla as the last factor."""
    return (
        np.kron(A.real, I2) + np.kron(A.imag, XZ2) + np.kron(B.real, Z2) + np.kron(B.imag, X2)
    )


def single_wire(mat: np.ndarray, wire: int, n: int) -> np.ndarray:
    return kron_all([mat if q == wire else I2 for q in range(1, n + 1)])


def controlled(mat: np.ndarray, controls, target: int, n: int) -> np.ndarray:
    """Dense controlled gate by explicit basis-state loop."""
    d = 1 << n
    out = np.zeros((d, d), dtype=complex)
    for x in range(d):
        bits = [(x >> (n - q)) & 1 for q in range(1, n + 1)]
        if all(bits[c - 1] for c in controls):
            t = bits[target - 1]
            for v in (0, 1):
                y_bits = list(bits)
                y_bits[target - 1] = v
                y = sum(b << (n - 1 - k) for k, b in enumerate(y_bits))
                out[y, x] += mat[v, t]
        else:
            out[x, x] = 1.0
    return out


# --------------------------------------------------------------------------
# acceptance report lines, printed after the run

ACCEPTANCE_LINES: list[str] = []


def report_criterion(number: int, name: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  [{number:2d}] {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("[")[1].split("]")[0])):
            terminalreporter.write_line(line)
