"""Circuits, depth, dual-path dense simulation and measurement."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .codec import decode_state, encode_state
from .gates import (
    CONJUGATION_KINDS,
    Gate,
    GateSyntaxError,
    apply_gates,
    format_gate,
    fused_rebit_image,
    gate_rebit_image,
    parse_gate,
    sequence_real_matrix,
    sequence_rlinear,
)
from .rlinear import RLinearOp

PROB_NORM_TOL = 1e-6
MAX_SAMPLING_QUBITS = 20


@dataclass
class Circuit:
    n: int
    gates: list[Gate] = field(default_factory=list)
    name: str = ""
    seed: Optional[int] = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a circuit needs at least one qubit")
        self.gates = list(self.gates)
        for gate in self.gates:
            gate.check_range(self.n)

    def append(self, gate: Gate) -> "Circuit":
        gate.check_range(self.n)
        self.gates.append(gate)
        return self

    def extend(self, gates: Iterable[Gate]) -> "Circuit":
        for gate in gates:
            self.append(gate)
        return self

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def to_text(self) -> str:
        lines = [f"qubits {self.n}"]
        if self.name:
            lines.insert(0, f"# {self.name}")
        lines.extend(format_gate(gate) for gate in self.gates)
        return "\n".join(lines) + "\n"

    def rlinear(self) -> RLinearOp:
        """Dense operator of the whole circuit."""
        return sequence_rlinear(self.gates, self.n)

    def real_matrix(self) -> np.ndarray:
        return sequence_real_matrix(self.gates, self.n)


def parse_circuit(text: str, name: str = "") -> Circuit:
    """Parse the text format: a ``qubits <n>`` header then one gate per line."""
    n = None
    gates = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n is None:
            head = line.split()
            if head[0].lower() != "qubits" or len(head) != 2:
                raise GateSyntaxError("expected header 'qubits <n>'", lineno)
            try:
                n = int(head[1])
            except ValueError:
                raise GateSyntaxError(f"bad qubit count {head[1]!r}", lineno) from None
            if n < 1:
                raise GateSyntaxError("qubit count must be positive", lineno)
            continue
        gates.append(parse_gate(line, n, lineno))
    if n is None:
        raise GateSyntaxError("missing 'qubits <n>' header")
    return Circuit(n, gates, name=name)


def load_circuit(path: str) -> Circuit:
    with open(path) as fh:
        return parse_circuit(fh.read(), name=str(path))


# --------------------------------------------------------------------------
# depth


def gates_commute_structurally(g1: Gate, g2: Gate, n: int) -> bool:
    """Sufficient structural test used for layering.

    Gates on disjoint wires commute unless one is conjugation-type and the
    other has non-real entries (conjugation does not commute with i).
    """
    if set(g1.support(n)) & set(g2.support(n)):
        return False
    if g1.kind in CONJUGATION_KINDS and not g2.is_real and g2.kind not in CONJUGATION_KINDS:
        return False
    if g2.kind in CONJUGATION_KINDS and not g1.is_real and g1.kind not in CONJUGATION_KINDS:
        return False
    return True


def layers(c: Circuit) -> list[list[Gate]]:
    """Greedy left-to-right layering into mutually commuting, wire-disjoint gates."""
    placed: list[int] = []
    out: list[list[Gate]] = []
    for k, gate in enumerate(c.gates):
        level = 0
        for j in range(k):
            if not gates_commute_structurally(c.gates[j], gate, c.n):
                level = max(level, placed[j] + 1)
        placed.append(level)
        while len(out) <= level:
            out.append([])
        out[level].append(gate)
    return out


def depth(c: Circuit) -> int:
    return len(layers(c))


# --------------------------------------------------------------------------
# simulation


def _check_state(c: Circuit, psi0: np.ndarray) -> np.ndarray:
    psi0 = np.asarray(psi0)
    if psi0.shape != (1 << c.n,):
        raise ValueError(f"state of shape {psi0.shape} for a {c.n}-qubit circuit")
    return psi0


def zero_state(n: int) -> np.ndarray:
    psi = np.zeros(1 << n, dtype=complex)
    psi[0] = 1.0
    return psi


def run_logical(c: Circuit, psi0: np.ndarray) -> np.ndarray:
    """Apply every gate directly to the n-qubit complex state."""
    psi = np.array(_check_state(c, psi0), dtype=complex)
    apply_gates(psi, c.gates, c.n)
    return psi


def rebit_circuit(c: Circuit, fused: bool = False) -> list[Gate]:
    """Rebit gates in circuit order realizing ``c`` on n+1 rebits."""
    image = fused_rebit_image if fused else gate_rebit_image
    out: list[Gate] = []
    for gate in c.gates:
        out.extend(reversed(image(gate, c.n)))
    return out


def run_physical(c: Circuit, psi0: np.ndarray) -> np.ndarray:
    """Encode, run the real rebit circuit, decode."""
    phi = encode_state(_check_state(c, psi0))
    apply_gates(phi, rebit_circuit(c), c.n + 1)
    return decode_state(phi)


def dual_path_discrepancy(c: Circuit, psi0: np.ndarray) -> float:
    return float(np.max(np.abs(run_logical(c, psi0) - run_physical(c, psi0)), initial=0.0))


def expand_single_ancilla(c: Circuit, fused: bool = False) -> Circuit:
    """Explicit (n+1)-rebit circuit obtained by concatenating gate images.

    Runs of phase gates inside one layer are merged into a single ancilla
    rotation. With ``fused`` the S and T images are single controlled ancilla
    rotations, which bounds the result depth by ``depth(c) * n``.
    """
    merged: list[Gate] = []
    for layer in layers(c):
        theta = sum(gate.param for gate in layer if gate.kind == "G")
        if any(gate.kind == "G" for gate in layer):
            merged.append(Gate("G", (), theta))
        merged.extend(gate for gate in layer if gate.kind != "G")
    body = Circuit(c.n, merged)
    out = Circuit(c.n + 1, rebit_circuit(body, fused=fused), name=c.name)
    return out


# --------------------------------------------------------------------------
# measurement


@dataclass(frozen=True)
class MeasurementRecord:
    outcome: str
    probability: Optional[float] = None


def probabilities(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi)
    return psi.real * psi.real + psi.imag * psi.imag


def rebit_probabilities(phi: np.ndarray) -> np.ndarray:
    """Data-register outcome probabilities of a rebit state, ancilla discarded."""
    phi = np.asarray(phi, dtype=float)
    re, im = phi[0::2], phi[1::2]
    return re * re + im * im


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def sample_indices(probs: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF sampling of ``shots`` indices."""
    if shots < 0:
        raise ValueError("shots must be non-negative")
    cdf = np.cumsum(probs)
    u = rng.random(shots) * cdf[-1]
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, len(probs) - 1)


def bitstring(x: int, n: int) -> str:
    return format(int(x), f"0{n}b")


def measure(
    psi: np.ndarray, shots: int, seed: int, strong: bool = False
) -> list[MeasurementRecord]:
    """Sample computational-basis outcomes of ``psi``.

    Returns one record per shot. With ``strong`` each record carries the exact
    probability of its outcome.
    """
    psi = np.asarray(psi)
    n = psi.shape[0].bit_length() - 1
    if n > MAX_SAMPLING_QUBITS:
        raise ValueError(f"sampling table limited to {MAX_SAMPLING_QUBITS} qubits")
    probs = probabilities(psi)
    total = float(probs.sum())
    if abs(total - 1.0) > PROB_NORM_TOL:
        raise ValueError(f"state is not normalized (norm^2 = {total})")
    idx = sample_indices(probs, shots, make_rng(seed))
    if strong:
        return [MeasurementRecord(bitstring(i, n), float(probs[i])) for i in idx]
    return [MeasurementRecord(bitstring(i, n)) for i in idx]


def exact_distribution(psi: np.ndarray, cutoff: float = 0.0) -> dict[str, float]:
    probs = probabilities(psi)
    n = len(probs).bit_length() - 1
    return {bitstring(i, n): float(p) for i, p in enumerate(probs) if p > cutoff}


def counts(records: Sequence[MeasurementRecord]) -> dict[str, int]:
    out: dict[str, int] = {}
    for r in records:
        out[r.outcome] = out.get(r.outcome, 0) + 1
    return dict(sorted(out.items()))
