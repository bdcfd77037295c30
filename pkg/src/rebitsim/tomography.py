"""Rebit state tomography from real Pauli observables.

The real Pauli strings (even number of Y letters) span the real symmetric
matrices, so their expectations fix a real density matrix and hence a real
pure state up to sign. On rebits that includes the global phase of the
encoded qubit state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .circuit import Circuit, make_rng
from .gates import g, sequence_real_matrix
from .paulis import PauliString, all_pauli_strings

MAX_OBSERVABLE_WIDTH = 12
NORM_TOL = 1e-9


@dataclass(frozen=True)
class ObservableSet:
    m: int
    observables: tuple[PauliString, ...]

    def __len__(self) -> int:
        return len(self.observables)

    def __iter__(self):
        return iter(self.observables)

    def labels(self) -> list[str]:
        return [p.letters for p in self.observables]


def observable_count(m: int) -> int:
    """(4^m + 2^m) / 2, the dimension of real symmetric 2^m x 2^m matrices."""
    return (4**m + 2**m) // 2


def enumerate_observables(m: int) -> ObservableSet:
    """All Pauli strings on ``m`` rebits with an even number of Y letters, in IXYZ order."""
    if not 1 <= m <= MAX_OBSERVABLE_WIDTH:
        raise ValueError(f"m must be in 1..{MAX_OBSERVABLE_WIDTH}")
    obs = tuple(p for p in all_pauli_strings(m) if p.y_count % 2 == 0)
    return ObservableSet(m, obs)


def _pauli_apply(p: PauliString, phi: np.ndarray) -> np.ndarray:
    """``p @ phi`` via a permutation and a sign pattern; real for even-Y strings."""
    d = phi.shape[0]
    idx = np.arange(d)
    xm, zm = p.xmask(), p.zmask()
    signs = np.where(np.bitwise_count(idx & zm) & 1, -1.0, 1.0)
    # P = i^{#Y} X^x Z^z and i^{#Y} = (-1)^{#Y/2} for even counts
    signs = signs * (-1.0) ** (p.y_count // 2)
    out = np.empty_like(phi)
    out[idx ^ xm] = signs * phi
    return out


def _check_state(phi: np.ndarray) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    d = phi.shape[0]
    if d < 2 or d & (d - 1):
        raise ValueError("state length must be a power of two >= 2")
    if abs(float(phi @ phi) - 1.0) > NORM_TOL:
        raise ValueError("state is not normalized")
    return phi


def expectations(phi: np.ndarray, obs: Optional[ObservableSet] = None) -> dict[str, float]:
    """Exact ``<phi|p|phi>`` for every observable."""
    phi = _check_state(phi)
    m = phi.shape[0].bit_length() - 1
    obs = obs if obs is not None else enumerate_observables(m)
    return {p.letters: float(phi @ _pauli_apply(p, phi)) for p in obs}


def sampled_expectations(
    phi: np.ndarray, shots: int, seed: int, obs: Optional[ObservableSet] = None
) -> dict[str, tuple[float, float]]:
    """Shot-based estimates ``(mean, standard error)`` of every observable.

    Each observable is measured by rotating with :func:`measurement_circuit`
    and reading the parity of the computational-basis outcome on its support.
    """
    phi = _check_state(phi)
    m = phi.shape[0].bit_length() - 1
    obs = obs if obs is not None else enumerate_observables(m)
    rng = make_rng(seed)
    out = {}
    for p in obs:
        rotated = phi.copy()
        circ = measurement_circuit(p)
        if circ.gates:
            rotated = sequence_real_matrix(circ.gates, m) @ rotated
        probs = rotated * rotated
        probs /= probs.sum()
        outcomes = rng.choice(len(probs), size=shots, p=probs)
        mask = parity_mask(p)
        values = np.where(np.bitwise_count(outcomes & mask) & 1, -1.0, 1.0)
        mean = float(values.mean()) if shots else 0.0
        err = float(values.std(ddof=1) / math.sqrt(shots)) if shots > 1 else float("inf")
        out[p.letters] = (mean, err)
    return out


def density_from_expectations(expect: dict[str, float], m: int) -> np.ndarray:
    """``rho = sum_p a_p p`` with ``a_p = <p> / 2^m``."""
    d = 1 << m
    rho = np.zeros((d, d))
    for label, value in expect.items():
        p = PauliString.from_label(label)
        rho += (value / d) * p.matrix().real
    return rho


def reconstruct(phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Density matrix from the observable expectations and its dominant eigenvector.

    The returned state is fixed in sign by making its largest-magnitude
    amplitude positive.
    """
    phi = _check_state(phi)
    m = phi.shape[0].bit_length() - 1
    rho = density_from_expectations(expectations(phi), m)
    evals, evecs = np.linalg.eigh(rho)
    state = evecs[:, -1]
    k = int(np.argmax(np.abs(state)))
    if state[k] < 0:
        state = -state
    return rho, state


def parity_mask(p: PauliString) -> int:
    """Computational-basis bits whose parity gives the eigenvalue after rotation."""
    return p.xmask() | p.zmask()


def measurement_circuit(p: PauliString) -> Circuit:
    """Rotation over {H, CZ} after which Z-parity statistics reproduce ``<p>``.

    Z letters need nothing, X letters get H, and Y letters are paired left to
    right, each pair (a, b) getting CZ a b followed by H a and H b.
    """
    if p.y_count % 2:
        raise ValueError("observable has an odd number of Y letters")
    letters = p.letters
    gates = []
    ys = [k + 1 for k, c in enumerate(letters) if c == "Y"]
    for a, b in zip(ys[0::2], ys[1::2]):
        gates += [g("CZ", a, b), g("H", a), g("H", b)]
    gates += [g("H", k + 1) for k, c in enumerate(letters) if c == "X"]
    return Circuit(p.m, gates, name=f"measure {letters}")


def rotated_expectation(p: PauliString, phi: np.ndarray) -> float:
    """``<p>`` computed from Z-parity probabilities after :func:`measurement_circuit`."""
    phi = np.asarray(phi, dtype=float)
    m = p.m
    circ = measurement_circuit(p)
    rotated = sequence_real_matrix(circ.gates, m) @ phi if circ.gates else phi
    probs = rotated * rotated
    idx = np.arange(len(probs))
    signs = np.where(np.bitwise_count(idx & parity_mask(p)) & 1, -1.0, 1.0)
    return float(np.sum(signs * probs))


def report(phi: np.ndarray) -> dict:
    phi = _check_state(phi)
    m = phi.shape[0].bit_length() - 1
    expect = expectations(phi)
    _, state = reconstruct(phi)
    return {
        "m": m,
        "num_observables": len(expect),
        "expectations": expect,
        "reconstruction_overlap": float(abs(state @ phi)),
    }
