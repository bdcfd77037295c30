"""Real-Pauli and real-Clifford membership, the symmetric-Pauli root and phase correction.

An R-Pauli is ``i^c P K^b`` with ``P`` an unsigned Pauli string (literal Y
letters) and ``K`` complex conjugation. Level ``k`` of the real hierarchy
holds the R-unitaries that conjugate every R-Pauli into level ``k - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .gates import g, sequence_rlinear
from .paulis import PauliString, all_pauli_strings, decompose_pauli
from .rlinear import DEFAULT_TOL, RLinearOp, check_dense_size, dagger, is_r_unitary, star

MAX_PAULI_QUBITS = 8
MAX_CLIFFORD_QUBITS = 6
MAX_LEVEL_QUBITS = 3
MAX_LEVEL = 4


@dataclass(frozen=True)
class RPauli:
    c: int
    pauli: PauliString
    b: int

    def __post_init__(self):
        object.__setattr__(self, "c", int(self.c) % 4)
        object.__setattr__(self, "b", int(self.b) & 1)

    @property
    def n(self) -> int:
        return self.pauli.m

    def to_rlinear(self) -> RLinearOp:
        mat = (1j**self.c) * self.pauli.unsigned().matrix()
        zero = np.zeros_like(mat)
        return RLinearOp(zero, mat) if self.b else RLinearOp(mat, zero)

    def to_json(self) -> dict:
        return {"c": self.c, "pauli": self.pauli.letters, "b": self.b}

    def __str__(self) -> str:
        return f"i^{self.c} {self.pauli.letters}" + (" K" if self.b else "")


def _match_phase(lam: complex, tol: float) -> Optional[int]:
    for c in range(4):
        if abs(lam - 1j**c) < tol:
            return c
    return None


def is_r_pauli(op: RLinearOp, tol: float = DEFAULT_TOL) -> Optional[RPauli]:
    """Decompose ``op`` as ``i^c P K^b`` or return None."""
    if op.n > MAX_PAULI_QUBITS:
        raise ValueError(f"Pauli recognition limited to {MAX_PAULI_QUBITS} qubits")
    na = np.max(np.abs(op.A), initial=0.0)
    nb = np.max(np.abs(op.B), initial=0.0)
    if nb < tol:
        b, mat = 0, op.A
    elif na < tol:
        b, mat = 1, op.B
    else:
        return None
    found = decompose_pauli(mat, tol)
    if found is None:
        return None
    lam, p = found
    c = _match_phase(lam, tol)
    if c is None:
        return None
    return RPauli(c, p, b)


def r_pauli_generators(n: int) -> list[RLinearOp]:
    """X_i and Z_i for every wire, iI and K; they generate the R-Pauli group."""
    d = 1 << n
    out = []
    for q in range(1, n + 1):
        for letter in "XZ":
            out.append(RLinearOp.linear(PauliString.single(n, q, letter).matrix()))
    out.append(RLinearOp.linear(1j * np.eye(d)))
    out.append(RLinearOp.conjugation(n))
    return out


def all_r_paulis(n: int) -> list[RLinearOp]:
    """Every R-Pauli up to sign: ``i^c P K^b`` with ``c, b`` in {0, 1}."""
    out = []
    for p in all_pauli_strings(n):
        for c in (0, 1):
            for b in (0, 1):
                out.append(RPauli(c, p, b).to_rlinear())
    return out


def _conj(op: RLinearOp, q: RLinearOp) -> RLinearOp:
    return star(star(op, q), dagger(op))


def is_r_clifford(op: RLinearOp, tol: float = DEFAULT_TOL) -> bool:
    """True iff conjugating each R-Pauli generator by ``op`` gives an R-Pauli."""
    if op.n > MAX_CLIFFORD_QUBITS:
        raise ValueError(f"Clifford test limited to {MAX_CLIFFORD_QUBITS} qubits")
    if not is_r_unitary(op, max(tol, 1e-9)):
        raise ValueError("operator is not R-unitary")
    return all(is_r_pauli(_conj(op, q), tol) is not None for q in r_pauli_generators(op.n))


def _key(op: RLinearOp) -> bytes:
    return np.round(np.concatenate([op.A.ravel(), op.B.ravel()]), 8).tobytes()


def _member(op: RLinearOp, k: int, tol: float, paulis: list[RLinearOp], memo: dict) -> bool:
    if k == 1:
        return is_r_pauli(op, tol) is not None
    if k == 2:
        return is_r_clifford(op, tol)
    key = (k, _key(op))
    if key in memo:
        return memo[key]
    # level k >= 3 is not a group, so every R-Pauli is conjugated, not just generators
    result = all(_member(_conj(op, q), k - 1, tol, paulis, memo) for q in paulis)
    memo[key] = result
    return result


def hierarchy_level(op: RLinearOp, kmax: int = 3, tol: float = DEFAULT_TOL) -> Optional[int]:
    """Smallest ``k <= kmax`` with ``op`` in level ``k`` of the real hierarchy."""
    if op.n > MAX_LEVEL_QUBITS:
        raise ValueError(f"level search limited to {MAX_LEVEL_QUBITS} qubits")
    if not 1 <= kmax <= MAX_LEVEL:
        raise ValueError(f"kmax must be in 1..{MAX_LEVEL}")
    if not is_r_unitary(op, max(tol, 1e-9)):
        raise ValueError("operator is not R-unitary")
    paulis = all_r_paulis(op.n)
    memo: dict = {}
    for k in range(1, kmax + 1):
        if _member(op, k, tol, paulis, memo):
            return k
    return None


def membership_report(op: RLinearOp, kmax: int = 3, tol: float = DEFAULT_TOL) -> dict:
    rp = is_r_pauli(op, tol)
    unitary = is_r_unitary(op, max(tol, 1e-9))
    report = {
        "r_pauli": rp is not None,
        "decomposition": rp.to_json() if rp is not None else None,
        "r_clifford": bool(unitary and op.n <= MAX_CLIFFORD_QUBITS and is_r_clifford(op, tol)),
        "level": None,
    }
    if unitary and op.n <= MAX_LEVEL_QUBITS:
        report["level"] = hierarchy_level(op, kmax, tol)
    return report


# --------------------------------------------------------------------------
# symmetric Paulis and phase correction


def symmetric_pauli_root(p, tol: float = 1e-10) -> np.ndarray:
    """Clifford ``U`` with ``U U^T = p`` for a symmetric Pauli ``p``.

    ``p`` is an :class:`RPauli` with ``b = 0`` or a :class:`PauliString`
    whose matrix is symmetric (even Y count). With J_x, J_y, J_z the X, Y and
    Z positions and the Y positions paired left to right, the candidate is
    ``(prod CX over Y pairs)(prod H over J_x and first Ys)(prod S over all)``
    followed by the phase that makes ``U U^T`` equal ``p`` exactly.
    """
    if isinstance(p, RPauli):
        if p.b:
            raise ValueError("p must be linear (b = 0)")
        target = p.to_rlinear().A
        string = p.pauli
    else:
        target = p.matrix()
        string = p
    if not np.allclose(target, target.T, atol=tol):
        raise ValueError("p is not symmetric")
    n = string.m
    check_dense_size(n)
    letters = string.letters
    xs = [k + 1 for k, c in enumerate(letters) if c == "X"]
    ys = [k + 1 for k, c in enumerate(letters) if c == "Y"]
    support = [k + 1 for k, c in enumerate(letters) if c != "I"]
    firsts, seconds = ys[0::2], ys[1::2]
    circuit = [g("S", q) for q in support]
    circuit += [g("H", q) for q in sorted(xs + firsts)]
    circuit += [g("CX", a, b) for a, b in zip(firsts, seconds)]
    U0 = sequence_rlinear(circuit, n).A
    prod = U0 @ U0.T
    lam = np.vdot(target, prod) / (1 << n)
    beta = float(np.angle(lam))
    U = np.exp(-0.5j * beta) * U0
    if np.max(np.abs(U @ U.T - target)) > tol:
        raise ArithmeticError("symmetric Pauli root construction failed")
    return U


def is_clifford_unitary(u: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``u`` conjugates every X_i and Z_i into a phase times a Pauli."""
    u = np.asarray(u, dtype=complex)
    n = u.shape[0].bit_length() - 1
    for q in range(1, n + 1):
        for letter in "XZ":
            img = u @ PauliString.single(n, q, letter).matrix() @ u.conj().T
            if decompose_pauli(img, tol) is None:
                return False
    return True


def phase_correct_clifford(u: np.ndarray, tol: float = DEFAULT_TOL) -> tuple[float, RLinearOp]:
    """Angle ``theta = -beta / 2`` with ``u u^T = e^{i beta} X^x Z^z``, and ``e^{i theta} u``."""
    u = np.asarray(u, dtype=complex)
    if not np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=max(tol, 1e-9)):
        raise ValueError("u is not unitary")
    if not is_clifford_unitary(u, max(tol, 1e-9)):
        raise ValueError("u is not a Clifford unitary")
    found = decompose_pauli(u @ u.T, max(tol, 1e-9))
    if found is None:
        raise ValueError("u u^T is not a Pauli")
    lam, p = found
    # decompose_pauli folds i^{#Y} into lam; undo that to get the X^x Z^z phase
    raw = lam * (1j**p.y_count)
    beta = float(np.angle(raw))
    theta = -beta / 2
    return theta, RLinearOp.linear(np.exp(1j * theta) * u)


def random_clifford_unitary(n: int, rng: np.random.Generator, length: Optional[int] = None) -> np.ndarray:
    """Random Clifford from a random {H, S, CX} word with a random global phase."""
    length = length if length is not None else 10 * n * n + 5
    circuit = []
    for _ in range(length):
        kind = rng.choice(["H", "S", "CX"] if n > 1 else ["H", "S"])
        if kind == "CX":
            a, b = rng.choice(n, 2, replace=False) + 1
            circuit.append(g("CX", int(a), int(b)))
        else:
            circuit.append(g(str(kind), int(rng.integers(1, n + 1))))
    phase = np.exp(2j * math.pi * rng.random())
    return phase * sequence_rlinear(circuit, n).A
