"""Tableau simulation and sampling of real-Clifford circuits.

A circuit over {H, S, K, CX, CK, X, Z, CZ} on n qubits is translated gate by
gate into its rebit image on n + 1 rebits, which uses only the orthogonal
Clifford gates H, CX, CZ, X and Z. Those act on a word-packed CHP tableau
(destabilizers, stabilizers and one scratch row); rebit ``n + 1`` is the
ancilla and is never measured.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import tableau_kernels as tk
from .circuit import Circuit, make_rng
from .codec import encode_operator
from .gates import RCLIFFORD_KINDS, Gate, g, gate_rebit_image, sequence_real_matrix
from .paulis import PauliString, decompose_pauli, pauli_with_phase
from .rlinear import DEFAULT_TOL, RLinearOp, is_r_unitary

MAX_STRONG_QUBITS = 16
MAX_COMPILE_QUBITS = 8
REBIT_CLIFFORD_KINDS = frozenset({"H", "CX", "CZ", "X", "Z"})


class NotRCliffordError(ValueError):
    pass


def _pack_bits(bits: np.ndarray, words: int) -> np.ndarray:
    """Pack boolean rows into uint64 words, column ``c`` at bit ``c & 63`` of word ``c >> 6``."""
    bits = np.asarray(bits, dtype=bool)
    padded = np.zeros(bits.shape[:-1] + (words * 64,), dtype=bool)
    padded[..., : bits.shape[-1]] = bits
    packed = np.packbits(padded, axis=-1, bitorder="little")
    return np.ascontiguousarray(packed).view(np.uint64).copy()


def _unpack_bits(words: np.ndarray, m: int) -> np.ndarray:
    raw = np.ascontiguousarray(words, dtype=np.uint64).view(np.uint8)
    return np.unpackbits(raw, axis=-1, bitorder="little")[..., :m].astype(bool)


def _rows_to_strings(bits: np.ndarray) -> list[str]:
    if bits.shape[0] == 0:
        return []
    chars = (bits.astype(np.uint8) + ord("0")).tobytes().decode("ascii")
    w = bits.shape[1]
    return [chars[k * w : (k + 1) * w] for k in range(bits.shape[0])]


class StabilizerTableau:
    """CHP tableau on ``m`` rebits.

    Rows ``0..m-1`` are destabilizers, ``m..2m-1`` stabilizers and row ``2m``
    is scratch space for deterministic measurements.
    """

    def __init__(self, m: int, x: np.ndarray, z: np.ndarray, r: np.ndarray, seed: Optional[int] = None):
        self.m = m
        self.x = x
        self.z = z
        self.r = r
        self.seed = seed

    @classmethod
    def zero(cls, m: int, seed: Optional[int] = None) -> "StabilizerTableau":
        """|0...0> on ``m`` rebits."""
        words = tk.num_words(m)
        eye = _pack_bits(np.eye(m, dtype=bool), words)
        x = np.zeros((2 * m + 1, words), dtype=np.uint64)
        z = np.zeros_like(x)
        x[:m] = eye
        z[m : 2 * m] = eye
        return cls(m, x, z, np.zeros(2 * m + 1, dtype=np.uint8), seed)

    @classmethod
    def from_rows(
        cls, destabilizers: Sequence[PauliString], stabilizers: Sequence[PauliString]
    ) -> "StabilizerTableau":
        m = len(stabilizers)
        words = tk.num_words(m)
        rows = list(destabilizers) + list(stabilizers)
        x = np.zeros((2 * m + 1, words), dtype=np.uint64)
        z = np.zeros_like(x)
        r = np.zeros(2 * m + 1, dtype=np.uint8)
        x[: 2 * m] = _pack_bits(np.array([p.x for p in rows]), words)
        z[: 2 * m] = _pack_bits(np.array([p.z for p in rows]), words)
        r[: 2 * m] = [p.sign for p in rows]
        return cls(m, x, z, r)

    @property
    def n(self) -> int:
        """Number of encoded qubits."""
        return self.m - 1

    def copy(self) -> "StabilizerTableau":
        return StabilizerTableau(self.m, self.x.copy(), self.z.copy(), self.r.copy(), self.seed)

    def row(self, h: int) -> PauliString:
        return PauliString(
            _unpack_bits(self.x[h], self.m), _unpack_bits(self.z[h], self.m), int(self.r[h])
        )

    def stabilizers(self) -> list[PauliString]:
        return [self.row(h) for h in range(self.m, 2 * self.m)]

    def destabilizers(self) -> list[PauliString]:
        return [self.row(h) for h in range(self.m)]

    def apply_elementary(self, kind: str, wires: Sequence[int]) -> None:
        """Conjugate every row by H, CX, CZ, X or Z on 1-based rebit wires."""
        cols = [w - 1 for w in wires]
        for c in cols:
            if not 0 <= c < self.m:
                raise ValueError(f"wire {c + 1} outside 1..{self.m}")
        if kind == "H":
            tk.hadamard(self.x, self.z, self.r, cols[0])
        elif kind == "CX":
            tk.cnot(self.x, self.z, self.r, cols[0], cols[1])
        elif kind == "CZ":
            tk.cz(self.x, self.z, self.r, cols[0], cols[1])
        elif kind == "Z":
            tk.pauli_z(self.x, self.z, self.r, cols[0])
        elif kind == "X":
            tk.pauli_x(self.x, self.z, self.r, cols[0])
        else:
            raise NotRCliffordError(f"{kind} is not an orthogonal Clifford generator")

    def check_invariants(self) -> None:
        """Raise AssertionError unless the rows form a valid tableau of real Paulis."""
        rows = [self.row(h) for h in range(2 * self.m)]
        destab, stab = rows[: self.m], rows[self.m :]
        for k, s in enumerate(stab):
            assert s.is_real, f"stabilizer {s} is not a real Pauli"
            assert destab[k].is_real, f"destabilizer {destab[k]} is not a real Pauli"
            for t in stab[k + 1 :]:
                assert s.commutes_with(t), "stabilizers do not commute"
            for j, d in enumerate(destab):
                assert s.commutes_with(d) == (j != k), "destabilizer pairing broken"
        validate_stabilizer_group(stab)


def validate_stabilizer_group(gens: Sequence[PauliString]) -> None:
    """Raise ValueError unless ``gens`` generate a full stabilizer group.

    Requires Hermitian, pairwise commuting, independent generators, one per
    wire. With these, no product of generators equals -I.
    """
    if not gens:
        raise ValueError("empty generator list")
    m = gens[0].m
    if len(gens) != m:
        raise ValueError(f"need {m} generators for {m} wires, got {len(gens)}")
    for p in gens:
        if p.m != m:
            raise ValueError("generators have different widths")
        if not p.is_hermitian:
            raise ValueError(f"{p} is not Hermitian")
    for k, p in enumerate(gens):
        for q in gens[k + 1 :]:
            if not p.commutes_with(q):
                raise ValueError(f"{p} and {q} anticommute")
    mat = np.array([np.concatenate([p.x, p.z]) for p in gens], dtype=np.uint8)
    if gf2_rank(mat) != m:
        raise ValueError("generators are not independent")


def gf2_rank(mat: np.ndarray) -> int:
    mat = np.array(mat, dtype=np.uint8) & 1
    rank = 0
    rows, cols = mat.shape
    for c in range(cols):
        if rank == rows:
            break
        piv = np.flatnonzero(mat[rank:, c])
        if piv.size == 0:
            continue
        p = rank + int(piv[0])
        mat[[rank, p]] = mat[[p, rank]]
        hit = np.flatnonzero(mat[:, c])
        mat[hit[hit != rank]] ^= mat[rank]
        rank += 1
    return rank


# --------------------------------------------------------------------------
# logical-level interface


def init_zero(n: int, seed: Optional[int] = None) -> StabilizerTableau:
    """Tableau of the encoded |0...0>: n data rebits plus the ancilla."""
    if n < 1:
        raise ValueError("n must be positive")
    return StabilizerTableau.zero(n + 1, seed)


def apply_rclifford(t: StabilizerTableau, gate: Gate) -> StabilizerTableau:
    """Apply one logical gate from {H, S, K, CX, CK, X, Z, CZ} in place."""
    if gate.kind not in RCLIFFORD_KINDS:
        raise NotRCliffordError(f"{gate.kind} is not supported by the tableau engine")
    gate.check_range(t.n)
    for rebit_gate in reversed(gate_rebit_image(gate, t.n)):
        t.apply_elementary(rebit_gate.kind, rebit_gate.qubits)
    return t


def is_stabilizer_circuit(c: Circuit) -> bool:
    return all(gate.kind in RCLIFFORD_KINDS for gate in c.gates)


def simulate(c: Circuit, seed: Optional[int] = None) -> StabilizerTableau:
    t = init_zero(c.n, seed)
    for gate in c.gates:
        apply_rclifford(t, gate)
    return t


# --------------------------------------------------------------------------
# sampling


@dataclass
class AffineSampler:
    """Output support of a stabilizer state as ``x0 + span(basis)`` on the data rebits.

    A computational-basis measurement of a stabilizer state is uniform over
    an affine subspace. After one elimination pass each shot costs one random
    combination of at most ``m`` packed basis rows.
    """

    n: int
    x0: np.ndarray  # packed, shape (words,)
    basis: np.ndarray  # packed, shape (k, words)

    @classmethod
    def from_tableau(cls, t: StabilizerTableau) -> "AffineSampler":
        m, n = t.m, t.n
        sx = t.x[m : 2 * m].copy()
        sz = t.z[m : 2 * m].copy()
        sr = t.r[m : 2 * m].copy()
        rank = tk.xreduce(sx, sz, sr, m)
        pivots = tk.zreduce(sz, sr, rank, m)
        if rank + len(pivots) != m:
            raise AssertionError("stabilizer rows are not independent")
        zmat = _unpack_bits(sz[rank:], m)
        v0 = np.zeros(m, dtype=bool)
        v0[pivots] = sr[rank:].astype(bool)
        free = np.setdiff1d(np.arange(m), pivots)
        basis = np.zeros((free.size, m), dtype=bool)
        basis[np.arange(free.size), free] = True
        if pivots.size:
            basis[:, pivots] = zmat[:, free].T
        words = tk.num_words(n)
        return cls(n, _pack_bits(v0[:n], words), _pack_bits(basis[:, :n], words))

    def sample_bits(self, shots: int, rng: np.random.Generator) -> np.ndarray:
        k = self.basis.shape[0]
        kw = max(tk.num_words(k), 1)
        rand = rng.integers(0, np.iinfo(np.uint64).max, size=(shots, kw), dtype=np.uint64, endpoint=True)
        return tk.sample_affine(self.x0, self.basis, rand)

    def sample(self, shots: int, rng: np.random.Generator) -> list[str]:
        return _rows_to_strings(_unpack_bits(self.sample_bits(shots, rng), self.n))

    def support(self) -> tuple[int, list[int]]:
        """Exact support as (rank, sorted outcome integers with wire 1 most significant)."""
        if self.n > MAX_STRONG_QUBITS:
            raise ValueError(f"enumeration limited to {MAX_STRONG_QUBITS} qubits")
        weights = 1 << np.arange(self.n - 1, -1, -1, dtype=np.int64)
        x0 = int(_unpack_bits(self.x0, self.n).astype(np.int64) @ weights)
        rows = _unpack_bits(self.basis, self.n).reshape(-1, self.n)
        values = np.array([x0], dtype=np.int64)
        ind = _independent_rows(rows)
        for row in ind:
            b = int(row.astype(np.int64) @ weights)
            values = np.concatenate([values, values ^ b])
        return len(ind), sorted(int(v) for v in values)


def _independent_rows(rows: np.ndarray) -> list[np.ndarray]:
    """A GF(2) basis of the row span."""
    work = np.array(rows, dtype=bool)
    out = []
    for c in range(work.shape[1] if work.ndim == 2 else 0):
        piv = np.flatnonzero(work[:, c])
        if piv.size == 0:
            continue
        p = int(piv[0])
        row = work[p].copy()
        out.append(row)
        hit = np.flatnonzero(work[:, c])
        work[hit] ^= row
    return out


def sample(
    t: StabilizerTableau, shots: int, seed: Optional[int] = None, method: str = "affine"
) -> list[str]:
    """Seeded computational-basis samples of the data rebits (ancilla discarded).

    ``method="affine"`` draws from the affine support after one elimination.
    ``method="chp"`` measures rebits 1..n one at a time on a copy of the
    tableau, flipping a fair coin for each random outcome. Both follow the
    same distribution; the random streams differ.
    """
    if shots < 0:
        raise ValueError("shots must be non-negative")
    rng = make_rng(seed if seed is not None else (t.seed or 0))
    if method == "affine":
        return AffineSampler.from_tableau(t).sample(shots, rng)
    if method == "chp":
        return _sample_chp(t, shots, rng)
    raise ValueError(f"unknown sampling method {method!r}")


def _sample_chp(t: StabilizerTableau, shots: int, rng: np.random.Generator) -> list[str]:
    coins = rng.integers(0, 2, size=(shots, t.n), dtype=np.int64)
    out = np.zeros((shots, t.n), dtype=bool)
    for s in range(shots):
        work = t.copy()
        for q in range(t.n):
            bit, _ = tk.measure(work.x, work.z, work.r, work.m, q, int(coins[s, q]))
            out[s, q] = bool(bit)
    return _rows_to_strings(out)


def measure_qubit(t: StabilizerTableau, q: int, rng: np.random.Generator) -> tuple[int, bool]:
    """Measure data wire ``q`` (1-based) in place; returns (outcome, was_random)."""
    if not 1 <= q <= t.n:
        raise ValueError(f"wire {q} outside 1..{t.n}")
    return tk.measure(t.x, t.z, t.r, t.m, q - 1, int(rng.integers(0, 2)))


def strong_probabilities(t: StabilizerTableau) -> dict[str, float]:
    """Exact distribution of the data rebits; each probability is a power of 1/2."""
    if t.n > MAX_STRONG_QUBITS:
        raise ValueError(f"enumeration limited to {MAX_STRONG_QUBITS} qubits")
    rank, values = AffineSampler.from_tableau(t).support()
    p = 2.0**-rank
    return {format(v, f"0{t.n}b"): p for v in values}


# --------------------------------------------------------------------------
# conjugation of stabilizer states


def conjugate_stabilizer_state(gens: Sequence[PauliString]) -> list[PauliString]:
    """Generators of the complex-conjugated state: negate every generator with odd Y count."""
    gens = list(gens)
    validate_stabilizer_group(gens)
    return [p.with_sign(p.sign ^ (p.y_count & 1)) for p in gens]


# --------------------------------------------------------------------------
# compiling


def _image_pauli(w: np.ndarray, p: PauliString, tol: float) -> PauliString:
    found = decompose_pauli(w @ p.matrix().real @ w.T, tol)
    if found is None:
        raise NotRCliffordError(f"image of {p.letters} is not a Pauli")
    lam, q = found
    signed = pauli_with_phase(lam, q, tol)
    if signed is None or signed.imag:
        raise NotRCliffordError(f"image of {p.letters} has phase {lam}")
    return signed


def tableau_of_orthogonal(w: np.ndarray, tol: float = DEFAULT_TOL) -> StabilizerTableau:
    """Conjugation tableau of an orthogonal Clifford: rows are W X_j W^T and W Z_j W^T."""
    m = w.shape[0].bit_length() - 1
    destab = [_image_pauli(w, PauliString.single(m, j, "X"), tol) for j in range(1, m + 1)]
    stab = [_image_pauli(w, PauliString.single(m, j, "Z"), tol) for j in range(1, m + 1)]
    return StabilizerTableau.from_rows(destab, stab)


def _reduce_tableau(t: StabilizerTableau) -> list[Gate]:
    """Gates that, applied in order, bring the tableau to the identity tableau."""
    m = t.m
    gates: list[Gate] = []

    def do(kind: str, *wires: int) -> None:
        t.apply_elementary(kind, [w + 1 for w in wires])
        gates.append(g(kind, *[w + 1 for w in wires]))

    for p in range(m):
        # image of X_p -> +-X_p
        row = t.row(p)
        ys = [c for c in range(p, m) if row.x[c] and row.z[c]]
        for a, b in zip(ys[0::2], ys[1::2]):
            do("CZ", a, b)
        row = t.row(p)
        for c in range(p, m):
            if row.z[c] and not row.x[c]:
                do("H", c)
        row = t.row(p)
        xs = [c for c in range(p, m) if row.x[c]]
        k = p if p in xs else xs[0]
        for c in xs:
            if c != k:
                do("CX", k, c)
        if k != p:
            do("CX", k, p)
            do("CX", p, k)
            do("CX", k, p)
        # image of Z_p -> +-Z_p, keeping X_p fixed
        row = t.row(m + p)
        if row.x[p]:
            j = next(c for c in range(p + 1, m) if row.x[c])
            do("CX", j, p)
        row = t.row(m + p)
        ys = [c for c in range(p + 1, m) if row.x[c] and row.z[c]]
        for a, b in zip(ys[0::2], ys[1::2]):
            do("CZ", a, b)
        row = t.row(m + p)
        for c in range(p + 1, m):
            if row.x[c] and not row.z[c]:
                do("H", c)
        row = t.row(m + p)
        for c in range(p + 1, m):
            if row.z[c]:
                do("CX", c, p)
        if t.r[p]:
            do("Z", p)
        if t.r[m + p]:
            do("X", p)
    return gates


def compile_orthogonal_clifford(w: np.ndarray, tol: float = DEFAULT_TOL) -> Circuit:
    """Circuit over {H, Z, X, CX, CZ} whose matrix equals the orthogonal Clifford ``w``."""
    w = np.asarray(w, dtype=float)
    m = w.shape[0].bit_length() - 1
    t = tableau_of_orthogonal(w, tol)
    gates = list(reversed(_reduce_tableau(t)))
    got = sequence_real_matrix(gates, m)
    if np.max(np.abs(got + w)) < np.max(np.abs(got - w)):
        # the tableau fixes W only up to sign; (HZ)^4 = -I restores it
        gates.extend([g("Z", 1), g("H", 1)] * 4)
        got = sequence_real_matrix(gates, m)
    if np.max(np.abs(got - w)) > max(tol, 1e-9) * w.shape[0]:
        raise NotRCliffordError("compiled circuit does not reproduce the matrix")
    return Circuit(m, gates)


def compile_rclifford(op: RLinearOp, tol: float = DEFAULT_TOL) -> Circuit:
    """Orthogonal Clifford circuit on n+1 rebits realizing the encoding of ``op``.

    Each stage fixes the images of X_p and Z_p and then recurses on the
    remaining wires, so the gate count is O(n^2).
    """
    if op.n > MAX_COMPILE_QUBITS:
        raise ValueError(f"compiling limited to {MAX_COMPILE_QUBITS} qubits")
    if not is_r_unitary(op, max(tol, 1e-9)):
        raise NotRCliffordError("operator is not R-unitary")
    return compile_orthogonal_clifford(encode_operator(op), tol)
