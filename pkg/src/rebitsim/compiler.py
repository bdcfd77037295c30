"""Orthogonal and real-unitary compilation.

* :func:`two_level_decompose` writes an orthogonal matrix as a product of
  two-level orthogonals by column-major elimination.
* :func:`two_level_to_gates` realizes one two-level factor with Gray-code
  routing and a multiply-controlled rotation or reflection, using only H, X,
  R and the multiply-controlled Z family.
* :func:`factor_r_unitary` writes an R-unitary as unitaries alternating with
  partial conjugations ``K_L``.
* :func:`synthesize_kl_circuit` builds ``K_L`` from a reversible circuit that
  decides membership in ``L``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .circuit import Circuit
from .codec import encode_operator
from .gates import (
    Gate,
    apply_gate,
    apply_gates,
    decode_rebit_gate,
    g,
    gate_language,
    sequence_rlinear,
)
from .rlinear import (
    DEFAULT_TOL,
    Language,
    RLinearOp,
    dagger,
    is_r_unitary,
    make_kl,
    star,
    star_all,
)

RECONSTRUCTION_TOL = 1e-8
_SKIP_NORM = 1e-12
_PAIR_SIGMA = 1e-10


class NotOrthogonalError(ValueError):
    pass


# --------------------------------------------------------------------------
# two-level decomposition


@dataclass(frozen=True)
class TwoLevelOrthogonal:
    """Orthogonal matrix equal to the identity outside rows and columns ``j < i``.

    ``block`` acts on the coordinates ``(j, i)`` in that order.
    """

    dim: int
    i: int
    j: int
    block: np.ndarray

    def __post_init__(self):
        if not 0 <= self.j < self.i < self.dim:
            raise ValueError(f"need 0 <= j < i < dim, got j={self.j} i={self.i}")
        block = np.array(self.block, dtype=float)
        if block.shape != (2, 2):
            raise ValueError("block must be 2x2")
        block.flags.writeable = False
        object.__setattr__(self, "block", block)

    def matrix(self) -> np.ndarray:
        out = np.eye(self.dim)
        idx = [self.j, self.i]
        out[np.ix_(idx, idx)] = self.block
        return out

    @property
    def is_reflection(self) -> bool:
        return bool(np.linalg.det(self.block) < 0)


def _check_orthogonal(w: np.ndarray, tol: float) -> None:
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise NotOrthogonalError("expected a square matrix")
    if np.max(np.abs(w.T @ w - np.eye(w.shape[0])), initial=0.0) > tol:
        raise NotOrthogonalError("matrix is not orthogonal")


def two_level_decompose(w: np.ndarray, tol: float = DEFAULT_TOL) -> list[TwoLevelOrthogonal]:
    """Factors ``F_1, ..., F_k`` with ``F_1 @ ... @ F_k = w`` and ``k <= d(d-1)/2``.

    Column ``j`` is cleared below the diagonal by reflections on ``(j, i)``
    for increasing ``i``; entries already zero are skipped. A column that
    needed no elimination but has ``w_jj = -1`` gets a sign flip, and the
    final 2x2 block is emitted as one factor.
    """
    w = np.array(w, dtype=float)
    _check_orthogonal(w, tol)
    d = w.shape[0]
    factors: list[TwoLevelOrthogonal] = []
    if d < 2:
        if d == 1 and w[0, 0] < 0:
            raise NotOrthogonalError("1x1 reflection has no two-level form")
        return factors
    for j in range(d - 2):
        eliminated = False
        for i in range(j + 1, d):
            a, b = w[j, j], w[i, j]
            if abs(b) < _SKIP_NORM:
                continue
            norm = math.hypot(a, b)
            if norm < _SKIP_NORM:
                continue
            v = np.array([[a, b], [b, -a]]) / norm
            rows = w[[j, i], :]
            w[[j, i], :] = v @ rows
            w[i, j] = 0.0
            factors.append(TwoLevelOrthogonal(d, i, j, v.T))
            eliminated = True
        if not eliminated and w[j, j] < 0:
            v = np.diag([-1.0, 1.0])
            w[[j, j + 1], :] = v @ w[[j, j + 1], :]
            factors.append(TwoLevelOrthogonal(d, j + 1, j, v))
    last = w[d - 2 :, d - 2 :]
    if np.max(np.abs(last - np.eye(2))) > _SKIP_NORM:
        factors.append(TwoLevelOrthogonal(d, d - 1, d - 2, last))
    return factors


def product_of_two_level(factors: Sequence[TwoLevelOrthogonal], d: int) -> np.ndarray:
    out = np.eye(d)
    for f in factors:
        out = out @ f.matrix()
    return out


# --------------------------------------------------------------------------
# gate synthesis for one two-level factor


def z_family(wires: Sequence[int]) -> Gate:
    """Multiply-controlled Z on ``wires``; symmetric in its wires."""
    wires = tuple(sorted(wires))
    kinds = {1: "Z", 2: "CZ", 3: "CCZ"}
    return Gate(kinds.get(len(wires), "CHZ"), wires)


def _label_bit(label: int, wire: int, m: int) -> int:
    return (label >> (m - wire)) & 1


def _controlled_x(controls: dict[int, int], target: int) -> list[Gate]:
    flips = [g("X", q) for q, bit in sorted(controls.items()) if bit == 0]
    core = [g("H", target), z_family(list(controls) + [target]), g("H", target)]
    return flips + core + flips


def _controlled_orthogonal(M: np.ndarray, controls: dict[int, int], target: int) -> list[Gate]:
    """Apply the 2x2 orthogonal ``M`` to ``target`` when every control has its given value."""
    flips = [g("X", q) for q, bit in sorted(controls.items()) if bit == 0]
    wires = list(controls) + [target]
    body: list[Gate] = []
    if np.linalg.det(M) < 0:
        # M = Rot(phi) Z
        body.append(z_family(wires))
        M = M @ np.diag([1.0, -1.0])
    phi = math.atan2(M[1, 0], M[0, 0])
    if abs(phi) > 1e-15:
        cx = [g("H", target), z_family(wires), g("H", target)]
        # R(phi/2) X R(-phi/2) X = R(phi) when the controls fire, else I
        body += cx + [g("R", target, param=-phi / 2)] + cx + [g("R", target, param=phi / 2)]
    if not body:
        return []
    return flips + body + flips


def two_level_to_gates(v: TwoLevelOrthogonal, m: int) -> list[Gate]:
    """Gates in circuit order on ``m`` wires whose product is ``v.matrix()``.

    Basis state ``j`` is routed toward ``i`` along a Gray-code path that flips
    the differing wires in increasing order; each step is a ``C^{m-1} X``.
    The block then acts on the last differing wire under ``m - 1`` controls,
    and the routing is undone.
    """
    if v.dim != 1 << m:
        raise ValueError(f"factor of dimension {v.dim} does not act on {m} wires")
    diff = [q for q in range(1, m + 1) if _label_bit(v.i ^ v.j, q, m)]
    path = [v.j]
    for q in diff[:-1]:
        path.append(path[-1] ^ (1 << (m - q)))
    routing: list[Gate] = []
    for k in range(len(path) - 1):
        q = diff[k]
        controls = {w: _label_bit(path[k], w, m) for w in range(1, m + 1) if w != q}
        routing += _controlled_x(controls, q)
    target = diff[-1]
    src = path[-1]
    controls = {w: _label_bit(src, w, m) for w in range(1, m + 1) if w != target}
    block = v.block if _label_bit(src, target, m) == 0 else v.block[::-1, ::-1]
    core = _controlled_orthogonal(block, controls, target)
    return routing + core + list(reversed(routing))


def orthogonal_to_gates(w: np.ndarray, tol: float = DEFAULT_TOL) -> list[Gate]:
    """Circuit-order gates over {H, X, R, Z-family} whose product is ``w``."""
    w = np.asarray(w, dtype=float)
    m = w.shape[0].bit_length() - 1
    gates: list[Gate] = []
    for f in reversed(two_level_decompose(w, tol)):
        gates += two_level_to_gates(f, m)
    return gates


# --------------------------------------------------------------------------
# factorization into unitaries and partial conjugations

Factor = Union[np.ndarray, Language]


@dataclass
class AntiunitaryFactorization:
    """``U_k K_{L_k} ... U_1 K_{L_1} U_0`` listed in product order (leftmost acts last).

    Entries are unitary matrices or :class:`Language` values standing for
    ``K_L``. Unitaries and languages alternate.
    """

    n: int
    factors: list[Factor] = field(default_factory=list)
    method: str = "canonical"

    @property
    def num_kl(self) -> int:
        return sum(isinstance(f, Language) for f in self.factors)

    @property
    def languages(self) -> list[Language]:
        return [f for f in self.factors if isinstance(f, Language)]

    @property
    def length(self) -> int:
        """Number of partial antiunitary factors ``U_j K_{L_j}``; a unitary counts as one."""
        return max(1, self.num_kl)

    def factor_ops(self) -> list[RLinearOp]:
        return [make_kl(f) if isinstance(f, Language) else RLinearOp.linear(f) for f in self.factors]

    def reconstruct(self) -> RLinearOp:
        ops = self.factor_ops()
        if not ops:
            return RLinearOp.identity(self.n)
        return star_all(*ops)

    def residual(self, op: RLinearOp) -> float:
        return self.reconstruct().distance(op)

    def to_json(self) -> list[dict]:
        out = []
        for f in self.factors:
            if isinstance(f, Language):
                out.append({"type": "KL", "mask": f.to_hex()})
            else:
                out.append(
                    {
                        "type": "unitary",
                        "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in f],
                    }
                )
        return out


def length_bound(n: int) -> int:
    """Upper bound ``(n+1) 2^n (2^n - 1) / 2`` on the number of partial antiunitaries."""
    d = 1 << n
    return (n + 1) * d * (d - 1) // 2


def _append_unitary(factors: list[Factor], U: np.ndarray) -> None:
    if factors and not isinstance(factors[-1], Language):
        factors[-1] = factors[-1] @ U
    else:
        factors.append(U)


def _append_language(factors: list[Factor], lang: Language) -> None:
    if factors and isinstance(factors[-1], Language):
        merged = factors[-1] ^ lang
        factors.pop()
        if merged.size:
            factors.append(merged)
        return
    if factors and len(factors) >= 2 and isinstance(factors[-2], Language):
        U = factors[-1]
        if np.allclose(U, np.eye(U.shape[0]), atol=1e-14):
            factors.pop()
            _append_language(factors, lang)
            return
    if lang.size:
        factors.append(lang)


def _tidy(factors: list[Factor], d: int) -> list[Factor]:
    """Drop identity unitaries that sit between or beside languages."""
    out: list[Factor] = []
    for f in factors:
        if isinstance(f, Language):
            _append_language(out, f)
        else:
            _append_unitary(out, f)
    cleaned = [
        f
        for f in out
        if isinstance(f, Language) or not np.allclose(f, np.eye(d), atol=1e-14)
    ]
    return cleaned or [np.eye(d, dtype=complex)]


def _youla_basis(P: np.ndarray, N: np.ndarray):
    """Unitary V, rotation angles and language sets that put (P, N) in canonical form.

    ``P = A^dagger A`` and ``N = 2 A^dagger B``. Eigenvectors of P with
    ``N conj(v) = 0`` are singles (p = 1: unitary part, p = 0: conjugated).
    The rest pair up as ``(u, N conj(u) / sigma)`` with ``sigma = sin 2 theta``
    and ``2p - 1 = cos 2 theta``.
    """
    d = P.shape[0]
    evals, evecs = np.linalg.eigh(P)
    sig = np.linalg.norm(N @ evecs.conj(), axis=0)
    singles_one = [k for k in range(d) if sig[k] < _PAIR_SIGMA and evals[k] > 0.5]
    singles_zero = [k for k in range(d) if sig[k] < _PAIR_SIGMA and evals[k] <= 0.5]
    rest = [k for k in range(d) if sig[k] >= _PAIR_SIGMA]
    pair_cols: list[np.ndarray] = []
    thetas: list[float] = []
    # clusters of nearly equal eigenvalues among the paired part
    clusters: list[list[int]] = []
    for k in rest:
        if clusters and abs(evals[k] - evals[clusters[-1][-1]]) < 1e-6:
            clusters[-1].append(k)
        else:
            clusters.append([k])
    for cl in clusters:
        R = evecs[:, cl]
        while R.shape[1] > 0:
            if R.shape[1] == 1:
                raise ArithmeticError("unpaired eigenvector in the conjugated part")
            sub = R.conj().T @ P @ R
            _, vecs = np.linalg.eigh((sub + sub.conj().T) / 2)
            u1 = R @ vecs[:, -1]
            wv = N @ u1.conj()
            sigma = float(np.linalg.norm(wv))
            u2 = wv / sigma
            p = float(np.real(np.vdot(u1, P @ u1)))
            thetas.append(0.5 * math.atan2(sigma, 2 * p - 1))
            pair_cols += [u1, u2]
            rem = R - np.outer(u1, u1.conj() @ R) - np.outer(u2, u2.conj() @ R)
            left, svals, _ = np.linalg.svd(rem, full_matrices=False)
            R = left[:, : R.shape[1] - 2]
    cols = pair_cols + [evecs[:, k] for k in singles_zero] + [evecs[:, k] for k in singles_one]
    V = np.column_stack(cols)
    # snap to the nearest unitary
    left, _, right = np.linalg.svd(V)
    V = left @ right
    npairs = len(thetas)
    return V, thetas, npairs, len(singles_zero)


def _canonical_factors(op: RLinearOp) -> list[Factor]:
    n, d = op.n, op.dim
    A, B = op.A, op.B
    P = A.conj().T @ A
    P = (P + P.conj().T) / 2
    N = 2 * A.conj().T @ B
    V, thetas, npairs, nzero = _youla_basis(P, N)
    pair_second = Language.from_labels(n, [2 * t + 1 for t in range(npairs)])
    zero_lang = Language.from_labels(n, range(2 * npairs, 2 * npairs + nzero))
    rot = np.eye(d)
    for t, theta in enumerate(thetas):
        c, s = math.cos(theta), math.sin(theta)
        rot[2 * t : 2 * t + 2, 2 * t : 2 * t + 2] = [[c, -s], [s, c]]
    inner = [pair_second, rot.astype(complex), pair_second | zero_lang]
    sigma = star_all(*[make_kl(f) if isinstance(f, Language) else RLinearOp.linear(f) for f in inner])
    left = star(star(op, RLinearOp.linear(V)), dagger(sigma))
    if np.max(np.abs(left.B), initial=0.0) > 1e-7:
        raise ArithmeticError("canonical factorization failed: left factor is not linear")
    factors: list[Factor] = [left.A]
    if npairs:
        factors += inner
    elif nzero:
        factors.append(zero_lang)
    factors.append(V.conj().T)
    return _tidy(factors, d)


def _gate_pipeline_factors(op: RLinearOp, tol: float) -> list[Factor]:
    n, d = op.n, op.dim
    w = encode_operator(op)
    rebit_gates = orthogonal_to_gates(w, tol)
    current = np.eye(d, dtype=complex)
    circuit_order: list[Factor] = []
    for rg in rebit_gates:
        for lg in decode_rebit_gate(rg, n):
            if lg.is_conjugation:
                circuit_order.append(current)
                circuit_order.append(gate_language(lg, n))
                current = np.eye(d, dtype=complex)
            elif lg.kind == "G":
                current = np.exp(1j * lg.param) * current
            else:
                apply_gate(current, lg, n)
    circuit_order.append(current)
    return _tidy(list(reversed(circuit_order)), d)


def factor_r_unitary(
    op: RLinearOp, tol: float = DEFAULT_TOL, method: str = "canonical"
) -> AntiunitaryFactorization:
    """Factor an R-unitary into unitaries and partial conjugations ``K_L``.

    ``method="canonical"`` uses a normal form of ``(A^dagger A, A^dagger B)``
    and needs at most two ``K_L`` factors. ``method="gates"`` runs the full
    compilation pipeline (encode, two-level factors, gates, decode) and merges
    adjacent factors; it is much longer but every ``K_L`` comes from a single
    multiply-controlled Z on the ancilla.
    """
    if not is_r_unitary(op, max(tol, 1e-9)):
        raise ValueError("operator is not R-unitary")
    if method == "canonical":
        factors = _canonical_factors(op)
    elif method == "gates":
        factors = _gate_pipeline_factors(op, max(tol, 1e-9))
    else:
        raise ValueError(f"unknown method {method!r}")
    fac = AntiunitaryFactorization(op.n, factors, method)
    res = fac.residual(op)
    if res > RECONSTRUCTION_TOL:
        raise ArithmeticError(f"factorization residual {res:.3e} exceeds {RECONSTRUCTION_TOL}")
    return fac


# --------------------------------------------------------------------------
# K_L from a deciding circuit

DECIDER_KINDS = frozenset({"CCX", "CX", "X"})


def _inverse_reversible(gates: Sequence[Gate]) -> list[Gate]:
    # CCX, CX and X are involutions
    return list(reversed(gates))


def synthesize_kl_circuit(decider: Circuit, n: int) -> Circuit:
    """Circuit for ``K_L`` from a reversible decider ``|x>|0> -> |L(x)>|j(x)>``.

    The decider acts on ``n`` data wires plus work wires ``n+1, ...`` and
    writes the membership bit to wire ``n + 1``. The result is the decider,
    one ``CK`` on that wire, then the decider undone.
    """
    if decider.n <= n:
        raise ValueError("the decider needs at least one wire beyond the data")
    bad = sorted({gate.kind for gate in decider.gates} - DECIDER_KINDS)
    if bad:
        raise ValueError(f"decider uses non-reversible gate kinds {bad}")
    gates = list(decider.gates) + [g("CK", n + 1)] + _inverse_reversible(decider.gates)
    return Circuit(decider.n, gates, name="K_L")


def restrict_to_zero_workspace(op: RLinearOp, n: int) -> RLinearOp:
    """Block of ``op`` with every wire past ``n`` fixed to |0>."""
    extra = op.n - n
    idx = np.arange(1 << n) << extra
    return RLinearOp(op.A[np.ix_(idx, idx)], op.B[np.ix_(idx, idx)])


def decider_language(decider: Circuit, n: int) -> Language:
    """Language computed by a classical decider: bit ``n + 1`` of its output on ``|x>|0>``."""
    labels = []
    extra = decider.n - n
    for x in range(1 << n):
        state = np.zeros(1 << decider.n)
        state[x << extra] = 1.0
        apply_gates(state, decider.gates, decider.n)
        out = int(np.argmax(np.abs(state)))
        if (out >> (decider.n - n - 1)) & 1:
            labels.append(x)
    return Language.from_labels(n, labels)


def majority_decider() -> Circuit:
    """Three-bit majority written to wire 4 using only Toffoli gates."""
    return Circuit(4, [g("CCX", 1, 2, 4), g("CCX", 1, 3, 4), g("CCX", 2, 3, 4)], name="majority")


def kl_from_decider_report() -> float:
    """Residual of ``K_L`` built from H, CCZ and one CK against ``make_kl`` (majority language)."""
    n = 3
    decider = majority_decider()
    circ = synthesize_kl_circuit(decider, n)
    expanded: list[Gate] = []
    for gate in circ.gates:
        if gate.kind == "CCX":
            t = gate.qubits[-1]
            expanded += [g("H", t), g("CCZ", *gate.qubits), g("H", t)]
        else:
            expanded.append(gate)
    kinds = {gate.kind for gate in expanded}
    assert kinds <= {"H", "CCZ", "CK"} and sum(gate.kind == "CK" for gate in expanded) == 1
    big = sequence_rlinear(expanded, circ.n)
    lang = Language.from_predicate(n, lambda x: sum(x) >= 2)
    return restrict_to_zero_workspace(big, n).distance(make_kl(lang))
