"""Real-linear operators ``A + B K`` on n qubits.

``K`` is complex conjugation in the computational basis, so an operator acts
as ``psi -> A @ psi + B @ conj(psi)``. Every map that is additive and
homogeneous over the reals has exactly one such representation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

DEFAULT_TOL = 1e-9
MAX_DENSE_QUBITS = 10


class NotRLinearError(ValueError):
    """Raised when a black-box map fails the real-linearity check."""

    def __init__(self, residual: float):
        super().__init__(f"map is not real-linear (residual {residual:.3e})")
        self.residual = residual


def _num_qubits(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or (1 << n) != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def check_dense_size(n: int) -> None:
    if n > MAX_DENSE_QUBITS:
        raise ValueError(f"{n} qubits exceeds the dense limit of {MAX_DENSE_QUBITS}")


# --------------------------------------------------------------------------
# languages and subspaces


@dataclass(frozen=True)
class Language:
    """A set of n-bit basis labels stored as a membership mask."""

    n: int
    mask: np.ndarray

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=bool).copy()
        if mask.shape != (1 << self.n,):
            raise ValueError(f"language mask must have length 2**{self.n}")
        mask.flags.writeable = False
        object.__setattr__(self, "mask", mask)

    @classmethod
    def empty(cls, n: int) -> "Language":
        return cls(n, np.zeros(1 << n, dtype=bool))

    @classmethod
    def full(cls, n: int) -> "Language":
        return cls(n, np.ones(1 << n, dtype=bool))

    @classmethod
    def from_labels(cls, n: int, labels) -> "Language":
        mask = np.zeros(1 << n, dtype=bool)
        mask[list(labels)] = True
        return cls(n, mask)

    @classmethod
    def from_predicate(cls, n: int, pred: Callable[[tuple], bool]) -> "Language":
        """Build from a predicate on bit tuples ``(x_1, ..., x_n)``, x_1 most significant."""
        mask = np.array([bool(pred(label_bits(x, n))) for x in range(1 << n)], dtype=bool)
        return cls(n, mask)

    @classmethod
    def from_hex(cls, n: int, text: str) -> "Language":
        value = int(text, 16)
        if value >> (1 << n):
            raise ValueError(f"mask {text} has bits beyond 2**{n} labels")
        mask = np.array([(value >> x) & 1 for x in range(1 << n)], dtype=bool)
        return cls(n, mask)

    def to_hex(self) -> str:
        value = 0
        for x in np.flatnonzero(self.mask):
            value |= 1 << int(x)
        width = max(1, ((1 << self.n) + 3) // 4)
        return format(value, f"0{width}x")

    @property
    def size(self) -> int:
        return int(self.mask.sum())

    def labels(self) -> list[int]:
        return [int(x) for x in np.flatnonzero(self.mask)]

    def __contains__(self, x: int) -> bool:
        return bool(self.mask[x])

    def __xor__(self, other: "Language") -> "Language":
        if self.n != other.n:
            raise ValueError("languages over different widths")
        return Language(self.n, self.mask ^ other.mask)

    def __or__(self, other: "Language") -> "Language":
        if self.n != other.n:
            raise ValueError("languages over different widths")
        return Language(self.n, self.mask | other.mask)

    def __eq__(self, other) -> bool:
        return isinstance(other, Language) and self.n == other.n and bool(
            np.array_equal(self.mask, other.mask)
        )

    def __hash__(self) -> int:
        return hash((self.n, self.mask.tobytes()))

    def projector(self) -> np.ndarray:
        """Pi_L, the diagonal projector onto span{|x> : x in L}."""
        return np.diag(self.mask.astype(complex))

    def complement_projector(self) -> np.ndarray:
        """Theta_L = I - Pi_L."""
        return np.diag((~self.mask).astype(complex))


def label_bits(x: int, n: int) -> tuple:
    return tuple((x >> (n - 1 - k)) & 1 for k in range(n))


@dataclass(frozen=True)
class Subspace:
    """A subspace given by its orthogonal projector."""

    projector: np.ndarray

    @property
    def dim(self) -> int:
        return int(round(np.trace(self.projector).real))

    def is_valid(self, tol: float = DEFAULT_TOL) -> bool:
        p = self.projector
        return bool(np.linalg.norm(p @ p - p) < tol and np.linalg.norm(p - p.conj().T) < tol)


# --------------------------------------------------------------------------
# operators


@dataclass(frozen=True)
class RLinearOp:
    """The real-linear operator ``A + B K``."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=complex)
        B = np.array(self.B, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        if A.shape != B.shape:
            raise ValueError("A and B must have identical shapes")
        _num_qubits(A.shape[0])
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return _num_qubits(self.dim)

    @classmethod
    def identity(cls, n: int) -> "RLinearOp":
        d = 1 << n
        return cls(np.eye(d), np.zeros((d, d)))

    @classmethod
    def conjugation(cls, n: int) -> "RLinearOp":
        d = 1 << n
        return cls(np.zeros((d, d)), np.eye(d))

    @classmethod
    def linear(cls, U) -> "RLinearOp":
        U = np.asarray(U, dtype=complex)
        return cls(U, np.zeros_like(U))

    @property
    def is_linear(self) -> bool:
        return not np.any(self.B)

    def __call__(self, psi: np.ndarray) -> np.ndarray:
        return apply(self, psi)

    def __matmul__(self, other: "RLinearOp") -> "RLinearOp":
        return star(self, other)

    def __add__(self, other: "RLinearOp") -> "RLinearOp":
        _check_same(self, other)
        return RLinearOp(self.A + other.A, self.B + other.B)

    def __sub__(self, other: "RLinearOp") -> "RLinearOp":
        _check_same(self, other)
        return RLinearOp(self.A - other.A, self.B - other.B)

    def __rmul__(self, c) -> "RLinearOp":
        # c (A + BK) = cA + cB K
        return RLinearOp(c * self.A, c * self.B)

    def __neg__(self) -> "RLinearOp":
        return RLinearOp(-self.A, -self.B)

    def distance(self, other: "RLinearOp") -> float:
        """Max-abs entry difference over both parts."""
        _check_same(self, other)
        return float(max(np.max(np.abs(self.A - other.A)), np.max(np.abs(self.B - other.B))))

    def allclose(self, other: "RLinearOp", tol: float = DEFAULT_TOL) -> bool:
        return self.distance(other) < tol

    def to_json(self) -> dict:
        return {"n": self.n, "A": _matrix_to_pairs(self.A), "B": _matrix_to_pairs(self.B)}

    @classmethod
    def from_json(cls, doc: dict) -> "RLinearOp":
        n = int(doc["n"])
        d = 1 << n
        A = _pairs_to_matrix(doc["A"], d)
        B = _pairs_to_matrix(doc.get("B", [[0.0, 0.0]] * (d * d)), d)
        return cls(A, B)

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def loads(cls, text: str) -> "RLinearOp":
        return cls.from_json(json.loads(text))


def _matrix_to_pairs(M: np.ndarray) -> list:
    # repr of a Python float round-trips exactly, so json keeps every bit
    flat = M.reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def _pairs_to_matrix(pairs, d: int) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    if arr.shape == (d, d, 2):
        arr = arr.reshape(d * d, 2)
    if arr.shape != (d * d, 2):
        raise ValueError(f"expected {d * d} [re, im] pairs, got shape {arr.shape}")
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(d, d)


def _check_same(f: RLinearOp, g: RLinearOp) -> None:
    if f.dim != g.dim:
        raise ValueError(f"dimension mismatch: {f.dim} vs {g.dim}")


def apply(op: RLinearOp, psi: np.ndarray) -> np.ndarray:
    """Return ``A psi + B conj(psi)``."""
    psi = np.asarray(psi)
    if psi.shape[0] != op.dim:
        raise ValueError(f"state of length {psi.shape[0]} given to a {op.dim}-dim operator")
    return op.A @ psi + op.B @ np.conj(psi)


def star(lhs: RLinearOp, rhs: RLinearOp) -> RLinearOp:
    """Composition ``lhs o rhs``: (A+BK)(C+DK) = (AC + B conj(D)) + (AD + B conj(C)) K."""
    _check_same(lhs, rhs)
    A, B, C, D = lhs.A, lhs.B, rhs.A, rhs.B
    return RLinearOp(A @ C + B @ D.conj(), A @ D + B @ C.conj())


def star_all(*ops: RLinearOp) -> RLinearOp:
    """Left-to-right matrix-style product ``ops[0] o ops[1] o ...``."""
    if not ops:
        raise ValueError("need at least one operator")
    out = ops[0]
    for op in ops[1:]:
        out = star(out, op)
    return out


def dagger(op: RLinearOp) -> RLinearOp:
    """Adjoint with respect to the real inner product: A^dagger + B^T K."""
    return RLinearOp(op.A.conj().T, op.B.T)


def unitarity_residuals(op: RLinearOp) -> tuple[float, float]:
    A, B = op.A, op.B
    eye = np.eye(op.dim)
    r1 = np.linalg.norm(A.conj().T @ A + B.T @ B.conj() - eye)
    r2 = np.linalg.norm(A.conj().T @ B + B.T @ A.conj())
    return float(r1), float(r2)


def unitarity_residuals_alt(op: RLinearOp) -> tuple[float, float]:
    """Row-side form of the same conditions: AA^dagger + BB^dagger = I, AB^T + BA^T = 0."""
    A, B = op.A, op.B
    eye = np.eye(op.dim)
    r1 = np.linalg.norm(A @ A.conj().T + B @ B.conj().T - eye)
    r2 = np.linalg.norm(A @ B.T + B @ A.T)
    return float(r1), float(r2)


def is_r_unitary(op: RLinearOp, tol: float = DEFAULT_TOL) -> bool:
    if tol <= 0:
        raise ValueError("tol must be positive")
    r1, r2 = unitarity_residuals(op)
    return r1 < tol and r2 < tol


def is_partial_antiunitary(op: RLinearOp, tol: float = DEFAULT_TOL) -> Optional[Subspace]:
    """Return the antiunitary subspace when ``op`` is partial antiunitary.

    The test is: A^dagger B = 0, A^dagger A is a projector (its eigenvalues
    sit within ``tol`` of 0 or 1), and B^dagger B = conj(I - A^dagger A).
    The returned projector is I - A^dagger A.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    A, B = op.A, op.B
    if np.linalg.norm(A.conj().T @ B) >= tol:
        return None
    S2 = A.conj().T @ A
    S2 = (S2 + S2.conj().T) / 2
    evals = np.linalg.eigvalsh(S2)
    if np.any(np.minimum(np.abs(evals), np.abs(evals - 1.0)) >= tol):
        return None
    pi = np.eye(op.dim) - S2
    if np.linalg.norm(B.conj().T @ B - pi.conj()) >= tol:
        return None
    return Subspace(pi)


def make_kl(lang: Language) -> RLinearOp:
    """K_L = Theta_L + K Pi_L: conjugate exactly the amplitudes labelled by L."""
    return RLinearOp(lang.complement_projector(), lang.projector())


def from_function(
    n: int,
    f: Callable[[np.ndarray], np.ndarray],
    *,
    check: bool = True,
    tol: float = DEFAULT_TOL,
    rng: Optional[np.random.Generator] = None,
) -> RLinearOp:
    """Recover (A, B) from a black-box real-linear map.

    Column j of A is (f(e_j) - i f(i e_j)) / 2 and of B is (f(e_j) + i f(i e_j)) / 2.
    With ``check`` the result is compared with ``f`` on 2**n random states and
    :class:`NotRLinearError` is raised when the residual exceeds ``tol``.
    """
    d = 1 << n
    A = np.zeros((d, d), dtype=complex)
    B = np.zeros((d, d), dtype=complex)
    for j in range(d):
        e = np.zeros(d, dtype=complex)
        e[j] = 1.0
        fe = np.asarray(f(e), dtype=complex)
        fie = np.asarray(f(1j * e), dtype=complex)
        A[:, j] = (fe - 1j * fie) / 2
        B[:, j] = (fe + 1j * fie) / 2
    op = RLinearOp(A, B)
    if check:
        rng = rng if rng is not None else np.random.default_rng(0x5EED)
        worst = 0.0
        for _ in range(d):
            psi = rng.normal(size=d) + 1j * rng.normal(size=d)
            worst = max(worst, float(np.max(np.abs(apply(op, psi) - f(psi)))))
        if worst > tol:
            raise NotRLinearError(worst)
    return op


def operator_norm(op: RLinearOp) -> float:
    """Largest singular value of the encoded real matrix."""
    from .codec import encode_operator

    return float(np.linalg.norm(encode_operator(op), 2))


# --------------------------------------------------------------------------
# partial antiunitary factorization


def _canonical_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k])


def factor_partial_antiunitary(
    op: RLinearOp, tol: float = DEFAULT_TOL
) -> tuple[np.ndarray, Language, np.ndarray]:
    """Write a partial antiunitary as ``U K_L V`` with U, V unitary.

    V sends an eigenbasis of the antiunitary subspace to the first |L| labels
    and its complement to the rest; U is then ``op V^dagger K_L``.
    """
    sub = is_partial_antiunitary(op, tol)
    if sub is None:
        raise ValueError("operator is not partial antiunitary")
    evals, evecs = np.linalg.eigh(sub.projector)
    inside = evals > 0.5
    k = int(inside.sum())
    cols = [_canonical_phase(evecs[:, i]) for i in np.flatnonzero(inside)]
    cols += [_canonical_phase(evecs[:, i]) for i in np.flatnonzero(~inside)]
    basis = np.column_stack(cols) if cols else np.zeros((op.dim, 0))
    V = basis.conj().T
    lang = Language.from_labels(op.n, range(k))
    kl = make_kl(lang)
    u_op = star(star(op, RLinearOp.linear(V.conj().T)), kl)
    if np.max(np.abs(u_op.B), initial=0.0) > max(tol, 1e-8) * 10:
        raise ArithmeticError("left factor is not linear; factorization failed")
    return u_op.A, lang, V


def reconstruct_partial_antiunitary(U: np.ndarray, lang: Language, V: np.ndarray) -> RLinearOp:
    return star_all(RLinearOp.linear(U), make_kl(lang), RLinearOp.linear(V))
