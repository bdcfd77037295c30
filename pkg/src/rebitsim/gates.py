"""Named gates, their real-linear actions and their rebit images.

Wires are numbered from 1; wire 1 is the most significant bit of the basis
index. A gate sequence in "circuit order" is applied left to right. Rebit
images returned by :func:`gate_rebit_image` are instead listed in product
order, so the leftmost factor acts last, matching how the tables are written
as matrix products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import kernels
from .rlinear import (
    Language,
    RLinearOp,
    check_dense_size,
    make_kl,
    star_all,
)

PI_4 = math.pi / 4
SQRT1_2 = 1.0 / math.sqrt(2.0)

# kind -> (number of wires or None when variable, takes an angle)
_SIGNATURES: dict[str, tuple[Optional[int], bool]] = {
    "X": (1, False),
    "Y": (1, False),
    "Z": (1, False),
    "H": (1, False),
    "S": (1, False),
    "T": (1, False),
    "YROT": (1, True),
    "ZROT": (1, True),
    "R": (1, True),
    "CX": (2, False),
    "CZ": (2, False),
    "CS": (2, False),
    "CH": (2, False),
    "CYROT": (2, True),
    "CCZ": (3, False),
    "CCX": (3, False),
    "CHZ": (None, False),
    "CHX": (None, False),
    "G": (0, True),
    "K": (0, False),
    "CK": (1, False),
    "CCK": (2, False),
    "CHK": (None, False),
    "KL": (0, False),
    "LZ": (0, False),
}

CONJUGATION_KINDS = frozenset({"K", "CK", "CCK", "CHK", "KL"})
PHASE_KINDS = frozenset({"G"})
REAL_KINDS = frozenset(
    {"X", "Z", "H", "R", "YROT", "CX", "CZ", "CH", "CYROT", "CCZ", "CCX", "CHZ", "CHX", "LZ"}
)
# the subset of the alphabet the stabilizer engine accepts
RCLIFFORD_KINDS = frozenset({"H", "S", "K", "CX", "CK", "X", "Z", "CZ"})


def _yrot(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]])


def _rot(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


_X = np.array([[0.0, 1.0], [1.0, 0.0]])
_Y = np.array([[0.0, -1j], [1j, 0.0]])
_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
_H = np.array([[1.0, 1.0], [1.0, -1.0]]) * SQRT1_2
_S = np.array([[1.0, 0.0], [0.0, 1j]])
_T = np.array([[1.0, 0.0], [0.0, complex(SQRT1_2, SQRT1_2)]])


@dataclass(frozen=True)
class Gate:
    """One gate: a kind tag, the wires it touches and an optional parameter.

    For controlled kinds the target is the last wire. ``CHK`` lists only its
    controls. ``KL`` and ``LZ`` carry a :class:`Language` and act on every wire.
    """

    kind: str
    qubits: tuple[int, ...] = ()
    param: Optional[float] = None
    language: Optional[Language] = field(default=None, compare=False)

    def __post_init__(self):
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if kind not in _SIGNATURES:
            raise ValueError(f"unknown gate kind {kind!r}")
        arity, has_angle = _SIGNATURES[kind]
        if arity is not None and len(self.qubits) != arity:
            raise ValueError(f"{kind} takes {arity} wires, got {len(self.qubits)}")
        if kind in ("CHZ", "CHX") and not self.qubits:
            raise ValueError(f"{kind} needs at least a target wire")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{kind} has repeated wires {self.qubits}")
        if has_angle and self.param is None:
            raise ValueError(f"{kind} needs an angle")
        if kind in ("KL", "LZ") and self.language is None:
            raise ValueError(f"{kind} needs a language")
        if self.param is not None:
            object.__setattr__(self, "param", float(self.param))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Gate):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.qubits == other.qubits
            and self.param == other.param
            and self.language == other.language
        )

    def __hash__(self) -> int:
        return hash((self.kind, self.qubits, self.param, self.language))

    @property
    def is_conjugation(self) -> bool:
        return self.kind in CONJUGATION_KINDS

    @property
    def is_real(self) -> bool:
        """True when the gate is an orthogonal matrix (real entries)."""
        if self.kind in REAL_KINDS:
            return True
        return False

    def support(self, n: int) -> tuple[int, ...]:
        """Wires acted on; whole-register kinds report every wire."""
        if self.kind in ("K", "KL", "LZ"):
            return tuple(range(1, n + 1))
        return self.qubits

    def check_range(self, n: int) -> None:
        for q in self.qubits:
            if not 1 <= q <= n:
                raise ValueError(f"{self.kind} wire {q} outside 1..{n}")
        if self.kind == "KL" and self.language.n != n:
            raise ValueError(f"KL language width {self.language.n} != {n}")
        if self.kind == "LZ" and self.language.n + 1 != n:
            raise ValueError(f"LZ language width {self.language.n} != {n - 1}")

    def __str__(self) -> str:
        return format_gate(self)


# --------------------------------------------------------------------------
# constructors


def g(kind: str, *qubits: int, param: Optional[float] = None) -> Gate:
    return Gate(kind, tuple(qubits), param)


def kl_gate(lang: Language) -> Gate:
    return Gate("KL", (), None, lang)


def target_matrix(gate: Gate) -> np.ndarray:
    """2x2 matrix applied to the target wire of a (controlled) unitary kind."""
    k = gate.kind
    if k in ("X", "CX", "CCX", "CHX"):
        return _X
    if k == "Y":
        return _Y
    if k in ("Z", "CZ", "CCZ", "CHZ"):
        return _Z
    if k in ("H", "CH"):
        return _H
    if k in ("S", "CS"):
        return _S
    if k == "T":
        return _T
    if k in ("YROT", "CYROT"):
        return _yrot(gate.param)
    if k == "ZROT":
        t = gate.param
        return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])
    if k == "R":
        return _rot(gate.param)
    raise ValueError(f"{k} has no target matrix")


# --------------------------------------------------------------------------
# application to state vectors


def _bit(q: int, nw: int) -> int:
    return nw - q


def _mask(qubits: Iterable[int], nw: int) -> int:
    m = 0
    for q in qubits:
        m |= 1 << _bit(q, nw)
    return m


def apply_gate(state: np.ndarray, gate: Gate, nw: int) -> None:
    """Apply ``gate`` in place to a state (or batch of columns) on ``nw`` wires."""
    k = gate.kind
    if k == "G":
        kernels.apply_phase(state, np.exp(1j * gate.param))
        return
    if k == "K":
        kernels.conjugate(state)
        return
    if k in ("CK", "CCK", "CHK"):
        m = _mask(gate.qubits, nw)
        kernels.conjugate(state, m, m)
        return
    if k == "KL":
        kernels.conjugate_members(state, gate.language.mask)
        return
    if k == "LZ":
        kernels.negate_ancilla_members(state, gate.language.mask)
        return
    controls, target = gate.qubits[:-1], gate.qubits[-1]
    cm = _mask(controls, nw)
    tb = 1 << _bit(target, nw)
    M = target_matrix(gate)
    if M[0, 1] == 0 and M[1, 0] == 0:
        if M[0, 0] != 1:
            kernels.apply_phase(state, M[0, 0], cm | tb, cm)
        if M[1, 1] != 1:
            kernels.apply_phase(state, M[1, 1], cm | tb, cm | tb)
        return
    kernels.apply_2x2(state, _bit(target, nw), M, cm, cm)


def apply_gates(state: np.ndarray, gates: Sequence[Gate], nw: int) -> None:
    for gate in gates:
        apply_gate(state, gate, nw)


def sequence_rlinear(gates: Sequence[Gate], n: int) -> RLinearOp:
    """Dense operator of a gate sequence in circuit order."""
    check_dense_size(n)
    d = 1 << n
    cols = np.eye(d, dtype=complex)
    icols = 1j * np.eye(d, dtype=complex)
    for gate in gates:
        gate.check_range(n)
    apply_gates(cols, gates, n)
    apply_gates(icols, gates, n)
    return RLinearOp((cols - 1j * icols) / 2, (cols + 1j * icols) / 2)


def sequence_real_matrix(gates: Sequence[Gate], nw: int) -> np.ndarray:
    """Real matrix of a sequence of real gates in circuit order."""
    check_dense_size(nw - 1)
    cols = np.eye(1 << nw)
    for gate in gates:
        gate.check_range(nw)
        if not gate.is_real:
            raise ValueError(f"{gate.kind} is not a real gate")
    apply_gates(cols, gates, nw)
    return cols


def product_real_matrix(factors: Sequence[Gate], nw: int) -> np.ndarray:
    """Real matrix of a list written in product order (leftmost acts last)."""
    return sequence_real_matrix(list(reversed(factors)), nw)


# --------------------------------------------------------------------------
# real-linear operators of single gates


def gate_language(gate: Gate, n: int) -> Language:
    """Language conjugated by a conjugation-type gate."""
    k = gate.kind
    if k == "K":
        return Language.full(n)
    if k == "KL":
        return gate.language
    m = _mask(gate.qubits, n)
    idx = np.arange(1 << n)
    return Language(n, (idx & m) == m)


def gate_to_rlinear(gate: Gate, n: int) -> RLinearOp:
    """Full 2**n-dimensional operator of one gate."""
    gate.check_range(n)
    check_dense_size(n)
    d = 1 << n
    if gate.kind in CONJUGATION_KINDS:
        return make_kl(gate_language(gate, n))
    if gate.kind == "G":
        return RLinearOp(np.exp(1j * gate.param) * np.eye(d), np.zeros((d, d)))
    if gate.kind == "LZ":
        raise ValueError("LZ is a rebit-side gate")
    U = np.eye(d, dtype=complex)
    apply_gate(U, gate, n)
    return RLinearOp.linear(U)


# --------------------------------------------------------------------------
# rebit images


def gate_rebit_image(gate: Gate, n: int) -> list[Gate]:
    """Real gates on n+1 rebits whose product (leftmost acting last) encodes ``gate``.

    The ancilla is wire ``n + 1``.
    """
    gate.check_range(n)
    a = n + 1
    k = gate.kind
    q = gate.qubits
    if k in REAL_KINDS and k != "LZ":
        return [gate]
    if k == "Y":
        i = q[0]
        return [g("X", i), g("X", a), g("Z", i), g("Z", a)]
    if k == "S":
        return [g("CX", q[0], a), g("CZ", q[0], a)]
    if k == "T":
        return [g("CH", q[0], a), g("CZ", q[0], a)]
    if k == "CS":
        return [g("CCX", q[0], q[1], a), g("CCZ", q[0], q[1], a)]
    if k == "ZROT":
        # e^{i t/2} Zrot(t) encodes to a controlled Yrot(2t); the leftover
        # global phase e^{-i t/2} is a rotation of the ancilla
        t = gate.param
        return [g("R", a, param=-t / 2), g("CYROT", q[0], a, param=2 * t)]
    if k == "G":
        return [g("R", a, param=gate.param)]
    if k == "K":
        return [g("Z", a)]
    if k == "CK":
        return [g("CZ", q[0], a)]
    if k == "CCK":
        return [g("CCZ", q[0], q[1], a)]
    if k == "CHK":
        return [g("CHZ", *q, a)]
    if k == "KL":
        return [Gate("LZ", (), None, gate.language)]
    raise ValueError(f"no rebit image for {k}")  # pragma: no cover


def fused_rebit_image(gate: Gate, n: int) -> list[Gate]:
    """Like :func:`gate_rebit_image` but with one ancilla gate per logical gate.

    T and S become a single controlled ancilla rotation, which is what keeps
    a layer of parallel T gates within ``n`` ancilla steps.
    """
    a = n + 1
    if gate.kind == "T":
        return [g("CYROT", gate.qubits[0], a, param=math.pi / 2)]
    if gate.kind == "S":
        return [g("CYROT", gate.qubits[0], a, param=math.pi)]
    return gate_rebit_image(gate, n)


def decode_rebit_gate(gate: Gate, n: int) -> list[Gate]:
    """Logical gates (circuit order) realizing the decoding of one real rebit gate.

    Supported: gates on data wires (returned unchanged), ``Z_a``, ``X_a``,
    ``H_a``, ``R_a`` and multiply-controlled Z gates touching the ancilla.
    """
    a = n + 1
    k = gate.kind
    q = gate.qubits
    if a not in gate.support(a) and k != "LZ":
        return [gate]
    if k == "Z":
        return [g("K")]
    if k == "X":
        # X_a decodes to i K
        return [g("K"), g("G", param=math.pi / 2)]
    if k == "H":
        return [g("K"), g("G", param=math.pi / 4)]
    if k == "R":
        return [g("G", param=gate.param)]
    if k in ("CZ", "CCZ", "CHZ"):
        controls = tuple(w for w in q if w != a)
        if not controls:
            return [g("K")]
        if len(controls) == 1:
            return [g("CK", *controls)]
        if len(controls) == 2:
            return [g("CCK", *controls)]
        return [g("CHK", *controls)]
    if k == "LZ":
        return [kl_gate(gate.language)]
    raise ValueError(f"cannot decode {k} on the ancilla")


# --------------------------------------------------------------------------
# text syntax


def format_angle(x: float) -> str:
    return repr(float(x))


def format_gate(gate: Gate) -> str:
    parts = [gate.kind]
    if gate.kind in ("KL", "LZ"):
        parts.append(gate.language.to_hex())
    parts.extend(str(q) for q in gate.qubits)
    if gate.param is not None:
        parts.append(format_angle(gate.param))
    return " ".join(parts)


class GateSyntaxError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


def parse_gate(text: str, n: Optional[int] = None, line: Optional[int] = None) -> Gate:
    tokens = text.split()
    if not tokens:
        raise GateSyntaxError("empty gate", line)
    kind = tokens[0].upper()
    if kind not in _SIGNATURES:
        raise GateSyntaxError(f"unknown gate {tokens[0]!r}", line)
    args = tokens[1:]
    try:
        if kind in ("KL", "LZ"):
            if len(args) != 1:
                raise GateSyntaxError(f"{kind} takes one hex mask", line)
            if n is None:
                raise GateSyntaxError(f"{kind} needs the register width", line)
            width = n if kind == "KL" else n - 1
            return Gate(kind, (), None, Language.from_hex(width, args[0]))
        arity, has_angle = _SIGNATURES[kind]
        param = None
        if has_angle:
            if not args:
                raise GateSyntaxError(f"{kind} needs an angle", line)
            param = float(args[-1])
            args = args[:-1]
        qubits = tuple(int(a) for a in args)
        gate = Gate(kind, qubits, param)
    except GateSyntaxError:
        raise
    except ValueError as exc:
        raise GateSyntaxError(str(exc), line) from None
    if n is not None:
        try:
            gate.check_range(n)
        except ValueError as exc:
            raise GateSyntaxError(str(exc), line) from None
    return gate


# --------------------------------------------------------------------------
# identity checks


def _compress(op: RLinearOp, wire: int, value: int, n_total: int) -> RLinearOp:
    """<value|_wire op |value>_wire for a computational-basis value."""
    bit = n_total - wire
    idx = np.flatnonzero(((np.arange(1 << n_total) >> bit) & 1) == value)
    return RLinearOp(op.A[np.ix_(idx, idx)], op.B[np.ix_(idx, idx)])


def _compress_real(w: np.ndarray, wire: int, value: int, n_total: int) -> np.ndarray:
    bit = n_total - wire
    idx = np.flatnonzero(((np.arange(1 << n_total) >> bit) & 1) == value)
    return w[np.ix_(idx, idx)]


def table_gates(n: int) -> list[Gate]:
    """A representative instance of every logical kind on ``n`` >= 3 qubits."""
    lang = Language.from_predicate(n, lambda x: (x[0] ^ x[-1]) == 1)
    return [
        g("X", 1), g("Y", 2), g("Z", 3), g("H", 1), g("S", 2), g("T", 3),
        g("YROT", 1, param=0.37), g("ZROT", 2, param=-1.1), g("R", 3, param=0.9),
        g("CX", 1, 3), g("CZ", 3, 2), g("CS", 2, 1), g("CH", 1, 2),
        g("CYROT", 3, 1, param=0.6), g("CCZ", 1, 2, 3), g("CCX", 3, 1, 2),
        g("CHZ", 1, 2, 3), g("CHX", 2, 3, 1),
        g("G", param=PI_4), g("G", param=-2.3), g("K"), g("CK", 2), g("CCK", 1, 3),
        g("CHK", 1, 2, 3), kl_gate(lang),
    ]


def table_residual(gate: Gate, n: int) -> float:
    from .codec import encode_operator

    image = product_real_matrix(gate_rebit_image(gate, n), n + 1)
    return float(np.max(np.abs(image - encode_operator(gate_to_rlinear(gate, n)))))


def bottom_up_residuals(n: int = 3) -> dict[str, float]:
    """Residuals of the decoding table: each real ancilla gate vs its logical image."""
    from .codec import decode_operator

    a = n + 1
    cases = {
        "H_a -> G(pi/4) K": g("H", a),
        "Z_a -> K": g("Z", a),
        "X_a -> i K": g("X", a),
        "R(0.7)_a -> G(0.7)": g("R", a, param=0.7),
        "CZ_1a -> CK_1": g("CZ", 1, a),
        "CCZ_12a -> CCK_12": g("CCZ", 1, 2, a),
        "C^3Z_123a -> C^3K_123": g("CHZ", 1, 2, 3, a),
    }
    out = {}
    for name, gate in cases.items():
        decoded = decode_operator(sequence_real_matrix([gate], a))
        expected = sequence_rlinear(decode_rebit_gate(gate, n), n)
        out[name] = decoded.distance(expected)
    return out


def verify_gate_identities() -> dict[str, float]:
    """Residuals of the exact gate-set identities and of both gate tables."""
    from .codec import encode_operator

    report: dict[str, float] = {}

    # CCX = H_k CCZ H_k
    lhs = sequence_rlinear([g("CCX", 1, 2, 3)], 3)
    rhs = sequence_rlinear([g("H", 3), g("CCZ", 1, 2, 3), g("H", 3)], 3)
    report["CCX = H CCZ H"] = lhs.distance(rhs)

    # K = <1|_b CK_b |1>_b and CK_i = <1|_b CCK_ib |1>_b, with b the last wire
    n = 2
    big = gate_to_rlinear(g("CK", n + 1), n + 1)
    report["K = <1|CK|1>"] = _compress(big, n + 1, 1, n + 1).distance(RLinearOp.conjugation(n))
    big = gate_to_rlinear(g("CCK", 1, n + 1), n + 1)
    report["CK = <1|CCK|1>"] = _compress(big, n + 1, 1, n + 1).distance(
        gate_to_rlinear(g("CK", 1), n)
    )

    # CS = G(pi/4) K CCK G(pi/4) K CCK, written as a product
    cs = gate_to_rlinear(g("CS", 1, 2), 2)
    factors = [g("G", param=PI_4), g("K"), g("CCK", 1, 2)] * 2
    prod = star_all(*[gate_to_rlinear(f, 2) for f in factors])
    report["CS = G K CCK G K CCK"] = cs.distance(prod)

    # CS = decode(H_a CCZ_12a H_a CCZ_12a)
    from .codec import decode_operator

    w = product_real_matrix([g("H", 3), g("CCZ", 1, 2, 3), g("H", 3), g("CCZ", 1, 2, 3)], 3)
    report["CS = L(H CCZ H CCZ)"] = cs.distance(decode_operator(w))

    # CCK_ij = <0|_alpha CCX_ij,alpha CK_alpha CCX_ij,alpha |0>_alpha
    n = 3
    alpha = n + 1
    seq = [g("CCX", 1, 2, alpha), g("CK", alpha), g("CCX", 1, 2, alpha)]
    big = sequence_rlinear(seq, n + 1)
    report["CCK = <0|CCX CK CCX|0>"] = _compress(big, alpha, 0, n + 1).distance(
        gate_to_rlinear(g("CCK", 1, 2), n)
    )

    # encoded form: P(CCK_ij) = <0|_alpha CCX CZ_alpha,a CCX |0>_alpha.
    # Rebit wires: data 1..n, alpha = n+1, ancilla = n+2; the ancilla must stay
    # last, so alpha is compressed out of the middle.
    n = 2
    alpha, a = n + 1, n + 2
    w = sequence_real_matrix(
        [g("CCX", 1, 2, alpha), g("CZ", alpha, a), g("CCX", 1, 2, alpha)], n + 2
    )
    w0 = _compress_real(w, alpha, 0, n + 2)
    report["P(CCK) = <0|CCX CZ CCX|0>"] = float(
        np.max(np.abs(w0 - encode_operator(gate_to_rlinear(g("CCK", 1, 2), n))))
    )

    # K_L from one CK and a reversible decider (x1 AND x2) OR x3
    from .compiler import kl_from_decider_report

    report["K_L via one CK"] = kl_from_decider_report()

    n = 3
    report["top-down table"] = max(table_residual(gate, n) for gate in table_gates(n))
    report["bottom-up table"] = max(bottom_up_residuals(n).values())
    return report
