"""Pauli strings with literal Y factors and recognition of Pauli matrices.

A :class:`PauliString` is ``(-1)^sign * i^imag * P_1 (x) ... (x) P_m`` with each
``P_k`` in {I, X, Y, Z} (Y itself, not XZ). Index ``k`` of the bit arrays is
wire ``k + 1``, the most significant bit of a basis label.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

_LETTERS = "IXZY"  # index = x + 2 z


@dataclass(frozen=True)
class PauliString:
    x: np.ndarray
    z: np.ndarray
    sign: int = 0
    imag: int = 0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=bool).copy()
        z = np.asarray(self.z, dtype=bool).copy()
        if x.shape != z.shape or x.ndim != 1:
            raise ValueError("x and z must be equal-length bit vectors")
        x.flags.writeable = False
        z.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "sign", int(self.sign) & 1)
        object.__setattr__(self, "imag", int(self.imag) & 1)

    @property
    def m(self) -> int:
        return self.x.shape[0]

    @classmethod
    def identity(cls, m: int) -> "PauliString":
        return cls(np.zeros(m, bool), np.zeros(m, bool))

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse labels such as ``"XYZ"``, ``"-YY"`` or ``"+iXZ"``."""
        s = label.strip()
        sign = imag = 0
        if s[:1] in "+-":
            sign = 1 if s[0] == "-" else 0
            s = s[1:]
        if s[:1] == "i":
            imag = 1
            s = s[1:]
        x = np.array([c in "XY" for c in s], dtype=bool)
        z = np.array([c in "ZY" for c in s], dtype=bool)
        if any(c not in "IXYZ" for c in s):
            raise ValueError(f"bad Pauli label {label!r}")
        return cls(x, z, sign, imag)

    @classmethod
    def single(cls, m: int, wire: int, letter: str) -> "PauliString":
        label = ["I"] * m
        label[wire - 1] = letter
        return cls.from_label("".join(label))

    @property
    def letters(self) -> str:
        return "".join(_LETTERS[int(a) + 2 * int(b)] for a, b in zip(self.x, self.z))

    @property
    def label(self) -> str:
        return ("-" if self.sign else "+") + ("i" if self.imag else "") + self.letters

    def __str__(self) -> str:
        return self.label

    @property
    def y_count(self) -> int:
        return int(np.sum(self.x & self.z))

    @property
    def weight(self) -> int:
        return int(np.sum(self.x | self.z))

    @property
    def is_hermitian(self) -> bool:
        return self.imag == 0

    @property
    def is_real(self) -> bool:
        """True when the matrix has real entries."""
        return (self.y_count + self.imag) % 2 == 0

    def phase(self) -> complex:
        return (-1) ** self.sign * (1j if self.imag else 1)

    def unsigned(self) -> "PauliString":
        return PauliString(self.x, self.z)

    def with_sign(self, sign: int) -> "PauliString":
        return PauliString(self.x, self.z, sign, self.imag)

    def commutes_with(self, other: "PauliString") -> bool:
        s = np.sum(self.x & other.z) + np.sum(self.z & other.x)
        return int(s) % 2 == 0

    def xmask(self) -> int:
        return bits_to_int(self.x)

    def zmask(self) -> int:
        return bits_to_int(self.z)

    def matrix(self) -> np.ndarray:
        """Dense 2**m x 2**m matrix."""
        d = 1 << self.m
        idx = np.arange(d)
        xm, zm = self.xmask(), self.zmask()
        # P = i^{#Y} X^x Z^z and X^x Z^z |j> = (-1)^{z.j} |j ^ x>
        vals = np.where(_parity(idx & zm), -1.0, 1.0).astype(complex)
        vals *= self.phase() * (1j ** self.y_count)
        out = np.zeros((d, d), dtype=complex)
        out[idx ^ xm, idx] = vals
        return out

    def __mul__(self, other: "PauliString") -> "PauliString":
        """Operator product ``self @ other`` with exact phase tracking."""
        if self.m != other.m:
            raise ValueError("width mismatch")
        # each string is phase * i^{#Y} X^x Z^z; Z^z1 X^x2 = (-1)^{z1.x2} X^x2 Z^z1
        power = 2 * self.sign + self.imag + 2 * other.sign + other.imag
        power += self.y_count + other.y_count + 2 * int(np.sum(self.z & other.x))
        x = self.x ^ other.x
        z = self.z ^ other.z
        power -= int(np.sum(x & z))
        power %= 4
        return PauliString(x, z, sign=power >> 1, imag=power & 1)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliString)
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.z, other.z)
            and self.sign == other.sign
            and self.imag == other.imag
        )

    def __hash__(self) -> int:
        return hash((self.x.tobytes(), self.z.tobytes(), self.sign, self.imag))


def bits_to_int(bits) -> int:
    """Wire-1-most-significant bit vector to an integer mask."""
    value = 0
    for b in bits:
        value = (value << 1) | int(bool(b))
    return value


def int_to_bits(value: int, m: int) -> np.ndarray:
    return np.array([(value >> (m - 1 - k)) & 1 for k in range(m)], dtype=bool)


def _parity(arr: np.ndarray) -> np.ndarray:
    return (np.bitwise_count(np.asarray(arr, dtype=np.uint64)) & 1).astype(bool)


def decompose_pauli(M: np.ndarray, tol: float = 1e-9) -> Optional[tuple[complex, PauliString]]:
    """Write ``M`` as ``lam * P`` with ``P`` an unsigned Pauli string and ``|lam| = 1``.

    Uses a structure scan: a single nonzero per column at row ``j ^ x`` whose
    signs follow ``(-1)^{z.j}``. Returns None when ``M`` has another shape.
    """
    M = np.asarray(M)
    d = M.shape[0]
    m = d.bit_length() - 1
    if M.shape != (d, d) or (1 << m) != d:
        return None
    xm = int(np.argmax(np.abs(M[:, 0])))
    lam = complex(M[xm, 0])
    if abs(abs(lam) - 1.0) > tol:
        return None
    idx = np.arange(d)
    zm = 0
    for k in range(m):
        j = 1 << k
        if abs(M[j ^ xm, j] + lam) < abs(M[j ^ xm, j] - lam):
            zm |= j
    expected = np.where(_parity(idx & zm), -lam, lam)
    if np.max(np.abs(M[idx ^ xm, idx] - expected)) > tol:
        return None
    # every other entry must vanish: compare total weight
    rest = np.array(M, dtype=complex)
    rest[idx ^ xm, idx] = 0
    off = float(np.sum(np.abs(rest) ** 2))
    if off > tol * tol * d:
        return None
    x = int_to_bits(xm, m)
    z = int_to_bits(zm, m)
    p = PauliString(x, z)
    # X^x Z^z = (-i)^{#Y} P
    lam_p = lam * (-1j) ** p.y_count
    return lam_p, p


def pauli_with_phase(lam: complex, p: PauliString, tol: float = 1e-9) -> Optional[PauliString]:
    """Fold ``lam`` into the sign bits when it is a power of i."""
    for power in range(4):
        if abs(lam - 1j**power) < tol:
            return PauliString(p.x, p.z, sign=power >> 1, imag=power & 1)
    return None


def all_pauli_strings(m: int):
    """Every unsigned Pauli string of width m in lexicographic IXYZ order."""
    order = "IXYZ"
    for code in range(4**m):
        letters = []
        for k in range(m):
            letters.append(order[(code >> (2 * (m - 1 - k))) & 3])
        yield PauliString.from_label("".join(letters))
