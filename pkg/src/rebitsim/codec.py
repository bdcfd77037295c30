"""Encoding between n-qubit complex objects and (n+1)-rebit real objects.

The ancilla rebit is the least significant bit of the rebit index: amplitude
``2k`` holds ``Re psi_k`` and ``2k + 1`` holds ``Im psi_k``. Operators map as

    A + B K  ->  Re A (x) I + Im A (x) XZ + Re B (x) Z + Im B (x) X

with ``XZ = [[0, -1], [1, 0]]`` acting on the ancilla.
"""

from __future__ import annotations

import json
from typing import Sequence

import numpy as np

from .rlinear import DEFAULT_TOL, RLinearOp, _num_qubits, star


def encode_state(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    out = np.empty(2 * psi.shape[0], dtype=float)
    out[0::2] = psi.real
    out[1::2] = psi.imag
    return out


def decode_state(phi: np.ndarray) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    if phi.shape[0] % 2:
        raise ValueError("rebit state must have even length")
    return phi[0::2] + 1j * phi[1::2]


def encode_operator(op: RLinearOp) -> np.ndarray:
    """Real matrix on n+1 rebits representing ``op``; assembled by strided blocks."""
    ra, ia = op.A.real, op.A.imag
    rb, ib = op.B.real, op.B.imag
    d = op.dim
    W = np.empty((2 * d, 2 * d), dtype=float)
    W[0::2, 0::2] = ra + rb
    W[0::2, 1::2] = ib - ia
    W[1::2, 0::2] = ia + ib
    W[1::2, 1::2] = ra - rb
    return W


def decode_operator(w: np.ndarray) -> RLinearOp:
    """Inverse of :func:`encode_operator`, defined on every real matrix.

    With ``w_ab`` the ancilla block <a|W|b>:
    A = (w00 + w11 + i (w10 - w01)) / 2 and B = (w00 - w11 + i (w10 + w01)) / 2.
    """
    w = np.asarray(w)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError("expected a square matrix")
    if np.iscomplexobj(w):
        if np.any(w.imag):
            raise ValueError("rebit operators must be real")
        w = w.real
    if w.shape[0] < 2 or w.shape[0] % 2:
        raise ValueError("rebit operator dimension must be even")
    _num_qubits(w.shape[0])
    w00 = w[0::2, 0::2]
    w01 = w[0::2, 1::2]
    w10 = w[1::2, 0::2]
    w11 = w[1::2, 1::2]
    A = 0.5 * (w00 + w11) + 0.5j * (w10 - w01)
    B = 0.5 * (w00 - w11) + 0.5j * (w10 + w01)
    return RLinearOp(A, B)


def is_orthogonal(w: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    w = np.asarray(w)
    return bool(np.linalg.norm(w.T @ w - np.eye(w.shape[0])) < tol)


def decode_measurement(ops: Sequence[np.ndarray], tol: float = DEFAULT_TOL) -> list[RLinearOp]:
    """Decode a real measurement {M_m}; requires sum M_m^T M_m = I."""
    ops = [np.asarray(m, dtype=float) for m in ops]
    if not ops:
        raise ValueError("empty measurement")
    total = sum(m.T @ m for m in ops)
    if np.linalg.norm(total - np.eye(total.shape[0])) >= tol:
        raise ValueError("measurement operators are not complete")
    return [decode_operator(m) for m in ops]


def completeness_residual(effects: Sequence[RLinearOp]) -> float:
    from .rlinear import dagger

    total = None
    for f in effects:
        term = star(dagger(f), f)
        total = term if total is None else total + term
    eye = RLinearOp.identity(total.n)
    return total.distance(eye)


def outcome_probability(f: RLinearOp, psi: np.ndarray) -> float:
    out = f(psi)
    return float(np.vdot(out, out).real)


# --------------------------------------------------------------------------
# exchange formats


def qubit_state_to_json(psi: np.ndarray) -> dict:
    psi = np.asarray(psi, dtype=complex)
    return {"n": _num_qubits(psi.shape[0]), "amps": [[float(z.real), float(z.imag)] for z in psi]}


def rebit_state_to_json(phi: np.ndarray) -> dict:
    phi = np.asarray(phi, dtype=float)
    return {"n": _num_qubits(phi.shape[0]) - 1, "amps": [float(x) for x in phi]}


def state_from_json(doc: dict) -> tuple[str, np.ndarray]:
    """Parse either state format; returns ``("qubit", psi)`` or ``("rebit", phi)``."""
    n = int(doc["n"])
    amps = doc["amps"]
    if amps and isinstance(amps[0], (list, tuple)):
        arr = np.asarray(amps, dtype=float)
        if arr.shape != (1 << n, 2):
            raise ValueError(f"qubit state needs {1 << n} [re, im] pairs")
        return "qubit", arr[:, 0] + 1j * arr[:, 1]
    arr = np.asarray(amps, dtype=float)
    if arr.shape != (1 << (n + 1),):
        raise ValueError(f"rebit state needs {1 << (n + 1)} real amplitudes")
    return "rebit", arr


def real_operator_to_json(w: np.ndarray) -> dict:
    w = np.asarray(w, dtype=float)
    return {"m": _num_qubits(w.shape[0]), "M": [[float(x) for x in row] for row in w]}


def dumps(doc: dict) -> str:
    return json.dumps(doc)
