"""Stride kernels acting in place on state vectors.

States are handled as 2-D arrays of shape ``(2**nbits, k)`` so that a batch of
``k`` columns (for instance the columns of an identity matrix when a dense
operator is being built) is updated in one pass. Bit 0 is the least
significant bit of the basis index.

Every kernel has a numba implementation and a numpy implementation with
identical semantics; :mod:`rebitsim._backend` picks one at call time.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from . import _backend

if _backend.HAVE_NUMBA:
    from numba import njit
else:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


# --------------------------------------------------------------------------
# numba kernels


@njit(cache=True)
def _nb_apply_2x2(state, tbit, cmask, cval, m00, m01, m10, m11):
    half = state.shape[0] >> 1
    step = 1 << tbit
    low = step - 1
    ncol = state.shape[1]
    for k in range(half):
        i = ((k & ~low) << 1) | (k & low)
        if (i & cmask) != cval:
            continue
        j = i | step
        for c in range(ncol):
            a = state[i, c]
            b = state[j, c]
            state[i, c] = m00 * a + m01 * b
            state[j, c] = m10 * a + m11 * b


@njit(cache=True)
def _nb_phase(state, cmask, cval, phase):
    ncol = state.shape[1]
    for i in range(state.shape[0]):
        if (i & cmask) == cval:
            for c in range(ncol):
                state[i, c] = phase * state[i, c]


@njit(cache=True)
def _nb_conj(state, cmask, cval):
    ncol = state.shape[1]
    for i in range(state.shape[0]):
        if (i & cmask) == cval:
            for c in range(ncol):
                state[i, c] = np.conj(state[i, c])


@njit(cache=True)
def _nb_conj_members(state, members):
    ncol = state.shape[1]
    for i in range(state.shape[0]):
        if members[i]:
            for c in range(ncol):
                state[i, c] = np.conj(state[i, c])


@njit(cache=True)
def _nb_sign_members(state, members, bit):
    # Flip the sign of rows whose index has `bit` set and whose label
    # (index >> 1) is a member. Used for the rebit image of K_L.
    ncol = state.shape[1]
    for i in range(state.shape[0]):
        if (i >> bit) & 1 and members[i >> 1]:
            for c in range(ncol):
                state[i, c] = -state[i, c]


# --------------------------------------------------------------------------
# numpy kernels


@lru_cache(maxsize=512)
def _selected_rows(dim: int, tbit: int, cmask: int, cval: int) -> np.ndarray:
    idx = np.arange(dim, dtype=np.int64)
    keep = ((idx >> tbit) & 1) == 0 if tbit >= 0 else np.ones(dim, dtype=bool)
    keep &= (idx & cmask) == cval
    out = idx[keep]
    out.flags.writeable = False
    return out


def _np_apply_2x2(state, tbit, cmask, cval, m00, m01, m10, m11):
    i = _selected_rows(state.shape[0], tbit, cmask, cval)
    j = i | (1 << tbit)
    a = state[i]
    b = state[j]
    state[i] = m00 * a + m01 * b
    state[j] = m10 * a + m11 * b


def _np_phase(state, cmask, cval, phase):
    i = _selected_rows(state.shape[0], -1, cmask, cval)
    state[i] *= phase


def _np_conj(state, cmask, cval):
    i = _selected_rows(state.shape[0], -1, cmask, cval)
    state[i] = np.conj(state[i])


def _np_conj_members(state, members):
    state[members] = np.conj(state[members])


def _np_sign_members(state, members, bit):
    idx = np.arange(state.shape[0])
    rows = (((idx >> bit) & 1) == 1) & members[idx >> 1]
    state[rows] = -state[rows]


# --------------------------------------------------------------------------
# dispatch


def _as_2d(state: np.ndarray) -> np.ndarray:
    if state.ndim == 1:
        return state.reshape(-1, 1)
    return state


def _coerce(state: np.ndarray, values):
    if np.iscomplexobj(state):
        return tuple(complex(v) for v in values)
    out = []
    for v in values:
        v = complex(v)
        if v.imag != 0.0:
            raise TypeError("complex coefficient applied to a real state")
        out.append(v.real)
    return tuple(out)


def apply_2x2(state: np.ndarray, tbit: int, matrix, cmask: int = 0, cval: int = 0) -> None:
    """Apply a 2x2 matrix to bit ``tbit`` on rows whose control bits match.

    Rows ``i`` with ``i & cmask == cval`` are updated; ``cmask`` must not
    contain ``tbit``.
    """
    s = _as_2d(state)
    m = np.asarray(matrix)
    coeffs = _coerce(s, (m[0, 0], m[0, 1], m[1, 0], m[1, 1]))
    if _backend.use_numba():
        _nb_apply_2x2(s, tbit, cmask, cval, *coeffs)
    else:
        _np_apply_2x2(s, tbit, cmask, cval, *coeffs)


def apply_phase(state: np.ndarray, phase, cmask: int = 0, cval: int = 0) -> None:
    """Multiply rows matching the control pattern by ``phase``."""
    s = _as_2d(state)
    (p,) = _coerce(s, (phase,))
    if _backend.use_numba():
        _nb_phase(s, cmask, cval, p)
    else:
        _np_phase(s, cmask, cval, p)


def conjugate(state: np.ndarray, cmask: int = 0, cval: int = 0) -> None:
    """Complex-conjugate rows matching the control pattern."""
    s = _as_2d(state)
    if _backend.use_numba():
        _nb_conj(s, cmask, cval)
    else:
        _np_conj(s, cmask, cval)


def conjugate_members(state: np.ndarray, members: np.ndarray) -> None:
    """Complex-conjugate rows flagged in the boolean array ``members``."""
    s = _as_2d(state)
    members = np.ascontiguousarray(members, dtype=np.bool_)
    if _backend.use_numba():
        _nb_conj_members(s, members)
    else:
        _np_conj_members(s, members)


def negate_ancilla_members(state: np.ndarray, members: np.ndarray) -> None:
    """Negate rows ``2x+1`` for every label ``x`` flagged in ``members``."""
    s = _as_2d(state)
    members = np.ascontiguousarray(members, dtype=np.bool_)
    if _backend.use_numba():
        _nb_sign_members(s, members, 0)
    else:
        _np_sign_members(s, members, 0)
