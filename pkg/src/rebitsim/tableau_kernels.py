"""Word-packed tableau kernels.

A tableau is three arrays: ``x`` and ``z`` of shape ``(rows, words)`` holding
uint64 bit-vectors (column ``c`` is bit ``c & 63`` of word ``c >> 6``) and a
uint8 sign vector ``r``. Row ``h`` represents ``(-1)^r[h] P`` with ``P`` a
tensor product of I, X, Y, Z letters. The gate kernels conjugate every row.

As in :mod:`rebitsim.kernels`, each operation has a numba and a numpy
implementation with identical results.
"""

from __future__ import annotations

import numpy as np

from . import _backend
from .kernels import njit

_ONE = np.uint64(1)
_SHIFT1 = np.uint64(1)
_SHIFT2 = np.uint64(2)
_SHIFT4 = np.uint64(4)
_SHIFT56 = np.uint64(56)
_M1 = np.uint64(0x5555555555555555)
_M2 = np.uint64(0x3333333333333333)
_M4 = np.uint64(0x0F0F0F0F0F0F0F0F)
_H01 = np.uint64(0x0101010101010101)


def num_words(m: int) -> int:
    return (m + 63) >> 6


# --------------------------------------------------------------------------
# numba kernels


@njit(cache=True)
def _popcount(v):
    v = v - ((v >> _SHIFT1) & _M1)
    v = (v & _M2) + ((v >> _SHIFT2) & _M2)
    v = (v + (v >> _SHIFT4)) & _M4
    return np.int64((v * _H01) >> _SHIFT56)


@njit(cache=True)
def _nb_rowsum(x, z, r, h, i):
    plus = 0
    minus = 0
    for w in range(x.shape[1]):
        x1 = x[i, w]
        z1 = z[i, w]
        x2 = x[h, w]
        z2 = z[h, w]
        p = (x1 & z1 & z2 & ~x2) | (x1 & ~z1 & z2 & x2) | (~x1 & z1 & x2 & ~z2)
        q = (x1 & z1 & x2 & ~z2) | (x1 & ~z1 & z2 & ~x2) | (~x1 & z1 & x2 & z2)
        plus += _popcount(p)
        minus += _popcount(q)
        x[h, w] = x2 ^ x1
        z[h, w] = z2 ^ z1
    total = 2 * np.int64(r[h]) + 2 * np.int64(r[i]) + plus - minus
    r[h] = np.uint8(((total % 4) + 4) % 4 // 2)


@njit(cache=True)
def _nb_h(x, z, r, q):
    w = q >> 6
    b = np.uint64(q & 63)
    mask = _ONE << b
    for row in range(x.shape[0]):
        xb = (x[row, w] >> b) & _ONE
        zb = (z[row, w] >> b) & _ONE
        r[row] ^= np.uint8(xb & zb)
        if xb != zb:
            x[row, w] ^= mask
            z[row, w] ^= mask


@njit(cache=True)
def _nb_cx(x, z, r, c, t):
    wc = c >> 6
    bc = np.uint64(c & 63)
    wt = t >> 6
    bt = np.uint64(t & 63)
    for row in range(x.shape[0]):
        xc = (x[row, wc] >> bc) & _ONE
        zc = (z[row, wc] >> bc) & _ONE
        xt = (x[row, wt] >> bt) & _ONE
        zt = (z[row, wt] >> bt) & _ONE
        r[row] ^= np.uint8(xc & zt & (xt ^ zc ^ _ONE))
        x[row, wt] ^= xc << bt
        z[row, wc] ^= zt << bc


@njit(cache=True)
def _nb_cz(x, z, r, a, b):
    wa = a >> 6
    ba = np.uint64(a & 63)
    wb = b >> 6
    bb = np.uint64(b & 63)
    for row in range(x.shape[0]):
        xa = (x[row, wa] >> ba) & _ONE
        za = (z[row, wa] >> ba) & _ONE
        xb = (x[row, wb] >> bb) & _ONE
        zb = (z[row, wb] >> bb) & _ONE
        r[row] ^= np.uint8(xa & xb & (za ^ zb))
        z[row, wa] ^= xb << ba
        z[row, wb] ^= xa << bb


@njit(cache=True)
def _nb_sign_from(bits, r, q):
    w = q >> 6
    b = np.uint64(q & 63)
    for row in range(bits.shape[0]):
        r[row] ^= np.uint8((bits[row, w] >> b) & _ONE)


@njit(cache=True)
def _nb_measure(x, z, r, m, q, rnd):
    w = q >> 6
    mask = _ONE << np.uint64(q & 63)
    nw = x.shape[1]
    p = -1
    for i in range(m, 2 * m):
        if x[i, w] & mask:
            p = i
            break
    if p >= 0:
        for i in range(2 * m):
            if i != p and (x[i, w] & mask):
                _nb_rowsum(x, z, r, i, p)
        for k in range(nw):
            x[p - m, k] = x[p, k]
            z[p - m, k] = z[p, k]
            x[p, k] = 0
            z[p, k] = 0
        r[p - m] = r[p]
        z[p, w] = mask
        r[p] = np.uint8(rnd)
        return rnd, True
    s = 2 * m
    for k in range(nw):
        x[s, k] = 0
        z[s, k] = 0
    r[s] = 0
    for i in range(m):
        if x[i, w] & mask:
            _nb_rowsum(x, z, r, s, i + m)
    return np.int64(r[s]), False


@njit(cache=True)
def _nb_swap_rows(x, z, r, a, b):
    for k in range(x.shape[1]):
        t = x[a, k]
        x[a, k] = x[b, k]
        x[b, k] = t
        t = z[a, k]
        z[a, k] = z[b, k]
        z[b, k] = t
    t8 = r[a]
    r[a] = r[b]
    r[b] = t8


@njit(cache=True)
def _nb_xreduce(x, z, r, ncols):
    rows = x.shape[0]
    rank = 0
    for col in range(ncols):
        w = col >> 6
        mask = _ONE << np.uint64(col & 63)
        piv = -1
        for i in range(rank, rows):
            if x[i, w] & mask:
                piv = i
                break
        if piv < 0:
            continue
        if piv != rank:
            _nb_swap_rows(x, z, r, piv, rank)
        for i in range(rows):
            if i != rank and (x[i, w] & mask):
                _nb_rowsum(x, z, r, i, rank)
        rank += 1
    return rank


@njit(cache=True)
def _nb_zreduce(z, r, start, ncols, pivots):
    rows = z.shape[0]
    nw = z.shape[1]
    rank = start
    count = 0
    for col in range(ncols):
        w = col >> 6
        mask = _ONE << np.uint64(col & 63)
        piv = -1
        for i in range(rank, rows):
            if z[i, w] & mask:
                piv = i
                break
        if piv < 0:
            continue
        if piv != rank:
            for k in range(nw):
                t = z[piv, k]
                z[piv, k] = z[rank, k]
                z[rank, k] = t
            t8 = r[piv]
            r[piv] = r[rank]
            r[rank] = t8
        for i in range(start, rows):
            if i != rank and (z[i, w] & mask):
                for k in range(nw):
                    z[i, k] ^= z[rank, k]
                r[i] ^= r[rank]
        pivots[count] = col
        count += 1
        rank += 1
    return count


@njit(cache=True)
def _nb_sample_affine(x0, basis, rand, out):
    nw = x0.shape[0]
    k = basis.shape[0]
    for s in range(out.shape[0]):
        for w in range(nw):
            out[s, w] = x0[w]
        for j in range(k):
            if (rand[s, j >> 6] >> np.uint64(j & 63)) & _ONE:
                for w in range(nw):
                    out[s, w] ^= basis[j, w]


# --------------------------------------------------------------------------
# numpy kernels


def _np_phase_counts(x1, z1, x2, z2) -> np.ndarray:
    p = (x1 & z1 & z2 & ~x2) | (x1 & ~z1 & z2 & x2) | (~x1 & z1 & x2 & ~z2)
    q = (x1 & z1 & x2 & ~z2) | (x1 & ~z1 & z2 & ~x2) | (~x1 & z1 & x2 & z2)
    return np.bitwise_count(p).sum(axis=-1, dtype=np.int64) - np.bitwise_count(q).sum(
        axis=-1, dtype=np.int64
    )


def _np_rowsum_many(x, z, r, hs, i) -> None:
    """Replace every row in ``hs`` (not containing ``i``) by its product with row ``i``."""
    if len(hs) == 0:
        return
    x1, z1 = x[i], z[i]
    x2, z2 = x[hs], z[hs]
    s = _np_phase_counts(x1, z1, x2, z2)
    total = 2 * r[hs].astype(np.int64) + 2 * int(r[i]) + s
    r[hs] = ((total % 4) // 2).astype(np.uint8)
    x[hs] = x2 ^ x1
    z[hs] = z2 ^ z1


def _np_rowsum(x, z, r, h, i) -> None:
    _np_rowsum_many(x, z, r, np.array([h]), i)


def _np_bit(bits, q) -> np.ndarray:
    return (bits[:, q >> 6] >> np.uint64(q & 63)) & _ONE


def _np_h(x, z, r, q):
    w = q >> 6
    xb, zb = _np_bit(x, q), _np_bit(z, q)
    r ^= (xb & zb).astype(np.uint8)
    flip = (xb ^ zb) << np.uint64(q & 63)
    x[:, w] ^= flip
    z[:, w] ^= flip


def _np_cx(x, z, r, c, t):
    xc, zc = _np_bit(x, c), _np_bit(z, c)
    xt, zt = _np_bit(x, t), _np_bit(z, t)
    r ^= (xc & zt & (xt ^ zc ^ _ONE)).astype(np.uint8)
    x[:, t >> 6] ^= xc << np.uint64(t & 63)
    z[:, c >> 6] ^= zt << np.uint64(c & 63)


def _np_cz(x, z, r, a, b):
    xa, za = _np_bit(x, a), _np_bit(z, a)
    xb, zb = _np_bit(x, b), _np_bit(z, b)
    r ^= (xa & xb & (za ^ zb)).astype(np.uint8)
    z[:, a >> 6] ^= xb << np.uint64(a & 63)
    z[:, b >> 6] ^= xa << np.uint64(b & 63)


def _np_sign_from(bits, r, q):
    r ^= _np_bit(bits, q).astype(np.uint8)


def _np_measure(x, z, r, m, q, rnd):
    col = _np_bit(x, q).astype(bool)
    hits = np.flatnonzero(col[m : 2 * m])
    if hits.size:
        p = m + int(hits[0])
        others = np.flatnonzero(col[: 2 * m])
        _np_rowsum_many(x, z, r, others[others != p], p)
        x[p - m], z[p - m], r[p - m] = x[p], z[p], r[p]
        x[p] = 0
        z[p] = 0
        z[p, q >> 6] = _ONE << np.uint64(q & 63)
        r[p] = rnd
        return int(rnd), True
    s = 2 * m
    x[s] = 0
    z[s] = 0
    r[s] = 0
    for i in np.flatnonzero(col[:m]):
        _np_rowsum(x, z, r, s, int(i) + m)
    return int(r[s]), False


def _np_xreduce(x, z, r, ncols):
    rows = x.shape[0]
    rank = 0
    for col in range(ncols):
        colbits = _np_bit(x, col).astype(bool)
        cand = np.flatnonzero(colbits[rank:])
        if cand.size == 0:
            continue
        piv = rank + int(cand[0])
        if piv != rank:
            for arr in (x, z, r):
                arr[[piv, rank]] = arr[[rank, piv]]
            colbits[[piv, rank]] = colbits[[rank, piv]]
        hs = np.flatnonzero(colbits)
        _np_rowsum_many(x, z, r, hs[hs != rank], rank)
        rank += 1
        if rank == rows:
            break
    return rank


def _np_zreduce(z, r, start, ncols, pivots):
    rows = z.shape[0]
    rank = start
    count = 0
    for col in range(ncols):
        if rank == rows:
            break
        colbits = _np_bit(z, col).astype(bool)
        cand = np.flatnonzero(colbits[rank:])
        if cand.size == 0:
            continue
        piv = rank + int(cand[0])
        if piv != rank:
            z[[piv, rank]] = z[[rank, piv]]
            r[[piv, rank]] = r[[rank, piv]]
            colbits[[piv, rank]] = colbits[[rank, piv]]
        hs = np.flatnonzero(colbits[start:]) + start
        hs = hs[hs != rank]
        z[hs] ^= z[rank]
        r[hs] ^= r[rank]
        pivots[count] = col
        count += 1
        rank += 1
    return count


def _np_sample_affine(x0, basis, rand, out):
    out[:] = x0
    for j in range(basis.shape[0]):
        sel = ((rand[:, j >> 6] >> np.uint64(j & 63)) & _ONE).astype(bool)
        out[sel] ^= basis[j]


# --------------------------------------------------------------------------
# dispatch


def _pick(nb, npy):
    return nb if _backend.use_numba() else npy


def rowsum(x, z, r, h: int, i: int) -> None:
    """Row ``h`` <- row ``i`` times row ``h``, with the sign tracked exactly."""
    _pick(_nb_rowsum, _np_rowsum)(x, z, r, h, i)


def hadamard(x, z, r, q: int) -> None:
    _pick(_nb_h, _np_h)(x, z, r, q)


def cnot(x, z, r, c: int, t: int) -> None:
    _pick(_nb_cx, _np_cx)(x, z, r, c, t)


def cz(x, z, r, a: int, b: int) -> None:
    _pick(_nb_cz, _np_cz)(x, z, r, a, b)


def pauli_z(x, z, r, q: int) -> None:
    """Conjugation by Z flips rows with an X component on ``q``."""
    _pick(_nb_sign_from, _np_sign_from)(x, r, q)


def pauli_x(x, z, r, q: int) -> None:
    _pick(_nb_sign_from, _np_sign_from)(z, r, q)


def measure(x, z, r, m: int, q: int, rnd: int) -> tuple[int, bool]:
    """Z measurement of column ``q``; ``rnd`` is the outcome used if it is random.

    The arrays need ``2m + 1`` rows: destabilizers, stabilizers and a scratch row.
    """
    out, random = _pick(_nb_measure, _np_measure)(x, z, r, m, q, np.int64(rnd))
    return int(out), bool(random)


def xreduce(x, z, r, ncols: int) -> int:
    """Gaussian elimination on X bits using signed row products; returns the rank."""
    return int(_pick(_nb_xreduce, _np_xreduce)(x, z, r, ncols))


def zreduce(z, r, start: int, ncols: int) -> np.ndarray:
    """Reduced row echelon form of Z-only rows ``start:``; returns pivot columns."""
    pivots = np.zeros(max(z.shape[0] - start, 0), dtype=np.int64)
    count = _pick(_nb_zreduce, _np_zreduce)(z, r, start, ncols, pivots)
    return pivots[:count]


def sample_affine(x0: np.ndarray, basis: np.ndarray, rand: np.ndarray) -> np.ndarray:
    """Rows ``x0 ^ (random combination of basis rows)``, one per row of ``rand``."""
    out = np.empty((rand.shape[0], x0.shape[0]), dtype=np.uint64)
    _pick(_nb_sample_affine, _np_sample_affine)(x0, basis, rand, out)
    return out
