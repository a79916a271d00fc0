"""Numba-compiled hot loops.  Signatures mirror _kernels_numpy exactly;
these fuse the embedding, the nearest-integer q0 search and the sup-norm
minimization so candidate grids never materialize intermediate arrays.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _affine_core(coords, E, X, Einv, offsets, thresh, collect_idx, collect_val, collect_q0):
    M, md = coords.shape
    d = E.shape[0]
    m = md // d
    best_val = np.inf
    best_idx = -1
    best_q0 = np.zeros(d, dtype=np.int64)
    nhit = 0
    s = np.empty(d)
    t = np.empty(d)
    base = np.empty(d)
    for row in range(M):
        for sig in range(d):
            acc = 0.0
            for i in range(m):
                qi = 0.0
                for k in range(d):
                    qi += E[sig, k] * coords[row, i * d + k]
                acc += qi * X[sig, i]
            s[sig] = acc
        for j in range(d):
            acc = 0.0
            for sig in range(d):
                acc += Einv[j, sig] * (-s[sig])
            t[j] = acc
            base[j] = np.rint(acc)
        row_best = np.inf
        row_off = 0
        for p in range(offsets.shape[0]):
            v = 0.0
            for sig in range(d):
                q0e = 0.0
                for j in range(d):
                    q0e += E[sig, j] * (base[j] + offsets[p, j])
                a = abs(s[sig] + q0e)
                if a > v:
                    v = a
            if v < row_best:
                row_best = v
                row_off = p
        if row_best < best_val:
            best_val = row_best
            best_idx = row
            for j in range(d):
                best_q0[j] = np.int64(base[j] + offsets[row_off, j])
        if thresh >= 0.0 and row_best <= thresh and nhit < collect_idx.shape[0]:
            collect_idx[nhit] = row
            collect_val[nhit] = row_best
            for j in range(d):
                collect_q0[nhit, j] = np.int64(base[j] + offsets[row_off, j])
            nhit += 1
    return best_val, best_idx, best_q0, nhit


def affine_min_scan(coords, E, X, Einv, offsets):
    dummy_i = np.empty(0, dtype=np.int64)
    dummy_v = np.empty(0)
    dummy_q = np.empty((0, E.shape[0]), dtype=np.int64)
    val, idx, q0, _ = _affine_core(
        np.ascontiguousarray(coords), E, X, Einv, offsets, -1.0,
        dummy_i, dummy_v, dummy_q)
    return float(val), int(idx), q0


def affine_collect_below(coords, E, X, Einv, offsets, thresh):
    cap = coords.shape[0]
    idxs = np.empty(cap, dtype=np.int64)
    vals = np.empty(cap)
    q0s = np.empty((cap, E.shape[0]), dtype=np.int64)
    _, _, _, n = _affine_core(
        np.ascontiguousarray(coords), E, X, Einv, offsets, float(thresh),
        idxs, vals, q0s)
    return idxs[:n], vals[:n], q0s[:n]


@njit(cache=True)
def _content_core(Y):
    M, d, n = Y.shape
    vals = np.empty(M)
    best = np.inf
    arg = -1
    for row in range(M):
        prod = 1.0
        for sig in range(d):
            mx = 0.0
            for k in range(n):
                a = abs(Y[row, sig, k])
                if a > mx:
                    mx = a
            prod *= mx
        vals[row] = prod
        if prod < best:
            best = prod
            arg = row
    return vals, arg


def content_scan(Y):
    vals, arg = _content_core(np.ascontiguousarray(Y))
    return vals, int(arg)
