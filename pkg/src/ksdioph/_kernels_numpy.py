"""Pure-numpy fallback kernels; same contracts as the numba versions."""

from __future__ import annotations

import numpy as np


def affine_min_scan(coords, E, X, Einv, offsets):
    """Minimize max_sigma |sum_i sigma(q_i) x_i^sigma + sigma(q0)| over rows.

    coords: (M, m*d) int64, per-candidate integer coordinates of q (component
    major: q_i occupies columns i*d..(i+1)*d).
    E: (d, d) embedding matrix rows = places; X: (d, m) point rows;
    Einv: inverse embedding; offsets: (P, d) local search around the rounded
    nearest q0.  Returns (best value, best row index, best q0 coords (d,)).
    """
    M = coords.shape[0]
    d = E.shape[0]
    m = X.shape[1]
    Q = coords.reshape(M, m, d).astype(np.float64) @ E.T          # (M, m, d)
    s = np.einsum("Mis,si->Ms", Q, X)                              # (M, d)
    t = -s @ Einv.T                                                # (M, d)
    base = np.rint(t)
    best_val = np.full(M, np.inf)
    best_off = np.zeros(M, dtype=np.int64)
    for p in range(offsets.shape[0]):
        q0emb = (base + offsets[p]) @ E.T
        v = np.abs(s + q0emb).max(axis=1)
        upd = v < best_val
        best_val[upd] = v[upd]
        best_off[upd] = p
    idx = int(np.argmin(best_val))
    q0 = (base[idx] + offsets[best_off[idx]]).astype(np.int64)
    return float(best_val[idx]), idx, q0


def affine_collect_below(coords, E, X, Einv, offsets, thresh):
    """Row indices (with best q0 coords and values) whose minimum over the q0
    search falls at or below thresh."""
    M = coords.shape[0]
    d = E.shape[0]
    m = X.shape[1]
    Q = coords.reshape(M, m, d).astype(np.float64) @ E.T
    s = np.einsum("Mis,si->Ms", Q, X)
    t = -s @ Einv.T
    base = np.rint(t)
    best_val = np.full(M, np.inf)
    best_off = np.zeros(M, dtype=np.int64)
    for p in range(offsets.shape[0]):
        q0emb = (base + offsets[p]) @ E.T
        v = np.abs(s + q0emb).max(axis=1)
        upd = v < best_val
        best_val[upd] = v[upd]
        best_off[upd] = p
    hit = np.nonzero(best_val <= thresh)[0]
    q0s = (base[hit] + offsets[best_off[hit]]).astype(np.int64)
    return hit.astype(np.int64), best_val[hit], q0s


def content_scan(Y):
    """Contents of embedded vectors: Y (M, d, n) -> (values (M,), argmin)."""
    vals = np.abs(Y).max(axis=2).prod(axis=1)
    return vals, int(np.argmin(vals)) if len(vals) else -1
