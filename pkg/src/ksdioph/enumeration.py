"""Lattice search machinery: LLL reduction and complete enumeration of
lattice points inside axis-aligned boxes (Fincke-Pohst style).

The float64 paths are the default; an mpmath path handles bases whose
dynamic range would wreck double-precision Gram-Schmidt (large flow times,
exponential zeta schedules).  Enumeration bounds are padded outward so the
reported point sets over-cover the requested box; callers filter exactly.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath
import numpy as np

PAD = 1e-9


class NumericalBreakdown(Exception):
    pass


class BudgetExceeded(Exception):
    pass


# ---------------------------------------------------------------------------
# LLL

def lll_reduce(basis, delta=0.99, return_transform=False):
    """Lovasz-reduce a basis given as rows.

    Accepts a float numpy array (float path), a list of rows of
    ints/Fractions (exact path), or rows of mpf (mpmath path).  Returns the
    reduced basis in the same style; first vector is within 2^((n-1)/2) of
    the Euclidean shortest.
    """
    if isinstance(basis, np.ndarray):
        red, U = _lll_rows(
            [ [float(x) for x in row] for row in basis ],
            float(delta), _round_float)
        out = np.array(red, dtype=np.float64)
        return (out, np.array(U, dtype=np.int64)) if return_transform else out
    rows = [list(r) for r in basis]
    if any(isinstance(x, mpmath.mpf) for x in rows[0]):
        red, U = _lll_rows(rows, mpmath.mpf(delta), _round_mpf)
    else:
        rows = [[Fraction(x) for x in row] for row in rows]
        red, U = _lll_rows(rows, Fraction(delta).limit_denominator(10**6), _round_fraction)
    return (red, U) if return_transform else red


def _round_float(x):
    return int(np.rint(x))


def _round_mpf(x):
    return int(mpmath.nint(x))


def _round_fraction(q):
    return int(round(q))


def _gso(B):
    n = len(B)
    mu = [[None] * n for _ in range(n)]
    star = [row[:] for row in B]
    norms = [None] * n
    for i in range(n):
        for j in range(i):
            denom = norms[j]
            if denom == 0:
                raise NumericalBreakdown("Gram-Schmidt degeneracy")
            mu[i][j] = _dot(B[i], star[j]) / denom
            star[i] = [a - mu[i][j] * b for a, b in zip(star[i], star[j])]
        norms[i] = _dot(star[i], star[i])
    return mu, norms


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def _lll_rows(B, delta, rnd):
    B = [row[:] for row in B]
    n = len(B)
    U = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    mu, norms = _gso(B)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = rnd(mu[k][j])
            if q:
                B[k] = [a - q * b for a, b in zip(B[k], B[j])]
                U[k] = [a - q * b for a, b in zip(U[k], U[j])]
                mu, norms = _gso(B)
        if norms[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * norms[k - 1]:
            k += 1
        else:
            B[k], B[k - 1] = B[k - 1], B[k]
            U[k], U[k - 1] = U[k - 1], U[k]
            mu, norms = _gso(B)
            k = max(k - 1, 1)
    return B, U


# ---------------------------------------------------------------------------
# box enumeration

def lattice_points_in_box(basis_cols, radii, cap=5_000_000, include_zero=False,
                          offset=None):
    """Integer coefficient vectors a with |offset_i + (B a)_i| <= radii[i].

    basis_cols: (N, N) with columns the lattice basis (float64 or mpf).
    Complete up to an outward pad of 1e-9 relative; the returned set may
    slightly over-cover the box.  Returns (coeffs int64 array, complete flag);
    complete is False when cap was hit.
    """
    B = np.asarray(basis_cols, dtype=object)
    N = B.shape[0]
    r = list(radii)
    if any(x <= 0 for x in r):
        raise ValueError("radii must be positive")
    use_mp = _needs_mp(B, r)
    if use_mp:
        if offset is not None:
            raise NumericalBreakdown("affine enumeration unsupported on mp path")
        return _points_mp(B, r, cap, include_zero)
    Bf = B.astype(np.float64)
    rf = np.array([float(x) for x in r])
    scaled = Bf / rf[:, None]
    off = (np.array([float(x) for x in offset]) / rf
           if offset is not None else np.zeros(N))
    red_rows, U = lll_reduce(scaled.T.copy(), return_transform=True)
    Bred = np.array(red_rows).T  # columns again
    Uc = np.array(U).T           # a = Uc @ z
    try:
        Q, R = np.linalg.qr(Bred)
    except np.linalg.LinAlgError as exc:
        raise NumericalBreakdown(str(exc)) from exc
    if np.min(np.abs(np.diag(R))) < 1e-13:
        raise NumericalBreakdown("degenerate basis")
    R2 = float(N) * (1 + PAD) ** 2
    zstar = np.linalg.solve(R, -(Q.T @ off)) if offset is not None else np.zeros(N)
    out = []
    complete = _fp_dfs_float(R, R2, N, Bred, Uc, out, cap, include_zero, off,
                             zstar)
    if out:
        coeffs = np.array(out, dtype=np.int64)
    else:
        coeffs = np.zeros((0, N), dtype=np.int64)
    return coeffs, complete


def _needs_mp(B, r):
    try:
        vals = [abs(float(x)) for row in B for x in row if float(x) != 0]
        rv = [float(x) for x in r]
    except (OverflowError, ValueError):
        return True
    if not vals:
        return False
    hi = max(max(vals), max(rv))
    lo = min(min(vals), min(rv))
    if hi > 1e200 or lo < 1e-200:
        return True
    scale = []
    for j in range(B.shape[1]):
        col = [abs(float(B[i, j])) / rv[i] for i in range(B.shape[0]) if float(B[i, j]) != 0]
        if col:
            scale.append(max(col))
    if not scale:
        return False
    return max(scale) / max(min(scale), 1e-300) > 1e11


def _fp_dfs_float(R, R2, N, Bcols, Uc, out, cap, include_zero, off, zstar):
    # pure-python incremental DFS: ylev[k] carries the partial embedding sum
    # of levels >= k (plus the affine offset) so leaves cost O(N)
    z = [0] * N
    zs = [float(v) for v in zstar]
    Rl = [[float(R[i, j]) for j in range(N)] for i in range(N)]
    cols = [[float(Bcols[i, j]) for i in range(N)] for j in range(N)]
    Ucl = [[int(Uc[i, j]) for j in range(N)] for i in range(N)]
    ylev = [[0.0] * N for _ in range(N + 1)]
    ylev[N] = [float(v) for v in off]
    bound = 1 + 2 * PAD
    affine = any(v != 0 for v in off)
    sqrt = np.sqrt

    def rec(level, partial):
        if len(out) > cap:
            return False
        if level < 0:
            if not include_zero and not affine and not any(z):
                return True
            y = ylev[0]
            for i in range(N):
                if y[i] > bound or y[i] < -bound:
                    return True
            out.append(np.array([sum(Ucl[i][j] * z[j] for j in range(N))
                                 for i in range(N)], dtype=np.int64))
            return len(out) <= cap
        row = Rl[level]
        c = 0.0
        for j in range(level + 1, N):
            c += row[j] * (z[j] - zs[j])
        rad2 = R2 - partial
        if rad2 < 0:
            return True
        dv = row[level]
        s = sqrt(rad2) / abs(dv)
        center = zs[level] - c / dv
        lo = int(np.ceil(center - s - 1e-12))
        hi = int(np.floor(center + s + 1e-12))
        base = ylev[level + 1]
        col = cols[level]
        for v in range(lo, hi + 1):
            z[level] = v
            t = dv * (v - zs[level]) + c
            yl = ylev[level]
            if v:
                for i in range(N):
                    yl[i] = base[i] + v * col[i]
            else:
                yl[:] = base
            if not rec(level - 1, partial + t * t):
                return False
        z[level] = 0
        return True

    return rec(N - 1, 0.0)


def _points_mp(B, r, cap, include_zero):
    """mpmath fallback for extreme dynamic range; same contract."""
    N = B.shape[0]
    with mpmath.workprec(max(mpmath.mp.prec, 300)):
        rm = [mpmath.mpf(x) if not isinstance(x, mpmath.mpf) else x for x in r]
        S = [[mpmath.mpf(B[i, j]) / rm[i] for j in range(N)] for i in range(N)]
        rows = [[S[i][j] for i in range(N)] for j in range(N)]  # rows = columns of S
        red, U = _lll_rows(rows, 0.99, _round_mpf)
        cols = [[red[j][i] for j in range(N)] for i in range(N)]  # back to columns
        mu, star, norms = _gso_mp_cols(cols)
        R2 = mpmath.mpf(N) * (1 + mpmath.mpf(PAD)) ** 2
        out = []
        z = [0] * N

        def ycoord(i):
            return sum(cols[i][j] * z[j] for j in range(N))

        def rec(level, partial):
            if len(out) > cap:
                return False
            if level < 0:
                if not include_zero and all(v == 0 for v in z):
                    return True
                if max(abs(ycoord(i)) for i in range(N)) <= 1 + 2 * PAD:
                    a = [sum(U[j][k] * z[j] for j in range(N)) for k in range(N)]
                    out.append(a)
                return len(out) <= cap
            c = sum(mu[j][level] * z[j] for j in range(level + 1, N))
            rad2 = R2 - partial
            if rad2 < 0:
                return True
            s = mpmath.sqrt(rad2 / norms[level])
            lo = int(mpmath.ceil(-c - s - mpmath.mpf("1e-12")))
            hi = int(mpmath.floor(-c + s + mpmath.mpf("1e-12")))
            for v in range(lo, hi + 1):
                z[level] = v
                t2 = (v + c) ** 2 * norms[level]
                if not rec(level - 1, partial + t2):
                    return False
            z[level] = 0
            return True

        complete = rec(N - 1, mpmath.mpf(0))
        if not out:
            return np.zeros((0, N), dtype=np.int64), complete
        try:
            coeffs = np.array(out, dtype=np.int64)
        except OverflowError:
            coeffs = np.array(out, dtype=object)
        return coeffs, complete


def _gso_mp_cols(cols):
    """Gram-Schmidt over columns-as-vectors, mu[i][j] = <b_i, b*_j>/<b*_j,b*_j>."""
    N = len(cols)
    star = [list(c) for c in cols]
    mu = [[mpmath.mpf(0)] * N for _ in range(N)]
    norms = [None] * N
    for i in range(N):
        for j in range(i):
            mu[i][j] = _dot(cols[i], star[j]) / norms[j]
            star[i] = [a - mu[i][j] * b for a, b in zip(star[i], star[j])]
        norms[i] = _dot(star[i], star[i])
        if norms[i] == 0:
            raise NumericalBreakdown("mp Gram-Schmidt degeneracy")
    return mu, star, norms
