"""O_K-module lattices g O_K^n inside K_S^n: restriction of scalars,
content, and a certified systole search.

Certification strategy for the systole: any vector of content c can be
rebalanced by a unit to have every place-norm at most c^(1/d) * e^(lam/2),
where lam is the log-house of a fundamental-ish unit (trivial for K = Q).
Enumerating the restriction-of-scalars lattice inside that sup-norm box is
therefore complete for contents below the best candidate found so far.
For degree >= 3 the single-unit rebalancing argument no longer covers the
unit group and results are flagged uncertified.
"""

from __future__ import annotations

import math

from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from . import kernels
from .enumeration import lattice_points_in_box, lll_reduce
from .fields import Field, FieldElement, GUARD_BITS, _mpf_of_fraction


class LatticeError(Exception):
    pass


class SingularBlock(LatticeError):
    pass


class KSVector:
    """Element of K_S^n as a d x n array of reals at working precision."""

    __slots__ = ("field", "n", "rows")

    def __init__(self, field: Field, rows):
        self.field = field
        self.rows = tuple(tuple(mpmath.mpf(v) if not isinstance(v, mpmath.mpf) else v
                                for v in row) for row in rows)
        self.n = len(self.rows[0])
        if len(self.rows) != field.degree:
            raise ValueError("row count != number of places")

    @classmethod
    def from_elements(cls, elements):
        """Diagonal embedding of a vector of field elements."""
        field = elements[0].field
        embeds = [e.embed() for e in elements]
        rows = [[embeds[k][i] for k in range(len(elements))]
                for i in range(field.degree)]
        return cls(field, rows)

    @classmethod
    def from_floats(cls, field, array):
        arr = np.asarray(array, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[:, None]
        return cls(field, [[mpmath.mpf(float(x)) for x in row] for row in arr])

    def as_float64(self):
        return np.array([[float(v) for v in row] for row in self.rows])

    def sup_norm(self):
        return max(abs(v) for row in self.rows for v in row)

    def place_sup(self, i):
        return max(abs(v) for v in self.rows[i])

    def __repr__(self):
        return f"KSVector(d={len(self.rows)}, n={self.n})"


def content(y: KSVector):
    """prod over places of the per-place sup norm."""
    with mpmath.workprec(y.field.precision_bits + GUARD_BITS):
        prod = mpmath.mpf(1)
        for i in range(len(y.rows)):
            prod *= y.place_sup(i)
        return +prod


class ModuleLattice:
    """g O_K^n with its rank d*n restriction-of-scalars real basis.

    Rows of the ros basis are indexed place-major ((sigma, coordinate));
    columns are the images of the module generators omega_j e_k (column
    index k*d + j).
    """

    def __init__(self, field: Field, blocks, exact_matrix=None):
        self.field = field
        self.n = len(blocks[0])
        self.exact_matrix = exact_matrix
        d = field.degree
        with mpmath.workprec(field.precision_bits + GUARD_BITS):
            self.blocks = [[[mpmath.mpf(x) if not isinstance(x, mpmath.mpf) else x
                             for x in row] for row in blk] for blk in blocks]
            dets = []
            for blk in self.blocks:
                dets.append(mpmath.det(mpmath.matrix(blk)))
            if any(det == 0 for det in dets):
                raise SingularBlock("per-place block has det 0")
            self.block_dets = dets
            N = d * self.n
            ros = mpmath.zeros(N, N)
            E = field.table.embed_matrix
            for k in range(self.n):
                for j in range(d):
                    col = k * d + j
                    for sig in range(d):
                        for kp in range(self.n):
                            ros[sig * self.n + kp, col] = self.blocks[sig][kp][k] * E[sig][j]
            self.ros_mp = ros
            sq = mpmath.sqrt(mpmath.mpf(field.discriminant))
            cov = sq ** self.n
            for det in dets:
                cov *= abs(det)
            self.covolume = +cov
        self.ros_f64 = np.array(
            [[float(ros[i, j]) for j in range(N)] for i in range(N)])

    def vector_from_coeffs(self, coeffs):
        """Module vector (tuple of FieldElement) from integer generator coeffs."""
        d = self.field.degree
        return tuple(self.field.element([int(c) for c in coeffs[k * d:(k + 1) * d]])
                     for k in range(self.n))

    def embed_coeffs(self, coeffs) -> KSVector:
        with mpmath.workprec(self.field.precision_bits + GUARD_BITS):
            N = self.field.degree * self.n
            y = [mpmath.mpf(0)] * N
            for col, c in enumerate(coeffs):
                if c:
                    ci = int(c)
                    for i in range(N):
                        y[i] += ci * self.ros_mp[i, col]
            d = self.field.degree
            rows = [[y[sig * self.n + k] for k in range(self.n)] for sig in range(d)]
        return KSVector(self.field, rows)

    def dump_text(self):
        """One line per generator: exact module coordinates, then the
        embedded real rows."""
        d = self.field.degree
        lines = []
        for k in range(self.n):
            for j in range(d):
                col = k * d + j
                coords = ["0/1"] * (self.n * d)
                coords[col] = "1/1"
                embedded = [mpmath.nstr(self.ros_mp[i, col], 25)
                            for i in range(d * self.n)]
                lines.append(" ".join(coords) + " | " + " ".join(embedded))
        return "\n".join(lines) + "\n"


def restriction_of_scalars(g, field: Field) -> ModuleLattice:
    """Build g O_K^n from per-place blocks, or from a single matrix over K
    (list of lists of FieldElement / Fraction), keeping exact data when given.
    """
    if _is_field_matrix(g):
        n = len(g)
        exact = [[_as_element(x, field) for x in row] for row in g]
        blocks = []
        for sig in range(field.degree):
            blk = [[exact[i][j].embed()[sig] for j in range(n)] for i in range(n)]
            blocks.append(blk)
        return ModuleLattice(field, blocks, exact_matrix=exact)
    blocks = []
    for blk in g:
        arr = [[x for x in row] for row in np.asarray(blk, dtype=object)]
        blocks.append(arr)
    if len(blocks) != field.degree:
        raise LatticeError("need one block per place")
    return ModuleLattice(field, blocks)


def _is_field_matrix(g):
    try:
        first = g[0][0]
    except (TypeError, IndexError):
        return False
    return isinstance(first, (FieldElement, Fraction, int))


def _as_element(x, field):
    if isinstance(x, FieldElement):
        return x
    return field.from_rational(Fraction(x))


def identity_lattice(field: Field, n: int) -> ModuleLattice:
    one = field.one()
    zero = field.zero()
    g = [[one if i == j else zero for j in range(n)] for i in range(n)]
    return restriction_of_scalars(g, field)


def scale_rows_by_unit(lat: ModuleLattice, u: FieldElement) -> ModuleLattice:
    """Diagonal action of a field element: per place, multiply the block by
    sigma(u).  |N(u)| = 1 leaves every content unchanged."""
    emb = u.embed()
    blocks = []
    for sig, blk in enumerate(lat.blocks):
        blocks.append([[v * emb[sig] for v in row] for row in blk])
    exact = None
    if lat.exact_matrix is not None:
        exact = [[u * x for x in row] for row in lat.exact_matrix]
    return ModuleLattice(lat.field, blocks, exact_matrix=exact)


@dataclass
class SystoleResult:
    delta: object
    witness: tuple
    witness_coeffs: tuple
    certified: bool
    reason: str
    examined: int

    def __iter__(self):
        yield self.delta
        yield self.witness


def systole_content(lat: ModuleLattice, cap=2_000_000) -> SystoleResult:
    """Certified minimum content over nonzero module vectors.

    Returns best-found flagged non-certified when the enumeration budget is
    hit or no balancing unit is available (degree >= 3).
    """
    field = lat.field
    d = field.degree
    N = d * lat.n
    prec = field.precision_bits

    cands = {}

    def consider(coeffs):
        key = _normalize_coeffs(coeffs)
        if key is not None and key not in cands:
            cands[key] = None

    for col in range(N):
        unit = [0] * N
        unit[col] = 1
        consider(unit)
    red, U = lll_reduce(lat.ros_f64.T.copy(), return_transform=True)
    for row in U:
        consider([int(x) for x in row])

    def eval_content_mp(coeffs):
        y = lat.embed_coeffs(coeffs)
        val = content(y)
        if lat.exact_matrix is not None:
            val = _clamp_exact(lat, coeffs, val)
        return val

    with mpmath.workprec(prec + GUARD_BITS):
        best_key = None
        best_val = None

        def rescan():
            nonlocal best_key, best_val
            for key in sorted(cands):
                if cands[key] is None:
                    cands[key] = eval_content_mp(key)
                v = cands[key]
                if best_val is None or v < best_val or (v == best_val and key < best_key):
                    best_val, best_key = v, key

        rescan()

        lam = mpmath.mpf(0)
        balanced = True
        if d == 2:
            u0 = field.balancing_unit()
            if u0 is None:
                balanced = False
            else:
                lam = mpmath.log(u0.house())
        elif d > 2:
            balanced = False

        def box_radius():
            R = best_val ** (mpmath.mpf(1) / d) * mpmath.e ** (lam / 2)
            R = R * (1 + mpmath.mpf(2) ** -20)
            est = N * math.log(2 * float(R)) - math.log(max(float(lat.covolume), 1e-300))
            return R, math.exp(min(est, 700))

        examined = len(cands)
        complete = False
        if balanced:
            R, est = box_radius()
            if est > cap * 8:
                # float reduction gave a poor bound (large dynamic range);
                # redo the reduction at working precision
                for key in _mp_short_candidates(lat):
                    if key not in cands:
                        cands[key] = None
                rescan()
                R, est = box_radius()
            if est > cap * 8:
                coeffs, complete = np.zeros((0, N), dtype=np.int64), False
            else:
                coeffs, complete = lattice_points_in_box(
                    _ros_for_enum(lat), [R] * N, cap=cap)
            examined += len(coeffs)
            if len(coeffs):
                vals = _bulk_contents(lat, coeffs)
                vmin = vals.min()
                near = np.nonzero(vals <= vmin * (1 + 1e-9) + 1e-300)[0]
                if len(near) > 200:
                    near = near[np.argsort(vals[near])[:200]]
                for idx in near:
                    key = _normalize_coeffs([int(c) for c in coeffs[idx]])
                    if key is None:
                        continue
                    v = eval_content_mp(key)
                    if v < best_val or (v == best_val and key < best_key):
                        best_val, best_key = v, key

        witness = lat.vector_from_coeffs(best_key)
        certified = balanced and complete
        reason = ""
        if not balanced:
            reason = "no unit balancing available for this degree"
        elif not complete:
            reason = "enumeration budget exceeded"
        return SystoleResult(
            delta=+best_val, witness=witness, witness_coeffs=best_key,
            certified=certified, reason=reason, examined=examined)


def _mp_short_candidates(lat):
    """Short-vector candidates from an LLL reduction of the restriction of
    scalars at working precision (rescues extreme flow times where float64
    Gram-Schmidt loses the small entries)."""
    N = lat.field.degree * lat.n
    rows = [[lat.ros_mp[i, j] for i in range(N)] for j in range(N)]
    with mpmath.workprec(lat.field.precision_bits + GUARD_BITS):
        _, U = lll_reduce(rows, return_transform=True)
    out = []
    for row in U:
        key = _normalize_coeffs([int(c) for c in row])
        if key is not None:
            out.append(key)
    return out


def _ros_for_enum(lat):
    arr = lat.ros_f64
    if np.all(np.isfinite(arr)) and np.abs(arr).max() < 1e200:
        mags = np.abs(arr)
        nz = mags[mags > 0]
        if len(nz) and nz.min() > 1e-200:
            return arr
    N = lat.field.degree * lat.n
    return np.array([[lat.ros_mp[i, j] for j in range(N)] for i in range(N)],
                    dtype=object)


def _bulk_contents(lat, coeffs):
    if coeffs.dtype == object:
        vals = []
        for row in coeffs:
            y = lat.embed_coeffs([int(c) for c in row])
            vals.append(float(content(y)))
        return np.array(vals)
    Y = (coeffs.astype(np.float64) @ lat.ros_f64.T).reshape(
        len(coeffs), lat.field.degree, lat.n)
    vals, _ = kernels.content_scan(Y)
    return vals


def _normalize_coeffs(coeffs):
    coeffs = tuple(int(c) for c in coeffs)
    if all(c == 0 for c in coeffs):
        return None
    for c in coeffs:
        if c != 0:
            return coeffs if c > 0 else tuple(-x for x in coeffs)
    return None


def _clamp_exact(lat, coeffs, val):
    """content(y) >= max_k |N(y_k)| for exact module vectors; snap the
    evaluated content up to the exact bound when they agree to precision."""
    v = lat.vector_from_coeffs(coeffs)
    exact = lat.exact_matrix
    n = lat.n
    best = Fraction(0)
    for k in range(n):
        yk = lat.field.zero()
        for j in range(n):
            if not v[j].is_zero():
                yk = yk + exact[k][j] * v[j]
        nm = abs(yk.norm())
        if nm > best:
            best = nm
    if best == 0:
        return val
    bound = _mpf_of_fraction(best)
    if val < bound:
        return bound
    if abs(val - bound) <= abs(bound) * mpmath.mpf(2) ** (-(lat.field.precision_bits // 2)):
        return bound
    return val


def systole_csv(entries):
    """CSV rows of (witness, content) tables."""
    lines = ["witness,content,certified"]
    for res in entries:
        wit = ";".join("/".join([str(c.numerator), str(c.denominator)])
                       for el in res.witness for c in el.coords)
        lines.append(f"{wit},{mpmath.nstr(res.delta, 20)},{int(res.certified)}")
    return "\n".join(lines) + "\n"
