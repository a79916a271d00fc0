"""Effective Dirichlet solver, irrationality measure function, uniform
exponent estimation, and totally-irrational certification.

Two point representations are supported: KSVector (numeric rows) and
ExactPoint (per-place coordinates known exactly as field elements), the
latter enabling exact zero tests and the exact relation kernel.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from . import kernels
from .enumeration import lattice_points_in_box, lll_reduce
from .fields import (Field, FieldElement, GUARD_BITS, _mpf_of_fraction,
                     enumerate_integer_coords)
from .lattices import KSVector


class DiophantineError(Exception):
    pass


class NoSolutionInBox(DiophantineError):
    pass


class BudgetExceeded(DiophantineError):
    pass


class EtaZero(DiophantineError):
    pass


class ExactPoint:
    """Point of K_S^m with coordinate i at place sig equal to
    sigma_sig(elements[sig][i]); supports exact relation arithmetic."""

    def __init__(self, field: Field, elements):
        self.field = field
        self.elements = tuple(tuple(e for e in row) for row in elements)
        self.m = len(self.elements[0])
        if len(self.elements) != field.degree:
            raise ValueError("need one coordinate tuple per place")

    @classmethod
    def from_field_vector(cls, alphas):
        """tau(alpha) for alpha in K^m: every place sees the same elements."""
        field = alphas[0].field
        return cls(field, [tuple(alphas)] * field.degree)

    def to_ks(self) -> KSVector:
        rows = []
        for sig in range(self.field.degree):
            rows.append([el.embed()[sig] for el in self.elements[sig]])
        return KSVector(self.field, rows)

    def relation_value_exact(self, q0: FieldElement, q):
        """Per-place exact K-elements q . x + q0; all zero iff exact relation."""
        out = []
        for sig in range(self.field.degree):
            acc = q0
            for i, qi in enumerate(q):
                acc = acc + qi * self.elements[sig][i]
            out.append(acc)
        return out


def _as_ks(x, field=None) -> KSVector:
    if isinstance(x, ExactPoint):
        return x.to_ks()
    if isinstance(x, KSVector):
        return x
    if field is None:
        raise ValueError("field required for raw arrays")
    return KSVector.from_floats(field, np.asarray(x, dtype=np.float64))


# ---------------------------------------------------------------------------
# proper functions Phi

def phi_house(q) -> float:
    return max(el.house_float() for el in q)


def phi_content(q) -> float:
    """prod over places of max(1, per-place sup); proper on O_K^m \\ 0."""
    field = q[0].field
    embeds = [el.embed() for el in q]
    prod = 1.0
    for sig in range(field.degree):
        prod *= max(1.0, max(abs(float(e[sig])) for e in embeds))
    return prod


PHI = {"house": phi_house, "content": phi_content}


# ---------------------------------------------------------------------------
# Dirichlet solver

@dataclass
class DirichletSolution:
    q0: FieldElement
    q: tuple
    value: object
    Q: float
    house_bound: float
    value_bound: float
    certified: bool

    def house_q(self):
        return max(el.house_float() for el in self.q) if self.q else 0.0


def dirichlet_solve(x, field: Field = None, Q: float = 8.0,
                    cap=60_000_000) -> DirichletSolution:
    """Minimize ||q.x + q0|| over the Minkowski box ||q_i|| <= Q D^(1/2d).

    Exhaustive over the integral q-box with nearest-point q0 per candidate;
    raises NoSolutionInBox when the best value exceeds D^(1/2d)/Q^m (the
    guarantee only holds for Q above an effective threshold).
    """
    exact = x if isinstance(x, ExactPoint) else None
    xs = _as_ks(x, field)
    field = xs.field
    m = xs.n
    d = field.degree
    with mpmath.workprec(field.precision_bits + GUARD_BITS):
        droot = mpmath.mpf(field.discriminant) ** (mpmath.mpf(1) / (2 * d))
        house_bound = float(Q * droot)
        value_bound = float(droot / mpmath.mpf(Q) ** m)

    best_val, best_coords, best_q0 = _affine_search(
        xs, house_bound, cap=cap, collect_margin=1e-9)
    if best_coords is None:
        raise NoSolutionInBox("empty candidate set")

    q = _q_from_coords(field, best_coords, m)
    q0 = field.element([int(c) for c in best_q0])
    val = _value_mp(xs, q0, q, exact)
    certified = True
    if float(val) > value_bound * (1 + 1e-9):
        if 1.0 <= value_bound * (1 + 1e-9):
            one = field.one()
            return DirichletSolution(one, tuple(field.zero() for _ in range(m)),
                                     mpmath.mpf(1), float(Q), house_bound,
                                     value_bound, True)
        raise NoSolutionInBox(
            f"best value {float(val):.6g} above bound {value_bound:.6g} at Q={Q}")
    return DirichletSolution(q0, q, val, float(Q), house_bound, value_bound, certified)


def _q_from_coords(field, coords, m):
    d = field.degree
    return tuple(field.element([int(c) for c in coords[i * d:(i + 1) * d]])
                 for i in range(m))


def _value_mp(xs: KSVector, q0, q, exact: ExactPoint | None):
    field = xs.field
    if exact is not None:
        vals = exact.relation_value_exact(q0, q)
        if all(v.is_zero() for v in vals):
            return mpmath.mpf(0)
    with mpmath.workprec(field.precision_bits + GUARD_BITS):
        e0 = q0.embed()
        eq = [qi.embed() for qi in q]
        worst = mpmath.mpf(0)
        for sig in range(field.degree):
            acc = e0[sig]
            for i, e in enumerate(eq):
                acc += e[sig] * xs.rows[sig][i]
            worst = max(worst, abs(acc))
        return +worst


def _affine_search(xs: KSVector, H, cap, collect_margin=1e-9, chunk=400_000,
                   phi_filter=None):
    """Scan q over the per-component house-<=H product grid, minimizing the
    q0-rounded sup norm.  Returns (value, q coords, q0 coords) with
    deterministic lexicographic tie-break on the sign-normalized coords."""
    field = xs.field
    d = field.degree
    m = xs.n
    comp = enumerate_integer_coords(H, field)
    Mq = len(comp)
    total = Mq**m
    if total > cap:
        raise BudgetExceeded(f"{total} q-candidates exceed cap {cap}")
    E = field._embed_f64
    Einv = field._inv_embed_f64
    X = xs.as_float64()
    offsets = np.array(list(itertools.product((-1, 0, 1), repeat=d)), dtype=np.int64)

    best = (np.inf, None, None)
    ties = []
    for coords in _product_chunks(comp, m, chunk):
        nz = np.any(coords != 0, axis=1)
        coords = coords[nz]
        if phi_filter is not None:
            coords = coords[phi_filter(coords)]
        if not len(coords):
            continue
        val, idx, q0 = kernels.affine_min_scan(coords, E, X, Einv, offsets)
        if val < best[0] * (1 + collect_margin) + 1e-300:
            hit_i, hit_v, hit_q0 = kernels.affine_collect_below(
                coords, E, X, Einv, offsets,
                min(val, best[0]) * (1 + collect_margin) + 1e-300)
            for i, v, qq0 in zip(hit_i, hit_v, hit_q0):
                ties.append((float(v), tuple(int(c) for c in coords[i]),
                             tuple(int(c) for c in qq0)))
        if val < best[0]:
            best = (val, coords[idx].copy(), q0.copy())
    if best[1] is None:
        return np.inf, None, None
    # resolve near-ties deterministically: smallest value, then normalized lex
    thresh = best[0] * (1 + collect_margin) + 1e-300
    pool = [t for t in ties if t[0] <= thresh]
    pool.sort(key=lambda t: (t[0], _norm_key(t[1]), t[2]))
    val, qc, q0c = pool[0]
    qc, q0c = _normalize_pair(qc, q0c)
    return val, np.array(qc, dtype=np.int64), np.array(q0c, dtype=np.int64)


def _norm_key(coords):
    for c in coords:
        if c != 0:
            return coords if c > 0 else tuple(-x for x in coords)
    return coords


def _normalize_pair(qc, q0c):
    for c in qc:
        if c > 0:
            return qc, q0c
        if c < 0:
            return tuple(-x for x in qc), tuple(-x for x in q0c)
    for c in q0c:
        if c > 0:
            return qc, q0c
        if c < 0:
            return tuple(-x for x in qc), tuple(-x for x in q0c)
    return qc, q0c


def _product_chunks(comp, m, chunk):
    """Yield int64 (C, m*d) blocks of the m-fold cartesian product."""
    Mq = len(comp)
    d = comp.shape[1]
    if m == 1:
        for lo in range(0, Mq, chunk):
            yield comp[lo:lo + chunk]
        return
    idx = [np.arange(Mq)] * m
    per = max(1, chunk // max(Mq, 1))
    if m == 2:
        for lo in range(0, Mq, per):
            left = comp[lo:lo + per]
            block = np.concatenate(
                [np.repeat(left, Mq, axis=0),
                 np.tile(comp, (len(left), 1))], axis=1)
            yield block
        return
    # general m: iterate the leading m-2 axes elementwise
    for lead in itertools.product(range(Mq), repeat=m - 2):
        prefix = np.concatenate([comp[i] for i in lead])
        for lo in range(0, Mq, per):
            left = comp[lo:lo + per]
            block = np.concatenate(
                [np.tile(prefix, (len(left) * Mq, 1)),
                 np.repeat(left, Mq, axis=0),
                 np.tile(comp, (len(left), 1))], axis=1)
            yield block


# ---------------------------------------------------------------------------
# irrationality measure function

@dataclass
class EtaResult:
    value: object
    q0: FieldElement
    q: tuple
    t: float
    phi: str
    certified: bool
    mode: str


def eta(x, t, field: Field = None, phi="house", cap=20_000_000,
        mode="auto", grid_cap=6_000_000) -> EtaResult:
    """min ||q.x + q0|| over nonzero q with Phi(q) <= t (q = 0 excluded).

    Exhaustive either by direct grid scan or, when the grid is too large, by
    complete box enumeration of the relation lattice at the best-candidate
    radius; both are certified.  Raises BudgetExceeded past cap.
    """
    exact = x if isinstance(x, ExactPoint) else None
    xs = _as_ks(x, field)
    field = xs.field
    m = xs.n
    d = field.degree
    if phi not in PHI:
        raise ValueError(f"unsupported Phi {phi!r}; supported: {sorted(PHI)}")

    comp_count = _enum_count_estimate(field, t)
    use_grid = mode == "grid" or (mode == "auto" and comp_count**m <= grid_cap)
    if use_grid:
        phi_filter = None
        if phi == "content":
            phi_filter = _content_filter(field, t, m)
        val, qc, q0c = _affine_search(xs, t, cap=max(cap, grid_cap),
                                      phi_filter=phi_filter)
        if qc is None:
            raise BudgetExceeded("empty feasible set")
        q = _q_from_coords(field, qc, m)
        q0 = field.element([int(c) for c in q0c])
        return EtaResult(_value_mp(xs, q0, q, exact), q0, q, float(t), phi,
                         True, "grid")
    if mode == "grid":
        raise BudgetExceeded("grid mode forced but grid too large")
    if phi != "house":
        raise BudgetExceeded("fp mode supports phi=house only")
    return _eta_fp(xs, exact, t, cap)


def _enum_count_estimate(field, H):
    d = field.degree
    inv = field._inv_embed_f64
    total = 1
    for j in range(d):
        b = int(np.floor(sum(abs(inv[j, k]) for k in range(d)) * H + 1e-9))
        total *= 2 * b + 1
    return total


def _content_filter(field, t, m):
    E = field._embed_f64
    d = field.degree

    def flt(coords):
        M = len(coords)
        Q = coords.reshape(M, m, d).astype(np.float64) @ E.T
        per_place = np.maximum(np.abs(Q).max(axis=1), 1.0)
        return per_place.prod(axis=1) <= t * (1 + 1e-9)

    return flt


def _relation_matrix(xs: KSVector, t_scale, v_scale):
    """Rows of the (pi-rows, q-rows) linear map on O_K^(m+1) generators."""
    field = xs.field
    d = field.degree
    m = xs.n
    N = (m + 1) * d
    E = field.table.embed_matrix
    T = mpmath.zeros(d + d * m, N)
    for sig in range(d):
        for i in range(m + 1):
            for l in range(d):
                col = i * d + l
                if i == 0:
                    T[sig, col] = E[sig][l]
                else:
                    T[sig, col] = E[sig][l] * xs.rows[sig][i - 1]
    for sig in range(d):
        for i in range(1, m + 1):
            row = d + sig * m + (i - 1)
            for l in range(d):
                T[row, i * d + l] = E[sig][l]
    return T


def _eta_fp(xs: KSVector, exact, t, cap):
    """Complete relation-lattice box enumeration: radius = best candidate."""
    field = xs.field
    d = field.degree
    m = xs.n
    prec = field.precision_bits
    with mpmath.workprec(prec + GUARD_BITS):
        T = _relation_matrix(xs, t, None)
        N = (m + 1) * d
        R = d + d * m
        Tf = np.array([[float(T[i, j]) for j in range(N)] for i in range(R)])

        def value_of(coeffs):
            q0 = field.element([int(c) for c in coeffs[:d]])
            qels = tuple(field.element([int(c) for c in coeffs[(i + 1) * d:(i + 2) * d]])
                         for i in range(m))
            return _value_mp(xs, q0, qels, exact), q0, qels

        def feasible(coeffs):
            qels = tuple(field.element([int(c) for c in coeffs[(i + 1) * d:(i + 2) * d]])
                         for i in range(m))
            if all(e.is_zero() for e in qels):
                return False
            h = max(float(e.house()) for e in qels)
            return h <= float(t) * (1 + 2.0**-30)

        cur, cur_wit = _initial_eta_candidate(xs, T, Tf, t, feasible, value_of)
        if cur is None:
            raise BudgetExceeded("no feasible candidate found for eta")

        radius_v = cur * (1 + mpmath.mpf(2) ** -20) + mpmath.mpf(2) ** (-4 * prec)
        tol = mpmath.mpf(t) * (1 + mpmath.mpf(2) ** -30)
        extreme = float(radius_v) <= 0 or float(t) / max(float(radius_v), 1e-300) > 1e10
        if extreme:
            basis = np.array([[T[i, j] for j in range(N)] for i in range(R)],
                             dtype=object)
            radii = [radius_v] * d + [tol] * (d * m)
        else:
            basis = Tf
            radii = [float(radius_v)] * d + [float(tol)] * (d * m)
            est = _box_estimate(Tf, radii)
            if est > cap:
                raise BudgetExceeded(f"relation box estimate {est:.3g} exceeds cap")
        pts, complete = lattice_points_in_box(basis, radii, cap=cap)
        if not complete:
            raise BudgetExceeded("relation box enumeration budget hit")
        best = (cur, cur_wit[1], cur_wit[2], _norm_key(tuple(cur_wit[0])))
        for row in pts:
            coeffs = [int(c) for c in row]
            if not feasible(coeffs):
                continue
            v, q0, qels = value_of(coeffs)
            key = _norm_key(tuple(coeffs))
            if v < best[0] or (v == best[0] and key < best[3]):
                best = (v, q0, qels, key)
        return EtaResult(+best[0], best[1], best[2], float(t), "house", True, "fp")


def _initial_eta_candidate(xs, T, Tf, t, feasible, value_of):
    """Seed the box radius with the best LLL-extracted candidate, growing the
    value scale until something feasible shows up."""
    field = xs.field
    d = field.degree
    m = xs.n
    N = (m + 1) * d
    droot = float(field.discriminant) ** (1.0 / (2 * d))
    cur = None
    cur_wit = None
    s = mpmath.mpf(droot) / mpmath.mpf(max(float(t) / droot, 1.0)) ** m
    for _ in range(80):
        if float(s) > 0 and np.all(np.isfinite(Tf / float(s))):
            radii = np.array([float(s)] * d + [float(t) * (1 + 1e-9)] * (d * m))
            scaled = Tf / radii[:, None]
            red, U = lll_reduce(scaled.T.copy(), return_transform=True)
            rows = [list(r) for r in U]
        else:
            R = d + d * m
            radii_mp = [s] * d + [mpmath.mpf(t)] * (d * m)
            scaled = [[T[i, j] / radii_mp[i] for j in range(N)] for i in range(R)]
            cols = [[scaled[i][j] for i in range(R)] for j in range(N)]
            _, U = lll_reduce([[mpmath.mpf(v) for v in col] for col in cols],
                              return_transform=True)
            rows = U
        for rowU in rows:
            coeffs = [int(c) for c in rowU]
            if feasible(coeffs):
                v, q0, qels = value_of(coeffs)
                if cur is None or v < cur:
                    cur, cur_wit = v, (coeffs, q0, qels)
        if cur is not None:
            return cur, cur_wit
        s *= 16
    return None, None


def _box_estimate(Tf, radii):
    sign, logdet = np.linalg.slogdet(Tf)
    if sign == 0:
        return math.inf
    logvol = sum(math.log(2 * float(r)) for r in radii)
    return math.exp(min(logvol - logdet, 700))


# ---------------------------------------------------------------------------
# uniform exponent

@dataclass
class ExponentEstimate:
    omega_hat: float
    fit_window: tuple
    residual: float
    t_values: tuple
    eta_values: tuple
    exact_relation: bool = False
    unstable: bool = False


def uniform_exponent_estimate(x, t_grid, field: Field = None, phi="house",
                              cap=20_000_000) -> ExponentEstimate:
    """Least-squares slope of -log eta against log t over a geometric grid.

    An exact relation makes eta vanish; omega_hat is then reported as inf
    (the symbolic branch of EtaZero).  For exact points the zero test is
    exact; for numeric points values below the precision threshold are
    treated as relations.  The fit runs on mpf logs so schedules whose eta
    underflows float64 still produce finite slopes.
    """
    t_grid = [float(t) for t in t_grid]
    if len(t_grid) < 8:
        raise ValueError("need a geometric grid with >= 8 points")
    exact_input = isinstance(x, ExactPoint)
    xs = _as_ks(x, field)
    vals = []
    logs = []
    thresh = mpmath.mpf(2) ** (-(xs.field.precision_bits // 2))
    for t in t_grid:
        r = eta(x if exact_input else xs, t, phi=phi, cap=cap)
        v = r.value
        if v == 0 or (not exact_input and v < thresh):
            return ExponentEstimate(math.inf, (t_grid[0], t_grid[-1]), 0.0,
                                    tuple(t_grid), tuple(vals) + (float(v),),
                                    exact_relation=True)
        vals.append(float(v))
        logs.append(-float(mpmath.log(v)))
    lt = np.log(np.array(t_grid))
    le = np.array(logs)
    slope, intercept = np.polyfit(lt, le, 1)
    resid = float(np.sqrt(np.mean((le - (slope * lt + intercept)) ** 2)))
    return ExponentEstimate(float(slope), (t_grid[0], t_grid[-1]), resid,
                            tuple(t_grid), tuple(vals),
                            unstable=resid > 0.2)


# ---------------------------------------------------------------------------
# totally irrational certification

@dataclass
class IrrationalityVerdict:
    relation_found: bool
    H: float
    mode: str
    q0: FieldElement | None = None
    q: tuple | None = None
    no_relation_any_height: bool = False
    candidates: tuple = ()
    threshold: float = 0.0

    @property
    def kind(self):
        return "Relation" if self.relation_found else "NoRelationUpTo"


def totally_irrational_certificate(x, H, field: Field = None, phi="house",
                                   cap=20_000_000) -> IrrationalityVerdict:
    """Search ||q.x + q0|| = 0 with Phi(q) <= H.

    Exact mode (ExactPoint input): the relation conditions split place by
    place into rational linear equations; the integer kernel is computed
    exactly and searched for a vector of q-house <= H, so the verdict is
    rigorous.  Numeric mode scans exhaustively below the precision threshold
    and adds LLL-extracted candidate relations for exact confirmation.
    """
    if isinstance(x, ExactPoint):
        return _irrational_exact(x, H, cap)
    xs = _as_ks(x, field)
    return _irrational_numeric(xs, H, cap)


def _irrational_exact(x: ExactPoint, H, cap):
    field = x.field
    d = field.degree
    m = x.m
    N = (m + 1) * d
    rows = []
    for sig in range(d):
        cols = []
        for i in range(m + 1):
            for l in range(d):
                base = field.element([1 if u == l else 0 for u in range(d)])
                el = base if i == 0 else base * x.elements[sig][i - 1]
                cols.append(el.coords)
        for comp in range(d):
            rows.append([cols[c][comp] for c in range(N)])
    kernel = integer_kernel(rows)
    if not kernel:
        return IrrationalityVerdict(False, float(H), "exact",
                                    no_relation_any_height=True)
    # minimal q-house vector in the kernel lattice, complete ball-cover
    # search over the q-part embedding forms (injective on the kernel:
    # q = 0 forces the whole relation vector to vanish)
    pts, complete = _kernel_box_points(field, kernel, m, H, cap)
    if not complete:
        raise BudgetExceeded("kernel box enumeration budget hit")
    best = None
    for row in pts:
        z = [0] * N
        for j, c in enumerate(row):
            if c:
                for k in range(N):
                    z[k] += int(c) * kernel[j][k]
        q0 = field.element(z[:d])
        q = tuple(field.element(z[(i + 1) * d:(i + 2) * d]) for i in range(m))
        if all(e.is_zero() for e in q):
            continue
        h = max(float(e.house()) for e in q)
        if h <= float(H) * (1 + 2.0**-30):
            vals = x.relation_value_exact(q0, q)
            if all(v.is_zero() for v in vals):
                zn = _norm_key(tuple(z))
                key = (h, zn)
                if best is None or key < best[0]:
                    best = (key, zn)
    if best is None:
        return IrrationalityVerdict(False, float(H), "exact")
    zn = best[1]
    q0 = field.element(zn[:d])
    q = tuple(field.element(zn[(i + 1) * d:(i + 2) * d]) for i in range(m))
    return IrrationalityVerdict(True, float(H), "exact", q0=q0, q=q)


def _kernel_box_points(field, kernel, m, H, cap):
    """Complete search for kernel combinations whose q-part embedding rows
    all lie within H: the sup box is covered by the Euclidean ball of the
    Gram factor, computed in mpmath at a precision adapted to the (possibly
    enormous) kernel integer entries."""
    d = field.degree
    r = len(kernel)
    mag = max(abs(int(c)) for b in kernel for c in b)
    prec = field.precision_bits + 2 * mag.bit_length() + 80
    with mpmath.workprec(prec):
        E = field.table.embed_matrix
        forms = []
        for sig in range(d):
            for i in range(1, m + 1):
                row = []
                for b in kernel:
                    row.append(mpmath.fsum(
                        E[sig][l] * b[i * d + l] for l in range(d)))
                forms.append(row)
        scale = max(abs(v) for row in forms for v in row)
        if scale == 0:
            raise DiophantineError("zero form matrix")
        R = len(forms)
        G = mpmath.zeros(r, r)
        for a in range(r):
            for b2 in range(a, r):
                s = mpmath.fsum(forms[i][a] * forms[i][b2] for i in range(R))
                G[a, b2] = s / scale**2
                G[b2, a] = G[a, b2]
        L = mpmath.cholesky(G)
        basis = np.array([[L[j, i] for j in range(r)] for i in range(r)],
                         dtype=object)  # columns = rows of L^T
        ball = mpmath.sqrt(mpmath.mpf(R)) * mpmath.mpf(H) / scale * (1 + mpmath.mpf(2) ** -24)
        pts, complete = lattice_points_in_box(basis, [ball] * r, cap=cap)
        keep = []
        tol = mpmath.mpf(H) * (1 + mpmath.mpf(2) ** -28)
        for rowc in pts:
            vals = [mpmath.fsum(forms[i][j] * int(rowc[j]) for j in range(r))
                    for i in range(R)]
            if all(abs(v) <= tol for v in vals):
                keep.append([int(c) for c in rowc])
        out = (np.array(keep, dtype=object) if keep
               else np.zeros((0, r), dtype=np.int64))
        return out, complete


def _irrational_numeric(xs: KSVector, H, cap):
    field = xs.field
    d = field.degree
    m = xs.n
    prec = field.precision_bits
    threshold = 2.0 ** (-(prec // 2))
    comp_count = _enum_count_estimate(field, H)
    candidates = _lll_relation_candidates(xs, H)
    if comp_count**m > cap:
        raise BudgetExceeded("numeric relation scan too large; use exact mode")
    E = field._embed_f64
    Einv = field._inv_embed_f64
    X = xs.as_float64()
    offsets = np.array(list(itertools.product((-1, 0, 1), repeat=d)),
                       dtype=np.int64)
    comp = enumerate_integer_coords(H, field)
    found = None
    for coords in _product_chunks(comp, m, 400_000):
        nz = np.any(coords != 0, axis=1)
        coords = coords[nz]
        if not len(coords):
            continue
        hit_i, hit_v, hit_q0 = kernels.affine_collect_below(
            coords, E, X, Einv, offsets, threshold)
        for i, v, qq0 in zip(hit_i, hit_v, hit_q0):
            qc = tuple(int(c) for c in coords[i])
            key = (float(v), _norm_key(qc))
            if found is None or key < found[0]:
                found = (key, qc, tuple(int(c) for c in qq0))
    if found is not None:
        qc, q0c = _normalize_pair(found[1], found[2])
        q = _q_from_coords(field, np.array(qc), m)
        q0 = field.element(list(q0c))
        return IrrationalityVerdict(True, float(H), "numeric", q0=q0, q=q,
                                    candidates=tuple(candidates),
                                    threshold=threshold)
    return IrrationalityVerdict(False, float(H), "numeric",
                                candidates=tuple(candidates),
                                threshold=threshold)


def _lll_relation_candidates(xs: KSVector, H, count=6):
    """Integer-relation heuristic: LLL on identity columns stacked with
    scaled embedding rows; near-null combinations are relation candidates."""
    field = xs.field
    d = field.degree
    m = xs.n
    N = (m + 1) * d
    C = 2.0 ** (field.precision_bits // 3)
    rows = []
    T = _relation_matrix(xs, None, None)
    for j in range(N):
        row = [1.0 if k == j else 0.0 for k in range(N)]
        row += [C * float(T[sig, j]) for sig in range(d)]
        rows.append(row)
    red = lll_reduce(np.array(rows))
    out = []
    for rrow in red[:count]:
        coeffs = [int(round(v)) for v in rrow[:N]]
        if any(coeffs):
            q0 = field.element(coeffs[:d])
            q = tuple(field.element(coeffs[(i + 1) * d:(i + 2) * d]) for i in range(m))
            out.append((q0, q))
    return out


def _column_reduce(rows):
    """Integer column reduction with unimodular bookkeeping: returns
    (cols, U, pivots) where cols = M U columnwise and non-pivot columns are
    zero in every processed row below their pivots."""
    R = len(rows)
    N = len(rows[0])
    scaled = []
    for row in rows:
        den = 1
        for c in row:
            den = den * Fraction(c).denominator // math.gcd(den, Fraction(c).denominator)
        scaled.append([int(Fraction(c) * den) for c in row])
    cols = [[scaled[r][j] for r in range(R)] for j in range(N)]
    U = [[1 if i == j else 0 for i in range(N)] for j in range(N)]  # U[j] = col j coeffs
    pivots = []
    taken = set()
    for r in range(R):
        active = [j for j in range(N) if j not in taken]
        nz = [j for j in active if cols[j][r] != 0]
        if not nz:
            continue
        j0 = nz[0]
        for j in nz[1:]:
            while cols[j][r] != 0:
                q = cols[j][r] // cols[j0][r]
                if q:
                    cols[j] = [a - q * b for a, b in zip(cols[j], cols[j0])]
                    U[j] = [a - q * b for a, b in zip(U[j], U[j0])]
                if cols[j][r] != 0:
                    cols[j], cols[j0] = cols[j0], cols[j]
                    U[j], U[j0] = U[j0], U[j]
        taken.add(j0)
        pivots.append((r, j0))
    return cols, U, pivots


def integer_kernel(rows):
    """Exact integer kernel of a rational matrix: all z in Z^N with Mz = 0,
    returned as a saturated basis."""
    cols, U, pivots = _column_reduce(rows)
    taken = {j for _, j in pivots}
    kernel = []
    for j in range(len(U)):
        if j in taken:
            continue
        if all(c == 0 for c in cols[j]):
            kernel.append(tuple(U[j]))
    return kernel


def integral_solve(rows, rhs):
    """One integer solution x of M x = rhs plus a kernel basis, or None when
    no integral solution exists.  Exact throughout."""
    R = len(rows)
    cols, U, pivots = _column_reduce(rows)
    # apply the same row scaling _column_reduce used
    target = []
    for row, b in zip(rows, rhs):
        rden = 1
        for c in row:
            q = Fraction(c)
            rden = rden * q.denominator // math.gcd(rden, q.denominator)
        bb = Fraction(b) * rden
        if bb.denominator != 1:
            return None
        target.append(int(bb))
    coeff = [0] * len(U)
    residual = list(target)
    pivot_rows = {r: j for r, j in pivots}
    for r in range(R):
        if r in pivot_rows:
            j0 = pivot_rows[r]
            piv = cols[j0][r]
            if residual[r] % piv != 0:
                return None
            c = residual[r] // piv
            coeff[j0] = c
            if c:
                for rr in range(R):
                    residual[rr] -= c * cols[j0][rr]
        elif residual[r] != 0:
            return None
    if any(residual):
        return None
    N = len(U)
    x = [sum(U[j][k] * coeff[j] for j in range(N)) for k in range(N)]
    taken = {j for _, j in pivots}
    kernel = [tuple(U[j]) for j in range(N)
              if j not in taken and all(c == 0 for c in cols[j])]
    return tuple(x), kernel
