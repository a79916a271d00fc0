"""Exact arithmetic in a totally real number field K and its ring of integers.

Field elements are exact rationals with respect to a fixed integral basis;
floating point enters only at the embedding boundary, where every real
embedding is isolated to a requested bit precision.  Root ordering is
ascending, so sigma_1 < sigma_2 < ... is canonical across runs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import mpmath
import numpy as np
import sympy

GUARD_BITS = 48
DEFAULT_PRECISION = 256


class FieldError(Exception):
    pass


class NotTotallyReal(FieldError):
    pass


class Reducible(FieldError):
    pass


class IntegralBasisRequired(FieldError):
    pass


class PrecisionExhausted(FieldError):
    pass


class BoxTooLarge(FieldError):
    pass


def _poly_eval(coeffs, x):
    """Horner evaluation; works for Fraction, mpf, float inputs."""
    acc = coeffs[-1] * 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _poly_deriv(coeffs):
    return [i * c for i, c in enumerate(coeffs)][1:]


def _sturm_chain(coeffs):
    chain = [list(coeffs), [Fraction(c) for c in _poly_deriv(coeffs)]]
    while chain[-1] and any(chain[-1]):
        a, b = chain[-2], chain[-1]
        r = _poly_mod(a, b)
        if not any(r):
            break
        chain.append([-c for c in r])
    return chain


def _poly_mod(a, b):
    a = [Fraction(c) for c in a]
    db, lb = len(b) - 1, b[-1]
    while len(a) - 1 >= db and any(a):
        da, la = len(a) - 1, a[-1]
        f = la / lb
        for i in range(db + 1):
            a[da - db + i] -= f * b[i]
        while a and a[-1] == 0:
            a.pop()
        if not a:
            return [Fraction(0)]
    return a if a else [Fraction(0)]


def _sign_changes(chain, x):
    signs = []
    for p in chain:
        v = _poly_eval(p, x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _isolate_real_roots(coeffs):
    """Disjoint rational intervals, one per real root (Sturm bisection)."""
    bound = Fraction(1) + max(abs(Fraction(c)) for c in coeffs[:-1])
    chain = _sturm_chain([Fraction(c) for c in coeffs])

    def count(a, b):
        return _sign_changes(chain, a) - _sign_changes(chain, b)

    work = [(-bound, bound)]
    isolated = []
    while work:
        a, b = work.pop()
        n = count(a, b)
        if n == 0:
            continue
        if n == 1:
            isolated.append((a, b))
            continue
        mid = (a + b) / 2
        while _poly_eval(coeffs, mid) == 0:
            # nudge the split point off an exact rational root
            mid = mid + (b - a) / 1024
        work.append((a, mid))
        work.append((mid, b))
    return sorted(isolated)


def _refine_root(coeffs, lo, hi, prec_bits):
    """Bisect to ~40 bits, then Newton at working precision."""
    flo = _poly_eval(coeffs, lo)
    for _ in range(50):
        mid = (lo + hi) / 2
        fm = _poly_eval(coeffs, mid)
        if fm == 0:
            return mpmath.mpf(mid.numerator) / mid.denominator
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    deriv = _poly_deriv(coeffs)
    with mpmath.workprec(prec_bits + GUARD_BITS):
        x = (mpmath.mpf(lo.numerator) / lo.denominator
             + mpmath.mpf(hi.numerator) / hi.denominator) / 2
        for _ in range(200):
            fx = _poly_eval(coeffs, x)
            dx = fx / _poly_eval(deriv, x)
            x = x - dx
            if abs(dx) < mpmath.mpf(2) ** (-(prec_bits + GUARD_BITS // 2)):
                break
        return +x


@dataclass(frozen=True)
class FieldSpec:
    """Minimal polynomial, integral basis (rows = basis elements on the power
    basis), exact discriminant and degree of a totally real field."""

    min_poly: tuple
    degree: int
    integral_basis: tuple
    discriminant: int


@dataclass(frozen=True)
class EmbeddingTable:
    """Real embeddings at working precision; row i of embed_matrix is
    (sigma_i(omega_1), ..., sigma_i(omega_d))."""

    roots: tuple
    embed_matrix: tuple
    precision_bits: int

    def as_array(self):
        return np.array([[float(v) for v in row] for row in self.embed_matrix])


class Field:
    """A totally real number field bundle: exact spec + embeddings + caches."""

    def __init__(self, spec: FieldSpec, table: EmbeddingTable):
        self.spec = spec
        self.table = table
        self.degree = spec.degree
        self.discriminant = spec.discriminant
        self.min_poly = spec.min_poly
        self.precision_bits = table.precision_bits
        self._mult_table = self._build_mult_table()
        E = self.table.as_array()
        self._embed_f64 = E
        self._inv_embed_f64 = np.linalg.inv(E)
        with mpmath.workprec(self.precision_bits + GUARD_BITS):
            M = mpmath.matrix([list(r) for r in self.table.embed_matrix])
            self._embed_mp = M
            self._inv_embed_mp = M**-1
        self._balancing_unit = None
        self._balancing_searched = False

    # -- exact structure ---------------------------------------------------

    def _basis_on_power(self, j):
        return list(self.spec.integral_basis[j])

    def _power_to_basis(self, power_coords):
        """Coordinates on the integral basis of an element given on the power
        basis (inverse of coords -> B^T coords)."""
        return _mat_vec(self._bt_inv, list(power_coords))

    def _build_mult_table(self):
        d = self.degree
        f = [Fraction(c) for c in self.min_poly]
        B = [[Fraction(x) for x in row] for row in self.spec.integral_basis]
        BT = [[B[j][k] for j in range(d)] for k in range(d)]
        self._bt_inv = _fraction_inv(BT)

        def polymulmod(a, b):
            out = [Fraction(0)] * (2 * d)
            for i, ai in enumerate(a):
                if ai:
                    for j, bj in enumerate(b):
                        out[i + j] += ai * bj
            for k in range(2 * d - 1, d - 1, -1):
                c = out[k]
                if c:
                    for i in range(d):
                        out[k - d + i] -= c * f[i]
                    out[k] = Fraction(0)
            return out[:d]

        table = [[None] * d for _ in range(d)]
        for i in range(d):
            for j in range(i, d):
                prod = polymulmod(B[i], B[j])
                coords = self._power_to_basis(prod)
                table[i][j] = tuple(coords)
                table[j][i] = tuple(coords)
        return table

    def element(self, coords) -> "FieldElement":
        coords = tuple(Fraction(c) for c in coords)
        if len(coords) != self.degree:
            raise ValueError("coordinate length != degree")
        return FieldElement(self, coords)

    def zero(self):
        return self.element([0] * self.degree)

    def one(self):
        one_power = [Fraction(1)] + [Fraction(0)] * (self.degree - 1)
        return self.element(self._power_to_basis(one_power))

    def generator(self):
        """theta = root of min_poly, expressed on the integral basis."""
        if self.degree == 1:
            return self.element([-Fraction(self.min_poly[0])])
        power = [Fraction(0)] * self.degree
        power[1] = Fraction(1)
        return self.element(self._power_to_basis(power))

    def from_rational(self, q):
        return self.one() * Fraction(q)

    # -- embeddings --------------------------------------------------------

    def embed_coords(self, coords):
        """Per-place values of sum_j coords[j]*omega_j, as mpf tuple."""
        with mpmath.workprec(self.precision_bits + GUARD_BITS):
            out = []
            for i in range(self.degree):
                s = mpmath.mpf(0)
                for j, c in enumerate(coords):
                    if c:
                        s += _mpf_of_fraction(c) * self.table.embed_matrix[i][j]
                out.append(+s)
            return tuple(out)

    def balancing_unit(self, house_cap=20000.0):
        """Smallest-house unit with |sigma(u)| != 1, used to balance place
        norms in systole certification.  None when the search fails or the
        unit rank is zero."""
        if self._balancing_searched:
            return self._balancing_unit
        self._balancing_searched = True
        if self.degree == 1:
            self._balancing_unit = None
            return None
        H = 2.0
        while H <= house_cap:
            best = None
            for el in enumerate_integers(H, self):
                if el.is_zero():
                    continue
                if abs(el.norm()) != 1:
                    continue
                h = el.house_float()
                if h <= 1.0 + 1e-12:
                    continue
                if best is None or h < best.house_float():
                    best = el
            if best is not None:
                self._balancing_unit = best
                return best
            H *= 4.0
        self._balancing_unit = None
        return None


def _mpf_of_fraction(q):
    return mpmath.mpf(q.numerator) / q.denominator


def _mat_vec(M, v):
    return [sum(M[i][j] * v[j] for j in range(len(v))) for i in range(len(M))]


def _fraction_inv(M):
    """Exact inverse of a square Fraction matrix by Gauss-Jordan."""
    n = len(M)
    A = [row[:] + [Fraction(1) if i == j else Fraction(0) for j in range(n)]
         for i, row in enumerate(M)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        A[col], A[piv] = A[piv], A[col]
        pv = A[col][col]
        A[col] = [x / pv for x in A[col]]
        for r in range(n):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return [row[n:] for row in A]


class FieldElement:
    """Element of K as exact rational coordinates on the integral basis."""

    __slots__ = ("field", "coords", "_house")

    def __init__(self, field: Field, coords):
        self.field = field
        self.coords = coords
        self._house = None

    def __add__(self, other):
        other = self._coerce(other)
        return FieldElement(self.field, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other):
        other = self._coerce(other)
        return FieldElement(self.field, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        return FieldElement(self.field, tuple(-a for a in self.coords))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            q = Fraction(other)
            return FieldElement(self.field, tuple(a * q for a in self.coords))
        other = self._coerce(other)
        d = self.field.degree
        out = [Fraction(0)] * d
        table = self.field._mult_table
        for i, a in enumerate(self.coords):
            if a:
                for j, b in enumerate(other.coords):
                    if b:
                        t = table[i][j]
                        ab = a * b
                        for k in range(d):
                            if t[k]:
                                out[k] += ab * t[k]
        return FieldElement(self.field, tuple(out))

    __rmul__ = __mul__

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.from_rational(other)
        raise TypeError(f"cannot coerce {type(other)}")

    def __eq__(self, other):
        if not isinstance(other, FieldElement):
            try:
                other = self._coerce(other)
            except TypeError:
                return NotImplemented
        return self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    def __repr__(self):
        return f"FieldElement({list(self.coords)})"

    def is_zero(self):
        return all(c == 0 for c in self.coords)

    def is_integral(self):
        return all(c.denominator == 1 for c in self.coords)

    def power_basis_coords(self):
        B = self.field.spec.integral_basis
        d = self.field.degree
        out = [Fraction(0)] * d
        for j, c in enumerate(self.coords):
            if c:
                for k in range(d):
                    out[k] += c * Fraction(B[j][k])
        return out

    def inverse(self) -> "FieldElement":
        """Exact inverse: solves the multiplication-matrix linear system."""
        if self.is_zero():
            raise ZeroDivisionError("field element is zero")
        d = self.field.degree
        table = self.field._mult_table
        # column j of M = coords of self * omega_j
        M = [[Fraction(0)] * d for _ in range(d)]
        for j in range(d):
            for i, a in enumerate(self.coords):
                if a:
                    t = table[i][j]
                    for k in range(d):
                        M[k][j] += a * t[k]
        Minv = _fraction_inv(M)
        one = self.field.one().coords
        return FieldElement(self.field, tuple(_mat_vec(Minv, list(one))))

    def __truediv__(self, other):
        other = self._coerce(other)
        return self * other.inverse()

    def norm(self) -> Fraction:
        """Exact field norm via the resultant Res(min_poly, self)."""
        g = self.power_basis_coords()
        f = [Fraction(c) for c in self.field.min_poly]
        return _resultant_monic(f, g)

    def trace(self) -> Fraction:
        g = self.power_basis_coords()
        d = self.field.degree
        ps = _power_sums(self.field.min_poly, d)
        return sum((g[k] * ps[k] for k in range(d)), Fraction(0))

    def embed(self):
        return self.field.embed_coords(self.coords)

    def house_float(self) -> float:
        if self._house is None:
            self._house = max(abs(float(v)) for v in self.embed())
        return self._house

    def house(self):
        with mpmath.workprec(self.field.precision_bits + GUARD_BITS):
            return max(abs(v) for v in self.embed())


def _resultant_monic(f, g):
    """Res(f, g) = prod over roots t of f of g(t); f monic with Fraction
    coefficients, computed by the subresultant-free Euclidean recursion."""
    f = [Fraction(c) for c in f]
    g = [Fraction(c) for c in g]
    res = Fraction(1)
    while True:
        g = _trim(g)
        if len(g) == 0:
            return Fraction(0)
        if len(g) == 1:
            return res * g[0] ** (len(f) - 1)
        if len(f) == 1:
            return res
        r = _poly_mod(f, g)
        r = _trim(r)
        df, dg, dr = len(f) - 1, len(g) - 1, max(len(r) - 1, 0)
        lg = g[-1]
        sign = Fraction(-1) ** (df * dg)
        if not any(r):
            return Fraction(0)
        res *= sign * lg ** (df - dr)
        f, g = g, r


def _trim(p):
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def _power_sums(min_poly, count):
    """Newton identities: p_k = sum of k-th powers of the roots, k < count."""
    d = len(min_poly) - 1
    e = [Fraction(1)] + [(-1) ** k * Fraction(min_poly[d - k]) for k in range(1, d + 1)]
    ps = [Fraction(d)]
    for k in range(1, count):
        s = Fraction(0)
        for i in range(1, min(k - 1, d) + 1):
            s += (-1) ** (i - 1) * e[i] * ps[k - i]
        if k <= d:
            s += (-1) ** (k - 1) * k * e[k]
        ps.append(s)
    return ps


def create_field(min_poly, precision=DEFAULT_PRECISION, integral_basis=None) -> Field:
    """Build a totally real field from a monic integer polynomial.

    min_poly holds coefficients c_0..c_d with c_d = 1.  When the polynomial
    discriminant is squarefree the integral basis is the power basis;
    otherwise a user basis is required (rows = basis elements on the power
    basis).
    """
    coeffs = [int(c) for c in min_poly]
    if len(coeffs) < 2:
        raise FieldError("degree must be >= 1")
    if coeffs[-1] != 1:
        raise FieldError("polynomial must be monic")
    d = len(coeffs) - 1

    x = sympy.symbols("x")
    poly = sympy.Poly(sum(c * x**i for i, c in enumerate(coeffs)), x, domain="QQ")
    if d > 1 and not poly.is_irreducible:
        raise Reducible(f"{coeffs} factors over the rationals")

    intervals = _isolate_real_roots([Fraction(c) for c in coeffs])
    if len(intervals) != d:
        raise NotTotallyReal(f"found {len(intervals)} real roots, need {d}")

    if integral_basis is None:
        disc_poly = int(sympy.discriminant(poly.as_expr(), x)) if d > 1 else 1
        if d == 1:
            basis = ((Fraction(1),),)
        elif _power_basis_is_maximal(d, disc_poly):
            basis = tuple(tuple(Fraction(1) if i == j else Fraction(0) for i in range(d))
                          for j in range(d))
        else:
            raise IntegralBasisRequired(
                f"cannot certify Z[theta] maximal (disc {disc_poly}); supply a basis")
    else:
        basis = tuple(tuple(Fraction(c) for c in row) for row in integral_basis)
        if len(basis) != d or any(len(r) != d for r in basis):
            raise FieldError("integral basis must be d x d")

    spec = FieldSpec(min_poly=tuple(coeffs), degree=d, integral_basis=basis,
                     discriminant=0)
    disc = _trace_form_det(spec)
    if disc <= 0:
        raise NotTotallyReal("trace form not positive definite")
    spec = FieldSpec(min_poly=tuple(coeffs), degree=d, integral_basis=basis,
                     discriminant=int(disc))

    with mpmath.workprec(precision + GUARD_BITS):
        roots = tuple(_refine_root([Fraction(c) for c in coeffs], lo, hi, precision)
                      for lo, hi in intervals)
        scale = max(mpmath.mpf(1), max(abs(r) for r in roots)) ** d
        for r in roots:
            if abs(_poly_eval(coeffs, r)) > mpmath.mpf(2) ** (-precision // 2) * scale:
                raise PrecisionExhausted("root refinement did not converge")
        embed = []
        for r in roots:
            powers = [mpmath.mpf(1)]
            for _ in range(d - 1):
                powers.append(powers[-1] * r)
            row = []
            for j in range(d):
                row.append(+sum(_mpf_of_fraction(basis[j][k]) * powers[k] for k in range(d)))
            embed.append(tuple(row))
    table = EmbeddingTable(roots=roots, embed_matrix=tuple(embed), precision_bits=precision)
    fld = Field(spec, table)

    # sanity: supplied basis must at least reproduce the index relation
    if integral_basis is not None and d > 1:
        disc_poly = int(sympy.discriminant(poly.as_expr(), x))
        det = _fraction_det([[Fraction(c) for c in row] for row in basis])
        if det == 0:
            raise FieldError("integral basis is singular")
        idx = 1 / abs(det)
        if Fraction(disc_poly) != Fraction(spec.discriminant) * idx**2:
            raise FieldError("basis inconsistent with polynomial discriminant")
    return fld


def _is_squarefree(n):
    n = abs(int(n))
    if n == 0:
        return False
    return all(e == 1 for e in sympy.factorint(n).values())


def _power_basis_is_maximal(d, disc_poly):
    """Monogenic shortcut: squarefree discriminant always suffices; for
    quadratics the index is computed exactly from the fundamental
    discriminant, so e.g. x^2 - 2 (disc 8) passes."""
    if _is_squarefree(disc_poly):
        return True
    if d != 2:
        return False
    square_part = 1
    for p, e in sympy.factorint(abs(disc_poly)).items():
        square_part *= p ** (e // 2)
    d0 = disc_poly // (square_part**2)
    if d0 % 4 == 1:
        index = square_part
    else:
        if square_part % 2 != 0:
            return False
        index = square_part // 2
    return index == 1


def _trace_form_det(spec: FieldSpec):
    d = spec.degree
    ps = _power_sums(spec.min_poly, 2 * d - 1)
    B = spec.integral_basis

    def trace_power_pair(i, j):
        # Tr(omega_i * omega_j) via power-basis expansion and power sums
        f = [Fraction(c) for c in spec.min_poly]
        a = list(B[i])
        b = list(B[j])
        prod = [Fraction(0)] * (2 * d)
        for s, xs in enumerate(a):
            if xs:
                for t, yt in enumerate(b):
                    if yt:
                        prod[s + t] += xs * yt
        for k in range(2 * d - 1, d - 1, -1):
            c = prod[k]
            if c:
                for u in range(d):
                    prod[k - d + u] -= c * f[u]
                prod[k] = Fraction(0)
        return sum((prod[k] * ps[k] for k in range(d)), Fraction(0))

    M = [[trace_power_pair(i, j) for j in range(d)] for i in range(d)]
    det = _fraction_det(M)
    if det.denominator != 1:
        raise FieldError(f"trace form determinant {det} is not an integer")
    return det.numerator


def _fraction_det(M):
    n = len(M)
    A = [row[:] for row in M]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            A[col], A[piv] = A[piv], A[col]
            det = -det
        det *= A[col][col]
        pv = A[col][col]
        for r in range(col + 1, n):
            if A[r][col] != 0:
                f = A[r][col] / pv
                A[r] = [x - f * y for x, y in zip(A[r], A[col])]
    return det


# -- operations on elements ------------------------------------------------

def embed(alpha: FieldElement, field: Field = None):
    """Diagonal embedding tau(alpha) as a tuple of per-place mpf values."""
    fld = field or alpha.field
    vals = fld.embed_coords(alpha.coords)
    if alpha.is_integral():
        with mpmath.workprec(fld.precision_bits + GUARD_BITS):
            prod = mpmath.mpf(1)
            for v in vals:
                prod *= v
            n = alpha.norm()
            if abs(prod - _mpf_of_fraction(n)) > mpmath.mpf(2) ** (-fld.precision_bits // 2) * (1 + abs(prod)):
                raise PrecisionExhausted("embedding does not reproduce the exact norm")
    return vals


def house(alpha: FieldElement):
    """Sup norm over the places, max_i |sigma_i(alpha)|."""
    return alpha.house()


def enumerate_integers(H, field: Field, cap=20_000_000):
    """All a in O_K with house(a) <= H, complete by construction.

    Coordinate bounds come from the inverse embedding matrix; candidates are
    filtered against the embedded sup norm with a guard for points within
    float rounding of the boundary.
    """
    coords = enumerate_integer_coords(H, field, cap=cap)
    return [field.element([int(c) for c in row]) for row in coords]


def enumerate_integer_coords(H, field: Field, cap=20_000_000):
    """Integer coordinate rows (numpy int64) of all elements with house <= H."""
    H = float(H)
    if H < 0:
        raise ValueError("H must be >= 0")
    d = field.degree
    inv = field._inv_embed_f64
    bounds = []
    for j in range(d):
        b = sum(abs(inv[j, k]) for k in range(d)) * H * (1 + 1e-12) + 1e-12
        bounds.append(int(np.floor(b)))
    total = 1
    for b in bounds:
        total *= 2 * b + 1
    if total > cap:
        raise BoxTooLarge(f"{total} candidates exceeds cap {cap}")
    axes = [np.arange(-b, b + 1, dtype=np.int64) for b in bounds]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    emb = grid.astype(np.float64) @ field._embed_f64.T
    keep = np.abs(emb).max(axis=1) <= H * (1 + 1e-12) + 1e-12
    cand = grid[keep]
    emb = emb[keep]
    # exact-ish boundary pass at working precision for near-threshold rows
    near = np.abs(np.abs(emb).max(axis=1) - H) <= H * 1e-9 + 1e-9
    if near.any():
        keep2 = np.ones(len(cand), dtype=bool)
        with mpmath.workprec(field.precision_bits + GUARD_BITS):
            hh = mpmath.mpf(H)
            for idx in np.nonzero(near)[0]:
                vals = field.embed_coords([Fraction(int(c)) for c in cand[idx]])
                keep2[idx] = max(abs(v) for v in vals) <= hh * (1 + mpmath.mpf(2) ** -40)
        cand = cand[keep2]
    order = np.lexsort(cand.T[::-1])
    return cand[order]


# -- field description files -------------------------------------------------

def parse_field_file(path, precision_override=None) -> Field:
    """Read `minpoly = [...]`, optional `basis = ...` (row-major p/q entries)
    and `precision = bits` lines."""
    minpoly = None
    basis = None
    precision = DEFAULT_PRECISION
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, val = line.partition("=")
            key = key.strip().lower()
            val = val.strip()
            if key == "minpoly":
                minpoly = [int(tok) for tok in val.strip("[]").replace(",", " ").split()]
            elif key == "basis":
                entries = [Fraction(tok) for tok in val.strip("[]").replace(",", " ").split()]
                basis = entries
            elif key == "precision":
                precision = int(val)
    if minpoly is None:
        raise FieldError("field file missing minpoly")
    if precision_override:
        precision = precision_override
    d = len(minpoly) - 1
    rows = None
    if basis is not None:
        if len(basis) != d * d:
            raise FieldError("basis must have d*d entries")
        rows = [basis[i * d:(i + 1) * d] for i in range(d)]
    return create_field(minpoly, precision=precision, integral_basis=rows)


def field_report(field: Field) -> dict:
    with mpmath.workprec(field.precision_bits):
        roots = [mpmath.nstr(r, 40) for r in field.table.roots]
    return {
        "degree": field.degree,
        "discriminant": field.discriminant,
        "min_poly": list(field.min_poly),
        "roots": roots,
        "integral_basis": [[str(c) for c in row] for row in field.spec.integral_basis],
        "precision_bits": field.precision_bits,
    }
