"""Constructive generation of totally irrational singular vectors on graph
surfaces: nested dyadic boxes along alternating vertical/horizontal line
families with per-stage certificates.

Stage i picks the smallest-house K-rational line through the current box in
the alternating coordinate, then shrinks the box so the previous stage's
linear form stays below zeta at the new house value; old lines and boxes
are avoided explicitly.  All box bounds are exact dyadic rationals, so the
certificate checks are exact interval statements.

After the final stage, the returned point is pinned just off the last line
at a dyadic depth chosen deep enough that (i) the flow trajectory dips
below the divergence threshold through the diagnostics horizon and (ii) the
exact relation kernel of the point has no vector of house anywhere near the
last stage's, which makes the irrationality verdict rigorous.  This pinning
stands in for the stages the infinite procedure would run next.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import mpmath
import numpy as np

from .diophantine import ExactPoint, totally_irrational_certificate, eta as eta_op
from .enumeration import lattice_points_in_box
from .fields import Field, FieldElement, GUARD_BITS
from .lattices import KSVector


class ConstructError(Exception):
    pass


class StageStuck(ConstructError):
    pass


class VerificationFailure(ConstructError):
    pass


class NotPrimitiveWarning(UserWarning):
    pass


# ---------------------------------------------------------------------------
# surfaces

class PolyK:
    """Bivariate polynomial over K: {(i, j): coefficient} for x1^i x2^j."""

    def __init__(self, field: Field, coeffs):
        self.field = field
        self.coeffs = {tuple(k): (v if isinstance(v, FieldElement)
                                  else field.from_rational(Fraction(v)))
                       for k, v in coeffs.items() if not _is_zero_coeff(v)}

    def eval_exact(self, u1: Fraction, u2: Fraction) -> FieldElement:
        acc = self.field.zero()
        for (i, j), c in self.coeffs.items():
            acc = acc + c * (Fraction(u1) ** i * Fraction(u2) ** j)
        return acc

    def eval_place(self, place, u1, u2):
        with mpmath.workprec(self.field.precision_bits + GUARD_BITS):
            acc = mpmath.mpf(0)
            for (i, j), c in self.coeffs.items():
                acc += c.embed()[place] * mpmath.mpf(u1) ** i * mpmath.mpf(u2) ** j
            return +acc

    def interval_sup(self, place, box):
        """Upper bound of |p| over box = ((lo1, hi1), (lo2, hi2)) by monomial
        interval bounds (coefficients embedded outward by one ulp-guard)."""
        (lo1, hi1), (lo2, hi2) = box
        with mpmath.workprec(self.field.precision_bits + GUARD_BITS):
            total = mpmath.mpf(0)
            for (i, j), c in self.coeffs.items():
                m1 = max(abs(mpmath.mpf(lo1.numerator) / lo1.denominator),
                         abs(mpmath.mpf(hi1.numerator) / hi1.denominator)) ** i
                m2 = max(abs(mpmath.mpf(lo2.numerator) / lo2.denominator),
                         abs(mpmath.mpf(hi2.numerator) / hi2.denominator)) ** j
                total += abs(c.embed()[place]) * m1 * m2
            return +(total * (1 + mpmath.mpf(2) ** -40))


def _is_zero_coeff(v):
    if isinstance(v, FieldElement):
        return v.is_zero()
    return Fraction(v) == 0


@dataclass
class SurfaceSpec:
    """Graph surface in K_S^m: per place, {(u1, u2, f_1(u), ..., f_{m-2}(u))}
    over a closed per-place box in the (x1, x2) plane."""

    field: Field
    m: int
    graph_polys: tuple
    domain_box: tuple  # per place ((lo1,hi1),(lo2,hi2)) of Fractions

    def __post_init__(self):
        if self.m < 3:
            raise ConstructError("ambient dimension must be >= 3")
        if len(self.graph_polys) != self.m - 2:
            raise ConstructError("need m-2 graph polynomials")
        if len(self.domain_box) != self.field.degree:
            raise ConstructError("need one domain box per place")

    def lift_exact(self, u_per_place) -> ExactPoint:
        """Exact surface point from per-place rational (u1, u2)."""
        rows = []
        for sig in range(self.field.degree):
            u1, u2 = u_per_place[sig]
            row = [self.field.from_rational(u1), self.field.from_rational(u2)]
            for p in self.graph_polys:
                row.append(p.eval_exact(u1, u2))
            rows.append(tuple(row))
        return ExactPoint(self.field, rows)


def product_surface(field: Field, m=3, box=None) -> SurfaceSpec:
    """The (x1, x2, x1 x2, [x1^2 x2, ...]) graph over [0,1]^2 per place."""
    if box is None:
        box = ((Fraction(0), Fraction(1)), (Fraction(0), Fraction(1)))
    polys = []
    for s in range(m - 2):
        polys.append(PolyK(field, {(1 + s, 1): 1}))
    return SurfaceSpec(field=field, m=m, graph_polys=tuple(polys),
                       domain_box=tuple(box for _ in range(field.degree)))


# ---------------------------------------------------------------------------
# line families

@dataclass
class LineMember:
    """Affine K-hyperplane x_{k+1} = a/b, conjugated per place."""

    family: str            # "L1" (vertical, x1) or "L2" (horizontal, x2)
    k: int                 # 0-based plane coordinate
    a: FieldElement
    b: FieldElement
    values: tuple          # per-place mpf of sigma(a/b)
    house: object          # mpf house of the canonical denominator

    def hyperplane(self, m):
        """(p, q) with q = b e_{k+1} in O_K^m and p = -a."""
        field = self.a.field
        q = [field.zero()] * m
        q[self.k] = self.b
        return -self.a, tuple(q)

    def alpha(self) -> FieldElement:
        return self.a / self.b


FAMILY_COORD = {"L1": 0, "L2": 1}


def denominator_lattice(alpha: FieldElement):
    """Basis of {x in O_K : x*alpha in O_K} via the exact integer kernel of
    [Mult(alpha) | -I]."""
    from .diophantine import integer_kernel

    field = alpha.field
    d = field.degree
    table = field._mult_table
    M = [[Fraction(0)] * (2 * d) for _ in range(d)]
    for j in range(d):
        for i, a in enumerate(alpha.coords):
            if a:
                t = table[i][j]
                for k in range(d):
                    M[k][j] += a * t[k]
    for k in range(d):
        M[k][d + k] = Fraction(-1)
    kern = integer_kernel(M)
    return [tuple(v[:d]) for v in kern]


def canonical_denominator(alpha: FieldElement, house_hint=None) -> FieldElement:
    """Minimal-house b with b*alpha integral, sign-normalized."""
    field = alpha.field
    basis = denominator_lattice(alpha)
    if not basis:
        raise ConstructError("empty denominator lattice")
    d = field.degree
    E = field._embed_f64
    forms = np.array([[sum(E[sig, l] * float(b[l]) for l in range(d))
                       for b in basis] for sig in range(d)])
    hint = float(house_hint) if house_hint else 4.0
    for _ in range(60):
        pts, complete = lattice_points_in_box(forms, [hint * (1 + 1e-9)] * d,
                                              cap=2_000_000)
        best = None
        for row in pts:
            coords = [0] * d
            for j, c in enumerate(row):
                if c:
                    for l in range(d):
                        coords[l] += int(c) * basis[j][l]
            el = field.element(coords)
            if el.is_zero():
                continue
            if not (el * alpha).is_integral() or not el.is_integral():
                continue
            h = float(el.house())
            key = (h, _sign_norm(tuple(coords)))
            if best is None or key < best[0]:
                best = (key, el)
        if best is not None:
            coords = _sign_norm(tuple(int(c) for c in best[1].coords))
            return field.element(coords)
        hint *= 4
    raise ConstructError("denominator search failed")


def _sign_norm(coords):
    for c in coords:
        if c != 0:
            return coords if c > 0 else tuple(-x for x in coords)
    return coords


def line_family(surface: SurfaceSpec, family: str, rational,
                house_hint=None) -> LineMember:
    """Hyperplane data for the family member at a K-rational value.

    `rational` is a field element or an (a, b) pair; non-primitive pairs are
    normalized to the canonical minimal-house denominator with a warning.
    """
    field = surface.field
    if isinstance(rational, tuple):
        a_in, b_in = rational
        alpha = a_in / b_in
    else:
        alpha = rational
        a_in = b_in = None
    b = canonical_denominator(alpha, house_hint=house_hint or
                              (b_in.house_float() if b_in is not None else None))
    a = alpha * b
    if b_in is not None and float(b.house()) < b_in.house_float() * (1 - 1e-9):
        warnings.warn("line datum (a, b) was not primitive; normalized",
                      NotPrimitiveWarning)
    with mpmath.workprec(field.precision_bits + GUARD_BITS):
        be = b.embed()
        ae = a.embed()
        values = tuple(+(ae[s] / be[s]) for s in range(field.degree))
    return LineMember(family=family, k=FAMILY_COORD[family], a=a, b=b,
                      values=values, house=b.house())


def find_line_members(field: Field, ranges, phi_min=0.0, exclude=(),
                      house_cap=1e15, max_members=12, start_house=None,
                      ref_line: "LineMember" = None, min_members=1):
    """Smallest-house K-rationals whose conjugates land in the open per-place
    ranges; complete per house shell via box enumeration of the (a, b)
    lattice.  Returns LineMember-ready (a, b, values) tuples sorted by
    (house, distance-to-center, lex).

    When the ranges sit in a narrow band beside a known line (the typical
    late-stage situation), the search is parametrized by the residual
    r = a q_ref - b p_ref instead, which excludes the multiples of the
    reference rational structurally and terminates with a rigorous
    minimality bound."""
    if ref_line is not None and field.degree <= 2:
        got = _find_members_residual(field, ranges, phi_min, exclude,
                                     house_cap, max_members, ref_line)
        if got is not None:
            return got
    d = field.degree
    E = field._embed_f64
    mids = [float((lo + hi) / 2) for lo, hi in ranges]
    half = [float((hi - lo) / 2) for lo, hi in ranges]
    if min(half) <= 0:
        raise StageStuck("empty range")
    h = max(float(phi_min) * 1.0000001, 1.0)
    if start_house:
        h = max(h, float(start_house))
    found = []
    seen_alpha = {tuple(e.coords) for e in exclude}
    with mpmath.workprec(field.precision_bits + GUARD_BITS):
        lo_mp = [mpmath.mpf(r[0].numerator) / r[0].denominator for r in ranges]
        hi_mp = [mpmath.mpf(r[1].numerator) / r[1].denominator for r in ranges]
        lo_f = np.array([float(v) for v in lo_mp])
        hi_f = np.array([float(v) for v in hi_mp])
        while h <= house_cap:
            rows = []
            radii = []
            for sig in range(d):
                rows.append([E[sig, l] for l in range(d)] +
                            [-mids[sig] * E[sig, l] for l in range(d)])
                radii.append(half[sig] * h * (1 + 1e-9))
            for sig in range(d):
                rows.append([0.0] * d + [E[sig, l] for l in range(d)])
                radii.append(h * (1 + 1e-9))
            pts, complete = lattice_points_in_box(
                np.array(rows), radii, cap=4_000_000)
            if not complete:
                raise StageStuck("line search budget exceeded")
            cand_rows = np.zeros((0, 2 * d), dtype=np.int64)
            rep_houses = np.zeros(0)
            if len(pts):
                arr = pts.astype(np.float64)
                Aemb = arr[:, :d] @ E.T
                Bemb = arr[:, d:] @ E.T
                nz = np.abs(Bemb).min(axis=1) > 0
                with np.errstate(divide="ignore", invalid="ignore"):
                    vals_f = np.where(nz[:, None], Aemb / np.where(Bemb == 0, 1, Bemb), np.inf)
                inside = nz & np.all(
                    (vals_f > lo_f * (1 - 1e-12) - 1e-12) &
                    (vals_f < hi_f * (1 + 1e-12) + 1e-12), axis=1)
                cand_rows = pts[inside]
                rep_houses = np.abs(Bemb[inside]).max(axis=1)
                order = np.argsort(rep_houses, kind="stable")
                cand_rows = cand_rows[order]
                rep_houses = rep_houses[order]
            guard = mpmath.mpf(2) ** (-(field.precision_bits // 2))
            # sorted by representative house, the first occurrence of each
            # rational is its canonical minimal-house denominator, so no
            # per-candidate canonicalization is needed
            for row, rh in zip(cand_rows, rep_houses):
                if len(found) >= max_members and rh > found[max_members - 1][0] * (1 + 1e-9):
                    break
                a = field.element([int(c) for c in row[:d]])
                b = field.element([int(c) for c in row[d:]])
                alpha = a / b
                akey = tuple(alpha.coords)
                if akey in seen_alpha:
                    continue
                seen_alpha.add(akey)
                if rh <= float(phi_min) * (1 + 2.0**-30):
                    continue
                ae, be = a.embed(), b.embed()
                vals = [ae[s] / be[s] for s in range(d)]
                if not all(lo_mp[s] + guard < vals[s] < hi_mp[s] - guard
                           for s in range(d)):
                    continue
                sgn = 1
                for c in b.coords:
                    if c != 0:
                        sgn = 1 if c > 0 else -1
                        break
                ac, bc = alpha * (b * sgn), b * sgn
                dist = max(abs(float(vals[s]) - mids[s]) for s in range(d))
                found.append((float(bc.house()), dist,
                              (ac, bc, tuple(+v for v in vals)),
                              tuple(ac.coords) + tuple(bc.coords)))
                found.sort(key=lambda f: (f[0], f[1], f[3]))
            admissible = [f for f in found if f[0] <= h * (1 + 1e-9)]
            if len(admissible) >= min_members:
                return [f[2] for f in admissible[:max_members]]
            h *= 2
    raise StageStuck(f"no admissible line below house {house_cap}")


def _find_members_residual(field, ranges, phi_min, exclude, house_cap,
                           max_members, ref_line):
    """Minimal-house lines in ranges beside ref_line via the residual
    r = a q_ref - b p_ref (nonzero for every line other than the reference).

    For fixed r, sigma(b) = sigma(r) / (sigma(q_ref) dist_sigma) confines b
    to a signed per-place band enumerated as an affine coset; unscanned
    residuals of house > Hr can only produce houses above Hr * min_f, which
    terminates the shell loop rigorously."""
    from .diophantine import integral_solve
    from .fields import enumerate_integer_coords

    d = field.degree
    q_ref, p_ref = ref_line.b, ref_line.a
    with mpmath.workprec(field.precision_bits + GUARD_BITS):
        qe = q_ref.embed()
        vref = ref_line.values
        lo_mp = [mpmath.mpf(r[0].numerator) / r[0].denominator for r in ranges]
        hi_mp = [mpmath.mpf(r[1].numerator) / r[1].denominator for r in ranges]
        dist = []
        for sig in range(d):
            dl, dh = lo_mp[sig] - vref[sig], hi_mp[sig] - vref[sig]
            if dl <= 0 <= dh:
                return None  # reference line inside the range: use legacy path
            dist.append((dl, dh))
        dmax = [max(abs(a), abs(b)) for a, b in dist]
        min_f = min(1 / (abs(qe[sig]) * dmax[sig]) for sig in range(d))
        mids = [float((lo + hi) / 2) for lo, hi in ranges]
        guard = mpmath.mpf(2) ** (-(field.precision_bits // 2))

        # homogeneous + particular solutions of q_ref a - p_ref b = r are
        # solved per residual; build the d x 2d coefficient matrix once
        table = field._mult_table
        M = [[Fraction(0)] * (2 * d) for _ in range(d)]
        for j in range(d):
            for i, c in enumerate(q_ref.coords):
                if c:
                    t = table[i][j]
                    for k in range(d):
                        M[k][j] += c * t[k]
            for i, c in enumerate(p_ref.coords):
                if c:
                    t = table[i][j]
                    for k in range(d):
                        M[k][d + j] -= c * t[k]

        found = []
        seen_alpha = {tuple(e.coords) for e in exclude}
        processed = set()
        Hr = 2.0
        qe_f = [abs(float(qe[sig])) for sig in range(d)]
        dmax_f = [float(v) for v in dmax]
        E = field._embed_f64
        while Hr <= 1e12:
            coords = enumerate_integer_coords(Hr, field)
            emb = coords.astype(np.float64) @ E.T
            order = np.argsort(np.abs(emb).max(axis=1), kind="stable")
            for idx in order:
                rc = tuple(int(c) for c in coords[idx])
                if all(c == 0 for c in rc) or rc in processed:
                    continue
                processed.add(rc)
                re_ = emb[idx]
                # cheap lower bound on any house this residual can produce
                lb = max(abs(re_[sig]) / (qe_f[sig] * dmax_f[sig])
                         for sig in range(d))
                if found and lb >= found[0][0] * (1 + 1e-12):
                    continue
                sol = integral_solve(M, [Fraction(c) for c in rc])
                if sol is None:
                    continue
                part, kern = sol
                cands = _residual_band_candidates(field, part, kern, rc, qe, dist)
                for acoords, bcoords in cands:
                    a = field.element(acoords)
                    b = field.element(bcoords)
                    alpha = a / b
                    akey = tuple(alpha.coords)
                    if akey in seen_alpha:
                        continue
                    seen_alpha.add(akey)
                    hb = float(b.house())
                    if hb <= float(phi_min) * (1 + 2.0**-30):
                        continue
                    ae, be = a.embed(), b.embed()
                    vals = [ae[s] / be[s] for s in range(d)]
                    if not all(lo_mp[s] + guard < vals[s] < hi_mp[s] - guard
                               for s in range(d)):
                        continue
                    sgn = 1
                    for c in b.coords:
                        if c != 0:
                            sgn = 1 if c > 0 else -1
                            break
                    ac, bc = alpha * (b * sgn), b * sgn
                    dd = max(abs(float(vals[s]) - mids[s]) for s in range(d))
                    found.append((hb, dd, (ac, bc, tuple(+v for v in vals)),
                                  tuple(ac.coords) + tuple(bc.coords)))
                    found.sort(key=lambda f: (f[0], f[1], f[3]))
            # termination: any unscanned residual forces house >= Hr * min_f,
            # so the current best is provably the minimum
            if found and Hr * float(min_f) > found[0][0] * (1 + 1e-9):
                return [f[2] for f in found[:max_members]]
            Hr *= 2
        raise StageStuck("residual search exceeded house cap")


def _residual_band_candidates(field, part, kern, rc, qe, dist, max_per_r=8):
    """Minimal-house coset points in the per-place band for one residual;
    the first nonempty growth shell provably contains the band minimum."""
    d = field.degree
    E = field._embed_f64
    bands = []
    with mpmath.workprec(field.precision_bits + GUARD_BITS):
        r_el = field.element(list(rc))
        re_mp = r_el.embed()
        for sig in range(d):
            e1 = re_mp[sig] / (qe[sig] * dist[sig][0])
            e2 = re_mp[sig] / (qe[sig] * dist[sig][1])
            lo, hi = (e1, e2) if e1 <= e2 else (e2, e1)
            bands.append((float(lo), float(hi)))
    lmax = max(min(abs(lo), abs(hi)) for lo, hi in bands)
    hcap = max(max(abs(lo), abs(hi)) for lo, hi in bands)
    # kernel columns: embedding of the b-part
    kb = np.array([[sum(E[sig, l] * float(k[d + l]) for l in range(d))
                    for k in kern] for sig in range(d)])
    b0 = np.array([sum(E[sig, l] * float(part[d + l]) for l in range(d))
                   for sig in range(d)])
    out = []
    # multiplicative shells on the house: the minimum sits just above the
    # band edge, so grow h = lmax(1+delta) geometrically in delta
    delta = 1e-9
    while delta < 4.0:
        h = lmax * (1 + delta)
        centers, radii = [], []
        degen = False
        for sig in range(d):
            lo, hi = bands[sig]
            lo2, hi2 = max(lo, -h), min(hi, h)
            if lo2 >= hi2:
                degen = True
                break
            centers.append((lo2 + hi2) / 2)
            radii.append((hi2 - lo2) / 2 * (1 + 1e-12) + 1e-300)
        if degen:
            delta *= 8
            continue
        pts, complete = lattice_points_in_box(
            kb, radii, cap=150_000, include_zero=True,
            offset=b0 - np.array(centers))
        if not complete:
            delta /= 64
            if delta < 1e-13:
                raise StageStuck("residual band shell cap exhausted")
            continue
        for row in pts:
            acoords = [part[l] + sum(int(row[j]) * kern[j][l]
                                     for j in range(len(kern)))
                       for l in range(d)]
            bcoords = [part[d + l] + sum(int(row[j]) * kern[j][d + l]
                                         for j in range(len(kern)))
                       for l in range(d)]
            if all(c == 0 for c in bcoords):
                continue
            out.append((acoords, bcoords))
        if out:
            break
        if h >= hcap:
            break
        delta *= 8
    uniq = {}
    for a_, b_ in out:
        uniq[tuple(a_) + tuple(b_)] = (a_, b_)
    res = sorted(uniq.values(),
                 key=lambda ab: max(abs(sum(E[s, l] * ab[1][l] for l in range(d)))
                                    for s in range(d)))
    return res[:max_per_r]


# ---------------------------------------------------------------------------
# zeta schedules

def zeta_from_descriptor(desc):
    """Parse 'inv_pow:k' -> t^-k and 'exp_over_pow:nu' -> e^-t / t^nu
    (the decaying form; a nonincreasing zeta is required)."""
    kind, _, arg = desc.partition(":")
    if kind == "inv_pow":
        k = float(arg or 2)
        return desc, lambda t: mpmath.mpf(t) ** (-k)
    if kind == "exp_over_pow":
        nu = float(arg or 1)
        return desc, lambda t: mpmath.e ** (-mpmath.mpf(t)) / mpmath.mpf(t) ** nu
    raise ConstructError(f"unknown zeta descriptor {desc!r}")


# ---------------------------------------------------------------------------
# dyadic helpers

def _dyadic(x, depth):
    """Nearest Fraction n / 2^depth to the mp float x."""
    scaled = mpmath.nint(mpmath.mpf(x) * mpmath.mpf(2) ** depth)
    return Fraction(int(scaled), 2**depth)


def _dyadic_le(x, depth):
    scaled = mpmath.floor(mpmath.mpf(x) * mpmath.mpf(2) ** depth)
    return Fraction(int(scaled), 2**depth)


def _frac_mp(q: Fraction):
    return mpmath.mpf(q.numerator) / q.denominator


# ---------------------------------------------------------------------------
# certificates

@dataclass
class StageCertificate:
    index: int
    family: str
    p: FieldElement
    q: tuple
    phi_value: float
    line_values: tuple
    box: tuple            # per place ((lo,hi),(lo,hi)) Fractions
    checks: dict


@dataclass
class ConstructionOutput:
    surface: SurfaceSpec
    field: Field
    zeta_desc: str
    phi_desc: str
    certificates: list
    lines: list
    final_box: tuple
    point_exact: ExactPoint
    point: KSVector
    pin_values: dict
    variant: int

    def stage_houses(self):
        return [c.phi_value for c in self.certificates]


def construct_singular(surface: SurfaceSpec, zeta="inv_pow:2", phi="house",
                       stages=5, shrink=Fraction(1, 4), variant=0,
                       house_cap=1e15, pin_horizon=15.0,
                       eps_target=0.1) -> ConstructionOutput:
    """Run the nested-box stage procedure and return the pinned point with
    its certificates.  Families alternate starting with the horizontal
    family (x2-lines); stage rationals are the smallest admissible house."""
    if phi != "house":
        raise ConstructError("only Phi = house is supported")
    field = surface.field
    d = field.degree
    if isinstance(zeta, str):
        zeta_desc, zfun = zeta_from_descriptor(zeta)
    else:
        zeta_desc, zfun = zeta
    shrink = Fraction(shrink)
    if not 0 < shrink <= Fraction(1, 2):
        raise ConstructError("shrink must be in (0, 1/2]")
    probes = [1.0, 2.0, 5.0, 17.0, 130.0, 4096.0]
    zvals = [zfun(mpmath.mpf(t)) for t in probes]
    if any(b > a for a, b in zip(zvals, zvals[1:])) or any(v <= 0 for v in zvals):
        raise ConstructError("zeta must be positive and nonincreasing")

    boxes = [tuple(surface.domain_box)]
    lines: list[LineMember] = []
    certs: list[StageCertificate] = []
    phi_prev = 0.0

    for i in range(1, stages + 1):
        fam = "L2" if i % 2 == 1 else "L1"
        k_new = FAMILY_COORD[fam]
        parent = boxes[-1]
        ranges = []
        for sig in range(d):
            lo, hi = parent[sig][k_new]
            c = (lo + hi) / 2
            hw = (hi - lo) / 2
            ranges.append((c - hw * Fraction(9, 10), c + hw * Fraction(9, 10)))
        members = find_line_members(
            field, ranges, phi_min=phi_prev,
            exclude=[ln.alpha() for ln in lines if ln.k == k_new],
            house_cap=house_cap,
            max_members=max(6, variant + 2) if i == 1 else 6,
            min_members=variant + 1 if i == 1 else 1,
            ref_line=lines[i - 3] if i >= 3 else None)
        pick = variant % len(members) if i == 1 else 0
        ac, bc, vals = members[pick]
        line = LineMember(family=fam, k=k_new, a=ac, b=bc, values=vals,
                          house=bc.house())
        phi_i = float(line.house)
        z_i = zfun(line.house)
        box_i, checks = _shrink_box(surface, parent, lines, line,
                                    lines[-1] if lines else None,
                                    z_i, shrink)
        checks["b"] = {"ok": phi_i > phi_prev, "phi": phi_i, "phi_prev": phi_prev}
        if not checks["b"]["ok"]:
            raise StageStuck(f"house did not grow at stage {i}")
        p, q = line.hyperplane(surface.m)
        certs.append(StageCertificate(
            index=i, family=fam, p=p, q=q, phi_value=phi_i,
            line_values=tuple(float(v) for v in line.values),
            box=box_i, checks=checks))
        lines.append(line)
        boxes.append(box_i)
        phi_prev = phi_i

    final_box, point_exact, pin_values = _pin_final_point(
        surface, boxes[-1], lines, certs, zfun, pin_horizon, eps_target)
    return ConstructionOutput(
        surface=surface, field=field, zeta_desc=zeta_desc, phi_desc=phi,
        certificates=certs, lines=lines, final_box=final_box,
        point_exact=point_exact, point=point_exact.to_ks(),
        pin_values=pin_values, variant=variant)


def _shrink_box(surface, parent, old_lines, line, prev_line, zeta_i, shrink):
    """Child box: new-line coordinate recentred on the line, previous-line
    coordinate offset beside the previous line tight enough for (e)."""
    field = surface.field
    d = field.degree
    k_new = line.k
    k_prev = 1 - k_new
    checks = {}

    new_ranges = [None] * d
    hw_new = []
    for sig in range(d):
        lo, hi = parent[sig][k_new]
        hw = (hi - lo) * Fraction(shrink) / 2
        hw_new.append(hw)
    for attempt in range(80):
        ok = True
        for sig in range(d):
            hw = hw_new[sig]
            depth = max(8, 3 - _floor_log2(hw) + 4)
            c = _dyadic(line.values[sig], depth)
            lo_p, hi_p = parent[sig][k_new]
            c = min(max(c, lo_p + hw * 2), hi_p - hw * 2)
            new_ranges[sig] = (c - hw, c + hw)
            if not (_frac_mp(c - hw) < line.values[sig] < _frac_mp(c + hw)):
                ok = False
        if ok and _ranges_avoid(field, new_ranges, k_new, old_lines):
            break
        hw_new = [h / 2 for h in hw_new]
    else:
        raise StageStuck("could not avoid old lines in the new coordinate")

    prev_ranges = [None] * d
    e_check = {"vacuous": True}
    if prev_line is None:
        for sig in range(d):
            lo, hi = parent[sig][k_prev]
            c = (lo + hi) / 2
            hw = (hi - lo) * Fraction(shrink) / 2
            prev_ranges[sig] = (c - hw, c + hw)
        if not _ranges_avoid(field, prev_ranges, k_prev, old_lines):
            raise StageStuck("stage-1 box intersects an existing line")
    else:
        bound_parts = []
        with mpmath.workprec(field.precision_bits + GUARD_BITS):
            be = prev_line.b.embed()
            for sig in range(d):
                target = zeta_i * mpmath.mpf(9) / 10 / (4 * abs(be[sig]))
                if target < mpmath.mpf(2) ** (-(field.precision_bits - 60)):
                    raise StageStuck(
                        "zeta is below the field's working precision; "
                        "recreate the field with more bits for this schedule")
                hw = _pow2_below(target)
                lo_p, hi_p = parent[sig][k_prev]
                v = prev_line.values[sig]
                up = _frac_mp(hi_p) - v > v - _frac_mp(lo_p)
                for attempt in range(300):
                    off = 2 * hw
                    c = (_dyadic(v, _depth_of(hw) + 4)
                         + (off if up else -off))
                    cand = (c - hw, c + hw)
                    inside = lo_p < cand[0] and cand[1] < hi_p
                    line_out = not (_frac_mp(cand[0]) <= v <= _frac_mp(cand[1]))
                    sup = abs(be[sig]) * max(abs(_frac_mp(cand[0]) - v),
                                             abs(_frac_mp(cand[1]) - v))
                    if inside and line_out and sup < zeta_i * mpmath.mpf(95) / 100:
                        prev_ranges[sig] = cand
                        bound_parts.append(sup)
                        break
                    hw = hw / 2
                else:
                    raise StageStuck("(e)-shrink failed")
        for attempt in range(80):
            if _ranges_avoid(field, prev_ranges, k_prev, old_lines,
                             skip=prev_line):
                break
            prev_ranges = [((3 * lo + hi) / 4, (lo + 3 * hi) / 4)
                           for lo, hi in prev_ranges]
        else:
            raise StageStuck("could not avoid old lines in the (e) coordinate")
        with mpmath.workprec(field.precision_bits + GUARD_BITS):
            be = prev_line.b.embed()
            sup = mpmath.mpf(0)
            for sig in range(d):
                v = prev_line.values[sig]
                lo, hi = prev_ranges[sig]
                sup = max(sup, abs(be[sig]) * max(abs(_frac_mp(lo) - v),
                                                  abs(_frac_mp(hi) - v)))
            e_check = {"vacuous": False, "bound": float(sup),
                       "zeta": float(zeta_i),
                       "ok": sup < zeta_i,
                       "margin": float(1 - sup / zeta_i)}
            if not e_check["ok"]:
                raise StageStuck("(e) bound not met after avoidance shrink")

    child = []
    for sig in range(d):
        pair = [None, None]
        pair[k_new] = new_ranges[sig]
        pair[k_prev] = prev_ranges[sig]
        child.append(tuple(pair))
    child = tuple(child)

    a_margin = _containment_margin(parent, child)
    checks["a"] = {"ok": a_margin > 0, "margin": float(a_margin)}
    if a_margin <= 0:
        raise StageStuck("child box not strictly inside parent")
    d_margin = min(
        min(float(line.values[sig] - _frac_mp(child[sig][k_new][0])),
            float(_frac_mp(child[sig][k_new][1]) - line.values[sig]))
        for sig in range(field.degree))
    checks["d"] = {"ok": d_margin > 0, "margin": d_margin}
    checks["c"] = _avoidance_margins(field, child, old_lines)
    checks["e"] = e_check
    return child, checks


def _depth_of(hw: Fraction):
    return max(1, hw.denominator.bit_length() - 1)


def _floor_log2(q: Fraction):
    return q.numerator.bit_length() - q.denominator.bit_length()


def _pow2_below(x):
    """Largest power of two <= x as a Fraction (x an mp float)."""
    e = int(mpmath.floor(mpmath.log(x, 2)))
    val = Fraction(1)
    if e >= 0:
        val = Fraction(2**e)
    else:
        val = Fraction(1, 2**(-e))
    while _frac_mp(val) > x:
        val /= 2
    return val


def _ranges_avoid(field, ranges, k, old_lines, skip=None):
    for ln in old_lines:
        if ln is skip or ln.k != k:
            continue
        inside_everywhere = True
        for sig in range(field.degree):
            lo, hi = ranges[sig]
            v = ln.values[sig]
            if not (_frac_mp(lo) <= v <= _frac_mp(hi)):
                inside_everywhere = False
                break
        if inside_everywhere:
            return False
    return True


def _avoidance_margins(field, box, old_lines):
    margins = []
    for ln in old_lines:
        best = None
        for sig in range(field.degree):
            lo, hi = box[sig][ln.k]
            v = ln.values[sig]
            if v < _frac_mp(lo):
                gap = float(_frac_mp(lo) - v)
            elif v > _frac_mp(hi):
                gap = float(v - _frac_mp(hi))
            else:
                gap = -float(min(v - _frac_mp(lo), _frac_mp(hi) - v))
            best = gap if best is None else max(best, gap)
        margins.append(best)
    return {"ok": all(m > 0 for m in margins) if margins else True,
            "margins": margins}


def _containment_margin(parent, child):
    worst = None
    for pp, cc in zip(parent, child):
        for (plo, phi_), (clo, chi) in zip(pp, cc):
            m = min(clo - plo, phi_ - chi)
            worst = m if worst is None else min(worst, m)
    return worst


def _pin_final_point(surface, box, lines, certs, zfun, pin_horizon, eps_target):
    """Dyadic point just off the last line, deep enough for the diagnostics
    window and for a comfortable relation-kernel margin."""
    field = surface.field
    d = field.degree
    m = surface.m
    last = lines[-1]
    k_last = last.k
    k_other = 1 - k_last
    phi_n = float(last.house)
    with mpmath.workprec(field.precision_bits + GUARD_BITS):
        be = last.b.embed()
        target = min(zfun(last.house) * mpmath.mpf(45) / 100,
                     mpmath.mpf(eps_target) / 1000
                     * mpmath.e ** (-(m + 1) * mpmath.mpf(pin_horizon)))
        depth_extra = 64
        for round_ in range(8):
            u = [[None, None] for _ in range(d)]
            for sig in range(d):
                off_bound = target / abs(be[sig])
                e = int(mpmath.floor(mpmath.log(off_bound, 2))) - 1 - round_
                depth = max(_depth_of_box(box, sig, k_last), -e) + depth_extra
                cv = _dyadic(last.values[sig], depth)
                step = Fraction(1, 2**depth)
                lo, hi = box[sig][k_last]
                cand = cv + step * (2**(depth + e) | 1)
                if not (lo < cand < hi):
                    cand = cv - step * (2**(depth + e) | 1)
                u[sig][k_last] = cand
                lo2, hi2 = box[sig][k_other]
                mid = (lo2 + hi2) / 2
                depth2 = _depth_of(hi2 - lo2) + depth_extra
                u[sig][k_other] = mid + Fraction(1, 2**depth2) * (1 + 2 * sig)
            ok = True
            for sig in range(d):
                for kk in (0, 1):
                    lo, hi = box[sig][kk]
                    if not (lo < u[sig][kk] < hi):
                        ok = False
            for ln in lines:
                for sig in range(d):
                    diff = ln.alpha() - field.from_rational(u[sig][ln.k])
                    if diff.is_zero():
                        ok = False
            if ok:
                pt = surface.lift_exact([tuple(row) for row in u])
                ver = totally_irrational_certificate(pt, phi_n * 64)
                if not ver.relation_found:
                    with mpmath.workprec(field.precision_bits + GUARD_BITS):
                        vals = []
                        for sig in range(d):
                            vals.append(abs(be[sig]) *
                                        abs(_frac_mp(u[sig][k_last]) - last.values[sig]))
                        pin_sup = max(vals)
                    final = tuple(
                        ((u[sig][0], u[sig][0]), (u[sig][1], u[sig][1]))
                        for sig in range(d))
                    return (final, pt,
                            {"pin_sup": float(pin_sup), "target": float(target),
                             "kernel_margin_house": phi_n * 64})
            depth_extra += 48
        raise StageStuck("final pinning failed")


def _depth_of_box(box, sig, k):
    lo, hi = box[sig][k]
    return max(_depth_of(Fraction(lo)), _depth_of(Fraction(hi)))


# ---------------------------------------------------------------------------
# certificate files

def _frac_str(q: Fraction):
    return f"{q.numerator}/{q.denominator}"


def _el_strs(el: FieldElement):
    return [_frac_str(c) for c in el.coords]


def _box_strs(box):
    return [[[_frac_str(lo), _frac_str(hi)] for lo, hi in place] for place in box]


def construction_to_json(out: ConstructionOutput) -> dict:
    field = out.field
    surface = out.surface
    return {
        "field": {
            "minpoly": list(field.min_poly),
            "basis": [[_frac_str(Fraction(c)) for c in row]
                      for row in field.spec.integral_basis],
            "precision": field.precision_bits,
        },
        "surface": {
            "m": surface.m,
            "graph_polys": [
                {f"{i},{j}": _el_strs(c) for (i, j), c in p.coeffs.items()}
                for p in surface.graph_polys
            ],
            "domain_box": _box_strs(surface.domain_box),
        },
        "zeta": out.zeta_desc,
        "phi": out.phi_desc,
        "variant": out.variant,
        "stages": [
            {
                "index": c.index,
                "family": c.family,
                "p": _el_strs(c.p),
                "q": [_el_strs(qi) for qi in c.q],
                "phi_value": c.phi_value,
                "line_values": list(c.line_values),
                "box": _box_strs(c.box),
                "checks": _jsonable(c.checks),
            }
            for c in out.certificates
        ],
        "lines": [
            {"family": ln.family, "k": ln.k, "a": _el_strs(ln.a),
             "b": _el_strs(ln.b)}
            for ln in out.lines
        ],
        "point": {
            "u": [[_frac_str(out.final_box[sig][k][0]) for k in (0, 1)]
                  for sig in range(field.degree)],
        },
        "pin": _jsonable(out.pin_values),
    }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, int, str)) or obj is None:
        return obj
    return float(obj)


def construction_from_json(data: dict) -> ConstructionOutput:
    from .fields import create_field

    fd = data["field"]
    basis = [[Fraction(c) for c in row] for row in fd["basis"]]
    field = create_field(fd["minpoly"], precision=fd["precision"],
                         integral_basis=basis)
    sd = data["surface"]
    polys = []
    for pdata in sd["graph_polys"]:
        coeffs = {}
        for key, cs in pdata.items():
            i, j = (int(v) for v in key.split(","))
            coeffs[(i, j)] = field.element([Fraction(c) for c in cs])
        polys.append(PolyK(field, coeffs))
    box = tuple(tuple((Fraction(lo), Fraction(hi)) for lo, hi in place)
                for place in sd["domain_box"])
    surface = SurfaceSpec(field=field, m=sd["m"], graph_polys=tuple(polys),
                          domain_box=box)
    lines = []
    for ld in data["lines"]:
        a = field.element([Fraction(c) for c in ld["a"]])
        b = field.element([Fraction(c) for c in ld["b"]])
        with mpmath.workprec(field.precision_bits + GUARD_BITS):
            ae, be = a.embed(), b.embed()
            values = tuple(+(ae[s] / be[s]) for s in range(field.degree))
        lines.append(LineMember(family=ld["family"], k=ld["k"], a=a, b=b,
                                values=values, house=b.house()))
    certs = []
    for cd in data["stages"]:
        p = field.element([Fraction(c) for c in cd["p"]])
        q = tuple(field.element([Fraction(c) for c in qi]) for qi in cd["q"])
        cbox = tuple(tuple((Fraction(lo), Fraction(hi)) for lo, hi in place)
                     for place in cd["box"])
        certs.append(StageCertificate(
            index=cd["index"], family=cd["family"], p=p, q=q,
            phi_value=cd["phi_value"], line_values=tuple(cd["line_values"]),
            box=cbox, checks=cd["checks"]))
    u = [tuple(Fraction(c) for c in row) for row in data["point"]["u"]]
    point_exact = surface.lift_exact(u)
    final = tuple(((u[sig][0], u[sig][0]), (u[sig][1], u[sig][1]))
                  for sig in range(field.degree))
    return ConstructionOutput(
        surface=surface, field=field, zeta_desc=data["zeta"],
        phi_desc=data["phi"], certificates=certs, lines=lines,
        final_box=final, point_exact=point_exact, point=point_exact.to_ks(),
        pin_values=data.get("pin", {}), variant=data.get("variant", 0))


# ---------------------------------------------------------------------------
# verification

def verify_certificate(output: ConstructionOutput, sample_density=16,
                       eta_check=False, eta_cap=40_000_000) -> dict:
    """Independent re-check of the full certificate chain on the output.

    Raises VerificationFailure at the first violated inequality; returns a
    report dict of margins otherwise.
    """
    surface = output.surface
    field = output.field
    d = field.degree
    _, zfun = zeta_from_descriptor(output.zeta_desc)
    certs = output.certificates
    lines = output.lines
    report = {"stages": [], "point": {}}

    boxes = [tuple(surface.domain_box)] + [c.box for c in certs]
    prev_phi = 0.0
    for i, cert in enumerate(certs, start=1):
        entry = {"index": i}
        if cert.family not in ("L1", "L2"):
            raise VerificationFailure(f"stage {i}: unknown family")
        if i >= 2 and cert.family == certs[i - 2].family:
            raise VerificationFailure(f"stage {i}: families do not alternate")
        a_margin = _containment_margin(boxes[i - 1], boxes[i])
        if a_margin <= 0:
            raise VerificationFailure(f"stage {i}: (a) nesting violated")
        entry["a_margin"] = float(a_margin)
        if not cert.phi_value > prev_phi * (1 + 2.0**-40):
            raise VerificationFailure(f"stage {i}: (b) house growth violated")
        entry["phi"] = cert.phi_value
        prev_phi = cert.phi_value
        av = _avoidance_margins(field, cert.box, lines[:i - 1])
        if not av["ok"]:
            raise VerificationFailure(f"stage {i}: (c) avoidance violated")
        entry["c_margins"] = av["margins"]
        line = lines[i - 1]
        d_margin = min(
            min(float(line.values[sig] - _frac_mp(cert.box[sig][line.k][0])),
                float(_frac_mp(cert.box[sig][line.k][1]) - line.values[sig]))
            for sig in range(d))
        if d_margin <= 0:
            raise VerificationFailure(f"stage {i}: (d) line misses the box")
        entry["d_margin"] = d_margin
        if i >= 2:
            prev = lines[i - 2]
            zi = zfun(line.house)
            with mpmath.workprec(field.precision_bits + GUARD_BITS):
                be = prev.b.embed()
                sup = mpmath.mpf(0)
                for sig in range(d):
                    lo, hi = cert.box[sig][prev.k]
                    v = prev.values[sig]
                    sup = max(sup, abs(be[sig]) * max(abs(_frac_mp(lo) - v),
                                                      abs(_frac_mp(hi) - v)))
                sampled = _sampled_sup(field, cert.box, prev, sample_density)
                if sampled > sup * (1 + 1e-12):
                    raise VerificationFailure(
                        f"stage {i}: sampled sup exceeds interval bound")
                if not sup < zi:
                    raise VerificationFailure(f"stage {i}: (e) bound violated")
                entry["e_bound"] = float(sup)
                entry["e_zeta"] = float(zi)
                entry["e_sampled"] = float(sampled)
        report["stages"].append(entry)

    # point-level checks: final box inside every stage box
    pt = output.point_exact
    for i, cert in enumerate(certs, start=1):
        for sig in range(d):
            for kk in (0, 1):
                lo, hi = output.final_box[sig][kk]
                blo, bhi = cert.box[sig][kk]
                if not (blo <= lo and hi <= bhi):
                    raise VerificationFailure(
                        f"final point outside stage-{i} box")

    chain = []
    with mpmath.workprec(field.precision_bits + GUARD_BITS):
        for r in range(1, len(certs) + 1):
            p, q = lines[r - 1].hyperplane(surface.m)
            vals = pt.relation_value_exact(p, q)
            worst = max(abs(vals[sig].embed()[sig]) for sig in range(d))
            z_next = (zfun(lines[r].house) if r < len(certs)
                      else zfun(lines[-1].house))
            if not worst < z_next:
                raise VerificationFailure(
                    f"relation value at stage {r} not below zeta")
            chain.append({"r": r, "value": float(worst), "zeta_next": float(z_next)})
    report["point"]["chain"] = chain

    ver = totally_irrational_certificate(pt, certs[-1].phi_value)
    if ver.relation_found:
        raise VerificationFailure("point admits a relation below Phi(q_n)")
    report["point"]["irrational_up_to"] = certs[-1].phi_value
    report["point"]["irrational_mode"] = ver.mode

    if eta_check:
        etas = []
        for r in range(1, len(certs)):
            t = certs[r - 1].phi_value
            res = eta_op(pt, t, cap=eta_cap)
            z = float(zfun(mpmath.mpf(t)))
            if not float(res.value) < z:
                raise VerificationFailure(f"eta({t}) not below zeta")
            etas.append({"t": t, "eta": float(res.value), "zeta": z,
                         "mode": res.mode})
        report["point"]["eta"] = etas
    return report


def _sampled_sup(field, box, prev_line, density):
    with mpmath.workprec(field.precision_bits + GUARD_BITS):
        be = prev_line.b.embed()
        worst = mpmath.mpf(0)
        for sig in range(field.degree):
            lo, hi = box[sig][prev_line.k]
            v = prev_line.values[sig]
            for s in range(density + 1):
                u = _frac_mp(lo) + (_frac_mp(hi) - _frac_mp(lo)) * s / density
                worst = max(worst, abs(be[sig]) * abs(u - v))
        return worst
