"""The one-parameter diagonal flow g_t and unipotent u_x on K_S^(m+1),
systole traces along trajectories, divergence diagnostics, and the
exterior-power action kernel with its covolume lower bound.

Per place, g_t = diag(e^(mt), e^(-t), ..., e^(-t)) and u_x adds x-multiples
of the last m coordinates to coordinate 0.  All flow arithmetic is mpmath,
whose unbounded exponent range makes an explicit log-magnitude fallback
unnecessary; float64 views are only taken inside enumeration kernels at
trace-scale times.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import mpmath
import numpy as np

from .fields import Field, FieldElement, GUARD_BITS
from .lattices import (KSVector, ModuleLattice, SystoleResult, content,
                       restriction_of_scalars, systole_content)


class FlowError(Exception):
    pass


class GradeOutOfRange(FlowError):
    pass


class Inconclusive(FlowError):
    pass


def flow_blocks(t, x: KSVector, scale_guard=None):
    """Per-place (m+1)x(m+1) matrices g_t^sigma u_{x^sigma}."""
    field = x.field
    m = x.n
    with mpmath.workprec(field.precision_bits + GUARD_BITS):
        emt = mpmath.e ** (mpmath.mpf(m) * t)
        edt = mpmath.e ** (-mpmath.mpf(t))
        blocks = []
        for sig in range(field.degree):
            blk = [[mpmath.mpf(0)] * (m + 1) for _ in range(m + 1)]
            blk[0][0] = emt
            for i in range(m):
                blk[0][i + 1] = emt * x.rows[sig][i]
                blk[i + 1][i + 1] = edt
            blocks.append(blk)
        return blocks


def flow_lattice(t, x: KSVector) -> ModuleLattice:
    return restriction_of_scalars(flow_blocks(t, x), x.field)


def apply_flow(t, x: KSVector, v) -> KSVector:
    """Image of the module vector v = (q_0, q_1, ..., q_m) under g_t u_x."""
    field = x.field
    m = x.n
    v = [_coerce_el(field, q) for q in v]
    if len(v) != m + 1:
        raise ValueError("vector length must be m+1")
    with mpmath.workprec(field.precision_bits + GUARD_BITS):
        emt = mpmath.e ** (mpmath.mpf(m) * t)
        edt = mpmath.e ** (-mpmath.mpf(t))
        embeds = [q.embed() for q in v]
        rows = []
        for sig in range(field.degree):
            head = embeds[0][sig]
            for i in range(m):
                head += embeds[i + 1][sig] * x.rows[sig][i]
            rows.append([emt * head] + [edt * embeds[i + 1][sig] for i in range(m)])
        return KSVector(field, rows)


def _coerce_el(field, q):
    if isinstance(q, FieldElement):
        return q
    return field.from_rational(Fraction(q))


@dataclass
class SystoleTrace:
    times: tuple
    deltas: tuple
    witnesses: tuple
    certified: tuple

    def log_deltas(self):
        return [float(mpmath.log(v)) for v in self.deltas]

    def rows(self):
        out = []
        for t, delta, wit, cert in zip(self.times, self.deltas, self.witnesses, self.certified):
            coords = ";".join(str(c) for el in wit for c in el.coords)
            out.append({
                "t": t,
                "delta": float(delta),
                "certified": bool(cert),
                "witness": coords,
                "log_delta": float(mpmath.log(delta)),
            })
        return out


def systole_trace(x: KSVector, grid, cap=2_000_000) -> SystoleTrace:
    """Certified systole of g_t u_x O_K^(m+1) along an increasing time grid."""
    grid = [float(t) for t in grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be strictly increasing")
    deltas, wits, certs = [], [], []
    for t in grid:
        res = systole_content(flow_lattice(t, x), cap=cap)
        deltas.append(res.delta)
        wits.append(res.witness)
        certs.append(res.certified)
    return SystoleTrace(tuple(grid), tuple(deltas), tuple(wits), tuple(certs))


@dataclass
class Diagnostic:
    divergent: bool
    onset: float | None
    tail_slope: float | None
    floor: float | None
    eps: float
    c: float
    m: int
    trace: SystoleTrace

    @property
    def kind(self):
        return "DivergentEvidence" if self.divergent else "NondivergentEvidence"


def singularity_diagnostic(x: KSVector, t_max=15.0, eps=0.1, step=0.25,
                           cap=2_000_000, min_tail=3, c=None,
                           trace: SystoleTrace | None = None) -> Diagnostic:
    """Evidence-level divergence verdict from the certified systole trace.

    DivergentEvidence when the trace falls below eps and stays below through
    t_max (tail of at least min_tail grid points); the onset is the
    interpolated down-crossing and the slope a least-squares fit of log delta
    over the tail.  NondivergentEvidence reports the certified floor.  The
    Dirichlet-side constant c = eps^(m+1) is exposed alongside eps; passing c
    sets eps accordingly.  Finite t_max cannot prove divergence or its
    absence; this is evidence, not proof.
    """
    m = x.n
    if c is not None:
        eps = float(c) ** (1.0 / (m + 1))
    if not 0 < eps < 1:
        raise ValueError("eps must be in (0,1)")
    if trace is None:
        n_steps = int(np.floor(t_max / step + 1e-9))
        grid = [i * step for i in range(n_steps + 1)]
        if grid[-1] < t_max - 1e-9:
            grid.append(t_max)
        trace = systole_trace(x, grid, cap=cap)
    vals = [float(v) for v in trace.deltas]
    n = len(vals)
    below = [v < eps for v in vals]
    k0 = n
    for i in range(n - 1, -1, -1):
        if below[i]:
            k0 = i
        else:
            break
    tail_len = n - k0
    if tail_len >= min_tail:
        decisive = range(k0, n)
        if not all(trace.certified[i] for i in decisive):
            raise Inconclusive("uncertified systole points in the tail")
        ts = np.array(trace.times[k0:])
        ls = np.array([float(mpmath.log(trace.deltas[i])) for i in range(k0, n)])
        slope = float(np.polyfit(ts, ls, 1)[0]) if len(ts) >= 2 else float("nan")
        if k0 == 0:
            onset = trace.times[0]
        else:
            t0, t1 = trace.times[k0 - 1], trace.times[k0]
            l0 = float(mpmath.log(trace.deltas[k0 - 1]))
            l1 = float(mpmath.log(trace.deltas[k0]))
            le = float(np.log(eps))
            onset = t0 + (le - l0) * (t1 - t0) / (l1 - l0) if l1 != l0 else t1
        return Diagnostic(True, float(onset), slope, None, eps, eps ** (m + 1), m, trace)
    if not all(trace.certified):
        raise Inconclusive("uncertified systole points in the trace")
    floor = min(vals)
    return Diagnostic(False, None, None, floor, eps, eps ** (m + 1), m, trace)


def paucity_report(field, m, samples, t_max=15.0, eps=0.1, step=0.25,
                   cap=2_000_000, seed=0):
    """Monte Carlo singularity fraction over uniform samples in [0,1]^(d m).

    samples: an integer N (seeded uniform draws) or an explicit array of
    shape (N, d, m).  Divergence verdicts at finite t_max are evidence only;
    the measure-zero expectation is a fraction near 0.
    """
    if isinstance(samples, (int, np.integer)):
        rng = np.random.default_rng(seed)
        samples = rng.uniform(0.0, 1.0, size=(int(samples), field.degree, m))
    samples = np.asarray(samples, dtype=np.float64)
    divergent = 0
    inconclusive = 0
    floors = []
    onsets = []
    for row in samples:
        x = KSVector.from_floats(field, row)
        try:
            diag = singularity_diagnostic(x, t_max=t_max, eps=eps, step=step,
                                          cap=cap)
        except Inconclusive:
            inconclusive += 1
            continue
        if diag.divergent:
            divergent += 1
            onsets.append(diag.onset)
        else:
            floors.append(diag.floor)
    floors.sort()
    quantiles = {}
    if floors:
        for q in (0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0):
            quantiles[f"q{int(q * 100):03d}"] = float(np.quantile(floors, q))
    n = len(samples)
    return {
        "samples": n,
        "seed": int(seed),
        "m": int(m),
        "t_max": float(t_max),
        "eps": float(eps),
        "divergent_count": divergent,
        "divergent_fraction": divergent / n if n else 0.0,
        "inconclusive_count": inconclusive,
        "floor_quantiles": quantiles,
        "onsets": onsets,
    }


# ---------------------------------------------------------------------------
# exterior powers

def wedge_subsets(m, j):
    """Lexicographic j-subsets of {0..m}, the standard wedge basis order."""
    return list(itertools.combinations(range(m + 1), j))


class WedgeVector:
    """Grade-j element of wedge^j O_K^(m+1), exact coefficients per subset."""

    def __init__(self, field: Field, m: int, j: int, coeffs):
        if not 1 <= j <= m:
            raise GradeOutOfRange(f"grade {j} outside 1..{m}")
        self.field = field
        self.m = m
        self.j = j
        self.subsets = wedge_subsets(m, j)
        if isinstance(coeffs, dict):
            coeffs = [coeffs.get(I, field.zero()) for I in self.subsets]
        self.coeffs = tuple(_coerce_el(field, c) for c in coeffs)
        if len(self.coeffs) != len(self.subsets):
            raise ValueError("coefficient count mismatch")

    def coeff(self, I):
        return self.coeffs[self.subsets.index(tuple(sorted(I)))]

    def sup_norm(self):
        """max_I house(w_I), the basis-sup convention."""
        return max(c.house() for c in self.coeffs)


def _insertion_sign(i, others):
    """Sign of moving e_i to the front slot across sorted `others` minus it."""
    pos = sorted(others).index(i)  # 0-based position of i within sorted set
    return -1 if pos % 2 else 1


def wedge_action(t, x: KSVector, w: WedgeVector, place: int):
    """Closed-form sigma-component of g_t u_x acting on w.

    For subsets without 0 the coefficient is e^(-jt) w_I; for subsets with 0
    it is e^((m-j+1)t) (w_I + sum over i not in I of +- w_{I\\{0} u {i}} x_i)
    with the sign given by the parity of the slot swap that moves i into the
    position of 0.
    """
    field = x.field
    m, j = w.m, w.j
    if x.n != m:
        raise ValueError("x dimension mismatch")
    with mpmath.workprec(field.precision_bits + GUARD_BITS):
        shrink = mpmath.e ** (-mpmath.mpf(j) * t)
        grow = mpmath.e ** (mpmath.mpf(m - j + 1) * t)
        emb = {I: c.embed()[place] for I, c in zip(w.subsets, w.coeffs)}
        out = []
        for I in w.subsets:
            if 0 not in I:
                out.append(shrink * emb[I])
                continue
            rest = [i for i in I if i != 0]
            acc = emb[I]
            for i in range(1, m + 1):
                if i in I:
                    continue
                src = tuple(sorted(rest + [i]))
                sign = _insertion_sign(i, src)
                acc += sign * emb[src] * x.rows[place][i - 1]
            out.append(grow * acc)
        return tuple(out)


def contraction_components(w: WedgeVector):
    """c(w)_i for i = 0..m as signed coefficient maps on (j-1)-subsets of
    {1..m}; assembled so that the 0-part of u_x w equals sum_i x~_i c(w)_i
    with x~ = (1, x)."""
    field = w.field
    m, j = w.m, w.j
    Js = list(itertools.combinations(range(1, m + 1), j - 1))
    comps = []
    for i in range(m + 1):
        comp = {}
        for J in Js:
            if i == 0:
                I = tuple(sorted((0,) + J))
                comp[J] = w.coeff(I) if set(J).issubset(set(I)) else field.zero()
            elif i in J:
                comp[J] = field.zero()
            else:
                src = tuple(sorted(J + (i,)))
                sign = _insertion_sign(i, src)
                comp[J] = w.coeff(src) * sign if sign > 0 else -w.coeff(src)
        comps.append(comp)
    return Js, comps


def covolume_lower_bound(t, x: KSVector, w: WedgeVector):
    """(sqrt(D_K))^m times the content of g_t u_x w, split per the closed
    form into the graded pieces: per place, max of the e^((m-j+1)t)-scaled
    0-part and the e^(-jt)-scaled projection to the 0-free part."""
    field = x.field
    m, j = w.m, w.j
    Js, comps = contraction_components(w)
    with mpmath.workprec(field.precision_bits + GUARD_BITS):
        shrink = mpmath.e ** (-mpmath.mpf(j) * t)
        grow = mpmath.e ** (mpmath.mpf(m - j + 1) * t)
        total = mpmath.sqrt(mpmath.mpf(field.discriminant)) ** m
        for sig in range(field.degree):
            xt = [mpmath.mpf(1)] + list(x.rows[sig])
            head = mpmath.mpf(0)
            for J in Js:
                acc = mpmath.mpf(0)
                for i in range(m + 1):
                    c = comps[i][J]
                    if not c.is_zero():
                        acc += xt[i] * c.embed()[sig]
                head = max(head, abs(acc))
            proj = mpmath.mpf(0)
            for I, c in zip(w.subsets, w.coeffs):
                if 0 not in I:
                    proj = max(proj, abs(c.embed()[sig]))
            total *= max(grow * head, shrink * proj)
        return +total
