import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from ksdioph import (Inconclusive, KSVector, WedgeVector, apply_flow, content,
                     covolume_lower_bound, flow_blocks, flow_lattice,
                     paucity_report, singularity_diagnostic, systole_trace,
                     wedge_action, wedge_subsets)


def ks(field, arr):
    return KSVector.from_floats(field, np.asarray(arr, dtype=float))


def wedge_matrix_oracle(t, x, w, place):
    """Independent oracle: the exterior power of the flow matrix, by minors."""
    m, j = w.m, w.j
    blocks = flow_blocks(t, x)
    M = mpmath.matrix(blocks[place])
    subs = wedge_subsets(m, j)
    out = []
    for I in subs:
        acc = mpmath.mpf(0)
        for J, c in zip(subs, w.coeffs):
            sub = mpmath.matrix([[M[a, b] for b in J] for a in I])
            acc += mpmath.det(sub) * c.embed()[place]
        out.append(acc)
    return out


def test_apply_flow_identity(field_sqrt2):
    x = ks(field_sqrt2, np.zeros((2, 1)))
    y = apply_flow(0.0, x, [1, 0])
    assert [[float(v) for v in row] for row in y.rows] == [[1.0, 0.0], [1.0, 0.0]]


def test_apply_flow_exact_relation_vanishes(field_sqrt2):
    x = KSVector.from_elements([field_sqrt2.from_rational(Fraction(1, 2))])
    y = apply_flow(2.3, x, [-1, 2])
    assert all(float(row[0]) == 0.0 for row in y.rows)


def test_apply_flow_direct_values(field_sqrt2):
    x = ks(field_sqrt2, [[0.3], [0.7]])
    y = apply_flow(1.0, x, [1, 1])
    e = math.e
    assert float(y.rows[0][0]) == pytest.approx(e * 1.3, rel=1e-14)
    assert float(y.rows[1][0]) == pytest.approx(e * 1.7, rel=1e-14)
    assert float(y.rows[0][1]) == pytest.approx(1 / e, rel=1e-14)


def test_flow_block_determinant_one(field_sqrt2):
    x = ks(field_sqrt2, [[0.31, 0.77], [0.59, 0.13]])
    with mpmath.workprec(field_sqrt2.precision_bits + 40):
        for t in (0.0, 1.25, 7.5, 15.0):
            for blk in flow_blocks(t, x):
                det = mpmath.det(mpmath.matrix(blk))
                assert abs(det - 1) < mpmath.mpf(2) ** -200


def test_pure_flow_cocycle(field_sqrt2):
    # g_{s+t} = g_s g_t on arbitrary vectors (unipotent factored out: x = 0)
    zero = ks(field_sqrt2, np.zeros((2, 2)))
    rng = np.random.default_rng(3)
    v = [field_sqrt2.element([int(a) for a in rng.integers(-5, 6, 2)])
         for _ in range(3)]
    y_direct = apply_flow(0.7 + 1.1, zero, v)
    y_once = apply_flow(1.1, zero, v)
    m = 2
    with mpmath.workprec(300):
        es, ed = mpmath.e ** (m * mpmath.mpf(0.7)), mpmath.e ** (-mpmath.mpf(0.7))
        for sig in range(2):
            again = [y_once.rows[sig][0] * es] + [y_once.rows[sig][k] * ed
                                                  for k in (1, 2)]
            for a, b in zip(again, y_direct.rows[sig]):
                assert abs(a - b) <= abs(b) * mpmath.mpf(2) ** -200


def test_trace_zero_point_is_exponential(field_q):
    x = ks(field_q, np.zeros((1, 1)))
    tr = systole_trace(x, [0.0, 1.0, 2.0, 3.0])
    for t, delta in zip(tr.times, tr.deltas):
        assert float(delta) == pytest.approx(math.exp(-t), rel=1e-12)
    assert all(tr.certified)


def test_diagnostic_zero_point_onset(field_q):
    x = ks(field_q, np.zeros((1, 1)))
    diag = singularity_diagnostic(x, t_max=8.0, eps=0.1)
    assert diag.divergent
    assert diag.onset == pytest.approx(math.log(10), abs=1e-9)
    assert diag.tail_slope == pytest.approx(-1.0, abs=1e-9)
    assert diag.c == pytest.approx(0.1**2)


def test_diagnostic_rational_point_slope(field_sqrt2):
    alpha = field_sqrt2.element([Fraction(3, 7), Fraction(2, 5)])
    x = KSVector.from_elements([alpha])
    diag = singularity_diagnostic(x, t_max=12.0, eps=0.1, cap=300_000)
    assert diag.divergent
    assert diag.tail_slope == pytest.approx(-2.0, rel=0.05)


def test_trace_translation_invariance(field_sqrt2):
    rng = np.random.default_rng(8)
    arr = rng.uniform(0, 1, size=(2, 1))
    x = ks(field_sqrt2, arr)
    shift = field_sqrt2.element([2, -1])
    emb = shift.embed()
    arr2 = arr + np.array([[float(emb[0])], [float(emb[1])]])
    x2 = ks(field_sqrt2, arr2)
    t1 = systole_trace(x, [0.5, 1.5, 3.0, 6.0])
    t2 = systole_trace(x2, [0.5, 1.5, 3.0, 6.0])
    for a, b in zip(t1.deltas, t2.deltas):
        assert float(a) == pytest.approx(float(b), rel=1e-9)


def test_nondivergent_generic_point(field_sqrt2):
    x = ks(field_sqrt2, [[math.pi % 1], [math.e % 1]])
    diag = singularity_diagnostic(x, t_max=15.0, eps=0.1, cap=400_000)
    assert not diag.divergent
    assert diag.floor > 0.01


def test_wedge_grade_one_matches_flow(field_sqrt2):
    x = ks(field_sqrt2, [[0.31], [0.59]])
    w = WedgeVector(field_sqrt2, 1, 1, [field_sqrt2.from_rational(2),
                                        field_sqrt2.generator()])
    for place in (0, 1):
        got = wedge_action(0.8, x, w, place)
        ref = apply_flow(0.8, x, list(w.coeffs)).rows[place]
        for a, b in zip(got, ref):
            assert abs(a - b) <= abs(b) * mpmath.mpf(2) ** -200


def test_wedge_identity_at_zero(field_sqrt2):
    x = ks(field_sqrt2, np.zeros((2, 2)))
    w = WedgeVector(field_sqrt2, 2, 2, [field_sqrt2.element([1, 2]),
                                        field_sqrt2.element([0, -1]),
                                        field_sqrt2.element([3, 0])])
    for place in (0, 1):
        got = wedge_action(0.0, x, w, place)
        want = [c.embed()[place] for c in w.coeffs]
        for a, b in zip(got, want):
            assert abs(a - b) <= mpmath.mpf(2) ** -200 * (1 + abs(b))


def test_wedge_oracle_equivalence(field_sqrt2):
    rng = np.random.default_rng(17)
    p = field_sqrt2.precision_bits
    with mpmath.workprec(p + 60):
        for trial in range(100):
            j = 1 + trial % 2
            t = float(rng.uniform(0, 3))
            x = ks(field_sqrt2, rng.uniform(-1, 1, size=(2, 2)))
            n_sub = len(wedge_subsets(2, j))
            w = WedgeVector(field_sqrt2, 2, j,
                            [field_sqrt2.element([int(a) for a in rng.integers(-9, 10, 2)])
                             for _ in range(n_sub)])
            place = trial % 2
            got = wedge_action(t, x, w, place)
            want = wedge_matrix_oracle(t, x, w, place)
            for a, b in zip(got, want):
                scale = max(abs(b), mpmath.mpf(2) ** -40)
                assert abs(a - b) <= scale * mpmath.mpf(2) ** (-p + 36)


def test_covolume_lower_bound_trivial(field_sqrt2):
    x = ks(field_sqrt2, np.zeros((2, 2)))
    w = WedgeVector(field_sqrt2, 2, 2, {(1, 2): field_sqrt2.one()})
    assert float(covolume_lower_bound(0.0, x, w)) == pytest.approx(8.0, rel=1e-12)


def test_covolume_lower_bound_e0(field_sqrt2):
    x = ks(field_sqrt2, np.zeros((2, 1)))
    w = WedgeVector(field_sqrt2, 1, 1, {(0,): field_sqrt2.one()})
    t = 0.5
    want = math.sqrt(8) * math.exp(2 * 1 * t)  # product of e^{mt} over places
    assert float(covolume_lower_bound(t, x, w)) == pytest.approx(want, rel=1e-12)


def test_covolume_lower_bound_consistency(field_sqrt2):
    rng = np.random.default_rng(23)
    for _ in range(10):
        x = ks(field_sqrt2, rng.uniform(-1, 1, size=(2, 2)))
        t = float(rng.uniform(0, 2))
        w = WedgeVector(field_sqrt2, 2, 2,
                        [field_sqrt2.element([int(a) for a in rng.integers(-5, 6, 2)])
                         for _ in range(3)])
        rows = [wedge_action(t, x, w, s) for s in range(2)]
        img = KSVector(field_sqrt2, rows)
        bound = float(covolume_lower_bound(t, x, w))
        ref = 8.0 * float(content(img))  # (sqrt D)^m with m = 2
        assert bound == pytest.approx(ref, rel=1e-10)


def test_paucity_planted_rational(field_sqrt2):
    alpha = field_sqrt2.element([Fraction(1, 3), Fraction(1, 2)])
    emb = [float(v) for v in alpha.embed()]
    planted = np.array([[[emb[0]], [emb[1]]]])
    rep = paucity_report(field_sqrt2, 1, planted, t_max=12.0)
    assert rep["divergent_fraction"] == 1.0


def test_paucity_deterministic(field_sqrt2):
    import json
    r1 = paucity_report(field_sqrt2, 1, 3, t_max=4.0, seed=42)
    r2 = paucity_report(field_sqrt2, 1, 3, t_max=4.0, seed=42)
    assert json.dumps(r1, sort_keys=True) == json.dumps(r2, sort_keys=True)


def test_wedge_grade_out_of_range(field_sqrt2):
    from ksdioph import GradeOutOfRange
    with pytest.raises(GradeOutOfRange):
        WedgeVector(field_sqrt2, 2, 3, [])


def test_diagnostic_inconclusive_on_budget(field_sqrt2):
    x = ks(field_sqrt2, [[0.37], [0.58]])
    with pytest.raises(Inconclusive):
        singularity_diagnostic(x, t_max=3.0, eps=0.1, cap=1)
