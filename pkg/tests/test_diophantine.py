import math
from fractions import Fraction

import numpy as np
import pytest

from ksdioph import (BudgetExceeded, ExactPoint, KSVector, NoSolutionInBox,
                     dirichlet_solve, eta, integer_kernel,
                     totally_irrational_certificate,
                     uniform_exponent_estimate)
from ksdioph.diophantine import integral_solve


def cf_best_approx(x, qmax):
    """Independent continued-fraction oracle: best |q x - p| with q <= qmax."""
    best = (math.inf, None, None)
    for q in range(1, qmax + 1):
        p = round(q * x)
        v = abs(q * x - p)
        if v < best[0]:
            best = (v, q, p)
    return best


def test_dirichlet_cf_example(field_q):
    x = KSVector.from_floats(field_q, np.array([[0.6180339887]]))
    sol = dirichlet_solve(x, Q=13)
    v, q, p = cf_best_approx(0.6180339887, 13)
    assert int(sol.q[0].coords[0]) == q == 13
    assert int(sol.q0.coords[0]) == -p == -8
    assert float(sol.value) == pytest.approx(v, rel=1e-9)
    assert float(sol.value) == pytest.approx(0.03444, abs=5e-6)


def test_dirichlet_exact_relation_zero(field_sqrt2):
    alpha = field_sqrt2.element([Fraction(1, 2), Fraction(1, 3)])
    pt = ExactPoint.from_field_vector([alpha])
    sol = dirichlet_solve(pt, Q=12)
    assert float(sol.value) == 0.0


def test_dirichlet_box_bounds_match_exhaustive(field_sqrt2):
    x = KSVector.from_floats(field_sqrt2, np.array([[0.30103], [0.77815]]))
    sol = dirichlet_solve(x, Q=8)
    # the eta feasible set at t = Q D^(1/2d) coincides with the solver box
    t = sol.house_bound
    res = eta(x, t)
    assert float(sol.value) == pytest.approx(float(res.value), rel=1e-12)
    assert sol.house_q() <= sol.house_bound * (1 + 1e-12)
    assert float(sol.value) <= sol.value_bound * (1 + 1e-12)


def test_dirichlet_guarantee_small_sweep(field_sqrt2):
    rng = np.random.default_rng(21)
    for _ in range(5):
        x = KSVector.from_floats(field_sqrt2, rng.uniform(0, 1, size=(2, 1)))
        for Q in (2.0, 4.0, 8.0):
            sol = dirichlet_solve(x, Q=Q)
            assert float(sol.value) <= sol.value_bound * (1 + 1e-9)
            assert sol.house_q() <= sol.house_bound * (1 + 1e-9)


def test_eta_monotone_and_modes(field_sqrt2):
    x = KSVector.from_floats(field_sqrt2, np.array([[0.30103], [0.77815]]))
    grid = eta(x, 5, mode="grid")
    fp = eta(x, 5, mode="fp")
    assert float(grid.value) == pytest.approx(float(fp.value), rel=1e-10)
    vals = [float(eta(x, t).value) for t in (3, 5, 9, 14)]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(vals, vals[1:]))


def test_eta_exact_relation_zero(field_sqrt2):
    alpha = field_sqrt2.element([Fraction(1, 2), Fraction(1, 3)])
    pt = ExactPoint.from_field_vector([alpha])
    res = eta(pt, 8)
    assert float(res.value) == 0.0


def test_eta_content_phi(field_sqrt2):
    x = KSVector.from_floats(field_sqrt2, np.array([[0.30103], [0.77815]]))
    house_res = eta(x, 6, phi="house")
    content_res = eta(x, 6, phi="content")
    # content sublevel sets are smaller, so the min cannot be smaller
    assert float(content_res.value) >= float(house_res.value) * (1 - 1e-12)


def test_uniform_exponent_golden(field_q):
    phi = (math.sqrt(5) - 1) / 2
    x = KSVector.from_floats(field_q, np.array([[phi]]))
    grid = [10 * (1000.0) ** (k / 7) for k in range(8)]
    est = uniform_exponent_estimate(x, grid)
    assert est.omega_hat == pytest.approx(1.0, abs=0.15)
    assert not est.exact_relation


def test_uniform_exponent_exact_relation(field_sqrt2):
    alpha = field_sqrt2.element([Fraction(2, 7), Fraction(1, 5)])
    pt = ExactPoint.from_field_vector([alpha])
    grid = [4.0 * 2**k for k in range(8)]
    est = uniform_exponent_estimate(pt, grid)
    assert est.omega_hat == math.inf
    assert est.exact_relation


def test_irrational_exact_relation_found(field_sqrt2):
    alpha = field_sqrt2.element([Fraction(1, 2), Fraction(1, 3)])
    pt = ExactPoint.from_field_vector([alpha])
    ver = totally_irrational_certificate(pt, 7)
    assert ver.relation_found
    # soundness: plug the relation back exactly
    vals = pt.relation_value_exact(ver.q0, ver.q)
    assert all(v.is_zero() for v in vals)
    below = totally_irrational_certificate(pt, 3)
    assert not below.relation_found


def test_irrational_exact_no_relation_any_height(field_sqrt2):
    pt = ExactPoint(field_sqrt2, [
        (field_sqrt2.from_rational(Fraction(123456789, 2**30)),),
        (field_sqrt2.from_rational(Fraction(987654321, 2**30)),),
    ])
    ver = totally_irrational_certificate(pt, 1000)
    assert not ver.relation_found
    assert ver.no_relation_any_height


def test_irrational_numeric_pi_e(field_sqrt2):
    x = KSVector.from_floats(field_sqrt2, np.array([[math.pi], [math.e]]))
    ver = totally_irrational_certificate(x, 50)
    assert not ver.relation_found
    assert ver.mode == "numeric"
    assert ver.threshold == 2.0 ** (-(field_sqrt2.precision_bits // 2))


def test_irrational_numeric_detects_planted(field_sqrt2):
    alpha = field_sqrt2.element([Fraction(1, 3), 0])
    emb = [float(v) for v in alpha.embed()]
    x = KSVector.from_floats(field_sqrt2, np.array([[emb[0]], [emb[1]]]))
    ver = totally_irrational_certificate(x, 10)
    assert ver.relation_found


def test_integer_kernel_known():
    kern = integer_kernel([[1, 2, 3]])
    assert len(kern) == 2
    for v in kern:
        assert v[0] + 2 * v[1] + 3 * v[2] == 0
    assert integer_kernel([[1, 0], [0, 1]]) == []
    # saturation: kernel of [2, 4] must contain (2, -1), not only (4, -2)
    kern2 = integer_kernel([[2, 4]])
    assert any(abs(v[0]) == 2 and abs(v[1]) == 1 for v in kern2)


def test_integral_solve_roundtrip():
    rows = [[Fraction(2), Fraction(0), Fraction(1)],
            [Fraction(0), Fraction(3), Fraction(-1)]]
    got = integral_solve(rows, [Fraction(5), Fraction(1)])
    assert got is not None
    x, kern = got
    assert 2 * x[0] + x[2] == 5 and 3 * x[1] - x[2] == 1
    assert integral_solve([[Fraction(2)]], [Fraction(1)]) is None


def test_dirichlet_budget(field_sqrt2):
    x = KSVector.from_floats(field_sqrt2, np.array([[0.3], [0.7]]))
    with pytest.raises(BudgetExceeded):
        dirichlet_solve(x, Q=64, cap=10)
