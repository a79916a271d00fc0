import math

import mpmath
import numpy as np
import pytest

from ksdioph import (KSVector, content, identity_lattice,
                     restriction_of_scalars, systole_content)
from ksdioph.lattices import scale_rows_by_unit, systole_csv


def brute_force_systole(lat, box=20):
    """Independent oracle: exhaust module coordinates in [-box, box]^(dn)."""
    N = lat.field.degree * lat.n
    axes = [np.arange(-box, box + 1)] * N
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, N)
    grid = grid[np.any(grid != 0, axis=1)]
    Y = (grid.astype(float) @ lat.ros_f64.T).reshape(len(grid), lat.field.degree, lat.n)
    vals = np.abs(Y).max(axis=2).prod(axis=1)
    return vals.min()


def test_covolume_normalization(field_sqrt2):
    lat1 = identity_lattice(field_sqrt2, 1)
    assert abs(float(lat1.covolume) - math.sqrt(8)) < 1e-14
    lat2 = identity_lattice(field_sqrt2, 2)
    assert abs(float(lat2.covolume) - 8.0) < 1e-13
    # cross-check against the Gram determinant of the ros basis
    det = abs(float(mpmath.det(lat2.ros_mp)))
    assert det == pytest.approx(8.0, rel=1e-12)


def test_covolume_trivial_rational(field_q):
    lat = identity_lattice(field_q, 2)
    assert float(lat.covolume) == pytest.approx(1.0, abs=1e-15)


def test_covolume_multiplicativity(field_sqrt2):
    rng = np.random.default_rng(2)
    base = identity_lattice(field_sqrt2, 2)
    for _ in range(50):
        blocks = rng.normal(size=(2, 2, 2)) + np.eye(2) * 2
        lat = restriction_of_scalars(list(blocks), field_sqrt2)
        dets = np.prod([abs(np.linalg.det(b)) for b in blocks])
        assert float(lat.covolume) == pytest.approx(float(base.covolume) * dets,
                                                    rel=1e-9)


def test_content_examples(field_sqrt2):
    e0 = KSVector.from_floats(field_sqrt2, np.array([[1.0, 0.0], [1.0, 0.0]]))
    assert float(content(e0)) == 1.0
    th = field_sqrt2.generator()
    y = KSVector.from_elements([th, field_sqrt2.zero()])
    assert float(content(y)) == pytest.approx(2.0, abs=1e-13)


def test_content_bounded_by_sup_power(field_sqrt2):
    rng = np.random.default_rng(4)
    for _ in range(100):
        arr = rng.normal(size=(2, 3))
        y = KSVector.from_floats(field_sqrt2, arr)
        assert float(content(y)) <= float(y.sup_norm()) ** 2 * (1 + 1e-12)


def test_content_scalar_homogeneity(field_sqrt2):
    rng = np.random.default_rng(9)
    arr = rng.normal(size=(2, 2))
    y = KSVector.from_floats(field_sqrt2, arr)
    lam = 1.7
    y2 = KSVector.from_floats(field_sqrt2, lam * arr)
    assert float(content(y2)) == pytest.approx(lam**2 * float(content(y)), rel=1e-12)


def test_systole_baseline_exact(field_q, field_sqrt2, field_sqrt5):
    for field in (field_q, field_sqrt2, field_sqrt5):
        for n in (1, 2, 3):
            res = systole_content(identity_lattice(field, n))
            assert res.certified
            assert res.delta == 1


def test_systole_diagonal_flow_rational(field_q):
    lat = restriction_of_scalars([np.diag([math.e, 1 / math.e])], field_q)
    res = systole_content(lat)
    assert res.certified
    assert float(res.delta) == pytest.approx(math.exp(-1), rel=1e-12)
    assert [int(c) for el in res.witness for c in el.coords] in ([0, 1], [0, -1])


def test_systole_oracle_equivalence(field_q, field_sqrt2):
    rng = np.random.default_rng(12)
    done = 0
    for field in (field_q, field_sqrt2):
        while done < 10 or (field is field_sqrt2 and done < 20):
            g = rng.integers(-3, 4, size=(2, 2))
            if abs(np.linalg.det(g)) < 0.5:
                continue
            exact = [[field.from_rational(int(v)) for v in row] for row in g]
            lat = restriction_of_scalars(exact, field)
            res = systole_content(lat)
            assert res.certified
            assert float(res.delta) == pytest.approx(brute_force_systole(lat),
                                                     rel=1e-9)
            done += 1
        if field is field_q:
            done = 10


def test_systole_unit_scaling_invariant(field_sqrt2):
    u = field_sqrt2.balancing_unit()
    assert abs(u.norm()) == 1
    lat = identity_lattice(field_sqrt2, 2)
    scaled = scale_rows_by_unit(lat, u)
    r1 = systole_content(lat)
    r2 = systole_content(scaled)
    assert float(r1.delta) == pytest.approx(float(r2.delta), rel=1e-12)


def test_dump_and_csv(field_sqrt2):
    lat = identity_lattice(field_sqrt2, 1)
    text = lat.dump_text()
    assert len(text.strip().splitlines()) == 2
    assert "|" in text
    res = systole_content(lat)
    csv = systole_csv([res])
    assert csv.splitlines()[0] == "witness,content,certified"
    assert ",1" in csv.splitlines()[1]


def test_singular_block_rejected(field_sqrt2):
    from ksdioph import SingularBlock
    with pytest.raises(SingularBlock):
        restriction_of_scalars([np.zeros((2, 2)), np.eye(2)], field_sqrt2)


def test_systole_budget_flagged_not_raised(field_sqrt2):
    lat = identity_lattice(field_sqrt2, 2)
    res = systole_content(lat, cap=2)
    assert not res.certified
    assert res.reason
    assert float(res.delta) >= 1 - 1e-12  # best-found still returned


def test_lll_degenerate_breakdown():
    from ksdioph import NumericalBreakdown, lll_reduce
    with pytest.raises(NumericalBreakdown):
        lll_reduce(np.array([[1.0, 2.0], [2.0, 4.0]]))
