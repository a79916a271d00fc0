import json
import math
import warnings
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from ksdioph import (ConstructError, NotPrimitiveWarning, PolyK, StageCertificate,
                     SurfaceSpec, VerificationFailure, construct_singular,
                     construction_from_json, construction_to_json, eta,
                     line_family, product_surface, singularity_diagnostic,
                     totally_irrational_certificate, verify_certificate,
                     zeta_from_descriptor)
from ksdioph.construct import find_line_members


@pytest.fixture(scope="module")
def surface(field_sqrt2):
    return product_surface(field_sqrt2, m=3)


@pytest.fixture(scope="module")
def built(surface):
    return construct_singular(surface, zeta="inv_pow:2", stages=5)


def test_surface_validation(field_sqrt2):
    with pytest.raises(ConstructError):
        product_surface(field_sqrt2, m=2)
    surf = product_surface(field_sqrt2, m=4)
    assert len(surf.graph_polys) == 2


def test_polyk_eval(field_sqrt2):
    p = PolyK(field_sqrt2, {(1, 1): 1})
    val = p.eval_exact(Fraction(1, 2), Fraction(1, 3))
    assert val == field_sqrt2.from_rational(Fraction(1, 6))
    hi = p.interval_sup(0, ((Fraction(0), Fraction(1, 2)),
                            (Fraction(0), Fraction(1, 3))))
    assert float(hi) >= 1 / 6


def test_line_family_trivial(surface, field_sqrt2):
    member = line_family(surface, "L1", field_sqrt2.zero())
    p, q = member.hyperplane(3)
    assert p.is_zero()
    assert not q[0].is_zero() and q[1].is_zero() and q[2].is_zero()
    assert member.k == 0


def test_line_family_conjugates(surface, field_sqrt2):
    alpha = (field_sqrt2.one() + field_sqrt2.generator()) / field_sqrt2.from_rational(3)
    member = line_family(surface, "L1", alpha)
    vals = sorted(float(v) for v in member.values)
    want = sorted([(1 + math.sqrt(2)) / 3, (1 - math.sqrt(2)) / 3])
    assert vals == pytest.approx(want, rel=1e-12)
    assert float(member.house) == pytest.approx(3.0, abs=1e-12)


def test_line_family_not_primitive_warns(surface, field_sqrt2):
    two = field_sqrt2.from_rational(2)
    six = field_sqrt2.from_rational(6)
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        member = line_family(surface, "L2", (two, six))
    assert any(issubclass(w.category, NotPrimitiveWarning) for w in rec)
    assert float(member.house) == pytest.approx(3.0, abs=1e-12)


def test_line_density_search(field_sqrt2):
    rng = np.random.default_rng(31)
    for _ in range(3):
        target = rng.uniform(0.1, 0.9, size=2)
        tol = 1e-3
        ranges = [(Fraction(t - tol).limit_denominator(10**9),
                   Fraction(t + tol).limit_denominator(10**9)) for t in target]
        members = find_line_members(field_sqrt2, ranges, max_members=1)
        _, b, vals = members[0]
        assert float(b.house()) <= 200
        for v, t in zip(vals, target):
            assert abs(float(v) - t) <= tol


def test_single_stage_base_case(surface):
    out = construct_singular(surface, zeta="inv_pow:2", stages=1)
    assert len(out.certificates) == 1
    assert out.certificates[0].checks["e"].get("vacuous")
    verify_certificate(out)


def test_full_construction_certificates(built):
    houses = built.stage_houses()
    assert all(b > a for a, b in zip(houses, houses[1:]))
    fams = [c.family for c in built.certificates]
    assert all(a != b for a, b in zip(fams, fams[1:]))
    report = verify_certificate(built)
    for entry in report["stages"][1:]:
        assert entry["e_bound"] < entry["e_zeta"]
    assert report["point"]["irrational_up_to"] == built.certificates[-1].phi_value


def test_construction_eta_chain(built):
    _, zfun = zeta_from_descriptor(built.zeta_desc)
    pt = built.point_exact
    for r in range(1, 5):
        t = built.certificates[r - 1].phi_value
        res = eta(pt, t, cap=40_000_000)
        assert float(res.value) < float(zfun(mpmath.mpf(t)))


def test_construction_point_irrational(built):
    ver = totally_irrational_certificate(built.point_exact,
                                         built.certificates[-1].phi_value)
    assert not ver.relation_found


def test_construction_avoids_used_lines_exactly(built):
    # the point's plane coordinates are exact rationals; equality with any
    # used line value is an exact field-element test
    for ln in built.lines:
        for sig in range(built.field.degree):
            u = built.point_exact.elements[sig][ln.k]
            diff = ln.alpha() - u
            assert not diff.is_zero()


def test_construction_diagnostic_consistency(built):
    diag = singularity_diagnostic(built.point, t_max=12.0, eps=0.1, cap=400_000)
    assert diag.divergent


def test_variant_produces_distinct_point(surface, built):
    other = construct_singular(surface, zeta="inv_pow:2", stages=5, variant=1)
    assert (other.point_exact.elements[0][0].coords
            != built.point_exact.elements[0][0].coords)
    verify_certificate(other)


def test_tampered_certificate_fails(built, surface):
    data = construction_to_json(built)
    bad = json.loads(json.dumps(data))
    bad["stages"][2]["q"] = bad["stages"][1]["q"]
    bad["stages"][2]["phi_value"] = bad["stages"][1]["phi_value"]
    out = construction_from_json(bad)
    with pytest.raises(VerificationFailure):
        verify_certificate(out)


def test_widened_box_fails_e(built):
    data = construction_to_json(built)
    bad = json.loads(json.dumps(data))
    # widen stage-4 box in the (e)-pinched coordinate by x100
    for sig in range(2):
        k_prev = 1 - {"L1": 0, "L2": 1}[bad["stages"][3]["family"]]
        lo = Fraction(bad["stages"][3]["box"][sig][k_prev][0])
        hi = Fraction(bad["stages"][3]["box"][sig][k_prev][1])
        c = (lo + hi) / 2
        w = (hi - lo) * 50
        bad["stages"][3]["box"][sig][k_prev] = [f"{(c - w).numerator}/{(c - w).denominator}",
                                                f"{(c + w).numerator}/{(c + w).denominator}"]
    out = construction_from_json(bad)
    with pytest.raises(VerificationFailure):
        verify_certificate(out)


def test_json_roundtrip_verifies(built):
    data = json.loads(json.dumps(construction_to_json(built), sort_keys=True))
    out = construction_from_json(data)
    report = verify_certificate(out)
    assert report["point"]["chain"][0]["value"] < report["point"]["chain"][0]["zeta_next"]


def test_exp_zeta_schedule(surface):
    out = construct_singular(surface, zeta="exp_over_pow:1", stages=2)
    houses = out.stage_houses()
    assert houses[1] > houses[0]
    verify_certificate(out)


def test_exp_zeta_exponent_growth():
    # the rapidly decaying schedule needs working precision beyond the stage
    # houses it produces (zeta(Phi_3) ~ e^-1400)
    from ksdioph import create_field, uniform_exponent_estimate

    field = create_field([-2, 0, 1], precision=4096)
    surf = product_surface(field, m=3)
    out = construct_singular(surf, zeta="exp_over_pow:1", stages=3)
    verify_certificate(out)
    pt = out.point_exact
    phi2 = out.stage_houses()[1]

    def fitted(t_hi):
        grid = [2.0 * (t_hi / 2.0) ** (k / 7) for k in range(8)]
        return uniform_exponent_estimate(pt, grid, cap=60_000_000)

    before = fitted(phi2 * 0.9)   # window below the first eta cliff
    after = fitted(phi2 * 1.1)    # window crossing it
    assert not after.exact_relation
    # the fitted exponent blows past any fixed nu once the window crosses a
    # stage scale, the desk-scale shadow of omega-hat = infinity
    assert after.omega_hat > 50
    assert after.omega_hat > 10 * max(before.omega_hat, 3.0)
    assert after.unstable  # staircase decay, honestly flagged


def test_zeta_descriptor_validation():
    desc, z = zeta_from_descriptor("inv_pow:2")
    assert float(z(10)) == pytest.approx(0.01)
    desc, z = zeta_from_descriptor("exp_over_pow:1")
    assert float(z(2.0)) == pytest.approx(math.exp(-2) / 2)
    with pytest.raises(ConstructError):
        zeta_from_descriptor("bogus:1")


def test_stage_stuck_on_tiny_house_cap(surface):
    from ksdioph import StageStuck
    with pytest.raises(StageStuck):
        construct_singular(surface, zeta="inv_pow:2", stages=3, house_cap=6.0)


def test_eta_chain_ten_sample_points(built):
    _, zfun = zeta_from_descriptor(built.zeta_desc)
    pt = built.point_exact
    houses = built.stage_houses()
    t0, t1 = houses[0], houses[-1]
    ratio = (t1 / t0) ** (1.0 / 9)
    for k in range(10):
        t = t0 * ratio**k
        res = eta(pt, t, cap=60_000_000)
        assert float(res.value) <= float(zfun(mpmath.mpf(t))) * (1 + 1e-12)
