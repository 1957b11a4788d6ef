import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import WORKED, build
from skewfold import HypothesisError, RegionSpec, SkewProduct, analyze, estimate_R, member, verify_bounds, verify_contraction, verify_invariance
from skewfold.region import region_for_plan, sample_region


def test_member_examples(worked):
    _, plan2, _ = worked["case2"]
    spec = region_for_plan(plan2, 10.0)
    assert member(spec, 100, 1e4 + 1)
    assert not member(spec, 100, 999)
    assert not member(spec, 0, 5)

    _, plan4, _ = worked["case4"]
    spec4 = region_for_plan(plan4, 10.0)
    assert member(spec4, 1e4, 1e3 + 1)
    assert not member(spec4, 1e4, 1e8)
    assert not member(spec4, 0, 5)


def test_region_spec_validation():
    with pytest.raises(ValueError):
        RegionSpec(R=1.0, l1=Fraction(0), l2=Fraction(1), case=3)
    with pytest.raises(ValueError):
        RegionSpec(R=2.0, l1=Fraction(0), l2=Fraction(1), case=7)


def test_estimate_R_examples(worked):
    f, plan, spec = worked["case2"]
    assert spec.R == pytest.approx(10.0, rel=1e-9)
    g = SkewProduct.from_text("z^3", "z^3*w^2")
    assert estimate_R(g, analyze(g)[0]).R == 2.0
    h = SkewProduct.from_text("z^3 + z", "z^3*w^2")
    spec_h = estimate_R(h, analyze(h)[0])
    assert spec_h.R >= 10.0 * (1 - 1e-9)
    assert verify_bounds(h, spec_h).passed
    with pytest.raises(ValueError):
        estimate_R(f, plan, eps=1.5)


def test_monomial_has_no_remainder():
    g = SkewProduct.from_text("z^2", "z*w^2")
    rep = verify_bounds(g, estimate_R(g, analyze(g)[0]))
    assert rep.max_zeta == 0 and rep.max_eta == 0 and rep.passed


@pytest.mark.parametrize("name", ["case2", "case3", "case4"])
def test_certificates(worked, name):
    f, _, spec = worked[name]
    b = verify_bounds(f, spec, 0.01, 2000, seed=3)
    assert b.passed and b.max_zeta < 0.01 and b.max_eta < 0.01
    assert verify_invariance(f, spec, 2000, seed=3).n_violations == 0


def test_small_radius_fails_bounds(worked):
    f, plan, _ = worked["case2"]
    rep = verify_bounds(f, region_for_plan(plan, 1.5), 0.01, 2000)
    assert not rep.passed and rep.max_eta > 0.01 and rep.violations


def test_monomial_case2_region_is_invariant():
    g = SkewProduct.from_text("z^3", "z^3*w^2")
    plan = analyze(SkewProduct.from_text("z^3", "z^3*w^2 + z^5"))[0]
    assert verify_invariance(g, region_for_plan(plan, 10.0), 2000).passed


def test_shrunken_radius_breaks_invariance():
    f = SkewProduct.from_text("z^6", "z^3*w^2 + 40*w^5")
    rep = verify_invariance(f, region_for_plan(analyze(f)[0], 1.01), 4000)
    assert rep.n_violations > 0 and rep.violations


def test_contraction_d_one(d_one):
    f, plan, spec = d_one
    assert spec.contraction
    assert verify_contraction(f, spec, 8, 1000).passed
    g = SkewProduct.from_text("z^3", "z^2*w")
    assert verify_contraction(g, estimate_R(g, analyze(g)[0]), 8, 500).passed


def test_contraction_refusals(worked):
    f, _, spec = worked["case2"]
    with pytest.raises(ValueError):
        verify_contraction(f, spec)
    g = SkewProduct.from_text("z^3", "z^2*w + z^3")
    plan = next(p for p in analyze(g) if p.d == 1)
    with pytest.raises(HypothesisError):
        estimate_R(g, plan)
    with pytest.raises(HypothesisError):
        verify_contraction(g, region_for_plan(plan, 10.0))


def test_samples_lie_in_region(worked):
    for f, _, spec in worked.values():
        Z, W = sample_region(spec, 500, seed=1)
        assert spec.member_lift(Z, W).all()


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 30), st.floats(0.01, 30), st.sampled_from(["case2", "case3", "case4"]))
def test_product_coordinates_round_trip(u, v, name):
    _, plan, spec = build(*WORKED[name])
    x, y = spec.from_product(u, v)
    u2, v2 = spec.product_coords(x, y)
    assert u2 == pytest.approx(u, abs=1e-9) and v2 == pytest.approx(v, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.1, 20), st.floats(0.1, 20), st.floats(1.5, 50), st.floats(1.0, 4.0))
def test_larger_radius_gives_smaller_region(u, v, R, factor):
    plan = analyze(SkewProduct.from_text("z^5", "w^4 + z^2*w^3 + z^3*w"))[0]
    small = region_for_plan(plan, R * factor)
    big = region_for_plan(plan, R)
    x, y = small.from_product(math.log(R * factor) + u, math.log(R * factor) + v)
    assert small.member_log(x, y) and big.member_log(x, y)


def test_eta_shrinks_with_radius(worked):
    f, plan, _ = worked["case2"]
    sup = [verify_bounds(f, region_for_plan(plan, R), 0.5, 2000, seed=0).max_eta for R in (3.0, 6.0, 12.0, 24.0)]
    assert all(a > b for a, b in zip(sup, sup[1:]))
    assert np.all(np.array(sup) <= 1 / np.array([3.0, 6.0, 12.0, 24.0]) ** 2 + 1e-15)
