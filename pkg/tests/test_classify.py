from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import grid_l1_star
from skewfold import INF, analyze, classify, l1_star, newton_polygon, parse_polynomial, select_plan, validate_weight
from skewfold.classify import Interval, interval, lemma_violations, second_interval
from skewfold.newton import polygon_from_points
from skewfold.poly import SkewProduct

F = Fraction


def test_single_vertex(worked):
    plan = classify(2, newton_polygon(parse_polynomial("z*w^2")))[0]
    assert (plan.case, plan.gamma, plan.d, plan.l1, plan.l2) == (1, 1, 2, 0, INF)
    assert interval(plan).conventional


def test_case2(worked):
    _, plan, _ = worked["case2"]
    assert (plan.case, plan.k, plan.gamma, plan.d) == (2, 1, 3, 2)
    assert plan.l1 == 1 and plan.l2 == INF and plan.alpha0 == 3
    assert interval(plan) == Interval(F(1), F(3))
    assert plan.degree_ok


def test_case3(worked):
    _, plan, _ = worked["case3"]
    assert (plan.case, plan.gamma, plan.d) == (3, 3, 2)
    assert plan.l1 == 0 and plan.l2 == 1 and plan.alpha0 == F(3, 4)
    assert interval(plan) == Interval(F(3, 4), F(1))


def test_case4(worked):
    _, plan, _ = worked["case4"]
    assert (plan.case, plan.k, plan.gamma, plan.d) == (4, 2, 2, 3)
    assert plan.l1 == F(1, 2) and plan.l2 == F(3, 2) and plan.alpha0 == 1
    assert plan.tilde_gamma == 1 and plan.tilde_d == F(11, 3)
    first, second = interval(plan)
    assert (first.lo, first.hi) == (F(1, 2), F(1))
    assert (second.lo, second.hi) == (F(1, 2), F(3, 2))
    assert second_interval(plan, F(3, 4)).lo == F(1, 4)


def test_second_interval_outside_case4(worked):
    with pytest.raises(ValueError):
        second_interval(worked["case2"][1], 1)


@pytest.mark.parametrize("name", ["case2", "case3", "case4"])
def test_no_lemma_violations(worked, name):
    f, plan, _ = worked[name]
    assert lemma_violations(plan, f.q) == []


def test_validate_weight_examples(worked):
    f, plan, _ = worked["case2"]
    assert validate_weight(2, plan, f.q)
    assert not validate_weight(F(1, 2), plan, f.q)
    assert validate_weight(plan.alpha0, plan, f.q)


@pytest.mark.parametrize("name", ["case2", "case3"])
def test_interval_endpoints_are_sharp(worked, name):
    f, plan, _ = worked[name]
    iv = interval(plan)
    eps = F(1, 1000)
    for end in (iv.lo, iv.hi):
        assert validate_weight(end, plan, f.q)
    assert not validate_weight(iv.lo - eps, plan, f.q)
    assert not validate_weight(iv.hi + eps, plan, f.q)
    assert validate_weight((iv.lo + iv.hi) / 2, plan, f.q)


def test_case4_first_weight_endpoints(worked):
    f, plan, _ = worked["case4"]
    first, _ = interval(plan)
    eps = F(1, 1000)
    assert validate_weight(first.lo, plan, f.q)
    assert not validate_weight(first.lo - eps, plan, f.q)
    assert validate_weight(first.hi, plan, f.q)
    assert not validate_weight(first.hi + eps, plan, f.q)
    assert validate_weight(F(3, 4), plan, f.q, l_second=F(1, 2))
    assert not validate_weight(F(3, 4), plan, f.q, l_second=F(1, 10))


@pytest.mark.parametrize(
    "delta, q, expected",
    [(3, "z^3*w^2 + z^5", F(1)), (2, "z^2*w^3", F(-2)), (2, "z*w^2", None), (4, "z^3*w^2 + z^5 + z*w", F(1))],
)
def test_l1_star(delta, q, expected):
    poly = parse_polynomial(q)
    assert l1_star(delta, poly) == expected
    P = newton_polygon(poly)
    plan = classify(delta, P)[0]
    assert grid_l1_star(delta, plan.gamma, plan.d, P.points) == expected


def test_l1_star_refuses_case3(worked):
    f, _, _ = worked["case3"]
    with pytest.raises(ValueError):
        l1_star(6, f.q)


def test_two_plans_at_intercept():
    P = polygon_from_points([(0, 5), (3, 2)])
    plans = classify(5, P)
    assert len(plans) == 2 and all(p.two_plans for p in plans)
    assert [(p.gamma, p.d) for p in plans] == [(0, 5), (3, 2)]
    with pytest.raises(ValueError, match="two plans"):
        select_plan(plans)
    assert select_plan(plans, 1) is plans[1]
    with pytest.raises(IndexError):
        select_plan(plans, 2)
    with pytest.raises(IndexError):
        select_plan(plans[:1], 1)


def test_d_one_degree_gate(d_one):
    f, plan, _ = d_one
    assert plan.case == 3 and plan.d == 1 and plan.degree_ok
    bad = analyze(SkewProduct.from_text("z^3", "z^2*w + z^3"))
    assert not any(p.degree_ok for p in bad if p.d == 1)
    assert "delta != T_k" in next(p for p in bad if p.d == 1).degree_condition


def test_delta_below_two_rejected():
    with pytest.raises(ValueError):
        classify(1, polygon_from_points([(1, 2)]))


staircase = st.lists(st.tuples(st.integers(0, 12), st.integers(1, 8)), min_size=1, max_size=8, unique=True)


@settings(max_examples=150, deadline=None)
@given(staircase, st.integers(2, 25))
def test_cases_partition_the_degrees(points, delta):
    P = polygon_from_points(points)
    plans = classify(delta, P)
    T = P.intercepts
    if delta in T:
        assert len(plans) == 2
        k = T.index(delta) + 1
        assert [p.k for p in plans] == [k, k + 1]
    else:
        assert len(plans) == 1
        plan = plans[0]
        expected = 1 + sum(t < delta for t in T)
        assert plan.k == expected
        if P.s == 1:
            assert plan.case == 1
        elif plan.k == 1:
            assert plan.case == 2
        elif plan.k == P.s:
            assert plan.case == 3
        else:
            assert plan.case == 4
    for plan in plans:
        assert (plan.gamma, plan.d) == P.vertex(plan.k)
        if plan.case in (2, 3) and plan.degree_ok and not plan.two_plans:
            assert lemma_violations(plan) == []
