import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import naive_eval
from skewfold import InvalidMapError, LogPoint, ParseError, Polynomial, SkewProduct, evaluate, parse_map, parse_polynomial
from skewfold.poly import log_evaluate, relative_remainder
from skewfold.classify import analyze


def test_evaluate_small_values():
    q = parse_polynomial("z^3*w^2 + z^5")
    assert evaluate(q, 1, 1) == 2
    assert evaluate(parse_polynomial("z^3*w^2"), 2, 3) == 72
    # 8 * (2i)^2 + 32 = -32 + 32
    assert evaluate(q, 2, 2j) == 0
    assert evaluate(q, 2, 2j) == complex(naive_eval([((3, 2), 1), ((5, 0), 1)], 2, 2j))


def test_parse_complex_coefficients_and_merge():
    q = parse_polynomial("(1+2i)*z^2*w - 3*w^3 + 4 + z^2*w")
    assert q.coeff(2, 1) == 2 + 2j
    assert q.coeff(0, 3) == -3
    assert q.coeff(0, 0) == 4
    assert len(q) == 3


def test_parse_error_location():
    with pytest.raises(ParseError) as err:
        parse_polynomial("z^2 + * w")
    assert err.value.line == 1 and err.value.column == 7
    with pytest.raises(ParseError) as err:
        parse_map("p = z^2\nq = w^2 +")
    assert err.value.line == 2


def test_parse_map_comments_and_separators():
    f = parse_map("# a comment\np = z^3\nq = z^3*w^2 + z^5  # trailing\n")
    assert f.delta == 3 and f.degQ == 5
    g = parse_map("p=z^3; q=z^3*w^2+z^5")
    assert str(g.q) == str(f.q)


@pytest.mark.parametrize(
    "p, q",
    [("z", "w^2"), ("z^2", "w"), ("z^2*w", "w^2"), ("z^2", "z^3"), ("z^2", "0")],
)
def test_standing_assumptions(p, q):
    with pytest.raises((InvalidMapError, ParseError)):
        SkewProduct.from_text(p, q)


def test_relative_remainder_examples():
    f = SkewProduct.from_text("z^2", "z*w^2")
    plan = analyze(f)[0]
    assert relative_remainder(f, plan, LogPoint.from_point(3 + 1j, -2)) == (0, 0)

    f = SkewProduct.from_text("z^3", "z^3*w^2 + z^5")
    plan = analyze(f)[0]
    zeta, eta = relative_remainder(f, plan, LogPoint.from_point(10, 100))
    assert zeta == 0 and eta == pytest.approx(1e-2, rel=1e-14)

    f = SkewProduct.from_text("z^3 + z", "z^3*w^2")
    plan = analyze(f)[0]
    zeta, eta = relative_remainder(f, plan, LogPoint.from_point(10, 100))
    assert zeta == pytest.approx(1e-2, rel=1e-14) and eta == 0


def test_relative_remainder_survives_huge_moduli():
    f = SkewProduct.from_text("z^3 + 2*z", "z^3*w^2 + z^5 + w")
    plan = analyze(f)[0]
    x = LogPoint(1e8 + 0.3j, 2e8 - 1j)
    zeta, eta = relative_remainder(f, plan, x)
    assert abs(zeta) < 1e-300 and abs(eta) < 1e-300


coeff = st.complex_numbers(min_magnitude=0.1, max_magnitude=5, allow_nan=False, allow_infinity=False)
term = st.tuples(st.integers(0, 4), st.integers(0, 4), coeff)


@settings(max_examples=60, deadline=None)
@given(st.lists(term, min_size=2, max_size=6), st.floats(1, 3), st.floats(1, 3), st.floats(-3, 3), st.floats(-3, 3))
def test_remainder_matches_naive_quotient(terms, lz, lw, tz, tw):
    q = Polynomial([(i, j + 1, c) for i, j, c in terms] + [(2, 3, 1.0)])
    f = SkewProduct(Polynomial([(3, 0, 1.5), (1, 0, 0.5)]), q)
    plan = analyze(f)[0]
    z = 10**lz * cmath.exp(1j * tz)
    w = 10**lw * cmath.exp(1j * tw)
    zeta, eta = relative_remainder(f, plan, LogPoint.from_point(z, w))
    b = q.coeff(plan.gamma, plan.d)
    naive_eta = evaluate(q, z, w) / (b * z ** int(plan.gamma) * w ** int(plan.d)) - 1
    naive_zeta = evaluate(f.p, z) / (1.5 * z**3) - 1
    assert abs(eta - naive_eta) <= 1e-10 * max(1.0, abs(naive_eta))
    assert abs(zeta - naive_zeta) <= 1e-10 * max(1.0, abs(naive_zeta))


@settings(max_examples=40, deadline=None)
@given(st.lists(term, min_size=1, max_size=5), st.lists(term, min_size=1, max_size=5), coeff, coeff)
def test_evaluate_is_linear_in_coefficients(t1, t2, z, w):
    a = Polynomial([(i, j, c) for i, j, c in t1])
    b = Polynomial([(i, j, c) for i, j, c in t2])
    lhs = evaluate(a + b, z, w)
    rhs = evaluate(a, z, w) + evaluate(b, z, w)
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))


def test_log_evaluate_matches_direct():
    q = parse_polynomial("z^3*w^2 + z^5 - 2*w")
    Z = np.log(np.array([3 + 4j, 10]))
    W = np.log(np.array([2 - 1j, 100j]))
    out = log_evaluate(q, Z, W)
    direct = np.array([evaluate(q, 3 + 4j, 2 - 1j), evaluate(q, 10, 100j)])
    assert np.allclose(np.exp(out), direct, rtol=1e-13)
