"""Independent reference implementations used only by the tests.

None of these share code paths with the library beyond parsing.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product

import mpmath


def brute_force_vertices(points, span: int = 41):
    """Extreme points of the upper-right hull by scanning normal directions.

    A point is a vertex iff it is the unique maximiser of ``a*i + b*j`` for
    some ``a, b > 0``. With exponents below 20 every normal cone contains an
    integer direction with entries below 41; the two near-axis directions
    pick the extreme points on each end. Each hit is then confirmed by an
    exact chord test against its neighbours.
    """
    pts = sorted({(int(i), int(j)) for i, j in points})
    dirs = [(a, b) for a, b in product(range(1, span), repeat=2)]
    dirs += [(10**6, 1), (1, 10**6)]
    found = set()
    for a, b in dirs:
        vals = [a * i + b * j for i, j in pts]
        top = max(vals)
        hits = [p for p, v in zip(pts, vals) if v == top]
        if len(hits) == 1:
            found.add(hits[0])
    verts = sorted(found)
    for k in range(1, len(verts) - 1):
        (x0, y0), (x1, y1), (x2, y2) = verts[k - 1], verts[k], verts[k + 1]
        chord = Fraction(y0) + Fraction(y2 - y0, x2 - x0) * (x1 - x0)
        assert y1 > chord, "chord test failed for a direction-scan vertex"
    return verts


def naive_eval(terms, z, w=0):
    """``sum c z^i w^j`` term by term in mpmath."""
    z, w = mpmath.mpc(z), mpmath.mpc(w)
    return mpmath.fsum(mpmath.mpc(c) * z**i * w**j for (i, j), c in terms)


def product_formula_phi(p_terms, q_terms, delta, gamma, d, a, b, z, w, n, dps: int = 80):
    """``f0^-n o f^n`` evaluated by iterating ``f`` directly at high precision.

    ``f^n(z, w)`` is computed with plain polynomial evaluation (the numbers
    get astronomically large, which mpmath handles). The logarithm of each
    orbit point is taken on the branch nearest to the monomial prediction
    ``(delta Z + log a, gamma Z + d W + log b)``; since the remainders are
    below one in modulus this is the continuous branch. ``f0^-n`` is then
    applied in closed form.
    """
    with mpmath.workdps(dps):
        two_pi = 2 * mpmath.pi
        la, lb = mpmath.log(mpmath.mpc(a)), mpmath.log(mpmath.mpc(b))

        def nearest(value, target):
            return value - 1j * two_pi * mpmath.nint((value - target).imag / two_pi)

        zk, wk = mpmath.mpc(z), mpmath.mpc(w)
        Zk, Wk = mpmath.log(zk), mpmath.log(wk)
        Z0, W0 = Zk, Wk
        for _ in range(n):
            zk, wk = naive_eval(p_terms, zk), naive_eval(q_terms, zk, wk)
            Zk, Wk = (
                nearest(mpmath.log(zk), delta * Zk + la),
                nearest(mpmath.log(wk), gamma * Zk + d * Wk + lb),
            )
        # f0^n(Z, W) = (delta^n Z + c1, gamma_n Z + d^n W + c2)
        c1 = c2 = mpmath.mpc(0)
        gam = 0
        for k in range(n):
            c1, c2 = delta * c1 + la, gamma * c1 + d * c2 + lb
            gam = delta * gam + d**k * gamma
        P1 = (Zk - c1) / delta**n
        P2 = (Wk - c2 - gam * P1) / d**n
        assert abs(P1 - Z0) < 1 and abs(P2 - W0) < 1
        return complex(P1), complex(P2)


def gamma_n_sum(delta, d, gamma, n):
    """``sum_{j=1..n} delta^(n-j) d^(j-1) gamma`` summed literally."""
    return sum(delta ** (n - j) * d ** (j - 1) * gamma for j in range(1, n + 1))


def grid_l1_star(delta, gamma, d, points, lo=-40, hi=40, den=240):
    """Smallest grid rational satisfying the enlarged-region inequalities.

    Returns ``None`` when the smallest admissible grid point is the grid's
    lower end (unbounded below) or nothing is admissible.
    """
    gamma, d = Fraction(gamma), Fraction(d)

    def ok(l):
        return all(gamma + l * d >= i + l * j for i, j in points) and gamma + l * d >= l * delta

    first = None
    for k in range(lo * den, hi * den + 1):
        l = Fraction(k, den)
        if ok(l):
            first = l
            break
    if first is None or first == lo:
        return None
    return first


def T_iterate(delta, d, gamma, l, n):
    """``T^n(l)`` by literally composing ``T(l) = (delta l - gamma)/d``."""
    l = Fraction(l)
    for _ in range(n):
        l = (delta * l - gamma) / Fraction(d)
    return l
