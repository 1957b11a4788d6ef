"""Case selection from the degree of p and the Newton polygon of q.

The four cases are decided by comparing ``delta = deg p`` with the edge
intercepts ``T_k``. Each outcome is a :class:`WeightPlan` holding the
dominant exponents ``(gamma, d)``, the weights ``l1`` and ``l2`` (``l2`` may
be ``math.inf``), ``alpha0 = gamma / (delta - d)`` and the admissible weight
intervals. Everything here is exact rational arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Union

from .newton import NewtonPolygon, newton_polygon
from .poly import Polynomial, SkewProduct

__all__ = [
    "INF",
    "Interval",
    "WeightPlan",
    "classify",
    "analyze",
    "interval",
    "second_interval",
    "validate_weight",
    "l1_star",
    "lemma_violations",
    "select_plan",
    "rational_str",
]

INF = math.inf
Extended = Union[Fraction, float]


def rational_str(x) -> str | None:
    """Serialize an extended rational as ``"p/q"``, ``"inf"`` or ``None``."""
    if x is None:
        return None
    if x == INF:
        return "inf"
    if x == -INF:
        return "-inf"
    return str(Fraction(x))


def _inv(l2: Extended) -> Fraction:
    return Fraction(0) if l2 == INF else 1 / Fraction(l2)


@dataclass(frozen=True)
class Interval:
    """An interval of weights with open or closed ends; ``hi`` may be ``INF``."""

    lo: Extended
    hi: Extended
    lo_closed: bool = True
    hi_closed: bool = True
    #: set when the interval is a convention rather than a derived quantity
    conventional: bool = False

    def __post_init__(self):
        if self.hi == INF:
            object.__setattr__(self, "hi_closed", False)
        if self.lo == -INF:
            object.__setattr__(self, "lo_closed", False)

    def contains(self, x) -> bool:
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and not self.lo_closed:
            return False
        if x == self.hi and not self.hi_closed:
            return False
        return True

    __contains__ = contains

    @property
    def is_empty(self) -> bool:
        if self.lo > self.hi:
            return True
        return self.lo == self.hi and not (self.lo_closed and self.hi_closed)

    def intersect(self, other: "Interval") -> "Interval":
        if self.lo > other.lo:
            lo, lo_c = self.lo, self.lo_closed
        elif self.lo < other.lo:
            lo, lo_c = other.lo, other.lo_closed
        else:
            lo, lo_c = self.lo, self.lo_closed and other.lo_closed
        if self.hi < other.hi:
            hi, hi_c = self.hi, self.hi_closed
        elif self.hi > other.hi:
            hi, hi_c = other.hi, other.hi_closed
        else:
            hi, hi_c = self.hi, self.hi_closed and other.hi_closed
        return Interval(lo, hi, lo_c, hi_c, self.conventional or other.conventional)

    def __str__(self):
        if self.lo == self.hi and self.lo_closed and self.hi_closed:
            return "{" + rational_str(self.lo) + "}"
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{rational_str(self.lo)}, {rational_str(self.hi)}{right}"

    def to_dict(self) -> dict:
        return {
            "lo": rational_str(self.lo),
            "hi": rational_str(self.hi),
            "lo_closed": self.lo_closed,
            "hi_closed": self.hi_closed,
            "text": str(self),
        }


_POSITIVE = Interval(Fraction(0), INF, lo_closed=False)


@dataclass(frozen=True)
class WeightPlan:
    """One classification outcome.

    ``k`` is the 1-based index of the dominant vertex. ``interval`` is a
    single :class:`Interval` for Cases 1-3 and the pair
    ``(I1, I2(l1))`` for Case 4.
    """

    case: int
    k: int
    delta: int
    gamma: Fraction
    d: Fraction
    l1: Fraction
    l2: Extended
    alpha0: Fraction | None
    interval: Interval | tuple[Interval, Interval]
    degree_ok: bool
    M: Fraction
    l1_star: Fraction | None = None
    tilde_gamma: Fraction | None = None
    tilde_d: Fraction | None = None
    two_plans: bool = False
    polygon: NewtonPolygon | None = field(default=None, repr=False, compare=False)

    @property
    def kappa(self) -> Fraction:
        """``1/l2``, zero when ``l2`` is infinite."""
        return _inv(self.l2)

    @property
    def outer_weight(self) -> Extended:
        """``l1 + l2``."""
        return INF if self.l2 == INF else self.l1 + self.l2

    @property
    def degree_condition(self) -> str:
        if self.degree_ok:
            return "ok"
        if self.d < 1:
            return f"d = {self.d} < 1: the dominant term does not involve w"
        return "d = 1 and delta = T_k for some k; the hypothesis requires delta != T_k for every k"

    def to_dict(self) -> dict:
        if isinstance(self.interval, tuple):
            iv = [self.interval[0].to_dict(), self.interval[1].to_dict()]
        else:
            iv = self.interval.to_dict()
        out = {
            "case": self.case,
            "k": self.k,
            "gamma": rational_str(self.gamma),
            "d": rational_str(self.d),
            "l1": rational_str(self.l1),
            "l2": rational_str(self.l2),
            "alpha0": rational_str(self.alpha0) if self.alpha0 is not None else "undefined",
            "interval": iv,
            "degree_ok": self.degree_ok,
            "M": rational_str(self.M),
            "two_plans": self.two_plans,
        }
        if self.case in (1, 2):
            out["l1_star"] = rational_str(self.l1_star) if self.l1_star is not None else "does not exist"
        if self.case == 4:
            out["tilde_gamma"] = rational_str(self.tilde_gamma)
            out["tilde_d"] = rational_str(self.tilde_d)
        return out


# ---------------------------------------------------------------------------
# case selection
# ---------------------------------------------------------------------------


def _case_of_vertex(s: int, v: int) -> int:
    if s == 1:
        return 1
    if v == 1:
        return 2
    if v == s:
        return 3
    return 4


def _weights(P: NewtonPolygon, case: int, v: int) -> tuple[Fraction, Extended]:
    w = P.edge_weights  # w[k-1] = (n_{k+1} - n_k) / (m_k - m_{k+1})
    if case == 1:
        return Fraction(0), INF
    if case == 2:
        return w[0], INF
    if case == 3:
        return Fraction(0), w[-1]
    l1 = w[v - 1]
    return l1, w[v - 2] - l1


def _degree_ok(delta: int, d: Fraction, P: NewtonPolygon) -> bool:
    if d >= 2:
        return True
    return d == 1 and all(t != delta for t in P.intercepts)


def _plan_for_vertex(delta: int, P: NewtonPolygon, v: int, two: bool) -> WeightPlan:
    case = _case_of_vertex(P.s, v)
    gamma, d = P.vertex(v)
    l1, l2 = _weights(P, case, v)
    alpha0 = gamma / (delta - d) if delta != d else None
    tilde_gamma = tilde_d = None
    M = Fraction(1)
    if case == 4:
        tilde_gamma = gamma + l1 * d - l1 * delta
        tilde_d = tilde_gamma / l2 + d
        gaps = [
            (gamma + l1 * d) - (i + l1 * j)
            for i, j in (P.points or P.vertices)
        ]
        positive = [g for g in gaps if g > 0]
        M = min(min(positive), Fraction(1)) if positive else Fraction(1)
    plan = WeightPlan(
        case=case,
        k=v,
        delta=delta,
        gamma=gamma,
        d=d,
        l1=l1,
        l2=l2,
        alpha0=alpha0,
        interval=_POSITIVE,
        degree_ok=_degree_ok(delta, d, P),
        M=M,
        tilde_gamma=tilde_gamma,
        tilde_d=tilde_d,
        two_plans=two,
        polygon=P,
    )
    plan = replace(plan, interval=interval(plan, delta, P))
    if case in (1, 2) and P.points:
        plan = replace(plan, l1_star=_l1_star_from_points(delta, gamma, d, P.points))
    return plan


def classify(delta: int, P: NewtonPolygon) -> list[WeightPlan]:
    """All applicable plans: one, or two when ``delta`` equals an intercept."""
    delta = int(delta)
    if delta < 2:
        raise ValueError("delta must be at least 2")
    s = P.s
    if s == 1:
        return [_plan_for_vertex(delta, P, 1, False)]
    T = P.intercepts
    for k, t in enumerate(T, start=1):
        if t == delta:
            return [_plan_for_vertex(delta, P, k, True), _plan_for_vertex(delta, P, k + 1, True)]
    if delta < T[0]:
        return [_plan_for_vertex(delta, P, 1, False)]
    if delta > T[-1]:
        return [_plan_for_vertex(delta, P, s, False)]
    for k in range(2, s):
        if T[k - 2] < delta < T[k - 1]:
            return [_plan_for_vertex(delta, P, k, False)]
    raise AssertionError("intercepts are not increasing")  # pragma: no cover


def analyze(f: SkewProduct) -> list[WeightPlan]:
    """Classify a skew product directly."""
    return classify(f.delta, newton_polygon(f.q))


def select_plan(plans: list[WeightPlan], plan_index: int | None = None) -> WeightPlan:
    """Pick a plan, insisting on an explicit index at a two-plan boundary."""
    if len(plans) == 1:
        if plan_index not in (None, 0):
            raise IndexError("only one plan applies; plan index must be 0")
        return plans[0]
    if plan_index is None:
        desc = "; ".join(f"[{n}] Case {p.case}, vertex {p.k} (gamma, d) = ({p.gamma}, {p.d})" for n, p in enumerate(plans))
        raise ValueError(f"delta equals an intercept, so two plans apply: {desc}; choose one explicitly")
    if plan_index not in (0, 1):
        raise IndexError("plan index must be 0 or 1")
    return plans[plan_index]


# ---------------------------------------------------------------------------
# weight intervals
# ---------------------------------------------------------------------------


def interval(plan: WeightPlan, delta=None, P=None):
    """Admissible weights for the plan.

    Case 2 gives ``[l1, alpha0]`` (``[l1, inf)`` when delta <= d), Case 3
    ``[alpha0, l2]``. Case 4 gives the pair ``(I1, I2(l1))``. Case 1 has no
    derived interval; the conventional ``[0, inf)`` is returned, flagged.
    """
    delta = plan.delta if delta is None else delta
    if plan.case == 1:
        return Interval(Fraction(0), INF, conventional=True)
    if plan.case == 2:
        if delta > plan.d:
            return Interval(plan.l1, plan.alpha0)
        return Interval(plan.l1, INF)
    if plan.case == 3:
        return Interval(plan.alpha0, plan.l2)
    first = Interval(plan.l1, plan.l1 + plan.l2, True, False).intersect(
        Interval(Fraction(0), plan.alpha0, False, True)
    )
    return first, second_interval(plan, plan.l1)


def second_interval(plan: WeightPlan, l_first) -> Interval:
    """Case 4 interval for the second weight given the first weight."""
    if plan.case != 4:
        raise ValueError("the second weight interval only exists in Case 4")
    l_first = Fraction(l_first)
    return Interval(plan.alpha0 - l_first, plan.l1 + plan.l2 - l_first).intersect(_POSITIVE)


def _points(plan: WeightPlan, q: Polynomial | None):
    if q is not None:
        return q.exponents
    if plan.polygon is not None and plan.polygon.points:
        return plan.polygon.points
    raise ValueError("monomials of q are required")


def validate_weight(l, plan: WeightPlan, q: Polynomial | None = None, l_second=None) -> bool:
    """Check the defining inequalities of the weight set monomial by monomial.

    For Case 4, ``l`` is the first weight; pass ``l_second`` to also test the
    second weight against the first.
    """
    l = Fraction(l)
    if l <= 0 and plan.case != 1:
        return False
    g, d, delta = plan.gamma, plan.d, plan.delta
    pts = _points(plan, q)
    if plan.case in (1, 2):
        return all(g + l * d >= i + l * j for i, j in pts) and g + l * d >= l * delta
    if plan.case == 3:
        return l * delta >= g + l * d and all(g + l * d >= i + l * j for i, j in pts)
    verts = plan.polygon.vertices if plan.polygon is not None else None
    if verts is None:
        raise ValueError("Case 4 validation needs the Newton polygon")
    # strict against the vertices before k (equality there would make the
    # transformed dominant term tie with an earlier vertex), non-strict
    # against everything else
    k = plan.k
    ok = g + l * d >= l * delta
    ok = ok and all(g + l * d >= i + l * j for i, j in pts)
    ok = ok and all(g + l * d > n + l * m for n, m in verts[: k - 1])
    if not ok or l_second is None:
        return ok
    l2 = Fraction(l_second)
    if l2 <= 0:
        return False
    tg = g + l * d - l * delta
    if not l2 * delta >= tg + l2 * d:
        return False
    return all(tg + l2 * d >= (i + l * j - l * delta) + l2 * j for i, j in pts)


# ---------------------------------------------------------------------------
# larger regions for Cases 1 and 2
# ---------------------------------------------------------------------------


def _l1_star_from_points(delta, gamma, d, points) -> Fraction | None:
    lower: list[Fraction] = []
    upper: list[Fraction] = []
    for i, j in points:
        # gamma + l d >= i + l j  <=>  l (d - j) >= i - gamma
        if j < d:
            lower.append((i - gamma) / (d - j))
        elif j > d:
            upper.append((gamma - i) / (j - d))
        elif i > gamma:
            return None
    # gamma + l d >= l delta  <=>  l (delta - d) <= gamma
    if delta > d:
        upper.append(gamma / (delta - d))
    elif delta < d:
        lower.append(gamma / (delta - d))
    elif gamma < 0:
        return None
    if not lower:
        return None  # unbounded below
    value = max(lower)
    if upper and value > min(upper):
        return None  # empty
    return value


def l1_star(delta, q: Polynomial) -> Fraction | None:
    """Infimum of the weights ``l`` admissible for the enlarged region.

    Returns ``None`` when the constraint set is empty or unbounded below.
    When finite the infimum is a maximum of finitely many closed constraints,
    so it is always attained.
    """
    P = newton_polygon(q)
    plans = classify(delta, P)
    plan = next((p for p in plans if p.case in (1, 2)), None)
    if plan is None:
        raise ValueError("l1_star is only defined for Cases 1 and 2")
    return _l1_star_from_points(int(delta), plan.gamma, plan.d, P.points)


# ---------------------------------------------------------------------------
# inequality checks
# ---------------------------------------------------------------------------


def lemma_violations(plan: WeightPlan, q: Polynomial | None = None) -> list[str]:
    """Exact check of the case inequalities; returns human-readable failures."""
    g, d, delta, l1, l2 = plan.gamma, plan.d, plan.delta, plan.l1, plan.l2
    pts = _points(plan, q)
    bad = []

    def need(cond, text):
        if not cond:
            bad.append(text)

    if plan.case in (2, 4):
        need(g + l1 * d >= l1 * delta, "gamma + l1 d >= l1 delta")
        for i, j in pts:
            need(g + l1 * d >= i + l1 * j, f"gamma + l1 d >= i + l1 j at ({i}, {j})")
    if plan.case == 3:
        need(l2 * delta >= g + l2 * d, "l2 delta >= gamma + l2 d")
        for i, j in pts:
            need(g + l2 * d >= i + l2 * j, f"gamma + l2 d >= i + l2 j at ({i}, {j})")
    if plan.case == 4:
        lo = l1 + l2
        need(lo * delta >= g + lo * d, "(l1 + l2) delta >= gamma + (l1 + l2) d")
        for i, j in pts:
            need(g + lo * d >= i + lo * j, f"gamma + (l1+l2) d >= i + (l1+l2) j at ({i}, {j})")
        tg, td = plan.tilde_gamma, plan.tilde_d
        need(tg >= 0, "tilde gamma >= 0")
        need(l2 * delta >= tg + l2 * d, "l2 delta >= tilde gamma + l2 d")
        for i, j in pts:
            ti = i + l1 * j - l1 * delta
            tj = ti / l2 + j
            need(tg >= ti, f"tilde gamma >= tilde i at ({i}, {j})")
            need(td >= tj, f"tilde d >= tilde j at ({i}, {j})")
    if plan.case == 1:
        for i, j in pts:
            need(i <= g and j <= d, f"({i}, {j}) not dominated by the single vertex")
    return bad
