"""Blow-ups and branched coverings as exact monomial substitutions.

Every substitution ``pi`` acts on log-moduli linearly: old ``(X, Y)`` equals
``M @ (A, C)`` for new coordinates ``(A, C)``. The transformed map
``pi^-1 o f o pi`` then has dominant exponent matrix ``M^-1 @ L @ M`` with
``L = [[delta, 0], [gamma, d]]``; rows are the two coordinates. Each monomial
of ``q`` contributes the exponent row ``m22 * (i, j) @ M + m21 * (delta, 0) @ M``
to the new second coordinate, where ``(m21, m22)`` is the second row of
``M^-1``. Nothing is ever expanded into polynomials with fractional powers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import numpy as np

from .classify import WeightPlan, classify, rational_str
from .newton import NewtonPolygon, polygon_from_points
from .poly import SkewProduct, log_evaluate, remainder_table
from .region import RegionSpec, sample_region

__all__ = [
    "MonomialSubstitution",
    "TransformedMap",
    "pushforward",
    "verify_normal_form",
    "intermediate_case_check",
    "intermediate_plans",
    "lemma_checks",
    "consistency_residual",
]

Matrix = tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]


def _mul(A, B) -> Matrix:
    return tuple(
        tuple(sum(A[i][k] * B[k][j] for k in range(2)) for j in range(2)) for i in range(2)
    )


def _inv(A) -> Matrix:
    det = A[0][0] * A[1][1] - A[0][1] * A[1][0]
    return ((A[1][1] / det, -A[0][1] / det), (-A[1][0] / det, A[0][0] / det))


def _row_times(v, A):
    return tuple(v[0] * A[0][j] + v[1] * A[1][j] for j in range(2))


def _is_int(x) -> bool:
    return Fraction(x).denominator == 1


@dataclass(frozen=True)
class MonomialSubstitution:
    """One of the four substitutions.

    ``blowup1``: ``(z, c) -> (z, z**l c)``; ``blowup2``: ``(t, w) -> (t w**(1/l), w)``;
    ``cover1``: ``(z, c) -> (z**r, z**s c)``; ``cover2``: ``(t, w) -> (t w**r, w**s)``.
    For blow-ups ``r, s`` hold the weight ``l`` as ``s/r`` in lowest terms.
    """

    kind: str
    r: int
    s: int

    def __post_init__(self):
        if self.kind not in ("blowup1", "blowup2", "cover1", "cover2"):
            raise ValueError(f"unknown substitution kind {self.kind!r}")
        if self.r <= 0 or self.s <= 0:
            raise ValueError("r and s must be positive")
        if gcd(self.r, self.s) != 1:
            raise ValueError(f"r = {self.r} and s = {self.s} must be coprime")

    @classmethod
    def blowup1(cls, l) -> "MonomialSubstitution":
        l = Fraction(l)
        return cls("blowup1", l.denominator, l.numerator)

    @classmethod
    def blowup2(cls, l2) -> "MonomialSubstitution":
        l2 = Fraction(l2)
        return cls("blowup2", l2.denominator, l2.numerator)

    @classmethod
    def cover1(cls, r: int, s: int) -> "MonomialSubstitution":
        return cls("cover1", r, s)

    @classmethod
    def cover2(cls, r: int, s: int) -> "MonomialSubstitution":
        return cls("cover2", r, s)

    @property
    def weight(self) -> Fraction:
        """The region weight this substitution straightens."""
        return Fraction(self.s, self.r)

    @property
    def side(self) -> int:
        """1 for the lower bound ``|w| > R |z|^l``, 2 for the upper one."""
        return 1 if self.kind in ("blowup1", "cover1") else 2

    @property
    def matrix(self) -> Matrix:
        one, zero = Fraction(1), Fraction(0)
        if self.kind == "blowup1":
            return ((one, zero), (self.weight, one))
        if self.kind == "blowup2":
            return ((one, 1 / self.weight), (zero, one))
        if self.kind == "cover1":
            return ((Fraction(self.r), zero), (Fraction(self.s), one))
        return ((one, Fraction(self.r)), (zero, Fraction(self.s)))

    def __str__(self):
        if self.kind.startswith("blowup"):
            return f"{self.kind}(l={rational_str(self.weight)})"
        return f"{self.kind}(r={self.r}, s={self.s})"


@dataclass(frozen=True)
class TransformedMap:
    """Exponent data of ``pi^-1 o f o pi``.

    ``first_dominant`` and ``second_dominant`` are the exponent rows of the
    two coordinates' monomial parts. ``second_terms`` lists the exponent of
    every monomial of ``q`` in the new second coordinate (the dominant one
    included); ``polygon`` is their Newton polygon.
    """

    f: SkewProduct
    plan: WeightPlan
    stages: tuple[MonomialSubstitution, ...]
    matrix: Matrix
    first_dominant: tuple[Fraction, Fraction]
    second_dominant: tuple[Fraction, Fraction]
    second_terms: tuple[tuple[tuple[Fraction, Fraction], complex], ...]
    polygon: NewtonPolygon
    well_defined: bool
    reason: str
    region: str
    formal: bool = field(default=False)

    @property
    def sub(self) -> MonomialSubstitution:
        return self.stages[-1]

    @property
    def stage(self) -> int:
        return len(self.stages)

    @property
    def dominant_matrix(self) -> Matrix:
        return (self.first_dominant, self.second_dominant)

    def to_dict(self) -> dict:
        def pair(p):
            return [rational_str(p[0]), rational_str(p[1])]

        return {
            "kind": self.sub.kind,
            "r": self.sub.r,
            "s": self.sub.s,
            "stage": self.stage,
            "stages": [str(s) for s in self.stages],
            "well_defined": self.well_defined,
            "reason": self.reason,
            "formal": self.formal,
            "dominant_exponents": {
                "first": pair(self.first_dominant),
                "second": pair(self.second_dominant),
            },
            "polygon": self.polygon.to_dict(),
            "region": self.region,
        }


# ---------------------------------------------------------------------------
# region shapes of pi^-1(U)
# ---------------------------------------------------------------------------


def _region_text(plan: WeightPlan, stages) -> str:
    sub = stages[-1]
    if len(stages) == 2:
        first = stages[0]
        if sub.kind == "blowup2" and first.kind == "blowup1":
            return "|t| > R, |c| > R"
        r1, s1, r2 = first.r, first.s, sub.r
        power = rational_str((1 - Fraction(1, r1)) * r2)
        return f"|t c^({power})| > R^(1/{r1}), |c| > R^(1/{s1})"
    if plan.case == 4:
        if sub.kind == "blowup1":
            return f"|z| > R |c|^(1/{rational_str(plan.l2)}), |c| > R"
        return f"|z|^({sub.r} l2) > R^(l2) |c|, |c| > R"
    return {
        "blowup1": "|z| > R, |c| > R",
        "blowup2": "|t| > R, |w| > R",
        "cover1": f"|z| > R^(1/{sub.r}), |c| > R",
        "cover2": f"|t| > R, |w| > R^(1/{sub.s})",
    }[sub.kind]


# ---------------------------------------------------------------------------
# pushforward
# ---------------------------------------------------------------------------


def _gates(plan: WeightPlan, stages, base: "TransformedMap | None") -> list[str]:
    """Violated well-definedness conditions (empty when well defined)."""
    sub = stages[-1]
    l = sub.weight
    bad = []
    if sub.kind == "blowup1" and not (_is_int(l) and l >= 1):
        bad.append(f"l1 = {rational_str(l)} is not in N")
    if sub.kind == "blowup2" and not (_is_int(1 / l) and l <= 1):
        bad.append(f"1/l2 = {rational_str(1 / l)} is not in N")

    if base is None:
        iv = plan.interval[0] if plan.case == 4 else plan.interval
        if not iv.contains(l):
            bad.append(f"weight {rational_str(l)} is not in the interval {iv}")
        if sub.kind == "cover2":
            g = plan.gamma / sub.s
            if not (_is_int(g) and g >= 1):
                bad.append(f"gamma/s = {rational_str(g)} is not in N")
        return bad

    # second stage: the stage-one map is a Case 3 map in its own coordinates
    tg = base.second_dominant[0]
    own = [
        p for p in intermediate_plans(base)
        if p.case == 3 and (p.gamma, p.d) == base.second_dominant
    ]
    if not own:
        bad.append("the stage-one map is not in Case 3")
    elif not own[0].interval.contains(l):
        bad.append(f"weight {rational_str(l)} is not in the stage-two interval {own[0].interval}")
    if sub.kind == "cover2":
        g = tg / sub.s
        if not (_is_int(g) and g >= 0):
            bad.append(f"tilde_gamma/s2 = {rational_str(g)} is not in N ∪ {{0}}")
    return bad


def pushforward(f: SkewProduct, plan: WeightPlan, sub: MonomialSubstitution, base: TransformedMap | None = None) -> TransformedMap:
    """Transform ``f`` (or a stage-one result ``base``) by ``sub``.

    Stage one takes ``blowup1``/``cover1`` in Cases 2 and 4 and
    ``blowup2``/``cover2`` in Case 3. Stage two (``base`` given) is only
    defined for Case 4 and takes ``blowup2``/``cover2``.
    """
    if base is None:
        allowed = {2: ("blowup1", "cover1"), 3: ("blowup2", "cover2"), 4: ("blowup1", "cover1")}
        if sub.kind not in allowed.get(plan.case, ()):
            raise ValueError(f"{sub.kind} does not apply to a Case {plan.case} plan at stage one")
        stages = (sub,)
        M = sub.matrix
    else:
        if plan.case != 4 or base.stage != 1:
            raise ValueError("a second stage only follows a Case 4 stage-one transform")
        if sub.kind not in ("blowup2", "cover2"):
            raise ValueError(f"{sub.kind} cannot be the second stage")
        stages = base.stages + (sub,)
        M = _mul(base.matrix, sub.matrix)

    delta, gamma, d = Fraction(plan.delta), plan.gamma, plan.d
    L = ((delta, Fraction(0)), (gamma, d))
    Mi = _inv(M)
    D = _mul(Mi, _mul(L, M))
    m21, m22 = Mi[1]
    p_row = _row_times((delta, Fraction(0)), M)
    terms = []
    for mono in f.q.monomials:
        row = _row_times((mono.i, mono.j), M)
        terms.append(((m22 * row[0] + m21 * p_row[0], m22 * row[1] + m21 * p_row[1]), mono.coeff))
    polygon = polygon_from_points([e for e, _ in terms])

    bad = _gates(plan, stages, base)
    exps = [x for row in D for x in row] + [x for e, _ in terms for x in e]
    formal = not all(_is_int(x) for x in exps)
    return TransformedMap(
        f=f,
        plan=plan,
        stages=stages,
        matrix=M,
        first_dominant=D[0],
        second_dominant=D[1],
        second_terms=tuple(terms),
        polygon=polygon,
        well_defined=not bad,
        reason="; ".join(bad) if bad else "ok",
        region=_region_text(plan, stages),
        formal=formal,
    )


def verify_normal_form(t: TransformedMap) -> bool:
    """True iff the transformed polygon is the single vertex ``second_dominant``."""
    return t.polygon.s == 1 and t.polygon.vertices[0] == t.second_dominant


def intermediate_plans(t: TransformedMap) -> list[WeightPlan]:
    """Classification of a stage-one result, read as a skew product in ``(z, c)``."""
    return classify(t.plan.delta, t.polygon)


def intermediate_case_check(t: TransformedMap) -> bool:
    """Whether a Case 4 stage-one result is a Case 3 map with top vertex ``(tilde_gamma, d)``.

    Also requires the last intercept of the new polygon to sit on the same
    side of ``delta`` as ``T_{k-1}`` of the original (equality included).
    Any other input (e.g. a Case 2 stage-one map, which lands in Case 1)
    returns False.
    """
    if t.stage != 1 or t.plan.case != 4:
        return False
    plans = intermediate_plans(t)
    hit = [p for p in plans if p.case == 3 and (p.gamma, p.d) == t.second_dominant]
    if not hit:
        return False
    delta = t.plan.delta
    before = t.plan.polygon.T(t.plan.k - 1)
    after = t.polygon.intercepts[-1]

    def sign(x):
        return (x > delta) - (x < delta)

    return sign(before) == sign(after)


def lemma_checks(t: TransformedMap) -> dict[str, bool]:
    """The exact inequalities the transformed dominant term must satisfy."""
    g, dd = t.second_dominant
    others = [e for e, _ in t.second_terms]
    out = {}
    if t.plan.case in (2, 4) and t.stage == 1 or t.plan.case == 4:
        out["gamma_dominates"] = all(g >= i for i, _ in others)
        if t.stage == 1:
            out["gamma_nonnegative"] = g >= 0
    if t.plan.case == 3 or t.stage == 2:
        out["d_dominates"] = all(dd >= j for _, j in others)
    return out


# ---------------------------------------------------------------------------
# numerical consistency
# ---------------------------------------------------------------------------


def _nearest_branch(value, target):
    k = np.round((value.imag - target.imag) / (2 * math.pi))
    return value - 2j * math.pi * k


def consistency_residual(f: SkewProduct, t: TransformedMap, spec: RegionSpec, n_samples: int = 100, seed: int = 0) -> float:
    """Max of ``|f~ / monomial - 1|`` over samples of ``pi^-1(U)``.

    ``f`` is evaluated term by term at ``pi(x)``; its logarithms are put on
    the branch continuing the dominant term and mapped through ``pi^-1``.
    The result is compared with the symbolic dominant monomials.
    """
    table = remainder_table(f, t.plan.gamma, t.plan.d)
    X, Y = sample_region(spec, n_samples, seed)
    M = [[float(x) for x in row] for row in t.matrix]
    Mi = [[float(x) for x in row] for row in _inv(t.matrix)]
    A = Mi[0][0] * X + Mi[0][1] * Y
    C = Mi[1][0] * X + Mi[1][1] * Y
    # pi(A, C) reproduces (X, Y)
    X = M[0][0] * A + M[0][1] * C
    Y = M[1][0] * A + M[1][1] * C
    delta, gamma, d = t.plan.delta, float(t.plan.gamma), float(t.plan.d)
    Xp = _nearest_branch(log_evaluate(f.p, X), delta * X + table.logA)
    Yp = _nearest_branch(log_evaluate(f.q, X, Y), gamma * X + d * Y + table.logB)
    newA = Mi[0][0] * Xp + Mi[0][1] * Yp
    newC = Mi[1][0] * Xp + Mi[1][1] * Yp
    D = [[float(x) for x in row] for row in t.dominant_matrix]
    cA = Mi[0][0] * table.logA + Mi[0][1] * table.logB
    cC = Mi[1][0] * table.logA + Mi[1][1] * table.logB
    predA = D[0][0] * A + D[0][1] * C + cA
    predC = D[1][0] * A + D[1][1] * C + cC
    with np.errstate(over="ignore"):
        r = np.maximum(np.abs(np.expm1(newA - predA)), np.abs(np.expm1(newC - predC)))
    return float(r.max(initial=0.0))
