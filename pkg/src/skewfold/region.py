"""The invariant region near infinity: membership, a certified radius, and
sampling verifiers.

Every region shape is handled through the same pair of *product
coordinates*. With ``x = log|z|``, ``y = log|w|`` and ``kappa = 1/l2``::

    v = y - l1 * x                      (log|c|,  c = w / z**l1)
    u = (1 + kappa*l1) * x - kappa * y  (log|t|,  z = t * c**kappa)

the region is simply ``u > log R`` and ``v > log R``. A monomial
``z**a w**b`` becomes ``|t|**alpha |c|**beta`` with ``alpha = a + l1*b`` and
``beta = kappa*a + (1 + l1*kappa)*b``, so the case inequalities say that every
remainder term has ``alpha, beta <= 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .classify import INF, WeightPlan, rational_str
from .exceptions import HypothesisError
from .poly import SkewProduct, remainder_table

__all__ = [
    "RegionSpec",
    "RegionReport",
    "member",
    "estimate_R",
    "region_for_plan",
    "sample_region",
    "verify_bounds",
    "verify_invariance",
    "verify_contraction",
    "term_gap",
    "remainder_constants",
]

SHAPES = {
    1: "|z| > R, |w| > R",
    2: "|z| > R, |w| > R |z|^l1",
    3: "R < |w| < R^(-l2) |z|^l2",
    4: "R |z|^l1 < |w| < R^(-l2) |z|^(l1+l2)",
}


@dataclass(frozen=True)
class RegionSpec:
    """Parameters of the region ``U`` for one plan.

    ``margin_u`` and ``margin_v`` are extra log-margins on the two product
    coordinates (used for shrunken regions such as the injectivity region).
    ``eps`` is the bound on the remainders the radius was certified for.
    """

    R: float
    l1: Fraction
    l2: object
    case: int
    margin_u: float = 0.0
    margin_v: float = 0.0
    eps: float | None = None
    certified: bool = False
    contraction: bool = False
    plan: WeightPlan | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.R > 1:
            raise ValueError(f"R must exceed 1, got {self.R}")
        if self.case not in SHAPES:
            raise ValueError(f"unknown case {self.case}")

    @property
    def kappa(self) -> Fraction:
        return Fraction(0) if self.l2 == INF else 1 / Fraction(self.l2)

    @property
    def logR(self) -> float:
        return math.log(self.R)

    @property
    def shape(self) -> str:
        return SHAPES[self.case]

    def product_coords(self, x, y):
        k, l1 = float(self.kappa), float(self.l1)
        v = y - l1 * x
        u = (1 + k * l1) * x - k * y
        return u, v

    def from_product(self, u, v):
        k, l1 = float(self.kappa), float(self.l1)
        x = u + k * v
        y = l1 * u + (1 + l1 * k) * v
        return x, y

    def member_log(self, x, y):
        """Membership from log-moduli; vectorised over numpy arrays."""
        u, v = self.product_coords(np.asarray(x, float), np.asarray(y, float))
        r = self.logR
        with np.errstate(invalid="ignore"):
            ok = (u > r + self.margin_u) & (v > r + self.margin_v)
        return bool(ok) if np.ndim(ok) == 0 else ok

    def member(self, z, w) -> bool:
        if z == 0 or w == 0:
            return False
        return self.member_log(math.log(abs(z)), math.log(abs(w)))

    def member_lift(self, Z, W):
        return self.member_log(np.real(Z), np.real(W))

    def scaled(self, R: float) -> "RegionSpec":
        return replace(self, R=R)

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "R": self.R,
            "l1": rational_str(self.l1),
            "l2": rational_str(self.l2),
            "shape": self.shape,
            "margin_u": self.margin_u,
            "margin_v": self.margin_v,
            "eps": self.eps,
            "certified": self.certified,
        }


def member(spec: RegionSpec, z, w) -> bool:
    """Whether ``(z, w)`` lies in the region described by ``spec``."""
    return spec.member(z, w)


def region_for_plan(plan: WeightPlan, R: float, **kw) -> RegionSpec:
    return RegionSpec(R=R, l1=plan.l1, l2=plan.l2, case=plan.case, plan=plan, **kw)


# ---------------------------------------------------------------------------
# certified radius
# ---------------------------------------------------------------------------


def term_gap(plan: WeightPlan, a, b) -> tuple[Fraction, Fraction]:
    """Exponents ``(alpha, beta)`` of ``z**a w**b`` in the product coordinates."""
    a, b = Fraction(a), Fraction(b)
    k, l1 = plan.kappa, plan.l1
    return a + l1 * b, k * a + (1 + l1 * k) * b


def remainder_constants(f: SkewProduct, plan: WeightPlan):
    """Coefficient sums ``C1 = sum |a_i/a|`` and ``C2 = sum |b_ij/b|``."""
    table = remainder_table(f, plan.gamma, plan.d)
    c1 = sum(abs(c) for _, c in table.zeta_terms)
    c2 = sum(abs(c) for _, _, c in table.eta_terms)
    return c1, c2


def _radius_for_bounds(f: SkewProduct, plan: WeightPlan, eps: float) -> float:
    table = remainder_table(f, plan.gamma, plan.d)
    radius = 1.0
    groups = (
        [(e, 0, c) for e, c in table.zeta_terms],
        list(table.eta_terms),
    )
    for terms in groups:
        n = len(terms)
        for a, b, c in terms:
            alpha, beta = term_gap(plan, a, b)
            if alpha > 0 or beta > 0:
                raise HypothesisError(
                    f"term z^{a} w^{b} (relative) grows on the region; case inequalities fail"
                )
            g = -(alpha + beta)
            if g == 0:
                raise HypothesisError("a remainder term does not decay on the region")
            radius = max(radius, (n * abs(c) / eps) ** (1.0 / float(g)))
    return radius


def _invariance_log_radius(f: SkewProduct, plan: WeightPlan, eps: float, margin: float) -> float:
    """Smallest ``log R`` for which the proof's chain gives f(U) inside U.

    In product coordinates the image of ``(u, v)`` is::

        u' = (delta - k*tg) u + k (delta - td) v + E_u
        v' = tg u + td v + E_v

    with ``tg = gamma + l1 d - l1 delta``, ``td = d + k*tg`` and error terms
    bounded through ``|log|1 + x|| <= -log(1 - eps)``.
    """
    k, l1 = plan.kappa, plan.l1
    delta, gamma, d = plan.delta, plan.gamma, plan.d
    tg = gamma + l1 * d - l1 * delta
    td = d + k * tg
    cu_u, cu_v = delta - k * tg, k * (delta - td)
    if tg < 0 or cu_u <= 0 or cu_v < 0 or td <= 0:
        raise HypothesisError("case inequalities fail; the image coefficients are not positive")
    cu = float(cu_u + cu_v) - 1.0
    cv = float(tg + td) - 1.0
    if cu <= 0 or cv <= 0:
        raise HypothesisError("the region is not expanded by the monomial model (degree condition)")
    table = remainder_table(f, gamma, d)
    la, lb = abs(table.logA.real), abs(table.logB.real)
    e = -math.log1p(-eps)
    kf, l1f = float(k), float(l1)
    err_u = (1 + kf * l1f) * (la + e) + kf * (lb + e)
    err_v = lb + l1f * la + e * (1 + l1f)
    return max((err_u + margin) / cu, (err_v + margin) / cv)


def estimate_R(f: SkewProduct, plan: WeightPlan, eps: float = 0.01, contraction: bool | None = None) -> RegionSpec:
    """Radius ``R`` certifying ``|zeta|, |eta| < eps`` and ``f(U) ⊂ U``.

    Each remainder term is bounded by ``|coef| * R**(-g)`` on ``U``; the
    union bound over ``N`` terms gives ``R >= (N |coef| / eps)**(1/g)``. The
    radius is then enlarged until the invariance chain closes. When ``d = 1``
    (or ``contraction=True``) the chain is closed with an extra ``log 2`` so
    that ``f(U_R) ⊂ U_{2R}``.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if not plan.degree_ok:
        raise HypothesisError(f"degree condition fails: {plan.degree_condition}")
    if contraction is None:
        contraction = plan.d == 1
    margin = math.log(2.0) if contraction else 0.0
    r_bounds = _radius_for_bounds(f, plan, eps)
    r_inv = _invariance_log_radius(f, plan, eps, margin)
    R = max(2.0, r_bounds, math.exp(r_inv) * (1 + 1e-12))
    return region_for_plan(plan, R, eps=eps, certified=True, contraction=contraction)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def sample_region(spec: RegionSpec, n: int, seed: int = 0, span: float = 20.0):
    """Lifted sample points ``(Z, W)`` inside ``U``.

    Log-moduli are drawn in the product coordinates: half uniform over a
    window of width ``span`` above the boundary, half exponentially
    concentrated near the corner where the remainders are largest. Phases
    are uniform.
    """
    rng = np.random.default_rng(seed)
    r = spec.logR

    def offsets():
        uni = rng.uniform(0.0, span, n)
        near = np.minimum(rng.exponential(1.0, n), span)
        pick = rng.random(n) < 0.5
        out = np.where(pick, uni, near)
        return np.maximum(out, 1e-9)

    du, dv = offsets(), offsets()
    u = r + spec.margin_u + du
    v = r + spec.margin_v + dv
    x, y = spec.from_product(u, v)
    th1 = rng.uniform(-math.pi, math.pi, n)
    th2 = rng.uniform(-math.pi, math.pi, n)
    return x + 1j * th1, y + 1j * th2


@dataclass
class RegionReport:
    max_zeta: float
    max_eta: float
    violations: list
    R: float
    eps: float | None
    samples: int
    seed: int
    passed: bool
    n_violations: int = 0
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "max_zeta": self.max_zeta,
            "max_eta": self.max_eta,
            "violations": self.violations,
            "n_violations": self.n_violations,
            "R": self.R,
            "eps": self.eps,
            "samples": self.samples,
            "seed": self.seed,
            "passed": self.passed,
            **self.details,
        }


def _witness(Z, W) -> dict:
    return {"Z": [float(Z.real), float(Z.imag)], "W": [float(W.real), float(W.imag)]}


def _require_plan(spec: RegionSpec) -> WeightPlan:
    if spec.plan is None:
        raise ValueError("the region spec carries no plan; build it with estimate_R or region_for_plan")
    return spec.plan


def verify_bounds(f: SkewProduct, spec: RegionSpec, eps: float = 0.01, n_samples: int = 10_000, seed: int = 0) -> RegionReport:
    """Sampled suprema of ``|zeta|`` and ``|eta|`` over ``U``."""
    plan = _require_plan(spec)
    table = remainder_table(f, plan.gamma, plan.d)
    Z, W = sample_region(spec, n_samples, seed)
    zeta = np.abs(table.zeta(Z))
    eta = np.abs(table.eta(Z, W))
    mz, me = float(zeta.max(initial=0.0)), float(eta.max(initial=0.0))
    bad = np.flatnonzero((zeta >= eps) | (eta >= eps))
    return RegionReport(
        max_zeta=mz,
        max_eta=me,
        violations=[_witness(Z[i], W[i]) for i in bad[:20]],
        n_violations=int(bad.size),
        R=spec.R,
        eps=eps,
        samples=n_samples,
        seed=seed,
        passed=mz < eps and me < eps,
    )


def verify_invariance(f: SkewProduct, spec: RegionSpec, n_samples: int = 10_000, seed: int = 0) -> RegionReport:
    """Check ``f(x) ∈ U`` for sampled ``x ∈ U``."""
    plan = _require_plan(spec)
    table = remainder_table(f, plan.gamma, plan.d)
    Z, W = sample_region(spec, n_samples, seed)
    Zi, Wi = f.log_image(Z, W)
    inside = spec.member_log(Zi.real, Wi.real)
    bad = np.flatnonzero(~inside)
    with np.errstate(over="ignore"):
        zeta = np.abs(table.zeta(Z))
        eta = np.abs(table.eta(Z, W))
    return RegionReport(
        max_zeta=float(zeta.max(initial=0.0)),
        max_eta=float(eta.max(initial=0.0)),
        violations=[_witness(Z[i], W[i]) for i in bad[:20]],
        n_violations=int(bad.size),
        R=spec.R,
        eps=spec.eps,
        samples=n_samples,
        seed=seed,
        passed=bad.size == 0,
    )


def verify_contraction(f: SkewProduct, spec: RegionSpec, n_steps: int = 8, n_samples: int = 1000, seed: int = 0) -> RegionReport:
    """Check ``f^n(x) ∈ U_{2^n R}`` for ``n <= n_steps`` (the ``d = 1`` regime)."""
    plan = _require_plan(spec)
    if plan.d != 1:
        raise ValueError("the contraction check applies to d = 1 only")
    if not plan.degree_ok:
        raise HypothesisError(f"degree condition fails: {plan.degree_condition}")
    Z, W = sample_region(spec, n_samples, seed)
    failed = np.zeros(n_samples, dtype=bool)
    first_fail = {}
    for n in range(1, n_steps + 1):
        Z, W = f.log_image(Z, W)
        ok = spec.scaled(spec.R * 2.0**n).member_log(Z.real, W.real)
        newly = ~ok & ~failed
        if newly.any():
            first_fail[n] = int(newly.sum())
        failed |= ~ok
    bad = np.flatnonzero(failed)
    return RegionReport(
        max_zeta=float("nan"),
        max_eta=float("nan"),
        violations=[_witness(Z[i], W[i]) for i in bad[:20]],
        n_violations=int(bad.size),
        R=spec.R,
        eps=spec.eps,
        samples=n_samples,
        seed=seed,
        passed=bad.size == 0,
        details={"n_steps": n_steps, "first_failure_counts": {str(k): v for k, v in first_fail.items()}},
    )
