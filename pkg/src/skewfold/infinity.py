"""Behaviour at infinity: the rational extension on the projective plane
and on weighted projective planes, the union of preimages of ``U`` under
the monomial model, and a sampled check of the critical-set precondition
for extending the inverse Böttcher map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

import numpy as np

from .classify import INF, WeightPlan, rational_str
from .exceptions import HypothesisError
from .poly import Monomial, SkewProduct, evaluate
from .region import RegionSpec, sample_region

__all__ = [
    "InfinityReport",
    "WeightedInfinityReport",
    "classify_infinity",
    "classify_weighted",
    "lambda_geometric",
    "empirical_basin",
    "AfoRegion",
    "afo_region",
    "PreimageRegion",
    "preimage_region",
    "afo_agreement",
    "VFamily",
    "critical_precondition",
]

COLLAPSE_PLUS = "collapse_to_p_plus"
INDUCED = "induced_by_h"
COLLAPSE_MINUS = "collapse_to_p_minus"


@dataclass
class InfinityReport:
    D: Fraction
    lam: Fraction
    h: list
    NM: tuple
    NstarMstar: tuple
    trichotomy: str
    p_plus: str
    p_minus: str
    basin: str
    conditional: bool = False
    notes: list = field(default_factory=list)

    def _base_dict(self) -> dict:
        return {
            "D": rational_str(self.D),
            "lambda": rational_str(self.lam),
            "h": [[rational_str(m.i), rational_str(m.j), [m.coeff.real, m.coeff.imag]] for m in self.h],
            "NM": [rational_str(x) for x in self.NM],
            "NstarMstar": [rational_str(x) for x in self.NstarMstar],
            "trichotomy": self.trichotomy,
            "p_plus": self.p_plus,
            "p_minus": self.p_minus,
            "basin": self.basin,
            "conditional": self.conditional,
            "notes": list(self.notes),
        }

    def to_dict(self) -> dict:
        return self._base_dict()

    def classification(self) -> dict:
        """The fields shared with :class:`WeightedInfinityReport`."""
        d = self._base_dict()
        d.pop("notes")
        return d


@dataclass
class WeightedInfinityReport(InfinityReport):
    r: int = 1
    s: int = 1
    l: Fraction = Fraction(1)
    integral: bool = True

    def to_dict(self) -> dict:
        out = self._base_dict()
        out.update(
            {
                "r": self.r,
                "s": self.s,
                "l": rational_str(self.l),
                "D_l": out["D"],
                "lambda_l": out["lambda"],
                "integral": self.integral,
            }
        )
        return out


def _weighted_degree(mono: Monomial, l: Fraction) -> Fraction:
    return mono.i / l + mono.j


def lambda_geometric(f: SkewProduct, plan: WeightPlan, l=1) -> Fraction:
    """Largest intercept of a line of slope ``-1/l`` meeting ``{(0, delta)}`` and the polygon."""
    l = Fraction(l)
    verts = plan.polygon.vertices if plan.polygon is not None else [(m.i, m.j) for m in f.q.monomials]
    return max([Fraction(f.delta)] + [n / l + m for n, m in verts])


def _classify(f: SkewProduct, plan: WeightPlan, l: Fraction):
    delta = Fraction(f.delta)
    degs = {m: _weighted_degree(m, l) for m in f.q.monomials}
    D = max(degs.values())
    lam = max(delta, D)
    h = sorted((m for m, g in degs.items() if g == D), key=lambda m: (m.i, -m.j))
    N, M = h[0].i, h[0].j
    Ns, Ms = h[-1].i, h[-1].j
    notes = []

    if delta < D:
        tri = COLLAPSE_PLUS
    elif delta == D:
        tri = INDUCED
    else:
        tri = COLLAPSE_MINUS

    if tri == COLLAPSE_MINUS:
        p_plus = "indeterminacy"
    else:
        p_plus = "superattracting" if N == 0 else "indeterminacy"

    if tri == COLLAPSE_MINUS:
        p_minus = "superattracting"
    elif tri == INDUCED:
        # h restricted near [1:0:0] acts as u -> b u^{M*}
        p_minus = "superattracting" if Ms >= 2 else "not_applicable"
    else:
        p_minus = "indeterminacy" if Ms > 0 else "not_applicable"

    gd = (plan.gamma, plan.d)
    if tri == COLLAPSE_PLUS:
        basin = "A_plus"
    elif tri == COLLAPSE_MINUS:
        basin = "A_minus"
    elif plan.d < 2:
        basin = "undetermined"
        notes.append("delta = D with d = 1 is outside the printed tables")
    elif len(h) == 1 and (h[0].i, h[0].j) == gd:
        basin = "closure_union"
    elif (N, M) == gd:
        basin = "A_plus"
    elif (Ns, Ms) == gd:
        basin = "A_minus"
    else:
        basin = "undetermined"
        notes.append("the dominant term is not an extreme term of h")
    return D, lam, h, (N, M), (Ns, Ms), tri, p_plus, p_minus, basin, notes


def classify_infinity(f: SkewProduct, plan: WeightPlan) -> InfinityReport:
    """Dynamics of the extension to the projective plane near the line at infinity."""
    D, lam, h, nm, nsms, tri, pp, pm, basin, notes = _classify(f, plan, Fraction(1))
    if lam != lambda_geometric(f, plan):  # pragma: no cover - exact identity
        raise AssertionError("degree does not match its geometric characterisation")
    return InfinityReport(D, lam, h, nm, nsms, tri, pp, pm, basin, False, notes)


def classify_weighted(f: SkewProduct, plan: WeightPlan, r: int, s: int) -> WeightedInfinityReport:
    """Same classification on the weighted plane with weights ``(r, s, 1)``."""
    if r <= 0 or s <= 0 or gcd(r, s) != 1:
        raise ValueError(f"r = {r} and s = {s} must be coprime positive integers")
    l = Fraction(s, r)
    D, lam, h, nm, nsms, tri, pp, pm, basin, notes = _classify(f, plan, l)
    if lam != lambda_geometric(f, plan, l):  # pragma: no cover - exact identity
        raise AssertionError("weighted degree does not match its geometric characterisation")
    integral = lam.denominator == 1
    conditional = False
    if not integral:
        notes.append("lambda_l is not an integer: the extension is not known to be well defined")
        conditional = True
    return WeightedInfinityReport(
        D, lam, h, nm, nsms, tri, pp, pm, basin, conditional, notes, r=r, s=s, l=l, integral=integral
    )


def empirical_basin(f: SkewProduct, spec: RegionSpec, r: int = 1, s: int = 1, n_samples: int = 200, n_iter: int = 40, seed: int = 0) -> dict:
    """Advisory check: iterate samples of ``U`` and see which point at infinity they approach.

    In the weighted chart an orbit tends to ``[0:1:0]`` when
    ``log|w|/s - log|z|/r`` goes to ``+inf`` and to ``[1:0:0]`` when it goes
    to ``-inf``.
    """
    Z, W = sample_region(spec, n_samples, seed)
    labels = basin_labels(f, Z, W, r, s, n_iter)
    plus = int(np.sum(labels == 1))
    minus = int(np.sum(labels == -1))
    undecided = n_samples - plus - minus
    if plus and minus:
        label = "closure_union"
    elif plus:
        label = "A_plus"
    elif minus:
        label = "A_minus"
    else:
        label = "undetermined"
    return {"A_plus": plus, "A_minus": minus, "undecided": undecided, "label": label}


def basin_labels(f: SkewProduct, X, Y, r: int = 1, s: int = 1, n_iter: int = 40, threshold: float = 50.0):
    """Per-point labels (``+1``, ``-1`` or ``0``) for lifted starting points.

    Iterates until ``|log|w|/s - log|z|/r|`` passes ``threshold`` or the
    orbit gets too large to follow; ``0`` means neither happened.
    """
    Z = np.asarray(X, dtype=complex).copy()
    W = np.asarray(Y, dtype=complex).copy()
    out = np.zeros(Z.shape, dtype=int)
    live = np.ones(Z.shape, dtype=bool)
    with np.errstate(all="ignore"):
        for _ in range(n_iter):
            gap = W.real / s - Z.real / r
            out[live & (gap > threshold)] = 1
            out[live & (gap < -threshold)] = -1
            live &= out == 0
            live &= np.isfinite(Z.real) & np.isfinite(W.real) & (np.abs(Z.real) < 1e250) & (np.abs(W.real) < 1e250)
            if not live.any():
                break
            Z[live], W[live] = f.log_image(Z[live], W[live])
    return out


# ---------------------------------------------------------------------------
# union of preimages under the monomial model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AfoRegion:
    """One closed form of the union of all preimages of ``U`` under ``f0``.

    ``kind`` selects the shape; ``slope`` is the exponent of ``|z|`` in the
    bound on ``|w|`` where there is one.
    """

    case: int
    item: int
    kind: str
    slope: Fraction | None
    text: str

    @property
    def covered(self) -> bool:
        return self.kind != "not_covered"

    def member_log(self, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        k = self.kind
        if k == "not_covered":
            raise HypothesisError(self.text)
        if k == "outside_unit_disk":
            return x > 0
        if k == "both_outside":
            return (x > 0) & (y > 0)
        a = float(self.slope)
        if k == "above":
            return (x > 0) & (y > a * x)
        if k == "below":
            return (x > 0) & (y < a * x)
        raise AssertionError(k)  # pragma: no cover

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "item": self.item,
            "kind": self.kind,
            "slope": rational_str(self.slope) if self.slope is not None else None,
            "region": self.text,
        }


def afo_region(delta: int, d, gamma, plan: WeightPlan) -> AfoRegion:
    """Closed form of ``A_{f0} = ∪ f0^-n(U)`` from the catalog.

    Configurations the catalog does not list come back with
    ``kind == "not_covered"``.
    """
    delta, d, gamma = Fraction(delta), Fraction(d), Fraction(gamma)
    case = plan.case
    P = plan.polygon
    alpha0 = gamma / (delta - d) if delta != d else None
    T = list(P.intercepts) if P is not None else []
    on_intercept = any(t == delta for t in T)

    def make(item, kind, slope=None):
        a = rational_str(slope) if slope is not None else None
        text = {
            "outside_unit_disk": "{|z| > 1, w != 0}",
            "both_outside": "{|z| > 1, |w| > 1}",
            "above": f"{{|z| > 1, |w| > |z|^({a})}}",
            "below": f"{{|z| > 1, 0 < |w| < |z|^({a})}}",
        }[kind]
        return AfoRegion(case, item, kind, slope, text)

    def none(why):
        return AfoRegion(case, 0, "not_covered", None, f"not covered by the catalog: {why}")

    if d == 1 and on_intercept:
        return none("d = 1 and delta equals an intercept")

    if case == 1:
        if gamma == 0:
            return make(3, "both_outside")
        if delta >= d:
            return make(1, "outside_unit_disk")
        return make(2, "above", alpha0)

    if case == 2:
        T1 = T[0]
        if delta < d:
            return make(3, "above", alpha0) if gamma > 0 else make(4, "both_outside")
        if delta == d and gamma == 0:
            return make(5, "above", plan.l1)
        if gamma == 0:
            return none("delta > d and gamma = 0 in Case 2")
        if T1 > delta:
            return make(1, "outside_unit_disk")
        if T1 == delta and delta > d and d >= 2:
            return make(2, "above", alpha0)
        return none("configuration not in the Case 2 list")

    if gamma == 0:
        return none(f"gamma = 0 in Case {case}")

    if case == 3:
        Ts = T[-1]
        if delta > Ts:
            return make(1, "outside_unit_disk")
        if delta == Ts and d >= 2:
            return make(2, "below", alpha0)
        return none("configuration not in the Case 3 list")

    k = plan.k
    lo, hi = P.T(k - 1), P.T(k)
    if lo < delta < hi:
        return make(1, "outside_unit_disk")
    if delta == hi and d >= 2:
        return make(2, "above", alpha0)
    if delta == lo and d >= 2:
        return make(3, "below", alpha0)
    return none("configuration not in the Case 4 list")


def _T(plan: WeightPlan, l, n: int) -> Fraction:
    """``n``-fold iterate of ``T(l) = (delta l - gamma) / d``, exactly."""
    l = Fraction(l)
    for _ in range(n):
        l = (plan.delta * l - plan.gamma) / plan.d
    return l


@dataclass(frozen=True)
class PreimageRegion:
    """``f0^-n(U)``: ``log R`` scaled by the radius exponents plus the slopes."""

    case: int
    n: int
    z_radius: Fraction  # 1 / delta^n
    lower_radius: Fraction  # 1 / d^n
    lower_slope: Fraction
    upper_radius: Fraction | None  # -l2 / d^n
    upper_slope: Fraction | None

    def member_log(self, x, y, R: float):
        r = math.log(R)
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        ok = y > float(self.lower_radius) * r + float(self.lower_slope) * x
        if self.upper_slope is None:
            return ok & (x > float(self.z_radius) * r)
        return ok & (y < float(self.upper_radius) * r + float(self.upper_slope) * x)

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "n": self.n,
            "z_radius_exponent": rational_str(self.z_radius),
            "lower_radius_exponent": rational_str(self.lower_radius),
            "lower_slope": rational_str(self.lower_slope),
            "upper_radius_exponent": rational_str(self.upper_radius) if self.upper_radius is not None else None,
            "upper_slope": rational_str(self.upper_slope) if self.upper_slope is not None else None,
        }


def preimage_region(plan: WeightPlan, n: int) -> PreimageRegion:
    """Exact description of ``f0^-n(U)`` (unit leading coefficients)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    dn = Fraction(plan.d) ** n
    zr = Fraction(1, plan.delta**n)
    lower = _T(plan, plan.l1, n)
    if plan.l2 == INF:
        return PreimageRegion(plan.case, n, zr, 1 / dn, lower, None, None)
    upper = _T(plan, plan.l1 + plan.l2, n)
    return PreimageRegion(plan.case, n, zr, 1 / dn, lower, -Fraction(plan.l2) / dn, upper)


def _preimages(plan: WeightPlan, n_max: int):
    """Yield ``f0^-m(U)`` for ``m = 0..n_max``, updating the slopes incrementally."""
    lower = Fraction(plan.l1)
    upper = None if plan.l2 == INF else plan.l1 + plan.l2
    for m in range(n_max + 1):
        dn = Fraction(plan.d) ** m
        yield PreimageRegion(
            plan.case,
            m,
            Fraction(1, plan.delta**m),
            1 / dn,
            lower,
            None if upper is None else -Fraction(plan.l2) / dn,
            upper,
        )
        lower = (plan.delta * lower - plan.gamma) / plan.d
        if upper is not None:
            upper = (plan.delta * upper - plan.gamma) / plan.d
        if abs(lower) > 1e300 or (upper is not None and abs(upper) > 1e300):
            return


def _enters_U(plan: WeightPlan, R: float, x, y, steps: int):
    """Whether a point lies in ``f0^-m(U)`` for some ``m <= steps``."""
    hit = np.zeros(np.shape(x), dtype=bool)
    with np.errstate(over="ignore", invalid="ignore"):
        for reg in _preimages(plan, steps):
            hit |= reg.member_log(x, y, R)
    return hit


def _far_member(plan: WeightPlan, R: float, x, y, m: int):
    """Membership in ``f0^-m(U)`` for very large ``m`` using the closed form of ``T^m``."""
    r = math.log(R)
    delta, d, g = float(plan.delta), float(plan.d), float(plan.gamma)

    def Tm(l):
        if delta == d:
            return l - m * g / delta
        a0 = g / (delta - d)
        return np.float64(delta / d) ** m * (l - a0) + a0

    with np.errstate(all="ignore"):
        dm = np.float64(d) ** (-m)
        ok = (x > np.float64(delta) ** (-m) * r) & (y > dm * r + Tm(float(plan.l1)) * x)
        if plan.l2 != INF:
            ok &= y < -float(plan.l2) * dm * r + Tm(float(plan.l1 + plan.l2)) * x
    return ok


def afo_agreement(plan: WeightPlan, R: float, n: int = 8, n_samples: int = 10_000, seed: int = 0, box=None, band: float = 1e-9) -> dict:
    """Compare the closed form with ``∪_{m<=n} f0^-m(U)`` on random log-moduli.

    Points where the two disagree are ``late`` if they do lie in some
    later preimage (so the finite union simply has not converged there) or
    within ``band`` of the closed-form boundary. Anything else is
    ``unexplained``.
    """
    region = afo_region(plan.delta, plan.d, plan.gamma, plan)
    if not region.covered:
        return {"covered": False, "region": region.to_dict()}
    rng = np.random.default_rng(seed)
    r = math.log(R)
    if box is None:
        box = (-r, 4 * r, -4 * r, 4 * r)
    x = rng.uniform(box[0], box[1], n_samples)
    y = rng.uniform(box[2], box[3], n_samples)
    closed = region.member_log(x, y)
    finite = _enters_U(plan, R, x, y, n)
    differ = closed != finite
    # the preimages increase with m since U is forward invariant
    later = _enters_U(plan, R, x, y, 200) | _far_member(plan, R, x, y, 10**9)
    dist = np.abs(x)
    if region.slope is not None:
        dist = np.minimum(dist, np.abs(y - float(region.slope) * x))
    elif region.kind == "both_outside":
        dist = np.minimum(dist, np.abs(y))
    explained = differ & ((closed & later) | (dist < band))
    return {
        "covered": True,
        "region": region.to_dict(),
        "samples": n_samples,
        "agree": int(np.sum(~differ)),
        "late": int(np.sum(explained)),
        "unexplained": int(np.sum(differ & ~explained)),
        "passed": bool(np.sum(differ & ~explained) == 0),
    }


# ---------------------------------------------------------------------------
# critical-set precondition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VFamily:
    """The two four-parameter families of Reinhardt regions ``V``.

    ``family=1``: ``{|z| > r1, |w| > r2 |z|^a1}`` in Cases 1, 2 and
    ``{r2 |z|^a1 < |w| < r1^(-l2) |z|^a2}`` in Cases 3, 4.
    ``family=2``: ``{r2 |z|^a1 < |w| < r1^(-a2) |z|^a2}``.
    Infinite ``a1``/``a2`` drop the matching bound.
    """

    family: int
    r1: float
    r2: float
    a1: float
    a2: float = math.inf

    def __post_init__(self):
        if self.family not in (1, 2):
            raise ValueError("family must be 1 or 2")
        if self.r1 < 1 or self.r2 < 1:
            raise ValueError("r1 and r2 must be at least 1")
        if self.a1 == math.inf:
            raise ValueError("a1 must be below +inf")
        if not self.a2 > 0:
            raise ValueError("a2 must be positive")

    def member_log(self, plan: WeightPlan, x, y):
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        lr1, lr2 = math.log(self.r1), math.log(self.r2)
        with np.errstate(invalid="ignore"):
            lower = y > lr2 + self.a1 * x if self.a1 != -math.inf else np.ones(x.shape, bool)
            if self.family == 1 and plan.case in (1, 2):
                return (x > lr1) & lower
            if self.a2 == math.inf:
                upper = np.ones(x.shape, bool)
            elif self.family == 1:
                upper = y < -float(plan.l2) * lr1 + self.a2 * x
            else:
                upper = y < -self.a2 * lr1 + self.a2 * x
        return lower & upper

    def to_dict(self) -> dict:
        return {"family": self.family, "r1": self.r1, "r2": self.r2, "a1": self.a1, "a2": self.a2}


def _abs_phi_log(f: SkewProduct, plan: WeightPlan, spec: RegionSpec, Z, W, n_max: int):
    """``log|phi|`` extended by ``(f0|R^2)^-n o |phi| o f^n``; NaN when the orbit misses ``U``."""
    from .bottcher import phi_lift  # local import keeps module load light

    table_logA = math.log(abs(f.a_delta))
    table_logB = math.log(abs(f.q.coeff(plan.gamma, plan.d)))
    delta, gamma, d = float(plan.delta), float(plan.gamma), float(plan.d)
    Z = np.asarray(Z, dtype=complex).ravel().copy()
    W = np.asarray(W, dtype=complex).ravel().copy()
    steps = np.zeros(Z.size, dtype=int)
    inside = np.asarray(spec.member_lift(Z, W), dtype=bool)
    with np.errstate(all="ignore"):
        for _ in range(n_max):
            move = ~inside & np.isfinite(Z) & np.isfinite(W)
            if not move.any():
                break
            Z[move], W[move] = f.log_image(Z[move], W[move])
            steps[move] += 1
            inside |= np.asarray(spec.member_lift(Z, W), dtype=bool) & move
    out_x = np.full(Z.size, np.nan)
    out_y = np.full(Z.size, np.nan)
    idx = np.flatnonzero(inside)
    if idx.size:
        P1, P2, *_ = phi_lift(f, plan, spec, Z[idx], W[idx])
        x, y = P1.real.copy(), P2.real.copy()
        n = steps[idx]
        for k in range(int(n.max(initial=0))):
            back = n > k
            x[back] = (x[back] - table_logA) / delta
            y[back] = (y[back] - table_logB - gamma * x[back]) / d
        out_x[idx], out_y[idx] = x, y
    return out_x, out_y


def _poly_roots(coeffs: dict) -> np.ndarray:
    """Roots of ``sum c_k t^k`` given ``{k: c_k}``, dropping ``t = 0``."""
    if not coeffs:
        return np.zeros(0, complex)
    top = max(coeffs)
    vec = [coeffs.get(k, 0j) for k in range(top, -1, -1)]
    roots = np.roots(vec) if top > 0 else np.zeros(0, complex)
    return roots[np.abs(roots) > 1e-300]


def _near_critical(f: SkewProduct, rng, Zbase, n: int):
    """Points close to the critical set: around zeros of ``p'`` and of ``dq/dw``."""
    dp = f.p.derivative("z")
    cz = _poly_roots({int(m.i): m.coeff for m in dp.monomials})
    dq = f.q.derivative("w")
    out_z, out_w = [], []
    half = n // 2
    rho = np.exp(rng.uniform(math.log(1e-7), 0.0, n))
    phase = np.exp(1j * rng.uniform(-math.pi, math.pi, (2, n)))
    if cz.size:
        for k in range(half):
            c = cz[k % cz.size]
            out_z.append(c + rho[k] * phase[0, k])
            out_w.append(np.exp(complex(Zbase[1][k])))
    for k in range(half, n):
        z = np.exp(complex(Zbase[0][k]))
        row = {}
        for m in dq.monomials:
            row[int(m.j)] = row.get(int(m.j), 0j) + m.coeff * z ** int(m.i)
        roots = _poly_roots(row)
        if not roots.size:
            continue
        w = roots[k % roots.size] * (1 + rho[k] * phase[1, k])
        out_z.append(z)
        out_w.append(w)
    return np.array(out_z, complex), np.array(out_w, complex)


def critical_precondition(f: SkewProduct, plan: WeightPlan, spec: RegionSpec, V: VFamily, n_samples: int = 2000, seed: int = 0, n_max: int = 20, warn_below: float = 1e-3) -> dict:
    """Sample ``|phi|^-1(V)`` and look for critical points of ``f``.

    The critical polynomial is ``p'(z) * dq/dw(z, w)``. Its modulus is
    reported relative to the same product for the monomial model, so
    values near 0 flag points close to the critical set. Half the samples
    are spread over a box around ``V``, half are placed next to the
    critical set. This is a sampling check, not a proof.
    """
    if not plan.degree_ok:
        raise HypothesisError(f"degree condition fails: {plan.degree_condition}")
    rng = np.random.default_rng(seed)
    r = spec.logR
    lo = max(0.0, math.log(V.r1)) - 0.5
    x = rng.uniform(lo, 2 * r + 2.0, n_samples)
    lr2 = math.log(V.r2)
    a1 = V.a1 if V.a1 != -math.inf else float(plan.l1) - 4.0
    y_lo = lr2 + a1 * x - 1.0
    if V.a2 != math.inf:
        y_hi = V.a2 * x + 1.0
    elif plan.l2 != INF:
        y_hi = float(plan.outer_weight) * x + 4.0 * (x + 1)
    else:
        y_hi = y_lo + 3 * r + 6.0
    y = y_lo + rng.random(n_samples) * (y_hi - y_lo)
    th = rng.uniform(-math.pi, math.pi, (2, n_samples))
    Z = x + 1j * th[0]
    W = y + 1j * th[1]
    n_box = n_samples - n_samples // 2
    cz, cw = _near_critical(f, rng, (Z[n_box:], W[n_box:]), n_samples // 2)
    with np.errstate(divide="ignore"):
        Z = np.concatenate([Z[:n_box], np.log(cz)])
        W = np.concatenate([W[:n_box], np.log(cw)])
    total = Z.size

    px, py = _abs_phi_log(f, plan, spec, Z, W, n_max)
    converged = np.isfinite(px)
    inside = np.zeros(total, dtype=bool)
    inside[converged] = V.member_log(plan, px[converged], py[converged])

    dp = f.p.derivative("z")
    dq = f.q.derivative("w")
    a, b = f.a_delta, f.q.coeff(plan.gamma, plan.d)
    rel = []
    absolute = []
    for k in np.flatnonzero(inside):
        z, w = np.exp(Z[k]), np.exp(W[k])
        crit = evaluate(dp, z) * evaluate(dq, z, w)
        model = plan.delta * a * z ** (plan.delta - 1) * float(plan.d) * b * z ** float(plan.gamma) * w ** (float(plan.d) - 1)
        absolute.append(abs(crit))
        rel.append(abs(crit) / abs(model) if model != 0 else math.inf)
    min_rel = float(min(rel)) if rel else None
    min_abs = float(min(absolute)) if absolute else None
    return {
        "V": V.to_dict(),
        "samples": total,
        "in_V": int(inside.sum()),
        "not_converged": int((~converged).sum()),
        "min_modulus": min_abs,
        "min_relative_modulus": min_rel,
        "passed": bool(rel) and min_abs > 0,
        "warning": bool(rel) and min_rel < warn_below,
    }
