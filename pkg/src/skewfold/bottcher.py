"""Böttcher coordinates near infinity, computed in the logarithmic lift.

With ``(z, w) = (exp Z, exp W)`` the map lifts to::

    F(Z, W) = (delta Z + log a + log(1 + zeta),
               gamma Z + d W + log b + log(1 + eta))

and its monomial part ``F0`` is affine with linear part
``L = [[delta, 0], [gamma, d]]``. Hence ``F0^-n o F^n = id + sum_j L^-j e_j``
where ``e_j`` is the logarithmic perturbation picked up at step ``j``. We
accumulate that sum directly: it never forms the huge numbers ``Q_n / d^n``
and it is exactly the branch for which ``f0^-n o f0^n = id``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .classify import INF, WeightPlan
from .exceptions import ConvergenceError, HypothesisError
from .poly import LogPoint, SkewProduct, evaluate, remainder_table
from .region import RegionSpec, remainder_constants, term_gap

__all__ = [
    "gamma_n",
    "LiftedMap",
    "BottcherEval",
    "phi_n",
    "phi",
    "phi_extended",
    "phi_lift",
    "tail_bound",
    "sup_remainder",
    "psi",
    "injectivity_region",
    "chi",
    "derived_coordinates",
]


def gamma_n(delta: int, d: int, gamma: int, n: int) -> int:
    """Lower-left entry of ``L**n``: ``sum_{j=1..n} delta**(n-j) d**(j-1) gamma``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    g = gamma
    for k in range(1, n):
        g = delta * g + d**k * gamma
    return g


def _as_int(x):
    x = Fraction(x)
    return int(x) if x.denominator == 1 else x


# ---------------------------------------------------------------------------
# the lift
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LiftedMap:
    """``F`` and ``F0`` for one plan; vectorised over numpy arrays."""

    f: SkewProduct
    delta: int
    gamma: int
    d: int

    @classmethod
    def from_plan(cls, f: SkewProduct, plan: WeightPlan) -> "LiftedMap":
        return cls(f, plan.delta, _as_int(plan.gamma), _as_int(plan.d))

    @property
    def table(self):
        return remainder_table(self.f, self.gamma, self.d)

    @property
    def logA(self) -> complex:
        return self.table.logA

    @property
    def logB(self) -> complex:
        return self.table.logB

    def perturbation(self, Z, W):
        """``(log(1 + zeta), log(1 + eta))`` at lifted points."""
        t = self.table
        zeta, eta = t.zeta(Z), t.eta(Z, W)
        if np.any(np.abs(zeta) >= 1) or np.any(np.abs(eta) >= 1):
            raise HypothesisError("the orbit left the set where |zeta|, |eta| < 1")
        return np.log1p(zeta), np.log1p(eta)

    def monomial(self, Z, W):
        return (
            self.delta * Z + self.logA,
            self.gamma * Z + self.d * W + self.logB,
        )

    def monomial_inverse(self, Z, W):
        Z0 = (Z - self.logA) / self.delta
        return Z0, (W - self.logB - self.gamma * Z0) / self.d

    def __call__(self, Z, W):
        lz, lw = self.perturbation(Z, W)
        Z1, W1 = self.monomial(Z, W)
        return Z1 + lz, W1 + lw


# ---------------------------------------------------------------------------
# tail bounds
# ---------------------------------------------------------------------------


def sup_remainder(f: SkewProduct, plan: WeightPlan, R: float) -> float:
    """Rigorous bound ``sup_U max(|zeta|, |eta|) <= sum |c| R**(-g)``."""
    table = remainder_table(f, plan.gamma, plan.d)
    out = 0.0
    for terms in ([(e, 0, c) for e, c in table.zeta_terms], table.eta_terms):
        total = 0.0
        for a, b, c in terms:
            alpha, beta = term_gap(plan, a, b)
            if alpha > 0 or beta > 0:
                return math.inf
            total += abs(c) * R ** (float(alpha + beta))
        out = max(out, total)
    return out


def _min_gap(f: SkewProduct, plan: WeightPlan) -> Fraction:
    table = remainder_table(f, plan.gamma, plan.d)
    gaps = [-sum(term_gap(plan, e, 0)) for e, _ in table.zeta_terms]
    gaps += [-sum(term_gap(plan, a, b)) for a, b, _ in table.eta_terms]
    return min(gaps, default=Fraction(1))


def _series_d_ge_2(delta: int, d: int, gamma: int, n: int) -> float:
    """``sum_{m>n} (d**-m + gamma_m / (delta d)**m)``."""
    head = d ** (-n) / (d - 1)
    if delta != d:
        cross = gamma / (delta - d) * (d ** (-n) / (d - 1) - delta ** (-n) / (delta - 1))
    else:
        # gamma_m / delta**(2m) = gamma m / delta**(m+1); sum m x**m from N on
        x, N = 1.0 / delta, n + 1
        cross = gamma / delta * x**N * (N - (N - 1) * x) / (1 - x) ** 2
    return head + cross


def tail_bound(f: SkewProduct, plan: WeightPlan, spec: RegionSpec, n: int) -> float:
    """Certified bound on ``|phi / phi_n - 1|`` (componentwise) on ``U``.

    The logarithmic increments after step ``n`` are bounded by a geometric
    series (``d >= 2``) or by ``K (2^n R)^-M / (1 - 2^-M)`` (``d = 1``). The
    result is the relative bound ``exp(t) - 1`` on the coordinates.
    """
    eps = sup_remainder(f, plan, spec.R)
    if spec.eps is not None:
        eps = min(eps, spec.eps)
    if eps >= 1:
        return math.inf
    if eps == 0:
        return 0.0
    delta, d, gamma = plan.delta, int(plan.d), float(plan.gamma)
    if d >= 2:
        t = -math.log1p(-eps) * _series_d_ge_2(delta, d, gamma, n)
    else:
        if not spec.contraction:
            return math.inf
        c1, c2 = remainder_constants(f, plan)
        M = float(min(plan.M, _min_gap(f, plan)))
        K = (c2 + gamma * c1 / (delta - 1)) / (1 - eps)
        t = K * (2.0**n * spec.R) ** (-M) / (1 - 2.0 ** (-M))
    return math.expm1(t) if t < 700 else math.inf


# ---------------------------------------------------------------------------
# phi
# ---------------------------------------------------------------------------


@dataclass
class BottcherEval:
    """Value of the Böttcher coordinate at one point.

    ``Phi1`` and ``Phi2`` are the lifted values (``phi = exp(Phi)``); they
    stay finite when ``phi`` itself would overflow.
    """

    phi1: complex
    phi2: complex
    n_used: int
    tail_bound: float
    residual: float
    converged: bool = True
    Phi1: complex = 0j
    Phi2: complex = 0j

    def to_dict(self) -> dict:
        return {
            "phi1": [self.phi1.real, self.phi1.imag],
            "phi2": [self.phi2.real, self.phi2.imag],
            "n_used": self.n_used,
            "tail_bound": self.tail_bound,
            "residual": self.residual,
            "converged": self.converged,
        }


def _lift_point(x) -> tuple[complex, complex]:
    if isinstance(x, LogPoint):
        return complex(x.Z), complex(x.W)
    z, w = x
    p = LogPoint.from_point(z, w)
    return p.Z, p.W


def _accumulate(lm: LiftedMap, Z, W, n: int):
    """``Phi_n`` at lifted points; also returns the final orbit point."""
    Z = np.asarray(Z, dtype=complex)
    W = np.asarray(W, dtype=complex)
    P1, P2 = Z.copy(), W.copy()
    delta, d, gamma = lm.delta, lm.d, lm.gamma
    cz = 1.0  # delta**-j
    cw = 1.0  # d**-j
    cross = 0.0  # gamma_j / (delta d)**j
    for j in range(1, n + 1):
        lz, lw = lm.perturbation(Z, W)
        cross = cross / d + gamma * cz / (delta * d)
        cz /= delta
        cw /= d
        P1 = P1 + cz * lz
        P2 = P2 + cw * lw - cross * lz
        Z1, W1 = lm.monomial(Z, W)
        Z, W = Z1 + lz, W1 + lw
    return P1, P2, Z, W


def _require(plan: WeightPlan):
    if not plan.degree_ok:
        raise HypothesisError(f"degree condition fails: {plan.degree_condition}")


def _rel_residual(A1, A2, B1, B2):
    """Componentwise ``max |exp(A - B) - 1|`` for lifted pairs."""
    with np.errstate(over="ignore", invalid="ignore"):
        r = np.maximum(np.abs(np.expm1(A1 - B1)), np.abs(np.expm1(A2 - B2)))
    return r


def _image_lift(f: SkewProduct, lm: LiftedMap, Z, W):
    """Lift of ``f(x)``: direct complex evaluation when finite, else ``F``."""
    Z = np.asarray(Z, dtype=complex)
    W = np.asarray(W, dtype=complex)
    FZ, FW = lm(Z, W)
    if np.all(np.abs(Z.real) < 300) and np.all(np.abs(W.real) < 300):
        flat = []
        with np.errstate(over="ignore", invalid="ignore"):
            for z, w in zip(np.exp(Z).ravel(), np.exp(W).ravel()):
                flat.append((evaluate(f.p, z), evaluate(f.q, z, w)))
        if all(map(lambda t: np.isfinite(t[0]) and np.isfinite(t[1]) and t[0] != 0 and t[1] != 0, flat)):
            DZ = np.log(np.array([t[0] for t in flat])).reshape(Z.shape)
            DW = np.log(np.array([t[1] for t in flat])).reshape(Z.shape)
            return DZ, DW
    return FZ, FW


def phi_lift(f: SkewProduct, plan: WeightPlan, spec: RegionSpec, Z, W, tol: float = 1e-12, max_iter: int = 200):
    """Vectorised ``phi`` in the lift.

    Returns ``(Phi1, Phi2, n_used, tail, residual, converged)`` where the
    first two and the residual are arrays shaped like ``Z``.
    """
    _require(plan)
    lm = LiftedMap.from_plan(f, plan)
    if not lm.table.zeta_terms and not lm.table.eta_terms:
        Z = np.asarray(Z, dtype=complex)
        W = np.asarray(W, dtype=complex)
        return Z.copy(), W.copy(), 0, 0.0, np.zeros(Z.shape), True
    n, tail = 0, tail_bound(f, plan, spec, 0)
    while tail >= tol and n < max_iter:
        n += 1
        tail = tail_bound(f, plan, spec, n)
    converged = tail < tol
    P1, P2, _, _ = _accumulate(lm, Z, W, n)
    # residual of phi o f = f0 o phi
    FZ, FW = _image_lift(f, lm, Z, W)
    Q1, Q2, _, _ = _accumulate(lm, FZ, FW, n)
    M1, M2 = lm.monomial(P1, P2)
    res = _rel_residual(Q1, Q2, M1, M2)
    return P1, P2, n, tail, res, converged


def _to_eval(P1, P2, n, tail, res, converged) -> BottcherEval:
    P1, P2 = complex(P1), complex(P2)
    with np.errstate(over="ignore"):
        v1, v2 = complex(np.exp(P1)), complex(np.exp(P2))
    return BottcherEval(v1, v2, n, tail, float(res), converged, P1, P2)


def phi_n(f: SkewProduct, plan: WeightPlan, spec: RegionSpec, x, n: int) -> BottcherEval:
    """``phi_n = f0^-n o f^n`` at ``x`` (no convergence check, no tail bound)."""
    _require(plan)
    if n < 0:
        raise ValueError("n must be non-negative")
    Z, W = _lift_point(x)
    if not spec.member_lift(Z, W):
        raise HypothesisError("the point is not in the region")
    lm = LiftedMap.from_plan(f, plan)
    P1, P2, _, _ = _accumulate(lm, Z, W, n)
    FZ, FW = _image_lift(f, lm, Z, W)
    Q1, Q2, _, _ = _accumulate(lm, FZ, FW, n)
    M1, M2 = lm.monomial(P1, P2)
    return _to_eval(P1, P2, n, math.nan, _rel_residual(Q1, Q2, M1, M2), False)


def phi(f: SkewProduct, plan: WeightPlan, spec: RegionSpec, x, tol: float = 1e-12, max_iter: int = 200, strict: bool = False) -> BottcherEval:
    """Böttcher coordinate at ``x``, iterated until the certified tail < ``tol``.

    A run that hits ``max_iter`` first comes back with ``converged=False``;
    with ``strict=True`` it raises :class:`ConvergenceError` instead.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    Z, W = _lift_point(x)
    if not spec.member_lift(Z, W):
        raise HypothesisError("the point is not in the region")
    out = _to_eval(*phi_lift(f, plan, spec, Z, W, tol, max_iter))
    if strict and not out.converged:
        raise ConvergenceError(f"tail bound {out.tail_bound:.3g} still above {tol:g} after {max_iter} steps", out)
    return out


def phi_extended(f: SkewProduct, plan: WeightPlan, spec: RegionSpec, x, n: int, dps: int = 40) -> BottcherEval:
    """``phi_n`` at ``x`` with every step carried out in ``dps``-digit arithmetic."""
    import mpmath

    _require(plan)
    Z, W = _lift_point(x)
    if not spec.member_lift(Z, W):
        raise HypothesisError("the point is not in the region")
    lm = LiftedMap.from_plan(f, plan)
    t = lm.table
    with mpmath.workdps(dps):
        Z, W = mpmath.mpc(Z), mpmath.mpc(W)
        logA, logB = mpmath.log(mpmath.mpc(t.a)), mpmath.log(mpmath.mpc(t.b))
        P1, P2 = Z, W
        cz = cw = mpmath.mpf(1)
        cross = mpmath.mpf(0)
        delta, d, gamma = lm.delta, lm.d, lm.gamma
        for _ in range(n):
            zeta, eta = t.zeta_mp(Z), t.eta_mp(Z, W)
            if abs(zeta) >= 1 or abs(eta) >= 1:
                raise HypothesisError("the orbit left the set where |zeta|, |eta| < 1")
            lz, lw = mpmath.log1p(zeta), mpmath.log1p(eta)
            cross = cross / d + gamma * cz / (delta * d)
            cz /= delta
            cw /= d
            P1 += cz * lz
            P2 += cw * lw - cross * lz
            Z, W = delta * Z + logA + lz, gamma * Z + d * W + logB + lw
        P1, P2 = complex(P1), complex(P2)
    tail = tail_bound(f, plan, spec, n)
    return _to_eval(P1, P2, n, tail, math.nan, tail < 1e-30)


# ---------------------------------------------------------------------------
# inverse
# ---------------------------------------------------------------------------


def psi(f: SkewProduct, plan: WeightPlan, spec: RegionSpec, y, tol: float = 1e-10, max_iter: int = 50):
    """Solve ``phi(x) = y`` by damped Newton iteration in the lift."""
    _require(plan)
    Y1, Y2 = _lift_point(y)
    Y = np.array([Y1, Y2])

    def F(X):
        P1, P2, *_ = phi_lift(f, plan, spec, X[0], X[1], tol=min(tol, 1e-13) * 1e-2)
        return np.array([complex(P1), complex(P2)]) - Y

    def size(r):
        return float(np.max(np.abs(np.expm1(r))))

    X = Y.copy()
    r = F(X)
    for _ in range(max_iter):
        if size(r) < tol:
            z, w = cmath.exp(X[0]), cmath.exp(X[1])
            return z, w
        scale = max(1.0, float(np.max(np.abs(X))))
        h = 1e-7 * scale
        J = np.empty((2, 2), dtype=complex)
        for k in range(2):
            e = np.zeros(2, dtype=complex)
            e[k] = h
            J[:, k] = (F(X + e) - r) / h
        step = np.linalg.solve(J, -r)
        t = 1.0
        while True:
            Xn = X + t * step
            try:
                rn = F(Xn)
            except HypothesisError:
                rn = None
            if rn is not None and size(rn) < size(r):
                break
            t /= 2
            if t < 1e-6:
                raise ConvergenceError("Newton step could not reduce the residual", (cmath.exp(X[0]), cmath.exp(X[1])))
        X, r = Xn, rn
    if size(r) < tol:
        return cmath.exp(X[0]), cmath.exp(X[1])
    raise ConvergenceError(f"Newton did not converge (residual {size(r):.3g})", (cmath.exp(X[0]), cmath.exp(X[1])))


# ---------------------------------------------------------------------------
# injectivity
# ---------------------------------------------------------------------------


def injectivity_region(plan: WeightPlan, spec: RegionSpec, eps: float) -> RegionSpec:
    """Shrink ``U`` by the ``(1 + eps)**(2C)`` margins, ``C = max(1/d, l2/(2 delta))``.

    With only one bound present (Cases 1 and 2) each product coordinate
    gets the margin ``2 log(1 + eps) / degree`` of the matching coordinate.
    """
    if eps < 0:
        raise ValueError("eps must be non-negative")
    if eps == 0:
        return spec
    lg = math.log1p(eps)
    d, delta = float(plan.d), float(plan.delta)
    if plan.l2 != INF:
        C = max(1.0 / d, float(plan.l2) / (2 * delta))
        mv = 2 * C * lg
        mu = mv / float(plan.l2)
    else:
        mu, mv = 2 * lg / delta, 2 * lg / d
    return replace(spec, margin_u=spec.margin_u + mu, margin_v=spec.margin_v + mv)


# ---------------------------------------------------------------------------
# derived coordinates
# ---------------------------------------------------------------------------


def chi(f: SkewProduct, plan: WeightPlan, z, tol: float = 1e-12, max_iter: int = 400, lifted: bool = False) -> complex:
    """The correction ``chi(z)`` with ``chi(p) = b * phi1**gamma * chi**d / b(z)``.

    ``b(z)`` is the coefficient of ``w**d`` in ``q`` and ``b`` its leading
    coefficient. In the lift::

        log chi = sum_j d**(-1-j) (log(1 + rho(z_j)) - gamma E_j)

    with ``z_j = p^j(z)``, ``rho = b(z)/(b z**gamma) - 1`` and
    ``E_j = log(phi1(z_j)/z_j)`` obtained by the backward recursion
    ``E_j = (log(1 + zeta(z_j)) + E_{j+1}) / delta``.
    """
    if plan.d < 2:
        raise HypothesisError("chi is only defined for d >= 2")
    table = remainder_table(f, plan.gamma, plan.d)
    d, delta, gamma = int(plan.d), plan.delta, float(plan.gamma)
    Z = complex(z) if lifted else cmath.log(complex(z))
    orbit = [Z]
    lz, lr = [], []
    for j in range(max_iter):
        zeta, rho = table.zeta(orbit[-1]), table.row(orbit[-1])
        if abs(zeta) >= 1:
            raise HypothesisError("|zeta| >= 1 along the orbit; z is too small")
        if rho == -1:
            raise HypothesisError("b(z) vanishes along the orbit")
        lz.append(cmath.log(1 + zeta))
        lr.append(cmath.log(1 + rho))
        small = abs(zeta) < 1e-17 and abs(rho) < 1e-17
        weight = d ** (-(j + 1))
        if small and weight * (abs(lz[-1]) + abs(lr[-1]) + 1) < tol:
            break
        orbit.append(delta * orbit[-1] + table.logA + lz[-1])
    else:
        raise ConvergenceError("chi: the orbit did not settle", None)
    E = [0j] * (len(lz) + 1)
    for j in range(len(lz) - 1, -1, -1):
        E[j] = (lz[j] + E[j + 1]) / delta
    total = sum(d ** (-1 - j) * (lr[j] - gamma * E[j]) for j in range(len(lz)))
    return cmath.exp(total)


@dataclass
class DerivedCoordinates:
    """``phi_tilde2 = phi2 / chi`` and ``psi_alpha0 = phi2 / phi1**alpha0``.

    A coordinate whose hypothesis fails is ``None`` with the reason recorded.
    """

    phi_tilde2: complex | None
    phi_alpha0: complex | None
    residual_tilde2: float | None
    residual_alpha0: float | None
    reasons: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def c(v):
            return None if v is None else [v.real, v.imag]

        return {
            "phi_tilde2": c(self.phi_tilde2),
            "phi_alpha0": c(self.phi_alpha0),
            "residual_tilde2": self.residual_tilde2,
            "residual_alpha0": self.residual_alpha0,
            "reasons": self.reasons,
        }


def derived_coordinates(f: SkewProduct, plan: WeightPlan, spec: RegionSpec, x, tol: float = 1e-13) -> DerivedCoordinates:
    """Evaluate both derived coordinates at ``x`` with conjugacy residuals.

    ``phi_tilde2`` conjugates ``f`` to ``(p(z), b(z) w**d)``. ``phi_alpha0``
    satisfies ``phi_alpha0 o f = b a**-alpha0 phi_alpha0**d``, so together
    with ``phi1`` it conjugates ``f`` to a pure monomial map.
    """
    Z, W = _lift_point(x)
    lm = LiftedMap.from_plan(f, plan)
    FZ, FW = _image_lift(f, lm, Z, W)
    P1, P2, *_ = phi_lift(f, plan, spec, Z, W, tol)
    Q1, Q2, *_ = phi_lift(f, plan, spec, FZ, FW, tol)
    reasons = {}
    t2 = r2 = a0 = ra = None
    table = remainder_table(f, plan.gamma, plan.d)
    d = int(plan.d) if Fraction(plan.d).denominator == 1 else plan.d

    if plan.d >= 2:
        lc0 = cmath.log(chi(f, plan, Z, tol, lifted=True))
        lc1 = cmath.log(chi(f, plan, complex(FZ), tol, lifted=True))
        T0 = complex(P2) - lc0
        T1 = complex(Q2) - lc1
        # log of b(z) = b z**gamma (1 + rho)
        log_bz = table.logB + float(plan.gamma) * Z + cmath.log(1 + table.row(Z))
        t2 = cmath.exp(T0)
        r2 = abs(cmath.exp(T1 - log_bz - d * T0) - 1)
    else:
        reasons["phi_tilde2"] = "requires d >= 2"

    alpha0 = plan.alpha0
    if alpha0 is None:
        reasons["phi_alpha0"] = "undefined: delta = d"
    elif Fraction(alpha0).denominator != 1:
        reasons["phi_alpha0"] = f"alpha0 = {alpha0} is not an integer"
    else:
        a = int(alpha0)
        A0 = complex(P2) - a * complex(P1)
        A1 = complex(Q2) - a * complex(Q1)
        a0 = cmath.exp(A0)
        ra = abs(cmath.exp(A1 - (table.logB - a * table.logA) - d * A0) - 1)
    return DerivedCoordinates(t2, a0, r2, ra, reasons)
