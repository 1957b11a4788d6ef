"""scikit-learn style wrapper around the Böttcher coordinate."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from ._validation import check_eps, check_plan_index, check_points, check_positive_int, check_tol
from .bottcher import phi_lift, psi
from .classify import analyze, select_plan
from .exceptions import HypothesisError
from .poly import LogPoint, SkewProduct
from .region import estimate_R, region_for_plan


class BottcherTransformer(TransformerMixin, BaseEstimator):
    """Map points of ``U`` to Böttcher coordinates.

    ``fit`` ignores its data: it classifies ``(p, q)`` and fixes the region.
    ``transform`` takes an ``(n, 2)`` complex array of ``(z, w)`` points and
    returns ``(phi1, phi2)`` rows; ``inverse_transform`` solves back.

    Parameters
    ----------
    p, q : str
        The two coordinates of the skew product, in the map-file grammar.
    eps : float
        Target bound on the remainders when ``R`` is estimated.
    R : float or None
        Radius override. ``None`` estimates one from ``eps``.
    tol : float
        Tail-bound tolerance for each evaluation.
    max_iter : int
        Cap on the number of lift iterations.
    plan_index : {0, 1} or None
        Plan to use when ``delta`` sits exactly on an intercept.
    outside : {"raise", "nan"}
        What to do with rows that are not in ``U``.

    Examples
    --------
    >>> t = BottcherTransformer("z^3", "z^3*w^2 + z^5").fit()
    >>> t.transform([[100, 1e5]]).shape
    (1, 2)
    """

    def __init__(self, p="z^2", q="w^2", eps=0.01, R=None, tol=1e-12, max_iter=200, plan_index=None, outside="raise"):
        self.p = p
        self.q = q
        self.eps = eps
        self.R = R
        self.tol = tol
        self.max_iter = max_iter
        self.plan_index = plan_index
        self.outside = outside

    def fit(self, X=None, y=None):
        eps = check_eps(self.eps)
        check_tol(self.tol)
        check_positive_int(self.max_iter, "max_iter")
        check_plan_index(self.plan_index)
        if self.outside not in ("raise", "nan"):
            raise ValueError("outside must be 'raise' or 'nan'")
        f = SkewProduct.from_text(self.p, self.q)
        plan = select_plan(analyze(f), self.plan_index)
        if not plan.degree_ok:
            raise HypothesisError(f"degree condition fails: {plan.degree_condition}")
        if self.R is None:
            spec = estimate_R(f, plan, eps)
        else:
            spec = region_for_plan(plan, float(self.R), eps=eps, contraction=plan.d == 1)
        self.map_ = f
        self.plan_ = plan
        self.region_ = spec
        self.n_features_in_ = 2
        return self

    def _check_fitted(self):
        if not hasattr(self, "region_"):
            raise NotFittedError("call fit before transform")

    def _lift(self, X):
        X = check_points(X)
        pts = [LogPoint.from_point(z, w) if z != 0 and w != 0 else None for z, w in X]
        Z = np.array([p.Z if p else np.nan for p in pts], dtype=complex)
        W = np.array([p.W if p else np.nan for p in pts], dtype=complex)
        inside = np.array([p is not None for p in pts]) & np.asarray(self.region_.member_lift(Z, W), bool)
        if not inside.all() and self.outside == "raise":
            bad = np.flatnonzero(~inside)
            raise HypothesisError(f"rows {bad[:10].tolist()} are not in the region")
        return Z, W, inside

    def transform(self, X):
        self._check_fitted()
        Z, W, inside = self._lift(X)
        out = np.full((Z.size, 2), np.nan + 0j)
        if inside.any():
            P1, P2, n, tail, res, ok = phi_lift(self.map_, self.plan_, self.region_, Z[inside], W[inside], self.tol, self.max_iter)
            with np.errstate(over="ignore"):
                out[inside, 0] = np.exp(P1)
                out[inside, 1] = np.exp(P2)
            self.n_used_ = n
            self.tail_bound_ = tail
            self.residuals_ = res
        return out

    def inverse_transform(self, Y):
        self._check_fitted()
        Y = check_points(Y, "Y")
        return np.array([psi(self.map_, self.plan_, self.region_, (a, b), tol=min(1e-10, self.tol * 1e2)) for a, b in Y])
