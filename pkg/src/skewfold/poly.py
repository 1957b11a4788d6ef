"""Sparse polynomials with exact exponents, the map-file grammar, and
overflow-safe remainder evaluation in logarithmic coordinates.

A polynomial is a finite sum ``sum c * z**i * w**j`` with exponents stored as
:class:`fractions.Fraction` and coefficients as Python complex numbers.
User input always has non-negative integer exponents; rational and negative
exponents only appear inside transformed objects.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

import mpmath
import numpy as np

from .exceptions import (
    BranchAmbiguityError,
    InvalidMapError,
    ParseError,
    RemainderOverflowError,
)

__all__ = [
    "Monomial",
    "Polynomial",
    "SkewProduct",
    "LogPoint",
    "parse_polynomial",
    "parse_map",
    "evaluate",
    "log_evaluate",
    "relative_remainder",
    "remainder_table",
    "RemainderTable",
    "format_number",
]

# exp() overflows double precision just above this
EXP_MAX = 709.78


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        if not x.is_integer():
            raise TypeError(f"exponent {x!r} must be an exact rational")
        return Fraction(int(x))
    return Fraction(x)


@dataclass(frozen=True, order=True)
class Monomial:
    """A single term ``coeff * z**i * w**j``."""

    i: Fraction
    j: Fraction
    coeff: complex = 1.0 + 0j

    def __post_init__(self):
        object.__setattr__(self, "i", _frac(self.i))
        object.__setattr__(self, "j", _frac(self.j))
        object.__setattr__(self, "coeff", complex(self.coeff))
        if self.coeff == 0:
            raise ValueError("stored monomials must have a non-zero coefficient")

    @property
    def exponent(self) -> tuple[Fraction, Fraction]:
        return (self.i, self.j)


class Polynomial:
    """Immutable sparse polynomial in ``z`` and ``w``.

    Parameters
    ----------
    terms : mapping or iterable
        Either a mapping ``{(i, j): coeff}`` or an iterable of
        :class:`Monomial` / ``(i, j, coeff)`` triples. Duplicate exponents are
        merged and zero coefficients dropped.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms=()):
        merged: dict[tuple[Fraction, Fraction], complex] = {}
        if isinstance(terms, Mapping):
            items = ((k[0], k[1], v) for k, v in terms.items())
        else:
            items = (
                (t.i, t.j, t.coeff) if isinstance(t, Monomial) else tuple(t)
                for t in terms
            )
        for i, j, c in items:
            key = (_frac(i), _frac(j))
            merged[key] = merged.get(key, 0j) + complex(c)
        self._terms = tuple(
            Monomial(i, j, c) for (i, j), c in sorted(merged.items()) if c != 0
        )
        self._hash = None

    # -- construction helpers -------------------------------------------------
    @classmethod
    def monomial(cls, i, j=0, coeff=1.0) -> "Polynomial":
        return cls([(i, j, coeff)])

    @classmethod
    def parse(cls, text: str) -> "Polynomial":
        return parse_polynomial(text)

    # -- inspection -----------------------------------------------------------
    @property
    def monomials(self) -> tuple[Monomial, ...]:
        return self._terms

    @property
    def exponents(self) -> list[tuple[Fraction, Fraction]]:
        return [m.exponent for m in self._terms]

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def coeff(self, i, j=0) -> complex:
        key = (_frac(i), _frac(j))
        for m in self._terms:
            if m.exponent == key:
                return m.coeff
        return 0j

    @property
    def degree(self) -> Fraction:
        """Total degree ``max(i + j)``."""
        if not self._terms:
            raise ValueError("the zero polynomial has no degree")
        return max(m.i + m.j for m in self._terms)

    @property
    def degree_z(self) -> Fraction:
        return max(m.i for m in self._terms)

    @property
    def degree_w(self) -> Fraction:
        return max(m.j for m in self._terms)

    @property
    def is_univariate(self) -> bool:
        return all(m.j == 0 for m in self._terms)

    @property
    def has_integer_exponents(self) -> bool:
        return all(
            m.i.denominator == 1 and m.j.denominator == 1 and m.i >= 0 and m.j >= 0
            for m in self._terms
        )

    def coefficient_vector(self, exponents) -> np.ndarray:
        return np.array([self.coeff(i, j) for i, j in exponents], dtype=complex)

    def row(self, j) -> "Polynomial":
        """Terms whose w-exponent equals ``j``, as a polynomial in z."""
        j = _frac(j)
        return Polynomial([(m.i, 0, m.coeff) for m in self._terms if m.j == j])

    # -- arithmetic -----------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return Polynomial(list(self._terms) + list(other._terms))

    def __neg__(self):
        return Polynomial([(m.i, m.j, -m.coeff) for m in self._terms])

    def __sub__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return Polynomial(
                (a.i + b.i, a.j + b.j, a.coeff * b.coeff)
                for a in self._terms
                for b in other._terms
            )
        if isinstance(other, (int, float, complex)):
            return Polynomial([(m.i, m.j, m.coeff * other) for m in self._terms])
        return NotImplemented

    __rmul__ = __mul__

    def derivative(self, var: str = "z") -> "Polynomial":
        if var == "z":
            return Polynomial(
                (m.i - 1, m.j, m.coeff * float(m.i)) for m in self._terms if m.i != 0
            )
        if var == "w":
            return Polynomial(
                (m.i, m.j - 1, m.coeff * float(m.j)) for m in self._terms if m.j != 0
            )
        raise ValueError(f"unknown variable {var!r}")

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._terms)
        return self._hash

    def __call__(self, z, w=0j):
        return evaluate(self, z, w)

    def __repr__(self):
        return f"Polynomial({str(self)!r})"

    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for m in sorted(self._terms, key=lambda t: (-(t.i + t.j), -t.j)):
            factors = []
            if m.coeff != 1 or (m.i == 0 and m.j == 0):
                factors.append(_format_coeff(m.coeff))
            for var, e in (("z", m.i), ("w", m.j)):
                if e == 0:
                    continue
                if e == 1:
                    factors.append(var)
                elif e.denominator == 1 and e > 0:
                    factors.append(f"{var}^{e}")
                else:
                    factors.append(f"{var}^({e})")
            parts.append("*".join(factors))
        return " + ".join(parts)


def format_number(x: float) -> str:
    """Format a real number with 17 significant digits."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def _format_coeff(c: complex) -> str:
    if c.imag == 0:
        s = format_number(c.real)
        return s if c.real >= 0 else f"({s})"
    sign = "+" if c.imag >= 0 else "-"
    return f"({format_number(c.real)}{sign}{format_number(abs(c.imag))}i)"


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def _power(x: complex, e: Fraction) -> complex:
    if e.denominator == 1:
        n = int(e)
        if n >= 0:
            return x**n
        if x == 0:
            raise ZeroDivisionError("negative power of zero")
        return 1 / x ** (-n)
    if x == 0:
        if e > 0:
            return 0j
        raise ZeroDivisionError("negative power of zero")
    x = complex(x)
    if x.imag == 0 and x.real < 0:
        raise BranchAmbiguityError(
            f"fractional exponent {e} at {x} lies on the principal branch cut"
        )
    return cmath.exp(float(e) * cmath.log(x))


def evaluate(poly: Polynomial, z, w=0j) -> complex:
    """Evaluate ``poly`` at a single point by direct term summation."""
    total = 0j
    for m in poly.monomials:
        term = m.coeff
        if m.i != 0:
            term *= _power(z, m.i)
        if m.j != 0:
            term *= _power(w, m.j)
        total += term
    return total


def log_evaluate(poly: Polynomial, Z, W=0j):
    """Logarithm of ``poly(exp(Z), exp(W))`` without forming the value.

    The largest term is factored out before summing, so this works for
    moduli far beyond the double-precision range. The imaginary part is an
    argument of the value (not necessarily continuous in the inputs).
    Returns ``-inf`` where the value vanishes.
    """
    Z = np.asarray(Z, dtype=complex)
    W = np.asarray(W, dtype=complex)
    expo = np.stack(
        [
            float(m.i) * Z + float(m.j) * W + cmath.log(m.coeff)
            for m in poly.monomials
        ]
    )
    top = expo.real.max(axis=0)
    with np.errstate(under="ignore"):
        s = np.exp(expo - top).sum(axis=0)
    with np.errstate(divide="ignore"):
        out = top + np.log(s)
    return complex(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# skew products and lifted points
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SkewProduct:
    """The map ``f(z, w) = (p(z), q(z, w))``.

    Enforces the standing assumptions: ``deg p >= 2``, ``deg q >= 2``,
    integer exponents, and at least one monomial of ``q`` containing ``w``.
    """

    p: Polynomial
    q: Polynomial

    def __post_init__(self):
        if not self.p or not self.q:
            raise InvalidMapError("p and q must both be non-zero")
        if not self.p.is_univariate:
            raise InvalidMapError("p must not depend on w")
        if not (self.p.has_integer_exponents and self.q.has_integer_exponents):
            raise InvalidMapError("exponents must be non-negative integers")
        if self.p.degree < 2:
            raise InvalidMapError(f"deg p = {self.p.degree} but deg p >= 2 is required")
        if self.q.degree < 2:
            raise InvalidMapError(f"deg q = {self.q.degree} but deg q >= 2 is required")
        if all(m.j == 0 for m in self.q.monomials):
            raise InvalidMapError("q must contain at least one monomial with a power of w")

    @classmethod
    def from_text(cls, p: str, q: str) -> "SkewProduct":
        return cls(parse_polynomial(p), parse_polynomial(q))

    @property
    def delta(self) -> int:
        return int(self.p.degree)

    @property
    def a_delta(self) -> complex:
        return self.p.coeff(self.delta, 0)

    @property
    def degQ(self) -> int:
        return int(self.q.degree)

    @property
    def is_monomial(self) -> bool:
        return len(self.p) == 1 and len(self.q) == 1

    def __call__(self, z, w):
        return evaluate(self.p, z), evaluate(self.q, z, w)

    def log_image(self, Z, W):
        """Log-coordinates of ``f(exp Z, exp W)`` via :func:`log_evaluate`."""
        return log_evaluate(self.p, Z), log_evaluate(self.q, Z, W)

    def __str__(self):
        return f"p={self.p}; q={self.q}"


@dataclass(frozen=True)
class LogPoint:
    """A point of the lift: ``(z, w) = (exp Z, exp W)``."""

    Z: complex
    W: complex

    @classmethod
    def from_point(cls, z, w) -> "LogPoint":
        if z == 0 or w == 0:
            raise ValueError("a lifted point needs z != 0 and w != 0")
        return cls(cmath.log(complex(z)), cmath.log(complex(w)))

    def to_point(self) -> tuple[complex, complex]:
        return cmath.exp(self.Z), cmath.exp(self.W)


# ---------------------------------------------------------------------------
# relative remainders
# ---------------------------------------------------------------------------


class RemainderTable:
    """Precomputed exponent/coefficient data for ``zeta`` and ``eta``.

    ``zeta = p(z)/(a z**delta) - 1`` and ``eta = q(z,w)/(b z**gamma w**d) - 1``
    are evaluated as sums of ``exp(e_z * Z + e_w * W + log(c/c_dom))``.
    """

    def __init__(self, f: SkewProduct, gamma, d):
        gamma, d = _frac(gamma), _frac(d)
        self.delta = f.delta
        self.gamma = gamma
        self.d = d
        b = f.q.coeff(gamma, d)
        if b == 0:
            raise ValueError(f"q has no monomial z^{gamma} w^{d}")
        self.a = f.a_delta
        self.b = b
        self.logA = cmath.log(self.a)
        self.logB = cmath.log(b)
        self.zeta_terms = [
            (m.i - self.delta, m.coeff / self.a)
            for m in f.p.monomials
            if m.i != self.delta
        ]
        self.eta_terms = [
            (m.i - gamma, m.j - d, m.coeff / b)
            for m in f.q.monomials
            if (m.i, m.j) != (gamma, d)
        ]
        # the w^d row of q, relative to its leading term (used by chi)
        self.row_terms = [
            (m.i - gamma, m.coeff / b)
            for m in f.q.monomials
            if m.j == d and m.i != gamma
        ]
        self._z = (
            np.array([float(e) for e, _ in self.zeta_terms]),
            np.array([cmath.log(c) for _, c in self.zeta_terms], dtype=complex),
        )
        self._w = (
            np.array([float(e) for e, _, _ in self.eta_terms]),
            np.array([float(e) for _, e, _ in self.eta_terms]),
            np.array([cmath.log(c) for _, _, c in self.eta_terms], dtype=complex),
        )
        self._r = (
            np.array([float(e) for e, _ in self.row_terms]),
            np.array([cmath.log(c) for _, c in self.row_terms], dtype=complex),
        )

    @staticmethod
    def _sum(expo: np.ndarray):
        if expo.shape[0] == 0:
            return np.zeros(expo.shape[1:], dtype=complex)
        re_part = expo.real
        if np.any(re_part > EXP_MAX):
            raise RemainderOverflowError(
                "a remainder term overflows; the point is far outside the region"
            )
        order = np.argsort(-re_part, axis=0, kind="stable")
        with np.errstate(under="ignore"):
            vals = np.exp(np.take_along_axis(expo, order, axis=0))
        return vals.sum(axis=0)

    def zeta(self, Z):
        Z = np.asarray(Z, dtype=complex)
        ez, lc = self._z
        expo = ez.reshape((-1,) + (1,) * Z.ndim) * Z + lc.reshape((-1,) + (1,) * Z.ndim)
        out = self._sum(expo)
        return complex(out) if out.ndim == 0 else out

    def eta(self, Z, W):
        Z = np.asarray(Z, dtype=complex)
        W = np.asarray(W, dtype=complex)
        Z, W = np.broadcast_arrays(Z, W)
        ez, ew, lc = self._w
        shape = (-1,) + (1,) * Z.ndim
        expo = ez.reshape(shape) * Z + ew.reshape(shape) * W + lc.reshape(shape)
        out = self._sum(expo)
        return complex(out) if out.ndim == 0 else out

    def row(self, Z):
        """``b(z)/(b_{gamma d} z**gamma) - 1`` for the w^d coefficient b(z)."""
        Z = np.asarray(Z, dtype=complex)
        ez, lc = self._r
        shape = (-1,) + (1,) * Z.ndim
        out = self._sum(ez.reshape(shape) * Z + lc.reshape(shape))
        return complex(out) if out.ndim == 0 else out

    # extended precision counterparts ---------------------------------------
    def zeta_mp(self, Z):
        return mpmath.fsum(
            mpmath.exp(_mpf(e) * Z + mpmath.log(mpmath.mpc(c))) for e, c in self.zeta_terms
        )

    def eta_mp(self, Z, W):
        return mpmath.fsum(
            mpmath.exp(_mpf(ei) * Z + _mpf(ej) * W + mpmath.log(mpmath.mpc(c)))
            for ei, ej, c in self.eta_terms
        )

    def row_mp(self, Z):
        return mpmath.fsum(
            mpmath.exp(_mpf(e) * Z + mpmath.log(mpmath.mpc(c))) for e, c in self.row_terms
        )


def _mpf(x: Fraction):
    return mpmath.mpf(x.numerator) / x.denominator


@lru_cache(maxsize=256)
def remainder_table(f: SkewProduct, gamma, d) -> RemainderTable:
    return RemainderTable(f, gamma, d)


def relative_remainder(f: SkewProduct, plan, x: LogPoint):
    """Return ``(zeta, eta)`` at the lifted point ``x`` for the plan's dominant term."""
    table = remainder_table(f, plan.gamma, plan.d)
    return table.zeta(x.Z), table.eta(x.Z, x.W)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*^=();\n])
  | (?P<space>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        col = pos - line_start + 1
        if kind == "op" and m.group() == "\n":
            toks.append(_Tok("sep", "\n", line, col))
            line += 1
            line_start = m.end()
        elif kind == "op" and m.group() == ";":
            toks.append(_Tok("sep", ";", line, col))
        elif kind not in ("space", "comment"):
            toks.append(_Tok(kind, m.group(), line, col))
        pos = m.end()
    toks.append(_Tok("end", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.k = 0

    @property
    def cur(self) -> _Tok:
        return self.toks[self.k]

    def error(self, msg, tok=None):
        tok = tok or self.cur
        return ParseError(msg, tok.line, tok.col)

    def take(self, kind, text=None) -> _Tok:
        tok = self.cur
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            got = tok.text if tok.kind != "end" else "end of input"
            raise self.error(f"expected {want!r}, found {got!r}")
        self.k += 1
        return tok

    def at(self, kind, text=None) -> bool:
        tok = self.cur
        return tok.kind == kind and (text is None or tok.text == text)

    # expression := [sign] term (sign term)*
    def expression(self) -> Polynomial:
        terms = []
        sign = 1.0
        if self.at("op", "+") or self.at("op", "-"):
            sign = -1.0 if self.take("op").text == "-" else 1.0
        terms.append(self.term(sign))
        while self.at("op", "+") or self.at("op", "-"):
            sign = -1.0 if self.take("op").text == "-" else 1.0
            terms.append(self.term(sign))
        return Polynomial(terms)

    def term(self, sign):
        coeff, i, j = complex(sign), 0, 0
        first = True
        while True:
            if not first:
                if self.at("op", "*"):
                    self.take("op")
                elif not (self.at("name") or self.at("op", "(")):
                    break
            first = False
            tok = self.cur
            if tok.kind == "num":
                self.k += 1
                coeff *= float(tok.text)
            elif tok.kind == "op" and tok.text == "(":
                coeff *= self.complex_literal()
            elif tok.kind == "name":
                if tok.text not in ("z", "w"):
                    raise self.error(f"unknown symbol {tok.text!r} (only z and w are variables)")
                self.k += 1
                e = 1
                if self.at("op", "^"):
                    self.take("op")
                    etok = self.cur
                    if etok.kind != "num" or not etok.text.isdigit():
                        raise self.error("exponent must be a non-negative integer", etok)
                    self.k += 1
                    e = int(etok.text)
                if tok.text == "z":
                    i += e
                else:
                    j += e
            else:
                got = tok.text if tok.kind != "end" else "end of input"
                raise self.error(f"expected a coefficient or variable, found {got!r}")
        return (i, j, coeff)

    def complex_literal(self) -> complex:
        open_tok = self.take("op", "(")
        value = 0j
        seen = False
        while not self.at("op", ")"):
            sign = 1.0
            if self.at("op", "+") or self.at("op", "-"):
                sign = -1.0 if self.take("op").text == "-" else 1.0
            elif seen:
                raise self.error("expected '+' or '-' inside complex literal")
            mag = 1.0
            had_num = False
            if self.at("num"):
                mag = float(self.take("num").text)
                had_num = True
            if self.at("name", "i"):
                self.take("name")
                value += complex(0, sign * mag)
            elif had_num:
                value += sign * mag
            else:
                raise self.error("malformed complex literal")
            seen = True
        if not seen:
            raise self.error("empty parentheses", open_tok)
        self.take("op", ")")
        return value


def parse_polynomial(text: str) -> Polynomial:
    """Parse a polynomial such as ``"3*z^2*w - (1+2i)*w^3 + 4"``."""
    parser = _Parser(text)
    while parser.at("sep", "\n"):
        parser.k += 1
    poly = parser.expression()
    while parser.at("sep", "\n"):
        parser.k += 1
    if not parser.at("end"):
        raise parser.error(f"unexpected {parser.cur.text!r} after expression")
    return poly


def parse_map(text: str) -> SkewProduct:
    """Parse a map file: assignments ``p = ...`` and ``q = ...`` separated by
    ``;`` or newlines. ``#`` starts a comment."""
    parser = _Parser(text)
    found: dict[str, Polynomial] = {}
    while not parser.at("end"):
        if parser.at("sep"):
            parser.k += 1
            continue
        name = parser.take("name")
        if name.text not in ("p", "q"):
            raise parser.error(f"unknown assignment target {name.text!r}", name)
        if name.text in found:
            raise parser.error(f"{name.text} assigned twice", name)
        parser.take("op", "=")
        found[name.text] = parser.expression()
        if not (parser.at("sep") or parser.at("end")):
            raise parser.error(f"unexpected {parser.cur.text!r}")
    for key in ("p", "q"):
        if key not in found:
            end = parser.cur
            raise ParseError(f"missing assignment for {key}", end.line, end.col)
    p = found["p"]
    if not p.is_univariate:
        raise InvalidMapError("p must not depend on w")
    return SkewProduct(p, found["q"])
