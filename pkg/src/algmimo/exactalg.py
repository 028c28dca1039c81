"""Exact rational arithmetic on dense bivariate polynomials.

A :class:`BiPoly` stores a grid of ``Fraction`` coefficients; entry ``(i, j)``
multiplies ``v1**i * v2**j``. The pair of variables is recorded by a
:class:`VarTag` so that a polynomial in ``(m, z)`` is never silently mixed with
one in ``(mu, z)``.

Resultants are computed by evaluating the Sylvester matrix at integer points,
taking fraction-free (Bareiss) determinants, and interpolating exactly.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Mapping, Union

import numpy as np

from . import _univariate as uni

Rational = Fraction

DEFAULT_DEGREE_CAP = 64


class ExactAlgebraError(ValueError):
    pass


class DegeneratePolynomialError(ExactAlgebraError):
    pass


class DegreeCapError(ExactAlgebraError):
    pass


class VarTag(enum.Enum):
    MZ = ("m", "z")
    MUZ = ("mu", "z")
    PSIZ = ("psi", "z")
    CHIW = ("chi", "w")
    SW = ("s", "w")

    @property
    def names(self):
        return self.value


def as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not exact; pass a Fraction, int or 'p/q' string")
    return Fraction(x)


# -- sparse dict arithmetic (internal) ----------------------------------------

def _dmul(a, b):
    out = {}
    for (i1, j1), c1 in a.items():
        for (i2, j2), c2 in b.items():
            k = (i1 + i2, j1 + j2)
            out[k] = out.get(k, 0) + c1 * c2
    return {k: v for k, v in out.items() if v}


def _dadd(a, b, scale=1):
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + scale * v
    return {k: v for k, v in out.items() if v}


def _dpowers(a, n):
    pw = [{(0, 0): 1}]
    for _ in range(n):
        pw.append(_dmul(pw[-1], a))
    return pw


def _as_dict(x):
    if isinstance(x, BiPoly):
        return x.to_dict()
    if isinstance(x, Mapping):
        return {k: as_rational(v) for k, v in x.items() if v}
    c = as_rational(x)
    return {(0, 0): c} if c else {}


# -- the polynomial type ---------------------------------------------------------

@dataclass(frozen=True)
class BiPoly:
    """Dense bivariate polynomial with exact rational coefficients."""

    coeffs: tuple
    var_tag: VarTag = VarTag.MZ

    def __post_init__(self):
        rows = [[as_rational(c) for c in row] for row in self.coeffs]
        width = max((len(r) for r in rows), default=0)
        rows = [r + [Fraction(0)] * (width - len(r)) for r in rows]
        while rows and not any(rows[-1]):
            rows.pop()
        while width and not any(r[width - 1] for r in rows):
            width -= 1
            rows = [r[:width] for r in rows]
        object.__setattr__(self, "coeffs", tuple(tuple(r) for r in rows))

    @classmethod
    def from_dict(cls, terms, var_tag=VarTag.MZ):
        terms = {k: v for k, v in terms.items() if v}
        if not terms:
            return cls((), var_tag)
        d1 = max(i for i, _ in terms)
        d2 = max(j for _, j in terms)
        grid = [[Fraction(0)] * (d2 + 1) for _ in range(d1 + 1)]
        for (i, j), c in terms.items():
            grid[i][j] = as_rational(c)
        return cls(tuple(tuple(r) for r in grid), var_tag)

    def to_dict(self):
        return {(i, j): c for i, row in enumerate(self.coeffs) for j, c in enumerate(row) if c}

    @property
    def deg1(self):
        return len(self.coeffs) - 1

    @property
    def deg2(self):
        return len(self.coeffs[0]) - 1 if self.coeffs else -1

    def is_zero(self):
        return not self.coeffs

    def coeff(self, i, j):
        try:
            return self.coeffs[i][j]
        except IndexError:
            return Fraction(0)

    def retag(self, var_tag):
        return BiPoly(self.coeffs, var_tag)

    def transpose(self, var_tag):
        """Swap the roles of the two variables."""
        return BiPoly.from_dict({(j, i): c for (i, j), c in self.to_dict().items()}, var_tag)

    def derivative_first(self):
        return BiPoly.from_dict({(i - 1, j): i * c for (i, j), c in self.to_dict().items() if i}, self.var_tag)

    def row(self, i):
        """Coefficient of ``v1**i`` as a univariate polynomial in ``v2``."""
        return uni.trim(self.coeffs[i]) if i <= self.deg1 else ()

    def float_coeffs(self):
        """Coefficient grid as floats, scaled so the largest magnitude is one."""
        if self.is_zero():
            return np.zeros((0, 0))
        big = max(abs(c) for row in self.coeffs for c in row)
        return np.array([[float(c / big) for c in row] for row in self.coeffs])

    def __call__(self, a, b):
        return eval_complex(self, a, b)

    def __str__(self):
        v1, v2 = self.var_tag.names
        terms = []
        for (i, j), c in sorted(self.to_dict().items(), reverse=True):
            mono = "*".join(
                s for s in (
                    "" if i == 0 else (v1 if i == 1 else f"{v1}^{i}"),
                    "" if j == 0 else (v2 if j == 1 else f"{v2}^{j}"),
                ) if s
            )
            mag = abs(c)
            if mono:
                body = mono if mag == 1 else f"{_fmt(mag)}*{mono}"
            else:
                body = _fmt(mag)
            terms.append(("-" if c < 0 else "+", body))
        if not terms:
            return "0"
        head = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        return head + "".join(f" {s} {b}" for s, b in terms[1:])

    # canonical text form: "TAG; D1; D2; a_00 a_01 ..."
    def dumps(self):
        d1, d2 = self.deg1, self.deg2
        flat = " ".join(f"{c.numerator}/{c.denominator}" for row in self.coeffs for c in row)
        return f"{self.var_tag.name}; {d1}; {d2}; {flat}"

    @classmethod
    def loads(cls, text):
        parts = [s.strip() for s in text.strip().split(";")]
        if len(parts) != 4:
            raise ValueError(f"malformed polynomial record: {text!r}")
        tag = VarTag[parts[0]]
        d1, d2 = int(parts[1]), int(parts[2])
        vals = [Fraction(tok) for tok in parts[3].split()]
        if len(vals) != (d1 + 1) * (d2 + 1):
            raise ValueError(f"expected {(d1 + 1) * (d2 + 1)} coefficients, got {len(vals)}")
        grid = [vals[i * (d2 + 1):(i + 1) * (d2 + 1)] for i in range(d1 + 1)]
        return cls(tuple(tuple(r) for r in grid), tag)


def _fmt(c):
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


PolyLike = Union[BiPoly, Mapping, int, Fraction, str]


def poly(terms, var_tag=VarTag.MZ):
    """Build a BiPoly from ``{(i, j): coefficient}``."""
    return BiPoly.from_dict({k: as_rational(v) for k, v in terms.items()}, var_tag)


def _check_cap(p, cap):
    if cap is not None and (p.deg1 > cap or p.deg2 > cap):
        raise DegreeCapError(
            f"degree ({p.deg1}, {p.deg2}) exceeds the cap of {cap} per variable"
        )


# -- normalization -------------------------------------------------------------------

def _integer_content_normalize(terms):
    den = 1
    for c in terms.values():
        den = den * c.denominator // gcd(den, c.denominator)
    ints = {k: int(c * den) for k, c in terms.items()}
    g = 0
    for v in ints.values():
        g = gcd(g, v)
    lead = ints[max(ints)]
    if lead < 0:
        g = -g
    return {k: Fraction(v // g) for k, v in ints.items()}


def normalize(p: BiPoly) -> BiPoly:
    """Primitive, sign-canonical form of ``p``.

    Removes the content with respect to the second variable (the gcd of the
    coefficient rows, which includes any rational constant) and makes the
    coefficient of the lexicographically largest monomial positive.
    """
    if p.is_zero():
        raise DegeneratePolynomialError("degenerate polynomial")
    if p.deg1 >= 1:
        g = ()
        for i in range(p.deg1 + 1):
            r = p.row(i)
            if r:
                g = uni.gcd_poly(g, r) if g else uni.monic(r)
            if len(g) == 1:
                break
        if len(g) > 1:
            rows = []
            for i in range(p.deg1 + 1):
                q, r = uni.divmod_(p.row(i), g)
                assert not r
                rows.append(q)
            p = BiPoly(tuple(rows), p.var_tag)
    return BiPoly.from_dict(_integer_content_normalize(p.to_dict()), p.var_tag)


def strip_first_monomial(p: BiPoly) -> BiPoly:
    """Divide out the largest power of the first variable dividing ``p``."""
    k = min(i for i, _ in p.to_dict())
    if k == 0:
        return p
    return BiPoly.from_dict({(i - k, j): c for (i, j), c in p.to_dict().items()}, p.var_tag)


# -- substitution --------------------------------------------------------------------

def substitute_rational(p: BiPoly, n1: PolyLike, d1: PolyLike, n2: PolyLike, d2: PolyLike,
                        var_tag: VarTag | None = None, degree_cap=DEFAULT_DEGREE_CAP) -> BiPoly:
    """Substitute ``v1 := n1/d1`` and ``v2 := n2/d2`` and clear denominators.

    ``n1, d1, n2, d2`` are polynomials in the *target* variables (BiPoly,
    ``{(i, j): c}`` dict, or a rational constant). The result is
    ``normalize(d1**D1 * d2**D2 * p(n1/d1, n2/d2))`` tagged with ``var_tag``
    (default: the tag of ``p``).
    """
    if p.is_zero():
        raise DegeneratePolynomialError("degenerate polynomial")
    n1, d1, n2, d2 = (_as_dict(x) for x in (n1, d1, n2, d2))
    if not d1 or not d2:
        raise ZeroDivisionError("substitution denominator is identically zero")
    D1, D2 = p.deg1, p.deg2
    pn1, pd1 = _dpowers(n1, D1), _dpowers(d1, D1)
    pn2, pd2 = _dpowers(n2, D2), _dpowers(d2, D2)
    total = {}
    for i in range(D1 + 1):
        inner = {}
        for j in range(D2 + 1):
            c = p.coeffs[i][j]
            if c:
                inner = _dadd(inner, _dmul(pn2[j], pd2[D2 - j]), c)
        if inner:
            total = _dadd(total, _dmul(inner, _dmul(pn1[i], pd1[D1 - i])))
    if not total:
        raise DegeneratePolynomialError("substitution annihilates polynomial")
    out = normalize(BiPoly.from_dict(total, var_tag or p.var_tag))
    _check_cap(out, degree_cap)
    return out


# -- resultants ------------------------------------------------------------------------

def _bareiss_det(rows):
    """Determinant of an integer matrix by fraction-free elimination."""
    a = [list(r) for r in rows]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k]:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        rk = a[k]
        for i in range(k + 1, n):
            ri = a[i]
            aik = ri[k]
            for j in range(k + 1, n):
                ri[j] = (ri[j] * akk - aik * rk[j]) // prev
            ri[k] = 0
        prev = akk
    return sign * a[n - 1][n - 1]


def sylvester_rows(pc, qc):
    """Sylvester matrix rows for coefficient lists (constant term first)."""
    n, m = len(pc) - 1, len(qc) - 1
    size = n + m
    rows = []
    for k in range(m):
        row = [0] * size
        for t, c in enumerate(reversed(pc)):
            row[k + t] = c
        rows.append(row)
    for k in range(n):
        row = [0] * size
        for t, c in enumerate(reversed(qc)):
            row[k + t] = c
        rows.append(row)
    return rows


def _to_int_terms(terms):
    den = 1
    for c in terms.values():
        den = den * Fraction(c).denominator // gcd(den, Fraction(c).denominator)
    return {k: int(Fraction(c) * den) for k, c in terms.items()}, den


def resultant_terms(p_terms, q_terms):
    """Resultant in ``u`` of two polynomials in ``(u, a, b)``.

    Inputs map exponent triples ``(u, a, b)`` to rationals. Returns a dict
    ``{(a, b): Fraction}``: the exact determinant of the formal Sylvester
    matrix (formal degrees = largest u-exponent present).
    """
    if not p_terms or not q_terms:
        raise ExactAlgebraError("resultant of a zero polynomial")
    n = max(k[0] for k in p_terms)
    m = max(k[0] for k in q_terms)
    if n == 0 or m == 0:
        raise ExactAlgebraError("resultant needs positive degree in the eliminated variable")
    pi, pden = _to_int_terms(p_terms)
    qi, qden = _to_int_terms(q_terms)
    da = m * max(k[1] for k in pi) + n * max(k[1] for k in qi)
    db = m * max(k[2] for k in pi) + n * max(k[2] for k in qi)

    def coeffs_at(terms, deg, a, b, apw, bpw):
        out = [0] * (deg + 1)
        for (u, i, j), c in terms.items():
            out[u] += c * apw[i] * bpw[j]
        return out

    a_pts = list(range(da + 1))
    b_pts = list(range(db + 1))
    maxa = max(max(k[1] for k in pi), max(k[1] for k in qi))
    maxb = max(max(k[2] for k in pi), max(k[2] for k in qi))
    table = []
    for a in a_pts:
        apw = [a**e for e in range(maxa + 1)]
        row = []
        for b in b_pts:
            bpw = [b**e for e in range(maxb + 1)]
            pc = coeffs_at(pi, n, a, b, apw, bpw)
            qc = coeffs_at(qi, m, a, b, apw, bpw)
            row.append(_bareiss_det(sylvester_rows(pc, qc)))
        table.append(row)
    # interpolate in b for each a, then in a for each b-coefficient
    b_fracs = [Fraction(b) for b in b_pts]
    per_a = [uni.interpolate(b_fracs, row) for row in table]
    out = {}
    a_fracs = [Fraction(a) for a in a_pts]
    for j in range(db + 1):
        col = [pa[j] if j < len(pa) else Fraction(0) for pa in per_a]
        ca = uni.interpolate(a_fracs, col)
        for i, c in enumerate(ca):
            if c:
                out[(i, j)] = c
    # undo the integer scaling: Res(sp, tq) = s**m t**n Res(p, q)
    scale = Fraction(pden) ** m * Fraction(qden) ** n
    return {k: v / scale for k, v in out.items()}


def resultant(p: BiPoly, q: BiPoly):
    """Resultant of ``p`` and ``q`` with respect to their first variable.

    Returns the coefficients (constant term first) of a univariate polynomial
    in the second variable; zero exactly when ``p`` and ``q`` share a root in
    the first variable (or both leading coefficients vanish).
    """
    if p.deg1 < 1 or q.deg1 < 1:
        raise ExactAlgebraError("resultant needs positive degree in the eliminated variable")
    pt = {(i, 0, j): c for (i, j), c in p.to_dict().items()}
    qt = {(i, 0, j): c for (i, j), c in q.to_dict().items()}
    res = resultant_terms(pt, qt)
    if not res:
        return ()
    deg = max(j for _, j in res)
    return uni.trim([res.get((0, j), 0) for j in range(deg + 1)])


def discriminant_in_first(p: BiPoly):
    """``Res_v1(p, dp/dv1)`` as a primitive univariate polynomial in ``v2``."""
    if p.deg1 < 2:
        raise ExactAlgebraError("no branch points")
    r = resultant(p, p.derivative_first())
    return uni.primitive(r)


# -- gcd / squarefree (via sympy's multivariate gcd) ----------------------------------

def _sympy_ring():
    from sympy.polys.domains import ZZ
    from sympy.polys.rings import ring

    R, _, _ = ring("x,y", ZZ)
    return R


def _to_ring(R, p):
    ints, _ = _to_int_terms(p.to_dict())
    return R.from_dict({k: v for k, v in ints.items()})


def gcd_bivariate(p: BiPoly, q: BiPoly) -> BiPoly:
    R = _sympy_ring()
    g = _to_ring(R, p).gcd(_to_ring(R, q))
    return BiPoly.from_dict({k: Fraction(int(v)) for k, v in g.to_dict().items()}, p.var_tag)


def exact_quotient(p: BiPoly, q: BiPoly) -> BiPoly:
    R = _sympy_ring()
    quo = _to_ring(R, p).exquo(_to_ring(R, q))
    return BiPoly.from_dict({k: Fraction(int(v)) for k, v in quo.to_dict().items()}, p.var_tag)


def squarefree_part(p: BiPoly) -> BiPoly:
    """``p / gcd(p, dp/dv1)`` normalized; removes repeated factors involving ``v1``."""
    if p.deg1 < 1:
        return normalize(p)
    g = gcd_bivariate(p, p.derivative_first())
    if g.deg1 < 1 and g.deg2 < 1:
        return normalize(p)
    return normalize(exact_quotient(p, g))


# -- floating point evaluation -----------------------------------------------------------

def eval_complex(p: BiPoly, a, b):
    """Horner evaluation at ``(v1, v2) = (a, b)`` with double-precision coefficients.

    Works elementwise on numpy arrays. The coefficients are *not* rescaled, so
    the value is the value of ``p`` itself.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    acc = np.zeros(np.broadcast(a, b).shape, dtype=complex)
    for row in reversed(p.coeffs):
        r = np.zeros_like(acc)
        for c in reversed(row):
            r = r * b + float(c)
        acc = acc * a + r
    return acc[()] if acc.ndim == 0 else acc
