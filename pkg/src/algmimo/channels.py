"""Channel constructions and the expression compiler.

Two stochastic maps act on encodings by rational substitution (Wishart-type
``(1/Nt) G B G'`` and information-plus-noise ``(1/Nt)(R + sG)(R + sG)'``);
free multiplication runs the S-transform chain and eliminates an auxiliary
variable with a resultant. ``corr_wish`` composes the two.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

from .exactalg import (
    BiPoly,
    DEFAULT_DEGREE_CAP,
    VarTag,
    as_rational,
    exact_quotient,
    gcd_bivariate,
    normalize,
    resultant_terms,
    squarefree_part,
    strip_first_monomial,
    substitute_rational,
    _check_cap,
)
from .transforms import (
    SeriesError,
    ar1_lmz,
    atomic_lmz,
    moment_series,
    mp_lmz,
    muz_to_mz,
    mz_to_muz,
    scale_lmz,
    shift_lmz,
)


class ChannelError(ValueError):
    pass


# -- expression tree ---------------------------------------------------------------------------

class ChannelExpr:
    """Base class of channel expression nodes."""

    stochastic = False

    def children(self):
        return ()


def _fmt(x):
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class Atoms(ChannelExpr):
    atoms: tuple

    def __post_init__(self):
        atoms = tuple((as_rational(w), as_rational(x)) for w, x in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        total = sum(w for w, _ in atoms)
        if total != 1:
            raise ChannelError(f"weights sum to {_fmt(total)}")
        if any(w <= 0 for w, _ in atoms):
            raise ChannelError("atom weights must be positive")
        if any(x < 0 for _, x in atoms):
            raise ChannelError("atom locations must be nonnegative")
        if len({x for _, x in atoms}) != len(atoms):
            raise ChannelError("duplicate atom locations")

    def __str__(self):
        return "atoms(" + ",".join(f"{_fmt(w)}:{_fmt(x)}" for w, x in self.atoms) + ")"


@dataclass(frozen=True)
class MP(ChannelExpr):
    c: Fraction
    stochastic = True

    def __post_init__(self):
        object.__setattr__(self, "c", as_rational(self.c))
        if self.c <= 0:
            raise ChannelError("aspect ratio c must be positive")

    def __str__(self):
        return f"mp({_fmt(self.c)})"


@dataclass(frozen=True)
class AR1(ChannelExpr):
    alpha: Fraction

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_rational(self.alpha))
        if abs(self.alpha) >= 1:
            raise ChannelError("AR(1) coefficient must satisfy |alpha| < 1")

    def __str__(self):
        return f"ar1({_fmt(self.alpha)})"


@dataclass(frozen=True)
class Scale(ChannelExpr):
    child: ChannelExpr
    alpha: Fraction

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_rational(self.alpha))
        if self.alpha <= 0:
            raise ChannelError("scale factor must be positive")

    def children(self):
        return (self.child,)

    def __str__(self):
        return f"scale({self.child},{_fmt(self.alpha)})"


@dataclass(frozen=True)
class Shift(ChannelExpr):
    child: ChannelExpr
    beta: Fraction

    def __post_init__(self):
        object.__setattr__(self, "beta", as_rational(self.beta))

    def children(self):
        return (self.child,)

    def __str__(self):
        return f"shift({self.child},{_fmt(self.beta)})"


@dataclass(frozen=True)
class CorrWish(ChannelExpr):
    a: ChannelExpr
    b: ChannelExpr
    c: Fraction
    stochastic = True

    def __post_init__(self):
        object.__setattr__(self, "c", as_rational(self.c))
        if self.c <= 0:
            raise ChannelError("aspect ratio c must be positive")

    def children(self):
        return (self.a, self.b)

    def __str__(self):
        return f"corrWish({self.a},{self.b},{_fmt(self.c)})"


@dataclass(frozen=True)
class AgramWish(ChannelExpr):
    a: ChannelExpr
    c: Fraction
    s: Fraction
    stochastic = True

    def __post_init__(self):
        object.__setattr__(self, "c", as_rational(self.c))
        object.__setattr__(self, "s", as_rational(self.s))
        if self.c <= 0:
            raise ChannelError("aspect ratio c must be positive")
        if self.s < 0:
            raise ChannelError("noise scale s must be nonnegative")

    def children(self):
        return (self.a,)

    def __str__(self):
        return f"agramWish({self.a},{_fmt(self.c)},{_fmt(self.s)})"


@dataclass(frozen=True)
class FreeMultiply(ChannelExpr):
    a: ChannelExpr
    w: ChannelExpr

    def children(self):
        return (self.a, self.w)

    def __str__(self):
        return f"freeMultiply({self.a},{self.w})"


# -- stochastic maps on encodings ------------------------------------------------------------

def _reduce(p: BiPoly, degree_cap=DEFAULT_DEGREE_CAP) -> BiPoly:
    """Squarefree part with spurious ``m**k`` factors removed."""
    p = squarefree_part(strip_first_monomial(normalize(p)))
    _check_cap(p, degree_cap)
    return p


def wishart_lmz(lmzB: BiPoly, c, degree_cap=DEFAULT_DEGREE_CAP) -> BiPoly:
    """Encoding of ``(1/Nt) G B G'`` (Nr x Nr) with B of size Nt and ``c = Nr/Nt``.

    Uses ``m(z) = -1 / (z - int t dF_B(t) / (1 + c t m))``, i.e.
    ``m_B(-1/(c m)) = c m (1 - c - c z m)``.
    """
    c = as_rational(c)
    if c <= 0:
        raise ChannelError("aspect ratio c must be positive")
    n1 = {(1, 0): c * (1 - c), (2, 1): -c * c}
    out = substitute_rational(lmzB, n1, 1, -1, {(1, 0): c}, degree_cap=degree_cap)
    return _reduce(out, degree_cap)


def agram_lmz(lmzA: BiPoly, c, s, degree_cap=DEFAULT_DEGREE_CAP) -> BiPoly:
    """Encoding of ``(1/Nt)(R + sG)(R + sG)'`` where ``(1/Nt) R R'`` has law F_A.

    With ``b = 1 + s^2 c m``: ``m = b m_A(w)``, ``w = b (b z - s^2 (1 - c))``.
    """
    c, s = as_rational(c), as_rational(s)
    if c <= 0:
        raise ChannelError("aspect ratio c must be positive")
    if s < 0:
        raise ChannelError("noise scale s must be nonnegative")
    if s == 0:
        return lmzA
    s2 = s * s
    # b = 1 + s2 c m ; b^2 z - b s2 (1 - c)
    b = {(0, 0): 1, (1, 0): s2 * c}
    from .exactalg import _dadd, _dmul
    bz = _dmul(_dmul(b, b), {(0, 1): 1})
    w = _dadd(bz, b, -s2 * (1 - c))
    out = substitute_rational(lmzA, {(1, 0): 1}, b, w, 1, degree_cap=degree_cap)
    # b = 0 pins m to a constant, never a Stieltjes branch; clearing leaves such factors behind
    bpoly = BiPoly.from_dict(b)
    while out.deg1 > 1 and gcd_bivariate(out, bpoly).deg1 > 0:
        out = exact_quotient(out, bpoly)
    return _reduce(out, degree_cap)


def _is_point_mass_at_zero(lmz: BiPoly) -> bool:
    return lmz == normalize(BiPoly.from_dict({(1, 1): 1, (0, 0): 1}))


def _to_sw(lmz: BiPoly, degree_cap) -> BiPoly:
    muz = mz_to_muz(lmz)
    psiz = substitute_rational(muz, {(1, 0): 1, (0, 0): 1}, 1, {(0, 1): 1}, 1, VarTag.PSIZ,
                               degree_cap=degree_cap)
    chiw = psiz.transpose(VarTag.CHIW)
    # chi := s w / (1 + w)
    return substitute_rational(chiw, {(1, 1): 1}, {(0, 0): 1, (0, 1): 1}, {(0, 1): 1}, 1,
                               VarTag.SW, degree_cap=degree_cap)


def _from_sw(lsw: BiPoly, degree_cap) -> BiPoly:
    # s := chi (1 + w) / w
    chiw = substitute_rational(lsw, {(1, 0): 1, (1, 1): 1}, {(0, 1): 1}, {(0, 1): 1}, 1,
                               VarTag.CHIW, degree_cap=degree_cap)
    psiz = chiw.transpose(VarTag.PSIZ)
    muz = substitute_rational(psiz, {(1, 0): 1, (0, 0): -1}, 1, {(0, 1): 1}, 1, VarTag.MUZ,
                              degree_cap=degree_cap)
    return muz_to_mz(muz)


def free_multiply(lmzA: BiPoly, lmzW: BiPoly, means=None, degree_cap=DEFAULT_DEGREE_CAP) -> BiPoly:
    """Free multiplicative convolution of two nonnegative encoded laws.

    S-transforms multiply: with ``u = S_A(w)`` the product satisfies
    ``Res_u(L_A(u, w), u^D L_W(S/u, w)) = 0``.
    """
    if means is not None and any(as_rational(x) == 0 for x in means):
        raise ChannelError("S-transform undefined for a zero-mean input")
    if _is_point_mass_at_zero(lmzA) or _is_point_mass_at_zero(lmzW):
        raise ChannelError("S-transform undefined for a zero-mean input")
    sa = _to_sw(lmzA, degree_cap)
    sw = _to_sw(lmzW, degree_cap)
    D = sw.deg1
    p_terms = {(i, 0, j): c for (i, j), c in sa.to_dict().items()}
    # u^D * L_W(s/u, w): exponents (u, s, w)
    q_terms = {(D - i, i, j): c for (i, j), c in sw.to_dict().items()}
    res = resultant_terms(p_terms, q_terms)
    if not res:
        raise ChannelError("free product resultant vanished identically")
    lsw = normalize(BiPoly.from_dict(res, VarTag.SW))
    _check_cap(lsw, degree_cap)
    return _reduce(_from_sw(lsw, degree_cap), degree_cap)


def corr_wish(lmzA: BiPoly, lmzB: BiPoly, c, degree_cap=DEFAULT_DEGREE_CAP) -> BiPoly:
    """Encoding of ``(1/Nt) A^{1/2} G B G' A^{1/2}``."""
    return free_multiply(lmzA, wishart_lmz(lmzB, c, degree_cap), degree_cap=degree_cap)


agram_wish = agram_lmz


# -- exact low-order moments by structural recursion -------------------------------------------

def _free_product_m2(a, b):
    (a1, a2), (b1, b2) = a, b
    return a2 * b1 * b1 + a1 * a1 * b2 - a1 * a1 * b1 * b1


def leading_moments(expr: ChannelExpr):
    """Exact ``(M_1, M_2)`` of the limiting law of ``expr``."""
    if isinstance(expr, Atoms):
        return (sum(w * x for w, x in expr.atoms), sum(w * x * x for w, x in expr.atoms))
    if isinstance(expr, MP):
        return (Fraction(1), 1 + expr.c)
    if isinstance(expr, AR1):
        a2 = expr.alpha ** 2
        return (Fraction(1), (1 + a2) / (1 - a2))
    if isinstance(expr, Scale):
        m1, m2 = leading_moments(expr.child)
        return (expr.alpha * m1, expr.alpha ** 2 * m2)
    if isinstance(expr, Shift):
        m1, m2 = leading_moments(expr.child)
        b = expr.beta
        return (m1 + b, m2 + 2 * b * m1 + b * b)
    if isinstance(expr, CorrWish):
        a = leading_moments(expr.a)
        b1, b2 = leading_moments(expr.b)
        w = (b1, b1 * b1 + expr.c * b2)
        return (a[0] * b1, _free_product_m2(a, w))
    if isinstance(expr, AgramWish):
        a1, a2 = leading_moments(expr.a)
        s2, c = expr.s ** 2, expr.c
        return (a1 + s2, a2 + 2 * s2 * a1 * (1 + c) + s2 * s2 * (1 + c))
    if isinstance(expr, FreeMultiply):
        a, w = leading_moments(expr.a), leading_moments(expr.w)
        return (a[0] * w[0], _free_product_m2(a, w))
    raise TypeError(f"unknown channel node {type(expr).__name__}")


def mean_of(expr: ChannelExpr) -> Fraction:
    return leading_moments(expr)[0]


# -- compiler -------------------------------------------------------------------------------------

@dataclass(frozen=True)
class CompiledChannel:
    lmz: BiPoly
    c: Fraction
    mean: Fraction
    expr: ChannelExpr
    second_moment: Fraction = None

    def moments(self, K: int):
        hint = () if self.second_moment is None else (self.second_moment,)
        return moment_series(mz_to_muz(self.lmz), K, self.mean, expected_higher=hint)


def _walk(expr):
    yield expr
    for ch in expr.children():
        yield from _walk(ch)


def aspect_ratio(expr: ChannelExpr) -> Fraction:
    cs = {node.c for node in _walk(expr) if node.stochastic}
    if len(cs) > 1:
        raise ChannelError("aspect-ratio mismatch: " + ", ".join(sorted(_fmt(c) for c in cs)))
    outer = next((node for node in _walk(expr) if node.stochastic), None)
    return outer.c if outer is not None else Fraction(1)


def _build(expr, cap):
    if isinstance(expr, Atoms):
        return atomic_lmz(expr.atoms)
    if isinstance(expr, MP):
        return mp_lmz(expr.c)
    if isinstance(expr, AR1):
        return ar1_lmz(expr.alpha)
    if isinstance(expr, Scale):
        return scale_lmz(_build(expr.child, cap), expr.alpha)
    if isinstance(expr, Shift):
        return shift_lmz(_build(expr.child, cap), expr.beta)
    if isinstance(expr, CorrWish):
        if mean_of(expr.a) == 0 or mean_of(expr.b) == 0:
            raise ChannelError("S-transform undefined for a zero-mean input")
        return corr_wish(_build(expr.a, cap), _build(expr.b, cap), expr.c, cap)
    if isinstance(expr, AgramWish):
        return agram_lmz(_build(expr.a, cap), expr.c, expr.s, cap)
    if isinstance(expr, FreeMultiply):
        means = (mean_of(expr.a), mean_of(expr.w))
        return free_multiply(_build(expr.a, cap), _build(expr.w, cap), means, cap)
    raise TypeError(f"unknown channel node {type(expr).__name__}")


def compile_channel(expr: ChannelExpr, degree_cap=DEFAULT_DEGREE_CAP) -> CompiledChannel:
    """Build the encoding of ``expr`` and check that its mean branch exists."""
    c = aspect_ratio(expr)
    lmz = _build(expr, degree_cap)
    if lmz.deg1 < 1 or lmz.deg2 < 1:
        raise ChannelError(f"encoding has degrees ({lmz.deg1}, {lmz.deg2}); both must be positive")
    m1, m2 = leading_moments(expr)
    ch = CompiledChannel(lmz, c, m1, expr, m2)
    try:
        ch.moments(1)
    except SeriesError as exc:
        raise ChannelError(f"compiled encoding has no usable branch: {exc}") from exc
    return ch
