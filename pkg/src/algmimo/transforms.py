"""Transform algebra on polynomial encodings of spectral distributions.

An encoding ``L(m, z)`` vanishes on the Stieltjes transform
``m(z) = int dF(x) / (x - z)``. The moment generating series
``mu(z) = 1 + sum_k M_k z**k`` satisfies ``mu(z) = -(1/z) m(1/z)``; the map
between the two encodings is the involution ``v1 := -v1*v2, v2 := 1/v2``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import _univariate as uni
from .exactalg import (
    BiPoly,
    DEFAULT_DEGREE_CAP,
    VarTag,
    as_rational,
    normalize,
    poly,
    squarefree_part,
    substitute_rational,
)


class SeriesError(ValueError):
    pass


@dataclass(frozen=True)
class MomentSeries:
    K: int
    moments: tuple
    shannon_coeffs: tuple
    mean_check: Fraction

    def __post_init__(self):
        if len(self.moments) != self.K or len(self.shannon_coeffs) != self.K:
            raise ValueError("moment and coefficient lists must have length K")
        if self.moments[0] != self.mean_check:
            raise ValueError("first moment disagrees with the propagated mean")

    def to_json(self):
        return json.dumps({
            "K": self.K,
            "M": [_rat_str(x) for x in self.moments],
            "nu": [_rat_str(x) for x in self.shannon_coeffs],
            "mean": _rat_str(self.mean_check),
        })

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(int(d["K"]), tuple(Fraction(x) for x in d["M"]),
                   tuple(Fraction(x) for x in d["nu"]), Fraction(d["mean"]))


def _rat_str(x):
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# -- constructors -----------------------------------------------------------------

def atomic_lmz(atoms) -> BiPoly:
    """Encoding of a finite mixture of point masses ``[(weight, location), ...]``."""
    atoms = [(as_rational(w), as_rational(x)) for w, x in atoms]
    if not atoms:
        raise ValueError("need at least one atom")
    if any(w <= 0 for w, _ in atoms):
        raise ValueError("atom weights must be positive")
    total = sum(w for w, _ in atoms)
    if total != 1:
        raise ValueError(f"weights sum to {total}, not 1")
    locs = [x for _, x in atoms]
    if len(set(locs)) != len(locs):
        raise ValueError("duplicate atom locations; merge them first")
    # m * prod(x_i - z) - sum_i w_i prod_{j != i}(x_j - z)
    def prod(skip=None):
        out = (Fraction(1),)
        for k, x in enumerate(locs):
            if k != skip:
                out = uni.mul(out, (x, Fraction(-1)))
        return out

    terms = {(1, j): c for j, c in enumerate(prod())}
    for k, (w, _) in enumerate(atoms):
        for j, c in enumerate(prod(k)):
            terms[(0, j)] = terms.get((0, j), 0) - w * c
    return normalize(poly(terms))


def mp_lmz(c) -> BiPoly:
    """Marchenko-Pastur encoding ``c z m^2 - (1 - c - z) m + 1``."""
    c = as_rational(c)
    if c <= 0:
        raise ValueError("aspect ratio c must be positive")
    return normalize(poly({(2, 1): c, (1, 0): c - 1, (1, 1): 1, (0, 0): 1}))


def ar1_poly(beta) -> BiPoly:
    """The printed AR(1) family ``(z^3 - 2 beta z^2 + z) m^2 + (2z^2 - 4 beta z + 2) m + z - 2 beta``."""
    b = as_rational(beta)
    return normalize(poly({
        (2, 3): 1, (2, 2): -2 * b, (2, 1): 1,
        (1, 2): 2, (1, 1): -4 * b, (1, 0): 2,
        (0, 1): 1, (0, 0): -2 * b,
    }))


def ar1_lmz(alpha) -> BiPoly:
    """Encoding of the Toeplitz covariance ``alpha**|i-j|`` of an AR(1) process.

    The family :func:`ar1_poly` describes this spectrum when its parameter is
    ``(1 + alpha^2) / (1 - alpha^2)``, the second moment of the spectrum.
    """
    a = as_rational(alpha)
    if abs(a) >= 1:
        raise ValueError("AR(1) coefficient must satisfy |alpha| < 1")
    return ar1_poly((1 + a * a) / (1 - a * a))


# -- Stieltjes <-> moment-generating involution -------------------------------------------

def _involution(p, tag):
    return substitute_rational(p, {(1, 1): -1}, 1, 1, {(0, 1): 1}, tag)


def mz_to_muz(p: BiPoly) -> BiPoly:
    if p.var_tag is not VarTag.MZ:
        raise ValueError(f"expected an (m, z) polynomial, got {p.var_tag.name}")
    return _involution(p, VarTag.MUZ)


def muz_to_mz(p: BiPoly) -> BiPoly:
    if p.var_tag is not VarTag.MUZ:
        raise ValueError(f"expected a (mu, z) polynomial, got {p.var_tag.name}")
    return _involution(p, VarTag.MZ)


# -- deterministic maps ----------------------------------------------------------------------

def scale_lmz(p: BiPoly, alpha) -> BiPoly:
    """Encoding of ``alpha * A``: ``m_A(z / alpha) = alpha * m``."""
    a = as_rational(alpha)
    if a <= 0:
        raise ValueError("scale factor must be positive")
    return substitute_rational(p, {(1, 0): a}, 1, {(0, 1): 1}, a)


def shift_lmz(p: BiPoly, beta) -> BiPoly:
    """Encoding of ``A + beta I``: substitute ``z := z - beta``."""
    b = as_rational(beta)
    return substitute_rational(p, {(1, 0): 1}, 1, {(0, 1): 1, (0, 0): -b}, 1)


def companion_flip(p: BiPoly, c) -> BiPoly:
    """Relate ``(1/Nt) H H'`` (Nr x Nr) to ``(1/Nt) H' H`` (Nt x Nt), ``c = Nr/Nt``.

    The companion has ``m~(z) = c m(z) - (1 - c)/z``; applying the flip with
    ``1/c`` undoes it.
    """
    c = as_rational(c)
    if c <= 0:
        raise ValueError("aspect ratio c must be positive")
    # m := (z m + 1 - c) / (c z)
    return substitute_rational(p, {(1, 1): 1, (0, 0): 1 - c}, {(0, 1): c}, {(0, 1): 1}, 1)


# -- truncated power series in z (lists of Fractions, constant first) ---------------------------

def _ser_mul(a, b, n):
    out = [Fraction(0)] * n
    for i, x in enumerate(a[:n]):
        if x:
            for j, y in enumerate(b[:n - i]):
                out[i + j] += x * y
    return out


def _ser_inv(a, n):
    if a[0] == 0:
        raise ZeroDivisionError("series not invertible")
    out = [Fraction(0)] * n
    out[0] = 1 / a[0]
    for k in range(1, n):
        s = sum(a[j] * out[k - j] for j in range(1, min(k, len(a) - 1) + 1))
        out[k] = -s / a[0]
    return out


def _eval_series(p_terms, t, n):
    """``p(t(z), z)`` truncated at ``z**n``; ``p_terms`` maps ``(i, j)`` to coefficients."""
    d1 = max(i for i, _ in p_terms)
    rows = [[Fraction(0)] * n for _ in range(d1 + 1)]
    for (i, j), c in p_terms.items():
        if j < n:
            rows[i][j] += c
    acc = [Fraction(0)] * n
    for i in range(d1, -1, -1):
        acc = _ser_mul(acc, t, n)
        acc = [x + y for x, y in zip(acc, rows[i])]
    return acc


def _shift_terms(p_terms, prefix, k):
    """Terms of ``p(prefix(z) + z**k t, z) / z**v`` with ``v`` the largest power of z dividing it."""
    # Horner in the first variable, with polynomial arithmetic in (t, z).
    from .exactalg import _dadd, _dmul
    sub = {(1, k): Fraction(1)}
    for j, c in enumerate(prefix):
        if c:
            sub[(0, j)] = sub.get((0, j), 0) + c
    d1 = max(i for i, _ in p_terms)
    acc = {}
    for i in range(d1, -1, -1):
        acc = _dmul(acc, sub)
        row = {(0, j): c for (ii, j), c in p_terms.items() if ii == i}
        acc = _dadd(acc, row)
    if not acc:
        raise SeriesError("degenerate expansion")
    v = min(j for _, j in acc)
    return {(i, j - v): c for (i, j), c in acc.items()}


def _root_multiplicity(q, x):
    """Multiplicity of ``x`` as a root of the univariate ``q`` (0 if not a root)."""
    mult = 0
    while q and uni.evaluate(q, x) == 0:
        mult += 1
        q = uni.derivative(q)
    return mult


def _newton_lift(terms, t0, n):
    """Lift the simple root ``t0`` of ``terms(t, 0)`` to a series solution mod ``z**n``."""
    dterms = {(i - 1, j): i * c for (i, j), c in terms.items() if i}
    t = [Fraction(t0)] + [Fraction(0)] * (n - 1)
    prec = 1
    while prec < n:
        prec = min(2 * prec, n)
        f = _eval_series(terms, t, prec)
        df = _eval_series(dterms, t, prec)
        step = _ser_mul(f, _ser_inv(df, prec), prec)
        t = [t[i] - step[i] for i in range(prec)] + t[prec:]
    return t[:n]


def moment_series(p: BiPoly, K: int, expected_M1, *, expected_higher: Sequence = ()) -> MomentSeries:
    """Exact moments ``M_1..M_K`` of the branch ``mu = 1 + M_1 z + ...`` of ``p(mu, z) = 0``.

    Branches are separated coefficient by coefficient: as long as the
    candidate value of the next coefficient is a multiple root, it is pinned
    to the supplied hint (``expected_M1``, then ``expected_higher``); once it
    is a simple root the rest of the series follows by Newton iteration in
    the truncated power-series ring.

    Raises
    ------
    SeriesError
        ``not a compactly-encoded distribution`` when no branch starts at 1,
        ``branch ambiguity`` when the hints select no branch or several,
        ``degenerate expansion`` when the branch is not an integer-power series.
    """
    if p.var_tag is not VarTag.MUZ:
        raise ValueError(f"expected a (mu, z) polynomial, got {p.var_tag.name}")
    if K < 1:
        raise ValueError("K must be at least 1")
    mean = as_rational(expected_M1)
    hints = [Fraction(1), mean] + [as_rational(h) for h in expected_higher]
    terms = squarefree_part(p).to_dict()
    prefix = []
    stage = 0
    while True:
        sub = terms if stage == 0 else _shift_terms(terms, prefix, stage)
        d1 = max((i for i, _ in sub), default=0)
        q0 = uni.trim([sub.get((i, 0), 0) for i in range(d1 + 1)])
        if len(q0) <= 1:
            if stage == 0:
                raise SeriesError("not a compactly-encoded distribution")
            raise SeriesError("degenerate expansion")
        if stage >= len(hints):
            raise SeriesError(f"branch ambiguity: several branches share M_1..M_{stage - 1}")
        target = hints[stage]
        mult = _root_multiplicity(q0, target)
        if mult == 0:
            if stage == 0:
                raise SeriesError("not a compactly-encoded distribution")
            raise SeriesError(f"branch ambiguity: no branch with M_{stage} = {target}")
        if mult == 1:
            tail = _newton_lift(sub, target, K + 1 - stage)
            full = prefix + tail
            break
        prefix.append(target)
        stage += 1
        if stage > K:
            full = prefix
            break
    moments = tuple(full[1:K + 1])
    if moments[0] != mean:
        raise SeriesError(f"branch ambiguity: extracted M_1 = {moments[0]}, expected {mean}")
    nu = tuple(shannon_from_moments(moments))
    return MomentSeries(K, moments, nu, mean)


def shannon_from_moments(moments):
    return [Fraction((-1) ** (k + 1), k) * m for k, m in enumerate(moments, start=1)]


def shannon_coefficients(ms: MomentSeries):
    """``nu_k = (-1)**(k+1) M_k / k`` for ``k = 1..K``."""
    return list(shannon_from_moments(ms.moments))


def lmz_moments(lmz: BiPoly, K: int, mean, *, expected_higher: Sequence = ()) -> MomentSeries:
    """Convenience: :func:`moment_series` straight from an ``(m, z)`` encoding."""
    return moment_series(mz_to_muz(lmz), K, mean, expected_higher=expected_higher)
