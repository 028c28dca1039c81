"""Independent reference values for the test-suite.

Nothing in here imports the package: moments come from closed forms and from
power-series S-transform arithmetic, polynomials are transcribed by hand.
"""
from fractions import Fraction as F
from math import comb

import numpy as np
import sympy as sp
from sympy.polys.subresultants_qq_zz import sylvester


# -- closed forms -----------------------------------------------------------------------------

def mp_moments(c, K):
    """Narayana polynomials: M_k = sum_j (1/k) C(k,j) C(k,j-1) c^(j-1)."""
    c = F(c)
    return [sum(F(comb(k, j) * comb(k, j - 1), k) * c ** (j - 1) for j in range(1, k + 1))
            for k in range(1, K + 1)]


def mp_density(x, c=1.0):
    a, b = (1 - np.sqrt(c)) ** 2, (1 + np.sqrt(c)) ** 2
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = (x > a) & (x < b)
    xi = x[inside]
    out[inside] = np.sqrt((b - xi) * (xi - a)) / (2 * np.pi * c * xi)
    return out


def atom_moments(atoms, K):
    return [sum(F(w) * F(x) ** k for w, x in atoms) for k in range(1, K + 1)]


def ar1_moments_numeric(alpha, K, n=1 << 16):
    """(1/2pi) int f(t)^k dt for the AR(1) symbol f = (1-a^2)/(1 - 2a cos t + a^2)."""
    t = np.arange(n) * (2 * np.pi / n)
    f = (1 - alpha ** 2) / (1 - 2 * alpha * np.cos(t) + alpha ** 2)
    return [float(np.mean(f ** k)) for k in range(1, K + 1)]


def eq15(c):
    c = F(c)
    return [F(9, 4), F(45, 8) * (c + 1), F(675, 16) * c + F(243, 16) * c ** 2 + F(243, 16),
            F(3555, 16) * c ** 2 + F(1377, 32) * c ** 3 + F(3555, 16) * c + F(1377, 32)]


def nu_from_moments(M):
    return [F((-1) ** (k + 1), k) * m for k, m in enumerate(M, start=1)]


# printed theoretical columns of the comparison table (rounded to 4 places)
TABLE_A = {  # c: (nu1, nu2, nu3)
    F(1, 4): (1.0000, -0.6250, 0.6042),
    F(1, 2): (1.0000, -0.7500, 0.9167),
    F(1): (1.0000, -1.0000, 1.6667),
    F(25, 13): (1.0000, -1.4615, 3.4892),
}
TABLE_B = {
    F(1, 4): (2.2500, -3.5156, 8.8945),
    F(1, 2): (2.2500, -4.2188, 13.3594),
    F(1): (2.2500, -5.6250, 24.1875),
    F(25, 13): (2.2500, -8.2212, 50.8280),
}
TABLE_A_HAT = {200: (1.0000, -0.6250, 0.5989), 100: (1.0001, -0.7502, 0.9070),
               50: (1.0003, -1.0004, 1.6430), 26: (0.9998, -1.4609, 3.4145)}
TABLE_B_HAT = {200: (2.2500, -3.5153, 8.6956), 100: (2.2502, -4.2189, 12.9866),
               50: (2.2509, -5.6276, 23.2916), 26: (2.2494, -8.2139, 48.0846)}


# -- power-series free probability --------------------------------------------------------------

def _mul(a, b, n):
    out = [F(0)] * n
    for i, x in enumerate(a[:n]):
        if x:
            for j, y in enumerate(b[: n - i]):
                out[i + j] += x * y
    return out


def _compose(a, b, n):
    """a(b(w)) for series with a[0] = b[0] = 0, truncated to n terms."""
    out = [F(0)] * n
    power = [F(1)] + [F(0)] * (n - 1)
    for k in range(1, n):
        power = _mul(power, b, n)
        if k < len(a):
            out = [o + a[k] * p for o, p in zip(out, power)]
    return out


def _revert(a, n):
    """Compositional inverse of a series with a[0] = 0, a[1] != 0."""
    inv = [F(0), 1 / a[1]] + [F(0)] * (n - 2)
    for k in range(2, n):
        err = _compose(a, inv, k + 1)[k]
        inv[k] = -err / a[1]
    return inv


def s_transform(M, K):
    n = K + 2
    psi = [F(0)] + [F(m) for m in M[: n - 1]]
    chi = _revert(psi, n)
    s_over = chi[1:] + [F(0)]                  # chi(w)/w
    return _mul([F(1), F(1)], s_over, n)[:n]   # (1 + w) chi(w) / w


def from_s_transform(S, K):
    n = K + 2
    geo = [F((-1) ** k) for k in range(n)]     # 1/(1+w)
    chi = [F(0)] + _mul(geo, S, n)[: n - 1]
    psi = _revert(chi, n)
    return psi[1:K + 1]


def free_product_moments(MA, MB, K):
    return from_s_transform(_mul(s_transform(MA, K), s_transform(MB, K), K + 2), K)


def wishart_moments(MB, c, K):
    """Moments of (1/Nt) G B G' (Nr x Nr) with Nr/Nt -> c.

    The Nt x Nt companion is B^(1/2) X B^(1/2) with X = G'G/Nt, whose moments are
    c times those of the Marchenko-Pastur law; the two differ by the factor c.
    """
    c = F(c)
    MX = [c * m for m in mp_moments(c, K)]
    Mhat = free_product_moments(MB, MX, K)
    return [m / c for m in Mhat]


def corrwish_moments(MA, MB, c, K):
    return free_product_moments(MA, wishart_moments(MB, c, K), K)


# -- polynomials transcribed from the printed source -----------------------------------------------

m, z, c_, a_ = sp.symbols("m z c alpha")

PRINTED_IDENTITY = m * (1 - z) - 1
PRINTED_MP = c_ * z * m ** 2 - (1 - c_ - z) * m + 1
PRINTED_AR1 = (z ** 3 - 2 * z ** 2 * a_ + z) * m ** 2 + (2 * z ** 2 - 4 * a_ * z + 2) * m + z - 2 * a_
PRINTED_AR1_W = (
    -z ** 3 * m ** 4 * c_ ** 2
    + (2 * z ** 2 * c_ - 2 * z ** 3 * a_ * c_ - 4 * z ** 2 * c_ ** 2) * m ** 3
    + (2 * z ** 2 * a_ - z ** 3 - z - 5 * z * c_ ** 2 - 6 * z ** 2 * a_ * c_ + 6 * c_ * z) * m ** 2
    + (-6 * a_ * z * c_ + 4 * a_ * z - 2 - 2 * z ** 2 - 2 * c_ ** 2 + 4 * c_) * m
    - 2 * a_ * c_ - z + 2 * a_
)
PRINTED_TWO_ATOM = (-6 * z + 2 * z ** 2 + 4) * m + 2 * z - 3
_T = [
    [-18 * c_ + 18 * c_ ** 2, 18 * c_ - 9, 4, 0],
    [-108 * c_ ** 2 + 36 * c_ + 72 * c_ ** 3, -112 * c_ + 18 + 130 * c_ ** 2, -18 + 54 * c_, 4],
    [64 * c_ ** 2 + 64 * c_ ** 4 - 128 * c_ ** 3, 72 * c_ - 324 * c_ ** 2 + 288 * c_ ** 3, 224 * c_ ** 2 - 112 * c_, 36 * c_],
    [0, 64 * c_ ** 2 - 256 * c_ ** 3 + 192 * c_ ** 4, 360 * c_ ** 3 - 216 * c_ ** 2, 112 * c_ ** 2],
    [0, 0, 192 * c_ ** 4 - 128 * c_ ** 3, 144 * c_ ** 3],
    [0, 0, 0, 64 * c_ ** 4],
]
PRINTED_T = sum(_T[j][k] * m ** j * z ** k for j in range(6) for k in range(4))


def as_terms(expr, **subs):
    """``{(i, j): Fraction}`` coefficients of a sympy expression in (m, z)."""
    e = sp.expand(expr.subs({sp.Symbol(k): sp.Rational(str(v)) for k, v in subs.items()}))
    P = sp.Poly(e, m, z)
    return {(int(i), int(j)): F(int(v.p), int(v.q)) for (i, j), v in P.terms()}


def sympy_resultant(p_terms, q_terms):
    """Res_m via sympy's Sylvester determinant; returns coefficients in z (constant first)."""
    p = sum(sp.Rational(v.numerator, v.denominator) * m ** i * z ** j for (i, j), v in p_terms.items())
    q = sum(sp.Rational(v.numerator, v.denominator) * m ** i * z ** j for (i, j), v in q_terms.items())
    M = sp.Matrix(sylvester(p, q, m, 1))
    r = sp.Poly(sp.expand(M.det(method="bareiss")), z)
    coeffs = r.all_coeffs()[::-1]
    return [F(int(sp.Rational(v).p), int(sp.Rational(v).q)) for v in coeffs]
