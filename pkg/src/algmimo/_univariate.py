"""Exact univariate polynomial helpers over the rationals.

Polynomials are plain tuples of ``Fraction`` ordered from the constant term
upwards. Nothing here is tied to a variable name.
"""
from fractions import Fraction
from math import gcd

Poly = tuple


def trim(p):
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return tuple(Fraction(c) for c in p)


def degree(p):
    return len(trim(p)) - 1


def add(p, q):
    n = max(len(p), len(q))
    return trim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)])


def sub(p, q):
    return add(p, [-c for c in q])


def mul(p, q):
    if not p or not q:
        return ()
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return trim(out)


def scale(p, s):
    return trim([c * s for c in p])


def derivative(p):
    return trim([i * p[i] for i in range(1, len(p))])


def evaluate(p, x):
    acc = Fraction(0) if isinstance(x, (int, Fraction)) else 0.0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def divmod_(p, q):
    p, q = list(trim(p)), trim(q)
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    dq = len(q) - 1
    lc = q[-1]
    if len(p) - 1 < dq:
        return (), trim(p)
    quo = [Fraction(0)] * (len(p) - dq)
    for k in range(len(p) - 1 - dq, -1, -1):
        coef = p[k + dq] / lc
        quo[k] = coef
        if coef:
            for j in range(dq + 1):
                p[k + j] -= coef * q[j]
    return trim(quo), trim(p[:dq])


def monic(p):
    p = trim(p)
    return scale(p, 1 / p[-1]) if p else p


def gcd_poly(p, q):
    """Monic gcd by the Euclidean algorithm (``()`` if both vanish)."""
    p, q = trim(p), trim(q)
    while q:
        _, r = divmod_(p, q)
        p, q = q, monic(r) if r else r
    return monic(p)


def primitive(p):
    """Integer-coefficient primitive part with positive leading coefficient."""
    p = trim(p)
    if not p:
        return p
    den = 1
    for c in p:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in p]
    g = 0
    for v in ints:
        g = gcd(g, v)
    if ints[-1] < 0:
        g = -g
    return tuple(Fraction(v // g) for v in ints)


def squarefree(p):
    p = trim(p)
    if len(p) <= 2:
        return primitive(p)
    g = gcd_poly(p, derivative(p))
    q, r = divmod_(p, g)
    assert not r
    return primitive(q)


def interpolate(xs, ys):
    """Coefficients of the unique polynomial of degree < len(xs) through the points."""
    n = len(xs)
    coef = [Fraction(y) for y in ys]
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j])
    # Newton form -> monomial form
    out = [Fraction(0)] * n
    out[0] = coef[n - 1]
    deg = 0
    for k in range(n - 2, -1, -1):
        # out <- out * (x - xs[k]) + coef[k]
        new = [Fraction(0)] * n
        for i in range(deg + 1):
            new[i + 1] += out[i]
            new[i] -= out[i] * xs[k]
        new[0] += coef[k]
        out = new
        deg += 1
    return trim(out)


# -- real roots ---------------------------------------------------------------

def sturm_sequence(p):
    """Sturm chain of a squarefree polynomial, each member scaled to primitive form.

    Only positive rescalings are applied so sign counts are preserved.
    """
    p = trim(p)
    seq = [_positive_primitive(p), _positive_primitive(derivative(p))]
    while degree(seq[-1]) > 0:
        _, r = divmod_(seq[-2], seq[-1])
        if not r:
            break
        seq.append(_positive_primitive(scale(r, -1)))
    return seq


def _positive_primitive(p):
    q = primitive(p)
    if q and (q[-1] > 0) != (p[-1] > 0):
        q = scale(q, -1)
    return q


def _sign_changes(seq, x):
    signs = []
    for q in seq:
        v = evaluate(q, x)
        if v:
            signs.append(v > 0)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _sign_changes_at_inf(seq, positive):
    signs = []
    for q in seq:
        if not q:
            continue
        s = q[-1] > 0
        if not positive and (len(q) - 1) % 2:
            s = not s
        signs.append(s)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def root_bound(p):
    """Cauchy bound: every complex root has modulus below the returned rational."""
    p = trim(p)
    lc = abs(p[-1])
    return 1 + max((abs(c) / lc for c in p[:-1]), default=Fraction(0))


def isolate_real_roots(p):
    """Disjoint half-open intervals ``(a, b]`` each holding exactly one real root.

    Counting uses a Sturm chain on the squarefree part of ``p``.
    """
    p = squarefree(p)
    if degree(p) < 1:
        return []
    seq = sturm_sequence(p)
    bound = root_bound(p)
    out = []
    stack = [(-bound, bound)]
    while stack:
        a, b = stack.pop()
        n = _sign_changes(seq, a) - _sign_changes(seq, b)
        if n == 0:
            continue
        if n == 1:
            out.append((a, b))
            continue
        mid = (a + b) / 2
        stack.append((mid, b))
        stack.append((a, mid))
    out.sort()
    return out


def refine_root(p, a, b, tol=1e-12):
    """Bisect an isolating interval of a squarefree ``p`` down to width ``tol``."""
    p = squarefree(p)
    if evaluate(p, b) == 0:
        return float(b)
    fa = evaluate(p, a)
    if fa == 0:
        # root sits on the open end; the interval still isolates one root in (a, b]
        a = a + (b - a) / 2**20
        fa = evaluate(p, a)
    tol = Fraction(tol)
    while b - a > tol:
        mid = (a + b) / 2
        fm = evaluate(p, mid)
        if fm == 0:
            return float(mid)
        if (fm > 0) == (fa > 0):
            a, fa = mid, fm
        else:
            b = mid
    return float((a + b) / 2)


def real_roots(p, tol=1e-12):
    return [refine_root(p, a, b, tol) for a, b in isolate_real_roots(p)]
