"""Floating-point layer: root solving, branch tracking, density, Shannon transform.

The physical branch of ``L(m, z) = 0`` is identified far from the spectrum,
where the moment expansion ``m(z) ~ -sum_k M_k / z**(k+1)`` pins it down,
and then followed by continuation down to ``Im z = xi`` keeping
``Im m >= 0`` and choosing the nearest root at every step.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _univariate as uni
from .channels import AgramWish, Atoms, CompiledChannel, CorrWish, MP, _walk
from .exactalg import BiPoly, ExactAlgebraError, discriminant_in_first

DEFAULT_XI = 1e-7
EDGE_TOL = 1e-9


class NumericalError(RuntimeError):
    pass


class BranchTrackingError(NumericalError):
    pass


@dataclass(frozen=True)
class StieltjesSample:
    z: complex
    m: complex
    branch_residual: float


@dataclass
class DensityCurve:
    grid: np.ndarray
    f: np.ndarray
    support: list
    mass_at_zero: float
    continuous_mass: float
    atoms: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "f"])
        for x, f in zip(self.grid, self.f):
            w.writerow([repr(float(x)), repr(float(f))])
        return buf.getvalue()

    def metadata_json(self):
        meta = dict(self.metadata)
        meta.update(
            support=[list(iv) for iv in self.support],
            mass_at_zero=self.mass_at_zero,
            continuous_mass=self.continuous_mass,
            atoms=[list(a) for a in self.atoms],
        )
        return json.dumps(meta, indent=2)


@dataclass
class ShannonCurve:
    gammas: np.ndarray
    values: np.ndarray
    method: str

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["gamma", "V", "method"])
        for g, v in zip(self.gammas, self.values):
            w.writerow([repr(float(g)), repr(float(v)), self.method])
        return buf.getvalue()


# -- roots in m ---------------------------------------------------------------------------------

def _row_values(C, z):
    """Coefficients ``a_i(z)`` of ``m**i`` for each z; shape (len(z), D1 + 1)."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    d2 = C.shape[1]
    V = np.ones((z.size, d2), dtype=complex)
    for j in range(1, d2):
        V[:, j] = V[:, j - 1] * z
    return V @ C.T


def _residual(A, m):
    """Relative backward residual ``|p(m)| / sum |a_i| |m|^i``."""
    val = np.zeros(m.shape, dtype=complex)
    mag = np.zeros(m.shape)
    for i in range(A.shape[-1] - 1, -1, -1):
        val = val * m + A[..., i]
        mag = mag * np.abs(m) + np.abs(A[..., i])
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.abs(val) / np.where(mag > 0, mag, 1.0)


def _batch_roots(A):
    """All roots of each row polynomial (coefficients low -> high) via companion matrices."""
    n, k = A.shape
    D = k - 1
    scale = np.max(np.abs(A), axis=1, keepdims=True)
    scale[scale == 0] = 1.0
    A = A / scale
    lead = A[:, D].copy()
    tiny = np.abs(lead) < 1e-13
    lead[tiny] = 1e-13
    comp = np.zeros((n, D, D), dtype=complex)
    comp[:, 0, :] = -A[:, D - 1::-1] / lead[:, None]
    if D > 1:
        idx = np.arange(D - 1)
        comp[:, idx + 1, idx] = 1.0
    return np.linalg.eigvals(comp)


def _polish(A, m, iters=3):
    dA = A[:, 1:] * np.arange(1, A.shape[1])
    for _ in range(iters):
        val = np.zeros_like(m)
        der = np.zeros_like(m)
        for i in range(A.shape[1] - 1, -1, -1):
            val = val * m + A[:, i]
        for i in range(dA.shape[1] - 1, -1, -1):
            der = der * m + dA[:, i]
        with np.errstate(invalid="ignore", divide="ignore"):
            step = np.where(der != 0, val / der, 0)
        cand = m - step
        better = np.isfinite(cand) & (_residual(A, cand) <= _residual(A, m))
        m = np.where(better, cand, m)
    return m


def roots_in_m(p: BiPoly, z: complex, tol=1e-9):
    """All roots in ``m`` of ``p(m, z) = 0`` at a fixed z, Newton-polished.

    The degree is deflated when the leading coefficients vanish at ``z``.
    """
    C = p.float_coeffs()
    a = _row_values(C, [z])[0]
    nz = np.nonzero(np.abs(a) > 1e-14 * np.max(np.abs(a)))[0]
    if nz.size == 0:
        raise NumericalError(f"polynomial vanishes identically at z={z}")
    a = a[: nz[-1] + 1]
    if a.size == 1:
        return np.zeros(0, dtype=complex)
    roots = _batch_roots(a[None, :])[0]
    A = np.broadcast_to(a, (roots.size, a.size))
    roots = _polish(np.ascontiguousarray(A), roots)
    res = _residual(A, roots)
    if np.any(res > tol):
        raise NumericalError(f"ill-conditioned root solve at z={z}: residual {res.max():.2e}")
    return roots


# -- support --------------------------------------------------------------------------------------

def support_candidates(p: BiPoly, tol=1e-12):
    """Real branch points: real roots of the discriminant in m, isolated with Sturm chains."""
    if p.deg1 < 2:
        return []
    try:
        disc = discriminant_in_first(p)
    except ExactAlgebraError:
        return []
    if uni.degree(disc) < 1:
        return []
    return uni.real_roots(disc, tol)


# -- the branch tracker ----------------------------------------------------------------------------

class SpectralSolver:
    """Evaluates the physical Stieltjes branch of a compiled channel.

    Parameters
    ----------
    ch : CompiledChannel
    xi : float
        Height above the real axis used for the inversion formula.
    levels : int
        Number of geometric continuation steps from the far field to ``xi``.
    """

    def __init__(self, ch: CompiledChannel, xi=DEFAULT_XI, levels=160, n_moments=8):
        self.ch = ch
        self.p = ch.lmz
        self.xi = xi
        self.levels = levels
        self.C = self.p.float_coeffs()
        self.candidates = support_candidates(self.p)
        self.moments = [1.0] + [float(x) for x in ch.moments(n_moments).moments]
        reach = max([abs(x) for x in self.candidates] + [abs(self.moments[1])] + [0.0])
        self.far = 4.0 * (1.0 + reach)
        self._support = None
        self._quad_cache = {}

    # far-field seed
    def _asymptotic(self, z):
        out = np.zeros_like(z)
        for k, M in enumerate(self.moments):
            out -= M / z ** (k + 1)
        return out

    def track(self, x, heights=None):
        """Physical branch at ``x + i*heights`` (heights default to ``xi``).

        Returns ``(m, residual)`` arrays.
        """
        x = np.asarray(x, dtype=float).reshape(-1)
        h = np.full(x.shape, self.xi) if heights is None else np.broadcast_to(np.asarray(heights, float), x.shape)
        ts = np.linspace(0.0, 1.0, self.levels)
        logf, logh = math.log(self.far), np.log(h)
        z = x + 1j * self.far
        A = _row_values(self.C, z)
        roots = _batch_roots(A)
        guess = self._asymptotic(z)
        sel = roots[np.arange(x.size), np.argmin(np.abs(roots - guess[:, None]), axis=1)]
        for t in ts[1:]:
            z = x + 1j * np.exp((1 - t) * logf + t * logh)
            A = _row_values(self.C, z)
            roots = _batch_roots(A)
            dist = np.abs(roots - sel[:, None])
            bad = roots.imag < -1e-9 * (1 + np.abs(roots))
            dist = np.where(bad, np.inf, dist)
            pick = np.argmin(dist, axis=1)
            new = roots[np.arange(x.size), pick]
            lost = ~np.isfinite(dist[np.arange(x.size), pick])
            sel = np.where(lost, sel, new)
        sel = _polish(A, sel)
        return sel, _residual(A, sel)

    def samples(self, zs) -> list:
        zs = np.asarray(zs, dtype=complex).reshape(-1)
        if np.any(zs.imag <= 0):
            raise ValueError("samples are defined for Im z > 0")
        m, res = self.track(zs.real, zs.imag)
        return [StieltjesSample(complex(z), complex(v), float(r)) for z, v, r in zip(zs, m, res)]

    def boundary(self, x):
        """Boundary value ``m(x + i0)``: the tracked root at ``xi`` polished on the real axis.

        Newton on the real line removes the O(xi) smoothing; where it wanders
        (double roots at the edges) the value at ``xi`` is kept.
        """
        x = np.asarray(x, dtype=float).reshape(-1)
        m, _ = self.track(x)
        A = _row_values(self.C, x)
        p = _polish(A, m, iters=8)
        ok = (np.abs(p - m) < 1e-3 * (1 + np.abs(m))) & (_residual(A, p) < 1e-12) & (p.imag > -1e-12)
        return np.where(ok, p, m)

    def f(self, x):
        m = self.boundary(x)
        return np.maximum(m.imag, 0.0) / math.pi

    # -- support detection
    def support_pieces(self):
        """Sub-intervals between consecutive candidates that carry density."""
        if self._support is None:
            cands = sorted(self.candidates)
            pieces = []
            for a, b in zip(cands, cands[1:]):
                if b - a < 1e-10:
                    continue
                probe = a + (b - a) * np.array([0.25, 0.5, 0.75])
                m1, _ = self.track(probe)
                m2, _ = self.track(probe, self.xi / 10)
                inside = (m1.imag > 1e-6) & (m2.imag > 0.5 * m1.imag)
                if inside.sum() >= 2:
                    pieces.append((a, b))
            self._support = pieces
        return self._support

    def support(self):
        merged = []
        for a, b in self.support_pieces():
            if merged and abs(a - merged[-1][1]) < 1e-12:
                merged[-1] = (merged[-1][0], b)
            else:
                merged.append((a, b))
        return merged

    # -- quadrature over the continuous part
    def _nodes(self, a, b, n):
        key = (a, b, n)
        if key not in self._quad_cache:
            t, w = np.polynomial.legendre.leggauss(n)
            theta = (t + 1) * (math.pi / 2)
            x = a + (b - a) * (1 - np.cos(theta)) / 2
            jac = (b - a) / 2 * np.sin(theta) * (math.pi / 2)
            fx = self.f(x)
            self._quad_cache[key] = (x, w * jac * fx)
        return self._quad_cache[key]

    def integrate(self, g, tol=1e-7, n0=32, nmax=2048):
        """``int g(x) f(x) dx`` over the support; ``g`` maps an x-array to (..., len(x)).

        Gauss-Legendre in the angle variable of ``x = a + (b-a)(1-cos t)/2``
        (which absorbs square-root edges), doubled until two successive
        estimates agree to ``tol``.
        """
        total = 0.0
        for a, b in self.support_pieces():
            n = n0
            x, wf = self._nodes(a, b, n)
            prev = np.asarray(g(x)) @ wf
            while True:
                n *= 2
                x, wf = self._nodes(a, b, n)
                cur = np.asarray(g(x)) @ wf
                if np.all(np.abs(cur - prev) <= tol * np.maximum(1.0, np.abs(cur))) or n >= nmax:
                    break
                prev = cur
            total = total + cur
        return total


# -- atoms -----------------------------------------------------------------------------------------

def _atoms_degree_one(p: BiPoly):
    """Point masses of a law whose encoding is linear in m: ``m = -a0(z)/a1(z)``."""
    a0, a1 = p.row(0), p.row(1)
    g = uni.gcd_poly(a0, a1)
    if len(g) > 1:
        a0, _ = uni.divmod_(a0, g)
        a1, _ = uni.divmod_(a1, g)
    da1 = uni.derivative(a1)
    out = []
    for x in uni.real_roots(a1):
        w = float(uni.evaluate(a0, Fraction(x))) / float(uni.evaluate(da1, Fraction(x)))
        out.append((x, w))
    # exact locations when a1 has rational roots
    return [(0.0 if abs(x) < 1e-12 else x, w) for x, w in out]


def _structural_zero_mass(ch: CompiledChannel):
    """``1 - 1/c`` for Gram channels with c > 1 whose inputs have no atom at zero."""
    expr = ch.expr
    if not isinstance(expr, (MP, CorrWish, AgramWish)):
        return None
    if isinstance(expr, AgramWish) and expr.s == 0:
        return None
    for node in _walk(expr):
        if isinstance(node, Atoms) and any(x == 0 for _, x in node.atoms):
            return None
    return max(0.0, 1.0 - 1.0 / float(expr.c))


# -- public operations ----------------------------------------------------------------------------------

def _grid(grid_spec):
    if isinstance(grid_spec, str):
        a, b, n = grid_spec.split(":")
        return np.linspace(float(a), float(b), int(n))
    if isinstance(grid_spec, tuple) and len(grid_spec) == 3:
        a, b, n = grid_spec
        return np.linspace(float(a), float(b), int(n))
    return np.asarray(grid_spec, dtype=float)


def density(ch: CompiledChannel, grid_spec, xi=DEFAULT_XI, solver: SpectralSolver | None = None) -> DensityCurve:
    """Limiting density on a grid by Stieltjes inversion ``f = Im m(x + i xi) / pi``."""
    grid = _grid(grid_spec)
    meta = {"xi": xi, "quadrature_tol": 1e-7}
    if ch.lmz.deg1 == 1:
        atoms = _atoms_degree_one(ch.lmz)
        zero = sum(w for x, w in atoms if x == 0.0)
        rest = [(x, w) for x, w in atoms if x != 0.0]
        meta["mass_at_zero_rule"] = "atomic"
        return DensityCurve(grid, np.zeros_like(grid), [], zero, 0.0, rest, meta)
    solver = solver or SpectralSolver(ch, xi)
    support = solver.support()
    mass = float(solver.integrate(lambda x: np.ones_like(x)))
    structural = _structural_zero_mass(ch)
    if structural is not None and structural > 0:
        zero = structural
        meta["mass_at_zero_rule"] = "structural 1 - 1/c"
    else:
        zero = max(0.0, 1.0 - mass)
        meta["mass_at_zero_rule"] = "mass deficit"
    meta["candidates"] = list(solver.candidates)

    f = np.zeros_like(grid)
    inside = np.zeros(grid.shape, dtype=bool)
    for a, b in support:
        # edge points themselves carry the limit value 0
        inside |= (grid > a + EDGE_TOL) & (grid < b - EDGE_TOL)
    if inside.any():
        xs = grid[inside]
        m = solver.boundary(xs)
        vals = np.maximum(m.imag, 0.0) / math.pi
        # horizontal continuity check on consecutive grid points
        jump = np.abs(np.diff(m))
        scale = np.maximum(np.abs(m[1:]), np.abs(m[:-1]))
        same_piece = np.diff(np.searchsorted([b for _, b in support], xs)) == 0
        bad = same_piece & (jump > 1.5 * scale) & (vals[1:] > 1e-6)
        if bad.any():
            x_bad = xs[1:][bad][0]
            raise BranchTrackingError(f"branch ambiguity at x={x_bad:.6g}")
        f[inside] = vals
    return DensityCurve(grid, f, support, zero, mass, [], meta)


def density_moments(ch: CompiledChannel, kmax=2, xi=DEFAULT_XI, solver=None):
    """``[int x^k f dx for k = 0..kmax]`` over the continuous part."""
    solver = solver or SpectralSolver(ch, xi)
    ks = np.arange(kmax + 1)
    return solver.integrate(lambda x: x[None, :] ** ks[:, None])


def shannon_transform(ch: CompiledChannel, gammas, xi=DEFAULT_XI, solver=None) -> ShannonCurve:
    """``V(gamma) = int log(1 + gamma x) dF(x)`` in nats; the atom at zero contributes nothing."""
    gammas = np.atleast_1d(np.asarray(gammas, dtype=float))
    if np.any(gammas <= 0):
        raise ValueError("gamma must be positive")
    if ch.lmz.deg1 == 1:
        atoms = _atoms_degree_one(ch.lmz)
        vals = sum(w * np.log1p(gammas * x) for x, w in atoms)
        return ShannonCurve(gammas, np.asarray(vals, dtype=float), "quadrature")
    solver = solver or SpectralSolver(ch, xi)
    vals = solver.integrate(lambda x: np.log1p(gammas[:, None] * x[None, :]))
    return ShannonCurve(gammas, np.asarray(vals, dtype=float), "quadrature")


def shannon_series_eval(nu: Sequence, gamma: float, K: int | None = None, lam_max: float | None = None):
    """Partial sum ``sum_{k<=K} nu_k gamma^k`` and a convergence flag (``gamma * lam_max < 1``)."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    K = len(nu) if K is None else K
    if K > len(nu):
        raise ValueError(f"only {len(nu)} coefficients available")
    total = sum(float(nu[k]) * gamma ** (k + 1) for k in range(K))
    ok = True if lam_max is None else gamma * lam_max < 1
    return total, ok


def ergodic_capacity(v: float, N_r: int, N_t: int, side: str = "Nr") -> float:
    """Capacity in the same units as ``v``.

    ``side="Nr"``: ``v`` is the Shannon transform of the Nr-side law of
    ``(1/Nt) H H'``, capacity ``N_r * v``. ``side="Nt"``: ``v`` refers to the
    companion law of ``(1/Nt) H' H``, capacity ``N_t * v``.
    """
    if side == "Nr":
        return N_r * v
    if side == "Nt":
        return N_t * v
    raise ValueError("side must be 'Nr' or 'Nt'")
