"""
Inner/outer factorization of analytic polynomials.

``P = B Q`` with ``B`` a finite Blaschke product (unimodular on the circle)
and ``Q`` free of zeros in the open disk with ``Q(0) > 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (FactorizationInconsistent, LogSingularOnGrid,
                     RootFindingDiverged)
from .poly import Grid, TrigPoly, default_grid

MAX_SWEEPS = 500
CLUSTER_TOL = 1e-7
BOUNDARY_TOL = 1e-8
LOG_FLOOR = 1e-13


def _horner(coefs, z):
    """Value and derivative of ``sum coefs[k] z^k`` at the points ``z``."""
    p = np.zeros_like(z)
    dp = np.zeros_like(z)
    for c in coefs[::-1]:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _residual_ok(coefs, roots, tol):
    p, _ = _horner(coefs, roots)
    deg = coefs.size - 1
    scale = np.max(np.abs(coefs)) * np.maximum(1.0, np.abs(roots)) ** deg
    return np.abs(p), np.abs(p) <= tol * scale


def _cluster(roots):
    """Replace near-coincident roots by their mean (multiple roots)."""
    roots = np.array(roots, dtype=complex)
    n = roots.size
    label = np.arange(n)
    for i in range(n):
        for j in range(i + 1, n):
            if abs(roots[i] - roots[j]) < CLUSTER_TOL:
                label[label == label[j]] = label[i]
    out = roots.copy()
    for lab in np.unique(label):
        idx = label == lab
        out[idx] = roots[idx].mean()
    return out


def aberth_roots(coefs, tol=1e-10, max_sweeps=MAX_SWEEPS):
    """Roots of ``sum coefs[k] z^k`` by Aberth-Ehrlich iteration.

    Starting points lie on a circle of radius ``1 + max|c_k| / |c_lead|``
    with a fixed angular offset, so results are reproducible.
    """
    coefs = np.trim_zeros(np.asarray(coefs, dtype=complex), "b")
    deg = coefs.size - 1
    if deg < 1:
        return np.zeros(0, dtype=complex)
    lead = coefs[-1]
    radius = 1.0 + np.max(np.abs(coefs[:-1])) / abs(lead)
    z = radius * np.exp(2j * np.pi * (np.arange(deg) + 0.25) / deg + 0.4j)
    for _ in range(max_sweeps):
        p, dp = _horner(coefs, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = p / dp
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            s = np.sum(1.0 / diff, axis=1) - 1.0
            step = w / (1.0 - w * s)
        step = np.where(np.isfinite(step), step, 0.0)
        z = z - step
        if np.all(np.abs(step) <= 4e-16 * np.maximum(1.0, np.abs(z))):
            break
    # Newton polish for isolated roots only; clusters stay averaged
    z = _cluster(z)
    for _ in range(3):
        p, dp = _horner(coefs, z)
        single = np.array([np.sum(np.abs(z - zi) < CLUSTER_TOL) == 1 for zi in z])
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = np.where(single & (dp != 0), p / dp, 0.0)
        z = z - np.where(np.isfinite(newton), newton, 0.0)
    res, ok = _residual_ok(coefs, z, tol)
    if not np.all(ok):
        raise RootFindingDiverged(
            f"{int(np.sum(~ok))} of {deg} roots above residual tolerance", residuals=res)
    return z


def find_roots(p: TrigPoly) -> np.ndarray:
    """All roots of ``z^-d P`` (d the minimal exponent) plus d zeros at 0
    when d > 0, with multiplicity."""
    d = p.min_exp
    dense = np.zeros(p.span + 1, dtype=complex)
    dense[p.exps - d] = p.coefs
    roots = aberth_roots(dense)
    if d > 0:
        roots = np.concatenate([np.zeros(d, dtype=complex), roots])
    return roots


def _deflate(coefs, a):
    """Quotient of ``sum coefs[k] z^k`` by ``(z - a)``, remainder dropped."""
    n = coefs.size - 1
    out = np.zeros(n, dtype=complex)
    acc = 0j
    for k in range(n, 0, -1):
        acc = coefs[k] + a * acc
        out[k - 1] = acc
    return out


def _outer_coefs(dense, inside):
    """Swap each inside root's ``(z - a)`` for ``(1 - conj(a) z)``.

    Working on P's own coefficients (rather than re-expanding all roots)
    keeps Q exact when no root lies inside the disk.
    """
    q = np.asarray(dense, dtype=complex)
    for a in sorted(inside, key=abs):
        q = np.convolve(_deflate(q, a), [1.0, -np.conj(a)])
    return q


@dataclass
class InnerOuterFactorization:
    inside: np.ndarray
    outside: np.ndarray
    gamma: complex
    leading: complex
    monomial: int
    Q: TrigPoly
    boundary_roots: bool = False
    root_tolerance: float = BOUNDARY_TOL
    checks: dict = field(default_factory=dict)

    @property
    def q0(self) -> float:
        return self.Q.coefficient(0).real

    def inner(self, z):
        """Evaluate the Blaschke product B at points ``z``."""
        z = np.asarray(z, dtype=complex)
        out = self.gamma * z ** self.monomial
        for a in self.inside:
            out = out * (z - a) / (1 - np.conj(a) * z)
        return out


def inner_outer(p: TrigPoly, grid: Grid | None = None,
                root_tolerance: float = BOUNDARY_TOL) -> InnerOuterFactorization:
    """Inner/outer factorization of an analytic polynomial.

    Roots within ``root_tolerance`` of the circle count as outside and set
    ``boundary_roots``. The result is verified on a grid before return:
    ``|P| = |Q|``, ``|B| = 1`` and ``B Q = P``.
    """
    if p.is_zero():
        raise ValueError("zero polynomial has no factorization")
    if not p.is_analytic():
        raise ValueError("inner_outer needs an analytic polynomial (no negative exponents)")
    d = p.min_exp
    lead = complex(p.coefs[-1])
    roots = find_roots(TrigPoly.from_arrays(p.exps - d, p.coefs))
    mod = np.abs(roots)
    inside = roots[mod < 1 - root_tolerance]
    outside = roots[mod >= 1 - root_tolerance]
    boundary = bool(np.any(np.abs(mod - 1) < root_tolerance))

    dense = np.zeros(p.span + 1, dtype=complex)
    dense[p.exps - d] = p.coefs
    q_raw = _outer_coefs(dense, inside)
    gamma = q_raw[0] / abs(q_raw[0])
    q = q_raw * np.conj(gamma)
    q[0] = abs(q_raw[0])
    Q = TrigPoly.from_arrays(np.arange(q.size), q)
    fac = InnerOuterFactorization(inside, outside, complex(gamma), lead, d, Q,
                                  boundary, root_tolerance)
    _verify(p, fac, grid or default_grid(p))
    return fac


def _verify(p, fac, grid):
    pv = grid.values(p)
    qv = grid.values(fac.Q)
    scale = max(np.max(np.abs(pv)), 1e-300)
    mod_dev = float(np.max(np.abs(np.abs(pv) - np.abs(qv))))
    bv = fac.inner(grid.points())
    unimod = float(np.max(np.abs(np.abs(bv) - 1.0)))
    recon = float(np.max(np.abs(bv * qv - pv)))
    fac.checks = {"modulus_dev": mod_dev / scale, "inner_unimodular_dev": unimod,
                  "reconstruction_dev": recon / scale}
    if mod_dev > 1e-7 * scale or unimod > 1e-8 or recon > 1e-7 * scale:
        raise FactorizationInconsistent(f"factorization checks failed: {fac.checks}")


def log_integral(p: TrigPoly, grid: Grid | None = None, shift: bool = False) -> float:
    """Grid mean of ``log |P|``.

    With ``shift=True`` the grid is moved by half a step, which avoids
    zeros of P at grid points such as z = -1 for ``1 + z``.
    """
    grid = grid or default_grid(p)
    vals = np.abs(p.on_grid(grid.size, shift=0.5 if shift else 0.0))
    if np.min(vals) < LOG_FLOOR:
        raise LogSingularOnGrid("|P| vanishes on the grid; retry with shift=True")
    return float(np.mean(np.log(vals)))


@dataclass(frozen=True)
class OuterTrack:
    q0: float
    eps: float
    boundary_roots: bool


def outer_constant_track(seq: Sequence[TrigPoly], grid: Grid | None = None) -> list[OuterTrack]:
    """``Q_j(0)`` for each element, with its flatness defect eps_j."""
    out = []
    for p in seq:
        g = grid or default_grid(p)
        fac = inner_outer(p, g)
        sq = np.abs(g.values(p)) ** 2
        out.append(OuterTrack(fac.q0, float(np.max(np.abs(sq - 1.0))), fac.boundary_roots))
    return out


def jensen_residual(p: TrigPoly, fac: InnerOuterFactorization, grid: Grid | None = None) -> float:
    """``log Q(0) - mean log|P|``; ~0 when no root sits on the circle."""
    return math.log(fac.q0) - log_integral(p, grid, shift=fac.boundary_roots)
