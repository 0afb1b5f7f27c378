"""
Flatness diagnostics: eps, L, N, the Gram matrix of the centred characters,
its entry sum r and the ratios r/N, N/L^2.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .errors import ConstantModulus, GramIdentityViolation, NotUnitNorm
from .poly import (Grid, ModulusSpectrum, TrigPoly, default_grid, l2_norm,
                   sparse_convolve, squared_modulus)

SANDWICH_SLACK = 1e-6
# |L| below this is treated as a vanishing denominator in N/L^2
L_ZERO = 1e-12
R_AGREEMENT = 1e-9


@dataclass(frozen=True)
class GramMatrix:
    """Gram matrix of ``z^{n_k} - conj(b_k)`` in ``L^2(|P|^2 dz)``.

    Rows and columns are ordered k = -N..-1, 1..N; ``exps`` and ``b`` hold
    the matching n_k and b_k.
    """

    indices: np.ndarray
    exps: np.ndarray
    b: np.ndarray
    matrix: np.ndarray

    def entry_sum(self) -> complex:
        return complex(np.sum(self.matrix))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])


def _lookup(spec: ModulusSpectrum, q: np.ndarray) -> np.ndarray:
    """Vectorised Fourier coefficients of |P|^2 at exponents ``q``."""
    aq = np.abs(q)
    out = np.zeros(q.shape, dtype=complex)
    if spec.N:
        idx = np.searchsorted(spec.exps, aq).clip(max=spec.N - 1)
        hit = spec.exps[idx] == aq
        out[hit] = spec.coefs[idx[hit]]
        out = np.where(q < 0, np.conj(out), out)
    out[q == 0] = spec.center
    return out


def gram_matrix(p: TrigPoly, check: bool = True) -> GramMatrix:
    """Assemble ``m(k, l) = c(n_l - n_k) - conj(b_k) b_l`` exactly.

    ``c(j)`` is the j-th Fourier coefficient of ``|P|^2``, i.e.
    ``int z^{n_k - n_l} |P|^2 dz``. With ``check`` the Hermitian,
    diagonal and PSD invariants are asserted.
    """
    spec = squared_modulus(p)
    if spec.N == 0:
        raise ConstantModulus("|P| is constant; the Gram matrix is empty")
    n, b = spec.signed()
    idx = np.concatenate([-np.arange(spec.N, 0, -1), np.arange(1, spec.N + 1)])
    M = _lookup(spec, n[None, :] - n[:, None]) - np.conj(b)[:, None] * b[None, :]
    g = GramMatrix(idx, n, b, M)
    if check:
        herm = np.max(np.abs(M - M.conj().T))
        diag = np.max(np.abs(np.diag(M) - (spec.center - np.abs(b) ** 2)))
        if herm > 1e-12 or diag > 1e-12:
            raise AssertionError(f"Gram invariants broken: hermitian {herm}, diagonal {diag}")
        lam = g.min_eigenvalue()
        if lam < -1e-9:
            raise AssertionError(f"Gram matrix not PSD: min eigenvalue {lam}")
    return g


def r_entrywise(p: TrigPoly) -> float:
    g = gram_matrix(p, check=False)
    s = g.entry_sum()
    if abs(s.imag) > 1e-10 * max(1.0, abs(s.real)):
        raise GramIdentityViolation(f"entry sum not real: {s}")
    return s.real


def r_identity(p: TrigPoly) -> float:
    """``r = ||f P||_2^2 - L^2`` with ``f = sum_{k != 0} z^{n_k}``.

    ``||f P||^2 = int |f|^2 |P|^2 dz`` is read off the exact sparse product
    by Parseval, independently of the Gram assembly.
    """
    spec = squared_modulus(p)
    n, b = spec.signed()
    _, fp = sparse_convolve(n, np.ones(n.size, dtype=complex), p.exps, p.coefs)
    L = float(np.sum(b).real)
    return float(np.sum(np.abs(fp) ** 2)) - L * L


def gram_sum_r(p: TrigPoly) -> float:
    """Entry sum of the Gram matrix, cross-checked by the integral identity."""
    r1 = r_entrywise(p)
    r2 = r_identity(p)
    if abs(r1 - r2) > R_AGREEMENT:
        raise GramIdentityViolation(f"entrywise r={r1!r} vs identity r={r2!r}")
    return r1


@dataclass(frozen=True)
class FlatnessReport:
    """Scalar flatness diagnostics for one unit-norm polynomial.

    ``eps`` is a grid maximum and therefore a lower bound for the true sup.
    ``r``, ``r_over_N`` and ``N_over_L2`` are None where undefined.
    """

    eps: float
    L: float
    N: int
    r: float | None
    r_over_N: float | None
    N_over_L2: float | None
    l1_deviation: float
    measure_deviation: float
    tau: float
    bounds_ok: bool | None
    grid: int
    m: int

    @property
    def r_over_2N(self):
        return None if self.r is None else self.r / (2 * self.N)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["r_over_2N"] = self.r_over_2N
        d["eps_is_grid_lower_bound"] = True
        return d


def sandwich_ok(N: int, r: float, eps: float, slack: float = SANDWICH_SLACK) -> bool:
    return 2 * N * (1 - eps) - eps - slack <= r <= 2 * N * (1 + eps) + eps + slack


def flatness_report(p: TrigPoly, grid: Grid | None = None, tau: float = 0.1) -> FlatnessReport:
    if abs(l2_norm(p) - 1.0) > 1e-10:
        raise NotUnitNorm(f"L2 norm {l2_norm(p)!r} != 1")
    grid = grid or default_grid(p)
    grid.check_sup(p)
    mod = np.abs(grid.values(p))
    eps = float(np.max(np.abs(mod ** 2 - 1.0)))
    dev = np.abs(mod - 1.0)
    spec = squared_modulus(p)
    L = spec.L
    r = r_over_N = bounds = None
    if spec.N:
        r = gram_sum_r(p)
        r_over_N = r / spec.N
        bounds = sandwich_ok(spec.N, r, eps)
    N_over_L2 = spec.N / (L * L) if abs(L) > L_ZERO else None
    return FlatnessReport(eps, L, spec.N, r, r_over_N, N_over_L2,
                          float(np.mean(dev)), float(np.mean(dev > tau)), tau,
                          bounds, grid.size, len(p))


SWEEP_COLUMNS = ("j", "m", "N", "L", "eps", "r", "r_over_N", "N_over_L2", "r_over_2N")


@dataclass
class RatioTable:
    rows: list[dict]
    max_N_over_L2: float | None
    r_over_N_nondecreasing: bool
    r_over_N_max: float | None
    r_over_N_min: float | None
    r_over_2N_last: float | None


def ratio_diagnostics(seq: Sequence[TrigPoly], grid: Grid | None = None,
                      reports: Sequence[FlatnessReport] | None = None) -> RatioTable:
    """Per-element ratio table with summary trends."""
    if reports is None:
        reports = [flatness_report(p, grid) for p in seq]
    rows = []
    for j, rep in enumerate(reports, start=1):
        rows.append({"j": j, "m": rep.m, "N": rep.N, "L": rep.L, "eps": rep.eps,
                     "r": rep.r, "r_over_N": rep.r_over_N, "N_over_L2": rep.N_over_L2,
                     "r_over_2N": rep.r_over_2N})
    nl = [row["N_over_L2"] for row in rows if row["N_over_L2"] is not None]
    rn = [row["r_over_N"] for row in rows if row["r_over_N"] is not None]
    return RatioTable(
        rows,
        max(nl) if nl else None,
        all(a <= b for a, b in zip(rn, rn[1:])),
        max(rn) if rn else None,
        min(rn) if rn else None,
        rows[-1]["r_over_2N"] if rows else None,
    )


@dataclass(frozen=True)
class EgorovPick:
    index: int
    level: int
    deviation_measure: float


def egorov_select(seq: Sequence[TrigPoly], grid: Grid | None = None,
                  length: int | None = None) -> list[EgorovPick]:
    """Greedy subsequence with ``|{|1 - |P_{j_k}|| >= 2^-k}| <= 2^-k``.

    Scans the sequence once in order; an element is taken for level k when
    its bad-set grid measure is within 2^-k. An empty or short result means
    no a.e. flatness was detected at this schedule.
    """
    grid = grid or default_grid(*seq)
    picks: list[EgorovPick] = []
    k = 1
    for j, p in enumerate(seq):
        if length is not None and len(picks) >= length:
            break
        thr = 2.0 ** -k
        meas = float(np.mean(np.abs(1.0 - np.abs(grid.values(p))) >= thr))
        if meas <= thr:
            picks.append(EgorovPick(j, k, meas))
            k += 1
    return picks
