"""
Dissociated families, partial generalized Riesz products and the
divergence criterion for singularity of their weak limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (ExpansionTooLarge, GridTooCoarse, InvalidGramSum,
                     SeriesLengthMismatch)
from .poly import (Grid, ModulusSpectrum, TrigPoly, next_pow2, sparse_convolve,
                   squared_modulus)

TERM_CAP = 2_000_000
L_ZERO = 1e-12
UNIT_SNAP = 1e-12


@dataclass(frozen=True)
class ScaledFamily:
    """Factors ``P_j(z^{l_j})`` given as (P_j, l_j) pairs.

    Verified families need strictly increasing scales; unverified ones may
    repeat a scale, e.g. to exhibit a collision.
    """

    factors: tuple[tuple[TrigPoly, int], ...]
    verified: bool = False

    def __post_init__(self):
        scales = [l for _, l in self.factors]
        if any(l < 1 for l in scales):
            raise ValueError("scales must be positive integers")
        if self.verified and any(a >= b for a, b in zip(scales, scales[1:])):
            raise ValueError(f"scales must be strictly increasing: {scales}")

    @property
    def polys(self):
        return [p for p, _ in self.factors]

    @property
    def scales(self):
        return [l for _, l in self.factors]

    def __len__(self):
        return len(self.factors)


@dataclass(frozen=True)
class Collision:
    depth: int
    exponent: int
    first: tuple[int, ...]
    second: tuple[int, ...]


@dataclass(frozen=True)
class DissociationResult:
    ok: bool
    collision: Collision | None = None


def _support(p: TrigPoly, squared: bool) -> np.ndarray:
    if not squared:
        return p.exps
    spec = squared_modulus(p)
    return np.concatenate([-spec.exps[::-1], [0], spec.exps])


def _check_supports(supports, scales, cap=TERM_CAP) -> DissociationResult:
    """All selections ``sum_j l_j d_j`` distinct? Report the first clash."""
    sums = np.zeros(1, dtype=np.int64)
    history = []  # per depth: (parent index, choice index) for each sum
    for depth, (d, l) in enumerate(zip(supports, scales)):
        total = sums.size * d.size
        if total > cap:
            raise ExpansionTooLarge(f"{total} terms at depth {depth} exceed cap {cap}")
        new = (sums[:, None] + l * d[None, :]).ravel()
        parent = np.repeat(np.arange(sums.size), d.size)
        choice = np.tile(np.arange(d.size), sums.size)
        history.append((parent, choice, d))
        uniq, counts = np.unique(new, return_counts=True)
        if uniq.size < new.size:
            dups = uniq[counts > 1]
            exponent = int(dups[np.lexsort((-dups, np.abs(dups)))][0])
            hits = np.flatnonzero(new == exponent)[:2]
            first, second = (_trace(history, int(h)) for h in hits)
            return DissociationResult(False, Collision(depth, exponent, first, second))
        sums = new
    return DissociationResult(True)


def _trace(history, idx):
    """Recover the per-factor exponent choices of a product term."""
    picks = []
    for parent, choice, d in reversed(history):
        picks.append(int(d[choice[idx]]))
        idx = parent[idx]
    return tuple(reversed(picks))


def is_dissociated(fam: ScaledFamily, squared: bool = True,
                   cap: int = TERM_CAP) -> DissociationResult:
    """Check that the formal product expansion has pairwise distinct powers.

    With ``squared`` (the default) the factors are ``|P_j(z^{l_j})|^2``,
    as needed for Riesz products; otherwise the polynomials themselves.
    """
    return _check_supports([_support(p, squared) for p in fam.polys], fam.scales, cap)


def choose_scales(polys: Sequence[TrigPoly]) -> ScaledFamily:
    """Greedy scales making the squared moduli dissociated.

    ``l_1 = 1`` and each next scale is the least integer exceeding twice the
    two-sided exponent span of the product built so far.
    """
    if not polys:
        raise ValueError("need at least one polynomial")
    scales = []
    width = 0
    for p in polys:
        l = 1 if not scales else max(2 * width + 1, scales[-1] + 1)
        scales.append(l)
        width += l * p.span
    fam = ScaledFamily(tuple(zip(polys, scales)))
    res = is_dissociated(fam)
    if not res.ok:
        raise AssertionError(f"greedy scales {scales} not dissociated: {res.collision}")
    return ScaledFamily(fam.factors, verified=True)


def _unit_spectrum(p: TrigPoly) -> tuple[np.ndarray, np.ndarray]:
    """Full |P|^2 coefficients with the centre snapped to exactly 1."""
    spec: ModulusSpectrum = squared_modulus(p)
    center = spec.center
    if abs(center - 1.0) <= UNIT_SNAP:
        center = 1.0
    n, b = spec.signed()
    order = np.argsort(np.concatenate([n, [0]]), kind="stable")
    e = np.concatenate([n, [0]])[order]
    c = np.concatenate([b, [center]])[order]
    return e, c


@dataclass
class RieszProductState:
    """Partial product ``prod_{j <= depth} |P_j(z^{l_j})|^2`` and its samples.

    ``exps``/``coefs`` hold the exact coefficient table, ``first_depth`` the
    depth at which each exponent first appeared, ``sqrt_density`` the grid
    samples of ``prod |P_j(z^{l_j})|`` and ``l1_trace`` its grid mean per
    depth (index 0 is the empty product).
    """

    family: ScaledFamily
    grid: Grid
    depth: int = 0
    exps: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=np.int64))
    coefs: np.ndarray = field(default_factory=lambda: np.ones(1, dtype=complex))
    first_depth: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=np.int64))
    sqrt_density: np.ndarray | None = None
    l1_trace: list = field(default_factory=lambda: [1.0])
    mass_trace: list = field(default_factory=lambda: [1.0])
    coeff0_trace: list = field(default_factory=lambda: [1.0])
    new_terms: list = field(default_factory=list)

    def coeff(self, k: int) -> complex:
        i = np.searchsorted(self.exps, k)
        if i < self.exps.size and self.exps[i] == k:
            return complex(self.coefs[i])
        return 0j

    def extend(self, cap: int = TERM_CAP) -> RieszProductState:
        """Multiply in the next factor, checking the stabilization property."""
        j = self.depth
        if j >= len(self.family):
            raise IndexError("family exhausted")
        p, l = self.family.factors[j]
        fe, fc = _unit_spectrum(p)
        if self.exps.size * fe.size > cap:
            raise ExpansionTooLarge(f"{self.exps.size * fe.size} terms exceed cap {cap}")
        e, c = sparse_convolve(self.exps, self.coefs, l * fe, fc)
        keep = c != 0
        e, c = e[keep], c[keep]
        pos = np.minimum(np.searchsorted(e, self.exps), e.size - 1)
        if self.family.verified:
            # dissociation: old coefficients survive exactly (times the unit centre)
            if not (np.array_equal(e[pos], self.exps) and np.array_equal(c[pos], self.coefs)):
                raise AssertionError(f"coefficients changed at depth {j + 1}")
        first = np.full(e.size, j + 1, dtype=np.int64)
        present = e[pos] == self.exps
        first[pos[present]] = self.first_depth[present]
        added = first == j + 1
        self.new_terms.append((e[added], c[added]))
        self.exps, self.coefs, self.first_depth = e, c, first

        vals = np.abs(_grid_scaled(p, l, self.grid.size))
        self.sqrt_density = vals if self.sqrt_density is None else self.sqrt_density * vals
        self.l1_trace.append(float(np.mean(self.sqrt_density)))
        self.mass_trace.append(float(np.mean(self.sqrt_density ** 2)))
        self.depth = j + 1
        self.coeff0_trace.append(self.coeff(0).real)
        if self.family.verified and self.coeff(0) != 1.0:
            raise AssertionError(f"constant term {self.coeff(0)!r} != 1")
        return self


def _grid_scaled(p: TrigPoly, l: int, size: int) -> np.ndarray:
    """``P(z_t^l)`` evaluated directly at angles ``2 pi t l / size``."""
    return p.scaled(l).on_grid(size)


def required_grid(fam: ScaledFamily, n: int) -> int:
    """Smallest admissible grid for depth ``n``: M >= 8 l_n span(P_n)."""
    if n == 0:
        return 1
    p, l = fam.factors[n - 1]
    return 8 * l * p.span


def partial_product(fam: ScaledFamily, n: int, grid: Grid | None = None,
                    cap: int = TERM_CAP) -> RieszProductState:
    """Riesz partial product of depth ``n`` with per-depth traces."""
    if n > len(fam):
        raise ValueError(f"depth {n} exceeds family size {len(fam)}")
    need = max((required_grid(fam, k) for k in range(1, n + 1)), default=1)
    if grid is None:
        width = sum(l * p.span for p, l in fam.factors[:n])
        grid = Grid(next_pow2(max(4096, need + 8, 2 * width + 1)))
    elif grid.size < need:
        raise GridTooCoarse(f"grid of {grid.size} points < {need} needed at depth {n}")
    state = RieszProductState(fam, grid)
    for _ in range(n):
        state.extend(cap)
    return state


def stabilized_coeffs(state: RieszProductState, window: int) -> dict[int, tuple[complex, int]]:
    """Coefficients with ``|exponent| <= window`` and the depth each first appeared."""
    sel = np.abs(state.exps) <= window
    return {int(k): (complex(c), int(d)) for k, c, d in
            zip(state.exps[sel], state.coefs[sel], state.first_depth[sel])}


def l1_of_sqrt_density(state: RieszProductState) -> list[float]:
    """Grid L1 norms of ``prod_{j<=n} |P_j(z^{l_j})|`` for n = 0..depth.

    A trace decaying to 0 points to a singular limit measure; a positive
    plateau to an absolutely continuous part.
    """
    return list(state.l1_trace)


# -- divergence criterion --------------------------------------------------

@dataclass
class SingularityDiagnostic:
    s: list[float]
    partial_sums: list[float]
    lam: list[float]
    series5: list[float]
    series6: list[float]
    verdict: str
    heuristic: bool = True
    N: list[int] = field(default_factory=list)
    r: list[float] = field(default_factory=list)

    MET = "DivergentCriterionMet"
    INCONCLUSIVE = "Inconclusive"


def default_lambda(s: Sequence[float]) -> list[float]:
    """``lambda_j = s_j / A_j`` with ``A_j = s_1 + ... + s_j``."""
    A = np.cumsum(s)
    return list(np.asarray(s) / A)


def peyriere_series(diag_or_s, reports, lam: Sequence[float] | None = None):
    """Partial sums of ``sum lambda_j s_j`` and ``sum lambda_j^2 s_j^2 N_j / L_j^2``.

    Reported only; divergence of the first and convergence of the second
    cannot be certified from finitely many terms.
    """
    s = diag_or_s.s if isinstance(diag_or_s, SingularityDiagnostic) else list(diag_or_s)
    if lam is None:
        lam = diag_or_s.lam if isinstance(diag_or_s, SingularityDiagnostic) else default_lambda(s)
    if not (len(s) == len(lam) == len(reports)):
        raise SeriesLengthMismatch(f"lengths s={len(s)}, lambda={len(lam)}, reports={len(reports)}")
    s5, s6 = [], []
    a5 = a6 = 0.0
    for sj, lj, rep in zip(s, lam, reports):
        a5 += lj * sj
        L = rep.L
        a6 += (lj * sj) ** 2 * rep.N / (L * L) if abs(L) > L_ZERO else math.inf
        s5.append(a5)
        s6.append(a6)
    return {"series5": s5, "series6": s6}


def singularity_diagnostic(reports, lam: Sequence[float] | None = None,
                           witness: float = 10.0, tail_fraction: float = 0.25,
                           tail_share: float = 0.05) -> SingularityDiagnostic:
    """``s_j = min(1, sqrt(N_j / r_j))`` and a finite-sample divergence verdict.

    The verdict is a heuristic: DivergentCriterionMet when ``A_n >= witness``
    and the last ``tail_fraction`` of terms contribute at least
    ``tail_share`` of ``A_n``.
    """
    s = []
    for j, rep in enumerate(reports, start=1):
        if rep.r is None or rep.r <= 0 or rep.N < 1:
            raise InvalidGramSum(f"report {j}: N={rep.N}, r={rep.r}")
        s.append(min(1.0, math.sqrt(rep.N / rep.r)))
    A = list(np.cumsum(s)) if s else []
    if lam is None:
        lam = default_lambda(s) if s else []
    series = peyriere_series(s, reports, lam)
    verdict = SingularityDiagnostic.INCONCLUSIVE
    if A and A[-1] >= witness:
        t = max(1, math.ceil(tail_fraction * len(s)))
        if sum(s[-t:]) >= tail_share * A[-1]:
            verdict = SingularityDiagnostic.MET
    return SingularityDiagnostic(s, [float(a) for a in A], [float(x) for x in lam],
                                 series["series5"], series["series6"], verdict,
                                 N=[rep.N for rep in reports], r=[rep.r for rep in reports])
