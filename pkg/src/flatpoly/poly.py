"""
Sparse Laurent polynomials on the unit circle.

A :class:`TrigPoly` stores integer exponents and complex coefficients
exactly (no FFT round trip); grids are only used to estimate sup norms,
L1 norms and logarithmic integrals.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import EmptyPolynomial, GridTooCoarse

# off-centre |P|^2 coefficients below this are float cancellation dust
SPECTRUM_DUST = 1e-13
DEFAULT_MIN_GRID = 4096


def sparse_convolve(exps_a, coefs_a, exps_b, coefs_b):
    """Exact sparse product of two coefficient lists.

    Returns sorted unique exponents and the summed coefficients. Pairs are
    accumulated in row-major order of (a, b), so a monotone rescaling of the
    exponents reproduces the same floating point sums.
    """
    exps_a = np.asarray(exps_a, dtype=np.int64)
    exps_b = np.asarray(exps_b, dtype=np.int64)
    if exps_a.size == 0 or exps_b.size == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=complex)
    e = (exps_a[:, None] + exps_b[None, :]).ravel()
    c = (np.asarray(coefs_a, dtype=complex)[:, None]
         * np.asarray(coefs_b, dtype=complex)[None, :]).ravel()
    return group_sum(e, c)


def group_sum(exps, coefs):
    """Sum coefficients sharing an exponent; output sorted by exponent."""
    uniq, inverse = np.unique(exps, return_inverse=True)
    re = np.bincount(inverse, weights=coefs.real, minlength=uniq.size)
    im = np.bincount(inverse, weights=coefs.imag, minlength=uniq.size)
    return uniq, re + 1j * im


class TrigPoly:
    """Trigonometric polynomial ``sum_k c_k z^k`` with finitely many terms.

    Parameters
    ----------
    terms : mapping or iterable of (exponent, coefficient)
        Exponents may be negative. Exact zeros are dropped; use
        :meth:`prune` to drop small coefficients.
    """

    __slots__ = ("_exps", "_coefs")

    def __init__(self, terms: Mapping[int, complex] | Iterable = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: dict[int, complex] = {}
        for k, c in items:
            k = int(k)
            merged[k] = merged.get(k, 0j) + complex(c)
        keys = sorted(k for k, c in merged.items() if c != 0)
        self._exps = np.array(keys, dtype=np.int64)
        self._coefs = np.array([merged[k] for k in keys], dtype=complex)
        self._exps.flags.writeable = False
        self._coefs.flags.writeable = False

    @classmethod
    def from_arrays(cls, exps, coefs) -> TrigPoly:
        return cls(zip(np.asarray(exps).tolist(), np.asarray(coefs).tolist()))

    @classmethod
    def constant(cls, c=1.0) -> TrigPoly:
        return cls({0: c})

    @property
    def exps(self) -> np.ndarray:
        return self._exps

    @property
    def coefs(self) -> np.ndarray:
        return self._coefs

    @property
    def terms(self) -> dict[int, complex]:
        return dict(zip(self._exps.tolist(), self._coefs.tolist()))

    def __len__(self):
        return int(self._exps.size)

    def is_zero(self) -> bool:
        return self._exps.size == 0

    @property
    def min_exp(self) -> int:
        return int(self._exps[0]) if self._exps.size else 0

    @property
    def max_exp(self) -> int:
        return int(self._exps[-1]) if self._exps.size else 0

    @property
    def span(self) -> int:
        return self.max_exp - self.min_exp

    def is_analytic(self) -> bool:
        return self.min_exp >= 0

    def coefficient(self, k: int) -> complex:
        i = np.searchsorted(self._exps, k)
        if i < self._exps.size and self._exps[i] == k:
            return complex(self._coefs[i])
        return 0j

    def prune(self, threshold: float) -> TrigPoly:
        keep = np.abs(self._coefs) >= threshold
        return TrigPoly.from_arrays(self._exps[keep], self._coefs[keep])

    def scaled(self, s: int) -> TrigPoly:
        """Return ``P(z**s)``."""
        if s < 1:
            raise ValueError("scale must be a positive integer")
        return TrigPoly.from_arrays(self._exps * s, self._coefs)

    def __mul__(self, other):
        if isinstance(other, TrigPoly):
            e, c = sparse_convolve(self._exps, self._coefs, other._exps, other._coefs)
            return TrigPoly.from_arrays(e, c)
        return TrigPoly.from_arrays(self._exps, self._coefs * complex(other))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return TrigPoly.from_arrays(self._exps, self._coefs / complex(scalar))

    def __add__(self, other: TrigPoly) -> TrigPoly:
        return TrigPoly(list(self.terms.items()) + list(other.terms.items()))

    def __sub__(self, other: TrigPoly) -> TrigPoly:
        return self + other * -1

    def __eq__(self, other):
        if not isinstance(other, TrigPoly):
            return NotImplemented
        return (np.array_equal(self._exps, other._exps)
                and np.array_equal(self._coefs, other._coefs))

    def __hash__(self):
        return hash((self._exps.tobytes(), self._coefs.tobytes()))

    def __repr__(self):
        body = " + ".join(f"({c:.6g})z^{k}" for k, c in self.terms.items())
        return f"TrigPoly({body or '0'})"

    def __call__(self, z):
        """Evaluate at arbitrary complex points (direct summation)."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        for k, c in zip(self._exps.tolist(), self._coefs.tolist()):
            out += c * z ** k
        return out

    def on_grid(self, size: int, shift: float = 0.0) -> np.ndarray:
        """Values at ``exp(2 pi i (t + shift) / size)``, t = 0..size-1.

        Exponents are reduced mod ``size`` before the FFT, which is exact for
        integer exponents, so no size restriction is needed for evaluation.
        """
        a = np.zeros(size, dtype=complex)
        coefs = self._coefs
        if shift:
            coefs = coefs * np.exp(2j * np.pi * self._exps * shift / size)
        np.add.at(a, np.mod(self._exps, size), coefs)
        return np.fft.ifft(a) * size

    # -- JSON interchange -------------------------------------------------

    def to_json_obj(self) -> dict:
        return {"terms": [{"exp": k, "re": c.real, "im": c.imag}
                          for k, c in self.terms.items()]}

    @classmethod
    def from_json_obj(cls, obj) -> TrigPoly:
        terms = obj["terms"]
        exps = [int(t["exp"]) for t in terms]
        if len(set(exps)) != len(exps):
            raise ValueError("duplicate exponent in polynomial JSON")
        return cls((int(t["exp"]), complex(float(t["re"]), float(t.get("im", 0.0))))
                   for t in terms)

    def dumps(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def loads(cls, text: str) -> TrigPoly:
        return cls.from_json_obj(json.loads(text))


@dataclass(frozen=True)
class Grid:
    """Uniform grid of ``size`` points ``exp(2 pi i t / size)`` on the circle."""

    size: int

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("grid size must be positive")

    def points(self) -> np.ndarray:
        return np.exp(2j * np.pi * np.arange(self.size) / self.size)

    def values(self, p: TrigPoly) -> np.ndarray:
        return p.on_grid(self.size)

    def check_sup(self, p: TrigPoly):
        need = 4 * p.span + 4
        if self.size < need:
            raise GridTooCoarse(f"grid of {self.size} points < {need} needed for span {p.span}")


def next_pow2(n: int) -> int:
    return 1 << max(0, int(n - 1).bit_length())


def default_grid(*polys: TrigPoly, minimum: int | None = None) -> Grid:
    """Power-of-two grid of at least max(4096, 8*span + 8) points.

    The ``FLATPOLY_GRID`` environment variable overrides the floor.
    """
    floor = minimum or int(os.environ.get("FLATPOLY_GRID", DEFAULT_MIN_GRID))
    span = max((p.span for p in polys), default=0)
    return Grid(next_pow2(max(floor, 8 * span + 8)))


def l2_norm(p: TrigPoly) -> float:
    return math.sqrt(float(np.sum(np.abs(p.coefs) ** 2)))


def normalize_l2(p: TrigPoly) -> TrigPoly:
    if p.is_zero():
        raise EmptyPolynomial("cannot normalize the zero polynomial")
    return TrigPoly.from_arrays(p.exps, p.coefs / l2_norm(p))


def l1_modulus(p: TrigPoly, grid: Grid | None = None) -> float:
    grid = grid or default_grid(p)
    return float(np.mean(np.abs(grid.values(p))))


def sup_modulus(p: TrigPoly, grid: Grid | None = None) -> float:
    """Grid maximum of ``|P|``; a lower bound for the true sup norm."""
    grid = grid or default_grid(p)
    grid.check_sup(p)
    return float(np.max(np.abs(grid.values(p))))


@dataclass(frozen=True)
class ModulusSpectrum:
    """Expansion ``|P|^2 = center + sum_{k != 0} b_k z^{n_k}``.

    Only the positive half is stored (``exps`` strictly increasing and
    positive, ``coefs`` the matching ``b_k``); the negative half is the
    conjugate mirror, so Hermitian symmetry holds by construction.
    """

    center: float
    exps: np.ndarray
    coefs: np.ndarray

    @property
    def N(self) -> int:
        return int(self.exps.size)

    @property
    def L(self) -> float:
        """Sum of all off-centre coefficients, ``|P(1)|^2 - center``."""
        return 2.0 * float(np.sum(self.coefs.real))

    def signed(self):
        """Exponents and coefficients for k = -N..-1, 1..N."""
        n = np.concatenate([-self.exps[::-1], self.exps])
        b = np.concatenate([np.conj(self.coefs[::-1]), self.coefs])
        return n, b

    @property
    def offcenter(self) -> list[tuple[int, complex]]:
        n, b = self.signed()
        return list(zip(n.tolist(), b.tolist()))

    def as_trigpoly(self) -> TrigPoly:
        n, b = self.signed()
        return TrigPoly(list(zip(n.tolist(), b.tolist())) + [(0, self.center)])

    def coefficient(self, k: int) -> complex:
        if k == 0:
            return complex(self.center)
        i = np.searchsorted(self.exps, abs(k))
        if i < self.exps.size and self.exps[i] == abs(k):
            b = complex(self.coefs[i])
            return b if k > 0 else b.conjugate()
        return 0j

    def on_grid(self, size: int) -> np.ndarray:
        return self.as_trigpoly().on_grid(size)


def squared_modulus(p: TrigPoly) -> ModulusSpectrum:
    """Exact autocorrelation ``sum_{i,j} c_i conj(c_j) z^(e_i - e_j)``."""
    e, c = p.exps, p.coefs
    center = float(np.sum(np.abs(c) ** 2))
    if e.size < 2:
        return ModulusSpectrum(center, np.zeros(0, dtype=np.int64), np.zeros(0, dtype=complex))
    i, j = np.triu_indices(e.size, k=1)
    # e sorted ascending, so e[j] - e[i] > 0 for i < j
    d = e[j] - e[i]
    prods = c[j] * np.conj(c[i])
    exps, coefs = group_sum(d, prods)
    keep = np.abs(coefs) >= SPECTRUM_DUST
    return ModulusSpectrum(center, exps[keep], coefs[keep])


def fourier_coeff(s, k: int) -> complex:
    """Exact Fourier coefficient at exponent ``k`` (0 if absent)."""
    return s.coefficient(k)
