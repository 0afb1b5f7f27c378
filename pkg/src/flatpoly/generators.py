"""
Polynomial families and van der Corput certificates for their sup norms.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (DegenerateHLConstant, DuplicateExponent,
                     SecondDerivativeNotBoundedAway, ZeroNotInsideDisk)
from .poly import TrigPoly


@dataclass(frozen=True)
class ClassBSpec:
    m: int
    exponents: tuple[int, ...]

    @classmethod
    def consecutive(cls, m: int) -> ClassBSpec:
        return cls(m, tuple(range(1, m)))


def class_b(spec: ClassBSpec | Sequence[int]) -> TrigPoly:
    """``(1 + z^R_1 + ... + z^R_{m-1}) / sqrt(m)``.

    ``spec`` may also be given as the bare exponent list R_1..R_{m-1}.
    """
    if not isinstance(spec, ClassBSpec):
        exps = tuple(int(r) for r in spec)
        spec = ClassBSpec(len(exps) + 1, exps)
    exps = tuple(spec.exponents)
    if len(set(exps)) != len(exps):
        raise DuplicateExponent(f"repeated exponent in {exps}")
    if any(r <= 0 for r in exps):
        raise ValueError("class-B exponents must be positive")
    if spec.m != len(exps) + 1:
        raise ValueError(f"m={spec.m} does not match {len(exps)} exponents")
    w = 1.0 / math.sqrt(spec.m)
    return TrigPoly({0: w, **{r: w for r in exps}})


def gauss_fresnel(n: int) -> TrigPoly:
    """``G_n(z) = n^{-1/2} sum_{k<n} exp(pi i k^2 / n) z^k``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    k = np.arange(n)
    # reduce k^2 mod 2n so the phase stays small and exact
    phase = np.mod(k * k, 2 * n) / n
    return TrigPoly.from_arrays(k, np.exp(1j * np.pi * phase) / math.sqrt(n))


def hardy_littlewood(n: int, c: float = 1.0) -> TrigPoly:
    """``H_n(z) = n^{-1/2} (1 + sum_{k=1}^{n-1} exp(2 pi i c k ln k / n) z^k)``."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if c == 0:
        raise DegenerateHLConstant("c = 0 collapses H_n to a Dirichlet kernel")
    k = np.arange(1, n, dtype=float)
    v = np.exp(2j * np.pi * c * k * np.log(k) / n)
    coefs = np.concatenate([[1.0 + 0j], v]) / math.sqrt(n)
    return TrigPoly.from_arrays(np.arange(n), coefs)


def single_spike(n: int, delta: float) -> TrigPoly:
    """``(1 + delta z^n) / sqrt(1 + delta^2)``, a perturbed constant."""
    if n < 1 or delta <= 0:
        raise ValueError("need n >= 1 and delta > 0")
    s = math.sqrt(1.0 + delta * delta)
    return TrigPoly({0: 1.0 / s, n: delta / s})


def blaschke_partial_sum(zeros: Sequence[complex], degree: int) -> TrigPoly:
    """Degree-``degree`` Taylor section of ``prod (z - a) / (1 - conj(a) z)``.

    Not renormalized; its L2 norm tends to 1 as the degree grows.
    """
    zeros = [complex(a) for a in zeros]
    for a in zeros:
        if abs(a) >= 1:
            raise ZeroNotInsideDisk(f"zero {a} not inside the unit disk")
    if degree < 0:
        raise ValueError("degree must be >= 0")
    num = np.array([1.0 + 0j])
    den = np.array([1.0 + 0j])
    for a in zeros:
        num = np.convolve(num, [-a, 1.0])
        den = np.convolve(den, [1.0, -a.conjugate()])
    # power series division num / den, den[0] = 1
    out = np.zeros(degree + 1, dtype=complex)
    for k in range(degree + 1):
        acc = num[k] if k < num.size else 0j
        for i in range(1, min(k, den.size - 1) + 1):
            acc -= den[i] * out[k - i]
        out[k] = acc
    return TrigPoly.from_arrays(np.arange(degree + 1), out)


# -- van der Corput ---------------------------------------------------------

@dataclass(frozen=True)
class VdcFunctionSpec:
    """Phase ``f`` for an exponential sum over integers in ``[a, b]``.

    kind ``"quadratic"``: f(u) = u*theta + u^2/(2N).
    kind ``"xlogx"``:     f(u) = c*u*ln(u) + u*theta, requires a >= 1.
    """

    kind: str
    a: float
    b: float
    theta: float = 0.0
    N: int = 1
    c: float = 1.0

    def f(self, u):
        if self.kind == "quadratic":
            return u * self.theta + u * u / (2.0 * self.N)
        return self.c * u * np.log(u) + u * self.theta

    def fprime(self, u):
        if self.kind == "quadratic":
            return self.theta + u / self.N
        return self.c * (math.log(u) + 1.0) + self.theta

    def rho(self) -> float:
        """Closed-form minimum of ``|f''|`` on [a, b]."""
        if self.kind == "quadratic":
            return 1.0 / self.N if self.N > 0 else 0.0
        if self.kind == "xlogx":
            if self.a < 1 or not math.isfinite(self.b):
                return 0.0
            return abs(self.c) / self.b
        raise ValueError(f"unknown kind {self.kind!r}")


@dataclass(frozen=True)
class VdcCertificate:
    lhs: float
    rhs: float

    @property
    def ok(self) -> bool:
        return self.lhs <= self.rhs


def vdc_rhs(fprime_a: float, fprime_b: float, rho: float) -> float:
    return (abs(fprime_b - fprime_a) + 2.0) * (4.0 / math.sqrt(rho) + 3.0)


def vdc_certificate(spec: VdcFunctionSpec) -> VdcCertificate:
    """Direct sum vs. the van der Corput second-derivative bound."""
    rho = spec.rho()
    if not rho > 0:
        raise SecondDerivativeNotBoundedAway(f"rho = {rho} for {spec}")
    n = np.arange(math.ceil(spec.a), math.floor(spec.b) + 1, dtype=float)
    lhs = abs(np.sum(np.exp(2j * np.pi * spec.f(n)))) if n.size else 0.0
    rhs = vdc_rhs(spec.fprime(spec.a), spec.fprime(spec.b), rho)
    return VdcCertificate(float(lhs), rhs)


def gauss_fresnel_bound(n: int, theta: float = 0.0) -> float:
    """Van der Corput upper bound for ``|G_n(exp(2 pi i theta))|``.

    Since ``exp(pi i k^2/n) = exp(2 pi i k^2/(2n))`` the phase is the
    quadratic family with N = n on [0, n-1], rho = 1/n.
    """
    if n == 1:
        return 1.0
    spec = VdcFunctionSpec("quadratic", 0, n - 1, theta=theta, N=n)
    rhs = vdc_rhs(spec.fprime(0), spec.fprime(n - 1), spec.rho())
    return rhs / math.sqrt(n)


def _dyadic_blocks(n: int):
    j = 0
    while 2 ** j < n:
        yield j, 2 ** j, min(2 ** (j + 1), n)
        j += 1


def hl_dyadic_certificate(n: int, c: float = 1.0, theta: float = 0.0) -> float:
    """Upper bound for ``|H_n(exp(2 pi i theta))|`` by dyadic blocks.

    The k >= 1 terms of ``sqrt(n) H_n`` are an exponential sum with phase
    ``(c k ln k)/n + k theta``; each block [2^j, 2^{j+1}] (clipped to n) gets
    the van der Corput bound with rho_j = |c/n| / 2^{j+1}. The k = 0 term adds 1.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    cc = c / n
    if cc == 0:
        raise SecondDerivativeNotBoundedAway("c = 0")
    total = 1.0
    for j, a, b in _dyadic_blocks(n):
        rho = abs(cc) / 2 ** (j + 1)
        fa = cc * (math.log(a) + 1.0) + theta
        fb = cc * (math.log(b) + 1.0) + theta
        total += vdc_rhs(fa, fb, rho)
    return total / math.sqrt(n)
