import itertools
from collections import defaultdict

import numpy as np
import pytest

from flatpoly import TrigPoly, class_b

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(number, ok, detail):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {detail}")
        print(ACCEPTANCE_LINES[-1])
        return ok

    return record


# -- independent oracles -------------------------------------------------------

def autocorr_oracle(p: TrigPoly) -> dict:
    """|P|^2 coefficients by a plain double loop."""
    out = defaultdict(complex)
    terms = p.terms
    for a, ca in terms.items():
        for b, cb in terms.items():
            out[a - b] += ca * cb.conjugate()
    return dict(out)


def quad_values(p: TrigPoly, M: int, shift=0.0) -> np.ndarray:
    """Direct evaluation at exp(2 pi i (t + shift)/M), no FFT."""
    theta = 2 * np.pi * (np.arange(M) + shift) / M
    out = np.zeros(M, dtype=complex)
    for k, c in p.terms.items():
        out += c * np.exp(1j * k * theta)
    return out


def gram_oracle(p: TrigPoly):
    """Gram matrix by quadrature of X_k conj(X_l) |P|^2 on an exact grid."""
    ac = autocorr_oracle(p)
    pos = sorted(k for k, v in ac.items() if k > 0 and abs(v) >= 1e-13)
    n = [-k for k in reversed(pos)] + pos
    b = [ac[k] for k in n]
    M = 1
    while M <= 4 * p.span + 2:
        M *= 2
    theta = 2 * np.pi * np.arange(M) / M
    w = np.abs(quad_values(p, M)) ** 2
    X = np.array([np.exp(1j * nk * theta) - np.conj(bk) for nk, bk in zip(n, b)])
    G = (X * w) @ X.conj().T / M
    return n, b, G


def enumerate_product(supports_coefs):
    """Brute-force expansion of a product of sparse polynomials."""
    out = defaultdict(complex)
    count = defaultdict(int)
    for combo in itertools.product(*supports_coefs):
        e = sum(k for k, _ in combo)
        c = 1
        for _, v in combo:
            c *= v
        out[e] += c
        count[e] += 1
    return dict(out), dict(count)


def random_class_b(rng, max_m=16, max_exp=64):
    m = int(rng.integers(2, max_m + 1))
    exps = np.sort(rng.choice(np.arange(1, max_exp + 1), m - 1, replace=False))
    return class_b(exps.tolist())


@pytest.fixture(scope="session")
def class_b_corpus():
    rng = np.random.default_rng(42)
    return [random_class_b(rng) for _ in range(200)]
