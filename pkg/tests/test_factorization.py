import math

import numpy as np
import pytest

from flatpoly import (ClassBSpec, TrigPoly, class_b, find_roots, gauss_fresnel, inner_outer,
                      log_integral, normalize_l2, outer_constant_track, single_spike)
from flatpoly.errors import LogSingularOnGrid
from flatpoly.factorization import aberth_roots, jensen_residual
from flatpoly.poly import Grid, default_grid


def same_multiset(a, b, tol):
    a = sorted(np.asarray(a), key=lambda z: (round(z.real, 6), round(z.imag, 6)))
    b = sorted(np.asarray(b), key=lambda z: (round(z.real, 6), round(z.imag, 6)))
    return len(a) == len(b) and all(abs(x - y) < tol for x, y in zip(a, b))


class TestRoots:
    def test_examples(self):
        assert same_multiset(find_roots(TrigPoly({0: -1, 2: 1})), [1, -1], 1e-12)
        assert same_multiset(find_roots(normalize_l2(TrigPoly({0: 1, 1: 1}))), [-1], 1e-12)
        assert np.all(find_roots(TrigPoly({5: 1})) == 0) and len(find_roots(TrigPoly({5: 1}))) == 5

    def test_double_root(self):
        r = find_roots(TrigPoly({0: 1, 1: -2, 2: 1}))
        assert np.allclose(r, 1, atol=1e-7)

    @pytest.mark.parametrize("seed", range(10))
    def test_against_numpy_roots(self, seed):
        rng = np.random.default_rng(seed)
        c = rng.normal(size=20) + 1j * rng.normal(size=20)
        mine = aberth_roots(c)
        ref = np.roots(c[::-1])
        assert same_multiset(mine, ref, 1e-8)
        # backward-error residual
        vals = np.polyval(c[::-1], mine)
        scale = np.max(np.abs(c)) * np.maximum(1, np.abs(mine)) ** 19
        assert np.all(np.abs(vals) <= 1e-10 * scale)

    def test_deterministic(self):
        c = np.arange(1, 12) + 0.5j
        assert np.array_equal(aberth_roots(c), aberth_roots(c))


class TestInnerOuter:
    def test_pure_inner(self):
        fac = inner_outer(TrigPoly({1: 1}))
        assert fac.Q.terms == {0: 1}
        assert fac.monomial == 1
        z = np.exp(1j * np.linspace(0, 6, 7))
        assert np.allclose(fac.inner(z), z)

    def test_outer_linear(self):
        p = normalize_l2(TrigPoly({0: -2, 1: 1}))
        fac = inner_outer(p)
        assert len(fac.inside) == 0
        assert fac.q0 == pytest.approx(2 / math.sqrt(5), abs=1e-10)
        assert log_integral(p) == pytest.approx(math.log(2 / math.sqrt(5)), abs=1e-10)

    def test_mixed(self):
        # (1 - z/2)(z - 1/3): inside {1/3}, outside {2}
        raw = TrigPoly({0: 1, 1: -0.5}) * TrigPoly({0: -1 / 3, 1: 1})
        p = normalize_l2(raw)
        fac = inner_outer(p)
        assert same_multiset(fac.inside, [1 / 3], 1e-12)
        assert same_multiset(fac.outside, [2], 1e-12)
        g = Grid(1024)
        assert np.allclose(np.abs(g.values(p)), np.abs(g.values(fac.Q)), atol=1e-13)
        # oracle: Q = s * (1 - z/2)(1 - z/3) up to a unimodular constant
        s = p.coefficient(0) / raw.coefficient(0)
        q_or = (TrigPoly({0: 1, 1: -0.5}) * TrigPoly({0: 1, 1: -1 / 3})) * s
        ratio = fac.Q.coefs / q_or.coefs
        assert np.allclose(np.abs(ratio), 1, atol=1e-12)
        assert np.allclose(ratio, ratio[0], atol=1e-12)
        assert fac.q0 > 0 and fac.Q.coefficient(0).imag == 0

    def test_reconstruction(self):
        rng = np.random.default_rng(7)
        c = rng.normal(size=12) + 1j * rng.normal(size=12)
        p = normalize_l2(TrigPoly.from_arrays(np.arange(12), c))
        fac = inner_outer(p)
        z = Grid(512).points()
        assert np.allclose(fac.inner(z) * fac.Q(z), p(z), atol=1e-10)
        assert np.max(np.abs(np.abs(fac.inner(z)) - 1)) <= 1e-8
        # Q has no roots in the open disk
        assert np.all(np.abs(find_roots(fac.Q)) >= 1 - 1e-8)

    def test_boundary_flag(self):
        fac = inner_outer(class_b([1]))
        assert fac.boundary_roots
        assert fac.q0 == pytest.approx(2 ** -0.5)

    @pytest.mark.parametrize("n", [8, 64, 256])
    def test_gauss_fresnel(self, n):
        fac = inner_outer(gauss_fresnel(n))
        assert fac.checks["modulus_dev"] < 1e-12


class TestLogIntegral:
    def test_constant(self):
        assert log_integral(TrigPoly.constant()) == 0

    def test_root_on_circle(self):
        p = normalize_l2(TrigPoly({0: 1, 1: 1}))
        with pytest.raises(LogSingularOnGrid):
            log_integral(p)
        # int log|1 + e^{i theta}| = 0
        assert log_integral(p, shift=True) == pytest.approx(-0.5 * math.log(2), abs=2e-3)

    def test_jensen_random(self):
        rng = np.random.default_rng(3)
        c = rng.normal(size=9) + 1j * rng.normal(size=9)
        p = normalize_l2(TrigPoly.from_arrays(np.arange(9), c))
        roots = np.roots(p.coefs[::-1])
        # Jensen oracle: log|Q(0)| = log|lead| + sum_{|a|>1} log|a|
        expected = math.log(abs(p.coefs[-1])) + sum(math.log(abs(a)) for a in roots if abs(a) > 1)
        fac = inner_outer(p)
        assert math.log(fac.q0) == pytest.approx(expected, abs=1e-9)
        assert abs(jensen_residual(p, fac)) < 2e-3


class TestOuterTrack:
    def test_constant(self):
        assert [t.q0 for t in outer_constant_track([TrigPoly.constant()] * 3)] == [1, 1, 1]

    def test_spikes_increase_to_one(self):
        track = outer_constant_track([single_spike(j, 1 / j) for j in range(1, 21)])
        q0 = [t.q0 for t in track]
        want = [1 / math.sqrt(1 + j ** -2) for j in range(1, 21)]
        assert np.allclose(q0, want, atol=1e-12)
        assert all(a < b for a, b in zip(q0, q0[1:]))
        assert all(t.eps == pytest.approx(2 / j / (1 + j ** -2), abs=1e-9)
                   for j, t in enumerate(track, 1))

    def test_dirichlet_stays_away(self):
        track = outer_constant_track([class_b(ClassBSpec.consecutive(m)) for m in range(2, 13)])
        q0 = [t.q0 for t in track]
        assert np.allclose(q0, [1 / math.sqrt(m) for m in range(2, 13)], atol=1e-9)
        assert max(q0) < 0.75
