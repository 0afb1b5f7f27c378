"""Acceptance gate: one PASS/FAIL line per criterion, each with its runtime budget."""

import json
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from flatpoly import (ClassBSpec, ScaledFamily, TrigPoly, VdcFunctionSpec, choose_scales,
                      class_b, egorov_select, flatness_report, gauss_fresnel, gauss_fresnel_bound,
                      gram_matrix, inner_outer, is_dissociated, log_integral, normalize_l2,
                      partial_product, single_spike, squared_modulus, vdc_certificate)
from flatpoly.flatness import r_entrywise, r_identity, sandwich_ok
from flatpoly.poly import Grid, default_grid

from conftest import autocorr_oracle, random_class_b

pytestmark = pytest.mark.acceptance

ONE_PLUS_Z = normalize_l2(TrigPoly({0: 1, 1: 1}))


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def test_01_closed_forms(criterion):
    with Timer() as t:
        a = flatness_report(ONE_PLUS_Z)
        b = flatness_report(class_b(ClassBSpec.consecutive(3)))
        # oracle: hand autocorrelation plus r = int |f|^2 |P|^2 - L^2
        ac = autocorr_oracle(class_b(ClassBSpec.consecutive(3)))
        L_or = sum(v.real for k, v in ac.items() if k != 0)
        checks = [abs(a.N - 1), abs(a.L - 1), abs(a.eps - 1), abs(a.r - 1),
                  abs(b.N - 2), abs(b.L - 2), abs(b.r - 10 / 3), abs(b.L - L_or),
                  abs(r_identity(class_b(ClassBSpec.consecutive(3))) - 10 / 3)]
    worst = max(checks)
    ok = worst <= 1e-9 and t.elapsed < 1
    criterion(1, ok, f"closed forms worst dev {worst:.2e}, {t.elapsed:.2f}s")
    assert ok


def test_02_03_gram_and_sandwich(criterion, class_b_corpus):
    with Timer() as t:
        dr = eig = diag = 0.0
        sandwich = True
        for p in class_b_corpus:
            g = gram_matrix(p, check=False)
            dr = max(dr, abs(r_entrywise(p) - r_identity(p)))
            eig = min(eig, g.min_eigenvalue())
            herm = np.max(np.abs(g.matrix - g.matrix.conj().T))
            diag = max(diag, herm, np.max(np.abs(np.diag(g.matrix) - (1 - np.abs(g.b) ** 2))))
            rep = flatness_report(p)
            sandwich &= sandwich_ok(rep.N, rep.r, rep.eps, 1e-6)
    ok2 = dr <= 1e-9 and eig >= -1e-9 and diag <= 1e-12 and t.elapsed < 30
    criterion(2, ok2, f"200 polys: |r1-r2| {dr:.1e}, min eig {eig:.1e}, "
                      f"diag/herm dev {diag:.1e}, {t.elapsed:.2f}s")
    criterion(3, sandwich and t.elapsed < 30, f"sandwich holds on all 200: {sandwich}")
    assert ok2 and sandwich


def test_04_spike_trajectory(criterion):
    with Timer() as t:
        vals, worst = [], 0.0
        for j in range(1, 21):
            rep = flatness_report(single_spike(j, 1 / j))
            L = 2 / j / (1 + j ** -2)
            worst = max(worst, abs(rep.r_over_2N - (1 - L * L / 2)))
            vals.append(rep.r_over_2N)
    inc = all(a < b for a, b in zip(vals, vals[1:])) and vals[-1] < 1
    ok = worst <= 1e-9 and inc and t.elapsed < 1
    criterion(4, ok, f"r/2N dev {worst:.1e}, increasing to {vals[-1]:.6f}, {t.elapsed:.2f}s")
    assert ok


def test_05_class_b_bound(criterion):
    with Timer() as t:
        ok = True
        for m in range(2, 33):
            s = squared_modulus(class_b(ClassBSpec.consecutive(m)))
            ok &= s.N == m - 1 and abs(s.L - (m - 1)) <= 1e-12
            ok &= abs(s.N / s.L ** 2 - 1 / (m - 1)) <= 1e-12 and s.N / s.L ** 2 <= 2
    ok = ok and t.elapsed < 5
    criterion(5, ok, f"N/L^2 = 1/(m-1) for m=2..32, {t.elapsed:.2f}s")
    assert ok


def test_06_factorization(criterion):
    rng = np.random.default_rng(42)
    with Timer() as t:
        polys = []
        while len(polys) < 100:
            deg = int(rng.integers(1, 33))
            c = rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1)
            if np.min(np.abs(np.abs(np.roots(c[::-1])) - 1)) < 1e-3:
                continue
            polys.append(normalize_l2(TrigPoly.from_arrays(np.arange(deg + 1), c)))
        mod = jensen = 0.0
        pos = True
        for p in polys:
            g = default_grid(p)
            fac = inner_outer(p, g)
            pv, qv = g.values(p), g.values(fac.Q)
            mod = max(mod, np.max(np.abs(np.abs(pv) - np.abs(qv))) / np.max(np.abs(pv)))
            pos &= fac.q0 > 0 and fac.Q.coefficient(0).imag == 0
            jensen = max(jensen, abs(math.log(fac.q0) - log_integral(p, g)))
        worked = inner_outer(normalize_l2(TrigPoly({0: -2, 1: 1}))).q0
    wdev = abs(worked - 2 / math.sqrt(5))
    ok = mod <= 1e-7 and pos and jensen <= 2e-3 and wdev <= 1e-10 and t.elapsed < 60
    criterion(6, ok, f"100 polys: ||P|-|Q|| {mod:.1e}, Jensen {jensen:.1e}, "
                     f"(z-2)/sqrt5 Q(0) dev {wdev:.1e}, {t.elapsed:.2f}s")
    assert ok


def test_07_gauss_fresnel(criterion):
    with Timer() as t:
        ratios, sups, within = [], [], True
        for k in range(3, 10):
            n = 2 ** k
            p = gauss_fresnel(n)
            rep = flatness_report(p)
            ratios.append(rep.r_over_N)
            s = float(np.max(np.abs(default_grid(p).values(p))))
            sups.append(s)
            within &= s <= gauss_fresnel_bound(n)
    spread = max(ratios) / min(ratios)
    ok = spread <= 10 and max(sups) <= 6 and within and t.elapsed < 120
    criterion(7, ok, f"r/N spread {spread:.3f}, max sup {max(sups):.3f}, "
                     f"under vdc bound: {within}, {t.elapsed:.2f}s")
    assert ok


def test_08_vdc(criterion):
    rng = np.random.default_rng(2024)
    with Timer() as t:
        specs = []
        for _ in range(50):
            N = int(rng.integers(2, 2000))
            specs.append(VdcFunctionSpec("quadratic", 0, N - 1, theta=float(rng.uniform()), N=N))
        for _ in range(50):
            c = float(rng.choice([-1, 1]) * rng.uniform(0.05, 5))
            specs.append(VdcFunctionSpec("xlogx", 1, int(rng.integers(2, 2000)),
                                         theta=float(rng.uniform()), c=c))
        certs = [vdc_certificate(s) for s in specs]
    bad = sum(not (c.lhs <= c.rhs) for c in certs)
    ok = bad == 0 and t.elapsed < 10
    criterion(8, ok, f"{len(certs)} specs, {bad} violations, {t.elapsed:.2f}s")
    assert ok


def test_09_dissociation(criterion):
    raw = TrigPoly({0: 1, 1: 1})
    rng = np.random.default_rng(9)
    with Timer() as t:
        ex1 = is_dissociated(ScaledFamily(((raw, 1), (raw, 2))), squared=False)
        ex2 = is_dissociated(ScaledFamily(((raw, 1), (raw, 1))), squared=False)
        greedy_ok = True
        for _ in range(50):
            k = int(rng.integers(2, 5))
            polys = [random_class_b(rng, max_m=5, max_exp=6) for _ in range(k)]
            greedy_ok &= is_dissociated(choose_scales(polys)).ok
    ok = (ex1.ok and not ex2.ok and ex2.collision.exponent == 1 and greedy_ok
          and t.elapsed < 10)
    criterion(9, ok, f"(1+z)(1+z^2) ok={ex1.ok}, (1+z)(1+z) collision at "
                     f"{ex2.collision.exponent}, 50 greedy families ok={greedy_ok}, {t.elapsed:.2f}s")
    assert ok


def classical(depth):
    return ScaledFamily(tuple((ONE_PLUS_Z, 3 ** j) for j in range(depth)), verified=True)


def test_10_riesz_stabilization(criterion):
    with Timer() as t:
        fam = classical(8)
        st = partial_product(fam, 0)
        stable = True
        for _ in range(8):
            before = dict(zip(st.exps.tolist(), st.coefs.tolist()))
            st.extend()
            after = dict(zip(st.exps.tolist(), st.coefs.tolist()))
            stable &= all(after[k] == v for k, v in before.items())
        c0 = st.coeff(0)
        mass = max(abs(m - 1) for m in st.mass_trace)
    ok = c0 == 1.0 and stable and mass <= 1e-8 and t.elapsed < 30
    criterion(10, ok, f"coeff0 = {c0.real!r}, stable: {stable}, mass dev {mass:.1e}, "
                      f"{t.elapsed:.2f}s")
    assert ok


def test_11_singularity_witness(criterion):
    M = 2 ** 18
    with Timer() as t:
        fam = classical(8)
        rn = [flatness_report(p.scaled(l)).r_over_N for p, l in fam.factors]
        trace = partial_product(fam, 8, grid=Grid(M)).l1_trace
        # oracle: |1 + z^l| / sqrt2 = sqrt2 |cos(pi l t / M)|
        u = np.arange(M) / M
        prod, oracle = np.ones(M), [1.0]
        for _, l in fam.factors:
            prod *= math.sqrt(2) * np.abs(np.cos(np.pi * l * u))
            oracle.append(float(prod.mean()))
    pred = [(2 * math.sqrt(2) / math.pi) ** n for n in range(9)]
    oracle_dev = max(abs(a - b) for a, b in zip(trace, oracle))
    band = max(abs(a - b) for a, b in zip(trace, pred))
    ok = (all(abs(x - 1) <= 1e-12 for x in rn) and oracle_dev <= 1e-9
          and trace[6] < 0.5 and trace[8] < 0.35 and band <= 0.05 and t.elapsed < 60)
    criterion(11, ok, f"r/N all 1: {all(abs(x - 1) <= 1e-12 for x in rn)}, "
                      f"trace d6 {trace[6]:.4f} (<0.5), d8 {trace[8]:.4f} (<0.35), "
                      f"max |trace-(2sqrt2/pi)^n| {band:.3f} (<=0.05), "
                      f"oracle dev {oracle_dev:.1e}, {t.elapsed:.2f}s")
    assert ok


def test_12_egorov(criterion):
    with Timer() as t:
        spikes = egorov_select([single_spike(j, 2.0 ** -j) for j in range(1, 31)])
        kernels = egorov_select([class_b(ClassBSpec.consecutive(m)) for m in range(2, 33)])
    ok = len(spikes) >= 10 and len(kernels) < 3 and t.elapsed < 10
    criterion(12, ok, f"spikes {len(spikes)} picks, Dirichlet {len(kernels)}, {t.elapsed:.2f}s")
    assert ok


def test_13_scale_invariance(criterion):
    rng = np.random.default_rng(13)
    with Timer() as t:
        ok = True
        for _ in range(50):
            p = random_class_b(rng)
            s = int(rng.choice([2, 3, 5, 7]))
            a, b = flatness_report(p), flatness_report(p.scaled(s))
            ok &= (a.N, a.L, a.r) == (b.N, b.L, b.r)
    ok = ok and t.elapsed < 10
    criterion(13, ok, f"(N, L, r) exact under z -> z^s on 50 polys, {t.elapsed:.2f}s")
    assert ok


def test_14_cli(criterion, tmp_path):
    def cli(*args, cwd=None):
        return subprocess.run([sys.executable, "-m", "flatpoly", *map(str, args)],
                              capture_output=True, check=True, cwd=cwd)

    with Timer() as t:
        outs = []
        for i in range(2):
            # same relative paths each run; analyze echoes its input path
            d = tmp_path / f"run{i}"
            d.mkdir()
            cli("generate", "--family", "classb", "--exponents", "1,3,7,12", "-o", d / "p.json")
            cli("analyze", "p.json", "-o", "a.json", cwd=d)
            outs.append([(d / x).read_bytes() for x in ("p.json", "a.json")])
        same = outs[0] == outs[1]
        rep = json.loads(outs[0][1])
        direct = flatness_report(class_b([1, 3, 7, 12])).to_dict()
        round_trip = all(rep[k] == v for k, v in direct.items())
    ok = same and round_trip and t.elapsed < 5
    criterion(14, ok, f"byte-identical: {same}, round trip: {round_trip}, {t.elapsed:.2f}s")
    assert ok
