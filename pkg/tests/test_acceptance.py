"""Acceptance criteria, one test per criterion.

Each test records a single ``PASS``/``FAIL`` line with its timing; the lines
are printed in an "acceptance criteria" section at the end of the pytest run.
``python tests/test_acceptance.py`` runs this file alone.
"""

import math
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from siegel import kernels
from siegel.arithmetic import GOLDEN, SILVER, RotationNumber
from siegel.cli import main as cli_main
from siegel.herman import (CircleFamily, conjugacy_samples, lift_eval, lock_scan,
                           rotation_number, solve_lambda)
from siegel.io import read_table
from siegel.linearizer import (LinearizerSeries, conformal_radius, linearizer_coeffs,
                               verify_conjugacy)
from siegel.search import RadiusOracle, ivt_search, linearizer_distance, target_radius_search

from conftest import ACCEPTANCE_LINES  # noqa: E402

BLASCHKE = CircleFamily("blaschke", 4.0)


def report(tag, name, ok, seconds, limit, detail=""):
    ok = bool(ok) and seconds < limit
    line = f"{'PASS' if ok else 'FAIL'} [{tag}] {name} ({seconds:.2f}s / {limit:g}s) {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0


# 1 ---------------------------------------------------------------------------------


def test_golden_conjugacy():
    with Timer() as t:
        s = linearizer_coeffs(GOLDEN, 1024)
        res = verify_conjugacy(s, 1024)
    assert report(1, "golden N=1024 conjugacy residual < 1e-10", res < 1e-10, t.seconds, 5,
                  f"residual={res:.3e} backend={kernels.BACKEND}")


# 2 ---------------------------------------------------------------------------------


def test_rational_resonances():
    bad = []
    count = 0
    with Timer() as t:
        for q in range(1, 21):
            for p in range(1, q):  # rotation numbers live in (0, 1)
                if math.gcd(p, q) != 1:
                    continue
                for alpha in (Fraction(p, q), p / q):
                    count += 1
                    s = linearizer_coeffs(alpha, 64)
                    r = conformal_radius(s)
                    if s.resonance is None or s.resonance.order != q + 1 or r.value != 0.0:
                        bad.append((p, q, type(alpha).__name__))
    assert report(2, "p/q with q<=20 resonate at order q+1 with radius 0", not bad, t.seconds, 5,
                  f"checked={count} failures={bad[:5]}")


# 3 ---------------------------------------------------------------------------------


def _geometric(rho, N=1024):
    sigma = 1.5 * rho
    coeffs = (sigma / rho) ** np.arange(N + 1, dtype=float)
    coeffs[0] = 0
    return LinearizerSeries(RotationNumber.from_float(0.5), 1, N, sigma, coeffs.astype(complex))


def test_radius_estimators():
    details, ok = [], True
    with Timer() as t:
        for rho in (0.1, 0.25, 0.5):
            est = conformal_radius(_geometric(rho))
            e_fit = abs(est.hadamard / rho - 1)
            e_tail = abs(est.tail / rho - 1)
            ok &= e_fit < 1e-3 and e_tail < 1e-3
            details.append(f"r={rho}: fit {e_fit:.1e} tail {e_tail:.1e}")
        for name, alpha in (("golden", GOLDEN), ("sqrt2-1", SILVER)):
            est = conformal_radius(linearizer_coeffs(alpha, 16384))
            gap = abs(est.hadamard - est.tail) / est.hadamard
            ok &= gap < 0.02
            details.append(f"{name}: fit {est.hadamard:.6f} tail {est.tail:.6f} gap {gap:.2%}")
    assert report(3, "radius estimators (geometric 0.1% / N=16384 agreement 2%)", ok,
                  t.seconds, 60, "; ".join(details))


# 4 ---------------------------------------------------------------------------------


def test_sigma_equivariance():
    with Timer() as t:
        worst = 0.0
        for alpha in (GOLDEN, SILVER, RotationNumber.from_float(0.3183098861837907)):
            a = linearizer_coeffs(alpha, 512, sigma=0.25)
            for sp in (0.1, 0.2, 0.3):
                b = linearizer_coeffs(alpha, 512, sigma=sp)
                n = np.arange(1, 513)
                pred = (sp / 0.25) ** n
                rel = np.abs(b.coeffs[1:] / a.coeffs[1:] / pred - 1)
                worst = max(worst, float(rel.max()))
    assert report(4, "sigma equivariance d_n(s')/d_n(s) = (s'/s)^n, n<=512", worst < 1e-10,
                  t.seconds, 60, f"max rel err={worst:.2e}")


# 5 ---------------------------------------------------------------------------------


def test_target_radius_search():
    delta = 1e-2
    with Timer() as t:
        oracle = RadiusOracle()
        r_gold = oracle(GOLDEN.value).value
        r_target = 0.9 * r_gold
        trace = target_radius_search(GOLDEN.value, r_target, delta, 0.02 * r_gold, oracle)
        N = trace.final_N
        dist = linearizer_distance(oracle.series(trace.final_alpha, N),
                                   oracle.series(GOLDEN.value, N), 0.5 * r_target)
    shift = abs(trace.final_alpha - GOLDEN.value)
    violations = trace.invariant_violations()
    ok = trace.converged and shift < delta and not violations and dist < delta
    assert report(5, "target radius search from golden (0.9 r_gold)", ok, t.seconds, 600,
                  f"converged={trace.converged} stages={len(trace.stages)} shift={shift:.2e} "
                  f"r={trace.final_radius:.6f} target={r_target:.6f} dist={dist:.2e} "
                  f"violations={violations}")


# 6 ---------------------------------------------------------------------------------


def test_ivt_oracles():
    rng = np.random.default_rng(2024)
    tol = 1e-9
    failures = 0
    with Timer() as t:
        for i in range(200):
            xs = np.concatenate([[0.0], np.sort(rng.uniform(0, 1, rng.integers(1, 12))), [1.0]])
            ys = np.cumsum(rng.uniform(1e-3, 1.0, len(xs)))
            if i % 2:
                ys = ys[::-1].copy()
            h = lambda s, xs=xs, ys=ys: float(np.interp(s, xs, ys))  # noqa: E731
            x = float(rng.uniform(ys.min(), ys.max()))
            c = ivt_search(h, 0.0, 1.0, x, tol)
            failures += not (0 <= c <= 1 and abs(h(c) - x) <= tol)
    assert report(6, "ivt_search on 200 monotone piecewise-linear oracles", failures == 0,
                  t.seconds, 10, f"failures={failures} tol={tol:g}")


# 7 ---------------------------------------------------------------------------------


def test_herman_basics():
    with Timer() as t:
        r0 = rotation_number(BLASCHKE).value
        scan = lock_scan(BLASCHKE, 0.0, 1.0, 64, n_iter=2 ** 14)
        rho = np.array([e.value for _, e in scan])
        drop = float(max(0.0, -np.diff(rho).min()))
        shift = max(abs(rotation_number(BLASCHKE.at(l + 1)).value
                        - rotation_number(BLASCHKE.at(l)).value - 1) for l in (0.1, 0.37, 0.8))
        x = np.linspace(0, 1, 4097)
        degree = max(float(np.max(np.abs(lift_eval(BLASCHKE.at(l), x + 1)
                                         - lift_eval(BLASCHKE.at(l), x) - 1)))
                     for l in (0.0, 0.5))
        circle = BLASCHKE.circle_deviation()
    ok = abs(r0) < 1e-12 and drop <= 1e-12 and shift < 1e-12 and degree < 1e-12 and circle < 1e-12
    assert report(7, "herman rotation basics", ok, t.seconds, 30,
                  f"rho(0)={r0:.1e} max drop={drop:.1e} shift err={shift:.1e} "
                  f"degree err={degree:.1e} circle dev={circle:.1e}")


# 8 ---------------------------------------------------------------------------------


def test_herman_conjugacy():
    with Timer() as t:
        sol = solve_lambda(BLASCHKE, GOLDEN.value, 1e-8)
        fam = BLASCHKE.at(sol.lam)
        cs = conjugacy_samples(fam, 4096)
        cs2 = conjugacy_samples(fam, 8192)
    w0 = cs.w[0] == 1
    circ = float(np.max(np.abs(np.abs(cs.w) - 1)))
    m1, m2 = cs.modulus, cs2.modulus
    stable = m1 is not None and m2 is not None and abs(m2 - m1) <= 0.05 * abs(m1)
    ok = w0 and circ < 1e-10 and cs.fit_residual < 1e-6 and stable
    assert report(8, "herman conjugacy samples at golden", ok, t.seconds, 120,
                  f"lambda*={sol.lam:.12f} |w|-1={circ:.1e} fit={cs.fit_residual:.1e} "
                  f"modulus {m1} -> {m2}")


# 9 ---------------------------------------------------------------------------------


def test_scan(tmp_path):
    out = tmp_path / "scan.csv"
    with Timer() as t:
        status = cli_main(["scan", "--min", "0.60", "--max", "0.64", "--count", "512",
                           "--workers", "4", "--out", str(out)])
    _, _, _, rows = read_table(out)
    alphas = np.array([float(r[0]) for r in rows])
    radii = np.array([float(r[1]) for r in rows])
    zeros = {round(float(a), 12) for a, r in zip(alphas, radii) if r == 0.0}
    expected = {0.6, 0.625}
    near = np.abs(alphas - GOLDEN.value) < 1e-3
    ok = status == 0 and len(rows) == 512 and zeros == expected and np.all(radii[near] > 0)
    assert report(9, "512-point scan on [0.60, 0.64]", ok, t.seconds, 600,
                  f"zeros={sorted(zeros)} min r near golden={radii[near].min():.4f} "
                  f"({int(near.sum())} pts)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
