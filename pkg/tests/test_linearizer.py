import math
import warnings
from fractions import Fraction

import numpy as np
import pytest

from siegel.arithmetic import GOLDEN, SILVER, RotationNumber
from siegel.io import read_table
from siegel.linearizer import (LinearizerSeries, conformal_radius, evaluate_linearizer,
                               export_series, linearizer_coeffs, quadratic_map,
                               recursion_residual, verify_conjugacy)

R_GOLD = 0.32525732224837667  # hadamard-fit, N = 16384, sigma = 0.25


@pytest.fixture(scope="module")
def golden_1024():
    return linearizer_coeffs(GOLDEN, 1024)


def test_low_order_coefficients(golden_1024):
    lam = np.exp(2j * np.pi * GOLDEN.value)
    c2 = 1 / (lam ** 2 - lam)
    c3 = 2 * c2 / (lam ** 3 - lam)
    c4 = (2 * c3 + c2 * c2) / (lam ** 4 - lam)
    s = golden_1024.sigma
    got = golden_1024.coeffs[1:5] / s ** np.arange(1, 5)
    assert np.allclose(got, [1, c2, c3, c4], rtol=1e-13, atol=0)


def test_recursion_and_conjugacy(golden_1024):
    assert recursion_residual(golden_1024) < 1e-12
    assert verify_conjugacy(golden_1024, 1024) < 1e-10


def test_functional_equation_pointwise(golden_1024):
    z = 0.1 * np.exp(2j * np.pi * np.linspace(0, 1, 7, endpoint=False))
    lam = golden_1024.lam
    lhs = evaluate_linearizer(golden_1024, lam * z)
    rhs = quadratic_map(golden_1024, evaluate_linearizer(golden_1024, z))
    assert np.max(np.abs(lhs - rhs)) < 1e-14


@pytest.mark.parametrize("q", [2, 3, 5, 7, 12, 20])
def test_resonance_exact_and_float(q):
    for p in range(1, q):
        if math.gcd(p, q) != 1:
            continue
        for alpha in (Fraction(p, q), p / q):
            s = linearizer_coeffs(alpha, 256)
            assert s.resonance is not None and s.resonance.order == q + 1
            est = conformal_radius(s)
            assert est.value == 0.0 and est.resonant_zero


def test_sigma_equivariance():
    a = linearizer_coeffs(SILVER, 512, sigma=0.25)
    b = linearizer_coeffs(SILVER, 512, sigma=0.2)
    n = np.arange(1, 513)
    ratio = b.coeffs[1:] / a.coeffs[1:]
    assert np.max(np.abs(ratio / (0.8 ** n) - 1)) < 1e-10


def test_rescaling_keeps_coefficients_in_range():
    s = linearizer_coeffs(GOLDEN, 2048, sigma=2.0)
    assert s.rescales > 0
    assert np.all(np.isfinite(s.coeffs))
    assert conformal_radius(s).value == pytest.approx(linearizer_coeffs(GOLDEN, 2048).radius.value,
                                                      rel=1e-9)


def _geometric(rho, N=1024):
    sigma = 1.5 * rho
    n = np.arange(N + 1)
    coeffs = (sigma / rho) ** n.astype(float)
    coeffs[0] = 0
    return LinearizerSeries(RotationNumber.from_float(0.5), 1, N, sigma, coeffs.astype(complex))


@pytest.mark.parametrize("rho", [0.1, 0.25, 0.5])
@pytest.mark.parametrize("method", ["hadamard-fit", "tail-slope"])
def test_geometric_series_radius(rho, method):
    est = conformal_radius(_geometric(rho), method)
    assert est.value == pytest.approx(rho, rel=1e-3)


def test_golden_radius_regression():
    est = conformal_radius(linearizer_coeffs(GOLDEN, 16384))
    assert est.value == pytest.approx(R_GOLD, rel=1e-9)
    assert abs(est.hadamard - est.tail) < 0.02 * est.value


def test_radius_input_errors(golden_1024):
    with pytest.raises(ValueError):
        conformal_radius(golden_1024, "bogus")
    with pytest.raises(ValueError):
        conformal_radius(linearizer_coeffs(GOLDEN, 32))


def test_evaluate_warns_outside_guard(golden_1024):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        evaluate_linearizer(golden_1024, 0.1)
    with pytest.warns(RuntimeWarning):
        evaluate_linearizer(golden_1024, 0.33)


def test_export_roundtrip(tmp_path, golden_1024):
    path = tmp_path / "coeffs.csv"
    export_series(golden_1024, path, {"alpha": "golden", "N": 1024})
    config, meta, cols, rows = read_table(path)
    assert config == {"alpha": "golden", "N": 1024}
    assert cols == ["n", "re_d", "im_d", "ln_abs_c"]
    assert len(rows) == 1024
    n, re, im, _ = rows[99]
    assert complex(float(re), float(im)) == golden_1024.coeffs[int(n)]


def _substitution_oracle(lam, N):
    """c_n from the z**n coefficient of P(L) - L(lam z) with the truncated polynomial."""
    P = np.polynomial.polynomial
    c = np.zeros(N + 1, dtype=complex)
    c[1] = 1
    for n in range(2, N + 1):
        sq = P.polymul(c[:n], c[:n])[:n + 1]
        full = np.pad(lam * c[:n], (0, 1)) + np.pad(sq, (0, n + 1 - len(sq)))
        c[n] = full[n] / (lam ** n - lam)
    return c


def test_coefficients_match_substitution_oracle():
    s = linearizer_coeffs(GOLDEN, 64)
    oracle = _substitution_oracle(s.lam, 64)
    got = s.coeffs / s.sigma ** np.arange(65)
    assert np.allclose(got[1:], oracle[1:], rtol=1e-12, atol=0)


def test_verify_conjugacy_edges():
    s = linearizer_coeffs(GOLDEN, 64)
    assert verify_conjugacy(s, 1) == 0.0
    assert verify_conjugacy(s, 50) < 1e-10
    with pytest.raises(ValueError, match="order 3"):
        verify_conjugacy(linearizer_coeffs(Fraction(1, 2), 64), 3)


def test_normalization_at_origin(golden_1024):
    assert evaluate_linearizer(golden_1024, 0.0) == 0
    h = 1e-8
    assert abs(evaluate_linearizer(golden_1024, h) / h - 1) < 1e-6


def test_functional_equation_hundred_points(golden_1024):
    rng = np.random.default_rng(5)
    r = 0.5 * golden_1024.radius.value
    z = r * np.sqrt(rng.uniform(0, 1, 100)) * np.exp(2j * np.pi * rng.uniform(0, 1, 100))
    lhs = evaluate_linearizer(golden_1024, golden_1024.lam * z)
    rhs = quadratic_map(golden_1024, evaluate_linearizer(golden_1024, z))
    assert np.max(np.abs(lhs - rhs)) < 1e-9


@pytest.mark.slow
def test_estimator_agreement_constant_type():
    rng = np.random.default_rng(17)
    for _ in range(5):
        x = RotationNumber.from_quotients(list(rng.integers(1, 5, 40)))
        est = conformal_radius(linearizer_coeffs(x, 16384))
        assert abs(est.hadamard - est.tail) <= 0.02 * est.hadamard
