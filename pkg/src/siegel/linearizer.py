"""Linearizing series of the quadratic family ``P(z) = lam*z + z**2``.

The Taylor coefficients ``c_n`` of the linearizer ``L`` (``L(0) = 0``,
``L'(0) = 1``, ``P(L(z)) = L(lam*z)``) obey

    c_n (lam**n - lam) = sum_{j=1}^{n-1} c_j c_{n-j}.

We store rescaled coefficients ``d_n = c_n * sigma**n``, which satisfy the same
recursion with ``d_1 = sigma``. Picking ``sigma`` near the convergence radius
keeps ``|d_n|`` inside the float range for large ``n``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import kernels
from .arithmetic import RotationNumber

__all__ = [
    "Resonance",
    "LinearizerSeries",
    "RadiusEstimate",
    "ResonanceError",
    "linearizer_coeffs",
    "verify_conjugacy",
    "conformal_radius",
    "evaluate_linearizer",
    "export_series",
    "recursion_residual",
    "quadratic_map",
    "MIN_RADIUS_TERMS",
]

DIVISOR_FLOOR = 1e-14
RANGE_LO, RANGE_HI = 1e-300, 1e300
MIN_RADIUS_TERMS = 64
METHODS = ("hadamard-fit", "tail-slope")


class ResonanceError(ValueError):
    def __init__(self, order: int):
        self.order = order
        super().__init__(f"resonance at order {order}")


@dataclass(frozen=True)
class Resonance:
    order: int
    divisor: float  # |lam**order - lam| at detection


@dataclass(frozen=True, eq=False)
class LinearizerSeries:
    """Rescaled Taylor coefficients of the linearizer.

    ``coeffs[n] = c_n * sigma**n`` for ``n = 0..N`` (``coeffs[0] == 0``). When a
    resonance is found the series stops at ``N = order - 1``.
    """

    alpha: RotationNumber
    lam: complex
    N: int
    sigma: float
    coeffs: np.ndarray = field(repr=False)
    resonance: Resonance | None = None
    rescales: int = 0

    @property
    def log_abs_c(self) -> np.ndarray:
        """``ln|c_n|`` for ``n = 1..N``."""
        n = np.arange(1, self.N + 1)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.coeffs[1:])) - n * math.log(self.sigma)

    @cached_property
    def radius(self) -> "RadiusEstimate":
        return conformal_radius(self)


@dataclass(frozen=True)
class RadiusEstimate:
    value: float
    method: str
    window: tuple[int, int]
    uncertainty: float
    resonant_zero: bool = False
    hadamard: float = float("nan")
    tail: float = float("nan")


# --- coefficients -------------------------------------------------------------


def _as_rotation(alpha) -> RotationNumber:
    if isinstance(alpha, RotationNumber):
        return alpha
    if isinstance(alpha, Fraction):
        return RotationNumber.from_fraction(alpha)
    return RotationNumber.from_float(alpha)


def _divisors(alpha: RotationNumber, N: int) -> np.ndarray:
    """``lam**n - lam`` for ``n = 0..N`` with the phase reduced mod 1 first."""
    n = np.arange(N + 1)
    if alpha.fraction is not None:
        p, q = alpha.fraction.numerator, alpha.fraction.denominator
        phase = ((n * p) % q) / q
        div = np.exp(2j * np.pi * phase) - np.exp(2j * np.pi * (p % q) / q)
        div[(n - 1) % q == 0] = 0.0
    else:
        a = alpha.value
        num, den = a.as_integer_ratio()
        # exact n*a mod 1 for the binary value of a
        phase = np.array([(k * num % den) / den for k in range(N + 1)])
        div = np.exp(2j * np.pi * phase) - np.exp(2j * np.pi * a)
    return div


def _first_resonance(alpha: RotationNumber, div: np.ndarray, floor: float) -> int | None:
    if alpha.fraction is not None:
        q = alpha.fraction.denominator
        return q + 1 if q + 1 < len(div) else None
    small = np.nonzero(np.abs(div[2:]) < floor)[0]
    return int(small[0]) + 2 if small.size else None


def linearizer_coeffs(alpha, N: int, sigma: float = 0.25, divisor_floor: float = DIVISOR_FLOOR,
                      max_rescales: int = 12) -> LinearizerSeries:
    """Rescaled Taylor coefficients ``d_1..d_N`` of the linearizer.

    If some ``|d_n|`` leaves ``[1e-300, 1e300]`` the series is recomputed
    with ``sigma`` multiplied by ``exp(-slope)``, where ``slope`` is the growth
    rate of ``ln|d_n|`` over the second half of the valid prefix.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    alpha = _as_rotation(alpha)
    lam = complex(np.exp(2j * np.pi * alpha.value))
    div = _divisors(alpha, N)
    res_order = _first_resonance(alpha, div, divisor_floor)
    resonance = None
    n_top = N
    if res_order is not None and res_order <= N:
        resonance = Resonance(res_order, float(abs(div[res_order])))
        n_top = res_order - 1

    work = np.ascontiguousarray(div[: n_top + 1])
    for attempt in range(max_rescales + 1):
        d, stop = kernels.recurse(work, float(sigma), RANGE_LO, RANGE_HI)
        if stop < 0:
            return LinearizerSeries(alpha, lam, n_top, float(sigma), d, resonance, attempt)
        sigma = _rescaled_sigma(d, stop, sigma)
    raise FloatingPointError(f"coefficients left the float range after {max_rescales} rescales")


def _rescaled_sigma(d: np.ndarray, stop: int, sigma: float) -> float:
    overflow = abs(d[stop]) >= RANGE_HI or not np.isfinite(d[stop])
    if stop < 16:
        return sigma / 2 if overflow else sigma * 2
    n = np.arange(stop // 2, stop)
    slope = np.polyfit(n, np.log(np.abs(d[stop // 2: stop])), 1)[0]
    # land slightly on the decaying side so a noisy slope does not overflow again
    return sigma * math.exp(-slope) * 0.999


# --- conjugacy check ------------------------------------------------------------


def verify_conjugacy(series: LinearizerSeries, M: int) -> float:
    """Max coefficient of ``P(L(w)) - L(lam w)`` through order ``M``.

    Built by explicit polynomial composition in the rescaled variable, a code
    path separate from the recursion. Normalized by ``max(1, max|d_n|)``.
    """
    if series.resonance is not None and series.resonance.order <= M:
        raise ResonanceError(series.resonance.order)
    if M > series.N:
        raise ValueError(f"M={M} exceeds series length N={series.N}")
    if M < 1:
        raise ValueError("M must be >= 1")
    d = series.coeffs[: M + 1].copy()
    lam = series.lam
    square = np.polynomial.polynomial.polymul(d, d)[: M + 1]
    square = np.pad(square, (0, M + 1 - len(square)))
    left = lam * d + square
    right = d * np.power(lam, np.arange(M + 1))
    residual = np.abs(left - right)[1:]
    scale = max(1.0, float(np.max(np.abs(d[1:]))))
    return float(np.max(residual) / scale)


def recursion_residual(series: LinearizerSeries) -> float:
    """``max_n |d_n (lam^n - lam) - sum d_j d_{n-j}| / max|d_n|`` over the series."""
    d = series.coeffs
    N = series.N
    if N < 2:
        return 0.0
    div = _divisors(series.alpha, N)
    conv = np.array([np.dot(d[1:n], d[n - 1:0:-1]) for n in range(2, N + 1)])
    res = np.abs(d[2:] * div[2:] - conv)
    return float(np.max(res) / np.max(np.abs(d[1:])))


# --- radius -----------------------------------------------------------------------


def _robust_line(x: np.ndarray, y: np.ndarray, trim: float = 0.05) -> tuple[float, float]:
    """Least-squares line refit after dropping the ``trim`` largest residuals."""
    slope, icpt = np.polyfit(x, y, 1)
    k = int(len(x) * trim)
    if k > 0 and len(x) - k >= 2:
        resid = np.abs(y - (slope * x + icpt))
        keep = np.argsort(resid)[: len(x) - k]
        slope, icpt = np.polyfit(x[keep], y[keep], 1)
    return float(slope), float(icpt)


def conformal_radius(series: LinearizerSeries, method: str = "hadamard-fit",
                     window_fraction: float = 0.5, trim: float = 0.05) -> RadiusEstimate:
    """Convergence radius of the linearizer from coefficient growth.

    ``hadamard-fit`` fits ``ln|d_n| ~ b + s n`` over the last ``window_fraction``
    of indices (robust least squares) and returns ``sigma * exp(-s)``.
    ``tail-slope`` is the root-test envelope ``max_n (ln|d_n| - b)/n`` over the
    same window, with ``b`` the fitted intercept so exact geometric growth is
    recovered exactly. The uncertainty is the gap between the two.
    A recorded resonance gives radius 0.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    if series.resonance is not None:
        return RadiusEstimate(0.0, method, (2, max(2, series.N)), 0.0, True, 0.0, 0.0)
    if not 0 < window_fraction <= 1:
        raise ValueError("window_fraction must lie in (0, 1]")
    N = series.N
    d = np.abs(series.coeffs[1:])
    n = np.arange(1, N + 1)
    usable = (d > 0) & np.isfinite(d)
    if usable.sum() < MIN_RADIUS_TERMS:
        raise ValueError(f"need at least {MIN_RADIUS_TERMS} usable coefficients, "
                         f"have {int(usable.sum())}")
    start = max(2, int(math.ceil(N * (1 - window_fraction))))
    sel = usable & (n >= start)
    x, y = n[sel].astype(float), np.log(d[sel])
    if len(x) < 2:
        raise ValueError("radius window holds fewer than two coefficients")
    slope, icpt = _robust_line(x, y, trim)
    s_tail = float(np.max((y - icpt) / x))
    r_fit = series.sigma * math.exp(-slope)
    r_tail = series.sigma * math.exp(-s_tail)
    value = r_fit if method == "hadamard-fit" else r_tail
    return RadiusEstimate(value, method, (start, N), abs(r_fit - r_tail), False, r_fit, r_tail)


# --- evaluation ----------------------------------------------------------------------


def evaluate_linearizer(series: LinearizerSeries, z, guard: float | None = 0.95,
                        radius: float | None = None):
    """Truncated ``L(z) = sum_n d_n (z/sigma)**n`` by Horner's rule.

    Warns when ``|z|`` exceeds ``guard`` times the radius estimate; pass
    ``guard=None`` to skip the check.
    """
    z_arr = np.asarray(z, dtype=np.complex128)
    if guard is not None:
        r = radius
        if r is None and (series.resonance is not None or series.N >= MIN_RADIUS_TERMS):
            r = series.radius.value
        if r is not None and np.any(np.abs(z_arr) > guard * r):
            warnings.warn(f"evaluating outside {guard} x radius estimate {r:.6g}",
                          RuntimeWarning, stacklevel=2)
    w = z_arr / series.sigma
    acc = np.zeros_like(w)
    d = series.coeffs
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(series.N, 0, -1):
            acc = (acc + d[k]) * w
    if not np.all(np.isfinite(acc)):
        raise OverflowError("partial sums overflowed; |z/sigma| too large")
    return complex(acc) if np.ndim(z) == 0 else acc


def quadratic_map(series_or_lam, z):
    lam = series_or_lam.lam if isinstance(series_or_lam, LinearizerSeries) else series_or_lam
    return lam * z + z * z


# --- export --------------------------------------------------------------------------


def series_rows(series: LinearizerSeries) -> list[str]:
    lc = series.log_abs_c
    rows = ["n,re_d,im_d,ln_abs_c"]
    for k in range(1, series.N + 1):
        v = series.coeffs[k]
        rows.append(f"{k},{float(v.real)!r},{float(v.imag)!r},{float(lc[k - 1])!r}")
    return rows


def export_series(series: LinearizerSeries, path, config: dict | None = None) -> None:
    """Write ``n, Re(d_n), Im(d_n), ln|c_n|`` rows after a ``#`` header."""
    from .io import write_table

    meta = {"alpha": series.alpha.describe(), "alpha_value": series.alpha.value,
            "sigma": series.sigma, "N": series.N}
    if series.resonance is not None:
        meta["resonance_order"] = series.resonance.order
    write_table(path, "series", config or {}, series_rows(series), meta)
