"""Circle maps with Herman rings: rotation numbers, parameter solving, conjugacies.

Two families of degree-one circle maps are supported:

* ``blaschke``: ``Q(z) = e^{2 pi i lam} z^2 (z + a)/(1 + a z)`` with real
  ``a > 3``, a diffeomorphism of the unit circle;
* ``arnold``: ``Q(z) = e^{2 pi i lam} z exp(a (z - 1/z))`` with
  ``0 < |a| < 1/2``, the complexified standard family.

On the circle both are described by a lift ``F(x) = lam + x + g(x)`` with
``g`` of period one. Iteration runs on ``x mod 1`` and accumulates the
displacement ``lam + g(x)`` separately, so long orbits keep full precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.linalg import solve_toeplitz

from . import kernels
from .arithmetic import continued_fraction

__all__ = [
    "CircleFamily",
    "RotationEstimate",
    "LambdaSolution",
    "ConjugacySamples",
    "NearRationalError",
    "lift_eval",
    "rotation_number",
    "solve_lambda",
    "conjugacy_samples",
    "modulus_estimate",
    "lock_scan",
]

CIRCLE_TOL = 1e-12
NOISE_FLOOR = 1e-13
MIN_FOURIER_TERMS = 128


@dataclass(frozen=True)
class CircleFamily:
    """One member of a circle-map family at parameter ``lam``."""

    variant: str
    a: complex
    lam: float = 0.0

    def __post_init__(self):
        if self.variant == "blaschke":
            a = complex(self.a)
            if a.imag != 0 or not a.real > 3:
                raise ValueError(f"blaschke family needs real a > 3, got {self.a!r}")
            object.__setattr__(self, "a", float(a.real))
        elif self.variant == "arnold":
            a = complex(self.a)
            if not 0 < abs(a) < 0.5:
                raise ValueError(f"arnold family needs 0 < |a| < 1/2, got {self.a!r}")
            object.__setattr__(self, "a", a)
            err = self.circle_deviation()
            if err > CIRCLE_TOL:
                raise ValueError(f"arnold map with a={a!r} does not preserve the unit circle "
                                 f"(deviation {err:.3g})")
        else:
            raise ValueError(f"unknown variant {self.variant!r}")

    def at(self, lam: float) -> "CircleFamily":
        return CircleFamily(self.variant, self.a, float(lam))

    @property
    def code(self) -> int:
        return kernels.BLASCHKE if self.variant == "blaschke" else kernels.ARNOLD

    @property
    def lift_coefficient(self) -> float:
        # arnold: Im(a (z - 1/z))/(2 pi) = Re(a) sin(2 pi x)/pi on |z| = 1
        return self.a if self.variant == "blaschke" else complex(self.a).real

    def q(self, z):
        """The complex map, vectorized over ``z``."""
        z = np.asarray(z, dtype=np.complex128)
        rot = np.exp(2j * np.pi * self.lam)
        if self.variant == "blaschke":
            return rot * z * z * (z + self.a) / (1 + self.a * z)
        return rot * z * np.exp(self.a * (z - 1 / z))

    def g(self, x):
        """Periodic part of the lift, ``F(x) - lam - x``."""
        t = 2 * np.pi * np.asarray(x, dtype=float)
        if self.variant == "blaschke":
            # the continuous branch of (arg(z + a) - arg(1 + a z))/(2 pi) + x for real a > 1
            return np.arctan2(np.sin(t), self.a + np.cos(t)) / np.pi
        return self.lift_coefficient * np.sin(t) / np.pi

    def dlift(self, x):
        t = 2 * np.pi * np.asarray(x, dtype=float)
        if self.variant == "blaschke":
            a = self.a
            return 1 + 2 * (1 + a * np.cos(t)) / (a * a + 2 * a * np.cos(t) + 1)
        return 1 + 2 * self.lift_coefficient * np.cos(t)

    def circle_deviation(self, grid: int = 4096) -> float:
        z = np.exp(2j * np.pi * np.arange(grid) / grid)
        return float(np.max(np.abs(np.abs(self.q(z)) - 1)))


def lift_eval(fam: CircleFamily, x):
    """The lift ``F(x) = lam + x + g(x)`` with ``F(0) = lam``."""
    return fam.lam + np.asarray(x, dtype=float) + fam.g(x) if np.ndim(x) else \
        fam.lam + float(x) + float(fam.g(x))


# --- rotation numbers ---------------------------------------------------------------


@dataclass(frozen=True)
class RotationEstimate:
    value: float
    error: float
    mode: str
    n_iter: int
    convergent: tuple[int, int] | None = None


def _bump_weights(n: int) -> np.ndarray:
    t = (np.arange(n) + 0.5) / n
    w = np.exp(-1.0 / (t * (1.0 - t)))
    return w / w.sum()


def _split_lam(lam: float) -> tuple[int, float]:
    k = math.floor(lam)
    return k, lam - k


def _displacements(fam: CircleFamily, n: int, x0: float) -> tuple[int, np.ndarray]:
    k, frac = _split_lam(fam.lam)
    disp = kernels.circle_displacements(fam.code, float(fam.lift_coefficient), frac, float(x0), n)
    return k, disp


def _weighted_average(disp: np.ndarray) -> float:
    return float(np.dot(_bump_weights(len(disp)), disp))


def rotation_number(fam: CircleFamily, n_iter: int = 2 ** 16, mode: str = "birkhoff",
                    x0: float = 0.0) -> RotationEstimate:
    """Rotation number of the lift with an error estimate.

    ``birkhoff`` averages the displacement ``F(x_k) - x_k`` along the orbit
    with the smooth bump weight ``exp(-1/(t(1-t)))``, which converges much
    faster than the plain average when the map is smoothly conjugate to a
    rotation. The error is the gap between the averages over ``n_iter`` and
    ``n_iter/2`` steps.

    ``convergent-accelerated`` takes the largest continued-fraction
    denominator ``q <= n_iter/2`` of that estimate and brackets the rotation
    number by ``p/q + [min, max] D/q`` with ``D_k = F^q(x_k) - x_k - p``
    sampled along the orbit; the error is half the bracket width.
    """
    if n_iter < 100:
        raise ValueError("n_iter must be >= 100")
    k, disp = _displacements(fam, n_iter, x0)
    full = _weighted_average(disp)
    half = _weighted_average(disp[: n_iter // 2])
    floor = 4 * float(np.finfo(float).eps) * max(1.0, abs(full))
    if mode == "birkhoff":
        return RotationEstimate(k + full, float(abs(full - half)) + floor, mode, n_iter)
    if mode != "convergent-accelerated":
        raise ValueError(f"unknown mode {mode!r}")

    rho_frac = full - math.floor(full)
    p, q = _best_convergent(rho_frac, n_iter // 2)
    p += math.floor(full)
    # partial sums of the centred displacement stay O(1) along the orbit
    centred = np.concatenate([[0.0], np.cumsum(disp - full)])
    D = (centred[q:] - centred[:-q]) + (q * full - p)
    lo, hi = float(D.min()), float(D.max())
    value = p / q + (lo + hi) / (2 * q)
    error = (hi - lo) / (2 * q) + floor
    return RotationEstimate(k + value, error, mode, n_iter, (p + k * q, q))


def _best_convergent(x: float, q_max: int) -> tuple[int, int]:
    if x <= 0 or x >= 1:
        return 0, 1
    cf = continued_fraction(x, max_terms=80)
    p, q = 0, 1
    for pn, qn in cf.convergents:
        if qn > q_max:
            break
        p, q = pn, qn
    return p, q


# --- parameter solving -----------------------------------------------------------------


@dataclass(frozen=True)
class LambdaSolution:
    lam: float
    rho: RotationEstimate
    mode_locked: bool = False
    plateau: tuple[float, float] | None = None


def _as_rational(target: float, max_den: int = 1000) -> Fraction | None:
    f = Fraction(target).limit_denominator(max_den)
    return f if abs(float(f) - target) < 1e-15 else None


def _bisect(pred, lo: float, hi: float, iters: int = 80) -> tuple[float, float]:
    """Shrink ``[lo, hi]`` with ``pred(lo)`` false and ``pred(hi)`` true."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return lo, hi


def solve_lambda(template: CircleFamily, rho_target: float, tol: float = 1e-8,
                 n_iter: int = 2 ** 15, plateau_width: float = 1e-12) -> LambdaSolution:
    """Parameter ``lam`` with rotation number ``rho_target``.

    Bisection on the nondecreasing map ``lam -> rho(lam)``. Rational targets
    (denominator up to 1000) are checked for mode locking: the edges of the
    set where ``|rho - target| <= tol/10`` are bisected separately and, if
    they are more than ``plateau_width`` apart, the plateau midpoint is
    returned with ``mode_locked`` set.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    rho = lambda lam: rotation_number(template.at(lam), n_iter).value  # noqa: E731
    # |F(x) - lam - x| < 1/2 for both families
    lo, hi = rho_target - 1.0, rho_target + 1.0
    frac = _as_rational(rho_target)
    if frac is not None:
        eta = tol / 10
        left = _bisect(lambda lam: rho(lam) >= rho_target - eta, lo, hi)[1]
        right = _bisect(lambda lam: rho(lam) > rho_target + eta, lo, hi)[0]
        if right - left > plateau_width:
            mid = 0.5 * (left + right)
            return LambdaSolution(mid, rotation_number(template.at(mid), n_iter), True,
                                  (left, right))
    lo, hi = _bisect(lambda lam: rho(lam) >= rho_target, lo, hi, iters=200)
    lam = 0.5 * (lo + hi)
    est = rotation_number(template.at(lam), n_iter)
    return LambdaSolution(lam, est)


def lock_scan(template: CircleFamily, lam_min: float, lam_max: float, grid: int,
              n_iter: int = 2 ** 14) -> list[tuple[float, RotationEstimate]]:
    lams = np.linspace(lam_min, lam_max, grid)
    return [(float(l), rotation_number(template.at(float(l)), n_iter)) for l in lams]


# --- conjugacy ---------------------------------------------------------------------------


class NearRationalError(ValueError):
    pass


@dataclass
class ConjugacySamples:
    """Orbit samples ``w_k = Q^k(1)`` of the circle conjugacy and its Fourier fit.

    ``T(exp(2 pi i k rho)) = w_k``; ``fourier[i]`` is the coefficient of
    ``z**freqs[i]``.
    """

    rho: RotationEstimate
    k: np.ndarray
    w: np.ndarray
    freqs: np.ndarray
    fourier: np.ndarray
    modulus: float | None = None
    fit_residual: float = float("nan")
    lam: float = float("nan")
    family: CircleFamily | None = field(default=None, repr=False)

    def nodes(self, k=None) -> np.ndarray:
        k = self.k if k is None else np.asarray(k)
        theta = np.mod(k * self.rho.value, 1.0)
        return np.exp(2j * np.pi * theta)

    def evaluate(self, z) -> np.ndarray:
        """The truncated Laurent series ``sum_j T_j z**j``."""
        z = np.asarray(z, dtype=np.complex128)
        return np.exp(np.log(z)[..., None] * self.freqs) @ self.fourier

    def reconstruction_error(self, stride: int = 1) -> float:
        idx = np.arange(0, len(self.k), stride)
        approx = self.evaluate(self.nodes(self.k[idx]))
        return float(np.max(np.abs(approx - self.w[idx])))

    def rows(self) -> tuple[list[str], list[str]]:
        orbit = ["k,re_w,im_w"] + [f"{int(k)},{float(v.real)!r},{float(v.imag)!r}"
                                   for k, v in zip(self.k, self.w)]
        with np.errstate(divide="ignore"):
            logs = np.log(np.abs(self.fourier))
        four = ["j,re_T,im_T,ln_abs_T"] + [
            f"{int(j)},{float(c.real)!r},{float(c.imag)!r},{float(lc)!r}"
            for j, c, lc in zip(self.freqs, self.fourier, logs)]
        return orbit, four


def _orbit(fam: CircleFamily, n: int) -> np.ndarray:
    if fam.variant == "blaschke":
        return kernels.blaschke_orbit(float(fam.a), float(fam.lam), 1.0 + 0j, n)
    return kernels.arnold_orbit(complex(fam.a), float(fam.lam), 1.0 + 0j, n)


def _fourier_fit(theta: np.ndarray, w: np.ndarray, J: int, chunk: int = 256) -> np.ndarray:
    """Least-squares Laurent coefficients ``j = -J..J`` from samples ``w`` at ``exp(2 pi i theta)``.

    The normal matrix ``sum_k exp(2 pi i (j' - j) theta_k)`` is Hermitian
    Toeplitz, so it is solved by Levinson recursion.
    """
    m_all = np.arange(0, 2 * J + 1)
    col = np.empty(2 * J + 1, dtype=np.complex128)
    for s in range(0, 2 * J + 1, chunk):
        m = m_all[s:s + chunk]
        col[s:s + len(m)] = np.exp(2j * np.pi * np.mod(np.outer(m, theta), 1.0)).sum(axis=1)
    js = np.arange(-J, J + 1)
    rhs = np.empty(2 * J + 1, dtype=np.complex128)
    for s in range(0, 2 * J + 1, chunk):
        j = js[s:s + chunk]
        rhs[s:s + len(j)] = np.exp(-2j * np.pi * np.mod(np.outer(j, theta), 1.0)) @ w
    # row j, column j': sum_k exp(2 pi i (j' - j) theta_k)
    return solve_toeplitz((col.conj(), col), rhs)


def conjugacy_samples(fam: CircleFamily, n: int, n_rho: int = 2 ** 17,
                      max_freq: int | None = None, fit_modulus: bool = True) -> ConjugacySamples:
    """Orbit of 1 under ``Q`` as samples of the conjugacy, with a Fourier fit.

    ``w_k = Q^k(1)`` equals ``T(exp(2 pi i k rho))`` by iterating the
    conjugacy equation from ``T(1) = 1``. Coefficients for ``|j| <= n/4``
    are fitted by least squares on the orbit nodes.
    """
    if n < 16:
        raise ValueError("n must be >= 16")
    rho = rotation_number(fam, max(n_rho, 4 * n))
    if rho.error >= 1 / (4 * n):
        raise NearRationalError(f"rotation number error {rho.error:.3g} is not below 1/(4n)")
    k = np.arange(n)
    theta = np.mod(k * rho.value, 1.0)
    gaps = np.diff(np.concatenate([np.sort(theta), [1.0]]))
    if gaps.max() > 10.0 / n:
        raise NearRationalError(f"orbit nodes too uneven (max gap {gaps.max():.3g} > 10/n); "
                                "rotation number looks rational")
    w = _orbit(fam, n)
    J = max_freq if max_freq is not None else n // 4
    coeffs = _fourier_fit(theta, w, J)
    samples = ConjugacySamples(rho, k, w, np.arange(-J, J + 1), coeffs, lam=fam.lam, family=fam)
    samples.fit_residual = samples.reconstruction_error()
    if fit_modulus:
        try:
            samples.modulus = modulus_estimate(samples)
        except ValueError:
            samples.modulus = None
    return samples


def modulus_estimate(samples: ConjugacySamples, window: tuple[int, int] | None = None,
                     noise_floor: float = NOISE_FLOOR, trim: float = 0.05) -> float:
    """Decay rate ``r`` of ``|T_j| ~ exp(-r |j|)``, the half-modulus of the annulus.

    A function analytic on ``exp(-r) < |z| < exp(r)`` has Laurent
    coefficients decaying like ``exp(-r |j|)``. The rate is the negated slope
    of a robust line fit of ``ln|T_j|`` against ``|j|`` over coefficients
    above ``noise_floor`` with ``|j|`` in ``window``. The default window runs
    from 2 up to where both ``T_j`` and ``T_{-j}`` first stay below the floor
    for three consecutive ``|j|``, so isolated noise coefficients further out
    do not flatten the fit.
    """
    mags = np.abs(samples.fourier)
    absj = np.abs(samples.freqs)
    usable = mags > noise_floor
    if usable.sum() < MIN_FOURIER_TERMS:
        raise ValueError(f"need at least {MIN_FOURIER_TERMS} coefficients above "
                         f"{noise_floor:g}, have {int(usable.sum())}")
    lo, hi = window if window is not None else (2, _decay_edge(samples, noise_floor))
    sel = usable & (absj >= lo) & (absj <= hi)
    if sel.sum() < 2:
        raise ValueError("modulus window holds fewer than two coefficients")
    x, y = absj[sel].astype(float), np.log(mags[sel])
    slope, icpt = np.polyfit(x, y, 1)
    k = int(len(x) * trim)
    if k > 0 and len(x) - k >= 2:
        keep = np.argsort(np.abs(y - (slope * x + icpt)))[: len(x) - k]
        slope, icpt = np.polyfit(x[keep], y[keep], 1)
    return float(max(0.0, -slope))


def _decay_edge(samples: ConjugacySamples, noise_floor: float, run: int = 3) -> int:
    mags = np.abs(samples.fourier)
    J = int(np.abs(samples.freqs).max())
    env = np.zeros(J + 1)
    np.maximum.at(env, np.abs(samples.freqs), mags)
    below = 0
    for j in range(2, J + 1):
        below = below + 1 if env[j] <= noise_floor else 0
        if below == run:
            return j - run
    return J
