"""Parameter searches driven by the radius function ``alpha -> r_alpha``.

The radius function is only upper semicontinuous, so the searches here never
assume continuity. :func:`ivt_search` locates ``inf {y : h(y) >= x}`` by
sampling and refining, and :func:`target_radius_search` runs the staged
construction: each stage shrinks the parameter window by more than ten,
checks an upper-semicontinuity margin on samples, then moves the parameter
to a point whose radius is the midpoint between the current radius and the
target while keeping the linearizer close in the sup metric on a disk.
"""

from __future__ import annotations

import math
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .arithmetic import RotationNumber
from .linearizer import (LinearizerSeries, RadiusEstimate, conformal_radius,
                         evaluate_linearizer, linearizer_coeffs)

__all__ = [
    "RadiusOracle",
    "IVTSearchError",
    "SearchError",
    "SearchConfig",
    "Stage",
    "SearchTrace",
    "ProbeRow",
    "linearizer_distance",
    "ivt_search",
    "target_radius_search",
    "semicontinuity_probe",
    "simplest_rational",
]


class RadiusOracle:
    """Memoized ``alpha -> RadiusEstimate`` at a fixed configuration.

    Float parameters are snapped to a ``2**-grid_bits`` grid before
    evaluation, so nearby queries share a cache entry and repeated queries
    return identical results. :class:`fractions.Fraction` parameters are kept
    exact and hit their resonance arithmetically. The cache is safe to share
    between threads.
    """

    def __init__(self, N: int = 4096, sigma: float = 0.25, method: str = "hadamard-fit",
                 window_fraction: float = 0.5, grid_bits: int = 48, series_cache: int = 32):
        self.N = N
        self.sigma = sigma
        self.method = method
        self.window_fraction = window_fraction
        self.grid_bits = grid_bits
        self._estimates: dict = {}
        self._series: OrderedDict = OrderedDict()
        self._series_cache = series_cache
        self._lock = threading.Lock()
        self.evaluations = 0

    def config(self) -> dict:
        return {"N": self.N, "sigma": self.sigma, "method": self.method,
                "window_fraction": self.window_fraction, "grid_bits": self.grid_bits}

    def _key(self, alpha, N):
        if isinstance(alpha, Fraction) or (isinstance(alpha, RotationNumber)
                                           and alpha.fraction is not None):
            f = alpha if isinstance(alpha, Fraction) else alpha.fraction
            return (N, "q", f.numerator, f.denominator), RotationNumber.from_fraction(f)
        k = round(float(alpha) * 2.0 ** self.grid_bits)
        value = k / 2.0 ** self.grid_bits
        return (N, "f", k), RotationNumber.from_float(value)

    def quantize(self, alpha) -> float:
        return self._key(alpha, self.N)[1].value

    def series(self, alpha, N: int | None = None) -> LinearizerSeries:
        N = N or self.N
        key, rot = self._key(alpha, N)
        with self._lock:
            if key in self._series:
                self._series.move_to_end(key)
                return self._series[key]
        s = linearizer_coeffs(rot, N, self.sigma)
        with self._lock:
            s = self._series.setdefault(key, s)
            while len(self._series) > self._series_cache:
                self._series.popitem(last=False)
        return s

    def __call__(self, alpha, N: int | None = None) -> RadiusEstimate:
        N = N or self.N
        key, _ = self._key(alpha, N)
        with self._lock:
            hit = self._estimates.get(key)
        if hit is not None:
            return hit
        est = conformal_radius(self.series(alpha, N), self.method, self.window_fraction)
        with self._lock:
            self.evaluations += 1
            return self._estimates.setdefault(key, est)

    def value(self, alpha, N: int | None = None) -> float:
        return self(alpha, N).value


# --- distance ------------------------------------------------------------------


def linearizer_distance(s1: LinearizerSeries, s2: LinearizerSeries, r: float,
                        grid_size: int = 64, guard: float = 0.95) -> float:
    """Max of ``|L1(z) - L2(z)|`` over ``grid_size`` points on each circle ``|z| = r k/8``.

    A computable stand-in for the sup distance on the closed disk of radius
    ``r``; ``r`` must stay below ``guard`` times both radius estimates.
    """
    if grid_size < 8:
        raise ValueError("grid_size must be >= 8")
    if not r > 0:
        raise ValueError("r must be positive")
    limit = guard * min(s1.radius.value, s2.radius.value)
    if r >= limit:
        raise ValueError(f"r={r:.6g} is not below {guard} x min radius ({limit:.6g})")
    theta = 2 * np.pi * np.arange(grid_size) / grid_size
    z = np.concatenate([(r * k / 8) * np.exp(1j * theta) for k in range(1, 9)])
    if s1 is s2:
        return 0.0
    diff = evaluate_linearizer(s1, z, guard=None) - evaluate_linearizer(s2, z, guard=None)
    return float(np.max(np.abs(diff)))


# --- intermediate values --------------------------------------------------------


class IVTSearchError(RuntimeError):
    def __init__(self, message: str, bracket: tuple[float, float], best: tuple[float, float]):
        super().__init__(f"{message}; bracket [{bracket[0]!r}, {bracket[1]!r}], "
                         f"best h({best[0]!r}) = {best[1]!r}")
        self.bracket = bracket
        self.best = best


def ivt_search(h: Callable, a, b, x: float, tol: float, max_iter: int = 200,
               samples: int = 4) -> float:
    """Find ``c`` in ``[a, b]`` with ``|h(c) - x| <= tol``.

    Follows ``c = inf {y : h(y) >= x}`` (with ``h(a) < x < h(b)``; the other
    orientation is mirrored). Each round samples ``samples`` interior points
    of the current bracket from left to right and keeps the leftmost one with
    ``h >= x`` as the new right end and its left neighbour as the new left
    end, so the bracket always hugs the leftmost known crossing. Only upper
    semicontinuity is needed for the limit to be a crossing; a jump over
    ``x`` is reported as :class:`IVTSearchError` carrying the final bracket.

    ``a`` and ``b`` are passed to ``h`` unchanged (they may be exact
    fractions); interior points are floats. ``max_iter`` bounds the number
    of evaluations of ``h``.
    """
    fa, fb = float(a), float(b)
    if not fa < fb:
        raise ValueError("need a < b")
    ha, hb = float(h(a)), float(h(b))
    best = min(((fa, ha), (fb, hb)), key=lambda t: abs(t[1] - x))
    if abs(best[1] - x) <= tol:
        return best[0]
    if not (ha - x) * (hb - x) < 0:
        raise ValueError(f"h(a)={ha!r} and h(b)={hb!r} do not straddle x={x!r}")
    sign = 1.0 if ha < x else -1.0  # sign < 0: mirror so the low end sits on the left
    lo, hi = (fa, fb) if sign > 0 else (-fb, -fa)
    evals = 2
    while evals < max_iter:
        width = hi - lo
        if width <= 4 * math.ulp(max(abs(lo), abs(hi), 1e-300)):
            break
        moved = False
        base = lo
        for t in range(1, samples + 1):
            y = base + width * t / (samples + 1)
            if not lo < y < hi:
                continue
            v = float(h(sign * y))
            evals += 1
            if abs(v - x) < abs(best[1] - x):
                best = (sign * y, v)
            if abs(v - x) <= tol:
                return sign * y
            if v >= x:
                hi = y
                moved = True
                break
            lo = y
            moved = True
            if evals >= max_iter:
                break
        if not moved:
            break
    bracket = tuple(sorted((sign * lo, sign * hi)))
    raise IVTSearchError("no point within tolerance", bracket, best)


def simplest_rational(lo: Fraction, hi: Fraction) -> Fraction:
    """The rational with the smallest denominator in the open interval ``(lo, hi)``."""
    lo, hi = Fraction(lo), Fraction(hi)
    if not lo < hi:
        raise ValueError("need lo < hi")
    n = math.floor(lo)
    if n + 1 < hi:
        return Fraction(n + 1)
    # (lo, hi) sits inside [n, n+1]
    if lo == n:
        return n + Fraction(1, math.floor(1 / (hi - n)) + 1)
    return n + 1 / simplest_rational(1 / (hi - n), 1 / (lo - n))


# --- staged search -------------------------------------------------------------------


class SearchError(RuntimeError):
    def __init__(self, message: str, trace: "SearchTrace"):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class SearchConfig:
    max_stages: int = 30
    eps_factor: float = 0.99          # eps_{i+1} starts at eps_factor * eps_i / 10
    usc_samples: int = 16
    usc_shrinks: int = 8
    slack_fraction: float = 0.05      # usc slack as a fraction of r_target
    ivt_tol_fraction: float = 0.25    # ivt tolerance as a fraction of tol
    ivt_max_iter: int = 150
    ivt_samples: int = 4
    dist_fraction: float = 0.5        # distances measured on |z| <= dist_fraction * r_target
    dist_grid: int = 64
    n_growth: float = 2.0
    n_max: int = 16384
    q_max_fraction: float = 0.125     # bracket rationals need q <= q_max_fraction * N
    bracket_samples: int = 16
    window_shrinks: int = 4
    seed: int = 0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class Stage:
    index: int
    beta: float
    eps: float
    radius: RadiusEstimate
    dist: float
    requested: float
    N: int
    usc_max: float
    anchor: str  # the low-radius endpoint used for the bracket


@dataclass
class SearchTrace:
    alpha0: float
    r_target: float
    delta: float
    tol: float
    r0: RadiusEstimate
    N0: int
    ivt_tol: float
    stages: list[Stage] = field(default_factory=list)
    converged: bool = False

    @property
    def final_alpha(self) -> float:
        return self.stages[-1].beta if self.stages else self.alpha0

    @property
    def final_radius(self) -> float:
        return self.stages[-1].radius.value if self.stages else self.r0.value

    @property
    def final_N(self) -> int:
        return self.stages[-1].N if self.stages else self.N0

    def invariant_violations(self) -> list[str]:
        """Structural checks that need only the recorded trace."""
        out = []
        beta, eps, r = self.alpha0, self.delta, self.r0.value
        for st in self.stages:
            if not st.eps < eps / 10:
                out.append(f"stage {st.index}: eps {st.eps!r} not < {eps / 10!r}")
            if not abs(st.beta - beta) < st.eps / 10:
                out.append(f"stage {st.index}: step {abs(st.beta - beta)!r} not < {st.eps / 10!r}")
            if st.requested != (self.r_target + r) / 2:
                out.append(f"stage {st.index}: requested radius is not the midpoint")
            if abs(st.radius.value - st.requested) > self.ivt_tol:
                out.append(f"stage {st.index}: radius misses request by more than {self.ivt_tol!r}")
            beta, eps, r = st.beta, st.eps, st.radius.value
        if self.converged and abs(self.final_radius - self.r_target) > self.tol:
            out.append("converged flag set but final radius is outside tol")
        return out

    def rows(self) -> list[str]:
        lines = ["i,beta,eps,r,dist"]
        lines.append(f"0,{self.alpha0!r},{self.delta!r},{self.r0.value!r},0.0")
        for st in self.stages:
            lines.append(f"{st.index},{st.beta!r},{st.eps!r},{st.radius.value!r},{st.dist!r}")
        return lines

    def summary(self) -> dict:
        return {"converged": self.converged, "stages": len(self.stages),
                "final_alpha": self.final_alpha, "final_radius": self.final_radius,
                "r_target": self.r_target, "alpha_shift": abs(self.final_alpha - self.alpha0)}


def _anchor_candidates(beta: float, w: float, x: float, h, N: int, cfg: SearchConfig,
                       rng: np.random.Generator):
    """Points within ``w`` of ``beta`` where the radius is below ``x``.

    Smallest-denominator rationals on each side come first (their radius is
    zero), then random samples in the window.
    """
    fb = Fraction(beta)
    rats = []
    for lo, hi in ((fb - Fraction(w), fb), (fb, fb + Fraction(w))):
        q = simplest_rational(lo, hi)
        if q.denominator <= cfg.q_max_fraction * N:
            rats.append(q)
    rats.sort(key=lambda f: f.denominator)
    for f in rats:
        yield f, f"{f.numerator}/{f.denominator}"
    u = rng.uniform(-1.0, 1.0, cfg.bracket_samples)
    pts = sorted(beta + w * u, key=lambda y: abs(y - beta))
    for y in pts:
        if y != beta and h(y) < x:
            yield float(y), "sample"


def target_radius_search(alpha0, r_target: float, delta: float, tol: float,
                         oracle: RadiusOracle, cfg: SearchConfig = SearchConfig()) -> SearchTrace:
    """Move ``alpha0`` by less than ``delta`` to a parameter of radius ``r_target``.

    Stage ``i`` picks ``eps_{i+1} < eps_i/10`` whose sampled radii around
    ``beta_i`` stay below ``r_i + 2**-i + slack``, then finds ``beta_{i+1}``
    within ``eps_{i+1}/10`` of ``beta_i`` whose radius is within the search
    tolerance of ``(r_target + r_i)/2`` and whose linearizer lies within
    ``eps_{i+1}/10`` of the previous one. Stops when the radius is within
    ``tol`` of the target.

    Raises ``ValueError`` on bad inputs and :class:`SearchError` (carrying
    the partial trace) when a stage cannot be completed.
    """
    if not r_target > 0:
        raise ValueError("r_target must be positive")
    if not delta > 0 or not tol > 0:
        raise ValueError("delta and tol must be positive")
    N = oracle.N
    r0 = oracle(alpha0, N)
    if r_target > r0.value:
        raise ValueError(f"r_target={r_target!r} exceeds the starting radius {r0.value!r}")
    ivt_tol = cfg.ivt_tol_fraction * tol
    trace = SearchTrace(float(alpha0), r_target, delta, tol, r0, N, ivt_tol)
    if abs(r0.value - r_target) <= tol:
        trace.converged = True
        return trace

    beta, eps, r_i = float(alpha0), float(delta), r0.value
    slack = cfg.slack_fraction * r_target
    d_radius = cfg.dist_fraction * r_target
    for i in range(cfg.max_stages):
        N_next = min(int(round(oracle.N * cfg.n_growth ** (i + 1))), max(cfg.n_max, oracle.N))
        h = lambda y, _N=N_next: oracle.value(y, _N)  # noqa: E731

        # eps_{i+1}: shrink until the sampled radii respect the usc margin
        margin = r_i + 2.0 ** -i + slack
        eps_next = eps / 10 * cfg.eps_factor
        usc_max = None
        for k in range(cfg.usc_shrinks + 1):
            rng = np.random.default_rng([cfg.seed, i, k])
            pts = beta + eps_next * rng.uniform(-1.0, 1.0, cfg.usc_samples)
            usc_max = max(h(p) for p in pts)
            if usc_max < margin:
                break
            eps_next /= 2
        else:
            raise SearchError(f"stage {i + 1}: usc margin {margin:.6g} not certified "
                              f"(sampled max {usc_max:.6g})", trace)

        requested = (r_target + r_i) / 2
        prev = oracle.series(beta, N_next)
        w = eps_next / 10 * cfg.eps_factor
        found = None
        for k in range(cfg.window_shrinks):
            rng = np.random.default_rng([cfg.seed, i, 1000 + k])
            for anchor, label in _anchor_candidates(beta, w, requested - ivt_tol, h, N_next,
                                                    cfg, rng):
                a, b = (anchor, beta) if anchor < beta else (beta, anchor)
                try:
                    c = ivt_search(h, a, b, requested, ivt_tol, cfg.ivt_max_iter, cfg.ivt_samples)
                except (IVTSearchError, ValueError):
                    continue
                if not abs(c - beta) < eps_next / 10:
                    continue
                s_c = oracle.series(c, N_next)
                try:
                    dist = linearizer_distance(s_c, prev, d_radius, cfg.dist_grid)
                except ValueError:
                    continue
                if dist < eps_next / 10:
                    found = (c, dist, label)
                    break
            if found:
                break
            w /= 10
        if found is None:
            raise SearchError(f"stage {i + 1}: no parameter within {eps_next / 10:.3g} reaches "
                              f"radius {requested:.6g}", trace)
        c, dist, label = found
        est = oracle(c, N_next)
        trace.stages.append(Stage(i + 1, c, eps_next, est, dist, requested, N_next, usc_max, label))
        beta, eps, r_i = c, eps_next, est.value
        if abs(r_i - r_target) <= tol:
            trace.converged = True
            break
    return trace


# --- semicontinuity probe -------------------------------------------------------------


@dataclass(frozen=True)
class ProbeRow:
    scale: float
    value: float        # oracle at alpha
    max_left: float
    max_right: float

    @property
    def max_all(self) -> float:
        return max(self.max_left, self.max_right)

    @property
    def usc_margin(self) -> float:
        """Sampled ``max - h(alpha)``; upper semicontinuity wants this to vanish as the scale shrinks."""
        return self.max_all - self.value

    @property
    def lsc_gap(self) -> float:
        """``min(max_left, max_right) - h(alpha)``; weak lower semicontinuity wants it ``>= 0``."""
        return min(self.max_left, self.max_right) - self.value


def semicontinuity_probe(alpha, scales, samples_per_scale: int, oracle: RadiusOracle,
                         seed: int = 0, N: int | None = None) -> list[ProbeRow]:
    """One-sided sampled maxima of the radius around ``alpha`` at each scale."""
    scales = [float(s) for s in scales]
    if any(s <= 0 for s in scales) or any(b >= a for a, b in zip(scales, scales[1:])):
        raise ValueError("scales must be positive and strictly decreasing")
    if not scales:
        return []
    center = oracle.value(alpha, N)
    a = float(alpha)
    half = max(1, samples_per_scale // 2)
    rows = []
    for j, eps in enumerate(scales):
        rng = np.random.default_rng([seed, j])
        u = rng.uniform(0.0, 1.0, (2, half))
        u = 1.0 - u  # (0, 1]
        left = max(oracle.value(a - eps * t, N) for t in u[0])
        right = max(oracle.value(a + eps * t, N) for t in u[1])
        rows.append(ProbeRow(eps, center, left, right))
    return rows
