"""Continued fractions and Brjuno sums for rotation numbers.

Convergents are kept as exact Python integers. Quadratic irrationals
``(p + q*sqrt(d)) / r`` are expanded with the exact integer recurrence for
``(P + sqrt(D)) / Q``, so arbitrarily many quotients are available without
floating drift. Float inputs are expanded from their exact binary value and
stop when the expansion stops carrying information.

Indexing: ``convergents[0] == (0, 1)`` is the zeroth convergent of a number in
(0, 1); ``convergents[k]`` is ``[0; a_1, ..., a_k]``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

__all__ = [
    "RotationNumber",
    "ContinuedFractionExpansion",
    "BrjunoValue",
    "RationalDetected",
    "ClassifyConfig",
    "continued_fraction",
    "brjuno_sum",
    "brjuno_function",
    "classify",
    "parse_alpha",
    "GOLDEN",
    "SILVER",
]

RESIDUAL_FLOOR = 2.0 ** -40
# float expansions stop once |x - p_n/q_n| is below this: later quotients are noise
FLOAT_PRECISION = 2.0 ** -50


class RationalDetected(ValueError):
    """Raised when an operation that needs an irrational meets a rational."""

    def __init__(self, p: int, q: int, message: str | None = None):
        self.p, self.q = p, q
        super().__init__(message or f"rational rotation number detected: {p}/{q}")


@dataclass(frozen=True)
class RotationNumber:
    """A rotation number in (0, 1) together with how it was specified.

    ``source`` is one of ``"float"``, ``"quadratic"``, ``"quotients"`` or
    ``"rational"``. Use the ``from_*`` constructors rather than building this
    directly.
    """

    value: float
    source: str = "float"
    quadratic: tuple[int, int, int, int] | None = None  # (p, q, d, r)
    quotients: tuple[int, ...] | None = None
    fraction: Fraction | None = None

    def __post_init__(self):
        if not (0.0 < self.value < 1.0) and self.source != "rational":
            raise ValueError(f"rotation number must lie in (0, 1), got {self.value!r}")
        if self.source == "rational" and not (0 < self.fraction < 1):
            raise ValueError(f"rotation number must lie in (0, 1), got {self.fraction}")

    @classmethod
    def from_float(cls, x: float) -> "RotationNumber":
        return cls(float(x), "float")

    @classmethod
    def from_fraction(cls, x) -> "RotationNumber":
        f = Fraction(x)
        return cls(float(f), "rational", fraction=f)

    @classmethod
    def from_quadratic(cls, p: int, q: int, d: int, r: int) -> "RotationNumber":
        """``(p + q*sqrt(d)) / r`` with integers, ``d > 0`` not a perfect square."""
        if r == 0 or d <= 0:
            raise ValueError("need r != 0 and d > 0")
        s = math.isqrt(d)
        if s * s == d or q == 0:
            return cls.from_fraction(Fraction(p + q * s, r))
        value = (p + q * math.sqrt(d)) / r
        return cls(value, "quadratic", quadratic=(p, q, d, r))

    @classmethod
    def from_quotients(cls, quotients: Sequence[int]) -> "RotationNumber":
        """The number ``[0; a_1, a_2, ...]`` with the given partial quotients.

        The list is treated as the prefix of an irrational expansion.
        """
        qs = tuple(int(a) for a in quotients)
        if not qs:
            raise ValueError("empty quotient list")
        if any(a < 1 for a in qs):
            raise ValueError("partial quotients must be >= 1")
        p, q = _convergent(qs)
        return cls(p / q, "quotients", quotients=qs)

    def __float__(self):
        return self.value

    def describe(self) -> str:
        if self.source == "quadratic":
            p, q, d, r = self.quadratic
            return f"({p}{q:+d}*sqrt({d}))/{r}"
        if self.source == "quotients":
            return "[0; " + ", ".join(map(str, self.quotients)) + "]"
        if self.source == "rational":
            return str(self.fraction)
        return repr(self.value)


GOLDEN = RotationNumber.from_quadratic(-1, 1, 5, 2)
SILVER = RotationNumber.from_quadratic(-1, 1, 2, 1)


def _convergent(quotients: Sequence[int]) -> tuple[int, int]:
    p0, q0, p1, q1 = 1, 0, 0, 1
    for a in quotients:
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
    return p1, q1


@dataclass(frozen=True)
class ContinuedFractionExpansion:
    quotients: tuple[int, ...]
    convergents: tuple[tuple[int, int], ...]
    terminated: bool

    @property
    def denominators(self) -> list[int]:
        return [q for _, q in self.convergents]

    def determinant(self, k: int) -> int:
        """``p_k q_{k-1} - p_{k-1} q_k``, equal to ``(-1)**(k-1)``."""
        (p1, q1), (p0, q0) = self.convergents[k], self.convergents[k - 1]
        return p1 * q0 - p0 * q1

    def rational(self) -> Fraction:
        p, q = self.convergents[-1]
        return Fraction(p, q)


@dataclass(frozen=True)
class BrjunoValue:
    partial_sum: float
    terms_used: int
    divergence_flag: bool
    terms: tuple[float, ...] = field(default=(), repr=False)


# --- expansions -------------------------------------------------------------


def _quadratic_state(p: int, q: int, d: int, r: int) -> tuple[int, int, int]:
    """Rewrite ``(p + q sqrt d)/r`` as ``(P + sqrt D)/Q`` with ``Q | D - P^2``."""
    if q < 0:
        p, q, r = -p, -q, -r
    P, D, Q = p, q * q * d, r
    if (D - P * P) % Q:
        P, D, Q = P * abs(Q), D * Q * Q, Q * abs(Q)
    return P, D, Q


def _quadratic_floor(P: int, D: int, Q: int) -> int:
    s = math.isqrt(D)
    return (P + s) // Q if Q > 0 else (P + s + 1) // Q


def _quadratic_value(P: int, D: int, Q: int) -> float:
    s = math.sqrt(D)
    if P >= 0:
        return (P + s) / Q
    # avoid cancellation between P and sqrt(D)
    return (D - P * P) / (Q * (s - P))


def _gauss_quadratic(x: RotationNumber) -> Iterator[tuple[int, float]]:
    """Yield ``(a_n, x_n)`` with ``x_n = [0; a_{n+1}, ...]`` exactly, n = 1, 2, ..."""
    P, D, Q = _quadratic_state(*x.quadratic)
    a0 = _quadratic_floor(P, D, Q)
    P = P - a0 * Q  # fractional part (P + sqrt D)/Q in (0, 1)
    while True:
        # invert: Q/(P + sqrt D) = (-P + sqrt D) / ((D - P^2)/Q)
        P, Q = -P, (D - P * P) // Q
        a = _quadratic_floor(P, D, Q)
        P = P - a * Q
        yield a, _quadratic_value(P, D, Q)


def _gauss_exact(f: Fraction, rational_cutoff: int | None,
                 residual_floor: float | None) -> Iterator[tuple[int, Fraction]]:
    """Gauss map on an exact rational; stops when it hits zero or a cutoff."""
    y = f
    while y:
        inv = 1 / y
        a = inv.numerator // inv.denominator
        if rational_cutoff is not None and a > rational_cutoff:
            return
        y = inv - a
        yield a, y
        if residual_floor is not None and 0 < y < residual_floor:
            return


def continued_fraction(x: RotationNumber | float, max_terms: int = 64,
                       rational_cutoff: int = 10 ** 6) -> ContinuedFractionExpansion:
    """Partial quotients and convergents of ``x``.

    Quadratic irrationals and quotient lists are expanded exactly. For float
    inputs the exact binary value is expanded; the expansion is declared
    rational (``terminated``) when a remainder falls below ``2**-40`` or a
    quotient exceeds ``rational_cutoff``, and otherwise stops without
    termination once the float's precision is used up.
    """
    if not isinstance(x, RotationNumber):
        x = RotationNumber.from_float(x)
    if max_terms < 1:
        raise ValueError("max_terms must be >= 1")

    quotients: list[int] = []
    terminated = False
    if x.source == "quadratic":
        for a, _ in _gauss_quadratic(x):
            quotients.append(a)
            if len(quotients) >= max_terms:
                break
    elif x.source == "quotients":
        quotients = list(x.quotients[:max_terms])
    elif x.source == "rational":
        for a, y in _gauss_exact(x.fraction, None, None):
            quotients.append(a)
            if y == 0:
                terminated = True
            if len(quotients) >= max_terms:
                break
        terminated = terminated or _convergent(quotients) == (x.fraction.numerator,
                                                              x.fraction.denominator)
    else:
        f = Fraction(x.value)
        y = f
        p0, q0, p1, q1 = 1, 0, 0, 1
        while len(quotients) < max_terms:
            inv = 1 / y
            a = inv.numerator // inv.denominator
            if a > rational_cutoff:
                terminated = True
                break
            y = inv - a
            quotients.append(a)
            p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
            if y < RESIDUAL_FLOOR:
                terminated = True
                break
            if abs(f - Fraction(p1, q1)) < FLOAT_PRECISION * f:
                break
        if terminated and len(quotients) > 1 and quotients[-1] == 1:
            quotients[-2] += 1
            quotients.pop()

    convergents = [(0, 1)]
    p0, q0, p1, q1 = 1, 0, 0, 1
    for a in quotients:
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        convergents.append((p1, q1))
    return ContinuedFractionExpansion(tuple(quotients), tuple(convergents), terminated)


# --- Brjuno sums --------------------------------------------------------------


def brjuno_sum(cf: ContinuedFractionExpansion, N: int, blowup: float = 100.0) -> BrjunoValue:
    """``sum_{k=0}^{N-1} ln(q_{k+1}) / q_k`` over the expansion's denominators.

    With ``q_0 = 1`` the first term is ``ln(q_1) = ln(a_1)``. If fewer than
    ``N + 1`` denominators exist the sum runs over what is available, which is
    only allowed for terminated (rational) expansions.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    qs = cf.denominators
    available = len(qs) - 1
    if available < N and not cf.terminated:
        raise ValueError(f"expansion has {available + 1} convergents, need {N + 1}")
    terms = []
    total = 0.0
    for k in range(min(N, available)):
        t = _log_int(qs[k + 1]) / qs[k]
        terms.append(t)
        total += t
    flag = cf.terminated or any(t > blowup for t in terms)
    return BrjunoValue(total, len(terms), flag, tuple(terms))


def _log_int(n: int) -> float:
    # math.log accepts big ints without float overflow
    return math.log(n)


def brjuno_function(x: RotationNumber | float, depth: int = 30,
                    rational_cutoff: int = 10 ** 6) -> float:
    """Depth-truncated ``Phi(x) = -ln x + x Phi({1/x})``.

    Computed as ``sum_{n<depth} beta_{n-1} (-ln x_n)`` along the Gauss orbit
    ``x_{n+1} = {1/x_n}``, ``beta_{-1} = 1``, ``beta_n = x_0 ... x_n``.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if not isinstance(x, RotationNumber):
        x = RotationNumber.from_float(x)

    xs: list[float] = [x.value]
    if depth > 1:
        if x.source == "quadratic":
            for _, xn in _gauss_quadratic(x):
                xs.append(xn)
                if len(xs) >= depth:
                    break
        else:
            if x.source == "quotients":
                if len(x.quotients) < depth - 1:
                    raise ValueError(f"quotient list too short for depth {depth}")
                f = Fraction(*_convergent(x.quotients))
            else:
                cf = continued_fraction(x, max_terms=depth, rational_cutoff=rational_cutoff)
                if cf.terminated and len(cf.quotients) < depth:
                    r = cf.rational()
                    raise RationalDetected(r.numerator, r.denominator)
                f = x.fraction if x.source == "rational" else Fraction(x.value)
            for _, y in _gauss_exact(f, None, None):
                if y == 0:
                    break
                xs.append(float(y))
                if len(xs) >= depth:
                    break

    total, beta = 0.0, 1.0
    for xn in xs[:depth]:
        total += -beta * math.log(xn)
        beta *= xn
    return total


# --- classification -----------------------------------------------------------


@dataclass(frozen=True)
class ClassifyConfig:
    max_terms: int = 60
    rational_cutoff: int = 10 ** 6
    tail_threshold: float = 0.25


@dataclass(frozen=True)
class Classification:
    label: str  # "rational" | "brjuno-like" | "non-brjuno-like"
    note: str = "truncated heuristic"
    detail: str = ""

    def __str__(self):
        return f"{self.label} ({self.note})"


def classify(x: RotationNumber | float, cfg: ClassifyConfig = ClassifyConfig()) -> Classification:
    """Rational / Brjuno-like / non-Brjuno-like label from a finite expansion.

    The label is a truncated heuristic: finite data cannot decide the Brjuno
    condition. Irrational inputs are called non-Brjuno-like when the mean of
    the last half of the terms ``ln(q_{k+1})/q_k`` is at least
    ``cfg.tail_threshold``.
    """
    cf = continued_fraction(x, cfg.max_terms, cfg.rational_cutoff)
    if cf.terminated:
        r = cf.rational()
        return Classification("rational", detail=f"{r.numerator}/{r.denominator}")
    n = len(cf.quotients)
    terms = brjuno_sum(cf, n).terms
    tail = terms[n // 2:] or terms
    mean_tail = sum(tail) / len(tail)
    label = "non-brjuno-like" if mean_tail >= cfg.tail_threshold else "brjuno-like"
    return Classification(label, detail=f"tail mean {mean_tail:.3g} over {len(tail)} terms")


# --- parsing ------------------------------------------------------------------

_QUAD = re.compile(
    r"^\(?\s*(?P<p>[+-]?\d+)?\s*(?P<sign>[+-])?\s*(?P<q>\d+)?\s*\*?\s*sqrt\s*\(?\s*(?P<d>\d+)\s*\)?\s*\)?"
    r"\s*(?:/\s*(?P<r>\d+))?$"
)
_QUAD_SQRT_FIRST = re.compile(
    r"^\(?\s*(?P<q>\d+)?\s*\*?\s*sqrt\s*\(?\s*(?P<d>\d+)\s*\)?\s*(?P<p>[+-]\s*\d+)?\s*\)?"
    r"\s*(?:/\s*(?P<r>\d+))?$"
)


def parse_alpha(text: str) -> RotationNumber:
    """Parse a rotation-number literal.

    Accepts decimals (``0.618``), fractions (``1/3``), quadratic irrationals
    such as ``(sqrt5-1)/2``, ``sqrt(2)-1`` or ``(-1+sqrt5)/2``, quotient
    lists ``[1,2,1,2]`` and the names ``golden`` and ``silver``.
    """
    s = text.strip().lower().replace(" ", "")
    if s in ("golden", "gold", "phi"):
        return GOLDEN
    if s == "silver":
        return SILVER
    if s.startswith("[") and s.endswith("]"):
        body = s[1:-1].replace(";", ",")
        parts = [t for t in body.split(",") if t]
        if parts and parts[0] == "0" and len(parts) > 1:
            parts = parts[1:]
        return RotationNumber.from_quotients([int(t) for t in parts])
    if "sqrt" in s:
        m = _QUAD_SQRT_FIRST.match(s)
        if m:
            q = int(m.group("q") or 1)
            p = int(m.group("p").replace("+", "")) if m.group("p") else 0
        else:
            m = _QUAD.match(s)
            if not m:
                raise ValueError(f"cannot parse rotation number {text!r}")
            p = int(m.group("p") or 0)
            q = int(m.group("q") or 1)
            if m.group("sign") == "-":
                q = -q
        return RotationNumber.from_quadratic(p, q, int(m.group("d")), int(m.group("r") or 1))
    if "/" in s:
        try:
            return RotationNumber.from_fraction(Fraction(s))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse rotation number {text!r}") from exc
    try:
        return RotationNumber.from_float(float(s))
    except ValueError as exc:
        raise ValueError(f"cannot parse rotation number {text!r}") from exc
