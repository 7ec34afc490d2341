"""Pure-Python/numpy versions of the compiled inner loops.

Used when the extension is not built, or when ``SIEGEL_PURE_PYTHON=1``.
"""

import cmath
import math

import numpy as np

BLASCHKE = 0
ARNOLD = 1


def recurse(div, sigma, lo=1e-300, hi=1e300):
    """Rescaled linearizer recursion ``d_n = (sum_j d_j d_{n-j}) / div[n]``.

    Returns the coefficient array (index = power) and the first index whose
    magnitude left ``(lo, hi)``, or -1 if none did.
    """
    N = len(div) - 1
    d = np.zeros(N + 1, dtype=np.complex128)
    if N < 1:
        return d, -1
    d[1] = sigma
    # overflow to inf is caught by the range check below
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(2, N + 1):
            d[n] = np.dot(d[1:n], d[n - 1:0:-1]) / div[n]
            m = abs(d[n])
            if not lo < m < hi:
                return d, n
    return d, -1


def circle_displacements(variant, a, shift, x0, n):
    disp = np.empty(n)
    x = x0 - math.floor(x0)
    sin, cos, atan2, pi, floor = math.sin, math.cos, math.atan2, math.pi, math.floor
    for k in range(n):
        t = 2.0 * pi * x
        if variant == BLASCHKE:
            g = atan2(sin(t), a + cos(t)) / pi + shift
        else:
            g = a * sin(t) / pi + shift
        disp[k] = g
        x += g
        x -= floor(x)
    return disp


def blaschke_orbit(a, lam, z0, n):
    w = np.empty(n, dtype=np.complex128)
    rot = complex(math.cos(2 * math.pi * lam), math.sin(2 * math.pi * lam))
    z = complex(z0)
    for k in range(n):
        w[k] = z
        z = rot * z * z * (z + a) / (1.0 + a * z)
    return w


def arnold_orbit(a, lam, z0, n):
    w = np.empty(n, dtype=np.complex128)
    rot = complex(math.cos(2 * math.pi * lam), math.sin(2 * math.pi * lam))
    z = complex(z0)
    a = complex(a)
    for k in range(n):
        w[k] = z
        z = rot * z * cmath.exp(a * (z - 1.0 / z))
    return w
