# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Signatures mirror :mod:`siegel._pykernels`."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, atan2, floor, fabs, M_PI
from libc.complex cimport cabs, cexp

cnp.import_array()

ctypedef double complex cplx

BLASCHKE = 0
ARNOLD = 1


def recurse(const cplx[::1] div, double sigma, double lo=1e-300, double hi=1e300):
    cdef Py_ssize_t N = div.shape[0] - 1
    cdef cnp.ndarray[cplx, ndim=1] out = np.zeros(N + 1, dtype=np.complex128)
    cdef cplx[::1] d = out
    cdef Py_ssize_t n, j, half
    cdef cplx s
    cdef double m
    cdef Py_ssize_t stop = -1
    if N < 1:
        return out, stop
    d[1] = sigma
    with nogil:
        for n in range(2, N + 1):
            s = 0
            half = (n - 1) // 2
            for j in range(1, half + 1):
                s = s + d[j] * d[n - j]
            s = 2 * s
            if n % 2 == 0:
                s = s + d[n // 2] * d[n // 2]
            d[n] = s / div[n]
            m = cabs(d[n])
            if not (m > lo and m < hi):
                stop = n
                break
    return out, stop


def circle_displacements(int variant, double a, double shift, double x0, Py_ssize_t n):
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double[::1] disp = out
    cdef double x = x0 - floor(x0)
    cdef double t, g
    cdef Py_ssize_t k
    with nogil:
        for k in range(n):
            t = 2.0 * M_PI * x
            if variant == 0:
                g = atan2(sin(t), a + cos(t)) / M_PI
            else:
                g = a * sin(t) / M_PI
            g = g + shift
            disp[k] = g
            x = x + g
            x = x - floor(x)
    return out


def blaschke_orbit(double a, double lam, cplx z0, Py_ssize_t n):
    cdef cnp.ndarray[cplx, ndim=1] out = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] w = out
    cdef cplx rot = cos(2.0 * M_PI * lam) + 1j * sin(2.0 * M_PI * lam)
    cdef cplx z = z0
    cdef Py_ssize_t k
    with nogil:
        for k in range(n):
            w[k] = z
            z = rot * z * z * (z + a) / (1.0 + a * z)
    return out


def arnold_orbit(cplx a, double lam, cplx z0, Py_ssize_t n):
    cdef cnp.ndarray[cplx, ndim=1] out = np.empty(n, dtype=np.complex128)
    cdef cplx[::1] w = out
    cdef cplx rot = cos(2.0 * M_PI * lam) + 1j * sin(2.0 * M_PI * lam)
    cdef cplx z = z0
    cdef Py_ssize_t k
    with nogil:
        for k in range(n):
            w[k] = z
            z = rot * z * cexp(a * (z - 1.0 / z))
    return out
