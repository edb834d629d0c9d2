# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled pointwise kernels for the split-step / gradient-flow hot loops.

All loops are written over flat double views (complex data interleaved as
re,im pairs) so gcc can vectorize pow/sin/cos through libmvec.  No
cross-thread reductions are performed anywhere, so results are bitwise
deterministic.  Semantics mirror ``_kernels_py``.
"""

from libc.math cimport sin, cos, pow

BACKEND = "cython"

cdef double TINY = 1e-300


def abs_pow_pair_flat(const double[::1] v, double p1, double p2,
                      double[::1] out1, double[::1] out2):
    # v: interleaved (re, im), length 2*n; out1 = |u|^p1, out2 = |u|^p2
    cdef Py_ssize_t i, n = out1.shape[0]
    cdef double m2, x, y
    cdef double h1 = 0.5 * p1, h2 = 0.5 * p2
    cdef bint p1_4 = (p1 == 4.0), p2_4 = (p2 == 4.0)
    cdef bint p1_2 = (p1 == 2.0), p2_2 = (p2 == 2.0)
    for i in range(n):
        x = v[2 * i]
        y = v[2 * i + 1]
        m2 = x * x + y * y
        if m2 < TINY:
            m2 = TINY
        out1[i] = m2 * m2 if p1_4 else (m2 if p1_2 else pow(m2, h1))
        out2[i] = m2 * m2 if p2_4 else (m2 if p2_2 else pow(m2, h2))


def nl_phase_flat(double[::1] v, const double[::1] A, const double[::1] B,
                  const double[::1] V, bint has_v, double tau, double q, double s,
                  double[::1] w):
    # v: interleaved (re, im) mutated in place; w: scratch of length n
    cdef Py_ssize_t i, n = A.shape[0]
    cdef double m2, x, y, c, sn
    cdef double eq = 0.5 * (q - 2.0), es = 0.5 * (s - 2.0)
    cdef bint s4 = (s == 4.0)
    if has_v:
        for i in range(n):
            x = v[2 * i]
            y = v[2 * i + 1]
            m2 = x * x + y * y
            if m2 < TINY:
                m2 = TINY
            w[i] = tau * (A[i] * pow(m2, eq)
                          + (B[i] * m2 if s4 else B[i] * pow(m2, es)) - V[i])
    else:
        for i in range(n):
            x = v[2 * i]
            y = v[2 * i + 1]
            m2 = x * x + y * y
            if m2 < TINY:
                m2 = TINY
            w[i] = tau * (A[i] * pow(m2, eq)
                          + (B[i] * m2 if s4 else B[i] * pow(m2, es)))
    for i in range(n):
        c = cos(w[i])
        sn = sin(w[i])
        x = v[2 * i]
        y = v[2 * i + 1]
        v[2 * i] = x * c - y * sn
        v[2 * i + 1] = x * sn + y * c


def nl_force_flat(const double[::1] v, const double[::1] A, const double[::1] B,
                  double q, double s, double[::1] out):
    # out: interleaved (re, im) = (A|u|^{q-2} + B|u|^{s-2}) * u
    cdef Py_ssize_t i, n = A.shape[0]
    cdef double m2, x, y, coef
    cdef double eq = 0.5 * (q - 2.0), es = 0.5 * (s - 2.0)
    cdef bint s4 = (s == 4.0)
    for i in range(n):
        x = v[2 * i]
        y = v[2 * i + 1]
        m2 = x * x + y * y
        if m2 < TINY:
            m2 = TINY
        coef = A[i] * pow(m2, eq) + (B[i] * m2 if s4 else B[i] * pow(m2, es))
        out[2 * i] = coef * x
        out[2 * i + 1] = coef * y
