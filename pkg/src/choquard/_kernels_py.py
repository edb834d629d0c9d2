"""Pure-numpy reference implementations of the hot pointwise kernels.

Semantics must match ``_kernels.pyx`` bit-for-bit up to libm rounding:
|u|^2 is clamped from below by 1e-300 before fractional powers so that
vanishing samples produce finite (then harmless) coefficients instead of
inf*0 = nan.  Exponent 4.0 gets an integer fast path because the critical
power 2*(2d-alpha)/(d-2) equals 4 at the reference parameters.
"""

import numpy as np

BACKEND = "python"

_TINY = 1e-300


def _abs_sq(u):
    return u.real * u.real + u.imag * u.imag


def _pow_half(m2, p):
    """m2**(p/2) with the integer fast paths used by the compiled kernel."""
    if p == 4.0:
        return m2 * m2
    if p == 2.0:
        return m2
    return np.power(m2, 0.5 * p)


def abs_pow_pair(u, p1, p2, out1=None, out2=None):
    """Return (|u|**p1, |u|**p2) as float64 arrays from a single |u|^2 pass."""
    m2 = _abs_sq(u)
    np.maximum(m2, _TINY, out=m2)
    r1 = _pow_half(m2, p1)
    r2 = _pow_half(m2, p2)
    if out1 is not None:
        out1[...] = r1
        r1 = out1
    if out2 is not None:
        out2[...] = r2
        r2 = out2
    return r1, r2


def nl_phase(u, A, B, V, tau, q, s):
    """In-place u *= exp(i*tau*(-V + A*|u|^{q-2} + B*|u|^{s-2}))."""
    m2 = _abs_sq(u)
    np.maximum(m2, _TINY, out=m2)
    w = A * _pow_half(m2, q - 2.0) + B * _pow_half(m2, s - 2.0)
    if V is not None:
        w -= V
    w *= tau
    u *= np.cos(w) + 1j * np.sin(w)
    return u


def nl_force(u, A, B, q, s, out=None):
    """out = (A*|u|^{q-2} + B*|u|^{s-2}) * u  (the nonlocal force density)."""
    m2 = _abs_sq(u)
    np.maximum(m2, _TINY, out=m2)
    coef = A * _pow_half(m2, q - 2.0) + B * _pow_half(m2, s - 2.0)
    if out is None:
        return coef * u
    np.multiply(coef, u, out=out)
    return out
