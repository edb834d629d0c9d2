"""Kernel backend selection and FFT plumbing.

The compiled extension (``choquard._kernels``) is used when importable and
not disabled through the ``CHOQUARD_PURE_PYTHON`` environment variable;
otherwise the numpy fallback in ``_kernels_py`` provides identical
semantics.  FFTs always go through scipy.fft (pocketfft); ``set_threads``
controls its worker pool.
"""

import os

import numpy as np
import scipy.fft as _sfft

from . import _kernels_py

_cy = None
if os.environ.get("CHOQUARD_PURE_PYTHON", "0") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _cy  # type: ignore[attr-defined]
    except ImportError:
        _cy = None

_threads = 1


def backend_name() -> str:
    return "cython" if _cy is not None else "python"


def set_threads(n: int) -> None:
    global _threads
    _threads = max(1, int(n))


def get_threads() -> int:
    return _threads


def fftn(a, overwrite=False):
    return _sfft.fftn(a, workers=_threads, overwrite_x=overwrite)


def ifftn(a, overwrite=False):
    return _sfft.ifftn(a, workers=_threads, overwrite_x=overwrite)


def rfftn(a):
    return _sfft.rfftn(a, workers=_threads)


def irfftn(a, shape):
    return _sfft.irfftn(a, s=shape, workers=_threads)


def _flat_complex(u):
    """View a C-contiguous complex128 array as interleaved float64 pairs."""
    return np.ascontiguousarray(u, dtype=np.complex128).view(np.float64).ravel()


def abs_pow_pair(u, p1, p2):
    """(|u|**p1, |u|**p2) for a complex array u, computed in one pass."""
    if _cy is None:
        r1, r2 = _kernels_py.abs_pow_pair(u, p1, p2)
        return np.asarray(r1, dtype=np.float64), np.asarray(r2, dtype=np.float64)
    out1 = np.empty(u.size, dtype=np.float64)
    out2 = np.empty(u.size, dtype=np.float64)
    _cy.abs_pow_pair_flat(_flat_complex(u), float(p1), float(p2), out1, out2)
    return out1.reshape(u.shape), out2.reshape(u.shape)


def nl_phase(u, A, B, V, tau, q, s):
    """In place: u *= exp(i*tau*(-V + A|u|^{q-2} + B|u|^{s-2})). Returns u."""
    if _cy is None:
        return _kernels_py.nl_phase(u, A, B, V, tau, q, s)
    w = np.empty(u.size, dtype=np.float64)
    v = u.view(np.float64).ravel()
    a = A.ravel()
    b = B.ravel()
    if V is None:
        _cy.nl_phase_flat(v, a, b, a, False, float(tau), float(q), float(s), w)
    else:
        _cy.nl_phase_flat(v, a, b, np.ascontiguousarray(V, dtype=np.float64).ravel(),
                          True, float(tau), float(q), float(s), w)
    return u


def nl_force(u, A, B, q, s):
    """(A|u|^{q-2} + B|u|^{s-2}) * u as a new complex array."""
    if _cy is None:
        return _kernels_py.nl_force(u, A, B, q, s)
    out = np.empty(u.shape, dtype=np.complex128)
    _cy.nl_force_flat(_flat_complex(u), A.ravel(), B.ravel(),
                      float(q), float(s), out.view(np.float64).ravel())
    return out
