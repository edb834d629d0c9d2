"""Independent oracles: 1-D adaptive quadrature and closed forms, never
touching the package's spectral machinery."""

import math

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as _gamma


def riesz_normalization(d, alpha):
    return (_gamma((d - alpha) / 2.0)
            / (_gamma(alpha / 2.0) * math.pi ** (d / 2.0) * 2.0 ** alpha))


def riesz_at_origin_radial(profile, d, alpha, upper=np.inf):
    """(I_alpha * f)(0) = Cbar * |S^{d-1}| * int f(r) r^{alpha-1} dr for a
    radial profile f (kernel Cbar |x|^{alpha-d})."""
    cbar = riesz_normalization(d, alpha)
    area = 2.0 * math.pi ** (d / 2.0) / _gamma(d / 2.0)
    val, _ = quad(lambda r: profile(r) * r ** (alpha - 1.0), 0.0, upper,
                  limit=200)
    return cbar * area * val


def pair_energy_radial(profile, p, alpha, upper=20.0):
    """iint rho(x) rho(y) |x-y|^{-alpha} dx dy for radial rho = profile^p in
    d = 3, by nested adaptive quadrature of the sphere-averaged kernel.

    For alpha = 2 the angular average of |x-y|^{-2} over the sphere |y| = s
    at radius |x| = r is (2 pi / (r s)) log((r+s)/|r-s|), so

        (K * rho)(r) = (2 pi / r) int rho(s) s log((r+s)/|r-s|) ds.
    """
    if alpha != 2.0:
        raise NotImplementedError("oracle implemented for alpha = 2")

    def rho(s):
        return abs(profile(s)) ** p

    def inner(r):
        def integrand(s):
            if s == r:
                return 0.0
            return rho(s) * s * math.log((r + s) / abs(r - s))
        lo, _ = quad(integrand, 0.0, r, points=[r * 0.999999], limit=300)
        hi, _ = quad(integrand, r, upper, points=[r * 1.000001], limit=300)
        return 2.0 * math.pi * (lo + hi) / r

    val, _ = quad(lambda r: inner(r) * rho(r) * r * r, 1e-8, upper, limit=300)
    return 4.0 * math.pi * val


def gaussian_l2_sq(d, a):
    """|e^{-a r^2}|_2^2 over R^d."""
    return (math.pi / (2.0 * a)) ** (d / 2.0)


def gaussian_grad_sq(d, a):
    """|grad e^{-a r^2}|_2^2 over R^d = 4 a^2 * (d/(2*2a)) * (pi/2a)^{d/2}."""
    return 4.0 * a * a * (d / (4.0 * a)) * (math.pi / (2.0 * a)) ** (d / 2.0)


def free_schrodinger_gaussian(a, t, rsq, d):
    """Solution of i u_t + Lap u = 0 with u(0) = e^{-a|x|^2}:
    (1 + 4iat)^{-d/2} exp(-a|x|^2 / (1 + 4iat))."""
    z = 1.0 + 4j * a * t
    return z ** (-d / 2.0) * np.exp(-a * rsq / z)


def yukawa_kato_at_origin(strength, range_):
    """int |V(y)|/|y| dy for V = strength e^{-r/range}/r in d = 3:
    4 pi strength range."""
    val, _ = quad(lambda r: abs(strength) * math.exp(-r / range_), 0, np.inf)
    return 4.0 * math.pi * val
