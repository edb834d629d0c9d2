"""Explicit constants and the energy-landscape function.

The lower bound chain

    D_q(u) <= C(d,a) |u|_{2dq/(2d-a)}^{2q}
           <= C_{d,q,a} |grad u|^{d(q-2)+a} |u|^{2q-d(q-2)-a}

(sharp pairing constant, then Gagliardo-Nirenberg) together with the
critical-quotient constant S_a and the Sobolev bound on the potential term
gives, for |u|_2^2 = a and rho = |grad u|_2^2,

    E(u) >= rho * f(a, rho),
    f(a, rho) = 1/2 (1 - |V_-|_{d/2} / S)
                - C_{d,q,a} a^{(2q-d(q-2)-a)/2} / (2q) * rho^{(d(q-2)+a-2)/2}
                - rho^{2a*-1} / (2 * 2a* * S_a^{2a*}),          2a* = (2d-a)/(d-2).

f(a, .) has a unique maximum at rho_a; the maximum value equals
1/2 (1 - |V_-|/S) - K a^{(d+2-a)/d} and crosses zero at the mass threshold
a0, which defines the landscape radius rho0 = rho_{a0}.

S (Sobolev) is computed from the extremal profile (1+|x|^2)^{-(d-2)/2} by
high-accuracy radial quadrature; the Gagliardo-Nirenberg constant C_{d,p}
by descent of the Weinstein quotient over radial profiles.  Both are
cached and stamped into every result file, since the thresholds inherit
their accuracy.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.special import gamma as _gamma

from .errors import ParameterError
from .grids import ModelParams


def sphere_area(d: int) -> float:
    """Surface measure of the unit sphere S^{d-1}."""
    return 2.0 * math.pi ** (d / 2.0) / _gamma(d / 2.0)


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2.0) / _gamma(d / 2.0 + 1.0)


def hls_constant(d: int, alpha: float) -> float:
    """Sharp constant of the pairing iint f(x) |x-y|^{-alpha} f(y) against
    |f|_{2d/(2d-alpha)}^2, attained on (g^2+|x-c|^2)^{-(2d-alpha)/2}."""
    if not (0.0 < alpha < d):
        raise ParameterError(f"alpha={alpha} outside (0, {d})")
    return (math.pi ** (alpha / 2.0)
            * _gamma((d - alpha) / 2.0) / _gamma(d - alpha / 2.0)
            * (_gamma(d / 2.0) / _gamma(d)) ** (-1.0 + alpha / d))


@lru_cache(maxsize=16)
def sobolev_constant(d: int) -> float:
    """Optimal constant S with S |u|_{2*}^2 <= |grad u|_2^2, evaluated on
    the extremal profile (1 + r^2)^{-(d-2)/2} by adaptive radial
    quadrature."""
    if d < 3:
        raise ParameterError("Sobolev constant requires d >= 3")
    om = sphere_area(d)
    grad_int, _ = quad(lambda r: ((d - 2) * r * (1 + r * r) ** (-d / 2.0)) ** 2
                       * r ** (d - 1), 0.0, np.inf, limit=200)
    norm_int, _ = quad(lambda r: (1 + r * r) ** (-d) * r ** (d - 1),
                       0.0, np.inf, limit=200)
    grad_sq = om * grad_int
    lp_sq = (om * norm_int) ** ((d - 2.0) / d)
    return grad_sq / lp_sq


def talenti_rayleigh_radial(d: int, width: float = 1.0, window=None) -> float:
    """Rayleigh quotient |grad u|^2 / |u|_{2*}^2 of the (optionally
    windowed) profile (width^2 + r^2)^{-(d-2)/2} by radial quadrature.
    Used as the 1-D oracle in the two-method agreement check."""
    om = sphere_area(d)
    g = float(width)

    def u(r):
        base = (g * g + r * r) ** (-(d - 2) / 2.0)
        return base * (window(r) if window is not None else 1.0)

    def du(r):
        core = -(d - 2) * r * (g * g + r * r) ** (-d / 2.0)
        if window is None:
            return core
        eps = 1e-6 * (1.0 + r)
        wprime = (window(r + eps) - window(r - eps)) / (2 * eps)
        return core * window(r) + (g * g + r * r) ** (-(d - 2) / 2.0) * wprime

    two_star = 2.0 * d / (d - 2.0)
    grad_int, _ = quad(lambda r: du(r) ** 2 * r ** (d - 1), 0, np.inf, limit=400)
    norm_int, _ = quad(lambda r: abs(u(r)) ** two_star * r ** (d - 1), 0, np.inf,
                       limit=400)
    return om * grad_int / (om * norm_int) ** (2.0 / two_star)


@lru_cache(maxsize=64)
def gn_constant(d: int, p: float, nodes: int = 4096, radius: float = 24.0,
                max_iter: int = 400) -> float:
    """Best constant of |u|_p <= C |grad u|_2^beta |u|_2^{1-beta},
    beta = d(1/2 - 1/p), from the extremal profile.

    The extremal is (up to the quotient's scalings) the positive radial
    solution of -Lap Q + Q = Q^{p-1}; it is computed on a 1-D radial grid
    by Petviashvili iteration (a plain Weinstein-quotient descent crawls
    along the quotient's dilation-flat direction and needs ~1e6 steps for
    the same accuracy).  The returned value is the quotient of the
    converged profile: a certified trial value, validated as a bound by
    the test batteries."""
    if d < 2:
        raise ParameterError("Gagliardo-Nirenberg estimate requires d >= 2")
    two_star = np.inf if d == 2 else 2.0 * d / (d - 2.0)
    if not (2.0 <= p < two_star):
        raise ParameterError(f"p={p} outside [2, 2d/(d-2))")
    if p == 2.0:
        return 1.0
    beta = d * (0.5 - 1.0 / p)

    import scipy.sparse as ssp
    import scipy.sparse.linalg as sla

    om = sphere_area(d)
    M = int(nodes)
    dr = radius / M
    r = dr * np.arange(1, M + 1)          # nodes r_1 .. r_M, Q(R) = 0
    # radial Laplacian Q'' + ((d-1)/r) Q' with even reflection through 0
    main = -2.0 / dr ** 2 * np.ones(M)
    up = 1.0 / dr ** 2 + (d - 1) / (2.0 * dr * r[:-1])
    dn = 1.0 / dr ** 2 - (d - 1) / (2.0 * dr * r[1:])
    lap = ssp.diags([dn, main, up], [-1, 0, 1], format="lil")
    lap[0, 0] += 1.0 / dr ** 2 - (d - 1) / (2.0 * dr * r[0])
    solve = sla.factorized((ssp.identity(M) - lap).tocsc())

    theta = (p - 1.0) / (p - 2.0)
    Q = np.exp(-0.5 * r ** 2)
    for _ in range(max_iter):
        rhs = np.abs(Q) ** (p - 2.0) * Q
        LQ = Q - np.asarray(lap @ Q)
        gam = float(np.sum(Q * LQ * r ** (d - 1))) \
            / float(np.sum(Q * rhs * r ** (d - 1)))
        Qn = gam ** theta * solve(rhs)
        err = float(np.max(np.abs(Qn - Q))) / float(np.max(np.abs(Qn)))
        Q = Qn
        if err < 1e-13:
            break

    rw = r ** (d - 1) * dr
    n2 = om * float(np.sum(rw * Q * Q))
    npp = om * float(np.sum(rw * np.abs(Q) ** p))
    dQ = np.gradient(Q, dr)
    n1 = om * float(np.sum(rw * dQ * dQ))
    return npp ** (1.0 / p) / (n1 ** (beta / 2.0) * n2 ** ((1 - beta) / 2.0))


def chained_constant(params: ModelParams, gn: float, hls: float) -> float:
    """C_{d,q,a} = C(d,a) * C_{d,p}^{2q} with p = 2dq/(2d-a)."""
    return hls * gn ** (2.0 * params.q)


@dataclass(frozen=True)
class LandscapeConstants:
    """Every explicit constant entering f(a, rho) and its thresholds."""

    sobolev_S: float
    hls_C: float
    S_alpha: float
    gn_C: float
    chained_C: float
    v_minus_halfd: float
    K: float
    a0: float
    rho0: float
    beta0: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("sobolev_S", "hls_C", "S_alpha", "gn_C", "chained_C",
                 "v_minus_halfd", "K", "a0", "rho0", "beta0")}


def _coeff_A(c, params) -> float:
    return 0.5 * (1.0 - c.v_minus_halfd / c.sobolev_S)


def _exponents(params: ModelParams):
    dq = params.subcrit_dilation_power          # d(q-2)+alpha, in (0, 2)
    e1 = 0.5 * (dq - 2.0)                       # negative
    e2 = params.two_alpha_star - 1.0            # positive
    s_exp = 0.5 * (2.0 * params.q - dq)         # exponent of a in B_q
    return dq, e1, e2, s_exp


def _coeff_Bq(a: float, c, params) -> float:
    _, _, _, s_exp = _exponents(params)
    return c.chained_C * a ** s_exp / (2.0 * params.q)


def _coeff_Bc(c, params) -> float:
    ts = params.two_alpha_star
    return 1.0 / (2.0 * ts * c.S_alpha ** ts)


def f_value(a: float, rho: float, c: LandscapeConstants,
            params: ModelParams) -> float:
    if a <= 0 or rho <= 0:
        raise ParameterError("f(a, rho) requires a, rho > 0")
    _, e1, e2, _ = _exponents(params)
    return (_coeff_A(c, params) - _coeff_Bq(a, c, params) * rho ** e1
            - _coeff_Bc(c, params) * rho ** e2)


def f_prime(a: float, rho: float, c: LandscapeConstants,
            params: ModelParams) -> float:
    """d/drho of f(a, rho) at fixed a."""
    _, e1, e2, _ = _exponents(params)
    return (-_coeff_Bq(a, c, params) * e1 * rho ** (e1 - 1.0)
            - _coeff_Bc(c, params) * e2 * rho ** (e2 - 1.0))


def _bracket(c, params) -> float:
    dq, _, _, _ = _exponents(params)
    ts = params.two_alpha_star
    return (ts * (2.0 - dq) * c.chained_C * c.S_alpha ** ts
            / (2.0 * params.q * (ts - 1.0)))


def rho_max(a: float, c: LandscapeConstants, params: ModelParams) -> float:
    """The unique maximizer rho_a of f(a, .)."""
    dq, _, _, s2 = _exponents(params)
    ts = params.two_alpha_star
    denom = 2.0 * ts - dq
    return (_bracket(c, params) ** (2.0 / denom)
            * a ** ((2.0 * params.q - dq) / denom))


def K_const(c: LandscapeConstants, params: ModelParams) -> float:
    dq, _, _, _ = _exponents(params)
    ts = params.two_alpha_star
    denom = 2.0 * ts - dq
    B = _bracket(c, params)
    return (c.chained_C / (2.0 * params.q) * B ** ((dq - 2.0) / denom)
            + _coeff_Bc(c, params) * B ** (2.0 * (ts - 1.0) / denom))


def a0_threshold(c: LandscapeConstants, params: ModelParams) -> float:
    """Root of max_rho f_a = A - K a^{(d+2-alpha)/d}: a0 = (A/K)^{d/(d+2-a)}."""
    A = _coeff_A(c, params)
    K = K_const(c, params)
    return (A / K) ** (params.d / (params.d + 2.0 - params.alpha))


def beta0(c: LandscapeConstants, params: ModelParams) -> float:
    """Coercivity margin when the subcritical term vanishes:
    A - rho0^{2a*-1} / (2 2a* S_a^{2a*})."""
    _, _, e2, _ = _exponents(params)
    return _coeff_A(c, params) - _coeff_Bc(c, params) * c.rho0 ** e2


def max_f_closed(a: float, c: LandscapeConstants, params: ModelParams) -> float:
    """max_rho f_a(rho) = A - K a^{(d+2-alpha)/d}, closed form."""
    return (_coeff_A(c, params) - K_const(c, params)
            * a ** ((params.d + 2.0 - params.alpha) / params.d))


def maximize_f(a: float, c: LandscapeConstants, params: ModelParams,
               rel_tol: float = 1e-12):
    """(rho*, f(a, rho*)) by golden-section search on [rho_a/10, 10 rho_a];
    unimodality holds because f_a has a unique critical point."""
    lo = rho_max(a, c, params) / 10.0
    hi = rho_max(a, c, params) * 10.0
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1 = f_value(a, x1, c, params)
    f2 = f_value(a, x2, c, params)
    while (hi - lo) > rel_tol * hi:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = f_value(a, x2, c, params)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = f_value(a, x1, c, params)
    rho = 0.5 * (lo + hi)
    return rho, f_value(a, rho, c, params)


def compute_constants(params: ModelParams, v_minus_halfd: float = 0.0,
                      gn_nodes: int = 2048) -> LandscapeConstants:
    """Assemble the stamped constants for given parameters and |V_-|_{d/2}
    (computed by the potential module and injected here)."""
    S = sobolev_constant(params.d)
    if v_minus_halfd > S:
        raise ParameterError(
            f"|V_-|_{{d/2}} = {v_minus_halfd} exceeds the Sobolev constant {S}")
    hls = hls_constant(params.d, params.alpha)
    S_alpha = S * hls ** (-1.0 / params.two_alpha_star)
    gn = gn_constant(params.d, params.gn_exponent, nodes=gn_nodes)
    chained = chained_constant(params, gn, hls)
    base = LandscapeConstants(
        sobolev_S=S, hls_C=hls, S_alpha=S_alpha, gn_C=gn, chained_C=chained,
        v_minus_halfd=v_minus_halfd, K=0.0, a0=0.0, rho0=0.0, beta0=0.0)
    K = K_const(base, params)
    base = LandscapeConstants(**{**base.as_dict(), "K": K})
    a0 = a0_threshold(base, params)
    rho0 = rho_max(a0, base, params)
    base = LandscapeConstants(**{**base.as_dict(), "a0": a0, "rho0": rho0})
    b0 = beta0(base, params)
    return LandscapeConstants(**{**base.as_dict(), "beta0": b0})


def trichotomy_report(c: LandscapeConstants, params: ModelParams) -> dict:
    """Numerical maxima of f_a at a = a0/2, a0, 2 a0 with sign verdicts."""
    out = {}
    for label, a, check in (("below", 0.5 * c.a0, lambda m: m > 1e-6),
                            ("at", c.a0, lambda m: abs(m) < 1e-9),
                            ("above", 2.0 * c.a0, lambda m: m < -1e-6)):
        rho, m = maximize_f(a, c, params)
        out[label] = {"a": a, "rho_argmax": rho, "max_f": m,
                      "closed_form": max_f_closed(a, c, params),
                      "pass": bool(check(m))}
    out["pass"] = all(out[k]["pass"] for k in ("below", "at", "above"))
    return out


def sign_propagation_check(a1: float, rho1: float, a2: float,
                           c: LandscapeConstants, params: ModelParams,
                           samples: int = 64) -> dict:
    """Nonnegativity of f(a2, .) on [a2 rho1 / a1, rho1] given
    f(a1, rho1) >= 0 and 0 < a2 <= a1."""
    if f_value(a1, rho1, c, params) < 0:
        raise ParameterError("requires f(a1, rho1) >= 0")
    if not (0.0 < a2 <= a1):
        raise ParameterError("requires 0 < a2 <= a1")
    rhos = np.linspace(a2 * rho1 / a1, rho1, samples)
    vals = np.array([f_value(a2, r, c, params) for r in rhos])
    return {"rho_grid": rhos, "values": vals, "min": float(vals.min()),
            "pass": bool(vals.min() >= -1e-12)}


def landscape_curve(c: LandscapeConstants, params: ModelParams,
                    a_values=None, rho_values=None):
    """(a, rho, f(a, rho)) samples for plotting/export."""
    if a_values is None:
        a_values = np.linspace(0.1, 2.0, 8) * c.a0
    if rho_values is None:
        rho_values = np.geomspace(c.rho0 / 50.0, c.rho0 * 10.0, 80)
    rows = []
    for a in a_values:
        for rho in rho_values:
            rows.append((float(a), float(rho), f_value(a, rho, c, params)))
    return rows
