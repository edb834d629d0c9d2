"""Space-time (Strichartz-type) norms, admissible exponent pairs, and the
Picard iteration of the integral (Duhamel) form of the Cauchy problem

    u(t) = e^{itL} phi + i int_0^t e^{i(t-s)L} N(u(s)) ds,
    L = Lap - V,   N(u) = (K*|u|^q)|u|^{q-2}u + (K*|u|^{p*})|u|^{p*-2}u,

with contraction-factor measurement.  The smallness radius of the
fixed-point argument is not computed from implicit propagator constants;
the probe measures where contraction empirically holds (this empirical
radius is a different object from the landscape radius rho0 and is never
conflated with it).
"""

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import backend
from .energy import _potential_samples, interaction_field
from .errors import ParameterError
from .grids import Field, Grid, ModelParams
from .spectral import h1_norm_sq, lp_norm


@dataclass(frozen=True)
class AdmissiblePair:
    """Exponents (m, n) with 2/m + d/n = d/2, m, n in [2, inf]."""

    m: float
    n: float

    def identity_defect(self, d: int) -> float:
        lhs = (0.0 if self.m == np.inf else 2.0 / self.m) + d / self.n
        return abs(lhs - d / 2.0)

    def check(self, d: int):
        if self.identity_defect(d) > 1e-12:
            raise ParameterError(
                f"(m, n) = ({self.m}, {self.n}) is not admissible for d={d}")
        if not (self.m >= 2 and 2 <= self.n):
            raise ParameterError("admissible pairs require m, n >= 2")


def admissible_pairs(params: ModelParams):
    """The two working pairs (2q, 2dq/(dq-2)) and (2 p*, 2d p*/(d p* - 2))."""
    d, q = params.d, params.q
    ts = params.two_alpha_star
    p1 = AdmissiblePair(2.0 * q, 2.0 * d * q / (d * q - 2.0))
    p2 = AdmissiblePair(2.0 * ts, 2.0 * d * ts / (d * ts - 2.0))
    p1.check(d)
    p2.check(d)
    return p1, p2


@dataclass
class MixedNormSpec:
    pairs: tuple
    T: float
    with_derivative: bool = False

    def __post_init__(self):
        if self.T <= 0:
            raise ParameterError("time horizon must be positive")


@dataclass
class Trajectory:
    times: np.ndarray
    states: list                      # list of Field, uniform time sampling

    def __post_init__(self):
        if len(self.states) == 0:
            raise ParameterError("empty trajectory")


def _spatial_norm(u: Field, n: float, with_derivative: bool) -> float:
    val = lp_norm(u, n)
    if with_derivative:
        from .spectral import gradient_fields
        comps = gradient_fields(u)
        mod = np.sqrt(sum(np.abs(c.values) ** 2 for c in comps))
        val = val + lp_norm(Field(u.grid, mod.astype(np.complex128)), n)
    return val


def mixed_norm(traj: Trajectory, spec: MixedNormSpec):
    """L^m_T L^n_x (or L^m_T W^{1,n}_x) norms, one value per pair, by
    trapezoid quadrature in time of the spatial norms."""
    t = traj.times
    out = []
    for pair in spec.pairs:
        vals = np.array([_spatial_norm(u, pair.n, spec.with_derivative)
                         for u in traj.states])
        if pair.m == np.inf:
            out.append(float(np.max(vals)))
        else:
            out.append(float(np.trapezoid(vals ** pair.m, t) ** (1.0 / pair.m)))
    return out


def linear_propagator_trajectory(phi: Field, V, params: ModelParams, T: float,
                                 nodes: int, substeps: int = 8) -> Trajectory:
    """States e^{i t L} phi at uniform nodes on [0, T].  For V = 0 the flow
    is a single exact Fourier multiplier per node; otherwise fine-step
    symmetric splitting of Lap and V."""
    grid = phi.grid
    times = np.linspace(0.0, T, nodes)
    Vs = _potential_samples(V, grid)
    states = []
    if Vs is None:
        F0 = backend.fftn(phi.values)
        for t in times:
            states.append(Field(grid, backend.ifftn(np.exp(-1j * t * grid.ksq) * F0)))
        return Trajectory(times, states)
    dt = times[1] - times[0]
    sub = dt / substeps
    lin = np.exp(-1j * sub * grid.ksq)
    half = np.exp(-1j * 0.5 * sub * Vs)
    vals = phi.values.copy()
    states.append(Field(grid, vals.copy()))
    for _ in range(nodes - 1):
        for _ in range(substeps):
            vals = vals * half
            vals = backend.ifftn(lin * backend.fftn(vals))
            vals = vals * half
        states.append(Field(grid, vals.copy()))
    return Trajectory(times, states)


def strichartz_ratio(phi: Field, V, params: ModelParams, T: float,
                     nodes: int = 33) -> dict:
    """Mixed-norm-to-H^1 ratios of the linear flow for the two working
    pairs (the boundedness probe asserts these stay within a moderate
    range over a dilation/modulation battery, not a specific constant)."""
    pairs = admissible_pairs(params)
    traj = linear_propagator_trajectory(phi, V, params, T, nodes)
    spec = MixedNormSpec(pairs=pairs, T=T, with_derivative=True)
    norms = mixed_norm(traj, spec)
    h1 = math.sqrt(h1_norm_sq(phi))
    return {"pairs": pairs, "mixed_norms": norms,
            "ratios": [nv / h1 for nv in norms]}


def _nonlocal_force(vals: np.ndarray, params: ModelParams, grid: Grid) -> np.ndarray:
    rho_q, rho_s = backend.abs_pow_pair(vals, params.q, params.two_alpha_star)
    A = interaction_field(rho_q, params.alpha, grid)
    B = interaction_field(rho_s, params.alpha, grid)
    return backend.nl_force(vals, A, B, params.q, params.two_alpha_star)


@dataclass
class PicardResult:
    trajectory: Trajectory
    diff_norms: list
    factors: list
    contracting: bool
    message: str = ""
    per_iteration: list = dc_field(default_factory=list, repr=False)

    def final_state(self) -> Field:
        return self.trajectory.states[-1]


def picard_iterate(phi: Field, V, params: ModelParams, T: float,
                   iters: int = 6, nodes: int = 17,
                   nonlinear: bool = True) -> PicardResult:
    """Fixed-point iteration of the Duhamel map on [0, T].

    u^0(t) = e^{itL} phi; each sweep evaluates the integral term by
    trapezoid over the stored nodes, accumulated recursively so one sweep
    costs O(nodes) transforms.  Successive differences are measured in the
    two-pair mixed norm (no derivative); three consecutive factors above 1
    flag the run as outside the contraction regime.
    """
    if nodes < 16:
        nodes = 16
    grid = phi.grid
    Vs = _potential_samples(V, grid)
    pairs = admissible_pairs(params)
    base = linear_propagator_trajectory(phi, V, params, T, nodes)
    times = base.times
    dt = times[1] - times[0]
    if not nonlinear:
        return PicardResult(trajectory=base, diff_norms=[0.0], factors=[],
                            contracting=True,
                            message="nonlinearity off: the linear flow is the fixed point")

    if Vs is None:
        lin = np.exp(-1j * dt * grid.ksq)

        def prop(vals):
            return backend.ifftn(lin * backend.fftn(vals))
    else:
        sub = dt / 8.0
        linf = np.exp(-1j * sub * grid.ksq)
        halfv = np.exp(-1j * 0.5 * sub * Vs)

        def prop(vals):
            out = vals
            for _ in range(8):
                out = backend.ifftn(linf * backend.fftn(out * halfv)) * halfv
            return out

    spec = MixedNormSpec(pairs=pairs, T=T, with_derivative=False)
    cur = [s.values.copy() for s in base.states]
    diff_norms = []
    factors = []
    contracting = True
    message = ""
    for _ in range(iters):
        forces = [_nonlocal_force(v, params, grid) for v in cur]
        new = [base.states[0].values.copy()]
        P = np.zeros(grid.shape, dtype=np.complex128)
        for j in range(1, nodes):
            P = prop(P + 0.5 * dt * forces[j - 1]) + 0.5 * dt * forces[j]
            new.append(base.states[j].values + 1j * P)
        dtraj = Trajectory(times, [Field(grid, new[j] - cur[j])
                                   for j in range(nodes)])
        d = sum(mixed_norm(dtraj, spec))
        diff_norms.append(d)
        if len(diff_norms) >= 2 and diff_norms[-2] > 0:
            factors.append(diff_norms[-1] / diff_norms[-2])
        cur = new
        if len(factors) >= 3 and all(f > 1.0 for f in factors[-3:]):
            contracting = False
            message = ("outside contraction regime: three consecutive "
                       "difference ratios above 1 (data too large for the "
                       "small-data fixed point)")
            break
    traj = Trajectory(times, [Field(grid, v) for v in cur])
    return PicardResult(trajectory=traj, diff_norms=diff_norms,
                        factors=factors, contracting=contracting,
                        message=message)
