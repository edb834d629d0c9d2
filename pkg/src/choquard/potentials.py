"""Potential library: sampling, L^{d/2} norms, Kato norms, and the
admissibility conditions for the perturbed propagator.

Closed-form radial kinds (zero, gaussian_well, yukawa) get their norms from
1-D adaptive radial quadrature; for the Kato norm the inner integral at
radius t uses the layer decomposition

    int |V(y)| / |x - y| dy = (4 pi / t) int_0^t |V(s)| s^2 ds
                              + 4 pi int_t^inf |V(s)| s ds        (d = 3),

which is exact for radial |V| and free of grid bias.  Grid-sampled
potentials use zero-padded FFT quadrature of the 1/|x-y| weight with the
coincident cell replaced by the analytic ball value 2 pi (h/2)^2.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import backend
from .errors import GridMismatchError, ParameterError
from .grids import Field, Grid
from .landscape import unit_ball_volume


def kato_threshold(d: int) -> float:
    """d (d-2) alpha(d), with alpha(d) the unit-ball volume."""
    return d * (d - 2) * unit_ball_volume(d)


@dataclass(frozen=True)
class PotentialNorms:
    kato: float
    kato_neg: float
    lp_halfd: float
    neg_lp_halfd: float


class Potential:
    """A potential of one of the supported kinds.  Sampling and norms are
    cached per grid."""

    def __init__(self, kind, **kw):
        if kind not in ("zero", "gaussian_well", "yukawa", "grid_sampled"):
            raise ParameterError(f"unknown potential kind {kind!r}")
        self.kind = kind
        self.params = kw
        self._samples = {}
        self._norms = {}

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def gaussian_well(cls, depth: float, width: float):
        if width <= 0:
            raise ParameterError("gaussian_well width must be positive")
        return cls("gaussian_well", depth=float(depth), width=float(width))

    @classmethod
    def yukawa(cls, strength: float, range_: float):
        if range_ <= 0:
            raise ParameterError("yukawa range must be positive")
        return cls("yukawa", strength=float(strength), range=float(range_))

    @classmethod
    def grid_sampled(cls, field: Field):
        return cls("grid_sampled", field=field)

    # -- basic properties --------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return self.kind == "zero"

    def spec_string(self) -> str:
        if self.kind == "zero":
            return "zero"
        if self.kind == "gaussian_well":
            return (f"gaussian_well:depth={self.params['depth']},"
                    f"width={self.params['width']}")
        if self.kind == "yukawa":
            return (f"yukawa:strength={self.params['strength']},"
                    f"range={self.params['range']}")
        return "grid_sampled"

    def radial(self, r):
        """Closed-form radial profile V(r) (not defined for grid_sampled)."""
        r = np.asarray(r, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(r)
        if self.kind == "gaussian_well":
            p = self.params
            return p["depth"] * np.exp(-(r / p["width"]) ** 2)
        if self.kind == "yukawa":
            p = self.params
            with np.errstate(divide="ignore"):
                out = p["strength"] * np.exp(-r / p["range"]) / r
            return out
        raise ParameterError("grid_sampled potential has no radial profile")

    # -- sampling ----------------------------------------------------------
    def sample_array(self, grid: Grid) -> np.ndarray:
        """Real samples on the grid.  The yukawa origin sample is the cell
        mean of its integrable 1/r singularity, 2 pi (h/2)^2 / h^3."""
        key = (grid.d, grid.n, grid.L)
        cached = self._samples.get(key)
        if cached is not None:
            return cached
        if self.kind == "grid_sampled":
            f = self.params["field"]
            f.grid.check_same(grid)
            out = f.values.real.copy()
        elif self.kind == "zero":
            out = np.zeros(grid.shape)
        else:
            r = np.sqrt(grid.rsq)
            if self.kind == "yukawa":
                p = self.params
                out = np.zeros(grid.shape)
                nz = r > 0
                out[nz] = p["strength"] * np.exp(-r[nz] / p["range"]) / r[nz]
                if grid.d != 3:
                    raise ParameterError("yukawa sampling implemented for d=3")
                cell_mean = 2.0 * math.pi * (grid.h / 2.0) ** 2 / grid.h ** 3
                out[r == 0] = p["strength"] * cell_mean
            else:
                out = self.radial(r)
        self._samples[key] = out
        return out

    def sample(self, grid: Grid) -> Field:
        return Field(grid, self.sample_array(grid).astype(np.complex128))

    # -- norms ---------------------------------------------------------------
    def norms(self, grid: Grid) -> PotentialNorms:
        key = (grid.d, grid.n, grid.L)
        cached = self._norms.get(key)
        if cached is None:
            cached = self._compute_norms(grid)
            self._norms[key] = cached
        return cached

    def _compute_norms(self, grid: Grid) -> PotentialNorms:
        if self.kind == "zero":
            return PotentialNorms(0.0, 0.0, 0.0, 0.0)
        if self.kind == "grid_sampled":
            return self._grid_norms(grid)
        return self._radial_norms(grid)

    def _radial_norms(self, grid: Grid) -> PotentialNorms:
        d = grid.d
        if d != 3:
            raise ParameterError("potential norms implemented for d = 3")
        halfd = d / 2.0

        def absV(s):
            return abs(float(self.radial(s)))

        def negV(s):
            return max(-float(self.radial(s)), 0.0)

        lp, _ = quad(lambda s: absV(s) ** halfd * s ** 2, 0, np.inf, limit=200)
        lp = (4.0 * math.pi * lp) ** (1.0 / halfd)
        lpn, _ = quad(lambda s: negV(s) ** halfd * s ** 2, 0, np.inf, limit=200)
        lpn = (4.0 * math.pi * lpn) ** (1.0 / halfd)
        kato = self._radial_kato(absV, grid)
        if lpn == 0.0:
            kato_neg = 0.0
        elif min(float(self.radial(0.01)), float(self.radial(1.0))) >= 0:
            kato_neg = 0.0
        elif max(float(self.radial(0.01)), float(self.radial(1.0))) <= 0:
            kato_neg = kato
        else:
            kato_neg = self._radial_kato(negV, grid)
        return PotentialNorms(kato, kato_neg, lp, lpn)

    @staticmethod
    def _radial_kato(profile, grid: Grid) -> float:
        """sup_x int |V(y)|/|x-y| dy for radial |V| via the layer formula."""
        def inner(t):
            if t == 0.0:
                val, _ = quad(lambda s: profile(s) * s, 0, np.inf, limit=200)
                return 4.0 * math.pi * val
            near, _ = quad(lambda s: profile(s) * s * s, 0, t, limit=200)
            far, _ = quad(lambda s: profile(s) * s, t, np.inf, limit=200)
            return 4.0 * math.pi * (near / t + far)

        ts = np.concatenate(([0.0], np.geomspace(1e-3, 2 * grid.L, 160)))
        vals = [inner(float(t)) for t in ts]
        return float(max(vals))

    def _grid_norms(self, grid: Grid) -> PotentialNorms:
        if grid.d != 3:
            raise ParameterError("grid Kato quadrature implemented for d = 3")
        V = self.sample_array(grid)
        w = grid.quad_weight
        halfd = grid.d / 2.0
        lp = float(np.sum(np.abs(V) ** halfd) * w) ** (1.0 / halfd)
        neg = np.minimum(V, 0.0)
        lpn = float(np.sum(np.abs(neg) ** halfd) * w) ** (1.0 / halfd)
        kato = self._grid_kato(np.abs(V), grid)
        kato_neg = self._grid_kato(np.abs(neg), grid) if lpn > 0 else 0.0
        return PotentialNorms(kato, kato_neg, lp, lpn)

    @staticmethod
    def _grid_kato(absV: np.ndarray, grid: Grid) -> float:
        """Grid quadrature of sup_x sum_y |V(y)| / |x-y| h^3, evaluated for
        every x at once by one zero-padded convolution with the sampled
        1/|x| kernel (coincident cell -> analytic ball value)."""
        n, h = grid.n, grid.h
        m = 2 * n
        pad = np.zeros((m, m, m))
        pad[:n, :n, :n] = absV
        ax = h * np.fft.fftfreq(m, d=1.0 / m)  # signed offsets, FFT order
        X, Y, Z = np.meshgrid(ax, ax, ax, indexing="ij", sparse=True)
        R = np.sqrt(X * X + Y * Y + Z * Z)
        kern = np.zeros_like(R)
        nzr = R > 0
        kern[nzr] = 1.0 / R[nzr]
        kern[~nzr] = 2.0 * math.pi * (h / 2.0) ** 2 / h ** 3
        conv = backend.irfftn(backend.rfftn(pad) * backend.rfftn(kern), (m, m, m))
        return float(np.max(conv[:n, :n, :n]) * h ** 3)


def parse_potential(spec: str) -> Potential:
    """Parse "zero", "gaussian_well:depth=-0.5,width=2",
    "yukawa:strength=1,range=1"."""
    spec = spec.strip()
    if spec in ("zero", "none", "0"):
        return Potential.zero()
    if ":" not in spec:
        raise ParameterError(f"malformed potential spec {spec!r}")
    kind, _, rest = spec.partition(":")
    kv = {}
    for item in rest.split(","):
        if "=" not in item:
            raise ParameterError(f"malformed potential option {item!r}")
        k, _, v = item.partition("=")
        kv[k.strip()] = float(v)
    if kind == "gaussian_well":
        return Potential.gaussian_well(kv["depth"], kv["width"])
    if kind == "yukawa":
        return Potential.yukawa(kv["strength"], kv["range"])
    raise ParameterError(f"unknown potential kind {kind!r}")


@dataclass(frozen=True)
class ConditionReport:
    norms: PotentialNorms
    kato_threshold: float
    sobolev_S: float
    in_kato_class: bool
    kato_condition: bool
    sobolev_condition: str  # "pass" | "marginal" | "fail"

    def passes(self) -> bool:
        return (self.in_kato_class and self.kato_condition
                and self.sobolev_condition != "fail")

    def as_dict(self) -> dict:
        return {
            "kato_norm": self.norms.kato,
            "kato_norm_negative_part": self.norms.kato_neg,
            "lp_halfd_norm": self.norms.lp_halfd,
            "neg_lp_halfd_norm": self.norms.neg_lp_halfd,
            "kato_threshold": self.kato_threshold,
            "sobolev_S": self.sobolev_S,
            "in_kato_class": self.in_kato_class,
            "kato_condition": self.kato_condition,
            "sobolev_condition": self.sobolev_condition,
            "pass": self.passes(),
        }


def check_conditions(V: Potential, grid: Grid, sobolev_S: float) -> ConditionReport:
    """Evaluate the admissibility conditions: V in Kato & L^{d/2}, the
    negative-part Kato norm below d(d-2)alpha(d), and |V_-|_{d/2} <= S.
    Equality in the last is flagged marginal (the coercivity constant
    degenerates there)."""
    norms = V.norms(grid)
    thr = kato_threshold(grid.d)
    finite = all(np.isfinite(x) for x in
                 (norms.kato, norms.kato_neg, norms.lp_halfd, norms.neg_lp_halfd))
    kato_ok = norms.kato_neg < thr
    gap = norms.neg_lp_halfd - sobolev_S
    if gap > 0:
        sob = "fail"
    elif gap > -1e-12 * sobolev_S:
        sob = "marginal"
    else:
        sob = "pass"
    return ConditionReport(norms=norms, kato_threshold=thr, sobolev_S=sobolev_S,
                           in_kato_class=finite, kato_condition=bool(kato_ok),
                           sobolev_condition=sob)
