"""Periodic tensor-product grids, sampled complex fields, model parameters.

Conventions used throughout the package:

* domain [-L, L)^d with n points per axis, spacing h = 2L/n (so h*n = 2L
  exactly);
* angular wavenumbers k_j = pi*j/L, j = -n/2 .. n/2-1, stored in FFT order;
* every integral is the midpoint/trapezoid rule on the torus with weight
  h^d, and the matching Plancherel weight for DFT sums is h^d / n^d.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import GridMismatchError, ParameterError


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class Grid:
    """Periodic grid on [-L, L)^d."""

    d: int
    n: int
    L: float

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ParameterError(f"dimension d={self.d} not supported (1..3)")
        if not _is_power_of_two(self.n) or self.n < 8:
            raise ParameterError(f"n={self.n} must be a power of two, >= 8")
        if not self.L > 0:
            raise ParameterError("half-width L must be positive")

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def npts(self) -> int:
        return self.n ** self.d

    @property
    def shape(self):
        return (self.n,) * self.d

    @property
    def quad_weight(self) -> float:
        """Weight of one sample in physical-space integrals."""
        return self.h ** self.d

    @property
    def plancherel_weight(self) -> float:
        """Weight of one mode in DFT-coefficient sums: h^d / n^d."""
        return self.h ** self.d / self.n ** self.d

    @cached_property
    def axis(self) -> np.ndarray:
        """Physical coordinates along one axis."""
        return -self.L + self.h * np.arange(self.n)

    @cached_property
    def k_axis(self) -> np.ndarray:
        """Angular wavenumbers pi*j/L along one axis, FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.h)

    @cached_property
    def ksq(self) -> np.ndarray:
        """|k|^2 on the full grid (FFT order)."""
        k1 = self.k_axis
        out = np.zeros(self.shape)
        for ax in range(self.d):
            sh = [1] * self.d
            sh[ax] = self.n
            out = out + (k1 ** 2).reshape(sh)
        return out

    @cached_property
    def rsq(self) -> np.ndarray:
        """|x|^2 on the full grid."""
        x1 = self.axis
        out = np.zeros(self.shape)
        for ax in range(self.d):
            sh = [1] * self.d
            sh[ax] = self.n
            out = out + (x1 ** 2).reshape(sh)
        return out

    @cached_property
    def _symbol_cache(self) -> dict:
        return {}

    def same(self, other: "Grid") -> bool:
        return self.d == other.d and self.n == other.n and self.L == other.L

    def check_same(self, other: "Grid") -> None:
        if not self.same(other):
            raise GridMismatchError(f"grid mismatch: {self} vs {other}")


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples of a function on a Grid (row-major, immutable by
    convention: operations return new Fields and never mutate ``values``)."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.shape != self.grid.shape:
            if vals.size == self.grid.npts:
                vals = vals.reshape(self.grid.shape)
            else:
                raise ParameterError(
                    f"values size {vals.size} != n^d = {self.grid.npts}")
        if vals.dtype != np.complex128:
            vals = vals.astype(np.complex128)
        vals = np.ascontiguousarray(vals)
        object.__setattr__(self, "values", vals)

    @classmethod
    def zeros(cls, grid: Grid) -> "Field":
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128))

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())

    def __add__(self, other: "Field") -> "Field":
        self.grid.check_same(other.grid)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        self.grid.check_same(other.grid)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, scalar) -> "Field":
        return Field(self.grid, self.values * scalar)

    __rmul__ = __mul__


def gaussian(grid: Grid, width: float = 1.0, center=None, amplitude: float = 1.0) -> Field:
    """amplitude * exp(-|x-center|^2 / (2 width^2)) sampled on the grid."""
    if center is None:
        r2 = grid.rsq
    else:
        center = np.atleast_1d(np.asarray(center, dtype=float))
        x1 = grid.axis
        r2 = np.zeros(grid.shape)
        for ax in range(grid.d):
            sh = [1] * grid.d
            sh[ax] = grid.n
            r2 = r2 + ((x1 - center[ax]) ** 2).reshape(sh)
    return Field(grid, amplitude * np.exp(-r2 / (2.0 * width ** 2)))


@dataclass(frozen=True)
class ModelParams:
    """Model parameters: dimension d, interaction order alpha, subcritical
    exponent q, with the derived critical exponent (2d - alpha)/(d - 2)."""

    d: int
    alpha: float
    q: float

    def __post_init__(self):
        if self.d < 3:
            raise ParameterError("model parameters require d >= 3")
        if not (0.0 < self.alpha < self.d):
            raise ParameterError(f"alpha={self.alpha} outside (0, d)")
        lo = (2 * self.d - self.alpha) / self.d
        hi = (2 * self.d - self.alpha + 2) / self.d
        if not (lo < self.q < hi):
            raise ParameterError(
                f"q={self.q} outside the admissible window ({lo}, {hi})")

    @property
    def two_alpha_star(self) -> float:
        return (2 * self.d - self.alpha) / (self.d - 2)

    @property
    def q_window(self):
        lo = (2 * self.d - self.alpha) / self.d
        hi = (2 * self.d - self.alpha + 2) / self.d
        return lo, hi

    @property
    def subcrit_dilation_power(self) -> float:
        """Exponent of s in D_q(u_s) = s^(d(q-2)+alpha) D_q(u)."""
        return self.d * (self.q - 2.0) + self.alpha

    @property
    def crit_dilation_power(self) -> float:
        """Exponent of s in the critical-term dilation law: 2*(2d-alpha)/(d-2)."""
        return 2.0 * self.two_alpha_star

    @property
    def gn_exponent(self) -> float:
        """Lebesgue exponent 2dq/(2d-alpha) used in the interpolation chain."""
        return 2.0 * self.d * self.q / (2.0 * self.d - self.alpha)
