"""Uniform periodic grids on [-L, L)^d, sampled fields and spectral multipliers."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import fft as sfft
from scipy import integrate

from .specfun import DomainError

__all__ = [
    "ConsistencyError",
    "ResolutionError",
    "Grid",
    "Field",
    "InitialData",
    "sample_u0",
    "lp_norm",
    "local_mass",
    "apply_multiplier",
    "export_csv",
]


class ConsistencyError(RuntimeError):
    """An internal numerical consistency check failed."""


class ResolutionError(RuntimeError):
    """The grid does not resolve the requested object."""


@dataclass(frozen=True)
class Grid:
    dim: int
    n: int
    half_width: float

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise DomainError("only d = 1 and d = 2 grids are supported")
        if self.n < 16 or self.n & (self.n - 1):
            raise DomainError(f"n must be a power of two >= 16, got {self.n}")
        if not (self.half_width > 0 and math.isfinite(self.half_width)):
            raise DomainError("half_width must be positive")

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    @property
    def origin_index(self) -> tuple:
        return (self.n // 2,) * self.dim

    @cached_property
    def x(self) -> np.ndarray:
        """1-d coordinates ``-L + j h``."""
        return -self.half_width + self.h * np.arange(self.n)

    @cached_property
    def radius(self) -> np.ndarray:
        """``|x|`` on the full grid."""
        if self.dim == 1:
            return np.abs(self.x)
        X, Y = np.meshgrid(self.x, self.x, indexing="ij")
        return np.hypot(X, Y)

    def mesh(self) -> tuple:
        return tuple(np.meshgrid(*([self.x] * self.dim), indexing="ij"))

    @cached_property
    def freq_axes(self) -> tuple:
        """Angular frequencies of the full FFT along each axis."""
        k = 2 * math.pi * sfft.fftfreq(self.n, self.h)
        return (k,) * self.dim

    @cached_property
    def rfreq_axes(self) -> tuple:
        """Angular frequencies matching ``rfftn`` output (last axis halved)."""
        full = 2 * math.pi * sfft.fftfreq(self.n, self.h)
        half = 2 * math.pi * sfft.rfftfreq(self.n, self.h)
        return (full,) * (self.dim - 1) + (half,)

    def rfft(self, values: np.ndarray) -> np.ndarray:
        return sfft.rfftn(values, axes=tuple(range(-self.dim, 0)))

    def irfft(self, coeffs: np.ndarray) -> np.ndarray:
        return sfft.irfftn(coeffs, s=self.shape, axes=tuple(range(-self.dim, 0)))

    def delta_spectrum(self) -> np.ndarray:
        """rfft of the discrete unit-mass delta at the origin cell."""
        sign = np.ones(self.rfreq_axes[-1].size)
        sign[1::2] = -1.0
        if self.dim == 1:
            return sign / self.cell_volume
        s0 = np.ones(self.n)
        s0[1::2] = -1.0
        return np.multiply.outer(s0, sign) / self.cell_volume

    def boundary_max(self, values: np.ndarray) -> float:
        """Largest |value| on the outermost layer of cells (|x_i| = L)."""
        v = np.abs(values)
        if self.dim == 1:
            return float(v[0])
        return float(max(v[0, :].max(), v[:, 0].max()))

    def rescaled(self, factor: float) -> "Grid":
        return Grid(self.dim, self.n, self.half_width * factor)


@dataclass(frozen=True, eq=False)
class Field:
    """Real samples on a grid. The value array is made read-only."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise DomainError(f"values shape {v.shape} does not match grid {self.grid.shape}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def with_values(self, values) -> "Field":
        return Field(self.grid, values)

    @property
    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def at(self, point) -> float:
        """Value at the grid point nearest ``point``."""
        p = np.atleast_1d(np.asarray(point, dtype=float))
        idx = tuple(int(round((c + self.grid.half_width) / self.grid.h)) % self.grid.n for c in p)
        return float(self.values[idx])


@dataclass(frozen=True)
class InitialData:
    kind: str
    tau: float = 0.0
    R: float = 0.0
    c: float = 0.0
    sigma: float = 0.0
    amplitude: float = 1.0
    gamma: float = 0.0
    core: float = 1.0

    def __post_init__(self):
        if self.kind == "singular":
            if not self.tau > 0:
                raise DomainError("singular datum needs tau > 0")
            if not self.R > 1:
                raise DomainError("singular datum needs support radius R > 1")
        elif self.kind == "gaussian":
            if not self.sigma > 0:
                raise DomainError("gaussian datum needs sigma > 0")
        elif self.kind == "power_tail":
            if not (self.gamma > 0 and self.core > 0):
                raise DomainError("power-tail datum needs gamma > 0 and core > 0")
        elif self.kind != "constant":
            raise DomainError(f"unknown initial-data kind {self.kind!r}")

    @classmethod
    def singular(cls, tau: float, R: float) -> "InitialData":
        """``|x|^-tau`` on the ball of radius R, zero outside."""
        return cls("singular", tau=tau, R=R)

    @classmethod
    def constant(cls, c: float) -> "InitialData":
        return cls("constant", c=c)

    @classmethod
    def gaussian(cls, sigma: float, amplitude: float = 1.0) -> "InitialData":
        """``amplitude * exp(-|x|^2 / (2 sigma^2))``."""
        return cls("gaussian", sigma=sigma, amplitude=amplitude)

    @classmethod
    def power_tail(cls, gamma: float, core: float = 1.0, amplitude: float = 1.0) -> "InitialData":
        """``amplitude * (1 + |x/core|^2)^(-gamma/2)``; in L_p exactly when gamma p > d."""
        return cls("power_tail", gamma=gamma, core=core, amplitude=amplitude)

    def scaled(self, factor: float) -> "InitialData":
        from dataclasses import replace

        if self.kind == "constant":
            return replace(self, c=self.c * factor)
        if self.kind == "singular":
            raise DomainError("the singular datum has no amplitude parameter")
        return replace(self, amplitude=self.amplitude * factor)


def _origin_cell_average(dim: int, tau: float, h: float) -> float:
    # mean of |x|^-tau over the cell [-h/2, h/2]^d
    if dim == 1:
        return (h / 2) ** (-tau) / (1.0 - tau)
    # (h/2)^-tau * int_{[0,1]^2} |u|^-tau du, evaluated in polar form
    val, _ = integrate.quad(lambda th: math.cos(th) ** (tau - 2.0), 0.0, math.pi / 4, epsabs=0, epsrel=1e-13)
    return (h / 2) ** (-tau) * 2.0 / (2.0 - tau) * val


def sample_u0(g: Grid, data: InitialData) -> Field:
    """Sample initial data; the singular datum gets its cell average at the origin."""
    r = g.radius
    if data.kind == "constant":
        return Field(g, np.full(g.shape, float(data.c)))
    if data.kind == "gaussian":
        return Field(g, data.amplitude * np.exp(-0.5 * (r / data.sigma) ** 2))
    if data.kind == "power_tail":
        return Field(g, data.amplitude * (1.0 + (r / data.core) ** 2) ** (-data.gamma / 2))
    if data.tau >= g.dim:
        raise DomainError(f"tau = {data.tau} >= d = {g.dim}: singularity not integrable")
    if not g.h < data.R / 8:
        raise ResolutionError(f"grid spacing {g.h} does not resolve R = {data.R}")
    if data.R >= g.half_width:
        raise ResolutionError("support ball does not fit inside the domain")
    with np.errstate(divide="ignore"):
        v = np.where(r <= data.R, r ** (-data.tau), 0.0)
    v[g.origin_index] = _origin_cell_average(g.dim, data.tau, g.h)
    return Field(g, v)


def lp_norm(f: Field, p: float) -> float:
    if not p >= 1:
        raise DomainError("p must be >= 1")
    v = np.abs(f.values)
    if math.isinf(p):
        return float(v.max())
    if p == 1:
        return float(v.sum() * f.grid.cell_volume)
    m = v.max()
    if m == 0:
        return 0.0
    return float(m * (np.sum((v / m) ** p) * f.grid.cell_volume) ** (1.0 / p))


def local_mass(f: Field, eps: float) -> float:
    """Integral over the ball B(0, eps).

    Cells straddling the sphere are weighted linearly by how far their
    centre lies inside, so in d = 1 a constant field gives exactly 2 eps.
    """
    g = f.grid
    if not eps > 0:
        raise DomainError("eps must be positive")
    if eps >= g.half_width:
        raise DomainError(f"ball of radius {eps} does not fit in [-{g.half_width}, {g.half_width})")
    w = np.clip((eps - g.radius) / g.h + 0.5, 0.0, 1.0)
    return float(np.sum(w * f.values) * g.cell_volume)


def _multiplier_on_full_grid(g: Grid, m) -> np.ndarray:
    if callable(m):
        axes = g.freq_axes
        if g.dim == 1:
            xi = axes[0][:, None]
        else:
            kx, ky = np.meshgrid(*axes, indexing="ij")
            xi = np.stack([kx, ky], axis=-1)
        return np.asarray(m(xi), dtype=float).reshape(g.shape)
    arr = np.asarray(m, dtype=float)
    if arr.shape != g.shape:
        raise DomainError("multiplier array must match the full FFT shape")
    return arr


def apply_multiplier(f: Field, m) -> Field:
    """Multiply the discrete Fourier transform of ``f`` by ``m(xi)``.

    ``m`` is a callable on frequency vectors (last axis = components) or an
    array on the full FFT lattice. A real result is required: an imaginary
    residue above 1e-8 of the field norm raises :class:`ConsistencyError`.
    """
    g = f.grid
    mult = _multiplier_on_full_grid(g, m)
    out = sfft.ifftn(sfft.fftn(f.values) * mult)
    scale = max(float(np.max(np.abs(out))), 1e-300)
    resid = float(np.max(np.abs(out.imag)))
    if resid > 1e-8 * scale:
        raise ConsistencyError(f"imaginary residue {resid:.3e} exceeds tolerance")
    return Field(g, out.real)


def export_csv(f: Field, path) -> None:
    """Write columns ``x[, y], value``."""
    g = f.grid
    names = ["x", "y"][: g.dim] + ["value"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        if g.dim == 1:
            for xv, v in zip(g.x, f.values):
                w.writerow([repr(float(xv)), repr(float(v))])
        else:
            for i, xv in enumerate(g.x):
                for j, yv in enumerate(g.x):
                    w.writerow([repr(float(xv)), repr(float(yv)), repr(float(f.values[i, j]))])
