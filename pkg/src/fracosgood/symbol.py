"""Spectral measures on the unit sphere and the operator symbol.

The symbol of the spatial operator is ``psi(xi) = |xi|^beta * omega(xi/|xi|)``
with ``omega(theta) = int |theta . eta|^beta nu(d eta)``.

Supported measures:

* finitely many atoms (any dimension; in d = 1 the sphere is {-1, +1}),
* the uniform measure with a given total mass,
* on the circle (d = 2), a density tabulated at equispaced angles.

For a tabulated density the integral is evaluated exactly for the trigonometric
interpolant of the samples, through the closed-form Fourier coefficients
of ``|cos u|^beta``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, rgamma

from .specfun import DomainError

__all__ = [
    "SpectralMeasure",
    "Symbol",
    "H2Report",
    "omega_nu",
    "symbol_psi",
    "h2_check",
    "DENSITY_SAMPLES",
]

DENSITY_SAMPLES = 256
# relative level below which omega counts as zero (cos(pi/2) is 6e-17 in floats)
_OMEGA_FLOOR = 1e-12


def _abs_cos_coeffs(beta: float, m: np.ndarray) -> np.ndarray:
    """``int_0^{2pi} |cos u|^beta cos(m u) du`` for integer ``m``."""
    m = np.asarray(m)
    even = (m % 2) == 0
    out = np.zeros(m.shape)
    me = m[even].astype(float)
    logpart = gammaln(beta + 1.0) - beta * math.log(2.0) - gammaln(1.0 + (beta + me) / 2.0)
    out[even] = 2.0 * math.pi * np.exp(logpart) * rgamma(1.0 + (beta - me) / 2.0)
    return out


@dataclass(frozen=True)
class SpectralMeasure:
    """A finite measure on the unit sphere of R^d (d in {1, 2}).

    Use the constructors :meth:`atoms`, :meth:`uniform` and
    :meth:`density` rather than the raw initializer.
    """

    dim: int
    kind: str
    directions: np.ndarray | None = None
    weights: np.ndarray | None = None
    samples: np.ndarray | None = None
    mass: float = 1.0

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise DomainError(f"dimension must be 1 or 2, got {self.dim}")
        if self.kind not in ("atoms", "uniform", "density"):
            raise DomainError(f"unknown measure kind {self.kind!r}")
        if self.kind == "atoms":
            w = np.asarray(self.weights, dtype=float)
            if w.ndim != 1 or w.size == 0 or np.any(~np.isfinite(w)) or np.any(w < 0):
                raise DomainError("atom weights must be finite and non-negative")
            if not w.sum() > 0:
                raise DomainError("total mass must be positive")
        elif self.kind == "uniform":
            if not (math.isfinite(self.mass) and self.mass > 0):
                raise DomainError("total mass must be positive")
        else:
            if self.dim != 2:
                raise DomainError("tabulated densities are supported on the circle only")
            s = np.asarray(self.samples, dtype=float)
            if s.ndim != 1 or s.size < 8 or np.any(~np.isfinite(s)) or np.any(s < 0):
                raise DomainError("density samples must be finite and non-negative")
            if not s.sum() > 0:
                raise DomainError("total mass must be positive")

    # -- constructors -----------------------------------------------------

    @classmethod
    def atoms(cls, dim: int, directions, weights) -> "SpectralMeasure":
        """Point masses. In d = 1 ``directions`` are signs; in d = 2 angles."""
        d = np.asarray(directions, dtype=float).ravel()
        w = np.asarray(weights, dtype=float).ravel()
        if d.shape != w.shape:
            raise DomainError("directions and weights must have equal length")
        if dim == 1 and not np.all(np.abs(d) == 1.0):
            raise DomainError("in d = 1 atom directions must be +1 or -1")
        return cls(dim=dim, kind="atoms", directions=d, weights=w)

    @classmethod
    def symmetric(cls, mass: float = 1.0) -> "SpectralMeasure":
        """d = 1 measure with mass/2 on each of +1 and -1 (so omega = mass)."""
        return cls.atoms(1, [1.0, -1.0], [mass / 2, mass / 2])

    @classmethod
    def uniform(cls, dim: int, mass: float = 1.0) -> "SpectralMeasure":
        """Normalized surface measure times ``mass``."""
        return cls(dim=dim, kind="uniform", mass=float(mass))

    @classmethod
    def density(cls, samples) -> "SpectralMeasure":
        """Density w.r.t. arc length at angles ``2 pi j / len(samples)``."""
        return cls(dim=2, kind="density", samples=np.asarray(samples, dtype=float))

    @classmethod
    def density_from_function(cls, fn, n: int = DENSITY_SAMPLES) -> "SpectralMeasure":
        phi = 2 * math.pi * np.arange(n) / n
        return cls.density(fn(phi))

    # -- derived quantities ----------------------------------------------

    @property
    def total_mass(self) -> float:
        if self.kind == "atoms":
            return float(np.sum(self.weights))
        if self.kind == "uniform":
            return self.mass
        return float(np.mean(self.samples) * 2 * math.pi)

    def density_at(self, phi) -> np.ndarray:
        """Trigonometric interpolant of a tabulated density."""
        if self.kind != "density":
            raise DomainError("measure has no tabulated density")
        n = self.samples.size
        c = np.fft.fft(self.samples) / n
        m = np.fft.fftfreq(n, 1.0 / n)
        phi = np.asarray(phi, dtype=float)
        val = np.tensordot(np.exp(1j * np.multiply.outer(phi, m)), c, axes=([-1], [0]))
        return val.real

    def omega_angles(self, beta: float, theta) -> np.ndarray:
        """``omega`` at angles ``theta`` (d = 2) or at signs ``theta`` (d = 1)."""
        theta = np.asarray(theta, dtype=float)
        if self.dim == 1:
            if self.kind == "uniform":
                return np.full(theta.shape, self.mass)
            prod = np.abs(np.multiply.outer(theta, self.directions))
            return (prod**beta) @ self.weights
        if self.kind == "atoms":
            prod = np.abs(np.cos(np.subtract.outer(theta, self.directions)))
            return (prod**beta) @ self.weights
        if self.kind == "uniform":
            c0 = _abs_cos_coeffs(beta, np.array([0]))[0]
            return np.full(theta.shape, self.mass * c0 / (2 * math.pi))
        n = self.samples.size
        c = np.fft.rfft(self.samples) / n
        m = np.arange(c.size)
        coef = c * _abs_cos_coeffs(beta, m)
        coef[1:] *= 2.0
        if n % 2 == 0:
            coef[-1] /= 2.0
        even = m % 2 == 0
        ph = np.exp(1j * np.multiply.outer(theta, m[even]))
        return (ph @ coef[even]).real


@dataclass(frozen=True)
class Symbol:
    """Operator symbol ``psi_beta`` attached to a spectral measure."""

    beta: float
    measure: SpectralMeasure
    _omega_min: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (0.0 < self.beta < 2.0):
            raise DomainError(f"beta must lie in (0, 2), got {self.beta}")
        rep = h2_check(self, 512)
        if not rep.min_omega > _OMEGA_FLOOR * self.measure.total_mass:
            raise DomainError(f"omega_nu is not strictly positive (min {rep.min_omega:.3e})")
        object.__setattr__(self, "_omega_min", rep.min_omega)

    @property
    def dim(self) -> int:
        return self.measure.dim

    @property
    def is_isotropic(self) -> bool:
        m = self.measure
        if m.kind == "uniform" or m.dim == 1:
            return True
        return False

    def omega(self, theta) -> np.ndarray:
        return omega_nu(self, theta)

    def psi(self, xi) -> np.ndarray:
        return symbol_psi(self, xi)

    def psi_on_axes(self, *axes) -> np.ndarray:
        """Symbol on the tensor grid spanned by 1-d frequency ``axes``."""
        if len(axes) != self.dim:
            raise DomainError("number of axes must equal the dimension")
        if self.dim == 1:
            k = np.abs(axes[0])
            return k**self.beta * self.measure.omega_angles(self.beta, np.ones(1))[0]
        kx, ky = np.meshgrid(axes[0], axes[1], indexing="ij")
        r = np.hypot(kx, ky)
        if self.is_isotropic:
            return r**self.beta * self.measure.omega_angles(self.beta, np.zeros(1))[0]
        ang = np.arctan2(ky, kx)
        om = self.measure.omega_angles(self.beta, ang.ravel()).reshape(r.shape)
        return r**self.beta * om


def _as_directions(sym: Symbol, theta) -> np.ndarray:
    th = np.asarray(theta, dtype=float)
    if sym.dim == 1:
        th = th.reshape(th.shape + (1,)) if th.ndim == 0 or th.shape[-1] != 1 else th
    if th.shape[-1] != sym.dim:
        raise DomainError(f"direction must have {sym.dim} components")
    return th


def omega_nu(sym: Symbol, theta) -> np.ndarray:
    """``omega_nu(theta)`` for unit vectors ``theta`` (last axis = components)."""
    th = _as_directions(sym, theta)
    nrm = np.sqrt(np.sum(th**2, axis=-1))
    if np.any(np.abs(nrm - 1.0) > 1e-12):
        raise DomainError("theta must be a unit vector")
    if sym.dim == 1:
        out = sym.measure.omega_angles(sym.beta, th[..., 0])
    else:
        out = sym.measure.omega_angles(sym.beta, np.arctan2(th[..., 1], th[..., 0]))
    return out if np.ndim(out) else float(out)


def symbol_psi(sym: Symbol, xi) -> np.ndarray:
    """``psi(xi) = |xi|^beta omega(xi/|xi|)``, with ``psi(0) = 0``."""
    x = _as_directions(sym, xi)
    r = np.sqrt(np.sum(x**2, axis=-1))
    safe = np.where(r > 0, r, 1.0)
    unit = x / safe[..., None]
    unit[r == 0] = 0.0
    unit[r == 0, 0] = 1.0
    if sym.dim == 1:
        om = sym.measure.omega_angles(sym.beta, unit[..., 0])
    else:
        om = sym.measure.omega_angles(sym.beta, np.arctan2(unit[..., 1], unit[..., 0]))
    out = np.where(r > 0, r**sym.beta * om, 0.0)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class H2Report:
    min_omega: float
    argmin_angle: float
    passed: bool
    samples: int
    density_positive: bool = True

    def __str__(self):
        v = "pass" if self.passed else "fail"
        return f"H2 positivity {v}: min omega = {self.min_omega:.6g} over {self.samples} directions"


def h2_check(sym, samples: int = 256) -> H2Report:
    """Sample ``omega_nu`` over directions and check strict positivity.

    Values below ``1e-12`` times the total mass count as zero. Tabulated
    densities must also be strictly positive sample-wise.
    Smoothness of ``omega_nu`` is not checked.
    """
    if samples < 8:
        raise DomainError("need at least 8 sample directions")
    measure = sym.measure
    beta = sym.beta
    if measure.dim == 1:
        ang = np.array([1.0, -1.0])
    else:
        ang = 2 * math.pi * np.arange(samples) / samples
    om = measure.omega_angles(beta, ang)
    i = int(np.argmin(om))
    dens_ok = True
    if measure.kind == "density":
        dens_ok = bool(np.all(measure.samples > 0))
    mn = float(om[i])
    return H2Report(
        min_omega=mn,
        argmin_angle=float(ang[i]) if measure.dim == 2 else float(ang[i]),
        passed=bool(mn > _OMEGA_FLOOR * measure.total_mass and dens_ok),
        samples=int(ang.size),
        density_positive=dens_ok,
    )
