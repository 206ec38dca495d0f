"""Scalar special functions: gamma kernel, Mittag-Leffler and M-Wright.

All routines accept scalars or numpy arrays and return the same shape.
Mittag-Leffler functions are only needed on the non-positive real axis,
which is where every kernel multiplier of the model lives.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate
from scipy.special import gamma, gammaln, rgamma

__all__ = [
    "DomainError",
    "EvaluationError",
    "MLAccuracy",
    "gamma_kernel",
    "mittag_leffler",
    "m_wright",
    "m_wright_tail_bound",
    "m_wright_support",
]


class DomainError(ValueError):
    """Argument or parameter outside the supported domain."""


class EvaluationError(RuntimeError):
    """Numerical evaluation failed to reach its accuracy target."""

    def __init__(self, message: str, branch: str):
        super().__init__(f"{message} (branch: {branch})")
        self.branch = branch


@dataclass(frozen=True)
class MLAccuracy:
    """Accuracy knobs for :func:`mittag_leffler`.

    ``switch_radius`` caps the power-series region; the series is further
    restricted to arguments where its largest term stays below ``1e2`` so
    that cancellation cannot eat more than two digits.
    """

    rel_tol: float = 1e-10
    switch_radius: float = 5.0

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.switch_radius > 0):
            raise DomainError("rel_tol and switch_radius must be positive")


DEFAULT_ML = MLAccuracy()


def gamma_kernel(rho, t):
    """``g_rho(t) = t**(rho-1) / Gamma(rho)``."""
    t = np.asarray(t, dtype=float)
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho}")
    if np.any(t <= 0):
        raise DomainError("t must be positive")
    out = np.exp((rho - 1.0) * np.log(t) - gammaln(rho))
    return out if out.ndim else float(out)


# --------------------------------------------------------------------------
# Mittag-Leffler E_{a,b}(-y), y >= 0
# --------------------------------------------------------------------------

_SERIES_MAX_TERM = 1e2
_CONTOUR_NODES = 20
_ASYM_TERMS = 60


def _series_log_terms(a, b, y, nmax):
    n = np.arange(nmax)
    with np.errstate(divide="ignore"):
        return n * np.log(y) - gammaln(a * n + b)


@lru_cache(maxsize=256)
def _series_radius(a: float, b: float, cap: float) -> float:
    # largest y <= cap whose biggest series term stays below _SERIES_MAX_TERM
    lo, hi = 0.0, cap
    if np.max(_series_log_terms(a, b, cap, 4000)) <= math.log(_SERIES_MAX_TERM):
        return cap
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if np.max(_series_log_terms(a, b, mid, 4000)) <= math.log(_SERIES_MAX_TERM):
            lo = mid
        else:
            hi = mid
    return lo


@lru_cache(maxsize=256)
def _series_length(a: float, b: float, radius: float) -> int:
    # terms needed so the tail is below 1e-17 of the leading magnitude
    n = 8
    while n < 20000:
        lt = _series_log_terms(a, b, max(radius, 1e-300), n + 8)
        if np.all(lt[n:] < math.log(1e-18)) and np.all(np.diff(lt[n:]) < 0):
            return n + 8
        n *= 2
    raise EvaluationError("power series does not converge fast enough", "series")


def _ml_series(a, b, y, radius):
    nterms = _series_length(a, b, radius)
    coef = rgamma(a * np.arange(nterms) + b)
    z = -y
    acc = np.zeros_like(z)
    # Horner from the tail
    for c in coef[::-1]:
        acc = acc * z + c
    return acc


@lru_cache(maxsize=64)
def _contour_nodes(a: float, b: float, n: int = _CONTOUR_NODES):
    # parabolic Hankel contour s(u) = mu (1 + iu)^2 for the inverse Laplace
    # transform of s^(a-b) / (s^a + y) at time 1
    h = 3.0 / n
    mu = math.pi * n / 12.0
    u = np.arange(n + 1) * h
    s = mu * (1.0 + 1j * u) ** 2
    w = np.ones(n + 1)
    w[0] = 0.5
    num = np.exp(s) * s ** (a - b) * (1.0 + 1j * u) * w * (2.0 * mu * h / math.pi)
    return s**a, num


def _ml_contour(a, b, y):
    sa, num = _contour_nodes(a, b)
    out = np.empty_like(y)
    chunk = 1 << 16
    for i in range(0, y.size, chunk):
        yy = y[i : i + chunk]
        out[i : i + chunk] = (num[None, :] / (sa[None, :] + yy[:, None])).sum(axis=1).real
    return out


@lru_cache(maxsize=256)
def _asym_coeffs(a: float, b: float, nterms: int = _ASYM_TERMS):
    k = np.arange(1, nterms + 1)
    return rgamma(b - a * k)


@lru_cache(maxsize=256)
def _asym_threshold(a: float, b: float, rel: float) -> float:
    # smallest y (on a geometric ladder) where the algebraic expansion with
    # _ASYM_TERMS terms has a negligible, decreasing tail
    c = _asym_coeffs(a, b)
    k = np.arange(1, c.size + 1)
    nz = np.abs(c) > 0
    for y in np.geomspace(20.0, 1e8, 80):
        mag = np.where(nz, np.log(np.abs(c) + 1e-300) - k * math.log(y), -np.inf)
        lead = np.max(mag)
        tail = np.max(mag[-8:])
        if tail - lead < math.log(1e-3 * rel * 1e-3):
            return float(y)
    return math.inf


def _ml_asymptotic(a, b, y):
    c = _asym_coeffs(a, b)
    inv = -1.0 / y
    acc = np.zeros_like(y)
    for ck in c[::-1]:
        acc = (acc + ck) * inv
    return -acc


def _ml_unit_order(b, y):
    # a == 1: E_{1,b}(-y)
    if b == 1.0:
        return np.exp(-y)
    if b > 1.0:
        # E_{1,b}(-y) = 1/Gamma(b-1) * int_0^1 exp(-y u) (1-u)^(b-2) du
        from scipy.special import roots_jacobi

        x, w = roots_jacobi(64, b - 2.0, 0.0)
        u = 0.5 * (x + 1.0)
        w = w * 0.5 ** (b - 1.0)
        return np.exp(-np.outer(y, u)) @ w * rgamma(b - 1.0)
    # recurrence E_{1,b}(z) = 1/Gamma(b) + z E_{1,b+1}(z)
    return rgamma(b) - y * _ml_unit_order(b + 1.0, y)


def mittag_leffler(a, b, x, accuracy: MLAccuracy = DEFAULT_ML):
    """Two-parameter Mittag-Leffler function ``E_{a,b}(x)`` for ``x <= 0``.

    Three branches are used: the power series near the origin, a
    trapezoidal rule on a parabolic Hankel contour for moderate arguments,
    and the algebraic expansion ``-sum_k (-y)^(-k)/Gamma(b - a k)`` for
    large ones (``y = -x``). For ``0 < a < 1`` the contour encloses no
    poles, so the inverse Laplace transform needs no residue correction.
    """
    if not (0.0 < a <= 1.0):
        raise DomainError(f"order a must lie in (0, 1], got {a}")
    if not b > 0:
        raise DomainError(f"second parameter b must be positive, got {b}")
    x = np.asarray(x, dtype=float)
    if np.any(x > 0):
        raise DomainError("mittag_leffler is implemented for x <= 0 only")
    if np.any(~np.isfinite(x)):
        raise DomainError("argument must be finite")
    a = float(a)
    b = float(b)
    y = -x.ravel()
    out = np.empty_like(y)

    if a == 1.0:
        out[:] = _ml_unit_order(b, y)
    else:
        r_ser = _series_radius(a, b, accuracy.switch_radius)
        y_asym = _asym_threshold(a, b, accuracy.rel_tol)
        ser = y <= r_ser
        asym = y >= y_asym
        mid = ~(ser | asym)
        if ser.any():
            out[ser] = _ml_series(a, b, y[ser], r_ser)
        if mid.any():
            out[mid] = _ml_contour(a, b, y[mid])
        if asym.any():
            out[asym] = _ml_asymptotic(a, b, y[asym])
        if not np.all(np.isfinite(out)):
            branch = "contour" if np.any(~np.isfinite(out[mid])) else "series/asymptotic"
            raise EvaluationError("non-finite Mittag-Leffler value", branch)

    out = out.reshape(x.shape)
    return out if out.ndim else float(out)


# --------------------------------------------------------------------------
# M-Wright (Mainardi) density
# --------------------------------------------------------------------------

_MW_SERIES_RADIUS = 1.0


def _mw_series(a, s):
    n = np.arange(120)
    coef = rgamma(1.0 - a - a * n) * np.exp(-gammaln(n + 1.0))
    z = -s
    acc = np.zeros_like(s)
    for c in coef[::-1]:
        acc = acc * z + c
    return acc


def _kanter(a, phi):
    return (np.sin(a * phi) / np.sin(phi)) ** (1.0 / (1.0 - a)) * np.sin(
        (1.0 - a) * phi
    ) / np.sin(a * phi)


def _mw_integral(a, s):
    # Zolotarev/Kanter form of the one-sided stable density, rewritten for
    # M_a(s) = (1/a) s^(-1-1/a) L_a(s^(-1/a))
    p = s ** (1.0 / (1.0 - a))
    k0 = (1.0 - a) * a ** (a / (1.0 - a))
    if k0 * p > 745.0:
        return 0.0

    def f(phi):
        if phi <= 0.0:
            return k0
        k = _kanter(a, phi)
        return k * math.exp(-max(k - k0, 0.0) * p)

    width = min(math.pi, 4.0 / math.sqrt(p))
    pts = [x for x in (width / 4, width / 2, width, 2 * width) if x < math.pi]
    val, _ = integrate.quad(f, 0.0, math.pi, epsabs=0.0, epsrel=1e-13, limit=400, points=pts or None)
    return s ** (a / (1.0 - a)) / (math.pi * (1.0 - a)) * val * math.exp(-k0 * p)


def m_wright(a, s):
    """Mainardi M-Wright density ``M_a(s)`` on ``s >= 0`` for ``0 < a < 1``.

    Power series ``sum (-s)^n / (n! Gamma(1 - a - a n))`` for ``s <= 1``
    (``rgamma`` returns zero at the poles), an integral representation of
    the one-sided stable law beyond.
    """
    if not (0.0 < a < 1.0):
        raise DomainError(f"order a must lie in (0, 1), got {a}")
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise DomainError("m_wright is defined for s >= 0")
    flat = s.ravel()
    out = np.empty_like(flat)
    small = flat <= _MW_SERIES_RADIUS
    out[small] = _mw_series(a, flat[small])
    for i in np.flatnonzero(~small):
        out[i] = _mw_integral(a, flat[i])
    out = np.maximum(out, 0.0).reshape(s.shape)
    return out if out.ndim else float(out)


def m_wright_tail_bound(a, s):
    """Leading asymptotic size of ``M_a(s)`` for large ``s``.

    ``A s^((a - 1/2)/(1 - a)) exp(-(1 - a) a^(a/(1-a)) s^(1/(1-a)))``
    with ``A = (2 pi (1 - a))^(-1/2) a^((2a - 1)/(2(1-a)))``.
    """
    s = np.asarray(s, dtype=float)
    c = 1.0 / (1.0 - a)
    amp = (2 * math.pi * (1 - a)) ** -0.5 * a ** ((2 * a - 1) / (2 * (1 - a)))
    return amp * s ** ((a - 0.5) * c) * np.exp(-(1 - a) * a ** (a * c) * s**c)


@lru_cache(maxsize=64)
def m_wright_support(a: float, tol: float = 1e-12) -> float:
    """Point beyond which the M-Wright tail (and its integral) is below ``tol``."""
    s = 1.0
    while m_wright_tail_bound(a, s) * max(s, 1.0) > tol:
        s *= 1.05
    return s
