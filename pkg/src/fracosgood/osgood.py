"""The staircase family f^[k] of Osgood-type nonlinearities.

Thresholds ``phi_i = phi0 ** (k ** i)`` grow double-exponentially, so they are
stored as ``log phi_i`` and every interval lookup is done on ``log s``.
Values are computed in ordinary floating point while ``phi_{i+1}`` is
representable and in log form beyond that.

Branches (i >= 1):

* ``[0, phi0]``: ``(1 - phi0^(1-k)) s^k``
* ``[phi_{i-1}, phi_i / 2]``: the constant ``phi_i - phi_{i-1}``
* ``(phi_i / 2, phi_i)``: linear interpolation up to ``phi_{i+1} - phi_i``
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .specfun import DomainError

__all__ = [
    "OsgoodFunction",
    "TruncationIndex",
    "DivergenceReport",
    "RatioReport",
    "f_eval",
    "f_tilde_eval",
    "f_n_eval",
    "lipschitz_constant",
    "osgood_divergence_report",
    "osgood_type_check",
    "power_bound_constant",
]

_LOG_MAX = 700.0


def _log_sub(la, lb):
    # log(e^la - e^lb) for la > lb
    return la + np.log1p(-np.exp(lb - la))


@dataclass(frozen=True)
class OsgoodFunction:
    k: float
    phi0: float

    def __post_init__(self):
        if not self.k > 1:
            raise DomainError(f"k must exceed 1, got {self.k}")
        if not self.phi0 ** (self.k - 1.0) > 2.0:
            raise DomainError(f"phi0 must exceed 2^(1/(k-1)) = {2 ** (1 / (self.k - 1)):.6g}")

    @property
    def log_phi0(self) -> float:
        return math.log(self.phi0)

    def log_phi(self, i):
        """``log phi_i = k^i log phi0`` (array-friendly)."""
        return np.power(self.k, np.asarray(i, dtype=float)) * self.log_phi0

    def phi(self, i) -> float:
        """``phi_i`` as a float (inf when not representable)."""
        if float(self.log_phi(i)) >= _LOG_MAX:
            return math.inf
        # same float path as the vectorised branches, so values agree bitwise
        return float(np.power(float(self.phi0), np.power(float(self.k), float(int(i)))))

    def index_of(self, log_s):
        """Smallest i >= 1 with ``phi_{i-1} <= s < phi_i`` for s >= phi0."""
        log_s = np.asarray(log_s, dtype=float)
        ratio = np.maximum(log_s / self.log_phi0, 1.0)
        ratio = np.where(np.isfinite(ratio), ratio, 1.0)
        i = np.floor(np.log(ratio) / math.log(self.k)).astype(np.int64) + 1
        # guard against rounding in the double logarithm
        i = np.where(self.log_phi(i - 1) > log_s, i - 1, i)
        i = np.where(self.log_phi(i) <= log_s, i + 1, i)
        return np.maximum(i, 1)

    def step_log(self, i):
        """``log(phi_i - phi_{i-1})``, the plateau level on I_i."""
        return _log_sub(self.log_phi(i), self.log_phi(np.asarray(i) - 1))

    def step(self, i: int) -> float:
        if self.log_phi(i) < _LOG_MAX:
            return self.phi(i) - self.phi(i - 1)
        return math.inf

    @property
    def poly_coeff(self) -> float:
        return 1.0 - self.phi0 ** (1.0 - self.k)

    def __call__(self, s):
        return f_eval(self, s)


@dataclass(frozen=True)
class TruncationIndex:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError("truncation level must be an integer >= 1")


def _f_direct(of: OsgoodFunction, s: np.ndarray, i: np.ndarray) -> np.ndarray:
    # float arithmetic for s >= phi0 where phi_{i+1} is representable
    # direct powers keep integer thresholds exact (4^16 rather than exp(16 log 4))
    base = float(of.phi0)
    phi_prev = np.power(base, np.power(float(of.k), i - 1.0))
    phi_i = np.power(base, np.power(float(of.k), i * 1.0))
    phi_next = np.power(base, np.power(float(of.k), i + 1.0))
    lo = phi_i - phi_prev
    hi = phi_next - phi_i
    half = 0.5 * phi_i
    theta = np.clip((s - half) / half, 0.0, 1.0)
    return np.where(s <= half, lo, lo + (hi - lo) * theta)


def _f_log(of: OsgoodFunction, log_s: np.ndarray, i: np.ndarray) -> np.ndarray:
    lphi = of.log_phi(i)
    lo = of.step_log(i)
    hi = of.step_log(i + 1)
    theta = np.clip(2.0 * np.exp(log_s - lphi) - 1.0, 0.0, 1.0)
    with np.errstate(divide="ignore"):
        lin = np.logaddexp(lo + np.log1p(-theta), hi + np.log(theta))
    return np.where(theta <= 0.0, lo, lin)


def f_eval(of: OsgoodFunction, s, in_log: bool = False):
    """Evaluate ``f^[k]``; with ``in_log`` both ``s`` and the result are logs."""
    arr = np.asarray(s, dtype=float)
    if in_log:
        log_s = arr
        with np.errstate(over="ignore"):
            s_val = np.exp(np.minimum(arr, _LOG_MAX + 10))
    else:
        if np.any(arr < 0) or np.any(np.isnan(arr)):
            raise DomainError("f^[k] is defined for s >= 0")
        s_val = arr
        with np.errstate(divide="ignore"):
            log_s = np.log(arr)
    flat_ls = np.atleast_1d(log_s).ravel()
    flat_s = np.atleast_1d(s_val).ravel()
    out_log = np.empty_like(flat_ls)
    out = np.empty_like(flat_ls)
    low = flat_ls <= of.log_phi0
    with np.errstate(divide="ignore"):
        out_log[low] = math.log(of.poly_coeff) + of.k * flat_ls[low]
        out[low] = of.poly_coeff * flat_s[low] ** of.k
    hi = ~low
    if hi.any():
        i = of.index_of(flat_ls[hi])
        direct = of.log_phi(i + 1) < _LOG_MAX
        vals_log = _f_log(of, flat_ls[hi], i)
        with np.errstate(over="ignore"):
            vals = np.exp(np.minimum(vals_log, _LOG_MAX + 10))
        if direct.any():
            dv = _f_direct(of, flat_s[hi][direct], i[direct])
            vals[direct] = dv
            with np.errstate(divide="ignore"):
                vals_log[direct] = np.log(dv)
        # plateaus with representable level: same float value as f~
        lphi = of.log_phi(i)
        flat_plateau = (~direct) & (lphi < _LOG_MAX) & (flat_ls[hi] <= lphi - math.log(2))
        if flat_plateau.any():
            ip = i[flat_plateau].astype(float)
            base, k = float(of.phi0), float(of.k)
            level = np.power(base, np.power(k, ip)) - np.power(base, np.power(k, ip - 1.0))
            vals[flat_plateau] = level
            vals_log[flat_plateau] = np.log(level)
        rest = ~direct & ~flat_plateau
        vals[rest] = np.where(vals_log[rest] < _LOG_MAX, np.exp(np.minimum(vals_log[rest], _LOG_MAX)), np.inf)
        out_log[hi] = vals_log
        out[hi] = vals
    infinite = np.isposinf(flat_ls)
    out_log[infinite] = np.inf
    out[infinite] = np.inf
    res = out_log if in_log else out
    res = res.reshape(np.shape(arr))
    return res if res.ndim else float(res)


def f_tilde_eval(of: OsgoodFunction, s, in_log: bool = False):
    """Lower envelope: 0 below phi0, ``phi_i - phi_{i-1}`` on ``[phi_{i-1}, phi_i)``."""
    arr = np.asarray(s, dtype=float)
    if in_log:
        log_s = arr
    else:
        if np.any(arr < 0):
            raise DomainError("f~ is defined for s >= 0")
        with np.errstate(divide="ignore"):
            log_s = np.log(arr)
    flat = np.atleast_1d(log_s).ravel()
    out_log = np.full(flat.shape, -np.inf)
    hi = flat >= of.log_phi0
    if hi.any():
        i = of.index_of(flat[hi])
        out_log[hi] = of.step_log(i)
    if in_log:
        res = out_log
    else:
        with np.errstate(over="ignore"):
            res = np.exp(np.minimum(out_log, _LOG_MAX + 10))
        if hi.any():
            i = of.index_of(flat[hi])
            fin = of.log_phi(i) < _LOG_MAX
            vals = res[hi]
            vals[fin] = [of.step(int(j)) for j in i[fin]]
            res[hi] = vals
    res = res.reshape(np.shape(arr))
    return res if res.ndim else float(res)


def _as_level(n) -> int:
    return n.n if isinstance(n, TruncationIndex) else TruncationIndex(int(n)).n


def f_n_eval(of: OsgoodFunction, n, s):
    """Lipschitz truncation: 0 for s < 0, f^[k] on [0, phi_n], f(phi_n) beyond."""
    level = _as_level(n)
    arr = np.asarray(s, dtype=float)
    cap = of.phi(level)
    clipped = np.clip(arr, 0.0, cap)
    out = np.asarray(f_eval(of, clipped))
    out = np.where(arr < 0, 0.0, out)
    return out if out.ndim else float(out)


def lipschitz_constant(of: OsgoodFunction, n) -> float:
    """Largest slope of ``f_n``: polynomial part or one of the ramps J_1..J_n."""
    level = _as_level(n)
    slopes = [of.k * of.poly_coeff * of.phi0 ** (of.k - 1.0)]
    for i in range(1, level + 1):
        phi_i = of.phi(i)
        ramp = (of.step(i + 1) - of.step(i)) / (0.5 * phi_i)
        slopes.append(ramp)
    return float(max(slopes))


@dataclass
class DivergenceReport:
    contributions: np.ndarray
    partial_sums: np.ndarray

    @property
    def limit_estimate(self) -> float:
        return float(self.contributions[-1])

    @property
    def unbounded_trend(self) -> bool:
        # terms approach 1/2, so partial sums grow linearly
        tail = self.contributions[-min(10, self.contributions.size) :]
        return bool(np.all(tail > 0.25))


def osgood_divergence_report(of: OsgoodFunction, blocks: int) -> DivergenceReport:
    """Closed-form ``int_{I_i} ds / f`` for i = 1..blocks and their partial sums."""
    if blocks < 1:
        raise DomainError("blocks must be >= 1")
    i = np.arange(1, blocks + 1)
    r = np.exp(of.log_phi(i - 1) - of.log_phi(i))  # phi_{i-1} / phi_i
    contrib = (0.5 - r) / (1.0 - r)
    return DivergenceReport(contrib, np.cumsum(contrib))


@dataclass
class RatioReport:
    s: np.ndarray
    ratios: np.ndarray
    bound: float

    @property
    def min(self) -> float:
        return float(self.ratios.min())

    @property
    def max(self) -> float:
        return float(self.ratios.max())

    @property
    def bounded(self) -> bool:
        return bool(self.min > 0 and self.max / self.min <= self.bound)


def osgood_type_check(f, of: OsgoodFunction, s_range=(1e-3, 1e300), samples: int = 2000, bound: float = 1e3) -> RatioReport:
    """Sweep ``f / f^[k]`` on a log grid plus the plateau ends ``phi_i / 2``.

    s = 0 is excluded (both functions vanish there). The verdict is a
    finite-sweep statement: the ratio spread stays within ``bound``.
    """
    lo, hi = s_range
    if not (0 < lo < hi):
        raise DomainError("s_range must be positive and increasing")
    s = np.geomspace(lo, hi, samples)
    i = 1
    extra = []
    while of.log_phi(i) < math.log(hi) + math.log(2):
        half = 0.5 * of.phi(i)
        if lo <= half <= hi:
            extra.append(half)
        i += 1
    s = np.unique(np.concatenate([s, extra]))
    with np.errstate(over="ignore", invalid="ignore"):
        fv = np.asarray(f(s), dtype=float)
    if np.any(fv < 0):
        raise DomainError("f takes negative values on the sweep")
    fk = np.asarray(f_eval(of, s))
    ok = np.isfinite(fv) & np.isfinite(fk) & (fk > 0)
    return RatioReport(s[ok], fv[ok] / fk[ok], bound)


def power_bound_constant(of: OsgoodFunction) -> float:
    """``C = sup f^[k](s) / s^k``.

    On a plateau the ratio peaks at the left end ``phi_{i-1}``. On a ramp
    ``f = a + b s`` the ratio ``(a + b s) / s^k`` has one critical point,
    ``s* = k a / (b (1 - k))``, which is checked together with the ramp ends.
    For large i the ramp ratio approaches ``max (2x - 1) / x^k`` over
    ``x in [1/2, 1]``, which bounds the levels that are not representable.
    """
    k = float(of.k)
    best = of.poly_coeff
    i = 1
    while of.log_phi(i + 1) < _LOG_MAX:
        phi_prev, phi_i = of.phi(i - 1), of.phi(i)
        lo, hi = of.step(i), of.step(i + 1)
        best = max(best, lo / phi_prev**k)
        b = 2.0 * (hi - lo) / phi_i
        a = 2.0 * lo - hi
        cands = [0.5 * phi_i, phi_i]
        s_star = k * a / (b * (1.0 - k))
        if 0.5 * phi_i < s_star < phi_i:
            cands.append(s_star)
        best = max(best, max((a + b * c) / c**k for c in cands))
        i += 1
    x = min(max(k / (2.0 * (k - 1.0)), 0.5), 1.0)
    return float(max(best, (2.0 * x - 1.0) / x**k))
