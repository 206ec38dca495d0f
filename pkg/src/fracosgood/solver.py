"""Mild solutions of the time-fractional semilinear problem.

The map ``F u (t) = S(t) u0 + int_0^t R(t - s) f(u(s)) ds`` is discretized by
product integration on a time mesh: ``f(u(s))`` is replaced by its
piecewise-linear interpolant through the mesh values (``scheme="linear"``,
default) or frozen to its left-endpoint value on each interval
(``scheme="constant"``). The resulting weights are exact in frequency,
built from the antiderivatives of the R-multiplier in the lag ``tau``:

    Phi1(tau) = tau^alpha     E_{alpha, alpha+1}(-tau^alpha psi)
    Phi2(tau) = tau^(alpha+1) E_{alpha, alpha+2}(-tau^alpha psi)

``Phi1(b) - Phi1(a)`` equals ``(E_{a,1}(-a^alpha psi) - E_{a,1}(-b^alpha psi)) / psi``
without the division, so psi = 0 needs no separate branch.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
import numpy as np

from .grid import ConsistencyError, Field, Grid, InitialData, ResolutionError, local_mass, lp_norm, sample_u0
from .kernels import KernelSet, ml_unique, s_apply
from .osgood import OsgoodFunction, f_eval, f_n_eval, lipschitz_constant, power_bound_constant
from .regimes import RegimeParams, blowup_condition, global_window, pick_tau_rho
from .specfun import DomainError

__all__ = [
    "TimeMesh",
    "Nonlinearity",
    "SolverConfig",
    "History",
    "SolverTrace",
    "SuperSolutionReport",
    "apply_F",
    "fixed_point_solve",
    "monotone_iterate",
    "is_supersolution",
    "annulus_bound_check",
    "AnnulusReport",
    "blowup_probe",
    "BlowupReport",
    "global_study",
    "GlobalReport",
    "TRACE_COLUMNS",
]

TRACE_COLUMNS = ["t", "lq_norm", "weighted_norm", "local_mass", "residual", "iters"]


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TimeMesh:
    nodes: np.ndarray
    grading: float = 1.0

    def __post_init__(self):
        t = np.asarray(self.nodes, dtype=float)
        if t.ndim != 1 or t.size < 2 or t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise DomainError("time mesh must start at 0 and increase strictly")
        if not self.grading >= 1:
            raise DomainError("grading exponent must be >= 1")
        t.flags.writeable = False
        object.__setattr__(self, "nodes", t)

    @classmethod
    def graded(cls, T: float, N: int, gamma: float = 2.0) -> "TimeMesh":
        """``t_n = T (n/N)^gamma``."""
        if not (T > 0 and N >= 1):
            raise DomainError("need T > 0 and N >= 1")
        return cls(T * (np.arange(N + 1) / N) ** gamma, gamma)

    @classmethod
    def for_order(cls, T: float, N: int, alpha: float) -> "TimeMesh":
        """Graded mesh with ``gamma = max(2, 1/alpha)``.

        The solution behaves like ``t^alpha`` near 0; this grading keeps the
        linear scheme close to second order for small alpha.
        """
        return cls.graded(T, N, max(2.0, 1.0 / alpha))

    @classmethod
    def geometric(cls, T: float, N: int, t_first: float) -> "TimeMesh":
        """0 followed by N geometrically spaced nodes from ``t_first`` to T."""
        if not (0 < t_first < T):
            raise DomainError("need 0 < t_first < T")
        return cls(np.concatenate([[0.0], np.geomspace(t_first, T, N)]))

    @property
    def T(self) -> float:
        return float(self.nodes[-1])

    @property
    def N(self) -> int:
        return self.nodes.size - 1


@dataclass(frozen=True)
class Nonlinearity:
    """``power`` (lam |u|^(k-1) u), ``osgood`` (f^[k]) or ``truncated`` (f_n)."""

    kind: str
    lam: float = 1.0
    k: float = 1.0
    osgood: OsgoodFunction | None = None
    level: int = 0

    def __post_init__(self):
        if self.kind == "power":
            if not self.k >= 1:
                raise DomainError("power nonlinearity needs k >= 1")
            if self.lam < 0 and self.k != 1:
                raise DomainError("negative lam is only allowed for the linear case k = 1")
        elif self.kind in ("osgood", "truncated"):
            if self.osgood is None:
                raise DomainError("an OsgoodFunction is required")
            if self.kind == "truncated" and self.level < 1:
                raise DomainError("truncation level must be >= 1")
        else:
            raise DomainError(f"unknown nonlinearity {self.kind!r}")

    @classmethod
    def power(cls, lam: float, k: float) -> "Nonlinearity":
        return cls("power", lam=float(lam), k=float(k))

    @classmethod
    def zero(cls) -> "Nonlinearity":
        return cls("power", lam=0.0, k=1.0)

    @classmethod
    def from_osgood(cls, of: OsgoodFunction) -> "Nonlinearity":
        return cls("osgood", osgood=of, k=of.k)

    @classmethod
    def truncated(cls, of: OsgoodFunction, n: int) -> "Nonlinearity":
        return cls("truncated", osgood=of, k=of.k, level=int(n))

    @property
    def is_zero(self) -> bool:
        return self.kind == "power" and self.lam == 0.0

    @property
    def lipschitz(self) -> float:
        if self.kind == "truncated":
            return lipschitz_constant(self.osgood, self.level)
        return math.inf if not (self.kind == "power" and self.k == 1) else self.lam

    def __call__(self, u: np.ndarray) -> np.ndarray:
        if self.kind == "power":
            if self.lam == 0.0:
                return np.zeros_like(u)
            if self.k == 1.0:
                return self.lam * u
            with np.errstate(over="ignore", invalid="ignore"):
                return self.lam * np.abs(u) ** (self.k - 1.0) * u
        if self.kind == "osgood":
            with np.errstate(invalid="ignore"):
                v = np.where(np.isfinite(u), np.maximum(u, 0.0), np.inf)
            return np.asarray(f_eval(self.osgood, v))
        with np.errstate(invalid="ignore"):
            v = np.where(np.isnan(u), np.inf, u)
        return np.asarray(f_n_eval(self.osgood, self.level, v))


@dataclass(eq=False)
class SolverConfig:
    kernel: KernelSet
    nonlinearity: Nonlinearity
    u0: Field
    time_mesh: TimeMesh
    tolerance: float = 1e-10
    max_iter: int = 200
    q: float = 2.0
    q_prime: float | None = None
    eps: float | None = None
    weight_cache_bytes: int = 768 * 2**20
    scheme: str = "linear"

    def __post_init__(self):
        if isinstance(self.u0, InitialData):
            self.u0 = sample_u0(self.kernel.grid, self.u0)
        if self.u0.grid != self.kernel.grid:
            raise DomainError("u0 is not sampled on the kernel grid")
        if not (self.tolerance > 0 and self.max_iter >= 1):
            raise DomainError("tolerance must be positive and max_iter >= 1")
        if not self.q >= 1:
            raise DomainError("q must be >= 1")

    def with_nonlinearity(self, nl: Nonlinearity) -> "SolverConfig":
        new = SolverConfig(self.kernel, nl, self.u0, self.time_mesh, self.tolerance, self.max_iter, self.q,
                           self.q_prime, self.eps, self.weight_cache_bytes, self.scheme)
        new._engine = getattr(self, "_engine", None)
        return new

    def with_u0(self, u0) -> "SolverConfig":
        return SolverConfig(self.kernel, self.nonlinearity, u0, self.time_mesh, self.tolerance, self.max_iter,
                            self.q, self.q_prime, self.eps, self.weight_cache_bytes, self.scheme)

    @property
    def weight_exponent(self) -> float:
        """``(alpha d / beta)(1/q' - 1/q)``; zero when no q' is set."""
        if self.q_prime is None:
            return 0.0
        ks = self.kernel
        return ks.alpha * ks.dim / ks.beta * (1.0 / self.q_prime - 1.0 / self.q)

    @property
    def engine(self) -> "_Duhamel":
        eng = getattr(self, "_engine", None)
        if eng is None:
            eng = _Duhamel(self.kernel, self.time_mesh, self.weight_cache_bytes, self.scheme)
            self._engine = eng
        return eng


# --------------------------------------------------------------------------
# histories and traces
# --------------------------------------------------------------------------


@dataclass(eq=False)
class History:
    grid: Grid
    times: np.ndarray
    values: np.ndarray
    blow_up_step: int | None = None

    def field(self, n: int) -> Field:
        return Field(self.grid, self.values[n])

    def copy(self) -> "History":
        return History(self.grid, self.times, self.values.copy(), self.blow_up_step)

    def shifted(self, c: float) -> "History":
        return History(self.grid, self.times, self.values + c, self.blow_up_step)

    @property
    def scale(self) -> float:
        v = self.values[np.isfinite(self.values)]
        return float(np.max(np.abs(v))) if v.size else 0.0


@dataclass
class SolverTrace:
    records: list = field(default_factory=list)
    residual_curve: list = field(default_factory=list)
    e_norm_diffs: list = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    blow_up: bool = False
    blow_up_step: int | None = None
    blow_up_functional: str | None = None

    @property
    def contraction_factors(self) -> np.ndarray:
        d = np.asarray(self.e_norm_diffs, dtype=float)
        if d.size < 2:
            return np.array([])
        with np.errstate(divide="ignore", invalid="ignore"):
            return d[1:] / d[:-1]

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.records], dtype=float)


# --------------------------------------------------------------------------
# the discrete Duhamel operator
# --------------------------------------------------------------------------


class _Duhamel:
    """Spectral multipliers of S(t_n) and the exact product-integration weights."""

    def __init__(self, ks: KernelSet, mesh: TimeMesh, cache_bytes: int, scheme: str = "linear"):
        if scheme not in ("linear", "constant"):
            raise DomainError(f"unknown time scheme {scheme!r}")
        self.ks = ks
        self.mesh = mesh
        self.scheme = scheme
        self.psi = ks.psi
        t = mesh.nodes
        self.s_hat = [np.ones_like(self.psi)] + [ks.z_hat(float(tn), "spectral") for tn in t[1:]]
        row_bytes = self.psi.nbytes * (mesh.N + 1) * (mesh.N + 2) / 2
        self._cache = {} if row_bytes <= cache_bytes else None

    def _antiderivative(self, order: int, tau: np.ndarray) -> np.ndarray:
        a = self.ks.alpha
        tau = np.asarray(tau, dtype=float).reshape((-1,) + (1,) * self.psi.ndim)
        ta = tau**a
        return tau ** (order - 1) * ta * ml_unique(a, a + order, -ta * self.psi, self.ks.accuracy)

    def phi(self, tau: np.ndarray) -> np.ndarray:
        """``Phi1(tau)``; rows follow ``tau``."""
        return self._antiderivative(1, tau)

    def weights(self, n: int) -> np.ndarray:
        """Coefficients ``c_{n,j}`` (j = 0..n) multiplying ``f(u(t_j))``."""
        if self._cache is not None and n in self._cache:
            return self._cache[n]
        t = self.mesh.nodes
        lags = t[n] - t[: n + 1]
        p1 = self.phi(lags)
        w = p1[:-1] - p1[1:]
        c = np.zeros_like(p1)
        if self.scheme == "constant":
            c[:-1] = w
        else:
            p2 = self._antiderivative(2, lags)
            dt = np.diff(t[: n + 1]).reshape((-1,) + (1,) * self.psi.ndim)
            # weight of the right hat on interval j: int K(tau) (b - tau) / dt over [a, b]
            right = (p2[:-1] - p2[1:]) / dt - p1[1:]
            c[1:] += right
            c[:-1] += w - right
        if self._cache is not None:
            c.flags.writeable = False
            self._cache[n] = c
        return c

    def time_weight_sum(self, n: int) -> float:
        """Sum of the psi = 0 coefficients; equals t_n^alpha / Gamma(1 + alpha)."""
        c = self.weights(n)
        idx = (0,) * self.psi.ndim
        return float(np.sum(c[(slice(None),) + idx]))


def _apply_F_values(cfg: SolverConfig, values: np.ndarray) -> tuple[np.ndarray, int | None]:
    eng = cfg.engine
    g = cfg.kernel.grid
    N = cfg.time_mesh.N
    u0_hat = g.rfft(cfg.u0.values)
    out = np.empty_like(values)
    out[0] = cfg.u0.values
    if cfg.nonlinearity.is_zero:
        for n in range(1, N + 1):
            out[n] = g.irfft(eng.s_hat[n] * u0_hat)
        return out, None
    with np.errstate(over="ignore", invalid="ignore"):
        fv = cfg.nonlinearity(values)
    finite = np.array([np.all(np.isfinite(fv[j])) for j in range(N + 1)])
    bad = np.flatnonzero(~finite)
    # with the linear scheme u_n already depends on f(u_n)
    halt = N + 1
    if bad.size:
        halt = int(bad[0]) + (0 if eng.scheme == "linear" else 1)
    f_hat = g.rfft(np.where(np.isfinite(fv), fv, 0.0))
    blow = None
    for n in range(1, N + 1):
        if n >= halt:
            out[n:] = np.nan
            blow = n
            break
        c = eng.weights(n)
        acc = eng.s_hat[n] * u0_hat + np.einsum("j...,j...->...", c, f_hat[: n + 1])
        out[n] = g.irfft(acc)
        if not np.all(np.isfinite(out[n])):
            out[n:] = np.nan
            blow = n
            break
    return out, blow


def _as_history(cfg: SolverConfig, u) -> History:
    if isinstance(u, History):
        vals = u.values
    else:
        vals = np.asarray(u, dtype=float)
    want = (cfg.time_mesh.N + 1,) + cfg.kernel.grid.shape
    if vals.shape != want:
        raise DomainError(f"history shape {vals.shape} does not match mesh/grid {want}")
    return History(cfg.kernel.grid, cfg.time_mesh.nodes, vals)


def apply_F(cfg: SolverConfig, u) -> History:
    """One application of the mild-solution map on the whole time mesh."""
    hist = _as_history(cfg, u)
    vals, blow = _apply_F_values(cfg, hist.values)
    return History(hist.grid, hist.times, vals, blow)


def free_evolution(cfg: SolverConfig) -> History:
    """``S(t_n) u0`` on the mesh (the Picard starting iterate)."""
    g = cfg.kernel.grid
    u0_hat = g.rfft(cfg.u0.values)
    vals = np.empty((cfg.time_mesh.N + 1,) + g.shape)
    vals[0] = cfg.u0.values
    for n in range(1, cfg.time_mesh.N + 1):
        vals[n] = g.irfft(cfg.engine.s_hat[n] * u0_hat)
    return History(g, cfg.time_mesh.nodes, vals)


def _norms(cfg: SolverConfig, values: np.ndarray) -> np.ndarray:
    g = cfg.kernel.grid
    return np.array([lp_norm(Field(g, v), cfg.q) if np.all(np.isfinite(v)) else math.inf for v in values])


def _e_norm(cfg: SolverConfig, values: np.ndarray) -> float:
    t = cfg.time_mesh.nodes[1:]
    return float(np.max(t ** cfg.weight_exponent * _norms(cfg, values[1:])))


def _build_records(cfg: SolverConfig, hist: History, residuals: np.ndarray, iters: int) -> list:
    norms = _norms(cfg, hist.values)
    g = cfg.kernel.grid
    recs = []
    for n, tn in enumerate(hist.times):
        v = hist.values[n]
        lm = math.nan
        if cfg.eps is not None and np.all(np.isfinite(v)):
            lm = local_mass(Field(g, v), cfg.eps)
        recs.append(
            {
                "t": float(tn),
                "lq_norm": float(norms[n]),
                "weighted_norm": float(tn**cfg.weight_exponent * norms[n]) if tn > 0 else 0.0,
                "local_mass": float(lm),
                "residual": float(residuals[n]),
                "iters": int(iters),
            }
        )
    return recs


def fixed_point_solve(cfg: SolverConfig, initial=None) -> tuple[History, SolverTrace]:
    """Picard iteration ``u <- F u`` starting from ``S(t) u0`` (or ``initial``)."""
    trace = SolverTrace()
    u = free_evolution(cfg).values if initial is None else _as_history(cfg, initial).values.copy()
    for m in range(1, cfg.max_iter + 1):
        new, blow = _apply_F_values(cfg, u)
        trace.iterations = m
        if blow is not None:
            trace.blow_up = True
            trace.blow_up_step = blow
            trace.blow_up_functional = "non-finite field value"
            u = new
            break
        diff = new - u
        dq = _norms(cfg, diff)
        trace.residual_curve.append(float(dq.max()))
        trace.e_norm_diffs.append(_e_norm(cfg, diff))
        u = new
        if dq.max() <= cfg.tolerance:
            trace.converged = True
            break
    hist = History(cfg.kernel.grid, cfg.time_mesh.nodes, u, trace.blow_up_step)
    if trace.blow_up:
        res = np.full(u.shape[0], math.nan)
    else:
        fu, _ = _apply_F_values(cfg, u)
        res = _norms(cfg, fu - u)
    trace.records = _build_records(cfg, hist, res, trace.iterations)
    return hist, trace


def monotone_iterate(cfg: SolverConfig, super_sol, slack: float = 1e-10) -> History:
    """Iterate F from a super-solution; the sequence must not increase."""
    u = _as_history(cfg, super_sol).values.copy()
    scale = max(float(np.max(np.abs(u))), 1e-300)
    for _ in range(cfg.max_iter):
        new, blow = _apply_F_values(cfg, u)
        if blow is not None:
            raise ConsistencyError(f"iterate became non-finite at step {blow}")
        worst = float(np.max(new - u))
        if worst > slack * scale:
            raise ConsistencyError(f"iterates increased by {worst:.3e} (> {slack:g} * {scale:.3e})")
        dq = _norms(cfg, new - u).max()
        u = new
        if dq <= cfg.tolerance:
            break
    else:
        warnings.warn(f"monotone iteration stopped at max_iter = {cfg.max_iter} with step {dq:.3e}", RuntimeWarning)
    return History(cfg.kernel.grid, cfg.time_mesh.nodes, u)


@dataclass
class SuperSolutionReport:
    ok: bool
    worst: float
    scale: float
    worst_step: int

    def __bool__(self):
        return self.ok


def is_supersolution(cfg: SolverConfig, u, rel_tol: float = 1e-8) -> SuperSolutionReport:
    """Check ``u - F u >= -rel_tol * scale`` at every mesh time."""
    hist = _as_history(cfg, u)
    fu, blow = _apply_F_values(cfg, hist.values)
    scale = max(float(np.max(np.abs(hist.values))), 1e-300)
    if blow is not None:
        return SuperSolutionReport(False, -math.inf, scale, blow)
    diff = (hist.values - fu).reshape(hist.values.shape[0], -1)
    per_step = diff.min(axis=1)
    n = int(np.argmin(per_step))
    worst = float(per_step[n])
    return SuperSolutionReport(worst >= -rel_tol * scale, worst, scale, n)


# --------------------------------------------------------------------------
# annulus lower bound for the free evolution of the singular datum
# --------------------------------------------------------------------------


@dataclass
class AnnulusReport:
    M: float
    phis: list
    t_bounds: list
    worst_margins: list
    samples: list
    intermediate_worst: float
    intermediate_samples: int
    slack: float

    @property
    def passed(self) -> bool:
        return all(m >= 1.0 - self.slack for m in self.worst_margins)

    def to_json(self) -> dict:
        return {
            "M": self.M,
            "checks": [
                {"phi": p, "t_bound": tb, "worst_margin": m, "samples": s}
                for p, tb, m, s in zip(self.phis, self.t_bounds, self.worst_margins, self.samples)
            ],
            "intermediate_worst_ratio": self.intermediate_worst,
            "intermediate_samples": self.intermediate_samples,
            "slack": self.slack,
            "passed": self.passed,
        }


def annulus_bound_check(
    ks: KernelSet,
    data: InitialData,
    rho: float,
    phi_factors=(1.0, 2.0, 5.0),
    t_count: int = 48,
    min_cells: float = 4.0,
    slack: float = 5e-2,
) -> AnnulusReport:
    """Check ``z(t, x) >= phi`` on ``t^(a/b) <= |x| <= t^rho`` for ``t <= (phi/M)^(-1/(tau rho))``.

    ``z = S(t) u0`` for the singular datum; ``M`` is the minimum of ``z`` over
    the unit sphere and a geometric t-lattice in (0, 1]. Times are kept only
    where ``t^(a/b)`` spans at least ``min_cells`` grid cells.
    """
    if data.kind != "singular":
        raise DomainError("annulus check needs the singular datum")
    a, b, d = ks.alpha, ks.beta, ks.dim
    if not (0 < rho < a / b):
        raise DomainError("rho must lie in (0, alpha/beta)")
    g = ks.grid
    u0 = sample_u0(g, data)
    tau = data.tau
    t_min = (min_cells * g.h) ** (b / a)
    if t_min >= 1:
        raise ResolutionError("grid too coarse for any t in (0, 1]")
    r = g.radius
    unit = np.abs(r - 1.0) <= 0.5 * g.h
    if not unit.any():
        raise ResolutionError("no grid point on the unit sphere")

    # z on a lattice covering (t_min, 1]; finer lattices for the small t bounds
    lattice = np.unique(np.concatenate([np.geomspace(t_min, 1.0, t_count)] + [
        np.geomspace(t_min, max(f ** (-1.0 / (tau * rho)), t_min), max(t_count // 2, 4)) for f in phi_factors
    ]))
    z = {float(t): s_apply(ks, float(t), u0).values for t in lattice}
    M = float(min(np.min(v[unit]) for v in z.values()))

    phis, tbs, margins, counts = [], [], [], []
    for fac in phi_factors:
        phi = fac * M
        t_bound = (phi / M) ** (-1.0 / (tau * rho))
        worst, cnt = math.inf, 0
        for t, v in z.items():
            if t > t_bound * (1 + 1e-12):
                continue
            region = (r >= t ** (a / b)) & (r <= t**rho)
            if not region.any():
                continue
            cnt += int(region.sum())
            worst = min(worst, float(np.min(v[region])) / phi)
        if cnt == 0:
            raise ResolutionError(f"annulus region empty on the grid for phi = {fac} M")
        phis.append(phi)
        tbs.append(t_bound)
        margins.append(worst)
        counts.append(cnt)

    # intermediate inequality z(t, x) >= |x|^-tau M for |x| <= 1, t <= |x|^(b/a)
    iw, ic = math.inf, 0
    inner = (r <= 1.0) & (r > 0)
    for t, v in z.items():
        sel = inner & (t <= r ** (b / a))
        if sel.any():
            ic += int(sel.sum())
            iw = min(iw, float(np.min(v[sel] / (r[sel] ** (-tau) * M))))
    return AnnulusReport(M, phis, tbs, margins, counts, iw, ic, slack)


# --------------------------------------------------------------------------
# blow-up probe
# --------------------------------------------------------------------------


@dataclass
class BlowupReport:
    levels: list
    ratios: list
    verdict: str
    policy: dict
    analytic_exponent: float | None
    symbolic_fit_exponent: float | None
    measured_exponent: float | None
    tau: float
    rho: float

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "evidence": [dict(lv, ratio=(self.ratios[i - 1] if i else None)) for i, lv in enumerate(self.levels)],
            "policy": self.policy,
            "tau": self.tau,
            "rho": self.rho,
            "analytic_exponent": self.analytic_exponent,
            "symbolic_fit_exponent": self.symbolic_fit_exponent,
            "measured_exponent": self.measured_exponent,
        }


def _mass_kernel_min(ks: KernelSet, eps: float, taus: np.ndarray) -> np.ndarray:
    """``m(tau) = min_{|y| <= 1} (R(tau) 1_{B(eps)})(y)``."""
    g = ks.grid
    ind_hat = g.rfft((g.radius <= eps).astype(float))
    inner = g.radius <= 1.0
    out = np.empty_like(taus)
    for i, tv in enumerate(taus):
        out[i] = float(np.min(g.irfft(ks.y_hat(float(tv)) * ind_hat)[inner]))
    return out


def _level_terms(ks, of, u0_field, t, eps, n_thresholds, quad_panels):
    """Log of ``Delta_i T_i`` for i = 0..n_thresholds-1, plus log phi_i.

    ``T_i = int_0^t m(t-s) s^(a d/b) A(phi_i s^(a tau/b)) ds`` with
    ``A(c) = |{|w| <= 1 : z(1, w) >= c}|``, a layer-cake lower bound of the
    first-iterate local mass gained above the i-th threshold.
    """
    a, b, d = ks.alpha, ks.beta, ks.dim
    g = ks.grid
    tau_exp = u0_field.tau_exp
    z1 = s_apply(ks, 1.0, u0_field.field).values
    vals = np.sort(z1[g.radius <= 1.0])
    cell = g.cell_volume

    def area(c):
        # measure of the superlevel set, by counting cells
        return cell * (vals.size - np.searchsorted(vals, c, side="left"))

    # m on a lag grid, interpolated in log form (tau^(1-a) m is smooth)
    lags = np.geomspace(t * 1e-9, t, 160)
    mv = _mass_kernel_min(ks, eps, lags)
    if np.any(mv <= 0):
        raise ResolutionError("R-mass of B(eps) not positive on the unit ball")
    log_mscaled = np.log(mv) + (1 - a) * np.log(lags)

    def log_m(lag):
        lag = np.maximum(lag, lags[0])
        return np.interp(np.log(lag), np.log(lags), log_mscaled) - (1 - a) * np.log(lag)

    x, w = np.polynomial.legendre.leggauss(8)
    z_max = float(vals[-1])
    out, log_phis = [], []
    for i in range(n_thresholds):
        lphi = float(of.log_phi(i))
        # support in s: phi_i s^(a tau/b) <= z_max
        log_s_top = min(math.log(t), (math.log(z_max) - lphi) * b / (a * tau_exp))
        log_s_bot = log_s_top - 60.0
        # geometric panels in s for (0, min(s_top, t/2)], then panels in t - s
        # nodes and weights are kept as logs: for large i the s-range underflows
        log_nodes, log_wts = [], []
        top_half = min(log_s_top, math.log(t / 2))
        edges = np.linspace(log_s_bot, top_half, quad_panels + 1)
        for e0, e1 in zip(edges[:-1], edges[1:]):
            u = 0.5 * (e1 - e0) * x + 0.5 * (e1 + e0)
            log_nodes.append(u)
            log_wts.append(np.log(0.5 * (e1 - e0) * w) + u)
        if log_s_top > math.log(t / 2):
            s_hi = math.exp(log_s_top)
            lag_edges = np.geomspace(max(t - s_hi, t * 1e-12), t / 2, quad_panels // 2 + 1)[::-1]
            for l0, l1 in zip(lag_edges[:-1], lag_edges[1:]):
                lag = 0.5 * (l1 - l0) * x + 0.5 * (l1 + l0)
                log_nodes.append(np.log(t - lag))
                log_wts.append(np.log(0.5 * abs(l1 - l0) * w))
        ls = np.concatenate(log_nodes)
        lw = np.concatenate(log_wts)
        c = np.exp(lphi + (a * tau_exp / b) * ls)
        A = area(c)
        ok = A > 0
        if not ok.any():
            out.append(-math.inf)
        else:
            lag = t - np.exp(ls[ok])
            log_integrand = log_m(lag) + (a * d / b) * ls[ok] + np.log(A[ok]) + lw[ok]
            log_T = float(np.logaddexp.reduce(log_integrand))
            log_delta = float(of.step_log(1)) if i == 0 else float(
                _log_expm1(float(of.step_log(i + 1) - of.step_log(i))) + of.step_log(i)
            )
            out.append(log_delta + log_T)
        log_phis.append(lphi)
    return np.array(out), np.array(log_phis)


def _log_expm1(x: float) -> float:
    return x + math.log1p(-math.exp(-x)) if x > 1 else math.log(math.expm1(x))


@dataclass
class _SingularField:
    field: Field
    tau_exp: float


def blowup_probe(
    ks: KernelSet,
    of: OsgoodFunction | None,
    q: float,
    eps: float,
    tau: float | None = None,
    rho: float | None = None,
    t: float = 1.0,
    levels: int = 5,
    first_thresholds: int = 2,
    R: float = 2.0,
    factor: float = 1.5,
    min_levels: int = 4,
    quad_panels: int = 48,
) -> BlowupReport:
    """Refinement ladder for the first-iterate local mass on B(eps).

    Level l uses the grid with ``2^l`` times the points of ``ks.grid``, a
    time quadrature with ``quad_panels * 2^l`` panels, and the thresholds
    ``phi_0 .. phi_{first_thresholds + l - 1}``. The functional is the local
    mass of ``S(t) u0`` plus the layer-cake lower bound of the Duhamel term
    (see :func:`_level_terms`). ``of=None`` is the f = 0 control.
    """
    a, b, d = ks.alpha, ks.beta, ks.dim
    params = None
    if of is not None:
        params = RegimeParams(a, b, d, of.k, q)
        if not blowup_condition(params):
            raise DomainError("blow-up condition does not hold for these parameters")
    if tau is None or rho is None:
        if params is None:
            raise DomainError("tau and rho are required for the control run")
        tau, rho, _ = pick_tau_rho(params)
    if not tau * q < d:
        raise DomainError("need tau q < d")
    if not (0 < rho < a / b):
        raise DomainError("rho must lie in (0, alpha/beta)")
    if not (0 < t <= 1):
        raise DomainError("t must lie in (0, 1]")
    data = InitialData.singular(tau, R)
    lv, logs = [], []
    terms = None
    for level in range(levels):
        g = Grid(d, ks.grid.n * 2**level, ks.grid.half_width)
        kk = ks.on_grid(g, "spectral")
        u0 = sample_u0(g, data)
        base = local_mass(s_apply(kk, t, u0), eps)
        log_total = math.log(base)
        n_thr = first_thresholds + level
        if of is not None:
            terms, log_phis = _level_terms(kk, of, _SingularField(u0, tau), t, eps, n_thr, quad_panels * 2**level)
            log_total = float(np.logaddexp.reduce(np.concatenate([[log_total], terms])))
        lv.append({"level": level, "n": g.n, "thresholds": n_thr, "log_functional": log_total,
                   "free_local_mass": base})
        logs.append(log_total)
    ratios = [float(math.exp(min(logs[i + 1] - logs[i], 700.0))) for i in range(len(logs) - 1)]
    policy = {"factor": factor, "min_levels": min_levels, "t": t, "eps": eps}
    if len(lv) < min_levels:
        verdict = "inconclusive"
    elif all(r >= factor for r in ratios):
        verdict = "divergence evidence"
    elif abs(ratios[-1] - 1.0) < 0.05 and all(r < factor for r in ratios[-2:]):
        verdict = "no divergence"
    else:
        verdict = "inconclusive"

    analytic = fit = measured = None
    if of is not None:
        analytic = of.k - (d * rho + 1.0) / (tau * rho)
        idx = np.arange(1, first_thresholds + levels)
        lphi = of.log_phi(idx)
        # the bound f(phi_i) phi_i^(-(d rho + 1)/(tau rho)) with f(phi_i) = phi_{i+1} - phi_i,
        # evaluated in log form and fitted against log phi_i
        log_bound = of.step_log(idx + 1) - (d * rho + 1.0) / (tau * rho) * lphi
        fit = float(np.polyfit(lphi, log_bound, 1)[0])
        good = np.isfinite(terms) & (np.arange(terms.size) >= 2)
        if good.sum() >= 2:
            measured = float(np.polyfit(log_phis[good], terms[good], 1)[0])
    return BlowupReport(lv, ratios, verdict, policy, analytic, fit, measured, tau, rho)


# --------------------------------------------------------------------------
# global small-data study
# --------------------------------------------------------------------------


@dataclass
class GlobalReport:
    C: float
    lam: float
    contraction_factors: np.ndarray
    max_contraction: float
    e_norm_sup: float
    slope: float
    predicted_slope: float
    fit_window: tuple
    supersolution: SuperSolutionReport
    monotone_ok: bool
    converged: bool
    trace: SolverTrace
    scaling: list
    history: History | None = None

    @property
    def slope_error(self) -> float:
        return abs(self.slope - self.predicted_slope)

    def to_json(self) -> dict:
        return {
            "C": self.C,
            "lambda": self.lam,
            "contraction_factors": [float(x) for x in self.contraction_factors],
            "max_contraction": self.max_contraction,
            "e_norm_sup": self.e_norm_sup,
            "slope": self.slope,
            "predicted_slope": self.predicted_slope,
            "fit_window": list(self.fit_window),
            "supersolution": {"ok": self.supersolution.ok, "worst": self.supersolution.worst,
                              "scale": self.supersolution.scale},
            "monotone_ok": self.monotone_ok,
            "converged": self.converged,
            "scaling": self.scaling,
        }


def global_study(
    cfg: SolverConfig,
    of: OsgoodFunction,
    fit_window: tuple | None = None,
    scalings=(1.0, 2.0),
) -> GlobalReport:
    """Small-data run with the power bound ``lam |u|^(k-1) u``, ``lam = 1/C``.

    ``cfg`` supplies the kernel, data, mesh, q and q'. Reports Picard
    contraction factors in the weighted norm, the sup of the weighted norm,
    the late-time decay slope of ``||u(t)||_q``, the super-solution check
    for f^[k] and the monotone iteration started from the fixed point.
    """
    ks = cfg.kernel
    a, b, d = ks.alpha, ks.beta, ks.dim
    if cfg.q_prime is None:
        raise DomainError("cfg.q_prime must be set")
    verdict = global_window(RegimeParams(a, b, d, of.k, cfg.q))
    if not (verdict.global_window_nonempty and verdict.q_in_window and verdict.q_prime_ge_1):
        raise DomainError("parameters are outside the global-existence window")
    if not math.isclose(cfg.q_prime, float(verdict.q_prime), rel_tol=1e-12):
        raise DomainError(f"q' must equal d(k-1)/beta = {float(verdict.q_prime)}")
    C = power_bound_constant(of)
    lam = 1.0 / C
    if lam < C:
        raise DomainError("lam = 1/C < C: the power bound does not dominate f^[k]")
    pcfg = cfg.with_nonlinearity(Nonlinearity.power(lam, of.k))
    hist, trace = fixed_point_solve(pcfg)
    cf = trace.contraction_factors
    cf = cf[np.isfinite(cf)]
    t = cfg.time_mesh.nodes
    norms = trace.column("lq_norm")
    weighted = trace.column("weighted_norm")
    if fit_window is None:
        fit_window = (t[-1] / 10.0, t[-1])
    sel = (t >= fit_window[0]) & (t <= fit_window[1])
    slope = float(np.polyfit(np.log(t[sel]), np.log(norms[sel]), 1)[0])
    pred = -(a * d / b) * (1.0 / cfg.q_prime - 1.0 / cfg.q)

    ocfg = cfg.with_nonlinearity(Nonlinearity.from_osgood(of))
    sup = is_supersolution(ocfg, hist)
    mono_ok = True
    try:
        monotone_iterate(ocfg, hist)
    except ConsistencyError:
        mono_ok = False

    # homogeneity of the first Picard correction under data scaling
    scaling = []
    for sc in scalings:
        scfg = pcfg.with_u0(Field(cfg.u0.grid, cfg.u0.values * sc))
        scfg._engine = pcfg.engine
        u_free = free_evolution(scfg).values
        corr = _apply_F_values(scfg, u_free)[0] - u_free
        scaling.append({"scale": float(sc), "first_correction_e_norm": _e_norm(scfg, corr)})
    return GlobalReport(
        C=C,
        lam=lam,
        contraction_factors=cf,
        max_contraction=float(cf.max()) if cf.size else 0.0,
        e_norm_sup=float(np.max(weighted[1:])),
        slope=slope,
        predicted_slope=pred,
        fit_window=tuple(float(x) for x in fit_window),
        supersolution=sup,
        monotone_ok=mono_ok,
        converged=trace.converged,
        trace=trace,
        scaling=scaling,
        history=hist,
    )
