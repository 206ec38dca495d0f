"""Critical exponents and parameter classification.

All comparisons use exact rational arithmetic. Floats are read through
their shortest decimal representation (``0.8`` means 4/5), so boundary
cases such as ``k = q (1 + beta/(alpha d))`` classify as "not satisfied".
"""
from __future__ import annotations

import csv
import math
import numbers
from dataclasses import dataclass
from fractions import Fraction

from .specfun import DomainError

__all__ = [
    "RegimeParams",
    "RegimeVerdict",
    "InfeasibleError",
    "exact",
    "q_critical",
    "blowup_condition",
    "global_window",
    "pick_tau_rho",
    "tau_rho_margin",
    "classify_rows",
    "VERDICT_COLUMNS",
    "write_verdicts",
]


class InfeasibleError(RuntimeError):
    """No admissible (tau, rho) pair was found."""


def exact(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, numbers.Integral):
        return Fraction(int(x))
    if isinstance(x, numbers.Real):
        x = float(x)
        if not math.isfinite(x):
            raise DomainError("parameters must be finite")
        return Fraction(repr(x))
    return Fraction(str(x).strip())


@dataclass(frozen=True)
class RegimeParams:
    alpha: Fraction
    beta: Fraction
    d: int
    k: Fraction
    q: Fraction = Fraction(1)

    def __init__(self, alpha, beta, d, k, q=1):
        object.__setattr__(self, "alpha", exact(alpha))
        object.__setattr__(self, "beta", exact(beta))
        object.__setattr__(self, "d", int(d))
        object.__setattr__(self, "k", exact(k))
        object.__setattr__(self, "q", exact(q))
        if not (0 < self.alpha < 1):
            raise DomainError("alpha must lie in (0, 1)")
        if not (0 < self.beta < 2):
            raise DomainError("beta must lie in (0, 2)")
        if self.d < 1 or self.d != d:
            raise DomainError("d must be a positive integer")
        if not self.k > 1:
            raise DomainError("k must exceed 1")
        if not self.q >= 1:
            raise DomainError("q must be >= 1")


@dataclass(frozen=True)
class RegimeVerdict:
    q_c: Fraction
    q_prime: Fraction
    window: tuple
    blowup_condition: bool
    global_window_nonempty: bool
    q_in_window: bool
    q_prime_ge_1: bool

    @property
    def q_lo(self) -> Fraction:
        return self.window[0]

    @property
    def q_hi(self) -> Fraction:
        return self.window[1]


def q_critical(p: RegimeParams, as_fraction: bool = False):
    """``q_c = k alpha d / (alpha d + beta)``."""
    ad = p.alpha * p.d
    val = p.k * ad / (ad + p.beta)
    return val if as_fraction else float(val)


def blowup_condition(p: RegimeParams) -> bool:
    """``k > q (1 + beta / (alpha d))`` (strict)."""
    return p.k > p.q * (1 + p.beta / (p.alpha * p.d))


def global_window(p: RegimeParams) -> RegimeVerdict:
    d, b, k, a = p.d, p.beta, p.k, p.alpha
    q_prime = d * (k - 1) / b
    lo = max(Fraction(d) / b, k, q_prime)
    hi = a * d * k * (k - 1) / b
    nonempty = lo < hi
    return RegimeVerdict(
        q_c=q_critical(p, True),
        q_prime=q_prime,
        window=(lo, hi),
        blowup_condition=blowup_condition(p),
        global_window_nonempty=nonempty,
        q_in_window=bool(nonempty and lo < p.q < hi),
        q_prime_ge_1=q_prime >= 1,
    )


def tau_rho_margin(p: RegimeParams, tau: float, rho: float) -> float:
    """``k - (d + 1/rho) / tau``; positive when the pair is admissible."""
    return float(p.k) - (p.d + 1.0 / rho) / tau


def pick_tau_rho(p: RegimeParams, lattice: int = 41, max_depth: int = 12) -> tuple[float, float, float]:
    """Admissible ``(tau, rho, margin)`` with tau < d/q and rho < alpha/beta.

    A lattice over the box (shrunk from its boundary by a relative amount,
    1% to start) is searched for the largest margin; the shrink is halved
    until a positive margin appears or ``max_depth`` is hit.
    """
    if not blowup_condition(p):
        raise DomainError("the blow-up condition k > q (1 + beta/(alpha d)) does not hold")
    tau_max = float(Fraction(p.d) / p.q)
    rho_max = float(p.alpha / p.beta)
    shrink = 0.01
    best = None
    for _ in range(max_depth):
        taus = [tau_max * (shrink + (1 - 2 * shrink) * j / (lattice - 1)) for j in range(lattice)]
        rhos = [rho_max * (shrink + (1 - 2 * shrink) * j / (lattice - 1)) for j in range(lattice)]
        for t in taus:
            for r in rhos:
                m = tau_rho_margin(p, t, r)
                if best is None or m > best[2]:
                    best = (t, r, m)
        if best[2] > 0:
            return best
        shrink /= 2
    raise InfeasibleError(f"no admissible (tau, rho) found; best margin {best[2]:.3e}")


VERDICT_COLUMNS = ["alpha", "beta", "d", "k", "q", "q_c", "q_prime", "q_lo", "q_hi", "blowup", "global_ok"]


def _fmt(x: Fraction) -> str:
    return repr(float(x))


def classify_rows(params) -> list[dict]:
    """Verdict rows for an iterable of :class:`RegimeParams`."""
    rows = []
    for p in params:
        v = global_window(p)
        rows.append(
            {
                "alpha": _fmt(p.alpha),
                "beta": _fmt(p.beta),
                "d": str(p.d),
                "k": _fmt(p.k),
                "q": _fmt(p.q),
                "q_c": _fmt(v.q_c),
                "q_prime": _fmt(v.q_prime),
                "q_lo": _fmt(v.q_lo),
                "q_hi": _fmt(v.q_hi),
                "blowup": str(v.blowup_condition).lower(),
                "global_ok": str(v.q_in_window and v.q_prime_ge_1).lower(),
            }
        )
    return rows


def write_verdicts(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=VERDICT_COLUMNS)
        w.writeheader()
        w.writerows(rows)
