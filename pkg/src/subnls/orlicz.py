"""N-function toolkit: Luxemburg norm on radial fields, growth-condition
(Delta_2 / Nabla_2) verification through the ratio s A'(s)/A(s), and the
two-piece constructions that match -alpha s^2 ln s^2 near the origin to a
quadratic or power tail at |s| = e^-3 with C^1 gluing.

Growth verdicts are sampled on |s| in [1e-8, 1e8]; a global analytic
certificate is outside what sampling can deliver, so reports carry the
sampled range.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .grid import RadialField

KNOT = math.exp(-3.0)

SAMPLED_RANGE = (1e-8, 1e8)


class OrliczError(RuntimeError):
    pass


@dataclass(frozen=True)
class NFunction:
    """An N-function A with derivative a: nonnegative, even, convex,
    A(s)/s -> 0 at 0 and -> infinity at infinity.

    Families: "log_matched" (log core, quadratic tail), "log_matched_power_tail"
    (log core, |s|^p tail), "pure_q" (|s|^q/q, q > 1), "custom".
    """

    family: str
    alpha: float = 1.0
    p_exp: float = 0.0
    q_exp: float = 0.0
    A_func: Optional[Callable] = None
    a_func: Optional[Callable] = None

    def __post_init__(self):
        if self.family == "log_matched":
            if not self.alpha > 0:
                raise ValueError("log_matched needs alpha > 0")
        elif self.family == "log_matched_power_tail":
            if not (self.alpha > 0 and self.p_exp > 2):
                raise ValueError("log_matched_power_tail needs alpha > 0 and p > 2")
        elif self.family == "pure_q":
            # the natural range here is 1 < q < 2, but any q > 1 is a valid
            # N-function and the quadratic case is useful for testing
            if not self.q_exp > 1:
                raise ValueError("pure_q needs q > 1")
        elif self.family == "custom":
            if self.A_func is None or self.a_func is None:
                raise ValueError("custom needs A and its derivative")
        else:
            raise ValueError(f"unknown N-function family {self.family!r}")

    def A(self, s):
        arr = np.abs(np.asarray(s, dtype=float))
        scalar = arr.ndim == 0
        x = np.atleast_1d(arr)
        if self.family == "log_matched":
            inner = -self.alpha * _xlog(x)
            outer = 3 * self.alpha * x**2 + 4 * self.alpha * KNOT * x - self.alpha * KNOT**2
            out = np.where(x < KNOT, inner, outer)
        elif self.family == "log_matched_power_tail":
            a, p = self.alpha, self.p_exp
            inner = -a * _xlog(x)
            outer = 10 * a / p * math.exp(3 * p - 6) * x**p + 2 * a * (3 - 5 / p) * KNOT**2
            out = np.where(x < KNOT, inner, outer)
        elif self.family == "pure_q":
            out = x**self.q_exp / self.q_exp
        else:
            out = np.asarray([float(self.A_func(v)) for v in x])
        return float(out[0]) if scalar else out.reshape(arr.shape)

    def a(self, s):
        arr = np.asarray(s, dtype=float)
        scalar = arr.ndim == 0
        x = np.atleast_1d(arr)
        mag = np.abs(x)
        if self.family == "log_matched":
            inner = -2 * self.alpha * mag * (_safe_log2(mag) + 1.0)
            outer = 6 * self.alpha * mag + 4 * self.alpha * KNOT
            out = np.where(mag < KNOT, inner, outer)
        elif self.family == "log_matched_power_tail":
            a, p = self.alpha, self.p_exp
            inner = -2 * a * mag * (_safe_log2(mag) + 1.0)
            outer = 10 * a * math.exp(3 * p - 6) * mag ** (p - 1)
            out = np.where(mag < KNOT, inner, outer)
        elif self.family == "pure_q":
            out = mag ** (self.q_exp - 1.0)
        else:
            out = np.asarray([abs(float(self.a_func(v))) for v in mag])
        out = out * np.sign(x)
        return float(out[0]) if scalar else out.reshape(arr.shape)


def _xlog(x):
    out = np.zeros_like(x)
    nz = x > 1e-150
    out[nz] = x[nz] ** 2 * np.log(x[nz] ** 2)
    return out


def _safe_log2(x):
    out = np.full_like(x, -1.0)  # value irrelevant where masked by a zero factor
    nz = x > 1e-150
    out[nz] = np.log(x[nz] ** 2)
    return out


def log_matched(alpha: float = 1.0) -> NFunction:
    return NFunction("log_matched", alpha=alpha)


def log_matched_power_tail(alpha: float, p: float) -> NFunction:
    return NFunction("log_matched_power_tail", alpha=alpha, p_exp=p)


def pure_q(q: float) -> NFunction:
    return NFunction("pure_q", q_exp=q)


def custom(A: Callable, a: Callable) -> NFunction:
    return NFunction("custom", A_func=A, a_func=a)


def modular(field: RadialField, A: NFunction, kappa: float = 1.0) -> float:
    return float(np.dot(field.grid.w, A.A(field.values / kappa)))


def luxemburg_norm(field: RadialField, A: NFunction) -> float:
    """inf{kappa > 0 : int A(u/kappa) <= 1}, by bracketing + Brent on the
    strictly decreasing modular; 0 for the zero field."""
    if not np.any(field.values):
        return 0.0
    from scipy.optimize import brentq

    lo, hi = 1e-12, 1e12
    with np.errstate(over="ignore"):
        m_hi = modular(field, A, hi)
        if m_hi > 1.0:
            raise OrliczError("modular stays above 1 on the whole bracket")
        kappa = 1.0
        m = modular(field, A, kappa)
        if m == 1.0:
            return kappa
        if m > 1.0:
            lo = kappa
            while modular(field, A, min(kappa * 4.0, hi)) > 1.0:
                kappa = min(kappa * 4.0, hi)
                lo = kappa
            hi_b = min(kappa * 4.0, hi)
        else:
            hi_b = kappa
            while modular(field, A, max(kappa / 4.0, lo)) < 1.0:
                kappa = max(kappa / 4.0, lo)
                hi_b = kappa
            lo = max(kappa / 4.0, lo)
        return float(brentq(lambda k: modular(field, A, k) - 1.0, lo, hi_b,
                            rtol=1e-12, maxiter=200))


@dataclass
class GrowthReport:
    holds: bool
    c_delta: float
    c_nabla: float
    sampled_range: tuple


@functools.lru_cache(maxsize=64)
def check_delta2_nabla2(A: NFunction) -> GrowthReport:
    """Empirical growth constants sup and inf of s a(s)/A(s) over the
    sampled range; the verdict fails when the sup diverges or the inf is
    not above 1.
    """
    s = np.logspace(math.log10(SAMPLED_RANGE[0]), math.log10(SAMPLED_RANGE[1]), 4000)
    ratio = s * np.atleast_1d(A.a(s)) / np.atleast_1d(A.A(s))
    c_delta = float(np.max(ratio))
    c_nabla = float(np.min(ratio))
    ok = np.all(np.isfinite(ratio)) and c_nabla > 1.0
    return GrowthReport(holds=bool(ok), c_delta=c_delta, c_nabla=c_nabla,
                        sampled_range=SAMPLED_RANGE)


def complementary_gap(A: NFunction, s: float) -> float:
    """s a(s) - A(s), the complementary modular at a(s); bounded by
    (C_delta - 1) A(s) under the sampled growth constant."""
    gap = float(s * A.a(s) - A.A(s))
    rep = check_delta2_nabla2(A)
    bound = (rep.c_delta - 1.0) * float(A.A(s))
    assert gap <= bound * (1.0 + 1e-9) + 1e-15, (gap, bound)
    return gap


def knot_mismatch(A: NFunction) -> tuple:
    """(value jump, derivative jump) of the two branch formulas at |s| = e^-3."""
    al = A.alpha
    inner_val = -al * KNOT**2 * math.log(KNOT**2)
    inner_der = -2 * al * KNOT * (math.log(KNOT**2) + 1.0)
    if A.family == "log_matched":
        outer_val = 3 * al * KNOT**2 + 4 * al * KNOT * KNOT - al * KNOT**2
        outer_der = 6 * al * KNOT + 4 * al * KNOT
    elif A.family == "log_matched_power_tail":
        p = A.p_exp
        outer_val = 10 * al / p * math.exp(3 * p - 6) * KNOT**p + 2 * al * (3 - 5 / p) * KNOT**2
        outer_der = 10 * al * math.exp(3 * p - 6) * KNOT ** (p - 1)
    else:
        raise ValueError("knot check applies to the two-piece families")
    return outer_val - inner_val, outer_der - inner_der
