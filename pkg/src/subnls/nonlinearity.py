"""Nonlinearity families for -Delta u + lambda u = g(u), their splittings
g = g_plus - g_minus and G = G_plus - G_minus, the ramp cutoff used to
regularize the singular negative part, and closed-form existence thresholds.

G_plus collects the increasing part of the primitive,

    G_plus(s) = int_0^s max(g, 0)      for s >= 0,
    G_plus(s) = int_s^0 max(-g, 0)     for s < 0,

so G_plus, G_minus >= 0 while g_minus satisfies s*g_minus(s) >= 0 (it is
negative on the negative half line).  For the built-in families everything
is evaluated from antiderivatives split at the sign-change points of g,
located once at construction; no quadrature appears in the hot path.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "numerically-inconclusive"

# below this magnitude s^2 log s^2 is treated as its limit 0; the floor sits
# above sqrt(double minimum) so the square itself cannot underflow
_TINY = 1e-150


class QuadratureError(RuntimeError):
    """Adaptive quadrature for a custom nonlinearity failed to converge."""


@dataclass(frozen=True)
class NonlinearitySpec:
    """A nonlinearity g with spatial dimension, immutable after construction.

    Families: "log" (alpha*s*ln s^2), "log_power" (alpha*s*ln s^2 +
    mu*|s|^(p-2)*s), "saturation" (s^3/(1+s^2)), "power_sublinear"
    (-|s|^(omega-1)*s), and "custom".
    """

    family: str
    dim: int
    alpha: float = 1.0
    mu: float = 0.0
    p_exp: float = 0.0
    omega: float = 0.0
    g_func: Optional[Callable] = None
    G_func: Optional[Callable] = None

    def __post_init__(self):
        if self.dim < 2 or int(self.dim) != self.dim:
            raise ValueError("dim must be an integer >= 2")
        if self.family == "log":
            if not self.alpha > 0:
                raise ValueError("log family needs alpha > 0")
        elif self.family == "log_power":
            if not self.alpha > 0:
                raise ValueError("log_power needs alpha > 0")
            if self.dim >= 3:
                two_star = 2.0 * self.dim / (self.dim - 2.0)
                if not (2.0 < self.p_exp <= two_star):
                    raise ValueError(f"log_power needs 2 < p <= {two_star} for dim={self.dim}")
            elif not self.p_exp > 2.0:
                raise ValueError("log_power needs p > 2")
        elif self.family == "power_sublinear":
            if not (0.0 < self.omega < 1.0):
                raise ValueError("power_sublinear needs 0 < omega < 1")
        elif self.family == "saturation":
            pass
        elif self.family == "custom":
            if self.g_func is None:
                raise ValueError("custom family needs g")
            if abs(float(self.g_func(0.0))) > 1e-14:
                raise ValueError("g(0) must vanish")
        else:
            raise ValueError(f"unknown family {self.family!r}")

    @property
    def mass_critical_exp(self) -> float:
        return 2.0 + 4.0 / self.dim


def logarithmic(alpha: float = 1.0, *, dim: int) -> NonlinearitySpec:
    return NonlinearitySpec("log", dim, alpha=alpha)


def log_power(alpha: float, mu: float, p: float, *, dim: int) -> NonlinearitySpec:
    return NonlinearitySpec("log_power", dim, alpha=alpha, mu=mu, p_exp=p)


def saturation(*, dim: int) -> NonlinearitySpec:
    return NonlinearitySpec("saturation", dim)


def power_sublinear(omega: float, *, dim: int) -> NonlinearitySpec:
    return NonlinearitySpec("power_sublinear", dim, omega=omega)


def custom(g: Callable, G: Optional[Callable] = None, *, dim: int) -> NonlinearitySpec:
    return NonlinearitySpec("custom", dim, g_func=g, G_func=G)


# ---------------------------------------------------------------------------
# half-line primitives (arguments are |s| arrays); built-in g are odd, so the
# negative axis follows by symmetry.  P(s) = int_0^s t g(t) dt feeds the
# cutoff integral.

def _xlogx2(s):
    # s^2 ln s^2 with the limit value 0 at s = 0
    out = np.zeros_like(s)
    nz = s > _TINY
    out[nz] = s[nz] ** 2 * np.log(s[nz] ** 2)
    return out


def _g_half(spec, s):
    if spec.family == "log":
        out = np.zeros_like(s)
        nz = s > _TINY
        out[nz] = spec.alpha * s[nz] * np.log(s[nz] ** 2)
        return out
    if spec.family == "log_power":
        out = _g_half(NonlinearitySpec("log", spec.dim, alpha=spec.alpha), s)
        return out + spec.mu * s ** (spec.p_exp - 1.0)
    if spec.family == "saturation":
        return s**3 / (1.0 + s**2)
    if spec.family == "power_sublinear":
        return -(s**spec.omega)
    return np.asarray([float(spec.g_func(x)) for x in np.atleast_1d(s)])


def _G_half(spec, s):
    if spec.family == "log":
        return 0.5 * spec.alpha * (_xlogx2(s) - s**2)
    if spec.family == "log_power":
        return (0.5 * spec.alpha * (_xlogx2(s) - s**2)
                + spec.mu / spec.p_exp * s**spec.p_exp)
    if spec.family == "saturation":
        return 0.5 * (s**2 - np.log1p(s**2))
    if spec.family == "power_sublinear":
        return -(s ** (spec.omega + 1.0)) / (spec.omega + 1.0)
    if spec.G_func is not None:
        return np.asarray([float(spec.G_func(x)) for x in np.atleast_1d(s)])
    return np.asarray([_quad(spec.g_func, 0.0, float(x)) for x in np.atleast_1d(s)])


def _P_half(spec, s):
    # antiderivative of t*g(t) from 0
    if spec.family == "log":
        out = np.zeros_like(s)
        nz = s > _TINY
        sn = s[nz]
        out[nz] = spec.alpha * (sn**3 / 3.0 * np.log(sn**2) - 2.0 / 9.0 * sn**3)
        return out
    if spec.family == "log_power":
        base = _P_half(NonlinearitySpec("log", spec.dim, alpha=spec.alpha), s)
        return base + spec.mu * s ** (spec.p_exp + 1.0) / (spec.p_exp + 1.0)
    if spec.family == "saturation":
        return s**3 / 3.0 - s + np.arctan(s)
    if spec.family == "power_sublinear":
        return -(s ** (spec.omega + 2.0)) / (spec.omega + 2.0)
    return np.asarray([_quad(lambda t: t * spec.g_func(t), 0.0, float(x))
                       for x in np.atleast_1d(s)])


def _quad(f, a, b):
    from scipy.integrate import quad

    if a == b:
        return 0.0
    out = quad(f, a, b, epsabs=1e-10, epsrel=1e-8, limit=2**15, full_output=True)
    val, info = out[0], out[2]
    if info.get("last", 0) >= 2**15 or not np.isfinite(val):
        raise QuadratureError(f"quadrature over [{a}, {b}] did not converge")
    return val


@functools.lru_cache(maxsize=128)
def _sign_structure(spec: NonlinearitySpec):
    """Sign-change points of g on (0, inf) and per-interval prefix tables.

    Returns (roots, signs, Gp_prefix, Im_prefix): signs[j] is the sign of g
    on the j-th interval; Gp_prefix[j] and Im_prefix[j] are G_plus and
    int_0^. t g_minus(t) dt accumulated up to the interval's left endpoint.
    """
    roots = _positive_roots(spec)
    pts = [0.0] + list(roots)
    signs = []
    for j, left in enumerate(pts):
        right = roots[j] if j < len(roots) else max(2.0 * left, 1.0) * 10.0
        mid = math.sqrt(left * right) if left > 0 else right / 2.0
        signs.append(1 if float(_g_half(spec, np.asarray([mid]))[0]) > 0 else -1)
    Gvals = _G_half(spec, np.asarray(pts))
    Pvals = _P_half(spec, np.asarray(pts))
    gp = [0.0]
    im = [0.0]
    for j in range(len(roots)):
        dG = float(Gvals[j + 1] - Gvals[j])
        dP = float(Pvals[j + 1] - Pvals[j])
        gp.append(gp[-1] + (dG if signs[j] > 0 else 0.0))
        im.append(im[-1] + (-dP if signs[j] < 0 else 0.0))
    return (np.asarray(roots), np.asarray(signs), np.asarray(gp), np.asarray(im))


def _positive_roots(spec):
    from scipy.optimize import brentq

    if spec.family == "log":
        return (1.0,)
    if spec.family in ("saturation", "power_sublinear"):
        return ()
    if spec.family == "log_power":
        a, mu, p = spec.alpha, spec.mu, spec.p_exp

        def h(t):
            return a * math.log(t * t) + mu * t ** (p - 2.0)

        if mu == 0.0:
            return (1.0,)
        if mu > 0.0:
            return (brentq(h, 1e-18, 1.0, rtol=8.9e-16),)
        t_star = (2.0 * a / (-mu * (p - 2.0))) ** (1.0 / (p - 2.0))
        if h(t_star) <= 0.0:
            return ()
        hi = t_star
        while h(hi) > 0.0:
            hi *= 2.0
        r2 = brentq(h, t_star, hi, rtol=8.9e-16)
        r1 = brentq(h, 1e-18 * min(1.0, t_star), t_star, rtol=8.9e-16)
        return (r1, r2)
    # custom: scan for sign changes on a log grid
    grid = np.concatenate([[0.0], np.logspace(-9, 9, 1200)])
    vals = _g_half(spec, grid)
    roots = []
    for lo, hi, flo, fhi in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if flo == 0.0 or flo * fhi >= 0.0:
            continue
        roots.append(brentq(lambda t: float(_g_half(spec, np.asarray([t]))[0]),
                            lo, hi, rtol=8.9e-16))
    return tuple(roots)


def _is_odd(spec) -> bool:
    return spec.family != "custom"


def _as_array(s):
    arr = np.asarray(s, dtype=float)
    return arr, arr.ndim == 0


def g_value(spec: NonlinearitySpec, s):
    arr, scalar = _as_array(s)
    flat = np.atleast_1d(arr)
    if _is_odd(spec):
        out = np.sign(flat) * _g_half(spec, np.abs(flat))
    else:
        out = np.asarray([float(spec.g_func(x)) for x in flat])
    return float(out[0]) if scalar else out.reshape(arr.shape)


def G_value(spec: NonlinearitySpec, s):
    arr, scalar = _as_array(s)
    flat = np.atleast_1d(arr)
    if _is_odd(spec):
        out = _G_half(spec, np.abs(flat))
    else:
        out = np.asarray([_signed_G_custom(spec, float(x)) for x in flat])
    return float(out[0]) if scalar else out.reshape(arr.shape)


def _signed_G_custom(spec, x):
    if spec.G_func is not None:
        return float(spec.G_func(x))
    return _quad(spec.g_func, 0.0, x)


def g_plus_value(spec: NonlinearitySpec, s):
    """Derivative of G_plus: keeps g where s*g(s) > 0, zero elsewhere."""
    arr, scalar = _as_array(s)
    flat = np.atleast_1d(arr)
    g = np.atleast_1d(g_value(spec, flat))
    out = np.where(flat * g > 0.0, g, 0.0)
    return float(out[0]) if scalar else out.reshape(arr.shape)


def G_plus_value(spec: NonlinearitySpec, s):
    arr, scalar = _as_array(s)
    flat = np.atleast_1d(arr)
    if not _is_odd(spec):
        out = np.asarray([_Gp_custom(spec, float(x)) for x in flat])
        return float(out[0]) if scalar else out.reshape(arr.shape)
    mag = np.abs(flat)
    roots, signs, gp_prefix, _ = _sign_structure(spec)
    idx = np.searchsorted(roots, mag, side="right")
    left = np.concatenate([[0.0], roots])[idx]
    Gl = _G_half(spec, left)
    Gs = _G_half(spec, mag)
    out = gp_prefix[idx] + np.where(signs[idx] > 0, Gs - Gl, 0.0)
    return float(out[0]) if scalar else out.reshape(arr.shape)


def _Gp_custom(spec, x):
    if x >= 0:
        return _quad(lambda t: max(float(spec.g_func(t)), 0.0), 0.0, x)
    return _quad(lambda t: max(-float(spec.g_func(t)), 0.0), x, 0.0)


def _Iminus_half(spec, m):
    """int_0^m t g_minus(t) dt on the positive half line (vector m >= 0)."""
    roots, signs, _, im_prefix = _sign_structure(spec)
    idx = np.searchsorted(roots, m, side="right")
    left = np.concatenate([[0.0], roots])[idx]
    neg = signs[idx] < 0
    return im_prefix[idx] + np.where(neg, -(_P_half(spec, m) - _P_half(spec, left)), 0.0)


@dataclass
class SplitValues:
    g: object
    G: object
    G_plus: object
    G_minus: object
    g_plus: object
    g_minus: object


def eval_split(spec: NonlinearitySpec, s) -> SplitValues:
    """Pointwise nonlinearity, primitive and splittings at s (scalar or array)."""
    g = g_value(spec, s)
    G = G_value(spec, s)
    Gp = G_plus_value(spec, s)
    gp = g_plus_value(spec, s)
    return SplitValues(g=g, G=G, G_plus=Gp, G_minus=Gp - G, g_plus=gp, g_minus=gp - g)


def phi_eps(s, eps: float):
    """Ramp cutoff: |s|/eps below eps, 1 beyond; even in s."""
    _check_eps(eps)
    arr, scalar = _as_array(s)
    out = np.minimum(np.abs(arr) / eps, 1.0)
    return float(out) if scalar else out


def _check_eps(eps):
    if not (0.0 < eps < 1.0):
        raise ValueError(f"eps must lie in (0, 1), got {eps}")


def G_minus_eps(spec: NonlinearitySpec, s, eps: float):
    """Cutoff negative-part primitive int_0^s phi_eps(t) g_minus(t) dt.

    Nonnegative; differs from G_minus by a fixed deficit once |s| >= eps;
    decreases pointwise as eps grows.
    """
    _check_eps(eps)
    arr, scalar = _as_array(s)
    flat = np.atleast_1d(arr)
    if not _is_odd(spec):
        out = np.asarray([_Gme_custom(spec, float(x), eps) for x in flat])
        return float(out[0]) if scalar else out.reshape(arr.shape)
    mag = np.abs(flat)
    m = np.minimum(mag, eps)
    Gm_s = np.atleast_1d(G_plus_value(spec, mag)) - _G_half(spec, mag)
    Gm_m = np.atleast_1d(G_plus_value(spec, m)) - _G_half(spec, m)
    out = _Iminus_half(spec, m) / eps + Gm_s - Gm_m
    return float(out[0]) if scalar else out.reshape(arr.shape)


def _Gme_custom(spec, x, eps):
    def gm(t):
        gv = float(spec.g_func(t))
        gp = gv if t * gv > 0 else 0.0
        return gp - gv

    def integrand(t):
        return min(abs(t) / eps, 1.0) * gm(t)

    return _quad(integrand, 0.0, x)


def g_eps(spec: NonlinearitySpec, s, eps: float):
    """Regularized right-hand side g_plus - phi_eps * g_minus (eps=0 gives g)."""
    if eps == 0.0:
        return g_value(spec, s)
    _check_eps(eps)
    arr, scalar = _as_array(s)
    flat = np.atleast_1d(arr)
    g = np.atleast_1d(g_value(spec, flat))
    gp = np.where(flat * g > 0.0, g, 0.0)
    out = gp - np.minimum(np.abs(flat) / eps, 1.0) * (gp - g)
    return float(out[0]) if scalar else out.reshape(arr.shape)


def G_eps(spec: NonlinearitySpec, s, eps: float):
    """Regularized primitive G_plus - G_minus^eps (eps=0 gives G)."""
    if eps == 0.0:
        return G_value(spec, s)
    return G_plus_value(spec, s) - G_minus_eps(spec, s, eps)


# ---------------------------------------------------------------------------
# thresholds for the log + power family


def mu_threshold(alpha: float, p: float) -> float:
    """Coefficient below which no finite-action normalized solution exists:
    -alpha*p/(p-2) * exp(-p/2)."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if not p > 2:
        raise ValueError("p must exceed 2")
    return -alpha * p / (p - 2.0) * math.exp(-p / 2.0)


def gtilde_max(alpha: float, mu: float, p: float) -> float:
    """Maximum over s > 0 of G(s)/s^2 for the log + power family with mu < 0.

    Its sign decides whether the primitive is ever positive; it vanishes
    exactly at mu = mu_threshold(alpha, p).
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if not p > 2:
        raise ValueError("p must exceed 2")
    if not mu < 0:
        raise ValueError("gtilde_max is defined for mu < 0")
    x = alpha * p / (mu * (2.0 - p))
    return alpha / 2.0 * (2.0 / (p - 2.0) * math.log(x) - 1.0) - alpha / (p - 2.0)


@dataclass
class ThresholdReport:
    mu_star: float
    gtilde_max: float
    g4_holds: bool
    xi0: Optional[float]
    eta: float


def threshold_report(spec: NonlinearitySpec) -> ThresholdReport:
    if spec.family != "log_power":
        raise ValueError("threshold report applies to the log_power family")
    mu_star = mu_threshold(spec.alpha, spec.p_exp)
    gmax = gtilde_max(spec.alpha, spec.mu, spec.p_exp) if spec.mu < 0 else math.inf
    g4 = spec.mu > mu_star
    xi0 = find_positive_level(spec) if g4 else None
    return ThresholdReport(mu_star=mu_star, gtilde_max=gmax, g4_holds=g4,
                           xi0=xi0, eta=eta_coefficient(spec).value)


@dataclass
class EtaEstimate:
    value: float
    sampled: bool


def eta_coefficient(spec: NonlinearitySpec) -> EtaEstimate:
    """limsup at infinity of G_plus(s)/|s|^(2+4/N); exact for built-ins."""
    pc = spec.mass_critical_exp
    if spec.family in ("log", "saturation", "power_sublinear"):
        return EtaEstimate(0.0, sampled=False)
    if spec.family == "log_power":
        if spec.mu <= 0 or spec.p_exp < pc:
            return EtaEstimate(0.0, sampled=False)
        if spec.p_exp == pc:
            return EtaEstimate(spec.mu / spec.p_exp, sampled=False)
        return EtaEstimate(math.inf, sampled=False)
    samples = [float(G_plus_value(spec, 10.0**k)) / 10.0 ** (k * pc) for k in range(2, 9)]
    return EtaEstimate(float(max(samples[-3:])), sampled=True)


# ---------------------------------------------------------------------------
# assumption report


@dataclass
class AssumptionReport:
    g0: str
    g1: str
    g2: str
    g3: str
    g4: str
    xi0: Optional[float]
    details: dict

    def verdicts(self) -> dict:
        return {"g0": self.g0, "g1": self.g1, "g2": self.g2,
                "g3": self.g3, "g4": self.g4}

    @property
    def any_fails(self) -> bool:
        return FAILS in self.verdicts().values()


def find_positive_level(spec: NonlinearitySpec) -> Optional[float]:
    """Smallest sampled |s| where the primitive G is safely positive."""
    s = np.logspace(-6, 6, 3000)
    G = np.atleast_1d(G_value(spec, s))
    ok = G > 1e-14 * (1.0 + s**2)
    if not ok.any():
        return None
    return float(s[np.argmax(ok)])


def check_assumptions(spec: NonlinearitySpec) -> AssumptionReport:
    """Sampled verdicts for continuity at 0, quadratic smallness of G_plus
    at 0, growth caps at infinity, mass-subcriticality of G_plus, and
    positivity of G somewhere.  Inconclusive is a verdict, not an error.
    """
    details = {}
    small = np.logspace(-8, -1, 40)
    big = np.logspace(1, 8, 40)

    g_small = np.abs(np.atleast_1d(g_value(spec, small)))
    if abs(g_value(spec, 0.0)) != 0.0:
        g0 = FAILS
    elif g_small[0] <= 1e-5 or g_small[0] <= 0.02 * g_small[-1]:
        g0 = HOLDS
    elif g_small[0] >= 0.5 * g_small[-1] and g_small[0] > 1e-5:
        g0 = FAILS
    else:
        g0 = INCONCLUSIVE
    details["g0_at_1e-8"] = float(g_small[0])

    gp_ratio = np.atleast_1d(G_plus_value(spec, small)) / small**2
    gpd = np.abs(np.atleast_1d(g_plus_value(spec, small))) / small
    near0, far0 = gp_ratio[0], gp_ratio[-1]
    if gpd.max() >= 1e6:
        g1 = FAILS
    elif near0 <= 1e-10 or near0 <= 1e-6 * max(1.0, far0):
        g1 = HOLDS
    elif near0 > 10.0 * max(far0, 1e-12):
        g1 = FAILS
    else:
        g1 = INCONCLUSIVE
    details["g1_ratio_near0"] = float(near0)

    if spec.dim >= 3:
        two_star = 2.0 * spec.dim / (spec.dim - 2.0)
        growth = np.abs(np.atleast_1d(g_value(spec, big))) / big ** (two_star - 1.0)
        g2 = HOLDS if growth[-1] <= max(10.0 * growth[0], 1e3) else FAILS
        details["g2_growth_tail"] = float(growth[-1])
    else:
        s2 = np.linspace(1.0, 6.0, 30)
        damped = np.abs(np.atleast_1d(g_value(spec, s2))) * np.exp(-(4 * math.pi + 0.1) * s2**2)
        g2 = HOLDS if damped[-1] <= 1e-8 * max(1.0, damped[0]) else INCONCLUSIVE
        details["g2_damped_tail"] = float(damped[-1])

    g3_ratio = np.atleast_1d(G_plus_value(spec, big)) / big**spec.mass_critical_exp
    first, last = g3_ratio[0], g3_ratio[-1]
    if last <= 1e-6 * max(1.0, first) or last <= 1e-12:
        g3 = HOLDS
    elif last >= 0.5 * max(first, 1e-6) and last > 1e-6:
        g3 = FAILS
    else:
        g3 = INCONCLUSIVE
    details["g3_ratio_tail"] = float(last)

    s4 = np.logspace(-6, 6, 3000)
    G4 = np.atleast_1d(G_value(spec, s4))
    best = int(np.argmax(G4))
    gmax = float(G4[best])
    if gmax > 0:
        from scipy.optimize import minimize_scalar

        lo = s4[max(best - 1, 0)]
        hi = s4[min(best + 1, len(s4) - 1)]
        if hi > lo:
            res = minimize_scalar(lambda x: -float(G_value(spec, x)),
                                  bounds=(lo, hi), method="bounded")
            gmax = max(gmax, -float(res.fun))
    xi0 = find_positive_level(spec)
    if gmax > 0 and xi0 is not None:
        g4 = HOLDS
    elif gmax <= -1e-12:
        g4, xi0 = FAILS, None
    else:
        g4, xi0 = INCONCLUSIVE, None
    details["g4_max"] = gmax

    return AssumptionReport(g0=g0, g1=g1, g2=g2, g3=g3, g4=g4, xi0=xi0, details=details)
