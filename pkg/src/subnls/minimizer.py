"""Constrained minimization of the regularized energy

    E_eps(u) = 1/2 int |grad u|^2 + int Gminus_eps(u) - int Gplus(u)

over the L2 disc {mass(u) <= rho^2}, and the continuation eps -> 0 that
recovers the unregularized ground state.

The optimizer is projected gradient descent with a Barzilai-Borwein step
proposal and Armijo backtracking along the projection arc.  Minimizing over
the disc rather than the sphere is deliberate: the disc is weakly closed, a
minimizer with positive multiplier is automatically pushed onto the sphere,
and runs where the flow collapses into the interior are exactly the
nonexistence evidence the diagnostics consume.  Non-convergence is data
(converged=False), not an exception; only a step that cannot decrease the
energy at the smallest step size raises.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import nonlinearity as nl
from .grid import (RadialField, RadialGrid, kinetic, laplacian_values,
                   mass, wnorm)

log = logging.getLogger("subnls.minimizer")

DEFAULT_EPS_SCHEDULE = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4)


class StepFailure(RuntimeError):
    """Backtracking exhausted without an energy decrease."""


class ContinuationAborted(RuntimeError):
    """A continuation stage failed to converge; partial results attached."""

    def __init__(self, message, stages):
        super().__init__(message)
        self.stages = stages


@dataclass
class SolveConfig:
    spec: nl.NonlinearitySpec
    rho: float
    r_max: float = 20.0
    n: int = 2000
    eps_schedule: Sequence[float] = DEFAULT_EPS_SCHEDULE
    tol_grad: float = 1e-8
    tol_mass: float = 1e-9
    max_iter: int = 20000
    step_init: float = 1e-3
    backtrack: float = 0.5
    armijo: float = 1e-4
    seed: int = 0
    rearrange_every: int = 0
    multistarts: int = 1

    def __post_init__(self):
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        sched = tuple(self.eps_schedule)
        if not sched:
            raise ValueError("eps schedule must be nonempty")
        if any(not (0.0 < e < 1.0) for e in sched):
            raise ValueError("eps values must lie in (0, 1)")
        if any(b <= a for a, b in zip(sched[1:], sched[:-1])):
            raise ValueError("eps schedule must be strictly decreasing")
        self.eps_schedule = sched

    def make_grid(self) -> RadialGrid:
        return RadialGrid(self.spec.dim, self.r_max, self.n)


@dataclass
class SolverResult:
    u: RadialField
    lam: float
    energy: float
    eps: float
    rho: float
    mass: float
    kinetic: float
    iterations: int
    converged: bool
    on_sphere: bool
    bundle: object = None

    def to_json_dict(self) -> dict:
        return {
            "rho": self.rho,
            "eps": self.eps,
            "lambda": self.lam,
            "energy": self.energy,
            "mass": self.mass,
            "kinetic": self.kinetic,
            "iterations": self.iterations,
            "converged": self.converged,
            "on_sphere": self.on_sphere,
            "pohozaev_residual": getattr(self.bundle, "pohozaev_rel", None),
            "nehari_residual": getattr(self.bundle, "nehari_rel", None),
        }


@dataclass
class EnergyMapPoint:
    rho: float
    c_value: float
    eps: float
    converged: bool


@dataclass
class ContinuationResult:
    stages: list
    limit: SolverResult
    eps_monotone: bool
    total_iterations: int


def energy_eps(u: RadialField, spec: nl.NonlinearitySpec, eps: float) -> float:
    """Discrete E_eps(u); eps=0 evaluates the unregularized energy."""
    vals = u.values
    if eps == 0.0:
        dens = nl.G_value(spec, vals)
    else:
        dens = nl.G_plus_value(spec, vals) - nl.G_minus_eps(spec, vals, eps)
    return 0.5 * kinetic(u) - float(np.dot(u.grid.w, dens))


def grad_energy_eps(u: RadialField, spec: nl.NonlinearitySpec, eps: float) -> RadialField:
    """L2-gradient field -Lap u - g_eps(u); consistent with energy_eps at
    machine level thanks to exact summation by parts."""
    return RadialField(u.grid, _grad_parts(u.grid, u.values, spec, eps)[0])


def _grad_parts(grid, vals, spec, eps):
    lap = laplacian_values(grid, vals)
    rhs = np.atleast_1d(nl.g_eps(spec, vals, eps))
    return -lap - rhs, lap, rhs


def project_disc(u: RadialField, rho: float) -> RadialField:
    """Radial projection onto {mass <= rho^2}: identity inside, rescale outside."""
    m = mass(u)
    if m <= rho * rho:
        return u
    return RadialField(u.grid, u.values * (rho / math.sqrt(m)))


def extract_lambda(u: RadialField, spec: nl.NonlinearitySpec, eps: float) -> float:
    """Multiplier from the Nehari pairing: (int g_eps(u) u - |grad u|^2)/|u|^2."""
    m = mass(u)
    if m <= 0.0:
        raise ValueError("cannot extract a multiplier from the zero field")
    pairing = float(np.dot(u.grid.w, nl.g_eps(spec, u.values, eps) * u.values))
    return (pairing - kinetic(u)) / m


def dilated_witness(spec, grid, rho, level, base_radius=1.0, taper=1.0):
    """Mass-rho dilation of a fixed mollified plateau at the given level.

    The base profile is level on [0, R0] with a half-cosine taper of the
    given width; dilation u(sigma r) with sigma = (mass0/rho^2)^(1/N)
    preserves the amplitude and scales the kinetic term like rho^(2-4/N).
    """
    dim = grid.dim
    from .grid import sphere_area

    def profile(r):
        out = np.full_like(r, float(level))
        ramp = (r >= base_radius) & (r < base_radius + taper)
        out[ramp] = level * 0.5 * (1.0 + np.cos(math.pi * (r[ramp] - base_radius) / taper))
        out[r >= base_radius + taper] = 0.0
        return out

    # continuum mass of the base profile via fine 1-D quadrature
    rq = np.linspace(0.0, base_radius + taper, 4001)
    fq = profile(rq) ** 2 * rq ** (dim - 1)
    mass0 = sphere_area(dim) * np.trapezoid(fq, rq)
    sigma = (mass0 / rho**2) ** (1.0 / dim)
    vals = profile(grid.r * sigma)
    u = RadialField(grid, vals)
    m = mass(u)
    if m <= 0.0:
        return u
    return RadialField(grid, vals * (rho / math.sqrt(m)))


def initial_guess(spec, grid, rho, eps, rng=None) -> RadialField:
    """Negative-energy seed on the mass sphere when one is available.

    Candidates: the dilated plateau witness at a level where G > 0, plus
    amplitude-matched Gaussians of a few widths; the lowest-energy candidate
    wins.  Without a positive level (so no negative-energy seed exists) a
    Gaussian of mass rho^2 is returned with a warning.
    """
    candidates = []
    widths = [0.7, 1.0, 1.5]
    if rng is not None:
        widths = [w * float(rng.uniform(0.7, 1.4)) for w in widths]
    amp = rho * math.pi ** (-grid.dim / 4.0)
    for wdt in widths:
        vals = amp * np.exp(-(grid.r / wdt) ** 2 / 2.0)
        u = RadialField(grid, vals)
        m = mass(u)
        if m > 0:
            candidates.append(RadialField(grid, vals * (rho / math.sqrt(m))))
    level = nl.find_positive_level(spec)
    if level is None:
        log.warning("no level with positive primitive: falling back to a "
                    "Gaussian seed of mass rho^2 (no negative-energy start)")
    else:
        for lv in (level * 1.5, max(level * 1.5, amp)):
            candidates.append(dilated_witness(spec, grid, rho, lv))
    best = min(candidates, key=lambda u: energy_eps(u, spec, eps))
    return best


def _rearranged(vals):
    return np.sort(vals)[::-1]


def solve_ground_state(config: SolveConfig, eps: float,
                       u0: Optional[RadialField] = None,
                       grid: Optional[RadialGrid] = None,
                       rng=None) -> SolverResult:
    """Projected BB gradient descent for E_eps over the disc of radius rho.

    Stops when the KKT residual  grad + lambda_hat * u  (lambda_hat the
    Nehari quotient on the sphere, 0 inside) drops below tol_grad relative
    to the natural operator scale.  Optional decreasing rearrangement of the
    profile is applied every rearrange_every iterations and kept only when
    it does not increase the energy.
    """
    spec, rho = config.spec, config.rho
    if grid is None:
        grid = config.make_grid()
    if u0 is None:
        u0 = initial_guess(spec, grid, rho, eps, rng=rng)
    w = grid.w

    def wdot(a, b):
        return float(np.dot(w, a * b))

    def energy_of(vals):
        return energy_eps(RadialField(grid, vals), spec, eps)

    def project(vals):
        m = wdot(vals, vals)
        if m <= rho * rho:
            return vals, m, False
        sc = rho / math.sqrt(m)
        return vals * sc, rho * rho, True

    u, m_u, _ = project(u0.values.copy())
    E = energy_of(u)
    g, lap, rhs = _grad_parts(grid, u, spec, eps)
    tau = config.step_init
    it = 0
    converged = False
    collapsed = False
    lam_hat = 0.0
    for it in range(1, config.max_iter + 1):
        on_boundary = m_u >= rho * rho * (1.0 - 1e-12)
        lam_hat = max(0.0, -wdot(g, u) / m_u) if (on_boundary and m_u > 0) else 0.0
        res = g + lam_hat * u
        scale = max(1.0, wnorm(grid, lap) + wnorm(grid, rhs)
                    + lam_hat * math.sqrt(max(m_u, 0.0)))
        if wnorm(grid, res) <= config.tol_grad * scale:
            converged = True
            break
        if m_u <= 1e-10 * rho * rho and E >= -1e-12 * (1.0 + rho * rho):
            # the flow has contracted into the zero stationary point; finish
            # here instead of grinding out the remaining geometric decay
            converged = True
            collapsed = True
            break

        accepted = False
        t = tau
        for _ in range(60):
            v, m_v, _ = project(u - t * g)
            E_v = energy_of(v)
            dv = v - u
            dd = wdot(dv, dv)
            if E_v <= E - config.armijo * dd / max(t, 1e-300):
                accepted = True
                break
            if math.sqrt(dd) <= 1e-16 * (1.0 + math.sqrt(m_u)):
                # step has collapsed to rounding level: treat as stationary
                accepted = True
                E_v, converged = E, True
                v, m_v = u, m_u
                break
            t *= config.backtrack
        if not accepted:
            if E_v > E + 1e-12 * (1.0 + abs(E)):
                raise StepFailure(f"no decrease at step {t:g} (iteration {it})")
            v, m_v, E_v = u, m_u, E
            converged = True
        if converged and v is u:
            break

        g_v, lap_v, rhs_v = _grad_parts(grid, v, spec, eps)
        s = v - u
        y = g_v - g
        sy = wdot(s, y)
        tau = min(max(wdot(s, s) / sy, 1e-12), 1e2) if sy > 0 else min(t * 2.0, 1e2)
        u, m_u, E, g, lap, rhs = v, m_v, E_v, g_v, lap_v, rhs_v

        if config.rearrange_every and it % config.rearrange_every == 0:
            r_vals, r_m, _ = project(_rearranged(u))
            E_r = energy_of(r_vals)
            if E_r <= E:
                u, m_u, E = r_vals, r_m, E_r
                g, lap, rhs = _grad_parts(grid, u, spec, eps)

    field_u = RadialField(grid, u)
    lam = extract_lambda(field_u, spec, eps) if m_u > 0 else 0.0
    on_sphere = abs(m_u - rho * rho) <= config.tol_mass * rho * rho
    from .diagnostics import residual_bundle

    result = SolverResult(
        u=field_u, lam=lam, energy=E, eps=eps, rho=rho, mass=m_u,
        kinetic=kinetic(field_u), iterations=it, converged=converged,
        on_sphere=on_sphere,
        bundle=residual_bundle(field_u, lam, eps, spec),
    )
    log.info("stage eps=%g: E=%.6g lam=%.4g iters=%d converged=%s on_sphere=%s%s",
             eps, E, lam, it, converged, on_sphere,
             " (collapsed to zero)" if collapsed else "")
    return result


def continuation(config: SolveConfig, grid: Optional[RadialGrid] = None,
                 rng=None) -> ContinuationResult:
    """Warm-started solves along the eps schedule plus the eps=0 limit object.

    The limit reports the unregularized energy and the multiplier recomputed
    from the unregularized Nehari quotient, so its identity residuals are
    measured against the true nonlinearity.  Minima must be nondecreasing as
    eps decreases (the regularized energies increase pointwise); the flag
    records whether the computed stages respect that ordering.
    """
    if grid is None:
        grid = config.make_grid()
    stages = []
    u0 = None
    total = 0
    for eps in config.eps_schedule:
        result = solve_ground_state(config, eps, u0=u0, grid=grid, rng=rng)
        total += result.iterations
        if not result.converged:
            raise ContinuationAborted(f"stage eps={eps:g} did not converge", stages)
        stages.append(result)
        u0 = result.u
    eps_monotone = all(
        b.energy >= a.energy - 1e-9 * (1.0 + abs(a.energy))
        for a, b in zip(stages, stages[1:])
    )
    u = stages[-1].u
    m = mass(u)
    lam = extract_lambda(u, config.spec, 0.0) if m > 0 else 0.0
    from .diagnostics import residual_bundle

    limit = SolverResult(
        u=u, lam=lam, energy=energy_eps(u, config.spec, 0.0), eps=0.0,
        rho=config.rho, mass=m, kinetic=kinetic(u),
        iterations=total, converged=stages[-1].converged,
        on_sphere=abs(m - config.rho**2) <= config.tol_mass * config.rho**2,
        bundle=residual_bundle(u, lam, 0.0, config.spec),
    )
    return ContinuationResult(stages=stages, limit=limit,
                              eps_monotone=eps_monotone, total_iterations=total)


def multistart(config: SolveConfig, starts: Optional[int] = None) -> list:
    """Independent continuations from jittered seeds; all limits are
    recorded (distinct equal-energy profiles are kept, not adjudicated)."""
    k = starts if starts is not None else config.multistarts
    out = []
    grid = config.make_grid()
    for j in range(k):
        rng = np.random.default_rng(config.seed + j) if j > 0 else None
        try:
            out.append(continuation(config, grid=grid, rng=rng).limit)
        except ContinuationAborted as exc:
            if exc.stages:
                out.append(exc.stages[-1])
    return out


def energy_map(config: SolveConfig, rho_list: Sequence[float]) -> list:
    """Ground-state-energy samples c(rho) along a list of radii; per-point
    failures are flagged and the sweep continues."""
    points = []
    grid = config.make_grid()
    for rho in rho_list:
        cfg = replace(config, rho=float(rho))
        try:
            res = continuation(cfg, grid=grid)
            points.append(EnergyMapPoint(rho=float(rho), c_value=res.limit.energy,
                                         eps=0.0, converged=res.limit.converged))
        except (ContinuationAborted, StepFailure) as exc:
            log.warning("rho=%g failed: %s", rho, exc)
            last = exc.stages[-1].energy if getattr(exc, "stages", None) else math.nan
            points.append(EnergyMapPoint(rho=float(rho), c_value=last,
                                         eps=0.0, converged=False))
    return points
