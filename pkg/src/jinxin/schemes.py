"""Time advancement: splitting scheme, its eps->0 limit, and the semi-discrete systems.

Two families are provided on the same uniform grid and HLL space operator:

* a fully discrete 2-step splitting (explicit HLL convection at the frozen
  wave speeds +-lam, then a closed-form implicit relaxation solve), whose
  eps -> 0 limit is an explicit scheme for the convection-diffusion problem;
* the method-of-lines systems (continuous in time) for both the relaxed and
  the limiting equations, integrated with classical RK4 for the entropy
  diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    Grid,
    ModelParams,
    equilibrium_v,
    flux_derivative,
    flux_eval,
    pad_edges,
)


class InstabilityError(RuntimeError):
    """Raised when a scheme produces non-finite cell values."""


@dataclass
class HyperbolicState:
    """Relaxed pair (u, v) at time t."""

    u: np.ndarray
    v: np.ndarray
    t: float


@dataclass
class LimitState:
    """Limit pair (ubar, vbar) at time t; vbar obeys the discrete closure."""

    ubar: np.ndarray
    vbar: np.ndarray
    t: float


@dataclass(frozen=True)
class StepSize:
    """Time increment and the number of steps landing exactly on t_final."""

    dt: float
    n_steps: int


def _land_on_t_final(dt_raw: float, t_final: float) -> StepSize:
    # Round dt down so the march hits t_final exactly; space-time error
    # norms need both solutions sampled on the same uniform step ladder.
    n = max(1, math.ceil(t_final / dt_raw))
    return StepSize(dt=t_final / n, n_steps=n)


def cfl_dt(p: ModelParams, grid: Grid) -> StepSize:
    """Convective CFL step dt = cfl*dx/(2 lam), rounded onto t_final.

    Independent of eps: the stiff relaxation is treated implicitly, so only
    the frozen wave speeds +-lam restrict the convection step.
    """
    return _land_on_t_final(p.cfl * grid.dx / (2.0 * p.lam), p.t_final)


def marching_dt(p: ModelParams, grid: Grid) -> StepSize:
    """Step size used to march the splitting and limit schemes.

    On top of the convective CFL bound, the explicit lam^2-diffusion that
    surfaces in the eps -> 0 limit (the centered gradient inside the
    relaxation solve) demands dt <= cfl*dx^2/lam^2, i.e. a diffusion number
    at most cfl; without it the scheme amplifies mid-frequency modes once
    eps^2 << dt.  Still independent of eps.
    """
    dt_raw = p.cfl * min(grid.dx / (2.0 * p.lam), grid.dx**2 / p.lam**2)
    return _land_on_t_final(dt_raw, p.t_final)


def semi_discrete_dt(p: ModelParams, grid: Grid) -> StepSize:
    """RK4 step for the method-of-lines pair.

    Caps, in order: convective CFL, the O(lam/eps) wave speeds of the
    relaxed system, the stiff relaxation rate 1/eps^2, and the lam^2
    diffusion of the co-integrated limit system.
    """
    if p.eps <= 0:
        raise ValueError("semi-discrete integration requires eps > 0")
    dt_raw = min(
        p.cfl * grid.dx / (2.0 * p.lam),
        p.cfl * p.eps * grid.dx / p.lam,
        0.5 * p.eps**2,
        p.cfl * grid.dx**2 / p.lam**2,
    )
    return _land_on_t_final(dt_raw, p.t_final)


def _check_finite(*fields: np.ndarray) -> None:
    for w in fields:
        if not np.isfinite(w).all():
            raise InstabilityError("non-finite cell values: unstable step size or blow-up")


def hll_fluxes(p: ModelParams, u_ext: np.ndarray, v_ext: np.ndarray):
    """HLL interface fluxes of the frozen-coefficient convection system.

    For ghost-padded fields of length n+2, returns the n+1 interface pairs
        F_u = (v_i + v_{i+1})/2 - lam (u_{i+1} - u_i)/2
        F_v = lam^2 (u_i + u_{i+1})/2 - lam (v_{i+1} - v_i)/2.
    """
    flux_u = 0.5 * (v_ext[:-1] + v_ext[1:]) - 0.5 * p.lam * (u_ext[1:] - u_ext[:-1])
    flux_v = 0.5 * p.lam**2 * (u_ext[:-1] + u_ext[1:]) - 0.5 * p.lam * (v_ext[1:] - v_ext[:-1])
    return flux_u, flux_v


def hll_convection_step(p: ModelParams, grid: Grid, state: HyperbolicState, dt: float) -> HyperbolicState:
    """Conservative update with the HLL fluxes (the non-stiff half step)."""
    flux_u, flux_v = hll_fluxes(p, pad_edges(state.u), pad_edges(state.v))
    coef = dt / grid.dx
    u = state.u - coef * (flux_u[1:] - flux_u[:-1])
    v = state.v - coef * (flux_v[1:] - flux_v[:-1])
    _check_finite(u, v)
    return HyperbolicState(u=u, v=v, t=state.t)


def relaxation_step(p: ModelParams, grid: Grid, half: HyperbolicState, dt: float) -> HyperbolicState:
    """Closed-form implicit solve of the stiff source; u is untouched.

    v^+ = w v + (1-w) [f(u) - (1-eps^2) lam^2 du/dx],  w = eps^2/(eps^2+dt),
    written as target + w*(v - target) so equilibrium states are exact fixed
    points in floating point.  Well defined down to eps = 0, where it lands
    on the discrete closure of the limit scheme.
    """
    ext = pad_edges(half.u)
    grad = (ext[2:] - ext[:-2]) / (2.0 * grid.dx)
    target = flux_eval(p.flux, p.a, half.u) - (1.0 - p.eps**2) * p.lam**2 * grad
    weight = p.eps**2 / (p.eps**2 + dt)
    v = target + weight * (half.v - target)
    return HyperbolicState(u=half.u, v=v, t=half.t)


def jpt_step(p: ModelParams, grid: Grid, state: HyperbolicState, dt: float) -> HyperbolicState:
    """One full splitting step: HLL convection then implicit relaxation."""
    half = hll_convection_step(p, grid, state, dt)
    out = relaxation_step(p, grid, half, dt)
    out.t = state.t + dt
    return out


def limit_step(p: ModelParams, grid: Grid, state: LimitState, dt: float) -> LimitState:
    """Explicit step of the limit scheme (the eps -> 0 splitting step).

    ubar update: centered vbar flux plus the lam-viscosity of the HLL
    operator; vbar then re-closed algebraically.
    """
    ue = pad_edges(state.ubar)
    ve = pad_edges(state.vbar)
    coef = dt / (2.0 * grid.dx)
    ubar = state.ubar - coef * (ve[2:] - ve[:-2]) + p.lam * coef * (ue[2:] - 2.0 * state.ubar + ue[:-2])
    _check_finite(ubar)
    return LimitState(ubar=ubar, vbar=equilibrium_v(p, grid, ubar), t=state.t + dt)


def _hyperbolic_rhs_arrays(p: ModelParams, grid: Grid, u: np.ndarray, v: np.ndarray):
    ue = pad_edges(u)
    ve = pad_edges(v)
    two_dx = 2.0 * grid.dx
    du_dt = -(ve[2:] - ve[:-2]) / two_dx + p.lam * (ue[2:] - 2.0 * u + ue[:-2]) / two_dx
    dv_dt = (
        -p.lam**2 * (ue[2:] - ue[:-2]) / (two_dx * p.eps**2)
        + p.lam * (ve[2:] - 2.0 * v + ve[:-2]) / two_dx
        + (flux_eval(p.flux, p.a, u) - v) / p.eps**2
    )
    return du_dt, dv_dt


def semi_discrete_rhs(p: ModelParams, grid: Grid, state: HyperbolicState):
    """Method-of-lines right-hand side of the relaxed system (HLL fluxes).

    du_i/dt = -(v_{i+1}-v_{i-1})/(2dx) + lam (u_{i+1}-2u_i+u_{i-1})/(2dx)
    dv_i/dt = -lam^2 (u_{i+1}-u_{i-1})/(2 eps^2 dx)
              + lam (v_{i+1}-2v_i+v_{i-1})/(2dx) + (f(u_i)-v_i)/eps^2
    with copy-ghost closure.
    """
    if p.eps <= 0:
        raise ValueError("the semi-discrete relaxed system requires eps > 0")
    return _hyperbolic_rhs_arrays(p, grid, state.u, state.v)


def _limit_ubar_rhs(p: ModelParams, grid: Grid, ubar: np.ndarray) -> np.ndarray:
    vbar = equilibrium_v(p, grid, ubar)
    ue = pad_edges(ubar)
    ve = pad_edges(vbar)
    two_dx = 2.0 * grid.dx
    return -(ve[2:] - ve[:-2]) / two_dx + p.lam * (ue[2:] - 2.0 * ubar + ue[:-2]) / two_dx


ALGEBRAIC_TOL = 1e-12


def limit_semi_discrete_rhs(p: ModelParams, grid: Grid, state: LimitState):
    """Right-hand side of the limit pair.

    ubar evolves like the relaxed u with vbar in the flux; dvbar/dt follows
    by differentiating the closure through dubar/dt (chain rule, no time
    differencing), which keeps the discrete entropy identity exact.
    """
    gap = np.abs(state.vbar - equilibrium_v(p, grid, state.ubar)).max()
    if gap > ALGEBRAIC_TOL:
        raise ValueError(f"limit state violates the algebraic closure by {gap:.3e}")
    dubar_dt = _limit_ubar_rhs(p, grid, state.ubar)
    ext = pad_edges(dubar_dt)
    dvbar_dt = flux_derivative(p.flux, p.a, state.ubar) * dubar_dt - p.lam**2 * (
        ext[2:] - ext[:-2]
    ) / (2.0 * grid.dx)
    return dubar_dt, dvbar_dt


def rk4_hyperbolic_step(p: ModelParams, grid: Grid, state: HyperbolicState, dt: float) -> HyperbolicState:
    """Classical RK4 step of the relaxed method-of-lines system."""
    u0, v0 = state.u, state.v
    k1u, k1v = _hyperbolic_rhs_arrays(p, grid, u0, v0)
    k2u, k2v = _hyperbolic_rhs_arrays(p, grid, u0 + 0.5 * dt * k1u, v0 + 0.5 * dt * k1v)
    k3u, k3v = _hyperbolic_rhs_arrays(p, grid, u0 + 0.5 * dt * k2u, v0 + 0.5 * dt * k2v)
    k4u, k4v = _hyperbolic_rhs_arrays(p, grid, u0 + dt * k3u, v0 + dt * k3v)
    sixth = dt / 6.0
    u = u0 + sixth * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
    v = v0 + sixth * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    _check_finite(u, v)
    return HyperbolicState(u=u, v=v, t=state.t + dt)


def rk4_limit_step(p: ModelParams, grid: Grid, state: LimitState, dt: float) -> LimitState:
    """Classical RK4 step of the limit system; vbar re-closed per stage."""
    y0 = state.ubar
    k1 = _limit_ubar_rhs(p, grid, y0)
    k2 = _limit_ubar_rhs(p, grid, y0 + 0.5 * dt * k1)
    k3 = _limit_ubar_rhs(p, grid, y0 + 0.5 * dt * k2)
    k4 = _limit_ubar_rhs(p, grid, y0 + dt * k3)
    ubar = y0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    _check_finite(ubar)
    return LimitState(ubar=ubar, vbar=equilibrium_v(p, grid, ubar), t=state.t + dt)


def integrate_semi_discrete(
    p: ModelParams,
    grid: Grid,
    hyp: HyperbolicState,
    lim: LimitState,
    t_final: float,
    dt: float,
) -> list[tuple[HyperbolicState, LimitState]]:
    """Advance both method-of-lines systems with RK4 and the shared dt.

    Returns the trajectory of paired states at every step, initial states
    included, final time t_final = n*dt reached exactly.
    """
    n = round(t_final / dt)
    if abs(n * dt - t_final) > 1e-9 * max(t_final, dt):
        raise ValueError(f"dt={dt} does not divide t_final={t_final}")
    trajectory = [(hyp, lim)]
    for _ in range(n):
        hyp = rk4_hyperbolic_step(p, grid, hyp, dt)
        lim = rk4_limit_step(p, grid, lim, dt)
        trajectory.append((hyp, lim))
    return trajectory
