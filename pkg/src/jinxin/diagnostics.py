"""Entropy-based measurements for the semi-discrete pair.

The discrete relative entropy E_i of the relaxed state against the limit
state obeys an exact per-cell evolution law along the method-of-lines flow:

    dE_i/dt + (F_{i+1/2} - F_{i-1/2})/dx
        = -[a du_i - dv_i]^2 + eps^2 [a du_i - dv_i] dvbar_i/dt
          + R1_i + R2_i + R3_i + R4_i

with du = u - ubar, dv = v - vbar, an interface approximation F of the
relative entropy flux, and four viscous residuals.  Everything here either
evaluates that identity (it holds to rounding when time derivatives come
from the right-hand sides, not finite differences), integrates its pieces
in time, or checks the sign/size estimates and the resulting stability
bound sup_t phi(t) <= phi(0) + B eps^4.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import (
    LINEAR,
    Grid,
    ModelParams,
    entropy_flux,
    entropy_gradient,
    pad_edges,
    relative_entropy,
)
from .schemes import (
    HyperbolicState,
    LimitState,
    limit_semi_discrete_rhs,
    semi_discrete_rhs,
)


def cell_relative_entropy(p: ModelParams, u, v, ubar, vbar):
    """Per-cell relative entropy; same quadratic algebra as the model level."""
    return relative_entropy(p, u, v, ubar, vbar)


def weighted_error_total(p: ModelParams, grid: Grid, du: np.ndarray, dv: np.ndarray) -> float:
    """dx-weighted quadratic error lam^2 du^2/2 + eps^2 dv^2/2 - eps^2 a du dv.

    For the linear flux this is exactly the total relative entropy; for
    Burgers (no explicit entropy) the cross term is dropped and the same
    relaxation-scaled weights are kept, giving the norm in which the eps^4
    convergence rate is measured.
    """
    a_cross = p.a if p.flux == LINEAR else 0.0
    dens = 0.5 * p.lam**2 * du * du + 0.5 * p.eps**2 * dv * dv - p.eps**2 * a_cross * du * dv
    return grid.dx * float(dens.sum())


def phi_total(p: ModelParams, grid: Grid, hyp: HyperbolicState, lim: LimitState) -> float:
    """phi(t): dx-weighted sum of the per-cell relative entropy (linear flux)."""
    e = cell_relative_entropy(p, hyp.u, hyp.v, lim.ubar, lim.vbar)
    return grid.dx * float(np.sum(e))


def discrete_re_flux(p: ModelParams, du_l, dv_l, du_r, dv_r):
    """Interface approximation of the relative entropy flux.

    For left/right cell differences (du_l, dv_l), (du_r, dv_r):
        -eps^2 a/2 dv_l dv_r - lam^2 a/2 du_l du_r
        + lam^2/2 (du_l dv_r + du_r dv_l)
    """
    if p.flux != LINEAR:
        raise ValueError("the relative entropy flux is only explicit for the linear flux")
    return (
        -0.5 * p.eps**2 * p.a * dv_l * dv_r
        - 0.5 * p.lam**2 * p.a * du_l * du_r
        + 0.5 * p.lam**2 * (du_l * dv_r + du_r * dv_l)
    )


def _dxx(grid: Grid, w: np.ndarray) -> np.ndarray:
    ext = pad_edges(w)
    return (ext[2:] - 2.0 * w + ext[:-2]) / grid.dx**2


def residuals(p: ModelParams, grid: Grid, hyp: HyperbolicState, lim: LimitState):
    """The four viscous residuals of the entropy evolution law, per cell.

    R1: lam^3/2 dx du D_xx(du)           (u-viscosity against du)
    R2: eps^2 lam/2 dx dv D_xx(dv)       (v-viscosity against dv)
    R3: eps^2 lam/2 dx (dv - a du) D_xx(vbar)   (limit-curvature forcing)
    R4: -eps^2 a lam/2 dx [dv D_xx(du) + du D_xx(dv)]  (cross coupling)
    """
    if p.flux != LINEAR:
        raise ValueError("entropy residuals are only explicit for the linear flux")
    du = hyp.u - lim.ubar
    dv = hyp.v - lim.vbar
    dxx_du = _dxx(grid, du)
    dxx_dv = _dxx(grid, dv)
    half_dx = 0.5 * grid.dx
    r1 = p.lam**3 * half_dx * du * dxx_du
    r2 = p.eps**2 * p.lam * half_dx * dv * dxx_dv
    r3 = p.eps**2 * p.lam * half_dx * (dv - p.a * du) * _dxx(grid, lim.vbar)
    r4 = -p.eps**2 * p.a * p.lam * half_dx * (dv * dxx_du + du * dxx_dv)
    return r1, r2, r3, r4


@dataclass
class EntropyBudget:
    """All pieces of the per-cell entropy evolution law at one instant."""

    e_cells: np.ndarray
    dedt: np.ndarray
    flux_interfaces: np.ndarray  # n+1 values, ghost closure included
    flux_divergence: np.ndarray
    dissipation: np.ndarray  # -[a du - dv]^2
    forcing: np.ndarray  # eps^2 [a du - dv] dvbar/dt
    r1: np.ndarray
    r2: np.ndarray
    r3: np.ndarray
    r4: np.ndarray
    mismatch: np.ndarray  # law LHS - RHS per cell
    rel_mismatch_max: float  # max |mismatch| / (1 + largest term magnitude)


def entropy_budget(p: ModelParams, grid: Grid, hyp: HyperbolicState, lim: LimitState) -> EntropyBudget:
    """Evaluate every term of the evolution law on the given state pair.

    dE/dt is expanded by the chain rule through the semi-discrete right-hand
    sides, so for any relaxed state and any closure-consistent limit state
    the mismatch is pure rounding noise.
    """
    du = hyp.u - lim.ubar
    dv = hyp.v - lim.vbar
    u_rhs, v_rhs = semi_discrete_rhs(p, grid, hyp)
    ub_rhs, vb_rhs = limit_semi_discrete_rhs(p, grid, lim)
    ddu = u_rhs - ub_rhs
    ddv = v_rhs - vb_rhs

    e_cells = cell_relative_entropy(p, hyp.u, hyp.v, lim.ubar, lim.vbar)
    dedt = (
        p.lam**2 * du * ddu
        + p.eps**2 * dv * ddv
        - p.eps**2 * p.a * (ddu * dv + du * ddv)
    )

    du_e = pad_edges(du)
    dv_e = pad_edges(dv)
    flux = discrete_re_flux(p, du_e[:-1], dv_e[:-1], du_e[1:], dv_e[1:])
    flux_div = (flux[1:] - flux[:-1]) / grid.dx

    relax = p.a * du - dv
    dissipation = -relax * relax
    forcing = p.eps**2 * relax * vb_rhs
    r1, r2, r3, r4 = residuals(p, grid, hyp, lim)

    mismatch = dedt + flux_div - (dissipation + forcing + r1 + r2 + r3 + r4)
    terms = np.abs(dedt)
    for t in (flux_div, dissipation, forcing, r1, r2, r3, r4):
        terms = np.maximum(terms, np.abs(t))
    rel = np.abs(mismatch) / (1.0 + terms)

    return EntropyBudget(
        e_cells=e_cells,
        dedt=dedt,
        flux_interfaces=flux,
        flux_divergence=flux_div,
        dissipation=dissipation,
        forcing=forcing,
        r1=r1,
        r2=r2,
        r3=r3,
        r4=r4,
        mismatch=mismatch,
        rel_mismatch_max=float(rel.max()),
    )


def identity_mismatch(p: ModelParams, grid: Grid, hyp: HyperbolicState, lim: LimitState):
    """Per-cell defect of the entropy evolution law and its relative max."""
    budget = entropy_budget(p, grid, hyp, lim)
    return budget.mismatch, budget.rel_mismatch_max


@dataclass
class ResidualIntegrals:
    """Left-endpoint time integrals of the residual sums and companion norms.

    All entries are running values of dx-weighted spatial sums integrated
    over [0, t]; ``snapshots`` keeps one row per accumulation time so the
    sign estimates can be checked at every recorded instant.
    """

    dx: float
    t: list[float] = field(default_factory=list)
    int_r1: float = 0.0
    int_r2: float = 0.0
    int_r3: float = 0.0
    int_r4: float = 0.0
    norm_dx_du_sq: float = 0.0  # ||D_x du||^2 over [0,t]
    norm_dx_dv_sq: float = 0.0
    norm_dxx_vbar_sq: float = 0.0  # ||D_xx vbar||^2 over [0,t]
    relax_sq: float = 0.0  # integral of dx-sum of (dv - a du)^2
    snapshots: list[tuple[float, ...]] = field(default_factory=list)

    def add(self, p: ModelParams, grid: Grid, hyp: HyperbolicState, lim: LimitState, dt: float) -> None:
        du = hyp.u - lim.ubar
        dv = hyp.v - lim.vbar
        r1, r2, r3, r4 = residuals(p, grid, hyp, lim)
        dx = grid.dx
        self.int_r1 += dt * dx * float(r1.sum())
        self.int_r2 += dt * dx * float(r2.sum())
        self.int_r3 += dt * dx * float(r3.sum())
        self.int_r4 += dt * dx * float(r4.sum())
        # interior interfaces only; the copy ghosts make the boundary
        # differences exactly zero, which is what the exact summation by
        # parts behind the R1/R2 equalities needs
        grad_du = np.diff(du) / dx
        grad_dv = np.diff(dv) / dx
        self.norm_dx_du_sq += dt * dx * float((grad_du * grad_du).sum())
        self.norm_dx_dv_sq += dt * dx * float((grad_dv * grad_dv).sum())
        dxx_vbar = _dxx(grid, lim.vbar)
        self.norm_dxx_vbar_sq += dt * dx * float((dxx_vbar * dxx_vbar).sum())
        relax = dv - p.a * du
        self.relax_sq += dt * dx * float((relax * relax).sum())
        t_next = (self.t[-1] if self.t else hyp.t) + dt
        self.t.append(t_next)
        self.snapshots.append(
            (
                t_next,
                self.int_r1,
                self.int_r2,
                self.int_r3,
                self.int_r4,
                self.norm_dx_du_sq,
                self.norm_dx_dv_sq,
                self.norm_dxx_vbar_sq,
                self.relax_sq,
            )
        )


@dataclass
class ResidualReport:
    """Outcome of the four residual estimates along a trajectory."""

    r1_equality_ok: bool
    r1_rel_defect: float
    r2_equality_ok: bool
    r2_rel_defect: float
    sum124_ok: bool
    sum124_worst: float  # largest running value of int(R1+R2+R4); should be <= 0
    r3_bound_ok: bool
    r3_worst_margin: float  # most negative (bound - int_r3); >= 0 when satisfied
    theta: float

    @property
    def all_ok(self) -> bool:
        return self.r1_equality_ok and self.r2_equality_ok and self.sum124_ok and self.r3_bound_ok

    def lines(self) -> list[str]:
        return [
            f"R1 summation-by-parts equality: rel defect {self.r1_rel_defect:.3e} "
            f"-> {'PASS' if self.r1_equality_ok else 'FAIL'}",
            f"R2 summation-by-parts equality: rel defect {self.r2_rel_defect:.3e} "
            f"-> {'PASS' if self.r2_equality_ok else 'FAIL'}",
            f"int(R1+R2+R4) <= 0: worst running value {self.sum124_worst:.3e} "
            f"-> {'PASS' if self.sum124_ok else 'FAIL'}",
            f"R3 Young bound (theta={self.theta}): worst margin {self.r3_worst_margin:.3e} "
            f"-> {'PASS' if self.r3_bound_ok else 'FAIL'}",
        ]


EQUALITY_RTOL = 1e-12
SIGN_GUARD = 1e-12


def residual_sign_checks(acc: ResidualIntegrals, p: ModelParams, theta: float = 0.5) -> ResidualReport:
    """Check the integrated residual estimates at every recorded time.

    (1) int R1 = -(lam^3/2) dx ||D_x du||^2 exactly,
    (2) int R2 = -(eps^2 lam/2) dx ||D_x dv||^2 exactly,
    (3) int (R1+R2+R4) <= 0,
    (4) int R3 <= eps^4 lam^2/(8 theta) dx^2 ||D_xx vbar||^2
               + theta/2 * int sum dx (dv - a du)^2.
    """
    dx = acc.dx
    r1_defect = r2_defect = 0.0
    sum124_worst = -np.inf
    r3_margin = np.inf
    for (_, i1, i2, i3, i4, ndu, ndv, nvb, relax) in acc.snapshots:
        rhs1 = -0.5 * p.lam**3 * dx * ndu
        rhs2 = -0.5 * p.eps**2 * p.lam * dx * ndv
        r1_defect = max(r1_defect, abs(i1 - rhs1) / max(abs(i1), abs(rhs1), 1e-300))
        r2_defect = max(r2_defect, abs(i2 - rhs2) / max(abs(i2), abs(rhs2), 1e-300))
        sum124_worst = max(sum124_worst, i1 + i2 + i4)
        bound = p.eps**4 * p.lam**2 / (8.0 * theta) * dx**2 * nvb + 0.5 * theta * relax
        r3_margin = min(r3_margin, bound - i3)
    scale = max(abs(acc.int_r1), abs(acc.int_r2), abs(acc.int_r4), 1e-300)
    return ResidualReport(
        r1_equality_ok=r1_defect <= EQUALITY_RTOL,
        r1_rel_defect=r1_defect,
        r2_equality_ok=r2_defect <= EQUALITY_RTOL,
        r2_rel_defect=r2_defect,
        sum124_ok=sum124_worst <= SIGN_GUARD * scale,
        sum124_worst=float(sum124_worst),
        r3_bound_ok=r3_margin >= -SIGN_GUARD * max(abs(acc.int_r3), 1.0),
        r3_worst_margin=float(r3_margin),
        theta=theta,
    )


def l2_error_spacetime(grid: Grid, trajectory) -> float:
    """Squared space-time error sum_n dt sum_i dx (du^2 + dv^2).

    ``trajectory`` is a sequence of (HyperbolicState, LimitState) pairs
    sampled at uniform times; left-endpoint quadrature in time.
    """
    pairs = list(trajectory)
    if len(pairs) < 2:
        return 0.0
    dt = pairs[1][0].t - pairs[0][0].t
    total = 0.0
    for hyp, lim in pairs[:-1]:
        du = hyp.u - lim.ubar
        dv = hyp.v - lim.vbar
        total += dt * grid.dx * float((du * du).sum() + (dv * dv).sum())
    return total


@dataclass
class ErrorSeries:
    """Per-run record: phi(t), cumulative error norms, and the K-norms.

    ``l2err_sq`` is the plain squared space-time error of (u, v) against
    (ubar, vbar); ``weighted_sq`` is the relaxation-scaled (entropy) version
    whose decay rate the convergence study certifies.  The two K-norm
    columns track ||d/dt vbar||^2 and ||D_xx vbar||^2 over [0, t].
    """

    dx: float
    t: np.ndarray
    phi: np.ndarray
    l2err_sq: np.ndarray
    weighted_sq: np.ndarray
    k_dvbar_sq: np.ndarray
    k_dxxvbar_sq: np.ndarray


@dataclass(frozen=True)
class TheoremCheck:
    """sup_t phi(t) against phi(0) + B_meas eps^4 with measured constants."""

    phi0: float
    sup_phi: float
    b_meas: float
    bound: float
    satisfied: bool
    margin: float


BOUND_RTOL = 1e-8


def theorem_bound_check(series: ErrorSeries, p: ModelParams) -> TheoremCheck:
    """Instantiate the stability bound with the measured norms.

    B_meas = ||d/dt vbar||^2_{L2(Q_T)} + (lam^2 dx^2 / 4) ||D_xx vbar||^2_{L2(Q_T)},
    the explicit constant the proof yields with both Young parameters at 1/2.
    """
    if series.k_dvbar_sq.size == 0:
        raise ValueError("series carries no K-norm data")
    phi0 = float(series.phi[0])
    sup_phi = float(series.phi.max())
    b_meas = float(series.k_dvbar_sq[-1]) + 0.25 * p.lam**2 * series.dx**2 * float(
        series.k_dxxvbar_sq[-1]
    )
    bound = phi0 + b_meas * p.eps**4
    satisfied = sup_phi <= bound * (1.0 + BOUND_RTOL)
    return TheoremCheck(
        phi0=phi0,
        sup_phi=sup_phi,
        b_meas=b_meas,
        bound=bound,
        satisfied=satisfied,
        margin=bound - sup_phi,
    )


@dataclass
class EntropyInequalityReport:
    """Entropy production audit along a relaxed trajectory.

    ``production`` is dE(w_i)/dt + centered divergence of F(w_i); the
    continuous law bounds it by -(a u - v)^2, so ``slack`` (production plus
    the dissipation) is nonpositive up to the O(dx) viscous terms the
    space operator adds.
    """

    max_slack: float
    max_production: float
    min_production: float


def entropy_inequality_check(p: ModelParams, grid: Grid, states) -> EntropyInequalityReport:
    """Evaluate the entropy production budget on sampled relaxed states."""
    max_slack = -np.inf
    max_prod = -np.inf
    min_prod = np.inf
    for state in states:
        u_rhs, v_rhs = semi_discrete_rhs(p, grid, state)
        grad_u, grad_v = entropy_gradient(p, state.u, state.v)
        dedt = grad_u * u_rhs + grad_v * v_rhs
        flux_cells = entropy_flux(p, state.u, state.v)
        ext = pad_edges(flux_cells)
        divergence = (ext[2:] - ext[:-2]) / (2.0 * grid.dx)
        production = dedt + divergence
        relax = p.a * state.u - state.v
        slack = production + relax * relax
        max_slack = max(max_slack, float(slack.max()))
        max_prod = max(max_prod, float(production.max()))
        min_prod = min(min_prod, float(production.min()))
    return EntropyInequalityReport(
        max_slack=float(max_slack),
        max_production=float(max_prod),
        min_production=float(min_prod),
    )
