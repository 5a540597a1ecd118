import numpy as np
import pytest

from jinxin import model, schemes
from jinxin.model import Grid, ModelParams
from jinxin.schemes import HyperbolicState, LimitState

from conftest import smooth_bump


def constant_equilibrium(p, grid, c):
    u = np.full(grid.n_cells, float(c))
    v = np.asarray(model.flux_eval(p.flux, p.a, u))
    return HyperbolicState(u=u, v=v, t=0.0)


class TestStepSizes:
    def test_cfl_formula_before_rounding(self):
        p = ModelParams(eps=1.0, lam=0.72, a=0.5, cfl=0.95, t_final=0.1)
        grid = Grid(n_cells=200)
        raw = p.cfl * grid.dx / (2.0 * p.lam)
        assert raw == pytest.approx(3.299e-3, abs=1e-6)
        step = schemes.cfl_dt(p, grid)
        assert step.dt <= raw
        assert step.n_steps * step.dt == pytest.approx(p.t_final, rel=1e-12)

    def test_unit_example(self):
        p = ModelParams(eps=1.0, lam=1.0, a=0.0, cfl=1.0, t_final=1.0)
        grid = Grid(n_cells=10)
        # raw dt = 1.0 * 0.1 / 2 = 0.05, divides T exactly
        step = schemes.cfl_dt(p, grid)
        assert step.dt == pytest.approx(0.05)
        assert step.n_steps == 20

    def test_doubling_lam_halves_dt(self):
        grid = Grid(n_cells=64)
        dt1 = schemes.cfl_dt(ModelParams(eps=1.0, lam=1.0, t_final=1.0, cfl=1.0), grid)
        dt2 = schemes.cfl_dt(ModelParams(eps=1.0, lam=2.0, t_final=1.0, cfl=1.0), grid)
        assert dt2.dt == pytest.approx(dt1.dt / 2)

    @pytest.mark.parametrize("maker", [schemes.cfl_dt, schemes.marching_dt])
    def test_independent_of_eps(self, maker):
        grid = Grid(n_cells=100)
        steps = {
            maker(ModelParams(eps=eps, lam=0.72, a=0.5), grid)
            for eps in (1.0, 0.1, 1e-4, 1e-8)
        }
        assert len(steps) == 1

    def test_marching_respects_both_bounds(self):
        p = ModelParams(eps=1e-6, lam=0.72, a=0.5)
        grid = Grid(n_cells=200)
        step = schemes.marching_dt(p, grid)
        assert step.dt * p.lam / grid.dx <= 0.5 * p.cfl + 1e-15
        assert step.dt * p.lam**2 / grid.dx**2 <= p.cfl * (1 + 1e-12)
        assert step.dt <= schemes.cfl_dt(p, grid).dt * (1 + 1e-12)

    def test_semi_discrete_needs_positive_eps(self):
        with pytest.raises(ValueError):
            schemes.semi_discrete_dt(ModelParams(eps=0.0, lam=1.0), Grid(n_cells=10))


class TestHLLStep:
    def test_interface_flux_values(self):
        p = ModelParams(eps=1.0, lam=0.72, a=0.5)
        u = np.array([1.0, 1.0])
        v = np.array([0.5, 0.5])
        flux_u, flux_v = schemes.hll_fluxes(p, u, v)
        assert flux_u[0] == pytest.approx(0.5)
        assert flux_v[0] == pytest.approx(0.5184, abs=1e-12)

    def test_constant_state_unchanged(self, base_params):
        grid = Grid(n_cells=30)
        state = constant_equilibrium(base_params, grid, 2.0)
        out = schemes.hll_convection_step(base_params, grid, state, 1e-3)
        assert np.array_equal(out.u, state.u)
        assert np.array_equal(out.v, state.v)

    def test_three_point_stencil_spread(self, base_params):
        grid = Grid(n_cells=21)
        state = constant_equilibrium(base_params, grid, 1.0)
        state.u[10] += 0.25
        out = schemes.hll_convection_step(base_params, grid, state, 1e-3)
        changed = np.flatnonzero(out.u != state.u)
        assert set(changed) <= {9, 10, 11}
        assert 10 in changed
        changed_v = np.flatnonzero(out.v != state.v)
        assert set(changed_v) <= {9, 10, 11}

    def test_instability_signalled(self, base_params):
        grid = Grid(n_cells=10)
        state = constant_equilibrium(base_params, grid, 1.0)
        state.u[3] = np.inf
        with np.errstate(invalid="ignore"), pytest.raises(schemes.InstabilityError):
            schemes.hll_convection_step(base_params, grid, state, 1e-3)


class TestRelaxationStep:
    def test_large_eps_keeps_v(self):
        # weight eps^2/(eps^2+dt) -> 1; flat u so the gradient source is zero
        p = ModelParams(eps=1e8, lam=0.72, a=0.5)
        grid = Grid(n_cells=20)
        state = HyperbolicState(u=np.full(20, 2.0), v=np.linspace(1, 2, 20), t=0.0)
        out = schemes.relaxation_step(p, grid, state, dt=1e-3)
        assert np.allclose(out.v, state.v, rtol=1e-10)

    def test_eps_zero_lands_on_closure(self):
        grid = Grid(n_cells=32)
        p = ModelParams(eps=0.0, lam=0.72, a=0.5)
        u = np.sin(np.linspace(0, 3, 32))
        state = HyperbolicState(u=u, v=np.zeros(32), t=0.0)
        out = schemes.relaxation_step(p, grid, state, dt=1e-3)
        assert np.allclose(out.v, model.equilibrium_v(p, grid, u), rtol=1e-14)

    def test_constant_equilibrium_exact(self, base_params):
        grid = Grid(n_cells=16)
        state = constant_equilibrium(base_params, grid, 1.7)
        out = schemes.relaxation_step(base_params, grid, state, dt=2e-3)
        assert np.array_equal(out.v, state.v)


class TestJptAndLimitSteps:
    def test_constant_equilibrium_fixed_point_100_steps(self):
        p = ModelParams(eps=0.5, lam=0.72, a=0.5)
        grid = Grid(n_cells=50)
        hyp = constant_equilibrium(p, grid, 1.3)
        lim = LimitState(ubar=hyp.u.copy(), vbar=model.equilibrium_v(p, grid, hyp.u), t=0.0)
        u0, v0 = hyp.u.copy(), hyp.v.copy()
        dt = schemes.marching_dt(p, grid).dt
        for _ in range(100):
            hyp = schemes.jpt_step(p, grid, hyp, dt)
            lim = schemes.limit_step(p, grid, lim, dt)
        assert np.abs(hyp.u - u0).max() <= 1e-14
        assert np.abs(hyp.v - v0).max() <= 1e-14
        assert np.abs(lim.ubar - u0).max() <= 1e-14
        assert np.abs(lim.vbar - v0).max() <= 1e-14

    def test_tiny_eps_step_matches_limit_step(self):
        # asymptotic consistency at frozen grid/step
        p = ModelParams(eps=1e-8, lam=0.72, a=0.5)
        grid = Grid(n_cells=200)
        u, v, ub, vb = model.riemann_initial(p, grid, 2.0, 1.0, well_prepared=True)
        dt = schemes.marching_dt(p, grid).dt
        hyp = schemes.jpt_step(p, grid, HyperbolicState(u, v, 0.0), dt)
        lim = schemes.limit_step(p, grid, LimitState(ub, vb, 0.0), dt)
        rel_u = np.abs(hyp.u - lim.ubar).max() / np.abs(lim.ubar).max()
        rel_v = np.abs(hyp.v - lim.vbar).max() / np.abs(lim.vbar).max()
        assert rel_u <= 1e-6
        assert rel_v <= 1e-6

    def test_riemann_config_advances_stably(self, base_params, unit_grid):
        u, v, ub, vb = model.riemann_initial(base_params, unit_grid, 2.0, 1.0)
        step = schemes.marching_dt(base_params, unit_grid)
        hyp = HyperbolicState(u, v, 0.0)
        for _ in range(step.n_steps):
            hyp = schemes.jpt_step(base_params, unit_grid, hyp, step.dt)
        assert np.isfinite(hyp.u).all() and np.isfinite(hyp.v).all()
        assert hyp.u.max() <= 2.0 + 1e-6 and hyp.u.min() >= 1.0 - 1e-6

    def test_limit_step_conserves_mass_without_transport(self):
        # short window: the diffusing tails stay below rounding at the ends
        p = ModelParams(eps=1.0, lam=1.0, a=0.0)
        grid = Grid(n_cells=80)
        ubar = 1.0 + smooth_bump(grid.centers, width=0.05)
        lim = LimitState(ubar=ubar, vbar=model.equilibrium_v(p, grid, ubar), t=0.0)
        mass0 = grid.dx * lim.ubar.sum()
        dt = schemes.marching_dt(p, grid).dt
        for _ in range(5):
            lim = schemes.limit_step(p, grid, lim, dt)
        assert grid.dx * lim.ubar.sum() == pytest.approx(mass0, abs=1e-13)

    def test_limit_step_mass_balance_matches_boundary_fluxes(self):
        # telescoping is exact: mass change equals the boundary fluxes even
        # once the diffused profile reaches the domain ends
        p = ModelParams(eps=1.0, lam=1.0, a=0.0)
        grid = Grid(n_cells=80)
        ubar = 1.0 + smooth_bump(grid.centers)
        lim = LimitState(ubar=ubar, vbar=model.equilibrium_v(p, grid, ubar), t=0.0)
        mass0 = grid.dx * lim.ubar.sum()
        dt = schemes.marching_dt(p, grid).dt
        inflow = 0.0
        for _ in range(50):
            # interface fluxes at the ends collapse to the edge vbar under copy ghosts
            inflow += dt * (lim.vbar[0] - lim.vbar[-1])
            lim = schemes.limit_step(p, grid, lim, dt)
        assert grid.dx * lim.ubar.sum() - mass0 == pytest.approx(inflow, abs=1e-13)

    def test_hll_step_conserves_mass_for_flat_far_field(self, base_params):
        grid = Grid(n_cells=80)
        u = 1.0 + smooth_bump(grid.centers)
        v = np.asarray(model.flux_eval(base_params.flux, base_params.a, u))
        state = HyperbolicState(u=u, v=v, t=0.0)
        mass0 = grid.dx * state.u.sum()
        dt = schemes.marching_dt(base_params, grid).dt
        for _ in range(50):
            state = schemes.hll_convection_step(base_params, grid, state, dt)
        assert grid.dx * state.u.sum() == pytest.approx(mass0, abs=1e-13)

    def test_limit_step_smooths_the_front(self, base_params, unit_grid):
        _, _, ub, vb = model.riemann_initial(base_params, unit_grid, 2.0, 1.0)
        step = schemes.marching_dt(base_params, unit_grid)
        lim = LimitState(ub, vb, 0.0)
        for _ in range(step.n_steps):
            lim = schemes.limit_step(base_params, unit_grid, lim, step.dt)
        jumps = np.abs(np.diff(lim.ubar)).max()
        assert jumps < 0.1  # the unit jump has diffused across many cells
        assert lim.ubar.max() <= 2.0 + 1e-9 and lim.ubar.min() >= 1.0 - 1e-9


class TestSemiDiscreteRhs:
    def test_constant_equilibrium_is_steady(self, base_params):
        grid = Grid(n_cells=25)
        state = constant_equilibrium(base_params, grid, 2.0)
        du_dt, dv_dt = schemes.semi_discrete_rhs(base_params, grid, state)
        assert np.abs(du_dt).max() == 0.0
        assert np.abs(dv_dt).max() == 0.0

    def test_linear_profile_pure_transport(self):
        p = ModelParams(eps=1.0, lam=1.0, a=0.5)
        grid = Grid(n_cells=50)
        u = grid.centers.copy()  # slope one
        v = p.a * u
        du_dt, _ = schemes.semi_discrete_rhs(p, grid, HyperbolicState(u, v, 0.0))
        assert np.allclose(du_dt[1:-1], -p.a)

    def test_relaxation_dominance(self):
        p = ModelParams(eps=0.05, lam=0.72, a=0.5)
        grid = Grid(n_cells=30)
        state = HyperbolicState(u=np.zeros(30), v=np.ones(30), t=0.0)
        _, dv_dt = schemes.semi_discrete_rhs(p, grid, state)
        assert np.allclose(dv_dt, -1.0 / p.eps**2)

    def test_eps_zero_rejected(self):
        p = ModelParams(eps=0.0, lam=1.0)
        grid = Grid(n_cells=10)
        with pytest.raises(ValueError):
            schemes.semi_discrete_rhs(p, grid, constant_equilibrium(p, grid, 1.0))


class TestLimitSemiDiscreteRhs:
    def test_constant_state_is_steady(self, base_params):
        grid = Grid(n_cells=25)
        ubar = np.full(25, 2.0)
        lim = LimitState(ubar=ubar, vbar=model.equilibrium_v(base_params, grid, ubar), t=0.0)
        dub, dvb = schemes.limit_semi_discrete_rhs(base_params, grid, lim)
        assert np.abs(dub).max() == 0.0
        assert np.abs(dvb).max() == 0.0

    def test_quadratic_profile_against_stencil_oracle(self):
        p = ModelParams(eps=1.0, lam=0.9, a=0.0)
        grid = Grid(n_cells=40)
        ubar = grid.centers**2
        vbar = model.equilibrium_v(p, grid, ubar)
        dub, dvb = schemes.limit_semi_discrete_rhs(p, grid, LimitState(ubar, vbar, 0.0))

        # independent loop evaluation of the same stencils
        dx = grid.dx
        ue = np.concatenate(([ubar[0]], ubar, [ubar[-1]]))
        ve = np.concatenate(([vbar[0]], vbar, [vbar[-1]]))
        expect_du = np.empty_like(ubar)
        for i in range(grid.n_cells):
            expect_du[i] = -(ve[i + 2] - ve[i]) / (2 * dx) + p.lam * (
                ue[i + 2] - 2 * ubar[i] + ue[i]
            ) / (2 * dx)
        de = np.concatenate(([expect_du[0]], expect_du, [expect_du[-1]]))
        for i in range(grid.n_cells):
            expected_dv = p.a * expect_du[i] - p.lam**2 * (de[i + 2] - de[i]) / (2 * dx)
            assert dvb[i] == pytest.approx(expected_dv, rel=1e-13, abs=1e-13)
        assert np.allclose(dub, expect_du, rtol=1e-13)

    def test_closure_violation_rejected(self, base_params):
        grid = Grid(n_cells=20)
        ubar = np.linspace(0, 1, 20)
        vbar = model.equilibrium_v(base_params, grid, ubar) + 1e-6
        with pytest.raises(ValueError):
            schemes.limit_semi_discrete_rhs(base_params, grid, LimitState(ubar, vbar, 0.0))

    def test_chain_rule_matches_time_differences(self):
        p = ModelParams(eps=0.1, lam=0.72, a=0.5, t_final=0.01)
        grid = Grid(n_cells=100)
        ubar = 1.0 + 0.5 * smooth_bump(grid.centers, width=0.1)
        lim0 = LimitState(ubar=ubar, vbar=model.equilibrium_v(p, grid, ubar), t=0.0)
        _, dvdt = schemes.limit_semi_discrete_rhs(p, grid, lim0)
        scale = np.abs(dvdt).max()

        def centered_gap(dt):
            mid = schemes.rk4_limit_step(p, grid, lim0, dt)
            ahead = schemes.rk4_limit_step(p, grid, mid, dt)
            _, dmid = schemes.limit_semi_discrete_rhs(p, grid, mid)
            fd = (ahead.vbar - lim0.vbar) / (2 * dt)
            return np.abs(fd - dmid).max()

        dt = schemes.semi_discrete_dt(p, grid).dt
        gap1 = centered_gap(dt)
        gap2 = centered_gap(dt / 2)
        assert gap1 <= 5e-3 * scale
        assert gap2 <= 0.5 * gap1  # second-order centered differences


class TestIntegrator:
    def test_constant_trajectory(self, base_params):
        grid = Grid(n_cells=20)
        hyp = constant_equilibrium(base_params, grid, 1.5)
        lim = LimitState(hyp.u.copy(), model.equilibrium_v(base_params, grid, hyp.u), 0.0)
        dt = schemes.semi_discrete_dt(base_params, grid).dt
        t_final = 16 * dt
        traj = schemes.integrate_semi_discrete(base_params, grid, hyp, lim, t_final, dt)
        assert len(traj) == 17
        for h, l in traj:
            assert np.array_equal(h.u, hyp.u)
            assert np.array_equal(h.v, hyp.v)
            assert np.array_equal(l.ubar, lim.ubar)

    def test_matches_splitting_scheme_within_splitting_error(self):
        p = ModelParams(eps=1.0, lam=0.72, a=0.5, t_final=0.05)
        grid = Grid(n_cells=100)
        u = 1.0 + 0.5 * smooth_bump(grid.centers, width=0.1)
        v = model.equilibrium_v(p, grid, u)
        step = schemes.semi_discrete_dt(p, grid)
        traj = schemes.integrate_semi_discrete(
            p, grid,
            HyperbolicState(u.copy(), v.copy(), 0.0),
            LimitState(u.copy(), v.copy(), 0.0),
            p.t_final, step.dt,
        )
        hyp_mol = traj[-1][0]
        hyp_jpt = HyperbolicState(u.copy(), v.copy(), 0.0)
        for _ in range(step.n_steps):
            hyp_jpt = schemes.jpt_step(p, grid, hyp_jpt, step.dt)
        gap = max(np.abs(hyp_mol.u - hyp_jpt.u).max(), np.abs(hyp_mol.v - hyp_jpt.v).max())
        # first-order splitting gap, measured ~15*dt; generous headroom
        assert gap <= 50 * step.dt

    def test_fourth_order_in_time(self):
        p = ModelParams(eps=0.8, lam=0.72, a=0.5, t_final=0.1)
        grid = Grid(n_cells=20)
        u = 1.0 + 0.5 * smooth_bump(grid.centers, width=0.15)
        v = np.asarray(model.flux_eval(p.flux, p.a, u))

        def final(dt):
            state = HyperbolicState(u.copy(), v.copy(), 0.0)
            for _ in range(round(p.t_final / dt)):
                state = schemes.rk4_hyperbolic_step(p, grid, state, dt)
            return state

        dt = schemes.semi_discrete_dt(p, grid).dt
        ref = final(dt / 8)
        err = []
        for d in (dt, dt / 2):
            s = final(d)
            err.append(np.abs(s.u - ref.u).max() + np.abs(s.v - ref.v).max())
        ratio = err[0] / err[1]
        assert err[0] > 1e-13  # above rounding floor, ratio is meaningful
        assert 8 <= ratio <= 32  # fourth order gives ~16

    def test_parity_preserved_without_transport(self):
        # even u, odd v about the midpoint stay that way when a = 0
        p = ModelParams(eps=0.5, lam=1.0, a=0.0)
        grid = Grid(n_cells=64)
        x = grid.centers
        u = 1.0 + smooth_bump(x, width=0.05)
        v = (x - 0.5) * smooth_bump(x, width=0.05)
        state = HyperbolicState(u, v, 0.0)
        dt = schemes.semi_discrete_dt(p, grid).dt
        for _ in range(40):
            state = schemes.rk4_hyperbolic_step(p, grid, state, dt)
        assert np.abs(state.u - state.u[::-1]).max() <= 1e-13
        assert np.abs(state.v + state.v[::-1]).max() <= 1e-13

    def test_dt_must_divide_t_final(self, base_params):
        grid = Grid(n_cells=20)
        hyp = constant_equilibrium(base_params, grid, 1.0)
        lim = LimitState(hyp.u.copy(), model.equilibrium_v(base_params, grid, hyp.u), 0.0)
        with pytest.raises(ValueError):
            schemes.integrate_semi_discrete(base_params, grid, hyp, lim, 1.0, 0.3)
