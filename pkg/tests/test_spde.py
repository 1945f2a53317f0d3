import math

import numpy as np
import pytest

from gammanoise.conditions import ParamTuple
from gammanoise.grid import Grid
from gammanoise.norms import hsq_norm, lq_norm
from gammanoise.series import _linfit
from gammanoise.spde import (DiagonalNoise, SpdeConfig, SystemNoise, Trajectory,
                             scaling_diagnostic, second_moment_closed_form,
                             second_moment_exp_euler, simulate, spacetime_norm)
from gammanoise.systems import Coloring, HaarSystem


@pytest.fixture
def small_grid():
    return Grid(1, 64)


class TestConfigValidation:
    def test_dt_bounds(self, small_grid):
        noise = DiagonalNoise.white(small_grid)
        with pytest.raises(ValueError):
            SpdeConfig(small_grid, noise, T=0.1, dt=0.2)
        with pytest.raises(ValueError):
            SpdeConfig(small_grid, noise, T=0.1, dt=0.03)  # does not divide

    def test_exact_ou_needs_diagonal_and_unit_g(self, small_grid):
        system = SystemNoise(HaarSystem(1, 0, 2), Coloring.power_law(0.5), 7)
        with pytest.raises(ValueError):
            SpdeConfig(small_grid, system, T=0.1, dt=0.01, integrator="exact_ou")
        from gammanoise.grid import constant_field
        with pytest.raises(ValueError):
            SpdeConfig(small_grid, DiagonalNoise.white(small_grid), T=0.1, dt=0.01,
                       g=constant_field(small_grid, 1.0))

    def test_unknown_integrator(self, small_grid):
        with pytest.raises(ValueError):
            SpdeConfig(small_grid, DiagonalNoise.white(small_grid), T=0.1,
                       dt=0.01, integrator="euler")


class TestSimulate:
    def test_zero_coloring_zero_trajectory(self, small_grid):
        cfg = SpdeConfig(small_grid, DiagonalNoise.zero(small_grid), T=0.1, dt=0.01)
        traj = simulate(cfg, seed=5)
        assert all(np.all(st.coeffs == 0) for st in traj.states)
        assert traj.times[0] == 0.0 and len(traj.states) == 11

    def test_single_mode_ou_variance(self):
        # exact transition law: Var = mu^2 (1 - e^{-2 lam T}) / (2 lam)
        grid = Grid(1, 8)
        k0, amp, T = 3, 2.0, 0.1
        cfg = SpdeConfig(grid, DiagonalNoise.single_mode(grid, k0, amp), T=T, dt=0.01)
        lam = 4 * np.pi**2 * k0**2
        exact = amp**2 * (1 - np.exp(-2 * lam * T)) / (2 * lam)
        draws = [abs(simulate(cfg, seed=11, traj_index=i, keep_states=False)
                     .final().coeff_at(k0)) ** 2 for i in range(10_000)]
        assert np.mean(draws) == pytest.approx(exact, rel=0.05)

    def test_deterministic_per_seed(self, small_grid):
        cfg = SpdeConfig(small_grid, DiagonalNoise.matern(small_grid, 0.5), T=0.05, dt=0.01)
        a = simulate(cfg, seed=21, traj_index=3)
        b = simulate(cfg, seed=21, traj_index=3)
        assert all(np.array_equal(x.coeffs, y.coeffs) for x, y in zip(a.states, b.states))
        c = simulate(cfg, seed=22, traj_index=3)
        assert not np.array_equal(a.final().coeffs, c.final().coeffs)

    def test_mode_independence(self):
        grid = Grid(1, 16)
        cfg = SpdeConfig(grid, DiagonalNoise.white(grid), T=0.05, dt=0.01)
        finals = np.array([simulate(cfg, seed=31, traj_index=i, keep_states=False)
                           .final().coeffs for i in range(3000)])
        u1, u2 = finals[:, 2], finals[:, 5]
        cross = np.mean(u1 * np.conj(u2))
        scale = np.sqrt(np.mean(np.abs(u1) ** 2) * np.mean(np.abs(u2) ** 2))
        stderr = scale / math.sqrt(len(finals))
        assert abs(cross) <= 5 * stderr

    def test_semigroup_contraction_after_noise_off(self, small_grid):
        # noise switched off mid-run through a time-indexed multiplier:
        # afterwards the L2 norm can only decay
        from gammanoise.grid import constant_field
        g_fields = [constant_field(small_grid, 1.0)] * 5 + \
                   [constant_field(small_grid, 0.0)] * 5
        cfg = SpdeConfig(small_grid, DiagonalNoise.white(small_grid), T=0.1,
                         dt=0.01, integrator="exp_euler", g=g_fields)
        traj = simulate(cfg, seed=45)
        norms = [lq_norm(st, 2.0) for st in traj.states]
        assert norms[5] > 0
        assert all(a >= b - 1e-12 for a, b in zip(norms[5:], norms[6:]))

    def test_exp_euler_with_series_noise_runs(self, small_grid):
        system = SystemNoise(HaarSystem(1, 0, 2), Coloring.power_law(0.5), 7)
        cfg = SpdeConfig(small_grid, system, T=0.05, dt=0.01, integrator="exp_euler")
        traj = simulate(cfg, seed=51)
        assert len(traj.states) == 6
        assert np.any(np.abs(traj.final().coeffs) > 0)


class TestClosedForm:
    def test_zero_horizon_limit(self, small_grid):
        noise = DiagonalNoise.matern(small_grid, 0.3)
        cfg = SpdeConfig(small_grid, noise, T=1e-9, dt=1e-9)
        assert second_moment_closed_form(cfg, 0.9) == pytest.approx(0.0, abs=1e-7)

    def test_matern_against_independent_lattice_sum(self):
        # independent reimplementation of the mode-wise variance sum
        grid = Grid(1, 128)
        alpha, s, T = 0.3, 0.9, 0.1
        cfg = SpdeConfig(grid, DiagonalNoise.matern(grid, alpha), T=T, dt=0.01)
        got = second_moment_closed_form(cfg, s)
        k = grid.freq_axis().astype(float)
        total = 0.0
        for kk in k:
            lam = 4 * math.pi**2 * kk**2
            mu2 = (1 + 4 * math.pi**2 * kk**2) ** -alpha
            var = mu2 * T if lam == 0 else mu2 * (1 - math.exp(-2 * lam * T)) / (2 * lam)
            total += (1 + 4 * math.pi**2 * kk**2) ** (1 - s) * var
        assert got == pytest.approx(total, rel=1e-12)

    def test_single_mode_formula(self):
        grid = Grid(1, 32)
        k0, amp, T, s = 2, 1.5, 0.2, 0.7
        cfg = SpdeConfig(grid, DiagonalNoise.single_mode(grid, k0, amp), T=T, dt=0.01)
        lam = 4 * np.pi**2 * k0**2
        var = amp**2 * (1 - np.exp(-2 * lam * T)) / (2 * lam)
        ref = (1 + 4 * np.pi**2 * k0**2) ** (1 - s) * var
        assert second_moment_closed_form(cfg, s) == pytest.approx(ref, rel=1e-12)

    def test_requires_diagonal(self, small_grid):
        system = SystemNoise(HaarSystem(1, 0, 2), Coloring.power_law(0.5), 7)
        cfg = SpdeConfig(small_grid, system, T=0.1, dt=0.01, integrator="exp_euler")
        with pytest.raises(ValueError):
            second_moment_closed_form(cfg, 0.9)

    def test_mc_matches_closed_form(self):
        grid = Grid(1, 128)
        cfg = SpdeConfig(grid, DiagonalNoise.matern(grid, 0.3), T=0.1, dt=1e-3)
        s = 0.9
        closed = second_moment_closed_form(cfg, s)
        vals = [hsq_norm(simulate(cfg, seed=61, traj_index=i, keep_states=False).final(),
                         1 - s, 2.0) ** 2 for i in range(400)]
        mean = np.mean(vals)
        stderr = np.std(vals, ddof=1) / math.sqrt(len(vals))
        assert abs(mean - closed) <= 3 * stderr

    def test_euler_scheme_moment_and_order(self):
        grid = Grid(1, 256)
        noise = DiagonalNoise.matern(grid, 1.0)
        closed = second_moment_closed_form(
            SpdeConfig(grid, noise, T=0.1, dt=0.01), 0.9)
        dts = [0.1 / 2**j for j in range(4, 9)]
        errs = []
        for dt in dts:
            cfg = SpdeConfig(grid, noise, T=0.1, dt=dt, integrator="exp_euler")
            errs.append(abs(second_moment_exp_euler(cfg, 0.9) - closed))
        order, r2 = _linfit(np.log(dts), np.log(errs))
        assert order >= 0.8 and r2 > 0.95

    def test_euler_moment_matches_euler_mc(self):
        # the geometric-sum formula is the scheme's exact second moment
        grid = Grid(1, 64)
        noise = DiagonalNoise.matern(grid, 0.5)
        cfg = SpdeConfig(grid, noise, T=0.1, dt=0.02, integrator="exp_euler")
        s = 0.9
        predicted = second_moment_exp_euler(cfg, s)
        vals = [hsq_norm(simulate(cfg, seed=71, traj_index=i, keep_states=False).final(),
                         1 - s, 2.0) ** 2 for i in range(800)]
        mean = np.mean(vals)
        stderr = np.std(vals, ddof=1) / math.sqrt(len(vals))
        assert abs(mean - predicted) <= 3 * stderr


class TestSpacetimeNorm:
    def test_zero_trajectory(self, small_grid):
        cfg = SpdeConfig(small_grid, DiagonalNoise.zero(small_grid), T=0.1, dt=0.01)
        st = spacetime_norm(simulate(cfg, seed=0), 2.0, 0.9, 2.0)
        assert st.lp == 0.0 and st.max_h == 0.0

    def test_constant_in_time_closed_form(self, small_grid):
        # a frozen single-mode state integrates to T^{1/p} times its norm
        from gammanoise.grid import mode_field
        f = mode_field(small_grid, 2, 0.7)
        times = np.linspace(0.0, 0.5, 6)
        traj = Trajectory(times, [f] * 6, seed=0)
        p, s, q = 2.0, 0.6, 2.0
        st = spacetime_norm(traj, p, s, q)
        ref = 0.5 ** (1 / p) * hsq_norm(f, 1 - s, q)
        assert st.lp == pytest.approx(ref, rel=1e-12)
        assert st.max_h == pytest.approx(hsq_norm(f, 1 - s, q), rel=1e-12)

    def test_mc_matches_time_integrated_closed_form(self):
        # E of the left-endpoint quadrature equals the summed closed form
        grid = Grid(1, 64)
        cfg = SpdeConfig(grid, DiagonalNoise.matern(grid, 0.3), T=0.1, dt=0.01)
        s = 0.9
        ref = sum(second_moment_closed_form(cfg, s, t=m * cfg.dt) * cfg.dt
                  for m in range(cfg.steps))
        vals = []
        for i in range(500):
            traj = simulate(cfg, seed=81, traj_index=i)
            vals.append(spacetime_norm(traj, 2.0, s, 2.0).lp ** 2)
        mean = np.mean(vals)
        stderr = np.std(vals, ddof=1) / math.sqrt(len(vals))
        assert abs(mean - ref) <= 3 * stderr

    def test_energy_identity_s1(self):
        # s = 1 turns the spatial norm into plain L2 energy
        grid = Grid(1, 64)
        cfg = SpdeConfig(grid, DiagonalNoise.matern(grid, 0.5), T=0.1, dt=0.01)
        closed = second_moment_closed_form(cfg, 1.0)
        vals = [lq_norm(simulate(cfg, seed=91, traj_index=i, keep_states=False).final(), 2.0) ** 2
                for i in range(500)]
        mean = np.mean(vals)
        stderr = np.std(vals, ddof=1) / math.sqrt(len(vals))
        assert abs(mean - closed) <= 3 * stderr


class TestScalingDiagnostic:
    def test_equality_tuple_flat(self):
        params = ParamTuple(1, 0.25, 4.0, 2.0, 2.0)
        rep = scaling_diagnostic(0.5, 2.0, params, range(0, 6))
        assert abs(rep.exponent - rep.predicted) <= 0.2
        assert rep.predicted == pytest.approx(0.0, abs=1e-12)

    def test_off_equality_tuple(self):
        params = ParamTuple(1, 0.55, 4.0, 2.0, 2.0)
        rep = scaling_diagnostic(0.5, 2.0, params, range(0, 6))
        assert rep.predicted == pytest.approx(-0.3)
        assert abs(rep.exponent - rep.predicted) <= 0.2

    def test_alpha_equal_d_rejected(self):
        params = ParamTuple(1, 0.25, 4.0, 2.0, 2.0)
        with pytest.raises(ValueError):
            scaling_diagnostic(1.0, 1.0, params, range(0, 4))

    def test_zeta_must_match(self):
        params = ParamTuple(1, 0.25, 4.0, 2.0, 2.0)
        with pytest.raises(ValueError):
            scaling_diagnostic(0.5, 3.0, params, range(0, 4))
