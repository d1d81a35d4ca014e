import dataclasses
import io

import numpy as np
import pytest

from imexssp.integrate import (
    BlowUpError,
    CirculantOperator,
    DenseOperator,
    History,
    LinearSplitOperator,
    ScalarOperator,
    StepFailureError,
    ZeroOperator,
    diagnostics_to_csv,
    empirical_stability,
    integrate,
    solve_cyclic_tridiagonal,
    start,
    step,
    trajectory_to_csv,
)
from imexssp.problems import dahlquist, upwind_advection, GridSpec
from imexssp.schemes import (
    BUILTIN_IDS,
    imex_scheme,
    mcnab,
    scheme_from_id,
    ssp_explicit,
)

ZERO_OP = LinearSplitOperator(ZeroOperator(), ZeroOperator(), 1)


def ones_history(k, dt=0.1):
    levels = [np.ones(1) for _ in range(k)]
    zeros = [np.zeros(1) for _ in range(k)]
    return History(k, levels, zeros, [z.copy() for z in zeros], t=(k - 1) * dt, dt=dt)


class TestCyclicTridiagonal:
    def build_dense(self, sub, diag, sup):
        n = len(diag)
        m = np.zeros((n, n), dtype=np.result_type(diag, sub))
        for j in range(n):
            m[j, j] += diag[j]
            m[j, (j - 1) % n] += sub[j]
            m[j, (j + 1) % n] += sup[j]
        return m

    @pytest.mark.parametrize("n", [3, 5, 12, 64])
    def test_matches_dense_solve(self, n):
        rng = np.random.default_rng(n)
        sub = rng.uniform(-1, 1, n)
        sup = rng.uniform(-1, 1, n)
        diag = 4.0 + rng.uniform(0, 1, n)  # diagonally dominant
        rhs = rng.uniform(-1, 1, n)
        x = solve_cyclic_tridiagonal(sub, diag, sup, rhs)
        expected = np.linalg.solve(self.build_dense(sub, diag, sup), rhs)
        np.testing.assert_allclose(x, expected, atol=1e-12)

    def test_complex_system(self):
        rng = np.random.default_rng(9)
        n = 16
        sub = rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n)
        sup = rng.uniform(-1, 1, n)
        diag = 5.0 + 1j * rng.uniform(0, 1, n)
        rhs = rng.uniform(-1, 1, n) + 0j
        x = solve_cyclic_tridiagonal(sub, diag, sup, rhs)
        np.testing.assert_allclose(
            x, np.linalg.solve(self.build_dense(sub, diag, sup), rhs), atol=1e-12)

    def test_no_corner_reduces_to_thomas(self):
        n = 10
        rng = np.random.default_rng(3)
        sub = rng.uniform(-1, 1, n)
        sup = rng.uniform(-1, 1, n)
        sub[0] = 0.0
        sup[-1] = 0.0
        diag = 4.0 + rng.uniform(0, 1, n)
        rhs = rng.uniform(-1, 1, n)
        x = solve_cyclic_tridiagonal(sub, diag, sup, rhs)
        np.testing.assert_allclose(
            x, np.linalg.solve(self.build_dense(sub, diag, sup), rhs), atol=1e-12)


class TestOperators:
    def test_circulant_apply_matches_dense(self):
        n = 12
        op = CirculantOperator((1, 0, -1, -2), (0.3, 0.5, -1.0, 0.2), n)
        m = np.zeros((n, n))
        for j in range(n):
            for o, w in zip(op.offsets, op.weights):
                m[j, (j + o) % n] += w
        v = np.random.default_rng(0).uniform(-1, 1, n)
        np.testing.assert_allclose(op.apply(v), m @ v, atol=1e-14)

    def test_circulant_tridiagonal_solve_path(self):
        n = 16
        op = CirculantOperator((-1, 0, 1), (1.0, -2.0, 1.0), n)
        rhs = np.random.default_rng(1).uniform(-1, 1, n)
        x = op.solve_shifted(1.0, -0.3, rhs)
        m = np.eye(n)
        dense = np.zeros((n, n))
        for j in range(n):
            for o, w in zip(op.offsets, op.weights):
                dense[j, (j + o) % n] += w
        np.testing.assert_allclose(x, np.linalg.solve(m + 0.3 * dense, rhs), atol=1e-12)

    def test_circulant_fft_solve_path(self):
        n = 16
        op = CirculantOperator((1, 0, -1, -2), (0.3, 0.5, -1.0, 0.2), n)
        rhs = np.random.default_rng(2).uniform(-1, 1, n)
        x = op.solve_shifted(2.0, 0.1, rhs)
        dense = np.zeros((n, n))
        for j in range(n):
            for o, w in zip(op.offsets, op.weights):
                dense[j, (j + o) % n] += w
        np.testing.assert_allclose(
            x, np.linalg.solve(2.0 * np.eye(n) - 0.1 * dense, rhs), atol=1e-12)

    def test_circulant_symbol_mode_consistency(self):
        n = 32
        op = CirculantOperator((1, 0, -1, -2), (0.3, 0.5, -1.0, 0.2), n)
        for m in (0, 1, 5, 15):
            phi = 2 * np.pi * m / n
            u = np.exp(1j * phi * np.arange(n))
            np.testing.assert_allclose(op.apply(u), op.symbol(phi) * u, atol=1e-12)

    def test_scalar_singular_solve(self):
        op = ScalarOperator(2.0)
        with pytest.raises(StepFailureError):
            op.solve_shifted(1.0, 0.5, np.ones(1))

    def test_dense_solve(self):
        m = np.array([[0.0, 1.0], [-1.0, 0.0]])
        op = DenseOperator(m)
        rhs = np.array([1.0, 2.0])
        np.testing.assert_allclose(
            op.solve_shifted(1.0, 0.25, rhs),
            np.linalg.solve(np.eye(2) - 0.25 * m, rhs))


class TestStep:
    def test_constant_preserved(self):
        h = ones_history(3)
        y = step(ssp_explicit(3), h, ZERO_OP)
        assert y[0] == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("sid", BUILTIN_IDS)
    def test_constants_fixed_points(self, sid):
        s = scheme_from_id(sid)
        h = ones_history(s.k)
        y = step(s, h, ZERO_OP)
        assert y[0] == pytest.approx(1.0, abs=1e-14)

    def test_crank_nicolson_amplification(self):
        mu = -0.7 + 0.3j
        dt = 0.1
        s = mcnab(0)
        prob = dahlquist(0, mu)
        h = start(prob, s, dt)
        y = step(s, h, prob.operator)
        z = dt * mu
        expected = (1 + z / 2) / (1 - z / 2) * np.exp(mu * dt)
        assert y[0] == pytest.approx(expected, rel=1e-13)

    def test_third_order_local_error(self):
        # one step from exact history: local error O(dt^3)
        s = imex_scheme("biased", 3)
        mu = -1.0

        def local_error(dt):
            prob = dahlquist(0, mu)
            h = start(prob, s, dt)
            y = step(s, h, prob.operator)
            return abs(y[0] - np.exp(mu * s.k * dt))

        ratio = local_error(0.02) / local_error(0.01)
        assert 6.0 < ratio < 10.0

    def test_superposition(self):
        rng = np.random.default_rng(11)
        m_f = rng.uniform(-1, 1, (4, 4))
        m_g = rng.uniform(-1, 1, (4, 4))
        op = LinearSplitOperator(DenseOperator(m_f), DenseOperator(m_g), 4)
        s = imex_scheme("biased", 3)

        def history_from(levels):
            return History(3, [lv.copy() for lv in levels],
                           [m_f @ lv for lv in levels],
                           [m_g @ lv for lv in levels], t=0.3, dt=0.1)

        l1 = [rng.uniform(-1, 1, 4) for _ in range(3)]
        l2 = [rng.uniform(-1, 1, 4) for _ in range(3)]
        rho = 0.37
        y_combined = step(s, history_from([a + rho * b for a, b in zip(l1, l2)]), op)
        y1 = step(s, history_from(l1), op)
        y2 = step(s, history_from(l2), op)
        np.testing.assert_allclose(y_combined, y1 + rho * y2, atol=1e-13)

    def test_wrong_history_depth(self):
        with pytest.raises(ValueError, match="levels"):
            step(ssp_explicit(3), ones_history(2), ZERO_OP)

    def test_singular_implicit_stage(self):
        # a_0 - dt c_0 mu = 0 at mu = a_0/(dt c_0)
        s = imex_scheme("biased", 3)
        dt = 0.1
        mu = float(s.a[0] / (dt * s.c[0]))
        prob = dahlquist(0, mu)
        h = start(prob, s, dt)
        with pytest.raises(StepFailureError):
            step(s, h, prob.operator)


class TestStart:
    def test_exact_levels(self):
        prob = dahlquist(-1.0, 0.0)
        h = start(prob, ssp_explicit(3), 0.1)
        assert h.y[2][0] == pytest.approx(1.0)
        assert h.y[1][0] == pytest.approx(np.exp(-0.1))
        assert h.y[0][0] == pytest.approx(np.exp(-0.2))
        assert h.t == pytest.approx(0.2)

    def test_two_step_schemes_need_two_levels(self):
        h = start(dahlquist(-1.0, 0.0), mcnab(0.125), 0.1)
        assert h.k == 2
        assert len(h.y) == 2

    def test_exact_mode_requires_exact_solution(self):
        prob = dataclasses.replace(dahlquist(-1.0, 0.0), exact=None)
        with pytest.raises(ValueError, match="exact"):
            start(prob, ssp_explicit(3), 0.1)

    def test_unknown_mode(self):
        with pytest.raises(ValueError, match="start mode"):
            start(dahlquist(-1.0, 0.0), ssp_explicit(3), 0.1, mode="spectral")

    def test_bootstrap_levels_close_to_exact(self):
        prob = dahlquist(-0.4, -0.6)
        h = start(prob, ssp_explicit(3), 0.01, mode="euler_bootstrap")
        for j, y in enumerate(reversed(h.y)):
            assert y[0] == pytest.approx(np.exp(-1.0 * 0.01 * j), abs=1e-4)

    def test_bootstrap_with_implicit_operator(self):
        from imexssp.problems import AdvectionDiffusionConfig, advection_diffusion_1d

        grid = GridSpec(32)
        cfg = AdvectionDiffusionConfig(courant=0.3, diffusion_number=0.2)
        prob = advection_diffusion_1d(grid, cfg, mode=2)
        s = scheme_from_id("imex-biased-k3")
        dt = cfg.courant * grid.dx
        h = start(prob, s, dt, mode="euler_bootstrap")
        for j, y in enumerate(reversed(h.y)):
            assert np.max(np.abs(y - prob.exact(j * dt))) < 5e-3

    def test_bootstrap_refinement_override(self):
        prob = dahlquist(-1.0, 0.0)
        coarse = start(prob, ssp_explicit(3), 0.1, mode="euler_bootstrap", refine=1)
        fine = start(prob, ssp_explicit(3), 0.1, mode="euler_bootstrap", refine=64)
        exact = np.exp(-0.2)
        assert abs(fine.y[0][0] - exact) < abs(coarse.y[0][0] - exact)

    def test_bootstrap_keeps_second_order(self):
        s = imex_scheme("biased", 3)
        errs = []
        dts = [1 / 20, 1 / 40, 1 / 80, 1 / 160]
        for dt in dts:
            prob = dahlquist(-0.4, -0.6)
            traj = integrate(prob, s, 1.0, dt, start_mode="euler_bootstrap")
            errs.append(abs(traj.states[-1][0] - prob.exact(1.0)[0]))
        slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
        assert 1.7 <= slope <= 2.3


class TestIntegrate:
    def test_dahlquist_second_order(self):
        s = imex_scheme("biased", 3)

        def err(dt):
            prob = dahlquist(-0.4, -0.6)
            traj = integrate(prob, s, 1.0, dt)
            return abs(traj.states[-1][0] - np.exp(-1.0))

        assert err(1 / 100) / err(1 / 200) == pytest.approx(4.0, abs=0.6)

    def test_zero_operators_constant(self):
        prob = dahlquist(0.0, 0.0)
        traj = integrate(prob, ssp_explicit(3), 2.0, 0.1)
        assert all(abs(u[0] - 1.0) < 1e-13 for u in traj.states)

    def test_blow_up_outside_region(self):
        with pytest.raises(BlowUpError, match="blow-up detected"):
            integrate(dahlquist(-1.5, 0.0), ssp_explicit(3), 200.0, 1.0)

    def test_blow_up_truncate(self):
        traj = integrate(dahlquist(-1.5, 0.0), ssp_explicit(3), 200.0, 1.0,
                         on_blowup="truncate")
        assert len(traj.times) < 201
        assert traj.diagnostics["max_norm"][-1] > 1e10

    def test_non_integral_interval(self):
        with pytest.raises(ValueError, match="integer"):
            integrate(dahlquist(-1.0, 0.0), ssp_explicit(3), 1.0, 0.3)

    def test_diagnostics_recorded(self):
        traj = integrate(dahlquist(-1.0, 0.0), ssp_explicit(3), 1.0, 0.1)
        assert len(traj.diagnostics["max_norm"]) == len(traj.times) == 11
        assert traj.diagnostics["max_norm"][0] == pytest.approx(1.0)


class TestGrowthFactor:
    def test_growth_matches_dominant_characteristic_root(self):
        # after transients, the per-step ratio of the scalar recurrence must
        # converge to the dominant root of the characteristic polynomial
        from imexssp.stability import characteristic_roots

        s = imex_scheme("biased", 3)
        lam, mu = -0.3 + 0.4j, -1.2
        roots = characteristic_roots(s, lam, mu)
        dominant = roots[np.argmax(np.abs(roots))]

        prob = dahlquist(lam, mu)
        op = prob.operator
        levels = [np.array([1.0 + 0j]) for _ in range(3)]
        h = History(3, levels, [op.explicit.apply(y) for y in levels],
                    [op.implicit.apply(y) for y in levels], t=2.0, dt=1.0)
        prev = h.y[0][0]
        for _ in range(300):
            y = step(s, h, op)
            ratio, prev = y[0] / prev, y[0]
        assert abs(ratio - dominant) < 1e-8


class TestEmpiricalStability:
    def test_inside_real_interval(self):
        assert empirical_stability(ssp_explicit(3), -1.0, 0.0)

    def test_outside_real_interval(self):
        assert not empirical_stability(ssp_explicit(3), -1.5, 0.0)

    def test_stiff_implicit(self):
        assert empirical_stability(imex_scheme("biased", 3), -1.0, -100.0)

    def test_needs_enough_steps(self):
        with pytest.raises(ValueError, match="100"):
            empirical_stability(ssp_explicit(3), -1.0, 0.0, n_steps=10)


class TestCsvExport:
    def test_trajectory_csv_real(self):
        grid = GridSpec(8)
        prob = upwind_advection(grid, 1.0)
        traj = integrate(prob, scheme_from_id("euler"), 4 * grid.dx, grid.dx)
        buf = io.StringIO()
        trajectory_to_csv(traj, buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "t," + ",".join(f"y{i}" for i in range(8))
        assert len(lines) == len(traj.times) + 1

    def test_trajectory_csv_complex(self):
        traj = integrate(dahlquist(-1.0, 0.0), ssp_explicit(3), 0.5, 0.1)
        buf = io.StringIO()
        trajectory_to_csv(traj, buf)
        assert buf.getvalue().splitlines()[0] == "t,y0_re,y0_im"

    def test_diagnostics_csv(self):
        traj = integrate(dahlquist(-1.0, 0.0), ssp_explicit(3), 0.5, 0.1)
        buf = io.StringIO()
        diagnostics_to_csv(traj, buf)
        assert buf.getvalue().splitlines()[0] == "t,max_norm,total_variation"
