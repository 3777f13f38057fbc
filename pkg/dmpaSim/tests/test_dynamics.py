import numpy as np
from numpy.testing import assert_allclose
from scipy.linalg import solve_continuous_lyapunov
from django.test import SimpleTestCase

from dmpaSim.dynamics import (
    CovarianceState,
    diffusion_matrix,
    drift_matrix,
    heisenberg_margin,
    integrate_riccati,
    lyapunov_residual,
    lyapunov_unconditional,
    measurement_matrix,
    riccati_residual,
    riccati_rhs,
    steady_state_numeric,
)
from dmpaSim.exceptions import InstabilityError
from dmpaSim.params import RotatingFrameParams, Scheme

DMPA = Scheme.dmpa()
BAE = Scheme.bae()
FREE = Scheme.dmpa(free_detuning=True)


def dmpa(chi, mu=0.0, eta=1.0, N=0.0, sign=-1):
    return RotatingFrameParams(gamma=1.0, chi=chi, delta=sign * chi, mu=mu, eta=eta, N=N)


class DriftMatrixTests(SimpleTestCase):

    def test_undriven(self):
        assert_allclose(drift_matrix(dmpa(0.0), DMPA), [[-1, 0], [0, -1]])

    def test_qnd_detuning(self):
        assert_allclose(drift_matrix(dmpa(3.0), DMPA), [[-1, 0], [6, -1]])

    def test_bae_has_no_coherent_coupling(self):
        assert_allclose(drift_matrix(RotatingFrameParams(gamma=1.0, chi=7.0), BAE), [[-1, 0], [0, -1]])

    def test_measured_quadratures(self):
        assert_allclose(measurement_matrix(DMPA), np.eye(2))
        assert_allclose(measurement_matrix(BAE), [[1, 0]])


class RiccatiRhsTests(SimpleTestCase):

    def test_lyapunov_fixed_point(self):
        N, chi = 2.0, 3.0
        s2 = N + 0.5
        state = CovarianceState(s2, s2 * (1 + 2 * chi ** 2), chi * s2)
        rhs = riccati_rhs(state, dmpa(chi, N=N), DMPA)
        assert_allclose(rhs.as_tuple(), (0, 0, 0), atol=1e-12)

    def test_bae_thermal_equilibrium(self):
        params = RotatingFrameParams(gamma=1.0, N=1.0)
        rhs = riccati_rhs(CovarianceState.thermal(1.0), params, BAE)
        self.assertEqual(rhs.as_tuple(), (0.0, 0.0, 0.0))

    def test_hand_evaluation(self):
        rhs = riccati_rhs(CovarianceState(0.5, 0.5, 0.0), dmpa(1.0, mu=1.0), DMPA)
        assert_allclose(rhs.as_tuple(), (0.0, 0.0, 1.0), atol=1e-15)

    def test_without_conditioning_matches_lyapunov_operator(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            chi, delta = rng.uniform(0, 5, size=2)
            params = RotatingFrameParams(gamma=1.3, chi=chi, delta=delta, mu=rng.uniform(0, 3), eta=0.0, N=1.0)
            v_x, v_y = rng.uniform(0.5, 5, size=2)
            state = CovarianceState(v_x, v_y, rng.uniform(-0.4, 0.4))
            rhs = riccati_rhs(state, params, FREE)
            assert_allclose(rhs.matrix(), lyapunov_residual(state, params, FREE), rtol=1e-12, atol=1e-12)


class IntegrationTests(SimpleTestCase):

    def test_exponential_relaxation(self):
        params = RotatingFrameParams(gamma=1.0)
        s2 = 0.5
        series = integrate_riccati(CovarianceState(5 * s2, s2, 0.0), params, BAE, t_end=3.0, dt=0.001)
        assert_allclose(series.v_x, s2 + 4 * s2 * np.exp(-2 * series.times), rtol=1e-10)
        self.assertEqual(series.times[0], 0.0)
        self.assertAlmostEqual(series.times[-1], 3.0)

    def test_converges_to_numeric_steady_state(self):
        params = dmpa(2.0, mu=1.0, N=1.0)
        s2 = 1.5
        steady = steady_state_numeric(params, DMPA)
        for scale in (1.0, 10.0):
            final = integrate_riccati(CovarianceState(scale * s2, scale * s2, 0.0), params, DMPA,
                                     t_end=40.0, dt=0.002).final
            assert_allclose(final.as_tuple(), steady.as_tuple(), rtol=1e-8)
            self.assertGreaterEqual(heisenberg_margin(final), -1e-9)

    def test_divergence_above_threshold(self):
        params = RotatingFrameParams(gamma=1.0, chi=2.0, delta=0.0)
        with self.assertRaises(InstabilityError) as cm:
            integrate_riccati(CovarianceState.thermal(0.0), params, FREE, t_end=100.0)
        self.assertGreater(cm.exception.time, 0.0)
        self.assertIn('t =', str(cm.exception))

    def test_final_step_lands_on_t_end(self):
        params = dmpa(1.0, mu=1.0)
        series = integrate_riccati(CovarianceState.thermal(0.0), params, DMPA, t_end=0.1, dt=0.075)
        assert_allclose(series.times, [0.0, 0.075, 0.1])
        fine = integrate_riccati(CovarianceState.thermal(0.0), params, DMPA, t_end=0.1, dt=0.001)
        self.assertEqual(len(fine), 101)
        assert_allclose(series.final.as_tuple(), fine.final.as_tuple(), rtol=1e-4, atol=1e-10)

    def test_rejects_bad_step(self):
        with self.assertRaises(ValueError):
            integrate_riccati(CovarianceState.thermal(0.0), dmpa(1.0), DMPA, t_end=1.0, dt=0.0)


class SteadyStateTests(SimpleTestCase):

    def test_thermal_state(self):
        state = steady_state_numeric(RotatingFrameParams(gamma=1.0, N=3.0), DMPA)
        assert_allclose(state.as_tuple(), (3.5, 3.5, 0.0))

    def test_bae_quadratic_solution(self):
        state = steady_state_numeric(RotatingFrameParams(gamma=1.0, mu=4.0), BAE)
        assert_allclose(state.as_tuple(), ((np.sqrt(17) - 1) / 16, 2.5, 0.0), rtol=1e-12, atol=1e-14)

    def test_bae_monotone_in_mu(self):
        v_x = [steady_state_numeric(RotatingFrameParams(gamma=1.0, mu=mu, N=2.0), BAE).v_x
               for mu in (0.01, 0.1, 1.0, 10.0, 100.0)]
        self.assertTrue(np.all(np.diff(v_x) <= 0))

    def test_bae_uncertainty_floor(self):
        for mu in (0.1, 10.0, 1e4):
            state = steady_state_numeric(RotatingFrameParams(gamma=1.0, mu=mu), BAE)
            self.assertGreaterEqual(heisenberg_margin(state), -1e-9)

    def test_heisenberg_and_residual_over_grid(self):
        for chi in (0.1, 1.0, 10.0, 100.0):
            for mu in (1e-3, 1.0, 1e3):
                for eta, N in ((0.1, 0.0), (1.0, 10.0)):
                    params = dmpa(chi, mu=mu, eta=eta, N=N)
                    state = steady_state_numeric(params, DMPA)
                    self.assertGreaterEqual(heisenberg_margin(state), -1e-9)
                    self.assertLess(riccati_residual(state, params, DMPA), 1e-12)

    def test_both_signs_are_reflections(self):
        minus = steady_state_numeric(dmpa(3.0, mu=2.0, N=1.0, sign=-1), Scheme.dmpa(-1))
        plus = steady_state_numeric(dmpa(3.0, mu=2.0, N=1.0, sign=1), Scheme.dmpa(1))
        assert_allclose(plus.as_tuple(), minus.swapped().as_tuple(), rtol=1e-9)


class LyapunovTests(SimpleTestCase):

    def test_thermal(self):
        assert_allclose(lyapunov_unconditional(RotatingFrameParams(gamma=1.0, N=4.0), DMPA).as_tuple(),
                        (4.5, 4.5, 0.0))

    def test_qnd_unconditional_state(self):
        for chi in (0.5, 3.0, 40.0):
            for N in (0.0, 10.0):
                params = dmpa(chi, N=N)
                s2 = N + 0.5
                state = lyapunov_unconditional(params, DMPA)
                assert_allclose(state.as_tuple(), (s2, s2 * (1 + 2 * chi ** 2), chi * s2), rtol=1e-14)
                self.assertAlmostEqual(state.c / state.v_x, chi, places=12)
                residual = lyapunov_residual(state, params, DMPA)
                self.assertLess(np.max(np.abs(residual)), 1e-12 * s2 * (1 + 2 * chi ** 2))

    def test_matches_scipy_solver(self):
        params = RotatingFrameParams(gamma=1.0, chi=1.2, delta=1.5, mu=0.7, N=2.0)
        a = drift_matrix(params, FREE)
        expected = solve_continuous_lyapunov(a, -diffusion_matrix(params, FREE))
        assert_allclose(lyapunov_unconditional(params, FREE).matrix(), expected, rtol=1e-12)

    def test_bae_with_measurement(self):
        params = RotatingFrameParams(gamma=1.0, mu=3.0, N=1.0, n_bad=0.5)
        assert_allclose(lyapunov_unconditional(params, BAE).as_tuple(), (2.0, 3.0, 0.0))

    def test_unstable_drift(self):
        with self.assertRaises(InstabilityError):
            lyapunov_unconditional(RotatingFrameParams(gamma=1.0, chi=5.0), FREE)
