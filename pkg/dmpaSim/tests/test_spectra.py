import numpy as np
from numpy.testing import assert_allclose
from django.test import SimpleTestCase

from dmpaSim.dynamics import lyapunov_unconditional
from dmpaSim.exceptions import InstabilityError
from dmpaSim.params import RotatingFrameParams, Scheme
from dmpaSim.spectra import default_omega_grid, integrate_psd, psd_ratio, unconditional_psd

DMPA = Scheme.dmpa()
FREE = Scheme.dmpa(free_detuning=True)


def dmpa(chi, mu=0.0, N=0.0):
    return RotatingFrameParams(gamma=1.0, chi=chi, delta=-chi, mu=mu, N=N)


class SpectrumShapeTests(SimpleTestCase):

    def test_qnd_closed_forms(self):
        chi, N, mu = 3.0, 2.0, 1.0
        params = dmpa(chi, mu=mu, N=N)
        omega = np.linspace(-20, 20, 81)
        spectrum = unconditional_psd(params, DMPA, omega)
        s_in = 2 * (N + 0.5 + mu / 2)
        lorentz = 1 + omega ** 2
        assert_allclose(spectrum.s_xx, s_in / lorentz, rtol=1e-12)
        assert_allclose(spectrum.s_yy, s_in / lorentz * (1 + 4 * chi ** 2 / lorentz), rtol=1e-12)
        assert_allclose(spectrum.s_xy, 2 * chi * s_in / lorentz ** 2, rtol=1e-12)

    def test_ratio_limits(self):
        for chi in (0.0, 0.5, 10.0):
            params = dmpa(chi, N=1.0)
            self.assertAlmostEqual(psd_ratio(params, DMPA, 0.0), 1 + 4 * chi ** 2, places=9)
            assert_allclose(psd_ratio(params, DMPA, 1e7), 1.0, rtol=1e-9)

    def test_even_in_frequency(self):
        params = RotatingFrameParams(gamma=1.0, chi=1.0, delta=2.0, N=1.0)
        omega = np.linspace(0, 30, 31)
        plus = unconditional_psd(params, FREE, omega)
        minus = unconditional_psd(params, FREE, -omega)
        assert_allclose(plus.s_xx, minus.s_xx, rtol=1e-13)
        assert_allclose(plus.s_xy, minus.s_xy, rtol=1e-13, atol=1e-15)

    def test_default_grid(self):
        grid = default_omega_grid(dmpa(2.0))
        self.assertEqual(len(grid), 801)
        self.assertEqual((grid[0], grid[-1]), (-250.0, 250.0))
        self.assertEqual(grid[400], 0.0)

    def test_unstable_drift(self):
        with self.assertRaises(InstabilityError):
            unconditional_psd(RotatingFrameParams(gamma=1.0, chi=5.0), FREE, [0.0])


class IntegratedSpectrumTests(SimpleTestCase):

    def test_integral_is_the_unconditional_covariance(self):
        for chi in (0.0, 1.0, 10.0):
            for N in (0.0, 10.0):
                for mu in (0.0, 2.0):
                    params = dmpa(chi, mu=mu, N=N)
                    expected = lyapunov_unconditional(params, DMPA)
                    integrated = integrate_psd(params, DMPA)
                    assert_allclose(integrated.as_tuple(), expected.as_tuple(), rtol=1e-6, atol=1e-9)

    def test_complex_drift_eigenvalues(self):
        params = RotatingFrameParams(gamma=1.0, chi=1.0, delta=2.0, mu=0.5, N=1.0)
        assert_allclose(integrate_psd(params, FREE).as_tuple(),
                        lyapunov_unconditional(params, FREE).as_tuple(), rtol=1e-6, atol=1e-9)

    def test_absolute_rates(self):
        params = RotatingFrameParams(gamma=3.0, chi=6.0, delta=-6.0, mu=1.5, N=0.5)
        assert_allclose(integrate_psd(params, DMPA).as_tuple(),
                        lyapunov_unconditional(params, DMPA).as_tuple(), rtol=1e-6)
