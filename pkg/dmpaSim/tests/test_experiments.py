import math
from unittest import mock

import numpy as np
from numpy.testing import assert_allclose
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase, override_settings

from dmpaSim.closedform import dmpa_closed_form, effective_measurement
from dmpaSim.dynamics import CovarianceState
from dmpaSim.exceptions import NonUnimodalError
from dmpaSim.experiments import (
    FIGURE1_COLUMNS,
    bae_mu_for_variance,
    build_metadata,
    figure1_sweep,
    figure2_sweep,
    optimize_mu,
    parameter_sweep,
    relaxation_series,
    steady_state,
)
from dmpaSim.params import RotatingFrameParams, Scheme

DMPA = Scheme.dmpa()


class SteadyStateTests(SimpleTestCase):

    def test_closed_form_without_polish(self):
        params = RotatingFrameParams(gamma=1.0, chi=5.0, delta=-5.0, mu=2.0, N=1.0)
        self.assertEqual(steady_state(params, DMPA, polish=False), dmpa_closed_form(params))
        assert_allclose(steady_state(params, DMPA).as_tuple(), dmpa_closed_form(params).as_tuple(), rtol=1e-9)

    def test_free_detuning_is_numeric(self):
        params = RotatingFrameParams(gamma=1.0, chi=1.0, delta=0.5, mu=1.0)
        state = steady_state(params, Scheme.dmpa(free_detuning=True), polish=False)
        self.assertGreater(state.determinant, 0.25 - 1e-12)


class OptimizeMuTests(SimpleTestCase):

    def test_strong_drive_optimum(self):
        best = optimize_mu(RotatingFrameParams(gamma=1.0, chi=1e4, N=10.0))
        self.assertFalse(best.boundary)
        assert_allclose(best.mu_opt, 10.5, rtol=2e-2)
        assert_allclose(best.v_x_min, 0.0522, rtol=2e-2)
        self.assertEqual(len(best.log_grid), 41)

    def test_scheme_pins_the_detuning(self):
        best = optimize_mu(RotatingFrameParams(gamma=1.0, chi=100.0, delta=3.0, N=1.0))
        self.assertFalse(best.boundary)

    def test_undriven_optimum_is_at_the_boundary(self):
        best = optimize_mu(RotatingFrameParams(gamma=1.0, N=1.0))
        self.assertTrue(best.boundary)
        self.assertAlmostEqual(math.log10(best.mu_opt), 6.0)

    def test_several_minima(self):
        with mock.patch('dmpaSim.experiments.steady_state', return_value=None), \
                mock.patch('dmpaSim.experiments.squeezed_variance',
                           side_effect=lambda state, p, scheme: math.cos(3 * math.log10(p.mu))):
            with self.assertRaises(NonUnimodalError) as cm:
                optimize_mu(RotatingFrameParams(gamma=1.0, chi=1.0))
        self.assertEqual(len(cm.exception.grid), 41)
        self.assertEqual(len(cm.exception.values), 41)


class Figure1Tests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.result = figure1_sweep(eta=1.0, N=10.0, v_x_targets=[0.3, 0.05, 0.01], workers=1)

    def test_rows_sorted_with_fixed_columns(self):
        self.assertEqual(self.result.columns, FIGURE1_COLUMNS)
        assert_allclose(self.result.column('v_x_target'), [0.01, 0.05, 0.3])
        self.assertEqual([row['unreachable'] for row in self.result.rows], ['', '', ''])

    def test_target_is_reached(self):
        assert_allclose(self.result.column('v_x'), self.result.column('v_x_target'), rtol=1e-5)

    def test_strong_squeezing_limits(self):
        row = self.result.rows[0]
        assert_allclose(row['purity_dmpa'], 1 / 3, rtol=2e-2)
        assert_allclose(row['mu_opt_over_gamma'], 10.5, rtol=2e-2)
        assert_allclose(row['purity_bound'], 1 / (1 + 21 / row['mu_opt_over_gamma']))

    def test_dmpa_purity_beats_bae(self):
        for row in self.result.rows:
            self.assertGreaterEqual(row['purity_dmpa'], row['purity_bound'])
            self.assertGreater(row['purity_dmpa'], row['purity_bae'])
            self.assertGreaterEqual(row['mu_eff_ratio'], 1.0)
        self.assertTrue(np.all(np.diff(self.result.column('purity_bae')) > 0))
        self.assertTrue(np.all(np.diff(self.result.column('chi_prime')) < 0))

    def test_metadata(self):
        self.assertEqual(self.result.metadata['eta'], 1.0)
        self.assertEqual(self.result.metadata['chi_range'], [0.1, 1e8])


class Figure1InputTests(SimpleTestCase):

    def test_unreachable_target(self):
        result = figure1_sweep(eta=1.0, N=10.0, v_x_targets=[0.01], chi_range=(0.1, 1.0), workers=1)
        row = result.rows[0]
        self.assertEqual(row['unreachable'], 'dmpa')
        self.assertIsNone(row['chi_prime'])
        self.assertIsNotNone(row['purity_bae'])
        self.assertTrue(math.isnan(result.column('chi_prime')[0]))

    def test_targets_must_be_squeezed(self):
        with self.assertRaises(ValidationError):
            figure1_sweep(eta=1.0, N=0.0, v_x_targets=[0.2, 0.6])

    def test_bae_rate_inverts_the_steady_state(self):
        self.assertAlmostEqual(bae_mu_for_variance((math.sqrt(17) - 1) / 16, eta=1.0, N=0.0), 4.0, places=10)
        self.assertIsNone(bae_mu_for_variance(0.7, eta=1.0, N=0.0))


class Figure2Tests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.result = figure2_sweep([100.0, 1.0, 10.0])

    def trace(self, chi_prime):
        return [row for row in self.result.rows if row['chi_prime'] == chi_prime]

    def test_traces(self):
        self.assertEqual(len(self.result), 3 * 201)
        self.assertEqual(self.result.rows[0]['chi_prime'], 1.0)

    def test_plateau_and_strong_limit(self):
        for chi_prime in (1.0, 10.0, 100.0):
            trace = self.trace(chi_prime)
            assert_allclose(trace[0]['mu_eff_ratio'], 1 + chi_prime ** 2, rtol=1e-3)
            assert_allclose(trace[-1]['mu_eff_ratio'], 1.0, rtol=1e-3)
            self.assertEqual(trace[0]['regime'], 'weak')
            self.assertEqual(trace[-1]['regime'], 'strong')

    def test_intermediate_slope(self):
        chi_prime = 100.0
        mid = [row for row in self.trace(chi_prime) if 1 / chi_prime <= row['snr'] <= chi_prime]
        slope = np.polyfit(np.log([r['snr'] for r in mid]), np.log([r['mu_eff_ratio'] for r in mid]), 1)[0]
        self.assertAlmostEqual(slope, -0.5, delta=0.05)

    def test_rejects_bad_input(self):
        with self.assertRaises(ValidationError):
            figure2_sweep([0.0])
        with self.assertRaises(ValidationError):
            figure2_sweep([1.0], [1.0])


class ParameterSweepTests(SimpleTestCase):

    def test_sweep_over_mu(self):
        base = RotatingFrameParams(gamma=1.0, chi=2.0, N=1.0)
        result = parameter_sweep(base, DMPA, 'mu', [2.0, 0.5, 1.0], workers=1)
        assert_allclose(result.column('value'), [0.5, 1.0, 2.0])
        for row in result.rows:
            em = effective_measurement(base.replace(delta=-2.0, mu=row['value']))
            assert_allclose(row['g'], em.g, rtol=1e-6)
            assert_allclose(row['gamma_filter'], em.gamma_filter, rtol=1e-8)
            self.assertAlmostEqual(row['mu_eff_ratio'], 1 + row['g'] ** 2, places=12)
            self.assertGreaterEqual(row['heisenberg_margin'], -1e-9)
        self.assertEqual(result.metadata['sweep'], 'mu')

    def test_bae_has_no_gain(self):
        result = parameter_sweep(RotatingFrameParams(gamma=1.0), Scheme.bae(), 'mu', [1.0, 4.0], workers=1)
        assert_allclose(result.column('v_x'), [(math.sqrt(5) - 1) / 4, (math.sqrt(17) - 1) / 16], rtol=1e-9)
        assert_allclose(result.column('g'), 0.0)

    def test_unknown_parameter(self):
        with self.assertRaises(ValidationError):
            parameter_sweep(RotatingFrameParams(gamma=1.0), DMPA, 'temperature', [1.0])

    def test_out_of_bounds_value(self):
        with self.assertRaises(ValidationError):
            parameter_sweep(RotatingFrameParams(gamma=1.0), DMPA, 'eta', [0.5, 1.5], workers=1)


class RelaxationSeriesTests(SimpleTestCase):

    def test_relaxes_to_the_steady_state(self):
        params = RotatingFrameParams(gamma=1.0, chi=1.0, mu=1.0)
        result = relaxation_series(params, DMPA, t_end=20.0)
        first, last = result.rows[0], result.rows[-1]
        self.assertEqual((first['t'], first['v_x'], first['v_y'], first['c']), (0.0, 0.5, 0.5, 0.0))
        self.assertEqual(first['purity'], 1.0)
        steady = dmpa_closed_form(DMPA.apply(params))
        assert_allclose((last['v_x'], last['v_y'], last['c']), steady.as_tuple(), rtol=1e-6)
        self.assertEqual(result.columns, ('t', 'v_x', 'v_y', 'c', 'purity'))

    def test_custom_initial_state(self):
        result = relaxation_series(RotatingFrameParams(gamma=1.0, N=1.0), Scheme.bae(), t_end=1.0, dt=0.01,
                                   initial=CovarianceState(3.0, 1.5, 0.0))
        self.assertEqual(len(result), 101)
        self.assertEqual(result.rows[0]['v_x'], 3.0)


class MetadataTests(SimpleTestCase):

    @override_settings(SOURCE_DATE_EPOCH='0')
    def test_reproducible_timestamp(self):
        self.assertEqual(build_metadata()['timestamp'], '1970-01-01T00:00:00+00:00')

    @override_settings(SOURCE_DATE_EPOCH='')
    def test_no_timestamp(self):
        metadata = build_metadata(RotatingFrameParams(gamma=1.0, chi=2.0), DMPA, note='x')
        self.assertIsNone(metadata['timestamp'])
        self.assertEqual(metadata['chi'], 2.0)
        self.assertEqual(metadata['note'], 'x')
        self.assertIn('version', metadata)
