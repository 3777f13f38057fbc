import json
import math
import tempfile
from pathlib import Path

import numpy as np
from django.core.exceptions import ValidationError
from django.test import SimpleTestCase, override_settings

from dmpaSim.dynamics import CovarianceSeries
from dmpaSim.experiments import SweepResult
from dmpaSim.exporters import (
    export_covariance_series,
    export_sweep,
    format_number,
    read_csv,
    resolve_output_path,
    to_csv,
    to_json,
    write_text,
)
from dmpaSim.svg import Panel, emit_svg, figure2_svg, series_svg


def sample_result():
    rows = [
        {'value': 0.5, 'v_x': 0.25, 'label': 'a'},
        {'value': 1.0, 'v_x': None, 'label': 'b'},
        {'value': 2.0, 'v_x': 1 / 3, 'label': 'c'},
    ]
    return SweepResult(rows, {'version': '1.0.0', 'timestamp': None}, ('value', 'v_x', 'label'))


class FormatTests(SimpleTestCase):

    def test_number_formatting(self):
        self.assertEqual(format_number(None), '')
        self.assertEqual(format_number(1 / 3), '0.333333333333')
        self.assertEqual(format_number(np.float64(2.5)), '2.5')
        self.assertEqual(format_number(np.int64(7)), '7')
        self.assertEqual(format_number(True), 'true')
        self.assertEqual(format_number('dmpa'), 'dmpa')

    def test_csv_layout(self):
        text = export_sweep(sample_result(), 'csv')
        self.assertEqual(text, 'value,v_x,label\n0.5,0.25,a\n1,,b\n2,0.333333333333,c\n')

    def test_csv_reads_back(self):
        rows = read_csv(export_sweep(sample_result(), 'csv'))
        self.assertEqual(rows[0], {'value': 0.5, 'v_x': 0.25, 'label': 'a'})
        self.assertIsNone(rows[1]['v_x'])

    def test_json_envelope(self):
        document = json.loads(export_sweep(sample_result(), 'json'))
        self.assertEqual(document['metadata'], {'version': '1.0.0', 'timestamp': None})
        self.assertEqual(document['rows'][1], {'value': 1.0, 'v_x': None, 'label': 'b'})

    def test_non_finite_values_become_null(self):
        document = json.loads(to_json([{'a': math.nan, 'b': math.inf, 'c': np.float64(1.5)}], {}))
        self.assertEqual(document['rows'], [{'a': None, 'b': None, 'c': 1.5}])

    def test_identical_input_identical_bytes(self):
        self.assertEqual(export_sweep(sample_result(), 'json'), export_sweep(sample_result(), 'json'))
        self.assertEqual(to_csv([{'x': 0.1}], ('x',)), to_csv([{'x': 0.1}], ('x',)))

    def test_unknown_format(self):
        with self.assertRaises(ValueError):
            export_sweep(sample_result(), 'xlsx')

    def test_covariance_series(self):
        series = CovarianceSeries(np.array([0.0, 0.5]), np.array([0.5, 0.25]), np.array([0.5, 1.0]),
                                  np.array([0.0, 0.0]))
        self.assertEqual(export_covariance_series(series), 't,v_x,v_y,c,purity\n0,0.5,0.5,0,1\n0.5,0.25,1,0,1\n')


class OutputPathTests(SimpleTestCase):

    def test_bare_names_go_to_the_output_directory(self):
        with tempfile.TemporaryDirectory() as tmp, override_settings(DMPA_OUTPUT_DIR=tmp):
            self.assertEqual(resolve_output_path('out.csv'), Path(tmp) / 'out.csv')
            self.assertEqual(resolve_output_path('sub/out.csv'), Path('sub/out.csv'))
            target = write_text('a\n', 'out.csv')
            self.assertEqual(target.read_text(), 'a\n')

    def test_absolute_path_is_kept(self):
        with tempfile.TemporaryDirectory() as tmp:
            target = write_text('x', Path(tmp) / 'nested' / 'out.json')
            self.assertTrue(target.exists())


class SvgTests(SimpleTestCase):

    def test_series_plot(self):
        rows = [{'t': t, 'v_x': 0.5 + math.exp(-t)} for t in np.linspace(0, 3, 7)]
        svg = series_svg(rows)
        self.assertTrue(svg.startswith('<?xml'))
        self.assertTrue(svg.rstrip().endswith('</svg>'))
        self.assertEqual(svg.count('<polyline'), 1)
        self.assertEqual(svg, series_svg(rows))

    def test_missing_values_split_the_line(self):
        svg = emit_svg(sample_result(), 'value', (Panel(('v_x',), 'V_X'),))
        self.assertEqual(svg.count('<polyline'), 2)

    def test_grouped_traces(self):
        rows = [{'chi_prime': chi, 'snr_over_chi2': s, 'mu_eff_ratio': 1 + chi / s}
                for chi in (1.0, 10.0) for s in (0.1, 1.0, 10.0)]
        svg = figure2_svg(rows)
        self.assertEqual(svg.count('<polyline'), 2)
        self.assertIn('chi_prime = 10', svg)

    def test_log_axis_drops_non_positive_points(self):
        rows = [{'t': 0.0, 'v_x': 1.0}, {'t': 1.0, 'v_x': 0.0}, {'t': 2.0, 'v_x': 0.1}, {'t': 3.0, 'v_x': 0.01}]
        svg = series_svg(rows, log_y=True)
        self.assertEqual(svg.count('<polyline'), 2)

    def test_needs_two_rows(self):
        with self.assertRaises(ValidationError):
            series_svg([{'t': 0.0, 'v_x': 1.0}])
