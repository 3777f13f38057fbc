"""
Unconditional power spectral densities of X and Y.

Usage: python manage.py spectrum --chi 10 --N 0 --points 801 -o psd.csv
"""

import numpy as np

from dmpaSim.dynamics import lyapunov_unconditional
from dmpaSim.experiments import build_metadata
from dmpaSim.exporters import SPECTRUM_COLUMNS, spectrum_rows, to_csv, to_json
from dmpaSim.spectra import default_omega_grid, integrate_psd, unconditional_psd
from dmpaSim.svg import Panel, emit_svg

from ._simulation import SimulationCommand


class Command(SimulationCommand):
    help = 'Computes unconditional PSDs (two-sided, normalised over dw/2pi)'
    formats = ('csv', 'json', 'svg')

    def add_command_arguments(self, parser):
        parser.add_argument('--omega-max', type=float, dest='omega_max',
                            help='grid half-width in units of gamma (default 50 (1 + chi\' + |delta\'|))')
        parser.add_argument('--points', type=int, default=801)

    def run(self, options):
        params, scheme = self.get_params(options)
        if options['omega_max'] is None:
            grid = default_omega_grid(params, options['points'])
        else:
            half = options['omega_max'] * params.gamma
            grid = np.linspace(-half, half, options['points'])

        result = unconditional_psd(params, scheme, grid)
        rows = spectrum_rows(result)

        fmt = options['format']
        if fmt == 'csv':
            text = to_csv(rows, SPECTRUM_COLUMNS)
        elif fmt == 'json':
            text = to_json(rows, build_metadata(params, scheme), SPECTRUM_COLUMNS)
        else:
            positive = [row for row in rows if row['omega'] > 0]
            text = emit_svg(positive, 'omega', (Panel(('s_xx', 's_yy'), 'PSD', log_y=True),), log_x=True)
        self.emit(text, options)

        integrated = integrate_psd(params, scheme)
        reference = lyapunov_unconditional(params, scheme)
        self.summary(
            f"integrated PSD: V_X={integrated.v_x:.6g} V_Y={integrated.v_y:.6g} C={integrated.c:.6g} "
            f"(Lyapunov {reference.v_x:.6g}, {reference.v_y:.6g}, {reference.c:.6g})",
            options,
        )
