"""
Steady state along one parameter.

Usage:
    python manage.py sweep --chi 10 --N 10 --name mu --values 0.1,1,10,100
    python manage.py sweep --chi 10 --name mu --logspace -2,3,51 --format svg -o sweep.svg
"""

import numpy as np
from django.core.exceptions import ValidationError

from dmpaSim.experiments import SWEEPABLE, parameter_sweep
from dmpaSim.exporters import export_sweep
from dmpaSim.svg import Panel, emit_svg

from ._simulation import SimulationCommand, parse_floats


class Command(SimulationCommand):
    help = 'Sweeps one parameter and reports the steady state at each value'
    formats = ('csv', 'json', 'svg')

    def add_command_arguments(self, parser):
        parser.add_argument('--name', required=True, choices=SWEEPABLE)
        values = parser.add_mutually_exclusive_group(required=True)
        values.add_argument('--values', help='comma-separated values')
        values.add_argument('--logspace', help='log10 start, log10 stop, count')

    def run(self, options):
        params, scheme = self.get_params(options)
        if options['values']:
            values = parse_floats(options['values'], 'values')
        else:
            spec = parse_floats(options['logspace'], 'logspace')
            if len(spec) != 3 or spec[2] < 2:
                raise ValidationError({'logspace': ['expected start,stop,count with count >= 2']})
            values = np.logspace(spec[0], spec[1], int(spec[2]))

        result = parameter_sweep(params, scheme, options['name'], values)
        fmt = options['format']
        if fmt == 'svg':
            log_x = options['logspace'] is not None
            text = emit_svg(result, 'value', (Panel(('v_x', 'v_y'), 'variance', log_y=True),
                                              Panel(('purity',), 'purity')),
                            log_x=log_x, x_label=options['name'])
        else:
            text = export_sweep(result, fmt)
        self.emit(text, options)

        best = min(result.rows, key=lambda row: row['v_x'])
        self.summary(
            f"{len(result)} points over {options['name']}; min V_X={best['v_x']:.6g} "
            f"at {options['name']}={best['value']:.6g}",
            options,
        )
