"""
Effective measurement enhancement mu_eff/mu against SNR, one trace per chi'.

Usage: python manage.py figure2 --chi-prime 1,10,100 -o figure2.csv
"""

import numpy as np
from django.core.exceptions import ValidationError

from dmpaSim.experiments import figure2_sweep
from dmpaSim.exporters import export_sweep
from dmpaSim.svg import figure2_svg

from ._simulation import SimulationCommand, parse_floats


class Command(SimulationCommand):
    help = "Reproduces mu_eff/mu versus SNR/chi'^2 for several chi'"
    formats = ('csv', 'json', 'svg')
    uses_parameters = False

    def add_command_arguments(self, parser):
        parser.add_argument('--chi-prime', default='1,10,100', dest='chi_prime')
        parser.add_argument('--log-range', default='-12,8', dest='log_range',
                            help="log10 bounds of SNR/chi'^2")
        parser.add_argument('--points', type=int, default=201)

    def run(self, options):
        chi_primes = parse_floats(options['chi_prime'], 'chi_prime')
        bounds = parse_floats(options['log_range'], 'log_range')
        if len(bounds) != 2 or options['points'] < 2:
            raise ValidationError({'log_range': ['expected low,high and --points >= 2']})
        lo, hi = bounds
        grid = np.logspace(lo, hi, options['points'])

        result = figure2_sweep(chi_primes, grid)
        fmt = options['format']
        self.emit(figure2_svg(result) if fmt == 'svg' else export_sweep(result, fmt), options)

        peaks = ', '.join(f"chi'={x:g}: {max(r['mu_eff_ratio'] for r in result.rows if r['chi_prime'] == x):.6g}"
                          for x in sorted(set(chi_primes)))
        self.summary(f"{len(chi_primes)} traces x {len(grid)} points; max mu_eff/mu {peaks}", options)
