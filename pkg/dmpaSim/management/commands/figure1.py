"""
Squeezing comparison at optimal measurement strength: for each target V_X
the drive chi' and mu_opt of DMPA, and the ideal BAE rate, with purities.

Usage: python manage.py figure1 --eta 1 --N 10 --format svg -o figure1.svg
"""

from django.core.exceptions import ValidationError

from dmpaSim.experiments import figure1_sweep
from dmpaSim.exporters import export_sweep
from dmpaSim.svg import figure1_svg

from ._simulation import SimulationCommand, parse_floats

DEFAULT_TARGETS = '0.45,0.4,0.3,0.2,0.15,0.1,0.07,0.05,0.03,0.02,0.01'


class Command(SimulationCommand):
    help = 'Reproduces the squeezing/purity comparison at optimal mu (DMPA vs BAE)'
    formats = ('csv', 'json', 'svg')
    uses_parameters = False

    def add_command_arguments(self, parser):
        parser.add_argument('--eta', type=float, default=1.0)
        parser.add_argument('--N', type=float, default=10.0, dest='N')
        parser.add_argument('--targets', default=DEFAULT_TARGETS, help='comma-separated V_X targets in (0, 0.5)')
        parser.add_argument('--chi-range', default='0.1,1e8', dest='chi_range',
                            help="low,high bracket for chi' (the figure's chi' range is a free choice)")

    def run(self, options):
        if not 0 <= options['eta'] <= 1:
            raise ValidationError({'eta': ['eta must lie in [0, 1]']})
        if options['N'] < 0:
            raise ValidationError({'N': ['N must be >= 0']})
        targets = parse_floats(options['targets'], 'targets')
        chi_range = parse_floats(options['chi_range'], 'chi_range')
        if len(chi_range) != 2:
            raise ValidationError({'chi_range': ['expected two values: low,high']})

        result = figure1_sweep(options['eta'], options['N'], targets, chi_range=tuple(chi_range))
        fmt = options['format']
        self.emit(figure1_svg(result) if fmt == 'svg' else export_sweep(result, fmt), options)

        reached = [row for row in result.rows if 'dmpa' not in row['unreachable']]
        if reached:
            strongest = reached[0]
            self.summary(
                f"{len(result)} targets ({len(reached)} reached by DMPA); at V_X={strongest['v_x_target']:g}: "
                f"chi'={strongest['chi_prime']:.6g} mu_opt/gamma={strongest['mu_opt_over_gamma']:.6g} "
                f"purity={strongest['purity_dmpa']:.6g}",
                options,
            )
        else:
            self.summary(f"{len(result)} targets, none reached in chi' range {chi_range}", options, 'WARNING')
