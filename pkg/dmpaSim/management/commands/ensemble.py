"""
Ensemble check of the conditional dynamics: spread of the conditional means
plus the conditional covariance must reproduce the unconditional covariance.

Usage: python manage.py ensemble --chi 2 --mu 1 --N 1 --n-traj 2000 -o report.json

Exits with code 1 when any |z| reaches the threshold.
"""

import json

from django.conf import settings
from django.core.management.base import CommandError

from dmpaSim.experiments import build_metadata
from dmpaSim.exporters import json_ready
from dmpaSim.trajectory import ensemble_validate

from ._simulation import SimulationCommand


class Command(SimulationCommand):
    help = 'Validates conditional trajectories against the unconditional covariance'
    formats = ('json',)

    def add_command_arguments(self, parser):
        parser.add_argument('--n-traj', type=int, dest='n_traj', help='default DMPA_N_TRAJ')
        parser.add_argument('--t-end', type=float, default=20.0, dest='t_end', help='in units of 1/gamma')
        parser.add_argument('--seed', type=int)
        parser.add_argument('--dt', type=float)
        parser.add_argument('--gain-scale', type=float, default=1.0, dest='gain_scale',
                            help='scale the filter gain (negative control)')

    def run(self, options):
        params, scheme = self.get_params(options)
        n_traj = options['n_traj'] or settings.DMPA_N_TRAJ
        report = ensemble_validate(
            params, scheme, n_traj, options['t_end'] / params.gamma,
            seed=options['seed'], dt=options['dt'], gain_scale=options['gain_scale'],
        )

        document = {'metadata': build_metadata(params, scheme), **report.as_dict()}
        self.emit(json.dumps(json_ready(document), indent=2) + '\n', options)

        worst = max(report.z_scores, key=lambda k: abs(report.z_scores[k]))
        message = (f"{n_traj} trajectories (seed={report.seed}): "
                   f"{'pass' if report.passed else 'FAIL'}, max |z| = {abs(report.z_scores[worst]):.3g} ({worst})")
        if not report.passed:
            raise CommandError(message, returncode=1)
        self.summary(message, options)
