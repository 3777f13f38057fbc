"""
Check a parameter set: bounds, stability of the unconditional drift and
soft warnings (rotating wave approximation, proximity to threshold, QND).

Usage: python manage.py validate --chi 5 --delta 0
"""

from django.core.management.base import CommandError

from dmpaSim.params import validate

from ._simulation import SimulationCommand


class Command(SimulationCommand):
    help = 'Validates model parameters and reports drift stability'
    formats = ()

    def run(self, options):
        params, scheme = self.get_params(options)
        report = validate(params, scheme)

        for warning in report.warnings:
            self.stdout.write(self.style.WARNING(f'warning: {warning}'))

        if not report.ok:
            raise CommandError(report.summary(), returncode=1)

        d = params.derived
        self.summary(
            f"{report.summary()}; chi'={d.chi_prime:.6g} mu'={d.mu_prime:.6g} "
            f"N_BA={d.n_ba:.6g} SNR={d.snr:.6g} ({scheme})",
            options,
        )
