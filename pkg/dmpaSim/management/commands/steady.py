"""
Stationary conditional covariance of the Riccati equations.

Usage:
    python manage.py steady --scheme dmpa --chi 10 --delta -10 --mu 10.5 --eta 1 --N 10
    python manage.py steady --chi 2 --mu 1 --series 20 -o relax.csv

With --series T the Riccati relaxation from the thermal state up to t = T
is written instead of the single stationary row.
"""

from dataclasses import asdict

from django.core.exceptions import ValidationError

from dmpaSim.closedform import effective_measurement, strong_drive_asymptotics
from dmpaSim.dynamics import CovarianceState, riccati_residual
from dmpaSim.experiments import SWEEP_COLUMNS, build_metadata, relaxation_series, steady_row
from dmpaSim.exporters import export_sweep, to_csv, to_json
from dmpaSim.svg import series_svg

from ._simulation import SimulationCommand

STEADY_COLUMNS = SWEEP_COLUMNS[1:] + ('residual',)


class Command(SimulationCommand):
    help = 'Computes the steady-state conditional covariance (or its relaxation)'
    formats = ('csv', 'json', 'svg')

    def add_command_arguments(self, parser):
        parser.add_argument('--series', type=float, metavar='T_END',
                            help='write the relaxation from the thermal state up to T_END')
        parser.add_argument('--dt', type=float, help='RK4 step for --series')
        parser.add_argument('--asymptotics', action='store_true',
                            help='also report the strong-drive approximations (DMPA at |delta| = chi)')

    def run(self, options):
        params, scheme = self.get_params(options)

        if options['series'] is not None:
            self._series(params, scheme, options)
            return

        row = steady_row(params, scheme)
        state = CovarianceState(row['v_x'], row['v_y'], row['c'])
        row['residual'] = riccati_residual(state, params, scheme)

        extra = {}
        qnd = scheme.is_dmpa and scheme.is_qnd(params)
        if qnd and params.mu > 0:
            em = effective_measurement(params, scheme)
            extra['closed_form'] = {'g': em.g, 'mu_eff_ratio': em.mu_eff_ratio,
                                    'alpha': em.alpha, 'gamma_filter': em.gamma_filter}
        if options['asymptotics'] and qnd:
            extra['strong_drive'] = asdict(strong_drive_asymptotics(params))

        metadata = build_metadata(params, scheme, **extra)
        fmt = options['format']
        if fmt == 'csv':
            self.emit(to_csv([row], STEADY_COLUMNS), options)
        elif fmt == 'json':
            self.emit(to_json([row], metadata, STEADY_COLUMNS), options)
        else:
            raise ValidationError({'format': ['svg output needs --series']})

        self.summary(
            f"V_X={row['v_x']:.6g} V_Y={row['v_y']:.6g} C={row['c']:.6g} "
            f"purity={row['purity']:.6g} g={row['g']:.6g} mu_eff/mu={row['mu_eff_ratio']:.6g}",
            options,
        )
        if 'strong_drive' in extra:
            sd = extra['strong_drive']
            self.summary(
                f"strong drive ({'valid' if sd['valid'] else 'outside validity'}): "
                f"V_X~{sd['v_x_approx']:.6g} mu_opt~{sd['mu_opt_inf']:.6g} V_X(mu_opt)~{sd['v_x_at_mu_opt']:.6g}",
                options, style='NOTICE',
            )

    def _series(self, params, scheme, options):
        result = relaxation_series(params, scheme, options['series'], options['dt'])
        fmt = options['format']
        text = series_svg(result) if fmt == 'svg' else export_sweep(result, fmt)
        self.emit(text, options)
        last = result.rows[-1]
        self.summary(
            f"relaxation to t={last['t']:.6g}: {len(result)} samples, "
            f"V_X={last['v_x']:.6g} V_Y={last['v_y']:.6g} C={last['c']:.6g}",
            options,
        )
