"""
One conditional trajectory: means, covariance and integrated records.

Usage: python manage.py trajectory --chi 2 --mu 1 --N 1 --seed 7 --t-end 20 -o traj.csv
"""

from django.conf import settings

from dmpaSim.experiments import build_metadata
from dmpaSim.exporters import TRAJECTORY_COLUMNS, to_csv, to_json, trajectory_rows
from dmpaSim.svg import Panel, emit_svg
from dmpaSim.trajectory import simulate_conditional

from ._simulation import SimulationCommand


class Command(SimulationCommand):
    help = 'Simulates one conditional (filtered) trajectory'
    formats = ('csv', 'json', 'svg')

    def add_command_arguments(self, parser):
        parser.add_argument('--seed', type=int, help='run seed (default DMPA_DEFAULT_SEED)')
        parser.add_argument('--index', type=int, default=0, help='trajectory index within the run')
        parser.add_argument('--t-end', type=float, default=20.0, dest='t_end', help='in units of 1/gamma')
        parser.add_argument('--dt', type=float)

    def run(self, options):
        params, scheme = self.get_params(options)
        seed = settings.DMPA_DEFAULT_SEED if options['seed'] is None else options['seed']
        t_end = options['t_end'] / params.gamma

        record = simulate_conditional(params, scheme, seed, t_end, dt=options['dt'], index=options['index'])
        rows = trajectory_rows(record)

        fmt = options['format']
        if fmt == 'csv':
            text = to_csv(rows, TRAJECTORY_COLUMNS)
        elif fmt == 'json':
            metadata = build_metadata(params, scheme, seed=seed, index=options['index'],
                                      dt=float(record.times[1] - record.times[0]))
            text = to_json(rows, metadata, TRAJECTORY_COLUMNS)
        else:
            text = emit_svg(rows, 't', (Panel(('mean_x', 'mean_y'), 'conditional mean'),),
                            title=f'trajectory seed={seed} index={options["index"]}')
        self.emit(text, options)

        self.summary(
            f"{len(rows) - 1} steps to t={record.times[-1]:.6g}: "
            f"<X>={record.mean_x[-1]:.6g} <Y>={record.mean_y[-1]:.6g} "
            f"V_X={record.cov_path.v_x[-1]:.6g} (seed={seed}, index={options['index']})",
            options,
        )
