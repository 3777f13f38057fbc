"""
Measurement rate minimising the steady-state squeezed variance.

Usage: python manage.py mu_opt --chi 10000 --N 10 --eta 1

Rows of the output are the coarse grid (log10(mu/gamma), V); the optimum
itself is in the summary and in the JSON metadata.
"""

from dmpaSim.experiments import build_metadata, optimize_mu
from dmpaSim.exporters import to_csv, to_json
from dmpaSim.svg import series_svg

from ._simulation import SimulationCommand

GRID_COLUMNS = ('log10_mu', 'v_x')


class Command(SimulationCommand):
    help = 'Optimises the measurement rate mu for maximal squeezing'
    formats = ('csv', 'json', 'svg')

    def run(self, options):
        params, scheme = self.get_params(options)
        best = optimize_mu(params, scheme)
        rows = [{'log10_mu': float(x), 'v_x': float(v)} for x, v in zip(best.log_grid, best.grid_values)]

        fmt = options['format']
        if fmt == 'csv':
            text = to_csv(rows, GRID_COLUMNS)
        elif fmt == 'json':
            metadata = build_metadata(params, scheme, mu_opt=best.mu_opt, v_x_min=best.v_x_min,
                                      boundary=best.boundary)
            text = to_json(rows, metadata, GRID_COLUMNS)
        else:
            text = series_svg(rows, x='log10_mu', column='v_x', log_y=True)
        self.emit(text, options)

        where = 'boundary of the search range' if best.boundary else 'interior optimum'
        self.summary(
            f"mu_opt/gamma={best.mu_opt / params.gamma:.6g} V_min={best.v_x_min:.6g} ({where})",
            options,
        )
