# dmpaSim/exporters.py - CSV and JSON output
#
# Numbers are written with 12 significant digits; None (and non-finite
# values in JSON) become empty cells / null. Rows are emitted in the order
# given, so identical inputs produce identical bytes.

import csv
import io
import json
import logging
import math
from pathlib import Path

import numpy as np
from django.conf import settings

logger = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 12

COVARIANCE_SERIES_COLUMNS = ('t', 'v_x', 'v_y', 'c', 'purity')
TRAJECTORY_COLUMNS = ('t', 'mean_x', 'mean_y', 'v_x', 'v_y', 'c', 'record_1', 'record_2')
SPECTRUM_COLUMNS = ('omega', 's_xx', 's_yy', 's_xy')


def format_number(value):
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f'{float(value):.{SIGNIFICANT_DIGITS}g}'
    return str(value)


def json_ready(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return None
        return float(f'{value:.{SIGNIFICANT_DIGITS}g}')
    if isinstance(value, dict):
        return {k: json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [json_ready(v) for v in value]
    return value


# ============================================
# ROW BUILDERS
# ============================================

def covariance_series_rows(series):
    purity = series.purity
    return [
        {'t': t, 'v_x': x, 'v_y': y, 'c': c, 'purity': p}
        for t, x, y, c, p in zip(series.times, series.v_x, series.v_y, series.c, purity)
    ]


def trajectory_rows(record):
    cov = record.cov_path
    second = record.records[1] if record.records.shape[0] > 1 else [None] * len(record.times)
    return [
        {'t': t, 'mean_x': mx, 'mean_y': my, 'v_x': vx, 'v_y': vy, 'c': c,
         'record_1': r1, 'record_2': r2}
        for t, mx, my, vx, vy, c, r1, r2 in zip(
            record.times, record.mean_x, record.mean_y, cov.v_x, cov.v_y, cov.c,
            record.records[0], second,
        )
    ]


def spectrum_rows(result):
    return [
        {'omega': w, 's_xx': a, 's_yy': b, 's_xy': c}
        for w, a, b, c in zip(result.omega_grid, result.s_xx, result.s_yy, result.s_xy)
    ]


# ============================================
# SERIALISATION
# ============================================

def to_csv(rows, columns):
    """CSV text with a fixed header"""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_number(row.get(name)) for name in columns])
    return buffer.getvalue()


def to_json(rows, metadata, columns=None):
    """JSON envelope {metadata, rows}"""
    if columns:
        rows = [{name: row.get(name) for name in columns} for row in rows]
    document = {'metadata': json_ready(metadata), 'rows': json_ready(list(rows))}
    return json.dumps(document, indent=2) + '\n'


def read_csv(text):
    """Parse CSV written by to_csv; numeric cells become floats, empty cells None"""
    reader = csv.DictReader(io.StringIO(text))
    rows = []
    for raw in reader:
        row = {}
        for key, cell in raw.items():
            if cell == '':
                row[key] = None
                continue
            try:
                row[key] = float(cell)
            except ValueError:
                row[key] = cell
        rows.append(row)
    return rows


def export_covariance_series(series):
    """CSV `t,v_x,v_y,c,purity` of an integrate_riccati result"""
    return to_csv(covariance_series_rows(series), COVARIANCE_SERIES_COLUMNS)


def export_sweep(result, fmt):
    if fmt == 'csv':
        return to_csv(result.rows, result.columns)
    if fmt == 'json':
        return to_json(result.rows, result.metadata, result.columns)
    raise ValueError(f"unsupported format '{fmt}'")


# ============================================
# FILES
# ============================================

def resolve_output_path(path):
    """Bare file names land in DMPA_OUTPUT_DIR; other paths are used as given"""
    path = Path(path)
    if path.parent == Path('.') and not path.is_absolute():
        path = Path(settings.DMPA_OUTPUT_DIR) / path
    return path


def write_text(text, path):
    target = resolve_output_path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, 'w', encoding='utf-8', newline='') as f:
        f.write(text)
    logger.info(f"wrote {target} ({len(text)} bytes)")
    return target
