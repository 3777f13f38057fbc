# dmpaSim/svg.py - self-contained SVG line plots
#
# Output is plain SVG 1.1 (polylines, tick marks, text) with coordinates
# rounded to 0.01 px, so identical data gives identical bytes.

import logging
import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

from django.core.exceptions import ValidationError

logger = logging.getLogger(__name__)

WIDTH = 640
PANEL_HEIGHT = 220
MARGIN_LEFT = 70
MARGIN_RIGHT = 150
MARGIN_TOP = 30
PANEL_GAP = 40
MARGIN_BOTTOM = 45

COLORS = ('#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e', '#8c564b', '#17becf')


@dataclass(frozen=True)
class Panel:
    columns: tuple
    label: str = ''
    log_y: bool = False


@dataclass(frozen=True)
class Trace:
    label: str
    points: list


def _fmt(v):
    return f'{v:.2f}'


def _finite(v, log):
    return v is not None and math.isfinite(v) and (v > 0 or not log)


class _Scale:
    def __init__(self, values, log, lo_px, hi_px):
        self.log = log
        data = [math.log10(v) if log else v for v in values]
        lo, hi = min(data), max(data)
        if hi == lo:
            pad = 0.5 if log else (abs(lo) * 0.1 or 1.0)
            lo, hi = lo - pad, hi + pad
        self.lo, self.hi = lo, hi
        self.lo_px, self.hi_px = lo_px, hi_px

    def __call__(self, v):
        x = math.log10(v) if self.log else v
        return self.lo_px + (x - self.lo) / (self.hi - self.lo) * (self.hi_px - self.lo_px)

    def ticks(self):
        if self.log:
            first, last = math.ceil(self.lo), math.floor(self.hi)
            step = max(1, math.ceil((last - first + 1) / 8))
            return [(10.0 ** k, f'1e{k}') for k in range(first, last + 1, step)]
        span = self.hi - self.lo
        raw = span / 5
        magnitude = 10 ** math.floor(math.log10(raw))
        step = min((m * magnitude for m in (1, 2, 5, 10) if m * magnitude >= raw), default=raw)
        start = math.ceil(self.lo / step) * step
        ticks = []
        k = 0
        while start + k * step <= self.hi + 1e-12 * span:
            v = start + k * step
            ticks.append((v, f'{v:.4g}'))
            k += 1
        return ticks


def _segments(points, log_x, log_y):
    """Split a trace wherever a point cannot be drawn"""
    segment = []
    for x, y in points:
        if _finite(x, log_x) and _finite(y, log_y):
            segment.append((x, y))
        elif segment:
            yield segment
            segment = []
    if segment:
        yield segment


def _traces(rows, x, column, group_by):
    if group_by is None:
        return [Trace(column, [(row.get(x), row.get(column)) for row in rows])]
    groups = {}
    for row in rows:
        groups.setdefault(row[group_by], []).append((row.get(x), row.get(column)))
    return [Trace(f'{group_by} = {key:g}' if isinstance(key, float) else f'{group_by} = {key}', pts)
            for key, pts in groups.items()]


def emit_svg(result, x, panels, log_x=False, group_by=None, x_label=None, title=''):
    """
    One or more stacked panels sharing the x column. Each panel draws its
    columns (or, with group_by, one trace per distinct value of that column).
    """
    rows = result.rows if hasattr(result, 'rows') else list(result)
    if len(rows) < 2:
        raise ValidationError({'data': [f'need at least two rows to plot, got {len(rows)}']})

    height = MARGIN_TOP + len(panels) * PANEL_HEIGHT + (len(panels) - 1) * PANEL_GAP + MARGIN_BOTTOM
    plot_right = WIDTH - MARGIN_RIGHT
    xs = [row.get(x) for row in rows if _finite(row.get(x), log_x)]
    if len(xs) < 2:
        raise ValidationError({'data': [f"column '{x}' has fewer than two plottable values"]})
    x_scale = _Scale(xs, log_x, MARGIN_LEFT, plot_right)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{height}" '
        f'viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{height}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{WIDTH / 2:.2f}" y="18" text-anchor="middle" font-size="13">{escape(title)}</text>')

    for index, panel in enumerate(panels):
        top = MARGIN_TOP + index * (PANEL_HEIGHT + PANEL_GAP)
        bottom = top + PANEL_HEIGHT
        traces = [t for column in panel.columns for t in _traces(rows, x, column, group_by)]
        ys = [y for t in traces for seg in _segments(t.points, log_x, panel.log_y) for _, y in seg]
        if not ys:
            raise ValidationError({'data': [f"panel '{panel.label}' has no plottable values"]})
        y_scale = _Scale(ys, panel.log_y, bottom, top)

        out.append(f'<rect x="{MARGIN_LEFT}" y="{top}" width="{plot_right - MARGIN_LEFT}" '
                   f'height="{PANEL_HEIGHT}" fill="none" stroke="black"/>')
        for value, label in y_scale.ticks():
            py = _fmt(y_scale(value))
            out.append(f'<line x1="{MARGIN_LEFT - 4}" y1="{py}" x2="{MARGIN_LEFT}" y2="{py}" stroke="black"/>')
            out.append(f'<text x="{MARGIN_LEFT - 6}" y="{py}" text-anchor="end" dy="3">{escape(label)}</text>')
        for value, label in x_scale.ticks():
            px = _fmt(x_scale(value))
            out.append(f'<line x1="{px}" y1="{bottom}" x2="{px}" y2="{bottom + 4}" stroke="black"/>')
            if index == len(panels) - 1:
                out.append(f'<text x="{px}" y="{bottom + 16}" text-anchor="middle">{escape(label)}</text>')
        out.append(f'<text x="16" y="{(top + bottom) / 2:.2f}" text-anchor="middle" '
                   f'transform="rotate(-90 16 {(top + bottom) / 2:.2f})">{escape(panel.label)}</text>')

        for k, trace in enumerate(traces):
            color = COLORS[k % len(COLORS)]
            for segment in _segments(trace.points, log_x, panel.log_y):
                coords = ' '.join(f'{_fmt(x_scale(px))},{_fmt(y_scale(py))}' for px, py in segment)
                out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}"/>')
            ly = top + 14 + 14 * k
            out.append(f'<line x1="{plot_right + 8}" y1="{ly}" x2="{plot_right + 26}" y2="{ly}" '
                       f'stroke="{color}" stroke-width="1.5"/>')
            out.append(f'<text x="{plot_right + 30}" y="{ly}" dy="3">{escape(trace.label)}</text>')

    bottom = MARGIN_TOP + len(panels) * PANEL_HEIGHT + (len(panels) - 1) * PANEL_GAP
    out.append(f'<text x="{(MARGIN_LEFT + plot_right) / 2:.2f}" y="{bottom + 36}" '
               f'text-anchor="middle">{escape(x_label or x)}</text>')
    out.append('</svg>')
    logger.debug(f"SVG: {len(panels)} panel(s), {len(rows)} rows")
    return '\n'.join(out) + '\n'


# ============================================
# PRESET LAYOUTS
# ============================================

def figure1_svg(result):
    panels = (
        Panel(('purity_dmpa', 'purity_bae', 'purity_bound'), 'purity'),
        Panel(('mu_opt_over_gamma', 'mu_bae_over_gamma'), 'mu / gamma', log_y=True),
        Panel(('chi_prime',), "chi'", log_y=True),
    )
    return emit_svg(result, 'v_x_target', panels, log_x=True, x_label='V_X', title='Squeezing at optimal mu')


def figure2_svg(result):
    panels = (Panel(('mu_eff_ratio',), 'mu_eff / mu', log_y=True),)
    return emit_svg(result, 'snr_over_chi2', panels, log_x=True, group_by='chi_prime',
                    x_label="SNR / chi'^2", title='Effective measurement enhancement')


def series_svg(result, x='t', column='v_x', log_x=False, log_y=False):
    return emit_svg(result, x, (Panel((column,), column, log_y),), log_x=log_x, x_label=x)
