# dmpaSim/experiments.py - optimisation and sweep drivers
#
# Sweeps return a SweepResult: an ordered list of row dicts plus a metadata
# envelope. Column order is fixed per sweep (SweepResult.columns) so the CSV
# header never depends on which rows happen to be reachable.

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np
from django.conf import settings
from django.core.exceptions import ValidationError
from scipy.optimize import brentq, minimize_scalar

from .closedform import (
    bae_closed_form,
    dmpa_closed_form,
    effective_measurement,
    enhancement_ratio,
    measurement_regime,
    purity,
    purity_closed,
)
from .dynamics import CovarianceState, heisenberg_margin, integrate_riccati, steady_state_numeric
from .exceptions import NonUnimodalError
from .params import RotatingFrameParams, Scheme, derive, qnd_quadrature

logger = logging.getLogger(__name__)


def _numerics(name):
    return settings.DMPA_NUMERICS[name]


# ============================================
# RESULT TYPES
# ============================================

@dataclass
class SweepResult:
    rows: list
    metadata: dict
    columns: tuple = ()

    def column(self, name):
        return np.array([row[name] if row[name] is not None else np.nan for row in self.rows], dtype=float)

    def __len__(self):
        return len(self.rows)


@dataclass(frozen=True)
class MuOptimum:
    mu_opt: float
    v_x_min: float
    boundary: bool = False
    log_grid: np.ndarray = field(default=None, repr=False)
    grid_values: np.ndarray = field(default=None, repr=False)


def build_metadata(params=None, scheme=None, **extra):
    """Metadata envelope; the timestamp is SOURCE_DATE_EPOCH or null"""
    epoch = settings.SOURCE_DATE_EPOCH
    timestamp = None
    if epoch not in (None, ''):
        timestamp = datetime.fromtimestamp(int(epoch), tz=timezone.utc).isoformat()
    metadata = {
        'version': settings.DMPA_VERSION,
        'timestamp': timestamp,
    }
    if params is not None:
        metadata.update({
            'gamma': params.gamma,
            'chi': params.chi,
            'delta': params.delta,
            'mu': params.mu,
            'eta': params.eta,
            'N': params.N,
            'n_bad': params.n_bad,
        })
    if scheme is not None:
        metadata['scheme'] = str(scheme)
    metadata.update(extra)
    return metadata


def parallel_map(func, items, workers=None):
    """Order-preserving map; a process pool when DMPA_WORKERS > 1"""
    items = list(items)
    workers = workers or settings.DMPA_WORKERS
    if workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(func, items))
    return [func(item) for item in items]


# ============================================
# STEADY STATE HELPERS
# ============================================

def _closed_seed(params, scheme):
    if scheme.is_dmpa:
        if scheme.is_qnd(params, _numerics('QND_RTOL')):
            return dmpa_closed_form(params)
        return None
    return bae_closed_form(params)


def steady_state(params, scheme, polish=True):
    """
    Stationary conditional covariance. Where a closed form exists it seeds the
    Newton solve (polish=True) or is returned as is (polish=False).
    """
    seed = _closed_seed(params, scheme)
    if seed is not None and not polish:
        return seed
    return steady_state_numeric(params, scheme, seed=seed)


def squeezed_variance(state, params, scheme):
    """Variance of the quadrature the measurement conditions best"""
    if scheme.is_dmpa and qnd_quadrature(params) == 1:
        return state.v_y
    return state.v_x


# ============================================
# OPTIMISATION
# ============================================

def _local_minima(values):
    tol = 1e-9
    return [
        i for i in range(1, len(values) - 1)
        if values[i] < values[i - 1] - tol * abs(values[i]) and values[i] <= values[i + 1]
    ]


def optimize_mu(params, scheme=None, polish=True):
    """
    Minimise the steady-state squeezed variance over log10(mu/gamma).

    A coarse grid over MU_LOG_BOUNDS first locates the basin; more than one
    interior local minimum raises NonUnimodalError with the grid attached.
    The basin is then refined by bounded Brent (golden section with parabolic
    steps) to MU_LOG_TOL in log10(mu). Without an interior minimum the best
    grid end point is reported with boundary=True.
    """
    scheme = scheme or Scheme.dmpa()
    params = scheme.apply(params)
    lo, hi = _numerics('MU_LOG_BOUNDS')
    log_grid = np.linspace(lo, hi, _numerics('MU_GRID_POINTS'))

    def objective(log_mu):
        p = params.replace(mu=params.gamma * 10.0 ** log_mu)
        return squeezed_variance(steady_state(p, scheme, polish), p, scheme)

    values = np.array([objective(x) for x in log_grid])
    minima = _local_minima(values)

    if len(minima) > 1:
        raise NonUnimodalError(
            f"V_X(mu) has {len(minima)} interior minima on the coarse grid "
            f"at log10(mu/gamma) = {', '.join(f'{log_grid[i]:.2f}' for i in minima)}",
            grid=log_grid, values=values,
        )

    if not minima:
        i = int(np.argmin(values))
        logger.info(f"optimize_mu: no interior minimum, boundary optimum at mu/gamma = 1e{log_grid[i]:g}")
        return MuOptimum(params.gamma * 10.0 ** log_grid[i], float(values[i]), True, log_grid, values)

    i = minima[0]
    result = minimize_scalar(
        objective,
        bounds=(log_grid[i - 1], log_grid[i + 1]),
        method='bounded',
        options={'xatol': _numerics('MU_LOG_TOL')},
    )
    log_mu, v_min = float(result.x), float(result.fun)
    if values[i] < v_min:
        log_mu, v_min = float(log_grid[i]), float(values[i])
    logger.debug(f"optimize_mu: chi'={params.chi / params.gamma:.4g} -> mu/gamma={10 ** log_mu:.6g}, V={v_min:.6g}")
    return MuOptimum(params.gamma * 10.0 ** log_mu, v_min, False, log_grid, values)


# ============================================
# FIGURE 1: SQUEEZING AND PURITY AT OPTIMAL MU
# ============================================

FIGURE1_COLUMNS = (
    'v_x_target', 'chi_prime', 'mu_opt_over_gamma', 'v_x', 'purity_dmpa', 'purity_bound',
    'mu_eff_ratio', 'snr', 'mu_bae_over_gamma', 'purity_bae', 'unreachable',
)


def bae_mu_for_variance(target, eta, N, gamma=1.0):
    """
    Measurement rate giving BAE (n_bad = 0) steady-state V_X = target, from
    inverting V_X = 2s/(1 + sqrt(1 + 8 eta mu' s)), s = N + 1/2.
    None when the target is out of reach.
    """
    s = N + 0.5
    if eta <= 0 or not 0 < target < s:
        return None
    root = 2 * s / target - 1
    return gamma * (root * root - 1) / (8 * eta * s)


def _figure1_row(payload):
    target, eta, N, gamma, chi_range = payload
    base = RotatingFrameParams(gamma=gamma, eta=eta, N=N)
    scheme = Scheme.dmpa()
    row = dict.fromkeys(FIGURE1_COLUMNS)
    row['v_x_target'] = target
    unreachable = []

    def excess(log_chi):
        p = base.replace(chi=gamma * 10.0 ** log_chi)
        return optimize_mu(p, scheme, polish=False).v_x_min - target

    lo, hi = (math.log10(x) for x in chi_range)
    f_lo, f_hi = excess(lo), excess(hi)
    if f_lo * f_hi > 0:
        unreachable.append('dmpa')
        logger.warning(f"figure1: V_X = {target:g} not reached for chi' in [{chi_range[0]:g}, {chi_range[1]:g}]")
    else:
        log_chi = brentq(excess, lo, hi, xtol=_numerics('BISECT_RTOL'))
        params = scheme.apply(base.replace(chi=gamma * 10.0 ** log_chi))
        best = optimize_mu(params, scheme, polish=False)
        at_opt = params.replace(mu=best.mu_opt)
        pur = purity_closed(at_opt, scheme)
        row.update({
            'chi_prime': 10.0 ** log_chi,
            'mu_opt_over_gamma': best.mu_opt / gamma,
            'v_x': best.v_x_min,
            'purity_dmpa': pur.p,
            'purity_bound': pur.p_lower_bound,
            'mu_eff_ratio': effective_measurement(at_opt, scheme).mu_eff_ratio,
            'snr': derive(at_opt).snr,
        })

    mu_bae = bae_mu_for_variance(target, eta, N, gamma)
    if mu_bae is None:
        unreachable.append('bae')
    else:
        bae_params = base.replace(mu=mu_bae)
        row['mu_bae_over_gamma'] = mu_bae / gamma
        row['purity_bae'] = purity_closed(bae_params, Scheme.bae()).p

    row['unreachable'] = ','.join(unreachable)
    return row


def figure1_sweep(eta, N, v_x_targets, chi_range=(1e-1, 1e8), gamma=1.0, workers=None):
    """
    For each target squeezed variance: the drive chi' at which the mu-optimised
    DMPA steady state reaches it (root of optimize_mu(chi').v_x_min - target in
    log chi'), with purity and mu_opt there, next to the ideal BAE measurement
    rate and purity giving the same variance.
    """
    targets = sorted(float(v) for v in v_x_targets)
    bad = [v for v in targets if not 0 < v < 0.5]
    if bad:
        raise ValidationError({'v_x_targets': [f'targets must lie in (0, 0.5), got {bad}']})
    if not 0 < chi_range[0] < chi_range[1]:
        raise ValidationError({'chi_range': [f'need 0 < low < high, got {chi_range}']})

    rows = parallel_map(_figure1_row, [(t, eta, N, gamma, tuple(chi_range)) for t in targets], workers)
    logger.info(f"figure1 sweep: {len(rows)} targets, eta={eta:g}, N={N:g}")
    metadata = build_metadata(scheme=Scheme.dmpa(), eta=eta, N=N, gamma=gamma,
                              chi_range=list(chi_range), comparison='bae(n_bad=0)')
    return SweepResult(rows, metadata, FIGURE1_COLUMNS)


# ============================================
# FIGURE 2: EFFECTIVE MEASUREMENT ENHANCEMENT
# ============================================

FIGURE2_COLUMNS = (
    'chi_prime', 'snr_over_chi2', 'snr', 'mu_eff_ratio', 'plateau', 'slope', 'regime',
)


def default_snr_grid():
    return np.logspace(-12, 8, 201)


def figure2_sweep(chi_primes, snr_over_chi2_grid=None):
    """
    mu_eff/mu over SNR for each chi', one trace per chi'. Each row carries the
    local log-log slope (second-order finite differences along its trace) and
    the measurement regime.
    """
    grid = default_snr_grid() if snr_over_chi2_grid is None else np.asarray(snr_over_chi2_grid, dtype=float)
    grid = np.sort(grid)
    chi_primes = sorted(float(x) for x in chi_primes)
    if len(grid) < 2 or np.any(grid <= 0):
        raise ValidationError({'snr_over_chi2_grid': ['need at least two positive grid points']})
    if not chi_primes or any(x <= 0 for x in chi_primes):
        raise ValidationError({'chi_primes': ['chi_prime values must be > 0']})

    rows = []
    for chi_prime in chi_primes:
        snr = grid * chi_prime ** 2
        ratio = enhancement_ratio(chi_prime, snr)
        slope = np.gradient(np.log(ratio), np.log(snr))
        for r, s, m, k in zip(grid, snr, ratio, slope):
            rows.append({
                'chi_prime': chi_prime,
                'snr_over_chi2': float(r),
                'snr': float(s),
                'mu_eff_ratio': float(m),
                'plateau': 1 + chi_prime ** 2,
                'slope': float(k),
                'regime': measurement_regime(chi_prime, s),
            })

    logger.info(f"figure2 sweep: {len(chi_primes)} traces x {len(grid)} points")
    metadata = build_metadata(scheme=Scheme.dmpa(), chi_primes=chi_primes)
    return SweepResult(rows, metadata, FIGURE2_COLUMNS)


# ============================================
# GENERIC SWEEPS
# ============================================

SWEEP_COLUMNS = (
    'value', 'v_x', 'v_y', 'c', 'purity', 'heisenberg_margin', 'g', 'mu_eff_ratio', 'snr', 'gamma_filter',
)

SWEEPABLE = ('gamma', 'chi', 'delta', 'mu', 'eta', 'N', 'n_bad')


def steady_row(params, scheme, state=None):
    """Steady state with purity, gain g = C/V_q, mu_eff/mu, SNR and filter width"""
    if state is None:
        state = steady_state(params, scheme)
    v_q = squeezed_variance(state, params, scheme)
    g = state.c / v_q if scheme.is_dmpa else 0.0
    return {
        'v_x': state.v_x,
        'v_y': state.v_y,
        'c': state.c,
        'purity': purity(state),
        'heisenberg_margin': heisenberg_margin(state),
        'g': g,
        'mu_eff_ratio': 1 + g * g,
        'snr': derive(params).snr,
        'gamma_filter': params.gamma + 2 * params.eta * params.mu * (state.v_x + state.v_y),
    }


def _sweep_row(payload):
    return steady_row(*payload)


def parameter_sweep(params, scheme, name, values, workers=None):
    """Steady state and derived quantities along one parameter"""
    if name not in SWEEPABLE:
        raise ValidationError({'name': [f"cannot sweep '{name}'; choose one of {', '.join(SWEEPABLE)}"]})
    values = sorted(float(v) for v in values)
    points = []
    for v in values:
        p = scheme.apply(params.replace(**{name: v}))
        p.full_clean()
        points.append((p, scheme))

    rows = []
    for v, result in zip(values, parallel_map(_sweep_row, points, workers)):
        rows.append({'value': v, **result})
    logger.info(f"sweep over {name}: {len(rows)} points ({scheme})")
    metadata = build_metadata(params, scheme, sweep=name)
    return SweepResult(rows, metadata, SWEEP_COLUMNS)


def relaxation_series(params, scheme, t_end, dt=None, initial=None):
    """
    Riccati relaxation from `initial` (default the thermal state N + 1/2) to
    the conditional steady state; rows carry t, V_X, V_Y, C and purity.
    """
    params = scheme.apply(params)
    params.full_clean()
    if initial is None:
        initial = CovarianceState.thermal(params.N)
    series = integrate_riccati(initial, params, scheme, t_end, dt)
    pur = series.purity
    rows = [
        {'t': float(t), 'v_x': float(x), 'v_y': float(y), 'c': float(c), 'purity': float(p)}
        for t, x, y, c, p in zip(series.times, series.v_x, series.v_y, series.c, pur)
    ]
    return SweepResult(rows, build_metadata(params, scheme, t_end=t_end), ('t', 'v_x', 'v_y', 'c', 'purity'))
