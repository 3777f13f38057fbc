# dmpaSim/trajectory.py - stochastic conditional trajectories (Gaussian filter)
#
# The conditional state stays Gaussian, so a trajectory is the pair
# (conditional means, covariance). The covariance path does not depend on the
# measurement record and comes from integrate_riccati; the means follow
#   d(m) = A m dt + K dW,   K = 2 sqrt(eta mu) V H^T
# and each measured channel i records
#   dy_i = 2 sqrt(eta mu) (H m)_i dt + dW_i.
# H = measurement_matrix(scheme): DMPA measures X and Y, BAE measures X only.
#
# Random numbers: trajectory `index` of run `seed` draws from its own Philox
# stream keyed by SeedSequence(seed, spawn_key=(index,)), in fixed-size blocks,
# so a trajectory is reproducible alone or as part of any ensemble.

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings

from .dynamics import (
    CovarianceSeries,
    CovarianceState,
    drift_matrix,
    integrate_riccati,
    measurement_matrix,
    lyapunov_unconditional,
    require_stable,
    steady_state_numeric,
)
from .params import derive

logger = logging.getLogger(__name__)


def _numerics(name):
    return settings.DMPA_NUMERICS[name]


def noise_generator(seed, index):
    """Counter-based generator for trajectory `index` of run `seed`"""
    sequence = np.random.SeedSequence(seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(sequence))


def filter_rate(params, scheme):
    """Gamma = gamma + 2 eta mu (V_X + V_Y) at the conditional steady state"""
    steady = steady_state_numeric(params, scheme)
    return params.gamma + 2 * params.eta * params.mu * (steady.v_x + steady.v_y)


# ============================================
# RECORD TYPES
# ============================================

@dataclass(frozen=True)
class TrajectoryRecord:
    times: np.ndarray
    mean_x: np.ndarray
    mean_y: np.ndarray
    records: np.ndarray          # (channels, samples) integrated measurement records
    cov_path: CovarianceSeries
    rng_seed: int
    index: int = 0


@dataclass(frozen=True)
class EnsembleRecord:
    final_means: np.ndarray      # (n_traj, 2)
    final_cov: CovarianceState
    t_end: float
    dt: float
    rng_seed: int
    indices: tuple = field(default_factory=tuple)


# ============================================
# CORE STEPPER
# ============================================

def _step_means(params, scheme, cov_path, seed, indices, initial_mean,
                noise_scale, gain_scale, keep_path, block):
    """
    Euler-Maruyama over the covariance path for the trajectories `indices`.
    Step sizes follow cov_path.times. Arithmetic is elementwise per
    trajectory, so the result for one index does not depend on which other
    indices run alongside it.
    """
    a = drift_matrix(params, scheme)
    a00, a01, a10, a11 = a[0, 0], a[0, 1], a[1, 0], a[1, 1]
    h_matrix = measurement_matrix(scheme)
    channels = h_matrix.shape[0]
    root = 2 * math.sqrt(params.eta * params.mu)
    steps = np.diff(cov_path.times)
    n_steps = len(steps)
    n_traj = len(indices)

    # K(t) = 2 sqrt(eta mu) V(t) H^T, one (2, channels) gain per step
    cov = np.stack([
        np.stack([cov_path.v_x, cov_path.c], axis=-1),
        np.stack([cov_path.c, cov_path.v_y], axis=-1),
    ], axis=1)
    gains = (gain_scale * root) * (cov @ h_matrix.T)

    gens = [noise_generator(seed, i) for i in indices]
    m_x = np.full(n_traj, float(initial_mean[0]))
    m_y = np.full(n_traj, float(initial_mean[1]))
    y = np.zeros((channels, n_traj))

    if keep_path:
        path_x = np.empty((n_steps + 1, n_traj))
        path_y = np.empty((n_steps + 1, n_traj))
        rec = np.empty((channels, n_steps + 1, n_traj))
        path_x[0], path_y[0] = m_x, m_y
        rec[:, 0] = 0.0

    n = 0
    while n < n_steps:
        size = min(block, n_steps - n)
        noise = np.stack([g.standard_normal((size, channels)) for g in gens], axis=-1)
        for s in range(size):
            h = steps[n]
            gain = gains[n]
            dw = noise[s] * (math.sqrt(h) * noise_scale)
            kick_x = 0.0
            kick_y = 0.0
            for i in range(channels):
                y[i] = y[i] + root * (h_matrix[i, 0] * m_x + h_matrix[i, 1] * m_y) * h + dw[i]
                kick_x = kick_x + gain[0, i] * dw[i]
                kick_y = kick_y + gain[1, i] * dw[i]
            m_x, m_y = (
                m_x + (a00 * m_x + a01 * m_y) * h + kick_x,
                m_y + (a10 * m_x + a11 * m_y) * h + kick_y,
            )
            n += 1
            if keep_path:
                path_x[n], path_y[n] = m_x, m_y
                rec[:, n] = y

    if keep_path:
        return path_x, path_y, rec
    return m_x, m_y


def _prepare(params, scheme, t_end, dt, initial_cov):
    params.full_clean()
    require_stable(params, scheme)
    rate = filter_rate(params, scheme)
    if dt is None:
        dt = _numerics('TRAJECTORY_STEP_FACTOR') / rate
    elif dt * rate > _numerics('TRAJECTORY_MAX_STEP_FACTOR'):
        logger.warning(
            f"trajectory step dt={dt:.3g} exceeds {_numerics('TRAJECTORY_MAX_STEP_FACTOR'):g}/Gamma "
            f"(Gamma={rate:.4g}); Euler-Maruyama results will be inaccurate"
        )
    if initial_cov is None:
        initial_cov = lyapunov_unconditional(params, scheme)
    cov_path = integrate_riccati(initial_cov, params, scheme, t_end, dt)
    return dt, cov_path


# ============================================
# PUBLIC OPERATIONS
# ============================================

def simulate_conditional(params, scheme, seed, t_end, dt=None, index=0,
                         initial_mean=(0.0, 0.0), initial_cov=None,
                         noise_scale=1.0, gain_scale=1.0):
    """
    One conditional trajectory. The initial covariance defaults to the
    unconditional stationary one, so with zero initial means the conditional
    and unconditional descriptions agree at t = 0. noise_scale and gain_scale
    are test hooks (zero noise, corrupted gain).
    """
    dt, cov_path = _prepare(params, scheme, t_end, dt, initial_cov)
    path_x, path_y, rec = _step_means(
        params, scheme, cov_path, seed, (index,), initial_mean,
        noise_scale, gain_scale, keep_path=True, block=_numerics('NOISE_BLOCK'),
    )
    logger.debug(f"trajectory seed={seed} index={index}: {len(cov_path) - 1} steps, dt={dt:.3g}")
    return TrajectoryRecord(
        times=cov_path.times,
        mean_x=path_x[:, 0],
        mean_y=path_y[:, 0],
        records=rec[:, :, 0],
        cov_path=cov_path,
        rng_seed=seed,
        index=index,
    )


def _ensemble_chunk(payload):
    params, scheme, cov_path, seed, indices, gain_scale, block = payload
    return _step_means(params, scheme, cov_path, seed, indices, (0.0, 0.0),
                       1.0, gain_scale, keep_path=False, block=block)


def simulate_ensemble(params, scheme, n_traj, t_end, seed, dt=None, gain_scale=1.0, workers=None):
    """
    Final conditional means of trajectories 0..n_traj-1, each identical to
    simulate_conditional(seed=seed, index=i) at t_end. Chunks run on a process
    pool when `workers` (default DMPA_WORKERS) exceeds one; output order is fixed.
    """
    dt, cov_path = _prepare(params, scheme, t_end, dt, None)
    workers = workers or settings.DMPA_WORKERS
    indices = tuple(range(n_traj))

    if workers > 1:
        chunks = [indices[i::workers] for i in range(workers)]
        chunks = [tuple(sorted(ch)) for ch in chunks if ch]
        block = _numerics('NOISE_BLOCK')
        payloads = [(params, scheme, cov_path, seed, ch, gain_scale, block) for ch in chunks]
        final = np.empty((n_traj, 2))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for ch, (m_x, m_y) in zip(chunks, pool.map(_ensemble_chunk, payloads)):
                final[list(ch), 0] = m_x
                final[list(ch), 1] = m_y
    else:
        m_x, m_y = _ensemble_chunk(
            (params, scheme, cov_path, seed, indices, gain_scale, _numerics('NOISE_BLOCK'))
        )
        final = np.column_stack([m_x, m_y])

    logger.info(f"ensemble of {n_traj} trajectories to t={t_end:g} (dt={dt:.3g}, seed={seed})")
    return EnsembleRecord(final, cov_path.final, t_end, dt, seed, indices)


@dataclass
class EnsembleReport:
    entries: dict
    z_scores: dict
    passed: bool
    n_traj: int
    seed: int

    def as_dict(self):
        return {'entries': self.entries, 'z_scores': self.z_scores, 'pass': self.passed,
                'n_traj': self.n_traj, 'seed': self.seed}


def _z(value, standard_error, scale):
    if standard_error > 0:
        return float(value / standard_error)
    return 0.0 if abs(value) <= 1e-9 * max(scale, 1.0) else math.inf


def ensemble_validate(params, scheme, n_traj, t_end, seed=None, dt=None, gain_scale=1.0):
    """
    Law of total variance at t_end: Cov(conditional means) + V_cond must equal
    the unconditional Lyapunov covariance. Passes when every entry-wise z-score
    (and the z-score of each ensemble mean) is below Z_THRESHOLD in magnitude.
    """
    if n_traj < 100:
        raise ValueError(f"n_traj must be >= 100, got {n_traj}")
    if seed is None:
        seed = settings.DMPA_DEFAULT_SEED

    ensemble = simulate_ensemble(params, scheme, n_traj, t_end, seed, dt=dt, gain_scale=gain_scale)
    unconditional = lyapunov_unconditional(params, scheme)
    cond = ensemble.final_cov
    m = ensemble.final_means
    centred = m - m.mean(axis=0)
    scale = derive(params).sigma2_tot

    entries, z_scores = {}, {}
    for name, (i, j), v_cond, v_unc in (
        ('v_x', (0, 0), cond.v_x, unconditional.v_x),
        ('v_y', (1, 1), cond.v_y, unconditional.v_y),
        ('c', (0, 1), cond.c, unconditional.c),
    ):
        products = centred[:, i] * centred[:, j]
        cov_means = float(products.sum() / (n_traj - 1))
        standard_error = float(products.std(ddof=1) / math.sqrt(n_traj))
        entries[name] = {
            'cov_means': cov_means,
            'v_cond': v_cond,
            'total': cov_means + v_cond,
            'v_unconditional': v_unc,
            'standard_error': standard_error,
        }
        z_scores[name] = _z(cov_means + v_cond - v_unc, standard_error, scale)

    for name, i in (('mean_x', 0), ('mean_y', 1)):
        standard_error = float(m[:, i].std(ddof=1) / math.sqrt(n_traj))
        z_scores[name] = _z(float(m[:, i].mean()), standard_error, scale)

    threshold = _numerics('Z_THRESHOLD')
    passed = all(abs(z) < threshold for z in z_scores.values())
    level = logging.INFO if passed else logging.WARNING
    logger.log(level, f"ensemble check {'passed' if passed else 'FAILED'}: "
                      + ', '.join(f"{k}={v:+.2f}" for k, v in z_scores.items()))
    return EnsembleReport(entries, z_scores, passed, n_traj, seed)
