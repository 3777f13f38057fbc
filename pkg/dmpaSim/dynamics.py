# dmpaSim/dynamics.py - conditional covariance (Riccati) dynamics
#
# Quadrature convention: X, Y with [X, Y] = i, ground-state variance 1/2.
#
# Drift convention: DMPA uses A = [[-g, delta+chi], [chi-delta, -g]]. At
# delta = -chi this is [[-g, 0], [2 chi, -g]]; the factor 2 in the (Y, X)
# entry is what the Hamiltonian, the frequency-domain transfer factor
# 2 chi/(g - i w) and the 4 chi C / 2 chi V_X covariance terms all require.
# A printed Langevin matrix with a bare chi in that entry is not used.
#
# Measurement convention: record dy_i = 2 sqrt(eta mu) <q_i> dt + dW_i, so the
# conditioning term of the Riccati equation is -4 eta mu V M V with
# M = diag(j, k) the measured-channel switches (DMPA j = k = 1, BAE j = 1, k = 0).

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from scipy.integrate import solve_ivp

from .exceptions import ConvergenceError, InstabilityError, InvalidStateError
from .params import V_G, derive

logger = logging.getLogger(__name__)


def _numerics(name):
    return settings.DMPA_NUMERICS[name]


# ============================================
# STATE TYPES
# ============================================

@dataclass(frozen=True)
class CovarianceState:
    """Symmetrised conditional covariance: V_X, V_Y and C = <{X, Y}/2>"""

    v_x: float
    v_y: float
    c: float

    @classmethod
    def from_matrix(cls, matrix):
        m = np.asarray(matrix, dtype=float)
        return cls(float(m[0, 0]), float(m[1, 1]), float(0.5 * (m[0, 1] + m[1, 0])))

    @classmethod
    def thermal(cls, occupation):
        return cls(occupation + 0.5, occupation + 0.5, 0.0)

    def matrix(self):
        return np.array([[self.v_x, self.c], [self.c, self.v_y]])

    def as_tuple(self):
        return (self.v_x, self.v_y, self.c)

    @property
    def determinant(self):
        return self.v_x * self.v_y - self.c ** 2

    def swapped(self):
        """Exchange the roles of X and Y"""
        return CovarianceState(self.v_y, self.v_x, self.c)


def heisenberg_margin(state):
    """V_X V_Y - C^2 - V_g^2; non-negative for every physical state"""
    return state.determinant - V_G ** 2


def check_state(state, name='state'):
    if not (state.v_x > 0 and state.v_y > 0):
        raise InvalidStateError(f"{name}: variances must be positive, got {state}")
    if heisenberg_margin(state) < -_numerics('HEISENBERG_TOL'):
        raise InvalidStateError(
            f"{name}: V_X V_Y - C^2 = {state.determinant:.6g} violates the Heisenberg bound 1/4"
        )


# ============================================
# MODEL MATRICES
# ============================================

@dataclass(frozen=True)
class _Coefficients:
    gamma: float
    a01: float
    a10: float
    q_x: float
    q_y: float
    k: float        # 4 eta mu
    j: int          # X channel measured
    m: int          # Y channel measured


def _coefficients(params, scheme):
    d = derive(params)
    gamma = params.gamma
    if scheme.is_dmpa:
        a01 = params.delta + params.chi
        a10 = params.chi - params.delta
        q_x = q_y = 2 * gamma * d.sigma2_tot
        j, m = 1, 1
    else:
        a01 = a10 = 0.0
        q_x = 2 * gamma * (d.sigma2 + params.n_bad)
        q_y = 2 * gamma * d.sigma2_tot
        j, m = 1, 0
    return _Coefficients(gamma, a01, a10, q_x, q_y, 4 * params.eta * params.mu, j, m)


def drift_matrix(params, scheme):
    """Unconditional drift A acting on (X, Y); A[0,0] = A[1,1] = -gamma"""
    co = _coefficients(params, scheme)
    return np.array([[-co.gamma, co.a01], [co.a10, -co.gamma]])


def diffusion_matrix(params, scheme):
    """Q = diag(q_x, q_y): thermal noise plus measurement backaction"""
    co = _coefficients(params, scheme)
    return np.diag([co.q_x, co.q_y])


def measurement_matrix(scheme):
    """Rows select the measured quadratures"""
    return np.eye(2) if scheme.is_dmpa else np.array([[1.0, 0.0]])


def drift_eigenvalues(params, scheme):
    """-gamma +- sqrt(A01 A10); for DMPA -gamma +- sqrt(chi^2 - delta^2)"""
    co = _coefficients(params, scheme)
    root = cmath.sqrt(co.a01 * co.a10)
    return (complex(-co.gamma + root), complex(-co.gamma - root))


def require_stable(params, scheme):
    eig = drift_eigenvalues(params, scheme)
    worst = max(eig, key=lambda z: z.real)
    if worst.real >= 0:
        raise InstabilityError(
            f"unconditional drift is unstable: eigenvalue {worst.real:.6g}{worst.imag:+.6g}j "
            f"has non-negative real part",
            eigenvalue=worst,
        )
    return eig


# ============================================
# RICCATI EQUATIONS
# ============================================

def _rhs(v_x, v_y, c, co):
    k = co.k
    dv_x = 2 * co.a01 * c - 2 * co.gamma * v_x + co.q_x - k * (co.j * v_x * v_x + co.m * c * c)
    dv_y = 2 * co.a10 * c - 2 * co.gamma * v_y + co.q_y - k * (co.j * c * c + co.m * v_y * v_y)
    dc = co.a10 * v_x + co.a01 * v_y - 2 * co.gamma * c - k * c * (co.j * v_x + co.m * v_y)
    return dv_x, dv_y, dc


def _jacobian(v_x, v_y, c, co):
    k = co.k
    return np.array([
        [-2 * co.gamma - 2 * k * co.j * v_x, 0.0, 2 * co.a01 - 2 * k * co.m * c],
        [0.0, -2 * co.gamma - 2 * k * co.m * v_y, 2 * co.a10 - 2 * k * co.j * c],
        [co.a10 - k * co.j * c, co.a01 - k * co.m * c, -2 * co.gamma - k * (co.j * v_x + co.m * v_y)],
    ])


def _term_scale(v_x, v_y, c, co):
    terms = (
        2 * co.gamma * abs(v_x), 2 * co.gamma * abs(v_y), 2 * co.gamma * abs(c),
        co.q_x, co.q_y,
        2 * abs(co.a01 * c), 2 * abs(co.a10 * c), abs(co.a10 * v_x), abs(co.a01 * v_y),
        co.k * max(v_x * v_x, v_y * v_y, c * c, abs(c * v_x), abs(c * v_y)),
    )
    return max(terms)


def riccati_rhs(state, params, scheme):
    """
    Time derivative of the conditional covariance.

    DMPA (sigma_tot^2 = N + 1/2 + N_BA):
      dV_X = 2(delta+chi)C - 2g V_X + 2g sigma_tot^2 - 4 eta mu (V_X^2 + C^2)
      dV_Y = 2(chi-delta)C - 2g V_Y + 2g sigma_tot^2 - 4 eta mu (V_Y^2 + C^2)
      dC   = (chi-delta)V_X + (chi+delta)V_Y - 2g C - 4 eta mu C (V_X + V_Y)
    BAE:
      dV_X = -2g V_X + 2g (N + 1/2 + N_bad) - 4 eta mu V_X^2
      dV_Y = -2g V_Y + 2g (N + 1/2 + N_BA) - 4 eta mu C^2
      dC   = -2g C - 4 eta mu V_X C
    """
    co = _coefficients(params, scheme)
    return CovarianceState(*_rhs(state.v_x, state.v_y, state.c, co))


def riccati_residual(state, params, scheme):
    """max |riccati_rhs| relative to the largest term in the right-hand side"""
    co = _coefficients(params, scheme)
    r = _rhs(state.v_x, state.v_y, state.c, co)
    scale = max(_term_scale(state.v_x, state.v_y, state.c, co), params.gamma * derive(params).sigma2)
    return max(abs(x) for x in r) / scale


# ============================================
# TIME INTEGRATION
# ============================================

@dataclass(frozen=True)
class CovarianceSeries:
    times: np.ndarray
    v_x: np.ndarray
    v_y: np.ndarray
    c: np.ndarray

    def __len__(self):
        return len(self.times)

    def __getitem__(self, index):
        return CovarianceState(float(self.v_x[index]), float(self.v_y[index]), float(self.c[index]))

    @property
    def final(self):
        return self[-1]

    @property
    def purity(self):
        return V_G ** 2 / (self.v_x * self.v_y - self.c ** 2)


def default_step(initial, params, scheme):
    """
    min(0.01/g, 0.01/(g + 2 eta mu (V_X + V_Y)), 0.01/|coherent rate|) from the
    initial state; the conditioning terms are stiff at large mu.
    """
    factor = _numerics('STEP_FACTOR')
    co = _coefficients(params, scheme)
    rates = [
        co.gamma,
        co.gamma + 0.5 * co.k * (abs(initial.v_x) + abs(initial.v_y)),
        abs(co.a01),
        abs(co.a10),
    ]
    return factor / max(rates)


def integrate_riccati(initial, params, scheme, t_end, dt=None):
    """
    Fixed-step classical RK4; samples at t = 0, dt, 2 dt, ... and at t_end.
    When t_end is not a multiple of dt the last step is shortened to land on it.
    """
    check_state(initial, 'initial state')
    if dt is None:
        dt = default_step(initial, params, scheme)
    if dt <= 0 or t_end < dt:
        raise ValueError(f"need dt > 0 and t_end >= dt, got dt={dt}, t_end={t_end}")

    co = _coefficients(params, scheme)
    n_steps = int(round(t_end / dt))
    last = dt
    times = dt * np.arange(n_steps + 1)
    if not math.isclose(n_steps * dt, t_end, rel_tol=1e-9):
        n_steps = math.ceil(t_end / dt)
        last = t_end - (n_steps - 1) * dt
        times = np.append(dt * np.arange(n_steps), t_end)
    limit = _numerics('DIVERGENCE_FACTOR') * derive(params).sigma2

    v_x = np.empty(n_steps + 1)
    v_y = np.empty(n_steps + 1)
    c = np.empty(n_steps + 1)
    x, y, z = initial.as_tuple()
    v_x[0], v_y[0], c[0] = x, y, z
    for n in range(1, n_steps + 1):
        h = last if n == n_steps else dt
        half = 0.5 * h
        k1 = _rhs(x, y, z, co)
        k2 = _rhs(x + half * k1[0], y + half * k1[1], z + half * k1[2], co)
        k3 = _rhs(x + half * k2[0], y + half * k2[1], z + half * k2[2], co)
        k4 = _rhs(x + h * k3[0], y + h * k3[1], z + h * k3[2], co)
        x += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        y += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        z += h / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        if not (abs(x) < limit and abs(y) < limit):
            t = times[n]
            raise InstabilityError(
                f"covariance diverged at t = {t:.6g} (variance above {limit:.3g})", time=t
            )
        v_x[n], v_y[n], c[n] = x, y, z

    logger.debug(f"RK4: {n_steps} steps of dt={dt:.3g}, final V_X={x:.6g} V_Y={y:.6g} C={z:.6g}")
    return CovarianceSeries(times, v_x, v_y, c)


# ============================================
# STATIONARY SOLUTIONS
# ============================================

def lyapunov_unconditional(params, scheme):
    """
    Solve A V + V A^T + Q = 0 in closed form for the 2x2 case
    (A = [[-g, a], [b, -g]], Q diagonal):
      C = (b q_x + a q_y) / (4 (g^2 - a b)),
      V_X = (q_x + 2 a C) / (2 g),  V_Y = (q_y + 2 b C) / (2 g).
    """
    require_stable(params, scheme)
    co = _coefficients(params, scheme)
    g = co.gamma
    a, b = co.a01, co.a10
    c = (b * co.q_x + a * co.q_y) / (4 * (g * g - a * b))
    return CovarianceState((co.q_x + 2 * a * c) / (2 * g), (co.q_y + 2 * b * c) / (2 * g), c)


def lyapunov_residual(state, params, scheme):
    a = drift_matrix(params, scheme)
    v = state.matrix()
    return a @ v + v @ a.T + diffusion_matrix(params, scheme)


def _long_time_seed(params, scheme):
    """Integrate the Riccati flow to t = SEED_TIME/gamma with a stiff solver"""
    co = _coefficients(params, scheme)
    sigma2_tot = derive(params).sigma2_tot
    t_end = _numerics('SEED_TIME') / params.gamma

    def fun(t, v):
        return _rhs(v[0], v[1], v[2], co)

    def jac(t, v):
        return _jacobian(v[0], v[1], v[2], co)

    sol = solve_ivp(
        fun, (0.0, t_end), [sigma2_tot, sigma2_tot, 0.0],
        method='Radau', jac=jac, rtol=1e-10, atol=1e-12 * sigma2_tot,
    )
    if not sol.success or not np.all(np.isfinite(sol.y[:, -1])):
        raise ConvergenceError(
            f"long-time Riccati integration failed: {sol.message}",
            last_iterate=sol.y[:, -1] if sol.y.size else None,
        )
    return CovarianceState(*(float(v) for v in sol.y[:, -1]))


def _newton(seed, params, scheme):
    co = _coefficients(params, scheme)
    tol = _numerics('RESIDUAL_TOL')
    floor = params.gamma * derive(params).sigma2
    x = np.array(seed.as_tuple(), dtype=float)

    def scaled(v):
        r = np.array(_rhs(v[0], v[1], v[2], co))
        return r, np.max(np.abs(r)) / max(_term_scale(v[0], v[1], v[2], co), floor)

    r, res = scaled(x)
    for iteration in range(_numerics('NEWTON_MAX_ITER')):
        if res <= tol:
            logger.debug(f"Newton converged after {iteration} iterations, residual {res:.3g}")
            return CovarianceState(*(float(v) for v in x))
        step = np.linalg.solve(_jacobian(x[0], x[1], x[2], co), -r)
        lam = 1.0
        norm = np.max(np.abs(r))
        for _ in range(_numerics('NEWTON_MAX_HALVINGS') + 1):
            trial = x + lam * step
            if trial[0] > 0 and trial[1] > 0:
                r_trial, res_trial = scaled(trial)
                if np.max(np.abs(r_trial)) < norm:
                    break
            lam *= 0.5
        else:
            raise ConvergenceError(
                f"Newton step rejected after {_numerics('NEWTON_MAX_HALVINGS')} halvings "
                f"(residual {res:.3g})",
                last_iterate=CovarianceState(*x), residual=res,
            )
        x, r, res = trial, r_trial, res_trial

    if res <= tol:
        return CovarianceState(*(float(v) for v in x))
    raise ConvergenceError(
        f"Newton did not converge in {_numerics('NEWTON_MAX_ITER')} iterations (residual {res:.3g})",
        last_iterate=CovarianceState(*x), residual=res,
    )


def steady_state_numeric(params, scheme, seed=None):
    """
    Stationary conditional covariance: root of riccati_rhs by damped Newton
    (step halving) seeded from long-time integration, or from `seed` when given.
    Without conditioning (eta mu = 0) the equations are linear and the
    Lyapunov solution is returned directly.
    """
    params.full_clean()
    if params.eta * params.mu == 0:
        return lyapunov_unconditional(params, scheme)

    if seed is None:
        seed = _long_time_seed(params, scheme)
    state = _newton(seed, params, scheme)
    if heisenberg_margin(state) < -_numerics('HEISENBERG_TOL'):
        raise ConvergenceError(
            f"Riccati root {state} violates the Heisenberg bound",
            last_iterate=state, residual=riccati_residual(state, params, scheme),
        )
    return state
