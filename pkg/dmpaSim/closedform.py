# dmpaSim/closedform.py - analytic steady-state results
#
# Everything here is evaluated in units of gamma (chi' = chi/gamma,
# mu' = mu/gamma). The DMPA formulas hold at |delta| = chi for either sign;
# the two signs are related by exchanging X and Y, so results are reported for
# the quadrature the drive leaves untouched.

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from scipy.optimize import brentq

from .dynamics import CovarianceState, lyapunov_unconditional
from .exceptions import InvalidStateError, UnsupportedConfigurationError
from .params import V_G, Scheme, derive, qnd_quadrature

logger = logging.getLogger(__name__)


def require_qnd(params, scheme=None):
    if scheme is not None and not scheme.is_dmpa:
        raise UnsupportedConfigurationError(
            f"{scheme}: effective-measurement formulas exist only for the DMPA scheme"
        )
    if not Scheme.dmpa(free_detuning=True).is_qnd(params, settings.DMPA_NUMERICS['QND_RTOL']):
        raise UnsupportedConfigurationError(
            f"|delta| = {abs(params.delta):.6g} differs from chi = {params.chi:.6g}; "
            f"closed forms need the QND condition |delta| = chi"
        )


# ============================================
# ENHANCEMENT AND FILTER WIDTH
# ============================================

def _root(chi_prime, snr):
    """R = sqrt((1 + 4 SNR)^2 + 16 chi'^2 SNR)"""
    return np.sqrt((1 + 4 * snr) ** 2 + 16 * chi_prime ** 2 * snr)


def enhancement_ratio(chi_prime, snr):
    """
    mu_eff/mu = 2(1 + chi'^2) / (1 + R - 4 SNR), with R - 4 SNR rewritten as
    (1 + 8 SNR + 16 chi'^2 SNR)/(R + 4 SNR) so large SNR does not cancel.
    Accepts scalars or numpy arrays.
    """
    chi_prime = np.asarray(chi_prime, dtype=float)
    snr = np.asarray(snr, dtype=float)
    r = _root(chi_prime, snr)
    denominator = 1 + (1 + 8 * snr + 16 * chi_prime ** 2 * snr) / (r + 4 * snr)
    ratio = 2 * (1 + chi_prime ** 2) / denominator
    return float(ratio) if ratio.ndim == 0 else ratio


def _filter_width_sq_minus_one(chi_prime, snr):
    """(Gamma/gamma)^2 - 1 = (4 SNR + R - 1)/2 without cancellation at small SNR"""
    r = _root(chi_prime, snr)
    r_minus_one = (8 * snr + 16 * snr ** 2 + 16 * chi_prime ** 2 * snr) / (r + 1)
    return 0.5 * (4 * snr + r_minus_one)


def filter_width_ratio(chi_prime, snr):
    """Gamma/gamma = sqrt((1 + 4 SNR + R)/2)"""
    return np.sqrt(1 + _filter_width_sq_minus_one(chi_prime, snr))


def _filter_width_minus_one(chi_prime, snr):
    x = _filter_width_sq_minus_one(chi_prime, snr)
    return x / (np.sqrt(1 + x) + 1)


@dataclass(frozen=True)
class EffectiveMeasurement:
    g: float
    mu_eff_ratio: float
    n_bad_eff: float
    alpha: float
    gamma_filter: float


def effective_measurement(params, scheme=None):
    """
    QND-equivalent description of DMPA at |delta| = chi.

    g = C/V_q is taken from the filter identity g = chi'/(Gamma/gamma), which
    equals sqrt(mu_eff/mu - 1) without the cancellation of that form at large SNR.
    """
    require_qnd(params, scheme)
    d = derive(params)
    ratio = enhancement_ratio(d.chi_prime, d.snr)
    width = float(filter_width_ratio(d.chi_prime, d.snr))
    g = d.chi_prime / width
    return EffectiveMeasurement(
        g=g,
        mu_eff_ratio=ratio,
        n_bad_eff=d.n_ba,
        alpha=0.5 * math.atan2(1.0, g),
        gamma_filter=params.gamma * width,
    )


def intermediate_enhancement(params):
    """mu_eff/mu ~ chi'/(2 sqrt(SNR)) between the weak and strong regimes"""
    d = derive(params)
    if d.snr == 0:
        return math.inf
    return d.chi_prime / (2 * math.sqrt(d.snr))


def measurement_regime(chi_prime, snr):
    """'weak' below SNR ~ 1/chi'^2, 'strong' above SNR ~ chi'^2"""
    boundary = 1 + chi_prime ** 2
    if snr * boundary < 1:
        return 'weak'
    if snr > boundary:
        return 'strong'
    return 'intermediate'


# ============================================
# EXACT DMPA STEADY STATE
# ============================================

def dmpa_closed_form(params):
    """
    Exact stationary conditional covariance at |delta| = chi.

    With Gamma from filter_width_ratio, the conditioned variance sum is
    T = (Gamma/gamma - 1)/(2 eta mu'), the QND quadrature has
    V_q = T / (2 (1 + chi^2/Gamma^2)), the other T - V_q, and C = chi V_q/Gamma.
    """
    require_qnd(params)
    if params.eta * params.mu == 0:
        return lyapunov_unconditional(params, Scheme.dmpa(free_detuning=True))

    d = derive(params)
    width = float(filter_width_ratio(d.chi_prime, d.snr))
    total = float(_filter_width_minus_one(d.chi_prime, d.snr)) / (2 * params.eta * d.mu_prime)
    u = 1 + (d.chi_prime / width) ** 2
    v_q = total / (2 * u)
    state = CovarianceState(v_q, total - v_q, d.chi_prime * v_q / width)
    return state.swapped() if qnd_quadrature(params) == 1 else state


# ============================================
# STRONG-DRIVE ASYMPTOTICS
# ============================================

@dataclass(frozen=True)
class StrongDriveAsymptotics:
    v_x_approx: float
    v_y_approx: float
    c_approx: float
    mu_opt_inf: float
    v_x_at_mu_opt: float
    v_x_intermediate: float
    v_x_reduced: float
    enhancement_intermediate: float
    regime: str
    valid: bool


def _div(a, b):
    return a / b if b != 0 else math.inf


def reduced_squeezing(params):
    """
    Root of the strong-drive reduced equation (units of gamma)
      0 = -2 V + 2 sigma_tot^2 - 4 eta mu' V^2 - (4 chi'^2 eta mu')^(1/3) V^(4/3)
    which keeps every term the simple power-law solution drops.
    """
    d = derive(params)
    k = 4 * params.eta * d.mu_prime
    cross = (4 * d.chi_prime ** 2 * params.eta * d.mu_prime) ** (1 / 3)

    def f(v):
        return -2 * v + 2 * d.sigma2_tot - k * v * v - cross * v ** (4 / 3)

    return brentq(f, 0.0, d.sigma2_tot, xtol=1e-15 * d.sigma2_tot, rtol=1e-13)


def strong_drive_asymptotics(params):
    """
    Closed-form approximations for chi' >> 1. Always computed; `valid` marks
    chi' > 10 with 10/chi'^2 <= SNR <= chi'^2/10.
    """
    d = derive(params)
    eta_mu = params.eta * d.mu_prime
    noise = 2 * params.N + 2 * d.n_ba + 1

    v_x = _div(noise ** 3, 4 * d.chi_prime ** 2 * eta_mu) ** 0.25
    if math.isfinite(v_x):
        v_y = _div(d.chi_prime, eta_mu) ** (2 / 3) * (v_x / 2) ** (1 / 3)
        c = _div(d.chi_prime * v_x, 2 * eta_mu * v_y)
    else:
        v_y = c = math.inf

    v_x_at_mu_opt = _div(3 ** 0.75, 2 * params.eta ** 0.25) * math.sqrt(_div(2 * params.N + 1, d.chi_prime))
    v_x_intermediate = _div(d.snr ** 0.75, math.sqrt(2 * d.chi_prime) * eta_mu)

    regime = measurement_regime(d.chi_prime, d.snr)
    valid = d.chi_prime > 10 and 10 / d.chi_prime ** 2 <= d.snr <= d.chi_prime ** 2 / 10
    if not valid:
        logger.debug(f"strong-drive asymptotics outside validity: chi'={d.chi_prime:.4g}, SNR={d.snr:.4g}")

    return StrongDriveAsymptotics(
        v_x_approx=v_x,
        v_y_approx=v_y,
        c_approx=c,
        mu_opt_inf=params.gamma * (params.N + 0.5),
        v_x_at_mu_opt=v_x_at_mu_opt,
        v_x_intermediate=v_x_intermediate,
        v_x_reduced=reduced_squeezing(params),
        enhancement_intermediate=intermediate_enhancement(params),
        regime=regime,
        valid=valid,
    )


# ============================================
# BACKACTION EVASION
# ============================================

def bae_closed_form(params):
    """
    V_X = (sqrt(1 + 8 eta mu' (N + N_bad + 1/2)) - 1)/(4 eta mu'), written as
    2 s/(1 + sqrt(1 + 8 eta mu' s)) so mu -> 0 gives s = N + 1/2 + N_bad;
    V_Y = N + 1/2 + N_BA; C = 0.
    """
    d = derive(params)
    s = params.N + params.n_bad + 0.5
    v_x = 2 * s / (1 + math.sqrt(1 + 8 * params.eta * d.mu_prime * s))
    return CovarianceState(v_x, d.sigma2_tot, 0.0)


def bae_strong_limit(params):
    """Quoted strong-measurement comparison value eta^(-1/2) sqrt((2N + 1)/mu')"""
    d = derive(params)
    return _div(1.0, math.sqrt(params.eta)) * math.sqrt(_div(2 * params.N + 1, d.mu_prime))


# ============================================
# PURITY
# ============================================

def purity(state):
    """P = V_g^2 / (V_X V_Y - C^2)"""
    det = state.determinant
    if det <= 0:
        raise InvalidStateError(f"covariance determinant {det:.6g} is not positive")
    return V_G ** 2 / det


@dataclass(frozen=True)
class PurityResult:
    p: float | None
    p_lower_bound: float
    diverged: bool = False


def purity_closed(params, scheme):
    """
    BAE:  P = eta/(1 + (2N+1)/mu') * 2/(sqrt(1 + 4 eta mu'(2N + 2 N_bad + 1)) - 1)
    DMPA: P = eta/(1 + (2N+1)/mu') * (1 + 2/(chi'/g - 1)),  chi'/g = Gamma/gamma
    Lower bound eta/(1 + (2N+1)/mu') for both. At mu = 0 (or eta = 0) the
    formulas degenerate to 0 * inf; only the bound is returned.
    """
    d = derive(params)
    if d.mu_prime == 0:
        return PurityResult(p=None, p_lower_bound=0.0, diverged=True)
    bound = params.eta / (1 + (2 * params.N + 1) / d.mu_prime)
    if params.eta == 0:
        return PurityResult(p=None, p_lower_bound=bound, diverged=True)

    if scheme.is_dmpa:
        require_qnd(params, scheme)
        p = bound * (1 + 2 / float(_filter_width_minus_one(d.chi_prime, d.snr)))
    else:
        y = 4 * params.eta * d.mu_prime * (2 * params.N + 2 * params.n_bad + 1)
        # 2/(sqrt(1+y) - 1) = 2 (sqrt(1+y) + 1)/y
        p = bound * 2 * (math.sqrt(1 + y) + 1) / y
    return PurityResult(p=p, p_lower_bound=bound)
