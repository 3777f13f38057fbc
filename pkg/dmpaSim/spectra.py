# dmpaSim/spectra.py - unconditional power spectral densities
#
# Two-sided PSDs normalised so that the integral over dw/2pi is the
# symmetrised quadrature (co)variance. With the drift A and white input
# noise Q (thermal plus measurement backaction, no conditioning):
#   S(w) = G(w) Q G(w)^dagger,   G(w) = (-i w I - A)^-1.
# At delta = -chi this reduces to
#   s_xx = S_in/(g^2 + w^2),  s_yy = s_xx (1 + 4 chi^2/(g^2 + w^2)),
#   s_xy = 2 chi g S_in/(g^2 + w^2)^2,   S_in = 2 g sigma_tot^2.

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from scipy.integrate import quad

from .dynamics import CovarianceState, diffusion_matrix, drift_eigenvalues, drift_matrix, require_stable

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpectrumResult:
    omega_grid: np.ndarray
    s_xx: np.ndarray
    s_yy: np.ndarray
    s_xy: np.ndarray


def _spectral_matrix(params, scheme, omega):
    a = drift_matrix(params, scheme)
    q = np.diag(diffusion_matrix(params, scheme))
    omega = np.asarray(omega, dtype=float)
    diag = -a[0, 0] - 1j * omega                 # gamma - i w
    det = diag * diag - a[0, 1] * a[1, 0]
    g00 = diag / det
    g01 = a[0, 1] / det
    g10 = a[1, 0] / det
    g11 = diag / det
    s_xx = q[0] * np.abs(g00) ** 2 + q[1] * np.abs(g01) ** 2
    s_yy = q[0] * np.abs(g10) ** 2 + q[1] * np.abs(g11) ** 2
    s_xy = np.real(q[0] * g00 * np.conj(g10) + q[1] * g01 * np.conj(g11))
    return s_xx, s_yy, s_xy


def unconditional_psd(params, scheme, omega_grid):
    """PSDs of X, Y and their symmetrised cross-spectrum on `omega_grid`"""
    require_stable(params, scheme)
    omega_grid = np.asarray(omega_grid, dtype=float)
    s_xx, s_yy, s_xy = _spectral_matrix(params, scheme, omega_grid)
    return SpectrumResult(omega_grid, s_xx, s_yy, s_xy)


def psd_ratio(params, scheme, omega):
    """s_yy/s_xx; tends to 1 + 4 chi'^2 at w -> 0 and 1 at |w| >> gamma for delta = -chi"""
    s_xx, s_yy, _ = _spectral_matrix(params, scheme, omega)
    return s_yy / s_xx


def default_omega_grid(params, n=801):
    """Symmetric grid over |w| <= PSD_WINDOW gamma (1 + chi')"""
    half = settings.DMPA_NUMERICS['PSD_WINDOW'] * (params.gamma + params.chi + abs(params.delta))
    return np.linspace(-half, half, n)


def integrate_psd(params, scheme):
    """
    Integral of each spectrum over dw/2pi. The window |w| <= L is integrated
    with the drift resonances as break points and both infinite tails are
    added, so no Lorentzian weight is lost.
    """
    require_stable(params, scheme)
    rtol = settings.DMPA_NUMERICS['PSD_RTOL']
    window = settings.DMPA_NUMERICS['PSD_WINDOW'] * (params.gamma + params.chi + abs(params.delta))
    peaks = {0.0}
    for z in drift_eigenvalues(params, scheme):
        if abs(z.imag) < window:
            peaks.update((z.imag, -z.imag))
    points = sorted(peaks)

    def integral(index):
        def f(w):
            return _spectral_matrix(params, scheme, w)[index]

        core, _ = quad(f, -window, window, points=points, epsrel=rtol, limit=400)
        upper, _ = quad(f, window, math.inf, epsrel=rtol, limit=200)
        lower, _ = quad(f, -math.inf, -window, epsrel=rtol, limit=200)
        return (core + upper + lower) / (2 * math.pi)

    result = CovarianceState(integral(0), integral(1), integral(2))
    logger.debug(f"integrated PSD: {result}")
    return result
