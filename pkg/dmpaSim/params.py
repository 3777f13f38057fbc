# dmpaSim/params.py - parameter types shared by every simulator module
#
# Rates are stored as given (absolute, in 1/time). Every closed-form result
# depends only on the ratios chi/gamma and mu/gamma; the input forms call
# normalized() once, so everything behind the command line runs with gamma = 1.

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, replace

from django.core.exceptions import ValidationError

logger = logging.getLogger(__name__)

# Ground-state quadrature variance
V_G = 0.5

# Lab-frame warning threshold for the RWA requirement k0 >> kr
RWA_KR_FRACTION = 0.1
# Rotating-frame warning threshold for chi' << Q
RWA_CHI_FRACTION = 0.01
# Max drift eigenvalue real part (in units of gamma) counted as "near threshold"
NEAR_THRESHOLD = -0.1


def _collect(errors, name, ok, message):
    if not ok:
        errors.setdefault(name, []).append(message)


# ============================================
# LAB FRAME
# ============================================

@dataclass(frozen=True)
class LabFrameParams:
    """Oscillator with a modulated spring constant k0 + kr cos(2 omega_d t)"""

    omega_m: float
    quality_Q: float
    k0: float
    kr: float = 0.0
    delta: float = 0.0

    def bound_errors(self):
        errors = {}
        _collect(errors, 'omega_m', self.omega_m > 0, 'omega_m must be > 0')
        _collect(errors, 'quality_Q', self.quality_Q > 0, 'quality_Q must be > 0')
        _collect(errors, 'k0', self.k0 > 0, 'k0 must be > 0')
        _collect(errors, 'kr', self.kr >= 0, 'kr must be >= 0')
        _collect(errors, 'kr', self.kr < self.k0, 'kr must be < k0')
        return errors

    def full_clean(self):
        errors = self.bound_errors()
        if errors:
            raise ValidationError(errors)


# ============================================
# ROTATING FRAME
# ============================================

@dataclass(frozen=True)
class RotatingFrameParams:
    """
    All model rates in the frame rotating at the drive reference frequency.

    gamma   amplitude damping rate
    chi     parametric rate
    delta   detuning of the reference from mechanical resonance
    mu      measurement rate
    eta     detection efficiency (0..1)
    N       bath phonon occupation
    n_bad   spurious backaction on the measured quadrature (BAE only)
    quality_Q  mechanical Q when known (only used for the RWA warning)
    """

    gamma: float
    chi: float = 0.0
    delta: float = 0.0
    mu: float = 0.0
    eta: float = 1.0
    N: float = 0.0
    n_bad: float = 0.0
    quality_Q: float | None = None

    def bound_errors(self):
        errors = {}
        _collect(errors, 'gamma', self.gamma > 0, 'gamma must be > 0')
        _collect(errors, 'chi', self.chi >= 0, 'chi must be >= 0')
        _collect(errors, 'mu', self.mu >= 0, 'mu must be >= 0')
        _collect(errors, 'eta', 0 <= self.eta <= 1, 'eta must lie in [0, 1]')
        _collect(errors, 'N', self.N >= 0, 'N must be >= 0')
        _collect(errors, 'n_bad', self.n_bad >= 0, 'n_bad must be >= 0')
        if self.gamma > 0 and self.mu >= 0:
            n_ba = self.mu / (2 * self.gamma)
            _collect(errors, 'n_bad', self.n_bad <= n_ba * (1 + 1e-12),
                     f'n_bad must be <= N_BA = mu/(2 gamma) = {n_ba:.6g}')
        if self.quality_Q is not None:
            _collect(errors, 'quality_Q', self.quality_Q > 0, 'quality_Q must be > 0')
        return errors

    def full_clean(self):
        errors = self.bound_errors()
        if errors:
            raise ValidationError(errors)

    def replace(self, **changes):
        return replace(self, **changes)

    def normalized(self):
        """Same physics with time measured in units of 1/gamma"""
        g = self.gamma
        return replace(
            self,
            gamma=1.0,
            chi=self.chi / g,
            delta=self.delta / g,
            mu=self.mu / g,
        )

    @property
    def derived(self):
        return derive(self)


@dataclass(frozen=True)
class DerivedParams:
    chi_prime: float
    mu_prime: float
    n_ba: float
    snr: float
    sigma2: float
    sigma2_tot: float
    v_g: float = V_G


def derive(params):
    """chi', N_BA, SNR and the thermal variances of a parameter set"""
    n_ba = params.mu / (2 * params.gamma)
    return DerivedParams(
        chi_prime=params.chi / params.gamma,
        mu_prime=params.mu / params.gamma,
        n_ba=n_ba,
        snr=params.eta * params.mu * (2 * params.N + 2 * n_ba + 1) / params.gamma,
        sigma2=params.N + 0.5,
        sigma2_tot=params.N + 0.5 + n_ba,
    )


# ============================================
# MEASUREMENT SCHEME
# ============================================

class SchemeKind(str, enum.Enum):
    DMPA = 'dmpa'
    BAE = 'bae'


@dataclass(frozen=True)
class Scheme:
    """
    DMPA: continuous position measurement of both quadratures plus a detuned
    parametric drive; by default the detuning is pinned to detuning_sign * chi
    (the QND condition). free_detuning keeps whatever delta the params carry.

    BAE: single-quadrature (X) measurement with spurious backaction n_bad.
    """

    kind: SchemeKind = SchemeKind.DMPA
    detuning_sign: int = -1
    free_detuning: bool = False

    def __post_init__(self):
        if self.detuning_sign not in (-1, 1):
            raise ValidationError({'detuning_sign': ['detuning_sign must be -1 or +1']})

    @classmethod
    def dmpa(cls, detuning_sign=-1, free_detuning=False):
        return cls(SchemeKind.DMPA, detuning_sign, free_detuning)

    @classmethod
    def bae(cls):
        return cls(SchemeKind.BAE)

    @property
    def is_dmpa(self):
        return self.kind == SchemeKind.DMPA

    def apply(self, params):
        """Params with the detuning this scheme prescribes"""
        if self.is_dmpa and not self.free_detuning:
            return params.replace(delta=self.detuning_sign * params.chi)
        return params

    def is_qnd(self, params, rtol=1e-9):
        """|delta| = chi, within rtol of the larger rate"""
        if not self.is_dmpa:
            return True
        scale = max(abs(params.chi), abs(params.delta), params.gamma)
        return abs(abs(params.delta) - params.chi) <= rtol * scale

    def __str__(self):
        if not self.is_dmpa:
            return 'bae'
        if self.free_detuning:
            return 'dmpa(free delta)'
        return 'dmpa(delta=+chi)' if self.detuning_sign > 0 else 'dmpa(delta=-chi)'


def qnd_quadrature(params):
    """
    Index of the quadrature left untouched by the drive: X (0) at delta = -chi,
    Y (1) at delta = +chi. The two cases map onto each other by swapping X and Y.
    """
    return 1 if params.delta > 0 else 0


# ============================================
# CONVERSION & VALIDATION
# ============================================

def from_lab_frame(lab, mu=0.0, eta=1.0, N=0.0, n_bad=0.0):
    """Rotating-frame rates of a lab-frame oscillator (RWA)"""
    lab.full_clean()
    if lab.kr > RWA_KR_FRACTION * lab.k0:
        logger.warning(
            f"kr/k0 = {lab.kr / lab.k0:.3g} exceeds {RWA_KR_FRACTION}; "
            f"rotating wave approximation needs k0 >> kr"
        )
    params = RotatingFrameParams(
        gamma=lab.omega_m / lab.quality_Q,
        chi=lab.omega_m * lab.kr / (2 * lab.k0),
        delta=lab.delta,
        mu=mu,
        eta=eta,
        N=N,
        n_bad=n_bad,
        quality_Q=lab.quality_Q,
    )
    params.full_clean()
    return params


@dataclass
class ValidationReport:
    errors: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    eigenvalues: tuple = ()
    max_real_part: float = math.nan
    stable: bool = False

    @property
    def ok(self):
        return not self.errors and self.stable

    def summary(self):
        if self.errors:
            problems = '; '.join(f"{k}: {', '.join(v)}" for k, v in sorted(self.errors.items()))
            return f"invalid parameters ({problems})"
        eig = ', '.join(f"{z.real:.6g}{z.imag:+.6g}j" for z in self.eigenvalues)
        if not self.stable:
            return (f"unstable drift: max Re(eigenvalue) = {self.max_real_part:.6g} > 0 "
                    f"(positive drift eigenvalue; eigenvalues {eig})")
        return f"stable drift: max Re(eigenvalue) = {self.max_real_part:.6g} (eigenvalues {eig})"


def validate(params, scheme):
    """
    Report-valued check: hard bound errors, stability of the unconditional
    drift (max Re eigenvalue < 0, i.e. Re sqrt(chi^2 - delta^2) < gamma for
    DMPA) and soft warnings. Never raises.
    """
    from .dynamics import drift_eigenvalues

    report = ValidationReport(errors=params.bound_errors())
    if report.errors:
        return report

    eig = drift_eigenvalues(params, scheme)
    report.eigenvalues = tuple(complex(z) for z in eig)
    report.max_real_part = max(z.real for z in report.eigenvalues)
    report.stable = report.max_real_part < 0

    chi_prime = params.chi / params.gamma
    if params.quality_Q is not None and chi_prime > RWA_CHI_FRACTION * params.quality_Q:
        report.warnings.append(
            f"chi' = {chi_prime:.4g} > {RWA_CHI_FRACTION} Q = {RWA_CHI_FRACTION * params.quality_Q:.4g}: "
            f"rotating wave approximation at risk"
        )
    if report.stable and report.max_real_part > NEAR_THRESHOLD * params.gamma:
        report.warnings.append(
            f"max Re(eigenvalue)/gamma = {report.max_real_part / params.gamma:.4g}: "
            f"close to the parametric instability threshold"
        )
    if scheme.is_dmpa and not scheme.is_qnd(params):
        report.warnings.append(
            f"|delta| = {abs(params.delta):.6g} != chi = {params.chi:.6g}: "
            f"QND closed forms do not apply"
        )

    for message in report.warnings:
        logger.warning(message)
    return report
