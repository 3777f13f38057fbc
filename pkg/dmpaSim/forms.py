# dmpaSim/forms.py
#
# Input validation for the command line: flags and parameter files become
# bound forms, and a valid form yields the immutable parameter objects.

import logging
from pathlib import Path

from decouple import RepositoryEnv
from django import forms
from django.core.exceptions import ValidationError

from .params import LabFrameParams, RotatingFrameParams, Scheme, from_lab_frame

logger = logging.getLogger(__name__)

# Parameter-file keys (lower case) and the form field each one feeds
PARAM_FILE_KEYS = {
    'gamma': 'gamma',
    'chi': 'chi',
    'delta': 'delta',
    'mu': 'mu',
    'eta': 'eta',
    'n': 'N',
    'n_bad': 'n_bad',
    'scheme': 'scheme',
    'detuning_sign': 'detuning_sign',
    'quality_q': 'quality_Q',
    'omega_m': 'omega_m',
    'k0': 'k0',
    'kr': 'kr',
}


def load_param_file(path):
    """
    Read a flat key=value parameter file (decouple's .env syntax: comments
    with '#', optional quotes). Keys are case-insensitive; an unknown key is
    a ValidationError.
    """
    path = Path(path)
    if not path.is_file():
        raise ValidationError({'config': [f'parameter file not found: {path}']})

    repository = RepositoryEnv(str(path))
    values = {}
    unknown = []
    for key, value in repository.data.items():
        name = PARAM_FILE_KEYS.get(key.strip().lower())
        if name is None:
            unknown.append(key)
            continue
        value = value.strip()
        values[name] = value.lower() if name == 'scheme' else value
    if unknown:
        raise ValidationError({'config': [f"unknown key(s) in {path.name}: {', '.join(sorted(unknown))}"]})

    logger.debug(f"loaded {len(values)} parameters from {path}")
    return values


def form_errors(form):
    """Plain {field: [messages]} dict of a bound form's errors"""
    return {field: [str(m) for m in messages] for field, messages in form.errors.items()}


def merge_inputs(file_values, flag_values):
    """Flags given on the command line override file values"""
    merged = dict(file_values)
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    return merged


# ============================================
# ROTATING FRAME
# ============================================

class RotatingFrameForm(forms.Form):
    """Rotating-frame rates and the measurement scheme"""

    SCHEME_CHOICES = [('dmpa', 'Detuned parametric amplification'), ('bae', 'Backaction evasion')]

    gamma = forms.FloatField(required=False, initial=1.0)
    chi = forms.FloatField(required=False, min_value=0.0)
    delta = forms.FloatField(required=False)
    mu = forms.FloatField(required=False, min_value=0.0)
    eta = forms.FloatField(required=False, min_value=0.0, max_value=1.0)
    N = forms.FloatField(required=False, min_value=0.0)
    n_bad = forms.FloatField(required=False, min_value=0.0)
    quality_Q = forms.FloatField(required=False)
    scheme = forms.ChoiceField(choices=SCHEME_CHOICES, required=False)
    detuning_sign = forms.TypedChoiceField(choices=[('-1', '-1'), ('1', '+1'), ('+1', '+1')],
                                           coerce=int, required=False, empty_value=None)
    absolute = forms.BooleanField(required=False)

    def clean(self):
        cleaned = super().clean()
        if self.errors:
            return cleaned

        gamma = cleaned.get('gamma')
        if cleaned.get('absolute'):
            if gamma is None:
                self.add_error('gamma', 'gamma is required with --absolute')
                return cleaned
        elif gamma not in (None, 1.0):
            self.add_error('gamma', 'rates are in units of gamma; pass --absolute to give gamma explicitly')
            return cleaned

        params = self._build(cleaned)
        for field, messages in params.bound_errors().items():
            for message in messages:
                self.add_error(field if field in self.fields else None, message)
        cleaned['params'] = params
        cleaned['scheme_obj'] = self._scheme(cleaned)
        return cleaned

    @staticmethod
    def _build(cleaned):
        def value(name, default):
            v = cleaned.get(name)
            return default if v is None else v

        return RotatingFrameParams(
            gamma=value('gamma', 1.0),
            chi=value('chi', 0.0),
            delta=value('delta', 0.0),
            mu=value('mu', 0.0),
            eta=value('eta', 1.0),
            N=value('N', 0.0),
            n_bad=value('n_bad', 0.0),
            quality_Q=cleaned.get('quality_Q'),
        )

    @staticmethod
    def _scheme(cleaned):
        if (cleaned.get('scheme') or 'dmpa') == 'bae':
            return Scheme.bae()
        # An explicit delta is taken as given; otherwise it is pinned to sign * chi
        if cleaned.get('delta') is not None:
            return Scheme.dmpa(free_detuning=True)
        return Scheme.dmpa(detuning_sign=cleaned.get('detuning_sign') or -1)

    def get_params(self):
        """(RotatingFrameParams, Scheme) with the scheme's detuning applied, rates in units of gamma"""
        if not self.is_valid():
            raise ValidationError(form_errors(self))
        scheme = self.cleaned_data['scheme_obj']
        return scheme.apply(self.cleaned_data['params']).normalized(), scheme


# ============================================
# LAB FRAME
# ============================================

class LabFrameForm(forms.Form):
    """Lab-frame oscillator converted to rotating-frame rates"""

    omega_m = forms.FloatField()
    quality_Q = forms.FloatField()
    k0 = forms.FloatField()
    kr = forms.FloatField(required=False, initial=0.0)
    delta = forms.FloatField(required=False, initial=0.0)
    mu = forms.FloatField(required=False, min_value=0.0)
    eta = forms.FloatField(required=False, min_value=0.0, max_value=1.0)
    N = forms.FloatField(required=False, min_value=0.0)
    n_bad = forms.FloatField(required=False, min_value=0.0)

    def clean(self):
        cleaned = super().clean()
        if self.errors:
            return cleaned
        lab = LabFrameParams(
            omega_m=cleaned['omega_m'],
            quality_Q=cleaned['quality_Q'],
            k0=cleaned['k0'],
            kr=cleaned.get('kr') or 0.0,
            delta=cleaned.get('delta') or 0.0,
        )
        for field, messages in lab.bound_errors().items():
            for message in messages:
                self.add_error(field, message)
        cleaned['lab'] = lab
        return cleaned

    def get_params(self):
        if not self.is_valid():
            raise ValidationError(form_errors(self))
        data = self.cleaned_data
        params = from_lab_frame(
            data['lab'],
            mu=data.get('mu') or 0.0,
            eta=1.0 if data.get('eta') is None else data['eta'],
            N=data.get('N') or 0.0,
            n_bad=data.get('n_bad') or 0.0,
        )
        return params.normalized(), Scheme.dmpa(free_detuning=True)


def is_lab_frame(values):
    return any(values.get(k) is not None for k in ('omega_m', 'k0', 'kr'))
