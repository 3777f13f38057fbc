"""
Django settings for the dmpaLab project.

The project hosts a single app, ``dmpaSim``: a simulator for a continuously
measured, detuned parametrically driven oscillator. There is no web surface;
Django provides settings, logging, the ``manage.py`` command runner and the
test runner.

All machine-specific values come from environment variables (or a ``.env``
file next to ``manage.py``) through python-decouple.
"""

from pathlib import Path
import os
from decouple import config


# ============================================================================
# Build paths inside the project like this: BASE_DIR / 'subdir'.
# ============================================================================

BASE_DIR = Path(__file__).resolve().parent.parent


# ============================================================================
# CORE
# ============================================================================
# Django refuses to start without a SECRET_KEY even when nothing is signed.

SECRET_KEY = config('SECRET_KEY', default='dmpa-lab-local-key')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []


# ============================================================================
# APPLICATION DEFINITION
# ============================================================================

INSTALLED_APPS = [
    'dmpaSim',
]

# No database: every test is a SimpleTestCase and nothing is persisted.
DATABASES = {}

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# ============================================================================
# INTERNATIONALIZATION
# ============================================================================

LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True


# ============================================================================
# SIMULATOR DEFAULTS
# ============================================================================

DMPA_VERSION = '1.0.0'

# Directory for CSV/JSON/SVG output when a command gets a bare file name
DMPA_OUTPUT_DIR = config('DMPA_OUTPUT_DIR', default=str(BASE_DIR / 'output'))

DMPA_DEFAULT_SEED = config('DMPA_DEFAULT_SEED', default=20130101, cast=int)
DMPA_N_TRAJ = config('DMPA_N_TRAJ', default=2000, cast=int)

# Process pool size for sweeps and ensembles (1 = serial)
DMPA_WORKERS = config('DMPA_WORKERS', default=1, cast=int)

# Fixed metadata timestamp; unset keeps JSON output byte-deterministic
SOURCE_DATE_EPOCH = config('SOURCE_DATE_EPOCH', default=None)

DMPA_NUMERICS = {
    # integrate_riccati
    'DIVERGENCE_FACTOR': 1e12,
    'STEP_FACTOR': 0.01,
    # steady_state_numeric
    'SEED_TIME': 20.0,            # in units of 1/gamma
    'NEWTON_MAX_ITER': 100,
    'NEWTON_MAX_HALVINGS': 20,
    'RESIDUAL_TOL': 1e-12,        # relative to the largest Riccati term
    'HEISENBERG_TOL': 1e-9,
    # trajectory
    'TRAJECTORY_STEP_FACTOR': 0.005,
    'TRAJECTORY_MAX_STEP_FACTOR': 0.01,
    'NOISE_BLOCK': 1024,
    'Z_THRESHOLD': 4.0,
    # spectra
    'PSD_WINDOW': 50.0,
    'PSD_RTOL': 1e-8,
    # experiments
    'MU_LOG_BOUNDS': (-4.0, 6.0),
    'MU_GRID_POINTS': 41,
    'MU_LOG_TOL': 1e-4,
    'BISECT_RTOL': 1e-7,
    'QND_RTOL': 1e-9,
}


# ============================================================================
# LOGGING CONFIGURATION
# ============================================================================
# Console logging by default; set DMPA_LOG_FILE to also keep a rotating file.

DMPA_LOG_LEVEL = config('DMPA_LOG_LEVEL', default='INFO')
DMPA_LOG_FILE = config('DMPA_LOG_FILE', default='')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {thread:d} {message}',
            'style': '{',
            'datefmt': '%Y-%m-%d %H:%M:%S',
        },
        'simple': {
            'format': '{levelname} {asctime} {message}',
            'style': '{',
            'datefmt': '%Y-%m-%d %H:%M:%S',
        },
    },
    'handlers': {
        'console': {
            'level': 'DEBUG',
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'django': {
            'handlers': ['console'],
            'level': 'WARNING',
            'propagate': False,
        },
        'dmpaSim': {
            'handlers': ['console'],
            'level': DMPA_LOG_LEVEL,
            'propagate': False,
        },
    },
}

if DMPA_LOG_FILE:
    os.makedirs(os.path.dirname(os.path.abspath(DMPA_LOG_FILE)), exist_ok=True)
    LOGGING['handlers']['file'] = {
        'level': 'DEBUG',
        'class': 'logging.handlers.RotatingFileHandler',
        'filename': DMPA_LOG_FILE,
        'maxBytes': 1024 * 1024 * 10,  # 10 MB
        'backupCount': 10,
        'formatter': 'verbose',
    }
    LOGGING['loggers']['dmpaSim']['handlers'].append('file')
