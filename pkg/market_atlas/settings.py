"""
Django settings for the market_atlas project.
Runs the market-maps pipeline from management commands; no web server, no database.
"""

import os
from decouple import config
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# ============ SECURITY SETTINGS ============

# Nothing is served, but Django refuses to start without a key.
SECRET_KEY = config('SECRET_KEY', default='market-atlas-local-only')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []

# ============ APPLICATION DEFINITION ============

THIRD_PARTY_APPS = [
    'rest_framework',
]

LOCAL_APPS = [
    'market_maps',
]

INSTALLED_APPS = THIRD_PARTY_APPS + LOCAL_APPS

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [],
        },
    },
]

# ============ DATABASE ============

# Results are written as files under --out; Django falls back to its dummy backend.
DATABASES = {}

# ============ INTERNATIONALIZATION ============

LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

# ============ PIPELINE DEFAULTS ============

# Every command-line flag falls back to these values (see market_maps/serializers.py).
MARKET_MAPS = {
    # dataset
    'SCALE': 20,
    'SEGMENTS': 25,
    'EPSILON': 1e-10,
    'REPRESENTATION': 'raw',

    # backtest
    'INITIAL_CASH': 2000.0,
    'THRESHOLD': 0.07,
    'COUNTER_GAP': 7,

    # pca
    'K': 3,

    # elastic map
    'ROWS': 10,
    'COLS': 10,
    'LAMBDA': 0.05,
    'MU': 0.5,
    'MULTIPLIERS': [16.0, 4.0, 1.0],
    'MAX_ITER': 100,
    'TOL': 1e-6,
    'MARGIN': 0.05,

    # synthetic market
    'SYMBOLS': 10,
    'DAYS': 502,
    'REGIME_START': None,
    'VOL': 0.02,
    'COMMON_WEIGHT': 0.5,
    'SEED': 42,

    # render
    'WIDTH': 800,
    'HEIGHT': 600,
}

# ============ LOGGING ============

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {thread:d} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose' if DEBUG else 'simple',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
    'loggers': {
        'django': {
            'handlers': ['console'],
            'level': os.getenv('DJANGO_LOG_LEVEL', 'WARNING'),
            'propagate': False,
        },
        'market_maps': {
            'handlers': ['console'],
            'level': config('MARKET_MAPS_LOG_LEVEL', default='INFO'),
            'propagate': False,
        },
    },
}
