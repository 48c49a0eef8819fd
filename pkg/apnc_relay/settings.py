"""
APNC Relay Simulator - Django Settings

Configuration for the asynchronous physical-layer network coding simulator:
pulse and grid parameters, estimator search, decoder truncation, the LDPC
code used for XOR-CD decoding and the Monte Carlo harness.
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Build paths inside the project
BASE_DIR = Path(__file__).resolve().parent.parent

# Security Configuration
SECRET_KEY = os.getenv('SECRET_KEY', 'django-insecure-change-this-in-production')
DEBUG = os.getenv('DEBUG', 'False').lower() == 'true'
ALLOWED_HOSTS = os.getenv('ALLOWED_HOSTS', 'localhost,127.0.0.1').split(',')

# Application definition
INSTALLED_APPS = [
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',

    # Third party apps
    'rest_framework',

    # Local apps
    'phy',
    'experiments',
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'apnc_relay.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.debug',
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

WSGI_APPLICATION = 'apnc_relay.wsgi.application'


# Database Configuration - results store
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': os.getenv('DB_PATH', str(BASE_DIR / 'db.sqlite3')),
    }
}

# Admin URL Configuration
ADMIN_URL = os.getenv('ADMIN_URL', 'admin/')

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = True
USE_TZ = True

STATIC_URL = '/static/'
STATIC_ROOT = os.path.join(BASE_DIR, 'staticfiles')

# Default primary key field type
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Django REST Framework Configuration (read-only results API)
REST_FRAMEWORK = {
    'DEFAULT_PERMISSION_CLASSES': [
        'rest_framework.permissions.AllowAny',
    ],
    'DEFAULT_RENDERER_CLASSES': [
        'rest_framework.renderers.JSONRenderer',
    ],
    'DEFAULT_PAGINATION_CLASS': 'rest_framework.pagination.PageNumberPagination',
    'PAGE_SIZE': 20,
}

# Simulation Configuration
SIMULATION_CONFIG = {
    # Pulse shaping and dense-grid resolution
    'PULSE': {
        'SYMBOL_DURATION': float(os.getenv('SYMBOL_DURATION', '1.0')),
        'OVERSAMPLING': int(os.getenv('OVERSAMPLING', '16')),
        'SPAN': int(os.getenv('PULSE_SPAN', '16')),
        'SINC_HALF_WIDTH': int(os.getenv('SINC_HALF_WIDTH', '32')),
        'FRONT_END_SPAN': int(os.getenv('FRONT_END_SPAN', '64')),
    },

    # ML misalignment search (in units of T)
    'ESTIMATOR': {
        'GRID_STEP': float(os.getenv('ESTIMATOR_GRID_STEP', '0.005')),
        'REFINE_TOL': float(os.getenv('ESTIMATOR_REFINE_TOL', '1e-4')),
    },

    # PNC decoder
    'DECODER': {
        'GUARD_SYMBOLS': int(os.getenv('GUARD_SYMBOLS', '16')),
        'LLR_CLAMP': float(os.getenv('LLR_CLAMP', '27.6')),
    },

    # XOR-CD channel code
    'LDPC': {
        'N': int(os.getenv('LDPC_N', '1024')),
        'K': int(os.getenv('LDPC_K', '512')),
        'COLUMN_WEIGHT': int(os.getenv('LDPC_COLUMN_WEIGHT', '3')),
        'ROW_WEIGHT': int(os.getenv('LDPC_ROW_WEIGHT', '6')),
        'CONSTRUCTION_SEED': int(os.getenv('LDPC_CONSTRUCTION_SEED', '20170911')),
        'MAX_ITERS': int(os.getenv('LDPC_MAX_ITERS', '50')),
    },

    # Monte Carlo harness
    'HARNESS': {
        'MAX_ERRORS': int(os.getenv('HARNESS_MAX_ERRORS', '100')),
        'BATCH_SIZE': int(os.getenv('HARNESS_BATCH_SIZE', '50')),
        'WORKERS': int(os.getenv('HARNESS_WORKERS', '1')),
        'OUTPUT_DIR': os.getenv('HARNESS_OUTPUT_DIR', str(BASE_DIR / 'results')),
        'PDF_BINS': int(os.getenv('HARNESS_PDF_BINS', '100')),
        'PDF_RANGE': float(os.getenv('HARNESS_PDF_RANGE', '0.01')),
        'GOOD_ESTIMATE_THRESHOLD': float(os.getenv('GOOD_ESTIMATE_THRESHOLD', '0.001')),
        'TREND_SIGMAS': float(os.getenv('HARNESS_TREND_SIGMAS', '3')),
    },
}

# Logging Configuration
LOG_DIR = BASE_DIR / 'logs'
LOG_DIR.mkdir(exist_ok=True)

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
        'file': {
            'level': 'INFO',
            'class': 'logging.FileHandler',
            'filename': LOG_DIR / 'apnc_relay.log',
            'formatter': 'verbose',
        },
        'console': {
            'level': 'DEBUG',
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'phy': {
            'handlers': ['file', 'console'],
            'level': os.getenv('PHY_LOG_LEVEL', 'WARNING'),
            'propagate': True,
        },
        'experiments': {
            'handlers': ['file', 'console'],
            'level': os.getenv('EXPERIMENTS_LOG_LEVEL', 'INFO'),
            'propagate': True,
        },
    },
}
