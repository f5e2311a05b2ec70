# relocation backend settings

import os
from pathlib import Path
from dotenv import load_dotenv

BASE_DIR = Path(__file__).resolve().parent.parent

# Load environment variables from .env file
load_dotenv(os.path.join(BASE_DIR, '.env'))

SECRET_KEY = os.environ.get('SECRET_KEY', 'django-insecure-relocation-simulator-local-key')

DEBUG = os.environ.get('DEBUG', 'True').lower() == 'true'

_extra_hosts = os.environ.get('ALLOWED_HOSTS', '').split(',')
ALLOWED_HOSTS = [h.strip() for h in _extra_hosts if h.strip()] + [
    'localhost',
    '127.0.0.1',
    '[::1]',
    'testserver',
]


# Application definition
INSTALLED_APPS = [
    'django.contrib.auth',
    'django.contrib.contenttypes',

    # Third party apps
    'rest_framework',

    # Simulator apps
    'geometry',
    'pathplanning',
    'signs',
    'pma',
    'coalition',
    'scenarios',
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.middleware.common.CommonMiddleware',
]

ROOT_URLCONF = 'backend.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.debug',
                'django.template.context_processors.request',
            ],
        },
    },
]

WSGI_APPLICATION = 'backend.wsgi.application'

# Nothing is persisted; the database only satisfies contrib.auth
DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = True
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# REST Framework settings
REST_FRAMEWORK = {
    'DEFAULT_AUTHENTICATION_CLASSES': [],
    'DEFAULT_PERMISSION_CLASSES': [
        'rest_framework.permissions.AllowAny',
    ],
    'UNAUTHENTICATED_USER': None,
    'DEFAULT_THROTTLE_CLASSES': [
        'rest_framework.throttling.AnonRateThrottle',
    ],
    'DEFAULT_THROTTLE_RATES': {
        'anon': '600/hour',
    },
}

# ===== SIMULATOR =====
RELOCATION = {
    'PMA_ITERATION_CAP': int(os.environ.get('RELOCATION_PMA_ITERATION_CAP', '100')),
    'TICK_CAP': int(os.environ.get('RELOCATION_TICK_CAP', '200')),
    'LIAN_DELTA': int(os.environ.get('RELOCATION_LIAN_DELTA', '5')),
    'ALPHA_M': float(os.environ.get('RELOCATION_ALPHA_M', '45')),
    'OUTPUT_DIR': os.environ.get('RELOCATION_OUTPUT_DIR', os.getcwd()),
    'LOG_LEVEL': os.environ.get('RELOCATION_LOG_LEVEL', 'INFO').upper(),
}

# ===== LOGGING =====
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'relocation': {
            'format': '{levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'relocation',
            'stream': 'ext://sys.stderr',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'INFO',
    },
    'loggers': {
        app: {
            'handlers': ['console'],
            'level': RELOCATION['LOG_LEVEL'],
            'propagate': False,
        }
        for app in ('geometry', 'pathplanning', 'signs', 'pma', 'coalition', 'scenarios')
    },
}
