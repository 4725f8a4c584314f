"""
Django settings for viralsense project.

Проект не поднимает веб-сервер: Django используется ради management-команд,
ORM-реестра запусков, форм валидации и тестового раннера.
"""

from pathlib import Path
import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.getenv('SECRET_KEY', 'django-insecure-viralsense-local-key')

DEBUG = os.getenv('DEBUG', 'True') == 'True'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'virality',
]


# Database
# Реестр запусков (ExperimentRun) хранится в sqlite рядом с проектом

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Internationalization

LANGUAGE_CODE = 'ru-ru'

TIME_ZONE = 'Europe/Moscow'

USE_I18N = True

USE_TZ = True


# Logging

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{asctime} {levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'virality': {
            'handlers': ['console'],
            'level': os.getenv('VIRALITY_LOG_LEVEL', 'INFO'),
            'propagate': False,
        },
    },
}


# Celery Configuration
CELERY_BROKER_URL = os.getenv('CELERY_BROKER_URL', 'redis://localhost:6379/0')
CELERY_RESULT_BACKEND = os.getenv('CELERY_RESULT_BACKEND', 'redis://localhost:6379/0')
CELERY_ACCEPT_CONTENT = ['json']
CELERY_TASK_SERIALIZER = 'json'
CELERY_RESULT_SERIALIZER = 'json'
CELERY_TIMEZONE = 'Europe/Moscow'
CELERY_TASK_ALWAYS_EAGER = os.getenv('CELERY_TASK_ALWAYS_EAGER', 'False') == 'True'


# Virality pipeline

# Каталог запусков по умолчанию (конфиг, чекпоинты, отчёты)
VIRALITY_RUN_DIR = Path(os.getenv('VIRALITY_RUN_DIR', BASE_DIR / 'runs'))

VIRALITY_SEED = int(os.getenv('VIRALITY_SEED', '1'))

# 'toy-random' - маленький случайный трансформер, всё остальное - id предобученных весов
VIRALITY_BACKBONE = os.getenv('VIRALITY_BACKBONE', 'toy-random')
VIRALITY_TEXT_BACKBONE = os.getenv('VIRALITY_TEXT_BACKBONE', 'vinai/bertweet-base')
VIRALITY_SENTIMENT_BACKBONE = os.getenv(
    'VIRALITY_SENTIMENT_BACKBONE', 'cardiffnlp/twitter-roberta-base-sentiment'
)

# Кэш скачанных весов
VIRALITY_BACKBONE_CACHE = Path(
    os.getenv('VIRALITY_BACKBONE_CACHE', BASE_DIR / '.cache' / 'backbones')
)
