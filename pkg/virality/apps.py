from django.apps import AppConfig


class ViralityConfig(AppConfig):
    name = 'virality'
    verbose_name = 'Предсказание виральности твитов'
