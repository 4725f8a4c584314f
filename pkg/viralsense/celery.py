import os
from celery import Celery

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'viralsense.settings')

app = Celery('viralsense')
app.config_from_object('django.conf:settings', namespace='CELERY')
app.autodiscover_tasks()

# Прогоны обучения длинные: воркер берёт по одной задаче
app.conf.worker_prefetch_multiplier = 1
app.conf.task_acks_late = True
