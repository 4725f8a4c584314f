"""
Проверка доступных бэкбонов энкодера
"""
import os

# Настройка Django
os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'viralsense.settings')

import django
django.setup()

from virality.encoder import get_status


def check_backbone_status():
    """Какие бэкенды энкодера доступны"""
    status = get_status()

    print("🧠 Статус энкодеров:")
    print(f"   torch: {status['torch_version']}")
    print(f"   transformers: {'✅ ' + status['transformers_version'] if status['transformers'] else '❌ не установлен'}")
    print(f"   Бэкбон по умолчанию: {status['default_backbone']}")
    print(f"   Доступные бэкенды: {', '.join(status['backends'])}")
    print(f"   Кэш весов: {status['cache_dir']}")

    if not status['transformers']:
        print("\n📝 Для предобученных весов:")
        print("   1. pip install transformers")
        print(f"   2. Текстовый энкодер: {status['text_backbone']}")
        print(f"   3. Тональность: {status['sentiment_backbone']}")
        print("   4. Каталог кэша задаётся через VIRALITY_BACKBONE_CACHE")


if __name__ == "__main__":
    check_backbone_status()
