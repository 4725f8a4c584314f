"""
Создание демо-корпуса для ViralSense
"""
import os
import sys

# Настройка Django
os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'viralsense.settings')

import django
django.setup()

from virality.corpus import class_counts
from virality.synthetic import demo_corpus, record_lines, write_jsonl


def create_fixture_data(size=2000, seed=1, path='data/demo_tweets.jsonl'):
    """Демо-корпус для configs/toy.json"""

    print(f"🐦 Создание демо-корпуса из {size} твитов (seed {seed})...")
    records = demo_corpus(size, seed)
    write_jsonl(record_lines(records), path)

    for class_index, count in enumerate(class_counts(records)):
        print(f"   Класс {class_index}: {count}")

    print(f"✅ Корпус записан в {path}")
    print("\n📝 Дальше:")
    print("   python manage.py migrate")
    print("   python manage.py prepare --config configs/toy.json")
    print("   python manage.py train --config configs/toy.json")


if __name__ == "__main__":
    size = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
    create_fixture_data(size=size)
