"""Синтетические корпуса для тестов, демо-прогонов и create_fixture_data.py."""
import json
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Iterable

import numpy as np

from .corpus import TOPICS, TweetRecord

BASE_TIME = datetime(2021, 6, 1, 12, 0, tzinfo=timezone.utc)

# Типичное число ретвитов для каждого класса
RETWEETS_FOR_CLASS = (0, 1, 7, 42)

POSITIVE_WORDS = ('love', 'great', 'awesome', 'happy', 'win')
NEGATIVE_WORDS = ('hate', 'awful', 'terrible', 'sad', 'lose')
NEUTRAL_WORDS = ('today', 'update', 'thread', 'news', 'post')

# Фиксированные наборы значений: игрушечный токенизатор видит их как повторяющиеся токены
LOW_FOLLOWERS = (120, 340, 560, 780)
HIGH_FOLLOWERS = (5200, 7400, 9100, 12000)


def make_record(record_id, text='just a tweet', retweet_count=0, **overrides) -> TweetRecord:
    values = {
        'id': str(record_id),
        'text': text,
        'created_at': BASE_TIME,
        'source_client': 'Twitter Web App',
        'hashtag_count': text.count('#'),
        'mention_count': text.count('@'),
        'followers': 100,
        'following': 50,
        'verified': False,
        'retweet_count': retweet_count,
        'like_count': 0,
        'reply_count': 0,
        'quote_count': 0,
    }
    values.update(overrides)
    return TweetRecord(**values)


def lexicon_sentiment(text: str) -> tuple:
    """Распределение (neg, neu, pos) по словарю; заменяет голову тональности в тестах"""
    words = text.lower().split()
    positive = sum(w in POSITIVE_WORDS for w in words)
    negative = sum(w in NEGATIVE_WORDS for w in words)
    if positive > negative:
        return 0.05, 0.15, 0.8
    if negative > positive:
        return 0.8, 0.15, 0.05
    return 0.1, 0.8, 0.1


def random_corpus(rng: np.random.Generator, size: int, zero_share: float = 0.6) -> list:
    """Корпус со случайными числами ретвитов, класс 0 обычно преобладает"""
    records = []
    for i in range(size):
        if rng.random() < zero_share:
            retweets = 0
        else:
            retweets = int(rng.choice([1, int(rng.integers(2, 21)), int(rng.integers(21, 5000))]))
        records.append(make_record(
            f'r{i}',
            text=f'tweet number {i}',
            retweet_count=retweets,
            followers=int(rng.integers(0, 100000)),
            following=int(rng.integers(0, 5000)),
            verified=bool(rng.random() < 0.1),
            topic=TOPICS[int(rng.integers(len(TOPICS)))],
            created_at=BASE_TIME + timedelta(minutes=i),
        ))
    return records


def separable_corpus(size: int, seed: int) -> list:
    """Класс однозначно задаётся парой (много ли подписчиков, позитивен ли текст):
    2 * high_followers + positive."""
    rng = np.random.default_rng(seed)
    records = []
    for i in range(size):
        class_index = i % 4
        high, positive = divmod(class_index, 2)
        words = POSITIVE_WORDS if positive else NEGATIVE_WORDS
        text = ' '.join(rng.choice(words, size=3).tolist() + rng.choice(NEUTRAL_WORDS, size=2).tolist())
        followers = HIGH_FOLLOWERS if high else LOW_FOLLOWERS
        records.append(make_record(
            f's{i}',
            text=text,
            retweet_count=RETWEETS_FOR_CLASS[class_index],
            followers=int(rng.choice(followers)),
            following=int(rng.integers(10, 500)),
            created_at=BASE_TIME + timedelta(minutes=i),
        ))
    order = rng.permutation(size).tolist()
    return [records[i] for i in order]


def threshold_corpus(size: int, seed: int) -> list:
    """Класс - пороговая функция числа подписчиков, текст нейтральный"""
    rng = np.random.default_rng(seed)
    records = []
    for i in range(size):
        class_index = int(rng.integers(4))
        followers = int(rng.integers(class_index * 1000 + 100, class_index * 1000 + 900))
        records.append(make_record(
            f't{i}',
            text='daily update thread',
            retweet_count=RETWEETS_FOR_CLASS[class_index],
            followers=followers,
            created_at=BASE_TIME + timedelta(minutes=i),
        ))
    return records


def demo_corpus(size: int, seed: int) -> list:
    """Правдоподобный демо-корпус: виральность растёт с аудиторией и позитивом"""
    rng = np.random.default_rng(seed)
    records = []
    for i in range(size):
        followers = int(rng.lognormal(6, 2))
        mood = POSITIVE_WORDS if rng.random() < 0.5 else NEGATIVE_WORDS
        hashtags = ' '.join(f'#{t}' for t in rng.choice(TOPICS, size=int(rng.integers(0, 3))).tolist())
        mention = '@friend ' if rng.random() < 0.3 else ''
        text = f"{mention}{' '.join(rng.choice(mood, size=2).tolist())} {rng.choice(NEUTRAL_WORDS)} {hashtags}".strip()
        expected = followers / 2000 * (2.0 if mood is POSITIVE_WORDS else 0.7)
        records.append(make_record(
            f'demo{i}',
            text=text,
            retweet_count=int(rng.poisson(expected)),
            followers=followers,
            following=int(rng.integers(0, 3000)),
            verified=bool(followers > 20000 and rng.random() < 0.5),
            like_count=int(rng.poisson(expected * 3)),
            topic=TOPICS[i % len(TOPICS)],
            created_at=BASE_TIME + timedelta(minutes=i),
        ))
    return records


def record_lines(records: Iterable[TweetRecord]) -> list:
    return [record.to_dict() for record in records]


def write_jsonl(rows: Iterable[dict], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8') as handle:
        for row in rows:
            handle.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + '\n')
    return path
