"""Корпус твитов: загрузка JSONL, дедупликация, фильтры, классы виральности,
ребалансировка нулевого класса и разбиение 80:10:10."""
import json
import logging
from collections import Counter
from dataclasses import asdict, dataclass
from datetime import datetime
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
from django.core.exceptions import ValidationError

from .exceptions import DomainError, SplitSizeError

logger = logging.getLogger(__name__)

NUM_CLASSES = 4

# Нижние границы полос по числу ретвитов: 0, 1, 2-20, 21+
CLASS_BANDS = (
    (0, 0),
    (1, 1),
    (2, 20),
    (21, None),
)

CLASS_NAMES = ('0 ретвитов', '1 ретвит', '2-20 ретвитов', '21+ ретвитов')

TOPICS = (
    'cryptocurrencies',
    'tv_movies',
    'pets',
    'video_games',
    'cell_phones',
    'covid_19',
    'football',
    'kpop',
)
UNKNOWN_TOPIC = 'unknown'

MIN_SPLIT_SIZE = 10


@dataclass(frozen=True)
class ViralityLabel:
    class_index: int

    def __post_init__(self):
        if self.class_index not in range(NUM_CLASSES):
            raise DomainError(f"Класс виральности вне диапазона: {self.class_index}")


@dataclass(frozen=True)
class TweetRecord:
    """Один собранный твит со статистикой автора и вовлечённостью за 24 часа"""
    id: str
    text: str
    created_at: datetime
    source_client: str
    hashtag_count: int
    mention_count: int
    followers: int
    following: int
    verified: bool
    retweet_count: int
    like_count: int
    reply_count: int
    quote_count: int
    topic: str = UNKNOWN_TOPIC
    lang: str = 'en'
    is_retweet: bool = False

    @property
    def label(self) -> ViralityLabel:
        return assign_virality_class(self.retweet_count)

    @property
    def class_index(self) -> int:
        return self.label.class_index

    def to_dict(self) -> dict:
        data = asdict(self)
        data['created_at'] = self.created_at.isoformat()
        return data


@dataclass(frozen=True)
class DatasetSplit:
    train: tuple
    validation: tuple
    test: tuple
    seed: int

    def manifest(self) -> dict:
        return {
            'seed': self.seed,
            'train': [r.id for r in self.train],
            'validation': [r.id for r in self.validation],
            'test': [r.id for r in self.test],
        }

    def sizes(self):
        return len(self.train), len(self.validation), len(self.test)


def assign_virality_class(retweet_count: int) -> ViralityLabel:
    if retweet_count < 0:
        raise DomainError(f"Отрицательное число ретвитов: {retweet_count}")
    for class_index, (low, high) in enumerate(CLASS_BANDS):
        if retweet_count >= low and (high is None or retweet_count <= high):
            return ViralityLabel(class_index)
    raise DomainError(f"Нет полосы для {retweet_count}")  # недостижимо


def load_tweet_records(path, require_engagement: bool = True) -> list:
    """Читает JSONL с твитами.

    Повторяющиеся id отбрасываются (остаётся первое вхождение). Все ошибки
    схемы собираются по файлу и выбрасываются одним ValidationError.
    """
    from .forms import TweetRecordForm

    path = Path(path)
    records = []
    seen_ids = set()
    errors = []
    duplicates = 0

    with path.open('r', encoding='utf-8') as handle:
        for line_number, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                errors.append(f"строка {line_number}, поле __line__: некорректный JSON ({exc.msg})")
                continue
            if not isinstance(data, dict):
                errors.append(f"строка {line_number}, поле __line__: ожидается JSON-объект")
                continue

            form = TweetRecordForm(data, require_engagement=require_engagement)
            if not form.is_valid():
                errors.extend(form.error_lines(line_number))
                continue

            record = TweetRecord(**form.cleaned_data)
            if record.id in seen_ids:
                duplicates += 1
                continue
            seen_ids.add(record.id)
            records.append(record)

    if errors:
        raise ValidationError(errors)

    logger.info("Загружено %d записей из %s, дубликатов удалено: %d", len(records), path, duplicates)
    return records


def write_tweet_records(records: Iterable[TweetRecord], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8') as handle:
        for record in records:
            handle.write(json.dumps(record.to_dict(), ensure_ascii=False, sort_keys=True) + '\n')


def filter_records(
    records: Sequence[TweetRecord],
    topics: Optional[Sequence[str]] = None,
    english_only: bool = True,
    original_only: bool = True,
) -> list:
    """Фильтры этапа загрузки: тема, английский язык, только оригинальные твиты"""
    allowed_topics = set(topics) if topics else None
    kept = []
    for record in records:
        if allowed_topics is not None and record.topic not in allowed_topics:
            continue
        if english_only and record.lang != 'en':
            continue
        if original_only and record.is_retweet:
            continue
        kept.append(record)
    if len(kept) != len(records):
        logger.info("Фильтры оставили %d из %d записей", len(kept), len(records))
    return kept


def rebalance_zero_class(records: Sequence[TweetRecord], seed: int) -> list:
    """Уменьшает класс 0 до суммарного размера классов 1-3.

    Если нулевой класс не больше остальных, корпус возвращается без изменений.
    Порядок оставшихся записей сохраняется.
    """
    zero_positions = [i for i, r in enumerate(records) if r.class_index == 0]
    nonzero_count = len(records) - len(zero_positions)

    if len(zero_positions) <= nonzero_count:
        return list(records)

    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(zero_positions), size=nonzero_count, replace=False)
    keep = {zero_positions[i] for i in chosen.tolist()}

    balanced = [r for i, r in enumerate(records) if r.class_index != 0 or i in keep]
    logger.info(
        "Ребалансировка: класс 0 уменьшен с %d до %d записей",
        len(zero_positions), nonzero_count,
    )
    return balanced


def split_sizes(total: int):
    """Размеры (train, validation, test): по 10% с округлением к ближайшему, остаток в train"""
    held_out = (total + 5) // 10
    return total - 2 * held_out, held_out, held_out


def split_dataset(records: Sequence[TweetRecord], seed: int) -> DatasetSplit:
    if len(records) < MIN_SPLIT_SIZE:
        raise SplitSizeError(
            f"Для разбиения нужно не меньше {MIN_SPLIT_SIZE} записей, получено {len(records)}"
        )

    n_train, n_val, _ = split_sizes(len(records))
    order = np.random.default_rng(seed).permutation(len(records)).tolist()
    shuffled = [records[i] for i in order]

    return DatasetSplit(
        train=tuple(shuffled[:n_train]),
        validation=tuple(shuffled[n_train:n_train + n_val]),
        test=tuple(shuffled[n_train + n_val:]),
        seed=seed,
    )


def class_counts(records: Iterable[TweetRecord]) -> list:
    counter = Counter(r.class_index for r in records)
    return [counter.get(c, 0) for c in range(NUM_CLASSES)]


def corpus_statistics(records: Sequence[TweetRecord]) -> dict:
    topics = Counter(r.topic for r in records)
    return {
        'total': len(records),
        'per_class': {str(c): n for c, n in enumerate(class_counts(records))},
        'per_topic': dict(sorted(topics.items())),
    }
