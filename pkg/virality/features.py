"""Числовые признаки твита, min-max скейлер для бейзлайнов и сериализация
входа текстового энкодера: [CLS] T [SEP] N0 [SEP] ... Ni [SEP]."""
import re
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from django.core.exceptions import ImproperlyConfigured

from .corpus import TweetRecord
from .exceptions import FitError, InputError

CANONICAL_FEATURE_ORDER = (
    'hashtags',
    'mentions',
    'followers',
    'following',
    'verified',
    'text_length',
)

SENTIMENT_FEATURE = 'sentiment'

# Порядок строк таблицы абляции
ABLATION_FEATURES = (SENTIMENT_FEATURE,) + CANONICAL_FEATURE_ORDER

HASHTAG_RE = re.compile(r'(?<!\w)#\w+')
MENTION_RE = re.compile(r'(?<!\w)@\w+')

SENTIMENT_TOLERANCE = 1e-6


@dataclass(frozen=True)
class FeatureVector:
    hashtags: int
    mentions: int
    followers: int
    following: int
    verified: int
    text_length: int
    sentiment: Optional[tuple] = None

    def __post_init__(self):
        if self.sentiment is None:
            return
        if len(self.sentiment) != 3:
            raise InputError(f"Вектор тональности должен быть трёхмерным: {self.sentiment}")
        if any(p < 0 for p in self.sentiment) or abs(sum(self.sentiment) - 1.0) > SENTIMENT_TOLERANCE:
            raise InputError(f"Вектор тональности не является распределением: {self.sentiment}")

    def value(self, name: str) -> int:
        if name not in CANONICAL_FEATURE_ORDER:
            raise ImproperlyConfigured(f"Неизвестный признак: {name!r}")
        return getattr(self, name)

    def numeric(self, order: Sequence[str] = CANONICAL_FEATURE_ORDER) -> list:
        return [self.value(name) for name in order]

    def with_sentiment(self, sentiment) -> 'FeatureVector':
        return replace(self, sentiment=tuple(float(p) for p in sentiment))


@dataclass(frozen=True)
class ScalerState:
    """Минимумы и максимумы признаков, посчитанные только на train"""
    feature_names: tuple
    minimums: tuple
    maximums: tuple

    def __post_init__(self):
        if not (len(self.feature_names) == len(self.minimums) == len(self.maximums)):
            raise InputError("Размеры состояния скейлера не совпадают")
        for name, low, high in zip(self.feature_names, self.minimums, self.maximums):
            if high < low:
                raise InputError(f"max < min для признака {name}")

    @property
    def constant(self) -> tuple:
        return tuple(low == high for low, high in zip(self.minimums, self.maximums))

    def to_dict(self) -> dict:
        return {
            'feature_names': list(self.feature_names),
            'minimums': list(self.minimums),
            'maximums': list(self.maximums),
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'ScalerState':
        return cls(
            feature_names=tuple(data['feature_names']),
            minimums=tuple(float(v) for v in data['minimums']),
            maximums=tuple(float(v) for v in data['maximums']),
        )


def count_hashtags(text: str) -> int:
    return len(HASHTAG_RE.findall(text))


def count_mentions(text: str) -> int:
    return len(MENTION_RE.findall(text))


def extract_features(record: TweetRecord, parse_text: bool = True) -> FeatureVector:
    if parse_text:
        hashtags = count_hashtags(record.text)
        mentions = count_mentions(record.text)
    else:
        hashtags = record.hashtag_count
        mentions = record.mention_count

    return FeatureVector(
        hashtags=hashtags,
        mentions=mentions,
        followers=record.followers,
        following=record.following,
        verified=1 if record.verified else 0,
        text_length=len(record.text),
    )


def fit_minmax(train: Sequence[FeatureVector], feature_names: Sequence[str] = CANONICAL_FEATURE_ORDER) -> ScalerState:
    if not train:
        raise FitError("Нельзя обучить скейлер на пустом списке")
    matrix = np.asarray([v.numeric(feature_names) for v in train], dtype=np.float64)
    return ScalerState(
        feature_names=tuple(feature_names),
        minimums=tuple(matrix.min(axis=0).tolist()),
        maximums=tuple(matrix.max(axis=0).tolist()),
    )


def apply_minmax(state: ScalerState, v: FeatureVector) -> np.ndarray:
    """(x - min) / (max - min) без обрезки; постоянный признак даёт 0"""
    values = np.asarray(v.numeric(state.feature_names), dtype=np.float64)
    low = np.asarray(state.minimums, dtype=np.float64)
    high = np.asarray(state.maximums, dtype=np.float64)
    span = high - low
    constant = span == 0
    scaled = (values - low) / np.where(constant, 1.0, span)
    scaled[constant] = 0.0
    return scaled


def render_feature(value) -> str:
    # bool -> "0"/"1", без разделителей тысяч
    return str(int(value))


def validate_feature_order(order: Sequence[str]) -> tuple:
    order = tuple(order)
    unknown = [name for name in order if name not in CANONICAL_FEATURE_ORDER]
    if unknown:
        raise ImproperlyConfigured(f"Неизвестные признаки в порядке сериализации: {unknown}")
    if len(set(order)) != len(order):
        raise ImproperlyConfigured(f"Признаки в порядке сериализации повторяются: {list(order)}")
    return order


def serialize_model_input(text: str, v: FeatureVector, order: Sequence[str]) -> list:
    """Сегменты [T, N0, ..., Ni]; маркеры [CLS]/[SEP] расставляет токенизатор.

    В текстовый энкодер попадают сырые (не нормированные) значения признаков.
    """
    order = validate_feature_order(order)
    return [text] + [render_feature(v.value(name)) for name in order]
