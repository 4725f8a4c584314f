"""Шесть моделей для сравнения с ViralBERT.

Числовые бейзлайны получают 9 входов: шесть числовых признаков после min-max
(скейлер обучается только на train) и три вероятности тональности как есть.
ViralBERT_Text - та же модель без числовых признаков и без головы тональности.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np
import torch
from django.core.exceptions import ImproperlyConfigured
from sklearn.dummy import DummyClassifier
from sklearn.ensemble import RandomForestClassifier
from sklearn.linear_model import LogisticRegression, SGDClassifier
from sklearn.tree import DecisionTreeClassifier
from torch import nn

from .config import default_run_config
from .corpus import NUM_CLASSES, DatasetSplit
from .encoder import build_sentiment_scorer, inference_mode
from .evaluation import EvalReport, RunMetadata, config_hash, evaluate_predictions
from .exceptions import BaselineFitError, ViralityError
from .features import CANONICAL_FEATURE_ORDER, ScalerState, apply_minmax, extract_features, fit_minmax
from .loss import ClassBalanceConfig, ClassBalancedFocalLoss
from .network import build_viralbert
from .pipeline import run_viralbert

logger = logging.getLogger(__name__)

MLP_HIDDEN_UNITS = 32
MLP_MAX_EPOCHS = 200
NUM_BASELINE_INPUTS = len(CANONICAL_FEATURE_ORDER) + 3


class BaselineKind(str, Enum):
    LOGISTIC_REGRESSION = 'logistic_regression'
    SVM = 'svm'
    DECISION_TREE = 'decision_tree'
    RANDOM_FOREST = 'random_forest'
    MLP_NUM = 'mlp_num'
    VIRALBERT_TEXT = 'viralbert_text'

    @classmethod
    def parse(cls, value) -> 'BaselineKind':
        if isinstance(value, cls):
            return value
        try:
            return cls(value)
        except ValueError:
            known = ', '.join(kind.value for kind in cls)
            raise ImproperlyConfigured(f"Неизвестный бейзлайн {value!r}; допустимы: {known}") from None


# Порядок строк в таблице сравнения
BASELINE_ORDER = tuple(BaselineKind)


class MLPNum(nn.Module):
    """9 входов -> 32 ReLU -> 4 класса"""

    def __init__(self, num_inputs: int = NUM_BASELINE_INPUTS, hidden: int = MLP_HIDDEN_UNITS,
                 num_classes: int = NUM_CLASSES):
        super().__init__()
        self.layers = nn.Sequential(
            nn.Linear(num_inputs, hidden),
            nn.ReLU(),
            nn.Linear(hidden, num_classes),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.layers(x)


class MLPNumClassifier:
    """Обёртка MLP_Num с интерфейсом fit/predict как у sklearn.

    Обучается той же CB focal loss и AdamW, что и ViralBERT.
    """

    def __init__(self, seed: int, learning_rate: float = 1e-3, weight_decay: float = 0.01,
                 batch_size: int = 32, max_epochs: int = MLP_MAX_EPOCHS,
                 loss: Optional[ClassBalanceConfig] = None, num_classes: int = NUM_CLASSES):
        self.seed = seed
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.loss = loss or ClassBalanceConfig()
        self.num_classes = num_classes
        self.network = None

    def fit(self, X, y) -> 'MLPNumClassifier':
        X = torch.as_tensor(np.asarray(X), dtype=torch.float32)
        y = torch.as_tensor(np.asarray(y), dtype=torch.long)

        counts = np.bincount(y.numpy(), minlength=self.num_classes)
        criterion = ClassBalancedFocalLoss(self.loss.with_counts(np.maximum(counts, 1)))

        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(self.seed)
            self.network = MLPNum(num_inputs=X.shape[1], num_classes=self.num_classes)
        optimizer = torch.optim.AdamW(
            self.network.parameters(), lr=self.learning_rate, weight_decay=self.weight_decay
        )
        generator = torch.Generator().manual_seed(self.seed)

        self.network.train()
        for _ in range(self.max_epochs):
            order = torch.randperm(len(X), generator=generator)
            for start in range(0, len(X), self.batch_size):
                batch = order[start:start + self.batch_size]
                loss = criterion(self.network(X[batch]), y[batch])
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
        return self

    def predict_proba(self, X) -> np.ndarray:
        if self.network is None:
            raise BaselineFitError("MLP_Num не обучена")
        X = torch.as_tensor(np.asarray(X), dtype=torch.float32)
        with inference_mode(self.network):
            return torch.softmax(self.network(X).double(), dim=-1).numpy()

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)


def build_baseline(kind, seed: int, config=None):
    """Классификатор с зафиксированной конфигурацией для данного вида бейзлайна"""
    kind = BaselineKind.parse(kind)

    if kind == BaselineKind.LOGISTIC_REGRESSION:
        return LogisticRegression(solver='newton-cg', penalty=None, max_iter=1000, random_state=seed)
    if kind == BaselineKind.SVM:
        # SGD по hinge loss, многоклассовость - один против всех
        return SGDClassifier(loss='hinge', max_iter=1000, tol=1e-3, random_state=seed)
    if kind == BaselineKind.DECISION_TREE:
        return DecisionTreeClassifier(criterion='gini', max_depth=None, random_state=seed)
    if kind == BaselineKind.RANDOM_FOREST:
        return RandomForestClassifier(n_estimators=100, max_depth=None, random_state=seed)
    if kind == BaselineKind.MLP_NUM:
        training = config.training if config is not None else None
        if training is None:
            return MLPNumClassifier(seed)
        return MLPNumClassifier(
            seed,
            learning_rate=training.head_learning_rate,
            weight_decay=training.weight_decay,
            batch_size=training.batch_size,
            loss=ClassBalanceConfig(beta=training.loss.beta, gamma=training.loss.gamma),
        )

    text_config = text_only_config(_require_config(config)).with_overrides(seed=seed)
    model, _ = build_viralbert(text_config.viralbert_config(), seed)
    return model


def _require_config(config):
    if config is None:
        return default_run_config()
    return config


def text_only_config(config):
    return config.replace_model(use_numeric_features=False, use_sentiment=False)


@dataclass
class BaselineData:
    """Матрицы признаков для числовых бейзлайнов"""
    train_x: np.ndarray
    train_y: np.ndarray
    test_x: np.ndarray
    test_y: np.ndarray
    scaler: ScalerState


def encoder_sentiment_fn(config) -> Callable[[str], tuple]:
    """Вероятности тональности из головы тональности энкодера"""
    scorer = build_sentiment_scorer(config.encoder, config.seed)
    return lambda text: scorer(text).as_tuple()


def baseline_vectors(records: Sequence, parse_text: bool, sentiment_fn) -> list:
    return [extract_features(r, parse_text).with_sentiment(sentiment_fn(r.text)) for r in records]


def baseline_matrix(vectors: Sequence, scaler: ScalerState) -> np.ndarray:
    """Строки по 9 значений: масштабированные числовые признаки и тональность"""
    rows = [np.concatenate([apply_minmax(scaler, v), np.asarray(v.sentiment, dtype=np.float64)]) for v in vectors]
    return np.vstack(rows)


def featurize_split(split: DatasetSplit, config, sentiment_fn=None) -> BaselineData:
    config = _require_config(config)
    sentiment_fn = sentiment_fn or encoder_sentiment_fn(config)
    parse_text = config.features.parse_text

    train_vectors = baseline_vectors(split.train, parse_text, sentiment_fn)
    test_vectors = baseline_vectors(split.test, parse_text, sentiment_fn)
    scaler = fit_minmax(train_vectors, CANONICAL_FEATURE_ORDER)

    return BaselineData(
        train_x=baseline_matrix(train_vectors, scaler),
        train_y=np.asarray([r.class_index for r in split.train]),
        test_x=baseline_matrix(test_vectors, scaler),
        test_y=np.asarray([r.class_index for r in split.test]),
        scaler=scaler,
    )


def fit_and_evaluate(kind, split: DatasetSplit, seed: int, config=None, sentiment_fn=None,
                     data: Optional[BaselineData] = None) -> EvalReport:
    """Обучает бейзлайн на train и считает макро-метрики на test"""
    kind = BaselineKind.parse(kind)
    config = _require_config(config).with_overrides(seed=seed)

    if kind == BaselineKind.VIRALBERT_TEXT:
        try:
            return run_viralbert(text_only_config(config), split, model_name=kind.value).report
        except ViralityError:
            raise
        except Exception as exc:
            raise BaselineFitError(f"{kind.value}: {exc}") from exc

    data = data or featurize_split(split, config, sentiment_fn)
    metadata = RunMetadata(
        model=kind.value,
        seed=seed,
        config_hash=config_hash({'baseline': kind.value, 'run': config.to_dict()}),
    )

    if len(np.unique(data.train_y)) < 2:
        logger.warning("%s: в train один класс, используется константный классификатор", kind.value)
        classifier = DummyClassifier(strategy='most_frequent')
        metadata.single_class_training = True
    else:
        classifier = build_baseline(kind, seed, config)

    try:
        classifier.fit(data.train_x, data.train_y)
        predictions = classifier.predict(data.test_x)
    except Exception as exc:
        raise BaselineFitError(f"{kind.value}: {exc}") from exc

    report = evaluate_predictions([int(p) for p in predictions], data.test_y.tolist(), metadata)
    if metadata.single_class_training:
        report.warnings.append('обучение на одном классе')
    logger.info("%s: test macro-F1 %.4f, accuracy %.4f", kind.value, report.macro_f1, report.accuracy)
    return report


def run_baselines(split: DatasetSplit, seed: int, config=None, kinds: Sequence = BASELINE_ORDER,
                  sentiment_fn=None) -> list:
    """[(имя, EvalReport)] в порядке таблицы сравнения"""
    config = _require_config(config).with_overrides(seed=seed)
    kinds = [BaselineKind.parse(kind) for kind in kinds]
    data = None
    if any(kind != BaselineKind.VIRALBERT_TEXT for kind in kinds):
        data = featurize_split(split, config, sentiment_fn)

    results = []
    for kind in kinds:
        report = fit_and_evaluate(kind, split, seed, config, sentiment_fn=sentiment_fn, data=data)
        results.append((kind.value, report))
    return results
