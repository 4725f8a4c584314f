"""Матрица ошибок, макро-метрики, отчёты в стиле таблиц результатов и абляции."""
import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from django.core.exceptions import ImproperlyConfigured
from sklearn.metrics import confusion_matrix as sk_confusion_matrix

from .corpus import NUM_CLASSES
from .exceptions import InputError
from .features import ABLATION_FEATURES, SENTIMENT_FEATURE

logger = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = 1

# Опубликованные значения - ориентир для сравнения на глаз, не воспроизводятся без исходного корпуса
PUBLISHED_RESULTS = {
    'logistic_regression': (0.235, 0.503, 0.277, 0.277),
    'svm': (0.221, 0.320, 0.271, 0.271),
    'decision_tree': (0.405, 0.402, 0.408, 0.408),
    'random_forest': (0.458, 0.562, 0.435, 0.435),
    'mlp_num': (0.213, 0.235, 0.268, 0.268),
    'viralbert_text': (0.410, 0.415, 0.409, 0.409),
    'viralbert': (0.523, 0.609, 0.494, 0.494),
}

PUBLISHED_ABLATION = {
    None: (0.523, 0.494),
    'sentiment': (0.438, 0.432),
    'hashtags': (0.531, 0.502),
    'mentions': (0.490, 0.466),
    'followers': (0.429, 0.435),
    'following': (0.502, 0.474),
    'verified': (0.518, 0.491),
    'text_length': (0.523, 0.493),
}

METHOD_TITLES = {
    'logistic_regression': 'Logistic Regression',
    'svm': 'SVM',
    'decision_tree': 'Decision Tree Classifier',
    'random_forest': 'Random Forest Classifier',
    'mlp_num': 'MLP_Num',
    'viralbert_text': 'ViralBERT_Text',
    'viralbert': 'ViralBERT',
}

FEATURE_TITLES = {
    'sentiment': 'Sentiment',
    'hashtags': 'Hashtags',
    'mentions': 'Mentions',
    'followers': 'Followers',
    'following': 'Following',
    'verified': 'Verified',
    'text_length': 'Text Length',
}


@dataclass(frozen=True)
class ConfusionMatrix:
    """Строки - истинный класс, столбцы - предсказанный"""
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InputError(f"Матрица ошибок должна быть квадратной, получено {m.shape}")
        if np.any(m < 0):
            raise InputError("Матрица ошибок содержит отрицательные значения")
        object.__setattr__(self, 'matrix', m.astype(np.int64))

    @property
    def num_classes(self) -> int:
        return self.matrix.shape[0]

    @property
    def total(self) -> int:
        return int(self.matrix.sum())

    def tolist(self) -> list:
        return self.matrix.tolist()


@dataclass
class RunMetadata:
    model: str = 'viralbert'
    seed: Optional[int] = None
    config_hash: str = ''
    ablated_feature: Optional[str] = None
    single_class_training: bool = False


@dataclass
class EvalReport:
    macro_f1: float
    macro_precision: float
    macro_recall: float
    accuracy: float
    per_class: list
    confusion: list
    warnings: list = field(default_factory=list)
    metadata: RunMetadata = field(default_factory=RunMetadata)

    def to_dict(self) -> dict:
        data = asdict(self)
        data['schema_version'] = REPORT_SCHEMA_VERSION
        return data

    @classmethod
    def from_dict(cls, data: dict) -> 'EvalReport':
        data = dict(data)
        version = data.pop('schema_version', REPORT_SCHEMA_VERSION)
        if version != REPORT_SCHEMA_VERSION:
            raise InputError(f"Неподдерживаемая версия схемы отчёта: {version}")
        data['metadata'] = RunMetadata(**data.get('metadata', {}))
        return cls(**data)

    @property
    def confusion_matrix(self) -> ConfusionMatrix:
        return ConfusionMatrix(np.asarray(self.confusion))


def confusion_matrix(preds: Sequence[int], labels: Sequence[int], num_classes: int = NUM_CLASSES) -> ConfusionMatrix:
    if len(preds) != len(labels):
        raise InputError(f"Длины не совпадают: {len(preds)} предсказаний, {len(labels)} меток")
    if not len(preds):
        raise InputError("Пустые предсказания")
    for value in list(preds) + list(labels):
        if not 0 <= int(value) < num_classes:
            raise InputError(f"Класс вне диапазона 0..{num_classes - 1}: {value}")
    matrix = sk_confusion_matrix(list(labels), list(preds), labels=list(range(num_classes)))
    return ConfusionMatrix(matrix)


def _safe_ratio(numerator: float, denominator: float) -> tuple:
    if denominator == 0:
        return 0.0, True
    return numerator / denominator, False


def macro_metrics(cm: ConfusionMatrix, metadata: Optional[RunMetadata] = None,
                  log_warnings: bool = True) -> EvalReport:
    """Precision/recall/F1 по классам и их невзвешенное среднее; 0/0 считается 0"""
    m = cm.matrix
    if cm.total == 0:
        raise InputError("Матрица ошибок пуста")

    diagonal = np.diag(m).astype(np.float64)
    predicted = m.sum(axis=0).astype(np.float64)
    actual = m.sum(axis=1).astype(np.float64)

    per_class = []
    warnings = []
    for c in range(cm.num_classes):
        precision, p_undefined = _safe_ratio(diagonal[c], predicted[c])
        recall, r_undefined = _safe_ratio(diagonal[c], actual[c])
        f1, f_undefined = _safe_ratio(2 * precision * recall, precision + recall)
        if p_undefined:
            warnings.append(f"класс {c}: precision 0/0 принята за 0")
        if r_undefined:
            warnings.append(f"класс {c}: recall 0/0 принят за 0")
        if f_undefined and not (p_undefined and r_undefined):
            warnings.append(f"класс {c}: F1 0/0 принята за 0")
        per_class.append({
            'precision': precision,
            'recall': recall,
            'f1': f1,
            'support': int(actual[c]),
        })

    if log_warnings:
        for message in warnings:
            logger.warning(message)

    return EvalReport(
        macro_f1=float(np.mean([c['f1'] for c in per_class])),
        macro_precision=float(np.mean([c['precision'] for c in per_class])),
        macro_recall=float(np.mean([c['recall'] for c in per_class])),
        accuracy=float(diagonal.sum() / cm.total),
        per_class=per_class,
        confusion=cm.tolist(),
        warnings=warnings,
        metadata=metadata or RunMetadata(),
    )


def evaluate_predictions(preds, labels, metadata: Optional[RunMetadata] = None) -> EvalReport:
    return macro_metrics(confusion_matrix(preds, labels), metadata)


def macro_f1_score(preds, labels) -> float:
    """Макро-F1 без предупреждений в лог (для валидации на каждой эпохе)"""
    return macro_metrics(confusion_matrix(preds, labels), log_warnings=False).macro_f1


def config_hash(config_dict: dict) -> str:
    payload = json.dumps(config_dict, sort_keys=True, ensure_ascii=False, default=str)
    return hashlib.sha256(payload.encode('utf-8')).hexdigest()[:12]


def config_diff(left: dict, right: dict, prefix: str = '') -> list:
    """Список ключей (через точку), значения которых различаются"""
    keys = sorted(set(left) | set(right))
    diff = []
    for key in keys:
        path = f"{prefix}{key}"
        a, b = left.get(key), right.get(key)
        if isinstance(a, dict) and isinstance(b, dict):
            diff.extend(config_diff(a, b, prefix=f"{path}."))
        elif a != b:
            diff.append(path)
    return diff


def write_report(report: EvalReport, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + '\n', encoding='utf-8')


def read_report(path) -> EvalReport:
    return EvalReport.from_dict(json.loads(Path(path).read_text(encoding='utf-8')))


def render_results_table(rows: Sequence[tuple], show_published: bool = True) -> str:
    """Таблица сравнения моделей: Method | F1 Score | Precision | Recall | Accuracy"""
    header = f"{'Method':<26}{'F1 Score':>10}{'Precision':>11}{'Recall':>9}{'Accuracy':>10}"
    lines = [header, '-' * len(header)]
    for name, report in rows:
        title = METHOD_TITLES.get(name, name)
        line = (
            f"{title:<26}{report.macro_f1:>10.3f}{report.macro_precision:>11.3f}"
            f"{report.macro_recall:>9.3f}{report.accuracy:>10.3f}"
        )
        if show_published and name in PUBLISHED_RESULTS:
            f1, precision, recall, accuracy = PUBLISHED_RESULTS[name]
            line += f"   (опубл.: {f1:.3f} {precision:.3f} {recall:.3f} {accuracy:.3f})"
        lines.append(line)
    return '\n'.join(lines) + '\n'


def render_ablation_table(base: EvalReport, rows: Sequence[tuple], show_published: bool = True) -> str:
    """Таблица абляции: Feature removed | F1 Score | Accuracy"""
    header = f"{'Feature removed':<18}{'F1 Score':>10}{'Accuracy':>10}"
    lines = [header, '-' * len(header)]

    def _line(title, feature, report):
        line = f"{title:<18}{report.macro_f1:>10.3f}{report.accuracy:>10.3f}"
        if show_published and feature in PUBLISHED_ABLATION:
            f1, accuracy = PUBLISHED_ABLATION[feature]
            line += f"   (опубл.: {f1:.3f} {accuracy:.3f})"
        return line

    lines.append(_line('ViralBERT', None, base))
    lines.append('-' * len(header))
    for feature, report in rows:
        lines.append(_line(FEATURE_TITLES.get(feature, feature), feature, report))
    return '\n'.join(lines) + '\n'


def ablated_config(base_config, feature: Optional[str]):
    """Копия RunConfig, отличающаяся от базовой ровно одним признаком"""
    if not feature:
        return base_config
    if feature not in ABLATION_FEATURES:
        raise ImproperlyConfigured(
            f"Неизвестный признак для абляции: {feature!r}; допустимы {', '.join(ABLATION_FEATURES)}"
        )
    if feature == SENTIMENT_FEATURE:
        return base_config.replace_model(use_sentiment=False)
    if feature not in base_config.features.order:
        raise ImproperlyConfigured(f"Признак {feature!r} уже отсутствует в базовом конфиге")
    order = tuple(name for name in base_config.features.order if name != feature)
    return base_config.replace_features(order=order)


def ablation_run(base_config, feature: Optional[str], splits, seed: int) -> EvalReport:
    """Обучает с нуля модель без одного признака и оценивает её на test.

    feature=None - контрольный прогон с базовым конфигом.
    """
    from .pipeline import run_viralbert

    config = ablated_config(base_config, feature).with_overrides(seed=seed)
    logger.info("Абляция: удалён признак %s", feature or '(нет)')
    result = run_viralbert(config, splits, model_name='viralbert', ablated_feature=feature)
    return result.report
