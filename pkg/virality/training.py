"""Дообучение ViralBERT: AdamW, батчи по 32, ранняя остановка по макро-F1 на валидации."""
import copy
import logging
import time
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import torch
from django.core.exceptions import ImproperlyConfigured

from .encoder import inference_mode
from .evaluation import macro_f1_score
from .exceptions import InputError, TrainingDivergedError
from .loss import ClassBalanceConfig, ClassBalancedFocalLoss
from .network import EncodedExample, ViralBert, labels_tensor, predict_from_logits

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 32
    # энкодеры и классификационная голова обучаются с разными шагами
    learning_rate: float = 2e-5
    head_learning_rate: float = 1e-3
    weight_decay: float = 0.01
    max_epochs: int = 10
    patience: int = 3
    seed: int = 1
    loss: ClassBalanceConfig = field(default_factory=ClassBalanceConfig)

    def __post_init__(self):
        if self.batch_size < 1:
            raise ImproperlyConfigured(f"batch_size должен быть >= 1, получено {self.batch_size}")
        if self.patience < 1:
            raise ImproperlyConfigured(f"patience должен быть >= 1, получено {self.patience}")
        if self.max_epochs < 1:
            raise ImproperlyConfigured(f"max_epochs должен быть >= 1, получено {self.max_epochs}")
        if self.learning_rate <= 0 or self.head_learning_rate <= 0:
            raise ImproperlyConfigured("Шаг обучения должен быть положительным")
        if self.weight_decay < 0:
            raise ImproperlyConfigured(f"weight_decay не может быть отрицательным: {self.weight_decay}")

    def to_dict(self) -> dict:
        data = asdict(self)
        data['loss'] = self.loss.to_dict()
        return data


@dataclass(frozen=True)
class EncodedSplit:
    train: Sequence[EncodedExample]
    validation: Sequence[EncodedExample]
    test: Sequence[EncodedExample]


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    val_macro_f1: float
    seconds: float


@dataclass
class TrainHistory:
    epochs: list = field(default_factory=list)
    best_epoch: Optional[int] = None
    first_batch_loss: Optional[float] = None
    class_weights: list = field(default_factory=list)
    stopped_early: bool = False

    @property
    def best_val_macro_f1(self) -> Optional[float]:
        if self.best_epoch is None:
            return None
        return self.epochs[self.best_epoch - 1].val_macro_f1

    def metrics(self) -> dict:
        """Всё, кроме времени эпох: по этому сравниваются повторные запуски"""
        return {
            'epochs': [
                (e.epoch, e.train_loss, e.val_loss, e.val_macro_f1) for e in self.epochs
            ],
            'best_epoch': self.best_epoch,
            'first_batch_loss': self.first_batch_loss,
        }

    def to_dict(self) -> dict:
        data = asdict(self)
        data['best_val_macro_f1'] = self.best_val_macro_f1
        return data


@dataclass
class TrainResult:
    model: ViralBert
    history: TrainHistory
    best_state: dict


class EarlyStopping:
    """Остановка после `patience` эпох без строгого улучшения метрики"""

    def __init__(self, patience: int):
        self.patience = patience
        self.best_score = None
        self.best_epoch = None
        self.epochs_without_improvement = 0

    def step(self, epoch: int, score: float) -> bool:
        if self.best_score is None or score > self.best_score:
            self.best_score = score
            self.best_epoch = epoch
            self.epochs_without_improvement = 0
            return True
        self.epochs_without_improvement += 1
        return False

    @property
    def should_stop(self) -> bool:
        return self.epochs_without_improvement >= self.patience


def batch_indices(num_examples: int, batch_size: int, generator: torch.Generator) -> list:
    order = torch.randperm(num_examples, generator=generator).tolist()
    return [order[start:start + batch_size] for start in range(0, num_examples, batch_size)]


def compute_class_counts(examples: Sequence[EncodedExample], num_classes: int) -> list:
    counts = [0] * num_classes
    for example in examples:
        counts[example.label] += 1
    missing = [c for c, n in enumerate(counts) if n == 0]
    if missing:
        logger.warning("Классы %s отсутствуют в обучающей выборке, n_y принят равным 1", missing)
        counts = [max(n, 1) for n in counts]
    return counts


def evaluate_examples(model: ViralBert, examples: Sequence[EncodedExample], criterion, batch_size: int):
    """Средний лосс и предсказания в режиме инференса"""
    total_loss = 0.0
    predictions = []
    with inference_mode(model):
        for start in range(0, len(examples), batch_size):
            batch = examples[start:start + batch_size]
            logits = model.forward_examples(batch)
            total_loss += criterion(logits, labels_tensor(batch)).item() * len(batch)
            predictions.extend(predict_from_logits(logits))
    return total_loss / len(examples), predictions


def build_optimizer(model: ViralBert, config: TrainConfig) -> torch.optim.Optimizer:
    encoder_params = list(model.text_encoder.parameters())
    if model.sentiment_head is not None:
        encoder_params += list(model.sentiment_head.parameters())
    return torch.optim.AdamW(
        [
            {'params': encoder_params, 'lr': config.learning_rate},
            {'params': model.classifier.parameters(), 'lr': config.head_learning_rate},
        ],
        weight_decay=config.weight_decay,
    )


def train(model: ViralBert, splits: EncodedSplit, config: TrainConfig) -> TrainResult:
    train_examples = list(splits.train)
    val_examples = list(splits.validation)
    if not train_examples:
        raise InputError("Пустая обучающая выборка")
    if not val_examples:
        raise InputError("Пустая валидационная выборка")

    loss_config = config.loss
    if loss_config.class_counts is None:
        loss_config = loss_config.with_counts(compute_class_counts(train_examples, model.config.num_classes))
    criterion = ClassBalancedFocalLoss(loss_config)

    torch.manual_seed(config.seed)
    generator = torch.Generator().manual_seed(config.seed)
    optimizer = build_optimizer(model, config)

    history = TrainHistory(class_weights=criterion.weights.tolist())
    stopper = EarlyStopping(config.patience)
    best_state = copy.deepcopy(model.state_dict())
    val_labels = [e.label for e in val_examples]

    for epoch in range(1, config.max_epochs + 1):
        started = time.perf_counter()
        model.train()
        epoch_loss = 0.0

        for batch_number, indices in enumerate(batch_indices(len(train_examples), config.batch_size, generator)):
            batch = [train_examples[i] for i in indices]
            logits = model.forward_examples(batch)
            loss = criterion(logits, labels_tensor(batch))
            if not torch.isfinite(loss):
                raise TrainingDivergedError(
                    f"Эпоха {epoch}, батч {batch_number}: лосс {loss.item()}; "
                    f"уменьшите шаг обучения или проверьте входные признаки"
                )
            if history.first_batch_loss is None:
                history.first_batch_loss = loss.item()

            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            epoch_loss += loss.item() * len(batch)

        val_loss, val_predictions = evaluate_examples(model, val_examples, criterion, config.batch_size)
        val_f1 = macro_f1_score(val_predictions, val_labels)
        record = EpochRecord(
            epoch=epoch,
            train_loss=epoch_loss / len(train_examples),
            val_loss=val_loss,
            val_macro_f1=val_f1,
            seconds=time.perf_counter() - started,
        )
        history.epochs.append(record)
        logger.info(
            "Эпоха %d: train loss %.4f, val loss %.4f, val macro-F1 %.4f (%.1f с)",
            epoch, record.train_loss, val_loss, val_f1, record.seconds,
        )

        if stopper.step(epoch, val_f1):
            best_state = copy.deepcopy(model.state_dict())
        if stopper.should_stop:
            history.stopped_early = True
            logger.info("Ранняя остановка: %d эпох без улучшения macro-F1", config.patience)
            break

    history.best_epoch = stopper.best_epoch
    model.load_state_dict(best_state)
    logger.info("Лучшая эпоха %d, val macro-F1 %.4f", history.best_epoch, history.best_val_macro_f1)
    return TrainResult(model=model, history=history, best_state=best_state)
