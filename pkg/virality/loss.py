"""Class-Balanced Focal Loss для четырёх длиннохвостых классов виральности."""
import logging
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np
import torch
import torch.nn.functional as F
from django.core.exceptions import ImproperlyConfigured
from torch import nn

from .exceptions import DomainError, InputError

logger = logging.getLogger(__name__)

DEFAULT_BETA = 0.9999
DEFAULT_GAMMA = 2.0


@dataclass(frozen=True)
class ClassBalanceConfig:
    beta: float = DEFAULT_BETA
    gamma: float = DEFAULT_GAMMA
    # n_y; None - посчитать по обучающей выборке
    class_counts: Optional[tuple] = None

    def __post_init__(self):
        if not 0 <= self.beta < 1:
            raise ImproperlyConfigured(f"beta вне [0, 1): {self.beta}")
        if self.gamma < 0:
            raise ImproperlyConfigured(f"gamma должна быть >= 0, получено {self.gamma}")

    def with_counts(self, counts: Sequence[int]) -> 'ClassBalanceConfig':
        return ClassBalanceConfig(beta=self.beta, gamma=self.gamma, class_counts=tuple(int(c) for c in counts))

    def to_dict(self) -> dict:
        data = asdict(self)
        if self.class_counts is not None:
            data['class_counts'] = list(self.class_counts)
        return data


def raw_effective_number_weights(config: ClassBalanceConfig) -> np.ndarray:
    """w_y = (1 - beta) / (1 - beta^n_y)"""
    if config.class_counts is None:
        raise DomainError("class_counts не заданы")
    counts = np.asarray(config.class_counts, dtype=np.float64)
    if np.any(counts < 1):
        raise DomainError(f"Все n_y должны быть >= 1, получено {list(config.class_counts)}")
    if config.beta == 0:
        return np.ones_like(counts)
    # 1 - beta^n через expm1, чтобы не терять точность при beta -> 1
    effective_number = -np.expm1(counts * np.log(config.beta))
    return (1.0 - config.beta) / effective_number


def effective_number_weights(config: ClassBalanceConfig) -> np.ndarray:
    """Веса классов, нормированные так, что их сумма равна числу классов"""
    raw = raw_effective_number_weights(config)
    return raw * len(raw) / raw.sum()


def cb_focal_loss(logits: torch.Tensor, labels: torch.Tensor, config: ClassBalanceConfig,
                  weights: Optional[torch.Tensor] = None) -> torch.Tensor:
    """Среднее по батчу w_y * (1 - p_y)^gamma * (-log p_y), p = softmax(logits)"""
    if logits.ndim != 2:
        raise InputError(f"Ожидаются логиты формы [B, C], получено {tuple(logits.shape)}")
    if logits.shape[0] != labels.shape[0]:
        raise InputError(f"Размеры батча не совпадают: {logits.shape[0]} логитов, {labels.shape[0]} меток")
    num_classes = logits.shape[1]
    if labels.numel() and (labels.min() < 0 or labels.max() >= num_classes):
        raise InputError(f"Метки вне диапазона 0..{num_classes - 1}")

    if weights is None:
        weights = torch.as_tensor(effective_number_weights(config), dtype=logits.dtype, device=logits.device)
    if weights.shape[0] != num_classes:
        raise InputError(f"Весов {weights.shape[0]}, классов {num_classes}")

    # log_softmax считает log-sum-exp устойчиво
    log_p = F.log_softmax(logits, dim=-1).gather(1, labels.unsqueeze(1)).squeeze(1)
    p = log_p.exp()
    # при 0 < gamma < 1 производная степени в нуле бесконечна
    focal = (1.0 - p).clamp_min(torch.finfo(logits.dtype).tiny).pow(config.gamma)
    loss = weights.to(logits.dtype)[labels] * focal * (-log_p)
    return loss.mean()


class ClassBalancedFocalLoss(nn.Module):

    def __init__(self, config: ClassBalanceConfig):
        super().__init__()
        self.config = config
        weights = effective_number_weights(config)
        self.register_buffer('weights', torch.tensor(weights, dtype=torch.float32))
        logger.info(
            "CB focal loss: beta=%s, gamma=%s, n_y=%s, веса=%s",
            config.beta, config.gamma, list(config.class_counts), np.round(weights, 6).tolist(),
        )

    def forward(self, logits: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
        return cb_focal_loss(logits, labels, self.config, weights=self.weights)
