"""ViralBERT: X_CLS = h_B ⊕ S -> полносвязный tanh-слой -> dropout -> линейный слой на классы."""
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
import torch
import torch.nn.functional as F
from django.core.exceptions import ImproperlyConfigured
from torch import nn

from .corpus import NUM_CLASSES
from .encoder import SENTIMENT_LABELS, EncoderConfig, TweetEncoder, build_encoder, inference_mode
from .exceptions import InputError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ViralBertConfig:
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    use_numeric_features: bool = True
    use_sentiment: bool = True
    num_classes: int = NUM_CLASSES
    dropout: float = 0.1
    # 1 - плоская голова; больше - дополнительные tanh-слои той же ширины
    classifier_depth: int = 1

    def __post_init__(self):
        if self.num_classes < 2:
            raise ImproperlyConfigured(f"num_classes должен быть >= 2, получено {self.num_classes}")
        if not 0 <= self.dropout < 1:
            raise ImproperlyConfigured(f"dropout вне [0, 1): {self.dropout}")
        if self.classifier_depth < 1:
            raise ImproperlyConfigured(f"classifier_depth должен быть >= 1, получено {self.classifier_depth}")

    @property
    def sentiment_dim(self) -> int:
        return len(SENTIMENT_LABELS) if self.use_sentiment else 0

    @property
    def x_cls_dim(self) -> int:
        return self.encoder.hidden_dim + self.sentiment_dim

    @property
    def classifier_hidden(self) -> int:
        return self.x_cls_dim

    def to_dict(self) -> dict:
        data = asdict(self)
        data['classifier_hidden'] = self.classifier_hidden
        return data

    @classmethod
    def from_dict(cls, data: dict) -> 'ViralBertConfig':
        data = dict(data)
        data.pop('classifier_hidden', None)
        encoder = EncoderConfig(**data.pop('encoder', {}))
        return cls(encoder=encoder, **data)


@dataclass(frozen=True)
class EncodedExample:
    """Токенизированный вход энкодера, вход головы тональности и метка"""
    record_id: str
    input_ids: tuple
    sentiment_ids: tuple
    label: Optional[int] = None


def pad_sequences(sequences: Sequence[Sequence[int]], pad_id: int):
    width = max(len(s) for s in sequences)
    ids = torch.full((len(sequences), width), pad_id, dtype=torch.long)
    mask = torch.zeros((len(sequences), width), dtype=torch.long)
    for row, seq in enumerate(sequences):
        ids[row, :len(seq)] = torch.tensor(seq, dtype=torch.long)
        mask[row, :len(seq)] = 1
    return ids, mask


class ViralBert(nn.Module):

    def __init__(self, config: ViralBertConfig, text_encoder: nn.Module, sentiment_head: Optional[nn.Module] = None,
                 init_seed: int = 0, pad_token_id: int = 0, sentiment_pad_token_id: int = 0):
        super().__init__()
        if config.use_sentiment and sentiment_head is None:
            raise ImproperlyConfigured("use_sentiment=True, но голова тональности не передана")
        self.config = config
        self.pad_token_id = pad_token_id
        self.sentiment_pad_token_id = sentiment_pad_token_id
        self.text_encoder = text_encoder
        self.sentiment_head = sentiment_head if config.use_sentiment else None

        layers = []
        in_dim = config.x_cls_dim
        for _ in range(config.classifier_depth):
            layers += [nn.Linear(in_dim, config.classifier_hidden), nn.Tanh()]
            in_dim = config.classifier_hidden
        layers += [nn.Dropout(config.dropout), nn.Linear(in_dim, config.num_classes)]
        self.classifier = nn.Sequential(*layers)
        self.reset_classifier(init_seed)

    def reset_classifier(self, seed: int):
        """Равномерная инициализация U(-1/sqrt(fan_in), 1/sqrt(fan_in)) с фиксированным сидом"""
        generator = torch.Generator().manual_seed(seed)
        with torch.no_grad():
            for layer in self.classifier:
                if isinstance(layer, nn.Linear):
                    bound = 1.0 / math.sqrt(layer.in_features)
                    layer.weight.uniform_(-bound, bound, generator=generator)
                    layer.bias.uniform_(-bound, bound, generator=generator)

    @property
    def x_cls_dim(self) -> int:
        return self.config.x_cls_dim

    def fuse(self, input_ids, attention_mask, sentiment_ids=None, sentiment_mask=None) -> torch.Tensor:
        """X_CLS = h_B ⊕ S"""
        pooled = self.text_encoder(input_ids, attention_mask)
        if self.sentiment_head is None:
            return pooled
        if sentiment_ids is None:
            raise InputError("Для головы тональности нужны sentiment_ids")
        sentiment = self.sentiment_head(sentiment_ids, sentiment_mask)
        return torch.cat([pooled, sentiment.to(pooled.dtype)], dim=-1)

    def forward(self, input_ids, attention_mask, sentiment_ids=None, sentiment_mask=None) -> torch.Tensor:
        return self.classifier(self.fuse(input_ids, attention_mask, sentiment_ids, sentiment_mask))

    def collate(self, examples: Sequence[EncodedExample]) -> dict:
        if not examples:
            raise InputError("Пустой батч")
        input_ids, attention_mask = pad_sequences([e.input_ids for e in examples], self.pad_token_id)
        batch = {'input_ids': input_ids, 'attention_mask': attention_mask}
        if self.sentiment_head is not None:
            sentiment_ids, sentiment_mask = pad_sequences(
                [e.sentiment_ids for e in examples], self.sentiment_pad_token_id
            )
            batch['sentiment_ids'] = sentiment_ids
            batch['sentiment_mask'] = sentiment_mask
        return batch

    def forward_examples(self, examples: Sequence[EncodedExample]) -> torch.Tensor:
        return self(**self.collate(examples))


def labels_tensor(examples: Sequence[EncodedExample]) -> torch.Tensor:
    if any(e.label is None for e in examples):
        raise InputError("В батче есть примеры без метки")
    return torch.tensor([e.label for e in examples], dtype=torch.long)


def predict_from_logits(logits) -> list:
    """argmax по строкам; при равенстве - наименьший индекс класса"""
    if isinstance(logits, torch.Tensor):
        logits = logits.detach().cpu().numpy()
    return np.argmax(np.asarray(logits), axis=1).tolist()


def predict_proba(model: ViralBert, examples: Sequence[EncodedExample], batch_size: int = 32) -> np.ndarray:
    chunks = []
    with inference_mode(model):
        for start in range(0, len(examples), batch_size):
            logits = model.forward_examples(examples[start:start + batch_size])
            chunks.append(F.softmax(logits.double(), dim=-1).numpy())
    return np.concatenate(chunks, axis=0)


def predict(model: ViralBert, examples: Sequence[EncodedExample], batch_size: int = 32) -> list:
    predictions = []
    with inference_mode(model):
        for start in range(0, len(examples), batch_size):
            predictions.extend(predict_from_logits(model.forward_examples(examples[start:start + batch_size])))
    return predictions


def build_viralbert(config: ViralBertConfig, seed: int, cache_dir=None):
    """Модель и её TweetEncoder (токенизаторы нужны для кодирования записей)"""
    encoder = build_encoder(config.encoder, seed, cache_dir=cache_dir)
    model = ViralBert(
        config,
        encoder.text_encoder,
        encoder.sentiment_head if config.use_sentiment else None,
        init_seed=seed,
        pad_token_id=encoder.pad_token_id,
        sentiment_pad_token_id=encoder.sentiment_pad_token_id,
    )
    logger.info(
        "ViralBERT: H=%d, X_CLS=%d, скрытый слой=%d, тональность=%s, числовые признаки=%s",
        config.encoder.hidden_dim, config.x_cls_dim, config.classifier_hidden,
        config.use_sentiment, config.use_numeric_features,
    )
    return model, encoder
