"""Текстовый энкодер (эмбеддинг стартового токена h_B) и голова тональности S.

Два бэкенда с одинаковыми контрактами:
- 'toy-random': маленький случайно инициализированный трансформер, для тестов и
  настольных прогонов;
- любой другой id: предобученные веса через transformers (BERTweet-подобный
  текстовый энкодер и трёхклассовая модель тональности TweetEval).
"""
import logging
import re
import zlib
from contextlib import contextmanager
from dataclasses import asdict, dataclass
from typing import Callable, Sequence

import torch
import torch.nn.functional as F
from django.conf import settings
from django.core.exceptions import ImproperlyConfigured
from torch import nn

from .exceptions import InputError, SequenceLengthError

try:
    import transformers
    TRANSFORMERS_AVAILABLE = True
except ImportError:
    TRANSFORMERS_AVAILABLE = False

logger = logging.getLogger(__name__)

TOY_BACKBONE = 'toy-random'

PAD_ID = 0
CLS_ID = 1
SEP_ID = 2
# id 3 зарезервирован, хэшированные токены начинаются с 4
NUM_SPECIAL_TOKENS = 4

TOKEN_RE = re.compile(r'\w+|[^\w\s]', re.UNICODE)

SENTIMENT_LABELS = ('negative', 'neutral', 'positive')


@dataclass(frozen=True)
class EncoderConfig:
    hidden_dim: int = 32
    max_sequence_length: int = 128
    backbone_id: str = TOY_BACKBONE
    # пусто - берётся из настроек (для toy-random тональность тоже игрушечная)
    sentiment_backbone_id: str = ''
    # параметры игрушечного бэкенда
    vocab_size: int = 4096
    num_layers: int = 2
    num_heads: int = 4
    dropout: float = 0.1

    def __post_init__(self):
        if self.hidden_dim < 1:
            raise ImproperlyConfigured(f"hidden_dim должен быть >= 1, получено {self.hidden_dim}")
        if self.max_sequence_length < 8:
            raise ImproperlyConfigured(
                f"max_sequence_length должен быть >= 8, получено {self.max_sequence_length}"
            )
        if not 0 <= self.dropout < 1:
            raise ImproperlyConfigured(f"dropout энкодера вне [0, 1): {self.dropout}")
        if self.is_toy:
            if self.hidden_dim % self.num_heads:
                raise ImproperlyConfigured(
                    f"hidden_dim={self.hidden_dim} не делится на num_heads={self.num_heads}"
                )
            if self.vocab_size <= NUM_SPECIAL_TOKENS:
                raise ImproperlyConfigured(f"Слишком маленький словарь: {self.vocab_size}")

    @property
    def is_toy(self) -> bool:
        return self.backbone_id == TOY_BACKBONE

    def resolved_sentiment_backbone(self) -> str:
        if self.sentiment_backbone_id:
            return self.sentiment_backbone_id
        if self.is_toy:
            return TOY_BACKBONE
        return settings.VIRALITY_SENTIMENT_BACKBONE

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SentimentDistribution:
    p_negative: float
    p_neutral: float
    p_positive: float

    def __post_init__(self):
        values = self.as_tuple()
        if any(p < 0 or p > 1 for p in values) or abs(sum(values) - 1.0) > 1e-6:
            raise InputError(f"Некорректное распределение тональности: {values}")

    def as_tuple(self) -> tuple:
        return self.p_negative, self.p_neutral, self.p_positive


@contextmanager
def inference_mode(module: nn.Module):
    """Временно переводит модуль в eval и отключает градиенты"""
    was_training = module.training
    module.eval()
    try:
        with torch.no_grad():
            yield module
    finally:
        module.train(was_training)


class SegmentTokenizer:
    """Раскладка как во входе энкодера: start, seg0, sep, seg1, sep, ..."""

    cls_token_id = CLS_ID
    sep_token_id = SEP_ID
    pad_token_id = PAD_ID
    vocab_id = ''

    def encode_segment(self, text: str) -> list:
        raise NotImplementedError

    def tokenize(self, segments: Sequence[str], max_length: int) -> list:
        if not segments:
            raise InputError("Пустой список сегментов")
        ids = [self.cls_token_id]
        for segment in segments:
            ids.extend(self.encode_segment(segment))
            ids.append(self.sep_token_id)
        if len(ids) > max_length:
            # стартовый токен и финальный разделитель сохраняются
            ids = ids[:max_length - 1] + [self.sep_token_id]
        return ids


class ToyTokenizer(SegmentTokenizer):
    """Словарь без обучения: слово -> crc32 по модулю размера словаря"""

    def __init__(self, vocab_size: int):
        self.vocab_size = vocab_size
        self.vocab_id = f'toy-crc32-{vocab_size}'

    def encode_segment(self, text: str) -> list:
        buckets = self.vocab_size - NUM_SPECIAL_TOKENS
        return [
            NUM_SPECIAL_TOKENS + zlib.crc32(token.encode('utf-8')) % buckets
            for token in TOKEN_RE.findall(text.lower())
        ]


class PretrainedTokenizer(SegmentTokenizer):

    def __init__(self, backbone_id: str, cache_dir: str):
        _require_transformers(backbone_id)
        kwargs = {'cache_dir': cache_dir}
        if 'bertweet' in backbone_id.lower():
            kwargs['normalization'] = True
        self._tokenizer = transformers.AutoTokenizer.from_pretrained(backbone_id, **kwargs)
        self.cls_token_id = self._tokenizer.cls_token_id
        self.sep_token_id = self._tokenizer.sep_token_id
        self.pad_token_id = self._tokenizer.pad_token_id
        self.vocab_id = backbone_id

    def encode_segment(self, text: str) -> list:
        return self._tokenizer.encode(text, add_special_tokens=False)


class ToyTextEncoder(nn.Module):

    def __init__(self, config: EncoderConfig):
        super().__init__()
        self.hidden_dim = config.hidden_dim
        self.max_sequence_length = config.max_sequence_length
        self.token_embedding = nn.Embedding(config.vocab_size, config.hidden_dim, padding_idx=PAD_ID)
        self.position_embedding = nn.Embedding(config.max_sequence_length, config.hidden_dim)
        layer = nn.TransformerEncoderLayer(
            d_model=config.hidden_dim,
            nhead=config.num_heads,
            dim_feedforward=4 * config.hidden_dim,
            dropout=config.dropout,
            batch_first=True,
        )
        self.encoder = nn.TransformerEncoder(layer, num_layers=config.num_layers, enable_nested_tensor=False)
        self.norm = nn.LayerNorm(config.hidden_dim)

    def forward(self, input_ids: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
        batch_size, seq_len = input_ids.shape
        if seq_len > self.max_sequence_length:
            raise SequenceLengthError(
                f"Длина {seq_len} больше max_sequence_length={self.max_sequence_length}"
            )
        positions = torch.arange(seq_len, device=input_ids.device).unsqueeze(0).expand(batch_size, -1)
        x = self.token_embedding(input_ids) + self.position_embedding(positions)
        x = self.encoder(x, src_key_padding_mask=attention_mask == 0)
        return self.norm(x[:, 0])


class PretrainedTextEncoder(nn.Module):

    def __init__(self, config: EncoderConfig, cache_dir: str):
        super().__init__()
        _require_transformers(config.backbone_id)
        self.backbone = transformers.AutoModel.from_pretrained(config.backbone_id, cache_dir=cache_dir)
        self.hidden_dim = self.backbone.config.hidden_size
        self.max_sequence_length = config.max_sequence_length
        if self.hidden_dim != config.hidden_dim:
            raise ImproperlyConfigured(
                f"{config.backbone_id}: hidden_size={self.hidden_dim}, в конфиге {config.hidden_dim}"
            )

    def forward(self, input_ids: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
        if input_ids.shape[1] > self.max_sequence_length:
            raise SequenceLengthError(
                f"Длина {input_ids.shape[1]} больше max_sequence_length={self.max_sequence_length}"
            )
        output = self.backbone(input_ids=input_ids, attention_mask=attention_mask)
        return output.last_hidden_state[:, 0]


class ToySentimentHead(nn.Module):
    """Усреднение эмбеддингов текста и линейный слой на три класса"""

    def __init__(self, config: EncoderConfig):
        super().__init__()
        self.embedding = nn.Embedding(config.vocab_size, config.hidden_dim, padding_idx=PAD_ID)
        self.output = nn.Linear(config.hidden_dim, len(SENTIMENT_LABELS))

    def logits(self, input_ids: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
        embedded = self.embedding(input_ids)
        mask = attention_mask.unsqueeze(-1).to(embedded.dtype)
        pooled = (embedded * mask).sum(dim=1) / mask.sum(dim=1).clamp_min(1.0)
        return self.output(pooled)

    def forward(self, input_ids: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
        return F.softmax(self.logits(input_ids, attention_mask), dim=-1)


class PretrainedSentimentHead(nn.Module):

    def __init__(self, backbone_id: str, cache_dir: str):
        super().__init__()
        _require_transformers(backbone_id)
        self.backbone = transformers.AutoModelForSequenceClassification.from_pretrained(
            backbone_id, cache_dir=cache_dir
        )
        if self.backbone.config.num_labels != len(SENTIMENT_LABELS):
            raise ImproperlyConfigured(
                f"{backbone_id}: ожидается 3 класса тональности, получено {self.backbone.config.num_labels}"
            )

    def logits(self, input_ids: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
        return self.backbone(input_ids=input_ids, attention_mask=attention_mask).logits

    def forward(self, input_ids: torch.Tensor, attention_mask: torch.Tensor) -> torch.Tensor:
        return F.softmax(self.logits(input_ids, attention_mask), dim=-1)


class TweetEncoder:
    """Токенизаторы и модули обоих энкодеров одного бэкбона"""

    def __init__(self, config, text_tokenizer, text_encoder, sentiment_tokenizer, sentiment_head):
        self.config = config
        self.text_tokenizer = text_tokenizer
        self.text_encoder = text_encoder
        self.sentiment_tokenizer = sentiment_tokenizer
        self.sentiment_head = sentiment_head

    @property
    def pad_token_id(self) -> int:
        return self.text_tokenizer.pad_token_id

    @property
    def sentiment_pad_token_id(self) -> int:
        return self.sentiment_tokenizer.pad_token_id

    def tokenize(self, segments: Sequence[str]) -> list:
        return self.text_tokenizer.tokenize(segments, self.config.max_sequence_length)

    def tokenize_sentiment(self, text: str) -> list:
        """Вход головы тональности: только сырой текст твита"""
        if not text or not text.strip():
            raise InputError("Пустой текст для оценки тональности")
        return self.sentiment_tokenizer.tokenize([text], self.config.max_sequence_length)

    def encode(self, tokens: Sequence[int]) -> torch.Tensor:
        if not tokens or tokens[0] != self.text_tokenizer.cls_token_id:
            raise InputError("Последовательность должна начинаться со стартового токена")
        if len(tokens) > self.config.max_sequence_length:
            raise SequenceLengthError(
                f"Длина {len(tokens)} больше max_sequence_length={self.config.max_sequence_length}; "
                f"используйте tokenize() для обрезки"
            )
        input_ids = torch.tensor([list(tokens)], dtype=torch.long)
        with inference_mode(self.text_encoder):
            return self.text_encoder(input_ids, torch.ones_like(input_ids))[0]

    def sentiment_probs(self, text: str) -> SentimentDistribution:
        input_ids = torch.tensor([self.tokenize_sentiment(text)], dtype=torch.long)
        with inference_mode(self.sentiment_head):
            probs = self.sentiment_head(input_ids, torch.ones_like(input_ids))[0].double()
        # пересчёт в double, чтобы сумма держалась в 1e-6
        probs = (probs / probs.sum()).tolist()
        return SentimentDistribution(*probs)


def _require_transformers(backbone_id: str):
    if not TRANSFORMERS_AVAILABLE:
        raise ImproperlyConfigured(
            f"Для бэкбона {backbone_id!r} нужен пакет transformers (pip install transformers)"
        )


def build_encoder(config: EncoderConfig, seed: int, cache_dir=None) -> TweetEncoder:
    """Собирает TweetEncoder по id бэкбона из конфига"""
    if config.is_toy:
        tokenizer = ToyTokenizer(config.vocab_size)
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(seed)
            text_encoder = ToyTextEncoder(config)
            sentiment_head = ToySentimentHead(config)
        return TweetEncoder(config, tokenizer, text_encoder, tokenizer, sentiment_head)

    cache_dir = str(cache_dir or settings.VIRALITY_BACKBONE_CACHE)
    sentiment_backbone = config.resolved_sentiment_backbone()
    logger.info("Загрузка бэкбонов %s и %s (кэш %s)", config.backbone_id, sentiment_backbone, cache_dir)
    return TweetEncoder(
        config,
        PretrainedTokenizer(config.backbone_id, cache_dir),
        PretrainedTextEncoder(config, cache_dir),
        PretrainedTokenizer(sentiment_backbone, cache_dir),
        PretrainedSentimentHead(sentiment_backbone, cache_dir),
    )


def build_sentiment_scorer(config: EncoderConfig, seed: int, cache_dir=None) -> Callable[[str], SentimentDistribution]:
    """Только токенизатор и голова тональности: для признаков бейзлайнов"""
    if config.is_toy:
        # игрушечная голова инициализируется после текстового энкодера из того же сида
        return build_encoder(config, seed).sentiment_probs

    cache_dir = str(cache_dir or settings.VIRALITY_BACKBONE_CACHE)
    sentiment_backbone = config.resolved_sentiment_backbone()
    logger.info("Загрузка бэкбона тональности %s (кэш %s)", sentiment_backbone, cache_dir)
    encoder = TweetEncoder(
        config,
        None,
        None,
        PretrainedTokenizer(sentiment_backbone, cache_dir),
        PretrainedSentimentHead(sentiment_backbone, cache_dir),
    )
    return encoder.sentiment_probs


def get_status() -> dict:
    """Какие бэкенды доступны в текущем окружении"""
    backends = [TOY_BACKBONE]
    if TRANSFORMERS_AVAILABLE:
        backends.append('pretrained')
    return {
        'transformers': TRANSFORMERS_AVAILABLE,
        'transformers_version': transformers.__version__ if TRANSFORMERS_AVAILABLE else None,
        'torch_version': torch.__version__,
        'default_backbone': settings.VIRALITY_BACKBONE,
        'text_backbone': settings.VIRALITY_TEXT_BACKBONE,
        'sentiment_backbone': settings.VIRALITY_SENTIMENT_BACKBONE,
        'cache_dir': str(settings.VIRALITY_BACKBONE_CACHE),
        'backends': backends,
    }
