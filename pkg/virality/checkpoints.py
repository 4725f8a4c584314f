"""Каталог чекпойнта: веса энкодера, головы тональности и классификатора плюс
checkpoint.json со снимком конфига, порядком признаков, сидом и скейлером."""
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import torch

from .config import RunConfig
from .evaluation import config_diff
from .exceptions import CheckpointMismatchError
from .features import ScalerState
from .network import ViralBert, ViralBertConfig, build_viralbert

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1
METADATA_FILE = 'checkpoint.json'
ENCODER_FILE = 'encoder.pt'
SENTIMENT_FILE = 'sentiment.pt'
CLASSIFIER_FILE = 'classifier.pt'


@dataclass
class LoadedCheckpoint:
    model: ViralBert
    encoder: object
    run_config: RunConfig
    scaler: Optional[ScalerState]
    metadata: dict


def save_checkpoint(directory, model: ViralBert, encoder, run_config: RunConfig,
                    scaler: Optional[ScalerState] = None, history=None) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    torch.save(model.text_encoder.state_dict(), directory / ENCODER_FILE)
    if model.sentiment_head is not None:
        torch.save(model.sentiment_head.state_dict(), directory / SENTIMENT_FILE)
    else:
        (directory / SENTIMENT_FILE).unlink(missing_ok=True)
    torch.save(model.classifier.state_dict(), directory / CLASSIFIER_FILE)

    metadata = {
        'version': CHECKPOINT_VERSION,
        'model_config': model.config.to_dict(),
        'run_config': run_config.to_dict(),
        'feature_order': list(run_config.features.order),
        'parse_text': run_config.features.parse_text,
        'seed': run_config.seed,
        'text_vocab': encoder.text_tokenizer.vocab_id,
        'sentiment_vocab': encoder.sentiment_tokenizer.vocab_id if model.sentiment_head is not None else None,
        'x_cls_dim': model.x_cls_dim,
        'scaler': scaler.to_dict() if scaler else None,
        'best_epoch': history.best_epoch if history else None,
        'best_val_macro_f1': history.best_val_macro_f1 if history else None,
    }
    (directory / METADATA_FILE).write_text(
        json.dumps(metadata, indent=2, sort_keys=True, ensure_ascii=False) + '\n', encoding='utf-8'
    )
    logger.info("Чекпойнт сохранён в %s", directory)
    return directory


def read_checkpoint_metadata(directory) -> dict:
    path = Path(directory) / METADATA_FILE
    if not path.exists():
        raise CheckpointMismatchError(f"Чекпойнт не найден: {path}")
    metadata = json.loads(path.read_text(encoding='utf-8'))
    if metadata.get('version') != CHECKPOINT_VERSION:
        raise CheckpointMismatchError(f"{path}: неподдерживаемая версия чекпойнта {metadata.get('version')}")
    return metadata


def _load_state(module, path: Path):
    if not path.exists():
        raise CheckpointMismatchError(f"Нет файла весов: {path}")
    state = torch.load(path, map_location='cpu', weights_only=True)
    try:
        module.load_state_dict(state)
    except RuntimeError as exc:
        raise CheckpointMismatchError(f"{path}: размерности не совпадают с конфигом ({exc})") from exc


def load_checkpoint(directory, run_config: Optional[RunConfig] = None, cache_dir=None) -> LoadedCheckpoint:
    """Восстанавливает модель для инференса.

    Если передан run_config, блоки модели и порядок признаков обязаны совпасть со
    снимком в чекпойнте, иначе CheckpointMismatchError.
    """
    directory = Path(directory)
    metadata = read_checkpoint_metadata(directory)
    stored_config = RunConfig.from_dict(metadata['run_config'])

    if run_config is not None:
        expected = {
            'model': run_config.viralbert_config().to_dict(),
            'feature_order': list(run_config.features.order),
            'parse_text': run_config.features.parse_text,
        }
        actual = {
            'model': metadata['model_config'],
            'feature_order': metadata['feature_order'],
            'parse_text': metadata['parse_text'],
        }
        diff = config_diff(expected, actual)
        if diff:
            raise CheckpointMismatchError(
                f"Конфиг не совпадает с чекпойнтом {directory}: {', '.join(diff)}"
            )

    model_config = ViralBertConfig.from_dict(metadata['model_config'])
    model, encoder = build_viralbert(model_config, metadata['seed'], cache_dir=cache_dir)

    if encoder.text_tokenizer.vocab_id != metadata['text_vocab']:
        raise CheckpointMismatchError(
            f"Словарь {encoder.text_tokenizer.vocab_id!r} не совпадает с {metadata['text_vocab']!r}"
        )
    if model.x_cls_dim != metadata['x_cls_dim']:
        raise CheckpointMismatchError(
            f"Размерность X_CLS {model.x_cls_dim} не совпадает с {metadata['x_cls_dim']}"
        )

    _load_state(model.text_encoder, directory / ENCODER_FILE)
    if model.sentiment_head is not None:
        _load_state(model.sentiment_head, directory / SENTIMENT_FILE)
    _load_state(model.classifier, directory / CLASSIFIER_FILE)
    model.eval()

    scaler = ScalerState.from_dict(metadata['scaler']) if metadata.get('scaler') else None
    logger.info("Чекпойнт загружен из %s (лучшая эпоха %s)", directory, metadata.get('best_epoch'))
    return LoadedCheckpoint(model=model, encoder=encoder, run_config=stored_config, scaler=scaler, metadata=metadata)
