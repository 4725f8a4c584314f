"""Связка модулей: подготовка корпуса, кодирование записей и полный прогон ViralBERT.

Раскладка каталога запуска:
    config.json, train/validation/test.jsonl, split_manifest.json, corpus_stats.json,
    checkpoint/, history.json, reports/<model>.json
"""
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .checkpoints import save_checkpoint
from .config import RunConfig, write_run_config
from .corpus import (
    DatasetSplit,
    corpus_statistics,
    filter_records,
    load_tweet_records,
    rebalance_zero_class,
    split_dataset,
    write_tweet_records,
)
from .evaluation import EvalReport, RunMetadata, config_hash, evaluate_predictions, read_report, write_report
from .features import extract_features, fit_minmax, serialize_model_input
from .network import EncodedExample, ViralBert, build_viralbert, predict
from .training import EncodedSplit, TrainHistory, train

logger = logging.getLogger(__name__)

SPLIT_NAMES = ('train', 'validation', 'test')
MANIFEST_FILE = 'split_manifest.json'
STATS_FILE = 'corpus_stats.json'
CONFIG_FILE = 'config.json'
HISTORY_FILE = 'history.json'
CHECKPOINT_DIR = 'checkpoint'
REPORTS_DIR = 'reports'
ABLATION_DIR = 'ablation'


@dataclass
class ViralBertRun:
    model: ViralBert
    encoder: object
    history: TrainHistory
    report: EvalReport
    config: RunConfig


def write_json(data, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + '\n', encoding='utf-8')


def report_path(run_dir, name: str) -> Path:
    return Path(run_dir) / REPORTS_DIR / f'{name}.json'


def ablation_report_path(run_dir, feature) -> Path:
    return Path(run_dir) / REPORTS_DIR / ABLATION_DIR / f"{feature or 'none'}.json"


def read_matching_report(run_dir, name: str, config: RunConfig) -> Optional[EvalReport]:
    """Сохранённый отчёт, если он получен с тем же сидом и конфигом, иначе None"""
    path = report_path(run_dir, name)
    if not path.exists():
        return None
    report = read_report(path)
    if report.metadata.seed != config.seed or report.metadata.config_hash != config_hash(config.to_dict()):
        logger.warning(
            "Отчёт %s получен с другим конфигом (seed %s, хэш %s), не используется",
            path, report.metadata.seed, report.metadata.config_hash,
        )
        return None
    return report


def prepare_corpus(config: RunConfig) -> DatasetSplit:
    """Метки -> фильтры -> ребалансировка класса 0 -> разбиение 80:10:10"""
    records = load_tweet_records(config.corpus_path)
    records = filter_records(
        records,
        topics=config.corpus.topics or None,
        english_only=config.corpus.english_only,
        original_only=config.corpus.original_only,
    )
    if config.corpus.rebalance:
        records = rebalance_zero_class(records, config.seed)
    split = split_dataset(records, config.seed)
    logger.info("Разбиение: train %d, validation %d, test %d", *split.sizes())
    return split


def write_prepared(split: DatasetSplit, run_dir) -> dict:
    run_dir = Path(run_dir)
    for name in SPLIT_NAMES:
        write_tweet_records(getattr(split, name), run_dir / f'{name}.jsonl')
    write_json(split.manifest(), run_dir / MANIFEST_FILE)

    records = list(split.train) + list(split.validation) + list(split.test)
    statistics = corpus_statistics(records)
    write_json(statistics, run_dir / STATS_FILE)
    return statistics


def load_prepared(run_dir) -> DatasetSplit:
    run_dir = Path(run_dir)
    manifest_path = run_dir / MANIFEST_FILE
    if not manifest_path.exists():
        raise FileNotFoundError(
            f"Нет подготовленных данных: {manifest_path} (сначала выполните prepare)"
        )
    manifest = json.loads(manifest_path.read_text(encoding='utf-8'))
    parts = {name: tuple(load_tweet_records(run_dir / f'{name}.jsonl')) for name in SPLIT_NAMES}
    return DatasetSplit(seed=manifest['seed'], **parts)


def model_segments(record, config: RunConfig) -> list:
    if not config.model.use_numeric_features:
        return [record.text]
    features = extract_features(record, parse_text=config.features.parse_text)
    return serialize_model_input(record.text, features, config.features.order)


def encode_records(records: Sequence, encoder, config: RunConfig, with_labels: bool = True) -> list:
    examples = []
    for record in records:
        sentiment_ids = encoder.tokenize_sentiment(record.text) if config.model.use_sentiment else ()
        examples.append(EncodedExample(
            record_id=record.id,
            input_ids=tuple(encoder.tokenize(model_segments(record, config))),
            sentiment_ids=tuple(sentiment_ids),
            label=record.class_index if with_labels else None,
        ))
    return examples


def encode_split(split: DatasetSplit, encoder, config: RunConfig) -> EncodedSplit:
    return EncodedSplit(
        train=encode_records(split.train, encoder, config),
        validation=encode_records(split.validation, encoder, config),
        test=encode_records(split.test, encoder, config),
    )


def evaluate_model(model: ViralBert, examples: Sequence[EncodedExample], metadata: Optional[RunMetadata] = None,
                   batch_size: int = 32) -> EvalReport:
    predictions = predict(model, examples, batch_size=batch_size)
    return evaluate_predictions(predictions, [e.label for e in examples], metadata)


def run_viralbert(config: RunConfig, split: DatasetSplit, model_name: str = 'viralbert',
                  ablated_feature: Optional[str] = None, run_dir=None) -> ViralBertRun:
    """Собирает модель по конфигу, обучает на split.train и оценивает на split.test.

    С run_dir сохраняет чекпойнт, историю и отчёт.
    """
    model, encoder = build_viralbert(config.viralbert_config(), config.seed)
    encoded = encode_split(split, encoder, config)
    result = train(model, encoded, config.train_config())

    metadata = RunMetadata(
        model=model_name,
        seed=config.seed,
        config_hash=config_hash(config.to_dict()),
        ablated_feature=ablated_feature,
    )
    report = evaluate_model(model, encoded.test, metadata, batch_size=config.training.batch_size)
    logger.info("%s: test macro-F1 %.4f, accuracy %.4f", model_name, report.macro_f1, report.accuracy)

    if run_dir is not None:
        run_dir = Path(run_dir)
        scaler = fit_minmax([extract_features(r, config.features.parse_text) for r in split.train])
        write_run_config(config, run_dir / CONFIG_FILE)
        save_checkpoint(run_dir / CHECKPOINT_DIR, model, encoder, config, scaler=scaler, history=result.history)
        write_json(result.history.to_dict(), run_dir / HISTORY_FILE)
        write_report(report, report_path(run_dir, model_name))

    return ViralBertRun(model=model, encoder=encoder, history=result.history, report=report, config=config)
