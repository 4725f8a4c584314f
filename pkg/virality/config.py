"""Конфиг запуска: один JSON на запуск плюс переопределения из командной строки.

Разделы файла: paths, corpus, features, encoder, model, training (с вложенным
loss) и seed. Неизвестные ключи и недопустимые значения дают ImproperlyConfigured.
"""
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Sequence

from django.conf import settings
from django.core.exceptions import ImproperlyConfigured

from .corpus import NUM_CLASSES
from .encoder import EncoderConfig
from .features import CANONICAL_FEATURE_ORDER, validate_feature_order
from .loss import ClassBalanceConfig
from .network import ViralBertConfig
from .training import TrainConfig


@dataclass(frozen=True)
class PathsConfig:
    corpus: str = ''
    # пусто - VIRALITY_RUN_DIR из настроек
    run_dir: str = ''


@dataclass(frozen=True)
class CorpusConfig:
    # пустой список - все темы
    topics: tuple = ()
    english_only: bool = True
    original_only: bool = True
    rebalance: bool = True


@dataclass(frozen=True)
class FeatureConfig:
    order: tuple = CANONICAL_FEATURE_ORDER
    # True - хэштеги и упоминания считаются по тексту, False - берутся из записи
    parse_text: bool = True

    def __post_init__(self):
        object.__setattr__(self, 'order', validate_feature_order(self.order))


@dataclass(frozen=True)
class ModelOptions:
    use_numeric_features: bool = True
    use_sentiment: bool = True
    num_classes: int = NUM_CLASSES
    dropout: float = 0.1
    classifier_depth: int = 1


def _build_section(cls, data, section: str):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ImproperlyConfigured(f"Раздел {section!r} должен быть объектом")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ImproperlyConfigured(f"Неизвестные ключи в разделе {section!r}: {', '.join(unknown)}")
    values = {key: tuple(value) if isinstance(value, list) else value for key, value in data.items()}
    try:
        return cls(**values)
    except (TypeError, ValueError) as exc:
        raise ImproperlyConfigured(f"Раздел {section!r}: {exc}") from exc


@dataclass(frozen=True)
class RunConfig:
    paths: PathsConfig = field(default_factory=PathsConfig)
    corpus: CorpusConfig = field(default_factory=CorpusConfig)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    model: ModelOptions = field(default_factory=ModelOptions)
    training: TrainConfig = field(default_factory=TrainConfig)
    seed: int = 1

    def __post_init__(self):
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ImproperlyConfigured(f"seed должен быть целым числом, получено {self.seed!r}")
        # сид один на весь запуск
        if self.training.seed != self.seed:
            object.__setattr__(self, 'training', replace(self.training, seed=self.seed))
        # проверка согласованности блоков модели
        self.viralbert_config()

    @property
    def run_dir(self) -> Path:
        return Path(self.paths.run_dir or settings.VIRALITY_RUN_DIR)

    @property
    def corpus_path(self) -> Path:
        if not self.paths.corpus:
            raise ImproperlyConfigured("В конфиге не указан paths.corpus")
        return Path(self.paths.corpus)

    def viralbert_config(self) -> ViralBertConfig:
        return ViralBertConfig(
            encoder=self.encoder,
            use_numeric_features=self.model.use_numeric_features,
            use_sentiment=self.model.use_sentiment,
            num_classes=self.model.num_classes,
            dropout=self.model.dropout,
            classifier_depth=self.model.classifier_depth,
        )

    def train_config(self) -> TrainConfig:
        return self.training

    def replace_model(self, **changes) -> 'RunConfig':
        return replace(self, model=replace(self.model, **changes))

    def replace_features(self, **changes) -> 'RunConfig':
        return replace(self, features=replace(self.features, **changes))

    def with_overrides(
        self,
        seed: Optional[int] = None,
        run_dir=None,
        backbone: Optional[str] = None,
        feature_order: Optional[Sequence[str]] = None,
        corpus=None,
    ) -> 'RunConfig':
        """Переопределения из флагов --seed, --run-dir, --backbone, --feature-order"""
        config = self
        if seed is not None:
            config = replace(config, seed=int(seed))
        if run_dir is not None:
            config = replace(config, paths=replace(config.paths, run_dir=str(run_dir)))
        if corpus is not None:
            config = replace(config, paths=replace(config.paths, corpus=str(corpus)))
        if backbone:
            config = replace(config, encoder=replace(config.encoder, backbone_id=backbone))
        if feature_order is not None:
            config = config.replace_features(order=tuple(feature_order))
        return config

    def to_dict(self) -> dict:
        data = {
            'paths': asdict(self.paths),
            'corpus': asdict(self.corpus),
            'features': asdict(self.features),
            'encoder': self.encoder.to_dict(),
            'model': asdict(self.model),
            'training': self.training.to_dict(),
            'seed': self.seed,
        }
        data['corpus']['topics'] = list(self.corpus.topics)
        data['features']['order'] = list(self.features.order)
        data['training'].pop('seed')
        return data

    @classmethod
    def from_dict(cls, data: dict) -> 'RunConfig':
        if not isinstance(data, dict):
            raise ImproperlyConfigured("Конфиг запуска должен быть JSON-объектом")
        sections = {'paths', 'corpus', 'features', 'encoder', 'model', 'training', 'seed'}
        unknown = sorted(set(data) - sections)
        if unknown:
            raise ImproperlyConfigured(f"Неизвестные разделы конфига: {', '.join(unknown)}")

        training = dict(data.get('training') or {})
        if 'seed' in training:
            raise ImproperlyConfigured("Сид задаётся только на верхнем уровне конфига")
        loss = training.pop('loss', None)
        training_config = _build_section(TrainConfig, training, 'training')
        if loss is not None:
            training_config = replace(
                training_config, loss=_build_section(ClassBalanceConfig, loss, 'training.loss')
            )

        try:
            return cls(
                paths=_build_section(PathsConfig, data.get('paths'), 'paths'),
                corpus=_build_section(CorpusConfig, data.get('corpus'), 'corpus'),
                features=_build_section(FeatureConfig, data.get('features'), 'features'),
                encoder=_build_section(EncoderConfig, data.get('encoder'), 'encoder'),
                model=_build_section(ModelOptions, data.get('model'), 'model'),
                training=training_config,
                seed=data.get('seed', settings.VIRALITY_SEED),
            )
        except ValueError as exc:
            raise ImproperlyConfigured(str(exc)) from exc


def default_run_config() -> RunConfig:
    return RunConfig(
        encoder=EncoderConfig(backbone_id=settings.VIRALITY_BACKBONE),
        seed=settings.VIRALITY_SEED,
    )


def load_run_config(path) -> RunConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as exc:
        raise ImproperlyConfigured(f"{path}: некорректный JSON ({exc.msg}, строка {exc.lineno})") from exc
    return RunConfig.from_dict(data)


def write_run_config(config: RunConfig, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + '\n', encoding='utf-8')
