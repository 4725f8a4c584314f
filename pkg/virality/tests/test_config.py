import json
import tempfile
from pathlib import Path

from django.core.exceptions import ImproperlyConfigured
from django.test import SimpleTestCase, override_settings

from virality.config import RunConfig, default_run_config, load_run_config, write_run_config

CONFIG_DIR = Path(__file__).resolve().parents[2] / 'configs'


class ShippedConfigTests(SimpleTestCase):

    def test_toy_config_loads(self):
        config = load_run_config(CONFIG_DIR / 'toy.json')

        self.assertEqual(config.encoder.backbone_id, 'toy-random')
        self.assertEqual(config.viralbert_config().x_cls_dim, 35)
        self.assertEqual(config.training.loss.beta, 0.9999)
        self.assertEqual(config.training.seed, config.seed)

    def test_bertweet_config_widths(self):
        config = load_run_config(CONFIG_DIR / 'bertweet.json')

        self.assertEqual(config.encoder.hidden_dim, 768)
        self.assertEqual(config.viralbert_config().x_cls_dim, 771)
        self.assertEqual(config.training.batch_size, 32)
        self.assertEqual(config.training.learning_rate, 2e-5)


class ParsingTests(SimpleTestCase):

    def _load(self, data):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'config.json'
            path.write_text(json.dumps(data), encoding='utf-8')
            return load_run_config(path)

    def test_unknown_keys_are_rejected(self):
        for data in ({'extra': {}}, {'training': {'lr': 1}}, {'training': {'loss': {'alpha': 1}}}):
            with self.assertRaises(ImproperlyConfigured):
                self._load(data)

    def test_seed_only_at_top_level(self):
        with self.assertRaises(ImproperlyConfigured):
            self._load({'training': {'seed': 3}})

    def test_broken_json(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'config.json'
            path.write_text('{"seed": ', encoding='utf-8')
            with self.assertRaises(ImproperlyConfigured):
                load_run_config(path)

    def test_invalid_feature_order(self):
        with self.assertRaises(ImproperlyConfigured):
            self._load({'features': {'order': ['followers', 'likes']}})

    def test_lists_become_tuples(self):
        config = self._load({'corpus': {'topics': ['pets', 'kpop']}, 'seed': 4})
        self.assertEqual(config.corpus.topics, ('pets', 'kpop'))
        self.assertEqual(config.training.seed, 4)

    def test_write_then_load(self):
        config = load_run_config(CONFIG_DIR / 'toy.json').with_overrides(seed=11)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'snapshot.json'
            write_run_config(config, path)
            self.assertEqual(load_run_config(path), config)


class OverrideTests(SimpleTestCase):

    def test_flags_override_file_values(self):
        config = load_run_config(CONFIG_DIR / 'toy.json').with_overrides(
            seed=9, run_dir='/tmp/run9', backbone='toy-random', feature_order=['followers', 'verified']
        )

        self.assertEqual(config.seed, 9)
        self.assertEqual(config.training.seed, 9)
        self.assertEqual(config.run_dir, Path('/tmp/run9'))
        self.assertEqual(config.features.order, ('followers', 'verified'))

    def test_missing_corpus_path(self):
        with self.assertRaises(ImproperlyConfigured):
            RunConfig().corpus_path

    @override_settings(VIRALITY_SEED=5, VIRALITY_BACKBONE='toy-random')
    def test_defaults_come_from_settings(self):
        config = default_run_config()
        self.assertEqual(config.seed, 5)
        self.assertEqual(config.encoder.backbone_id, 'toy-random')

    def test_boolean_seed_is_rejected(self):
        with self.assertRaises(ImproperlyConfigured):
            RunConfig(seed=True)
