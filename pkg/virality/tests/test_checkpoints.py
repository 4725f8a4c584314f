import json
import tempfile
from pathlib import Path

import numpy as np
import torch
from django.test import SimpleTestCase

from virality.checkpoints import CLASSIFIER_FILE, METADATA_FILE, load_checkpoint, save_checkpoint
from virality.config import RunConfig
from virality.encoder import EncoderConfig
from virality.exceptions import CheckpointMismatchError
from virality.features import extract_features, fit_minmax
from virality.network import build_viralbert, predict_proba
from virality.pipeline import encode_records
from virality.synthetic import separable_corpus

CONFIG = RunConfig(encoder=EncoderConfig(hidden_dim=32, max_sequence_length=48, vocab_size=1024), seed=4)


class CheckpointTests(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.directory = Path(self.tmp.name) / 'checkpoint'

        self.records = separable_corpus(24, seed=1)
        self.model, self.encoder = build_viralbert(CONFIG.viralbert_config(), CONFIG.seed)
        # веса отличаются от инициализации по сиду
        with torch.no_grad():
            for param in self.model.parameters():
                param.add_(0.01)
        self.scaler = fit_minmax([extract_features(r) for r in self.records])
        save_checkpoint(self.directory, self.model, self.encoder, CONFIG, scaler=self.scaler)

    def test_reload_gives_identical_probabilities(self):
        loaded = load_checkpoint(self.directory, CONFIG)

        examples = encode_records(self.records, loaded.encoder, loaded.run_config)
        np.testing.assert_array_equal(
            predict_proba(loaded.model, examples), predict_proba(self.model, examples)
        )
        self.assertEqual(loaded.run_config, CONFIG)
        self.assertEqual(loaded.scaler, self.scaler)

    def test_metadata_records_feature_order_and_seed(self):
        metadata = json.loads((self.directory / METADATA_FILE).read_text(encoding='utf-8'))
        self.assertEqual(metadata['feature_order'], list(CONFIG.features.order))
        self.assertEqual(metadata['seed'], 4)
        self.assertEqual(metadata['x_cls_dim'], 35)

    def test_different_feature_order_is_rejected(self):
        other = CONFIG.with_overrides(feature_order=['followers', 'hashtags'])
        with self.assertRaises(CheckpointMismatchError):
            load_checkpoint(self.directory, other)

    def test_sentiment_ablated_config_is_rejected(self):
        with self.assertRaises(CheckpointMismatchError):
            load_checkpoint(self.directory, CONFIG.replace_model(use_sentiment=False))

    def test_missing_checkpoint(self):
        with self.assertRaises(CheckpointMismatchError):
            load_checkpoint(Path(self.tmp.name) / 'absent')

    def test_wrong_weight_shapes(self):
        torch.save({'0.weight': torch.zeros(2, 2)}, self.directory / CLASSIFIER_FILE)
        with self.assertRaises(CheckpointMismatchError):
            load_checkpoint(self.directory)
