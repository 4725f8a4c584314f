import numpy as np
from django.core.exceptions import ImproperlyConfigured
from django.test import SimpleTestCase
from sklearn.ensemble import RandomForestClassifier
from sklearn.linear_model import LogisticRegression, SGDClassifier
from sklearn.tree import DecisionTreeClassifier

from virality.baselines import (
    BASELINE_ORDER,
    NUM_BASELINE_INPUTS,
    BaselineKind,
    MLPNumClassifier,
    build_baseline,
    featurize_split,
    fit_and_evaluate,
)
from virality.config import RunConfig
from virality.corpus import split_dataset
from virality.encoder import EncoderConfig
from virality.exceptions import BaselineFitError
from virality.network import ViralBert
from virality.synthetic import lexicon_sentiment, make_record, separable_corpus, threshold_corpus
from virality.training import TrainConfig

TOY_CONFIG = RunConfig(encoder=EncoderConfig(hidden_dim=32, max_sequence_length=48, vocab_size=1024))


class BuildBaselineTests(SimpleTestCase):

    def test_fixed_configurations(self):
        lr = build_baseline('logistic_regression', seed=1)
        self.assertIsInstance(lr, LogisticRegression)
        self.assertEqual(lr.solver, 'newton-cg')

        svm = build_baseline('svm', seed=1)
        self.assertIsInstance(svm, SGDClassifier)
        self.assertEqual(svm.loss, 'hinge')

        tree = build_baseline('decision_tree', seed=1)
        self.assertIsInstance(tree, DecisionTreeClassifier)
        self.assertEqual((tree.criterion, tree.max_depth), ('gini', None))

        forest = build_baseline('random_forest', seed=1)
        self.assertIsInstance(forest, RandomForestClassifier)
        self.assertEqual(forest.n_estimators, 100)

    def test_mlp_num_shape(self):
        mlp = build_baseline('mlp_num', seed=1, config=TOY_CONFIG)
        mlp.max_epochs = 1
        X = np.random.default_rng(0).random((8, NUM_BASELINE_INPUTS))
        mlp.fit(X, np.array([0, 1, 2, 3] * 2))

        first, activation, last = mlp.network.layers
        self.assertEqual((first.in_features, first.out_features), (9, 32))
        self.assertEqual(type(activation).__name__, 'ReLU')
        self.assertEqual(last.out_features, 4)
        self.assertEqual(mlp.predict_proba(X).shape, (8, 4))

    def test_viralbert_text_uses_text_vector_only(self):
        model = build_baseline('viralbert_text', seed=1, config=TOY_CONFIG)
        self.assertIsInstance(model, ViralBert)
        self.assertEqual(model.x_cls_dim, 32)
        self.assertIsNone(model.sentiment_head)

    def test_unknown_kind_is_config_error(self):
        with self.assertRaises(ImproperlyConfigured):
            build_baseline('xgboost', seed=1)

    def test_table_order(self):
        self.assertEqual(
            [kind.value for kind in BASELINE_ORDER],
            ['logistic_regression', 'svm', 'decision_tree', 'random_forest', 'mlp_num', 'viralbert_text'],
        )
        self.assertIs(BaselineKind.parse('svm'), BaselineKind.SVM)

    def test_unfitted_mlp_cannot_predict(self):
        with self.assertRaises(BaselineFitError):
            MLPNumClassifier(seed=1).predict(np.zeros((1, 9)))


class FeaturizeTests(SimpleTestCase):

    def test_nine_inputs_scaled_on_train(self):
        split = split_dataset(threshold_corpus(100, seed=2), seed=1)
        data = featurize_split(split, TOY_CONFIG, sentiment_fn=lexicon_sentiment)

        self.assertEqual(data.train_x.shape, (80, 9))
        self.assertEqual(data.test_x.shape, (10, 9))
        self.assertTrue(np.all(data.train_x[:, :6] >= 0) and np.all(data.train_x[:, :6] <= 1))
        # тональность не масштабируется
        np.testing.assert_allclose(data.train_x[:, 6:], [[0.1, 0.8, 0.1]] * 80)


class FitAndEvaluateTests(SimpleTestCase):

    def test_mlp_learns_follower_thresholds(self):
        config = RunConfig(
            encoder=TOY_CONFIG.encoder,
            training=TrainConfig(head_learning_rate=1e-2),
        )
        split = split_dataset(threshold_corpus(400, seed=4), seed=1)

        report = fit_and_evaluate('mlp_num', split, seed=1, config=config, sentiment_fn=lexicon_sentiment)

        self.assertGreaterEqual(report.macro_f1, 0.9)
        self.assertEqual(report.metadata.model, 'mlp_num')

    def test_random_forest_on_separable_corpus(self):
        split = split_dataset(separable_corpus(400, seed=6), seed=1)

        report = fit_and_evaluate('random_forest', split, seed=1, config=TOY_CONFIG, sentiment_fn=lexicon_sentiment)

        self.assertGreaterEqual(report.macro_f1, 0.9)

    def test_single_class_train_is_flagged(self):
        records = [make_record(f'z{i}', followers=100 + i) for i in range(20)]
        split = split_dataset(records, seed=1)

        report = fit_and_evaluate('logistic_regression', split, seed=1, config=TOY_CONFIG,
                                  sentiment_fn=lexicon_sentiment)

        self.assertTrue(report.metadata.single_class_training)
        self.assertIn('обучение на одном классе', report.warnings)

    def test_same_seed_same_report(self):
        split = split_dataset(separable_corpus(120, seed=9), seed=2)
        first = fit_and_evaluate('random_forest', split, seed=5, config=TOY_CONFIG, sentiment_fn=lexicon_sentiment)
        second = fit_and_evaluate('random_forest', split, seed=5, config=TOY_CONFIG, sentiment_fn=lexicon_sentiment)
        self.assertEqual(first.to_dict(), second.to_dict())

    def test_unbounded_tree_fits_train_exactly(self):
        split = split_dataset(threshold_corpus(200, seed=3), seed=1)
        data = featurize_split(split, TOY_CONFIG, sentiment_fn=lexicon_sentiment)

        tree = build_baseline('decision_tree', seed=1).fit(data.train_x, data.train_y)

        self.assertEqual(tree.score(data.train_x, data.train_y), 1.0)
