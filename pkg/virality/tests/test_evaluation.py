import tempfile
from pathlib import Path

import numpy as np
from django.core.exceptions import ImproperlyConfigured
from django.test import SimpleTestCase
from sklearn.metrics import accuracy_score, precision_recall_fscore_support

from virality.config import RunConfig
from virality.corpus import split_dataset
from virality.encoder import EncoderConfig
from virality.evaluation import (
    ConfusionMatrix,
    EvalReport,
    RunMetadata,
    ablated_config,
    ablation_run,
    config_diff,
    config_hash,
    confusion_matrix,
    evaluate_predictions,
    macro_f1_score,
    macro_metrics,
    read_report,
    render_ablation_table,
    render_results_table,
    write_report,
)
from virality.exceptions import InputError
from virality.features import ABLATION_FEATURES
from virality.pipeline import run_viralbert
from virality.synthetic import separable_corpus
from virality.training import TrainConfig


def reference_metrics(matrix):
    """Прямой подсчёт по определению, без numpy-векторизации"""
    k = len(matrix)
    precisions, recalls, f1s = [], [], []
    for c in range(k):
        tp = matrix[c][c]
        predicted = sum(matrix[r][c] for r in range(k))
        actual = sum(matrix[c])
        p = tp / predicted if predicted else 0.0
        r = tp / actual if actual else 0.0
        f = 2 * p * r / (p + r) if p + r else 0.0
        precisions.append(p)
        recalls.append(r)
        f1s.append(f)
    total = sum(sum(row) for row in matrix)
    accuracy = sum(matrix[c][c] for c in range(k)) / total
    return sum(f1s) / k, sum(precisions) / k, sum(recalls) / k, accuracy


class ConfusionMatrixTests(SimpleTestCase):

    def test_rows_are_true_classes(self):
        cm = confusion_matrix(preds=[0, 1, 1, 3], labels=[0, 0, 1, 2])
        self.assertEqual(cm.tolist(), [
            [1, 1, 0, 0],
            [0, 1, 0, 0],
            [0, 0, 0, 1],
            [0, 0, 0, 0],
        ])
        self.assertEqual(cm.total, 4)

    def test_length_mismatch_and_range_are_input_errors(self):
        with self.assertRaises(InputError):
            confusion_matrix([0, 1], [0])
        with self.assertRaises(InputError):
            confusion_matrix([], [])
        with self.assertRaises(InputError):
            confusion_matrix([4], [0])

    def test_matrix_must_be_square_and_non_negative(self):
        with self.assertRaises(InputError):
            ConfusionMatrix(np.zeros((2, 3)))
        with self.assertRaises(InputError):
            ConfusionMatrix(np.array([[1, -1], [0, 1]]))


class MacroMetricsTests(SimpleTestCase):

    def test_absent_classes_count_as_zero(self):
        report = evaluate_predictions(preds=[0, 1, 1, 1], labels=[0, 0, 1, 1])

        self.assertAlmostEqual(report.macro_precision, 0.41667, places=5)
        self.assertAlmostEqual(report.macro_recall, 0.375, places=5)
        self.assertAlmostEqual(report.macro_f1, 0.36667, places=5)
        self.assertAlmostEqual(report.accuracy, 0.75)
        self.assertEqual(len(report.per_class), 4)
        self.assertTrue(any('класс 2' in w for w in report.warnings))

    def test_matches_reference_on_random_matrices(self):
        rng = np.random.default_rng(2024)
        for _ in range(50):
            matrix = rng.integers(0, 30, size=(4, 4))
            matrix[rng.integers(4), rng.integers(4)] += 1
            report = macro_metrics(ConfusionMatrix(matrix), log_warnings=False)
            expected = reference_metrics(matrix.tolist())
            actual = (report.macro_f1, report.macro_precision, report.macro_recall, report.accuracy)
            for got, want in zip(actual, expected):
                self.assertLess(abs(got - want), 1e-9)

    def test_agrees_with_sklearn_per_class_scores(self):
        rng = np.random.default_rng(41)
        for _ in range(30):
            size = int(rng.integers(1, 80))
            labels = rng.integers(0, 4, size=size).tolist()
            # предсказания иногда пропускают классы целиком
            preds = rng.integers(0, int(rng.integers(1, 5)), size=size).tolist()

            report = macro_metrics(confusion_matrix(preds, labels), log_warnings=False)
            precision, recall, f1, support = precision_recall_fscore_support(
                labels, preds, labels=[0, 1, 2, 3], average=None, zero_division=0
            )

            np.testing.assert_allclose([c['precision'] for c in report.per_class], precision, atol=1e-12)
            np.testing.assert_allclose([c['recall'] for c in report.per_class], recall, atol=1e-12)
            np.testing.assert_allclose([c['f1'] for c in report.per_class], f1, atol=1e-12)
            self.assertEqual([c['support'] for c in report.per_class], support.tolist())
            self.assertAlmostEqual(report.macro_f1, float(np.mean(f1)), places=12)
            self.assertAlmostEqual(report.accuracy, accuracy_score(labels, preds), places=12)

    def test_accuracy_equals_macro_recall_for_balanced_support(self):
        rng = np.random.default_rng(3)
        labels = [c for c in range(4) for _ in range(25)]
        preds = rng.integers(0, 4, size=100).tolist()
        report = evaluate_predictions(preds, labels)
        self.assertAlmostEqual(report.accuracy, report.macro_recall, places=12)

    def test_class_relabeling_does_not_change_macro_scores(self):
        rng = np.random.default_rng(8)
        labels = rng.integers(0, 4, size=60).tolist()
        preds = rng.integers(0, 4, size=60).tolist()
        permutation = [2, 0, 3, 1]

        original = evaluate_predictions(preds, labels)
        relabeled = evaluate_predictions([permutation[p] for p in preds], [permutation[y] for y in labels])

        self.assertAlmostEqual(original.macro_f1, relabeled.macro_f1, places=12)
        self.assertAlmostEqual(original.macro_precision, relabeled.macro_precision, places=12)
        self.assertAlmostEqual(original.macro_recall, relabeled.macro_recall, places=12)

    def test_report_is_self_consistent(self):
        report = evaluate_predictions([0, 2, 2, 3, 1, 0], [0, 2, 1, 3, 1, 3])
        cm = report.confusion_matrix

        self.assertEqual([c['support'] for c in report.per_class], cm.matrix.sum(axis=1).tolist())
        self.assertAlmostEqual(report.macro_f1, np.mean([c['f1'] for c in report.per_class]))
        self.assertEqual(macro_f1_score([0, 2, 2, 3, 1, 0], [0, 2, 1, 3, 1, 3]), report.macro_f1)

    def test_empty_matrix_is_input_error(self):
        with self.assertRaises(InputError):
            macro_metrics(ConfusionMatrix(np.zeros((4, 4), dtype=int)))


class ReportTests(SimpleTestCase):

    def test_report_survives_json_file(self):
        report = evaluate_predictions(
            [0, 1, 2, 3], [0, 1, 2, 2], RunMetadata(model='svm', seed=3, config_hash='abc')
        )
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'reports' / 'svm.json'
            write_report(report, path)
            loaded = read_report(path)

        self.assertEqual(loaded, report)
        self.assertEqual(report.to_dict()['schema_version'], 1)

    def test_unknown_schema_version_is_rejected(self):
        data = evaluate_predictions([0], [0]).to_dict()
        data['schema_version'] = 99
        with self.assertRaises(InputError):
            EvalReport.from_dict(data)

    def test_results_table_lists_methods_in_given_order(self):
        rows = [
            ('logistic_regression', evaluate_predictions([0, 1], [0, 0])),
            ('viralbert', evaluate_predictions([0, 1], [0, 1])),
        ]
        table = render_results_table(rows, show_published=False)
        lines = table.splitlines()

        self.assertTrue(lines[0].startswith('Method'))
        self.assertTrue(lines[2].startswith('Logistic Regression'))
        self.assertTrue(lines[3].startswith('ViralBERT'))
        self.assertNotIn('опубл.', table)

    def test_ablation_table_has_control_row_first(self):
        base = evaluate_predictions([0, 1], [0, 1])
        table = render_ablation_table(base, [('followers', evaluate_predictions([0, 0], [0, 1]))])
        lines = table.splitlines()

        self.assertTrue(lines[2].startswith('ViralBERT'))
        self.assertTrue(lines[4].startswith('Followers'))
        self.assertIn('опубл.', lines[4])


class AblatedConfigTests(SimpleTestCase):

    def setUp(self):
        self.base = RunConfig(encoder=EncoderConfig(hidden_dim=32, vocab_size=512))

    def test_each_ablation_differs_by_one_key(self):
        for feature in ABLATION_FEATURES:
            config = ablated_config(self.base, feature)
            diff = config_diff(self.base.to_dict(), config.to_dict())
            self.assertEqual(len(diff), 1, f"{feature}: {diff}")
            self.assertNotEqual(config_hash(config.to_dict()), config_hash(self.base.to_dict()))

    def test_sentiment_ablation_narrows_classifier_input(self):
        config = ablated_config(self.base, 'sentiment')
        self.assertEqual(config_diff(self.base.to_dict(), config.to_dict()), ['model.use_sentiment'])
        self.assertEqual(
            self.base.viralbert_config().x_cls_dim - config.viralbert_config().x_cls_dim, 3
        )

    def test_numeric_ablation_removes_one_segment(self):
        config = ablated_config(self.base, 'followers')
        self.assertNotIn('followers', config.features.order)
        self.assertEqual(len(config.features.order), len(self.base.features.order) - 1)

    def test_no_feature_is_control(self):
        self.assertIs(ablated_config(self.base, None), self.base)

    def test_unknown_or_already_removed_feature(self):
        with self.assertRaises(ImproperlyConfigured):
            ablated_config(self.base, 'likes')
        reduced = ablated_config(self.base, 'verified')
        with self.assertRaises(ImproperlyConfigured):
            ablated_config(reduced, 'verified')

    def test_config_hash_is_stable(self):
        self.assertEqual(config_hash({'b': 1, 'a': [1, 2]}), config_hash({'a': [1, 2], 'b': 1}))


class AblationRunTests(SimpleTestCase):

    def setUp(self):
        self.config = RunConfig(
            encoder=EncoderConfig(hidden_dim=16, max_sequence_length=48, vocab_size=512),
            training=TrainConfig(learning_rate=1e-3, head_learning_rate=1e-3, max_epochs=2, patience=2),
            seed=3,
        )
        self.split = split_dataset(separable_corpus(60, seed=5), seed=3)

    def test_control_reproduces_base_run(self):
        base = run_viralbert(self.config, self.split).report

        control = ablation_run(self.config, None, self.split, self.config.seed)

        self.assertEqual(control.to_dict(), base.to_dict())
        self.assertIsNone(control.metadata.ablated_feature)

    def test_ablated_run_is_tagged_with_its_feature(self):
        report = ablation_run(self.config, 'followers', self.split, self.config.seed)

        self.assertEqual(report.metadata.ablated_feature, 'followers')
        self.assertEqual(report.metadata.seed, 3)
        self.assertNotEqual(report.metadata.config_hash, config_hash(self.config.to_dict()))
