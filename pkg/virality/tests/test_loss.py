import math
from decimal import Decimal, getcontext

import numpy as np
import torch
import torch.nn.functional as F
from django.core.exceptions import ImproperlyConfigured
from django.test import SimpleTestCase

from virality.exceptions import DomainError, InputError
from virality.loss import (
    ClassBalanceConfig,
    ClassBalancedFocalLoss,
    cb_focal_loss,
    effective_number_weights,
    raw_effective_number_weights,
)


def scalar_loss(logits, labels, beta, gamma, counts):
    """Построчный эталон на math"""
    raw = [1.0 if beta == 0 else (1 - beta) / (1 - beta ** n) for n in counts]
    total = sum(raw)
    weights = [w * len(raw) / total for w in raw]
    losses = []
    for row, label in zip(logits, labels):
        top = max(row)
        log_z = top + math.log(sum(math.exp(v - top) for v in row))
        log_p = row[label] - log_z
        p = math.exp(log_p)
        losses.append(weights[label] * (1 - p) ** gamma * -log_p)
    return sum(losses) / len(losses)


class EffectiveNumberWeightsTests(SimpleTestCase):

    def test_beta_zero_gives_unit_weights(self):
        config = ClassBalanceConfig(beta=0.0, class_counts=(5, 10, 1, 300))
        np.testing.assert_array_equal(raw_effective_number_weights(config), np.ones(4))
        np.testing.assert_allclose(effective_number_weights(config), np.ones(4))

    def test_single_example_class_has_raw_weight_one(self):
        for beta in (0.5, 0.9, 0.9999):
            raw = raw_effective_number_weights(ClassBalanceConfig(beta=beta, class_counts=(1, 50)))
            self.assertAlmostEqual(raw[0], 1.0, places=12)

    def test_matches_high_precision_oracle(self):
        getcontext().prec = 50
        beta = Decimal('0.9')
        expected = [(1 - beta) / (1 - beta ** n) for n in (10, 100)]

        raw = raw_effective_number_weights(ClassBalanceConfig(beta=0.9, class_counts=(10, 100)))

        for value, oracle in zip(raw, expected):
            self.assertAlmostEqual(value, float(oracle), places=12)

    def test_normalized_weights_sum_to_num_classes(self):
        config = ClassBalanceConfig(beta=0.999, class_counts=(1000, 200, 30, 4))
        weights = effective_number_weights(config)
        self.assertAlmostEqual(weights.sum(), 4.0, places=10)
        # редкие классы весят больше
        self.assertTrue(np.all(np.diff(weights) > 0))

    def test_zero_count_is_domain_error(self):
        with self.assertRaises(DomainError):
            effective_number_weights(ClassBalanceConfig(class_counts=(10, 0, 3, 1)))

    def test_invalid_beta_and_gamma_are_config_errors(self):
        with self.assertRaises(ImproperlyConfigured):
            ClassBalanceConfig(beta=1.0)
        with self.assertRaises(ImproperlyConfigured):
            ClassBalanceConfig(gamma=-0.5)


class FocalLossTests(SimpleTestCase):

    def test_uniform_logits_hand_computed_value(self):
        config = ClassBalanceConfig(beta=0.0, gamma=2.0, class_counts=(1, 1, 1, 1))
        loss = cb_focal_loss(torch.zeros(1, 4, dtype=torch.float64), torch.tensor([0]), config)

        self.assertAlmostEqual(loss.item(), 0.75 ** 2 * math.log(4), places=12)
        self.assertAlmostEqual(loss.item(), 0.7797, delta=1e-3)

    def test_gamma_zero_beta_zero_is_cross_entropy(self):
        generator = torch.Generator().manual_seed(3)
        logits = torch.randn(16, 4, generator=generator, dtype=torch.float64)
        labels = torch.randint(0, 4, (16,), generator=generator)
        config = ClassBalanceConfig(beta=0.0, gamma=0.0, class_counts=(3, 5, 7, 9))

        loss = cb_focal_loss(logits, labels, config)

        self.assertAlmostEqual(loss.item(), F.cross_entropy(logits, labels).item(), places=12)

    def test_batched_loss_matches_scalar_oracle(self):
        rng = np.random.default_rng(2024)
        for _ in range(200):
            batch = int(rng.integers(1, 9))
            logits = rng.normal(scale=3.0, size=(batch, 4))
            labels = rng.integers(0, 4, size=batch)
            beta = float(rng.uniform(0, 0.9999))
            gamma = float(rng.uniform(0, 5))
            counts = tuple(int(c) for c in rng.integers(1, 1000, size=4))
            config = ClassBalanceConfig(beta=beta, gamma=gamma, class_counts=counts)

            loss = cb_focal_loss(torch.tensor(logits), torch.tensor(labels), config).item()
            oracle = scalar_loss(logits.tolist(), labels.tolist(), beta, gamma, counts)

            self.assertLess(abs(loss - oracle), 1e-6)

    def test_loss_goes_to_zero_as_true_class_dominates(self):
        config = ClassBalanceConfig(beta=0.0, gamma=2.0, class_counts=(1, 1, 1, 1))
        losses = [
            cb_focal_loss(torch.tensor([[k, 0.0, 0.0, 0.0]], dtype=torch.float64), torch.tensor([0]), config).item()
            for k in range(0, 12)
        ]
        self.assertTrue(all(a > b for a, b in zip(losses, losses[1:])))
        self.assertLess(losses[-1], 1e-8)

    def test_larger_gamma_shrinks_misclassified_loss(self):
        logits = torch.tensor([[2.0, 0.5, -1.0, 0.0]], dtype=torch.float64)
        labels = torch.tensor([1])
        losses = [
            cb_focal_loss(logits, labels, ClassBalanceConfig(beta=0.0, gamma=g, class_counts=(1, 1, 1, 1))).item()
            for g in (0.0, 0.5, 1.0, 2.0, 5.0)
        ]
        self.assertTrue(all(a > b for a, b in zip(losses, losses[1:])))
        self.assertTrue(all(loss >= 0 for loss in losses))

    def test_gradient_matches_central_differences(self):
        generator = torch.Generator().manual_seed(11)
        config = ClassBalanceConfig(beta=0.99, gamma=1.5, class_counts=(40, 12, 5, 2))
        logits = torch.randn(6, 4, generator=generator, dtype=torch.float64, requires_grad=True)
        labels = torch.randint(0, 4, (6,), generator=generator)

        cb_focal_loss(logits, labels, config).backward()
        analytic = logits.grad.clone()

        eps = 1e-6
        numeric = torch.zeros_like(analytic)
        base = logits.detach()
        for index in np.ndindex(*base.shape):
            plus, minus = base.clone(), base.clone()
            plus[index] += eps
            minus[index] -= eps
            numeric[index] = (
                cb_focal_loss(plus, labels, config) - cb_focal_loss(minus, labels, config)
            ) / (2 * eps)

        relative = (analytic - numeric).abs().max() / numeric.abs().max()
        self.assertLess(relative.item(), 1e-4)

    def test_saturated_row_keeps_gradients_finite_for_small_gamma(self):
        config = ClassBalanceConfig(beta=0.0, gamma=0.5, class_counts=(1, 1, 1, 1))
        labels = torch.tensor([0, 1])
        for dtype in (torch.float64, torch.float32):
            logits = torch.tensor([[40.0, 0.0, 0.0, 0.0], [0.3, 0.1, -0.2, 0.0]], dtype=dtype, requires_grad=True)

            loss = cb_focal_loss(logits, labels, config)
            loss.backward()

            self.assertTrue(torch.isfinite(loss).item())
            self.assertTrue(torch.isfinite(logits.grad).all().item(), dtype)
            # насыщенная строка почти не влияет на градиент второй
            self.assertGreater(logits.grad[1].abs().sum().item(), 0.0)

    def test_length_mismatch_is_input_error(self):
        config = ClassBalanceConfig(class_counts=(1, 1, 1, 1))
        with self.assertRaises(InputError):
            cb_focal_loss(torch.zeros(3, 4), torch.tensor([0, 1]), config)

    def test_label_out_of_range_is_input_error(self):
        config = ClassBalanceConfig(class_counts=(1, 1, 1, 1))
        with self.assertRaises(InputError):
            cb_focal_loss(torch.zeros(2, 4), torch.tensor([0, 4]), config)

    def test_module_uses_registered_weights(self):
        config = ClassBalanceConfig(beta=0.9, gamma=2.0, class_counts=(100, 10, 5, 1))
        criterion = ClassBalancedFocalLoss(config)
        logits = torch.zeros(2, 4)
        labels = torch.tensor([0, 3])

        self.assertAlmostEqual(criterion.weights.sum().item(), 4.0, places=5)
        self.assertAlmostEqual(
            criterion(logits, labels).item(), cb_focal_loss(logits, labels, config).item(), places=6
        )
