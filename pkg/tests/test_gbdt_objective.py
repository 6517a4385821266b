"""Weighted softmax objective: weights, gradients, and the FD oracle."""
from __future__ import annotations

import math

import numpy as np
import pytest

from semgkit.gbdt import (
    HESS_FLOOR,
    LossSpec,
    compute_class_weights,
    grad_hess,
    softmax,
    weighted_cross_entropy,
)


def sum_form_loss(raw, labels, weights):
    """Sum over samples of lambda_y * (-log p_y); the quantity grad_hess differentiates."""
    p = softmax(raw)
    total = 0.0
    for i, y in enumerate(labels):
        total += weights[y] * -math.log(p[i, y])
    return total


class TestClassWeights:
    def test_hard_class_formula(self):
        labels = [0, 0, 1, 1]
        weights = compute_class_weights(labels, k=2.0, hard_classes={0})
        assert weights[0] == pytest.approx(2.0 * math.exp(0.5), abs=1e-12)
        assert weights[1] == 1.0

    def test_uneven_frequencies(self):
        labels = [0] * 3 + [1] * 7
        weights = compute_class_weights(labels, k=1.5, hard_classes={0, 1})
        assert weights[0] == pytest.approx(1.5 * math.exp(0.7), abs=1e-12)
        assert weights[1] == pytest.approx(1.5 * math.exp(0.3), abs=1e-12)

    def test_absent_hard_class_warns(self):
        with pytest.warns(RuntimeWarning, match="absent"):
            weights = compute_class_weights([0, 0], k=1.5, hard_classes={3},
                                            classes=[0, 3])
        assert weights[3] == pytest.approx(1.5 * math.e, abs=1e-12)

    def test_hard_class_outside_classes_warns(self):
        with pytest.warns(RuntimeWarning, match="not among"):
            weights = compute_class_weights([0, 1], hard_classes={5})
        assert 5 not in weights

    def test_validation(self):
        with pytest.raises(ValueError):
            compute_class_weights([])
        with pytest.raises(ValueError):
            compute_class_weights([0], k=0.0)

    def test_loss_spec_alignment(self):
        spec = LossSpec(gain=1.5, hard_classes=frozenset({2}))
        classes = np.array([1, 2, 4])
        w = spec.weights_for([1, 2, 2, 4], classes)
        assert w.shape == (3,)
        assert w[0] == 1.0 and w[2] == 1.0
        assert w[1] == pytest.approx(1.5 * math.exp(0.5), abs=1e-12)

    def test_loss_spec_validation(self):
        with pytest.raises(ValueError):
            LossSpec(gain=0.0)


class TestGradHess:
    def test_uniform_scores_three_classes(self):
        raw = np.zeros((2, 3))
        grad, hess = grad_hess(raw, [0, 2], np.ones(3))
        np.testing.assert_allclose(grad[0], [-2 / 3, 1 / 3, 1 / 3], rtol=1e-12)
        np.testing.assert_allclose(grad[1], [1 / 3, 1 / 3, -2 / 3], rtol=1e-12)
        np.testing.assert_allclose(hess, 2.0 / 9.0, rtol=1e-12)

    def test_weights_scale_rows(self):
        raw = np.array([[0.3, -0.2], [0.1, 0.4]])
        g1, h1 = grad_hess(raw, [0, 1], np.ones(2))
        g2, h2 = grad_hess(raw, [0, 1], np.array([3.0, 1.0]))
        np.testing.assert_allclose(g2[0], 3.0 * g1[0], rtol=1e-12)
        np.testing.assert_allclose(g2[1], g1[1], rtol=1e-12)
        np.testing.assert_allclose(h2[0], 3.0 * h1[0], rtol=1e-12)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(0)
        for _ in range(40):
            n = int(rng.integers(1, 21))
            m = int(rng.integers(2, 6))
            raw = rng.normal(0.0, 2.0, size=(n, m))
            labels = rng.integers(0, m, size=n)
            weights = rng.uniform(0.5, 3.0, size=m)
            grad, _ = grad_hess(raw, labels, weights)
            eps = 1e-6
            for _ in range(6):  # spot-check random coordinates
                i = int(rng.integers(0, n))
                j = int(rng.integers(0, m))
                plus = raw.copy()
                plus[i, j] += eps
                minus = raw.copy()
                minus[i, j] -= eps
                fd = (sum_form_loss(plus, labels, weights)
                      - sum_form_loss(minus, labels, weights)) / (2.0 * eps)
                assert abs(grad[i, j] - fd) <= 1e-5 * max(1.0, abs(fd))

    def test_hessian_matches_finite_differences(self):
        rng = np.random.default_rng(1)
        raw = rng.normal(0.0, 1.0, size=(5, 3))
        labels = rng.integers(0, 3, size=5)
        weights = rng.uniform(0.8, 2.0, size=3)
        _, hess = grad_hess(raw, labels, weights)
        eps = 1e-4
        for i in range(5):
            for j in range(3):
                plus = raw.copy()
                plus[i, j] += eps
                minus = raw.copy()
                minus[i, j] -= eps
                fd = (
                    sum_form_loss(plus, labels, weights)
                    - 2.0 * sum_form_loss(raw, labels, weights)
                    + sum_form_loss(minus, labels, weights)
                ) / eps**2
                assert abs(hess[i, j] - fd) <= 1e-4 * max(1.0, abs(fd))

    def test_hessian_floor(self):
        raw = np.array([[50.0, -50.0]])
        _, hess = grad_hess(raw, [0], np.ones(2))
        np.testing.assert_array_equal(hess, HESS_FLOOR)

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            grad_hess(np.zeros((2, 3)), [0], np.ones(3))
        with pytest.raises(ValueError):
            grad_hess(np.zeros((2, 3)), [0, 1], np.ones(2))


class TestSoftmaxAndLoss:
    def test_softmax_rows_sum_to_one(self):
        rng = np.random.default_rng(2)
        raw = rng.normal(0.0, 5.0, size=(20, 4))
        p = softmax(raw)
        np.testing.assert_allclose(p.sum(axis=1), 1.0, rtol=1e-12)
        assert np.all(p > 0.0)

    def test_softmax_stable_under_large_scores(self):
        p = softmax(np.array([[1000.0, 0.0], [-1000.0, 0.0]]))
        assert np.all(np.isfinite(p))
        assert p[0, 0] == pytest.approx(1.0)
        assert p[1, 0] == pytest.approx(0.0)

    def test_cross_entropy_uniform(self):
        raw = np.zeros((4, 2))
        assert weighted_cross_entropy(raw, [0, 1, 0, 1], np.ones(2)) == pytest.approx(
            math.log(2.0), rel=1e-12
        )

    def test_cross_entropy_weighting(self):
        raw = np.zeros((2, 2))
        loss = weighted_cross_entropy(raw, [0, 1], np.array([3.0, 1.0]))
        assert loss == pytest.approx(2.0 * math.log(2.0), rel=1e-12)
