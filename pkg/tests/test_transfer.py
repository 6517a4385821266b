"""Warm-start transfer: additivity, frozen base trees, paired reports."""
from __future__ import annotations

import numpy as np
import pytest

from semgkit.gbdt import TrainParams, load_model, predict_raw, save_model, train
from semgkit.transfer import (
    TransferConfig,
    _paired_split,
    transfer_report,
    warm_start,
)


def shifted(features, seed, gain_lo=0.6, gain_hi=1.4):
    """Per-feature gain perturbation standing in for changed conditions."""
    rng = np.random.default_rng(seed)
    return features * rng.uniform(gain_lo, gain_hi, size=features.shape[1])


@pytest.fixture(scope="module")
def base_setup():
    rng = np.random.default_rng(0)
    centers = rng.normal(0.0, 4.0, size=(3, 12))
    spread = 1.2

    def draw(n_per_class, seed):
        r = np.random.default_rng(seed)
        features = np.vstack([
            centers[c] + spread * r.standard_normal((n_per_class, 12))
            for c in range(3)
        ])
        labels = np.repeat(np.arange(3), n_per_class)
        order = r.permutation(features.shape[0])
        return features[order], labels[order]

    source_x, source_y = draw(250, seed=1)
    base = train(source_x, source_y, params=TrainParams(max_rounds=30, seed=0))
    return base, draw


class TestWarmStart:
    def test_prediction_additivity_exact(self, base_setup):
        base, draw = base_setup
        target_x, target_y = draw(40, seed=2)
        warm = warm_start(base, target_x, target_y,
                          cfg=TransferConfig(max_rounds=5))
        probe = draw(10, seed=3)[0]
        base_raw = predict_raw(base, probe, n_rounds=base.best_iteration)
        prefix = predict_raw(warm, probe, n_rounds=base.best_iteration)
        np.testing.assert_array_equal(prefix, base_raw)

    def test_base_trees_shared_and_bit_identical(self, base_setup, tmp_path):
        base, draw = base_setup
        target_x, target_y = draw(40, seed=4)
        warm = warm_start(base, target_x, target_y,
                          cfg=TransferConfig(max_rounds=4))
        n_base = base.best_iteration
        assert warm.n_rounds == n_base + 4
        for r in range(n_base):
            for c in range(3):
                assert warm.trees[r][c] is base.trees[r][c]
        # the shared trees survive a save/load round trip byte for byte
        warm_path = tmp_path / "warm.json"
        save_model(warm, warm_path)
        loaded = load_model(warm_path)
        for r in range(n_base):
            for c in range(3):
                np.testing.assert_array_equal(
                    loaded.trees[r][c].value, base.trees[r][c].value
                )
                np.testing.assert_array_equal(
                    loaded.trees[r][c].feature, base.trees[r][c].feature
                )
                np.testing.assert_array_equal(
                    loaded.trees[r][c].threshold, base.trees[r][c].threshold
                )

    def test_new_rounds_use_transfer_rate(self, base_setup):
        base, draw = base_setup
        target_x, target_y = draw(30, seed=5)
        cfg = TransferConfig(learning_rate=0.033, max_rounds=3)
        warm = warm_start(base, target_x, target_y, cfg=cfg)
        n_base = base.best_iteration
        assert warm.round_scales[:n_base] == base.round_scales[:n_base]
        assert warm.round_scales[n_base:] == [0.033] * 3
        assert warm.best_iteration == n_base + 3  # no validation set given

    def test_labels_outside_base_classes_rejected(self, base_setup):
        base, draw = base_setup
        target_x, target_y = draw(20, seed=6)
        with pytest.raises(ValueError, match="outside the model classes"):
            warm_start(base, target_x, target_y + 7)

    def test_width_mismatch_rejected(self, base_setup):
        base, draw = base_setup
        target_x, target_y = draw(20, seed=7)
        with pytest.raises(ValueError, match="does not match the base model width"):
            warm_start(base, target_x[:, :5], target_y)

    def test_scratch_arm_ignores_base_trees(self, base_setup):
        base, draw = base_setup
        target_x, target_y = draw(60, seed=8)
        scratch = warm_start(
            base, target_x, target_y,
            cfg=TransferConfig(max_rounds=6, keep_base_trees=False),
        )
        assert scratch.n_rounds <= 6
        # fresh binning: edges computed from the target, not copied
        assert len(scratch.bin_edges) == len(base.bin_edges)
        assert not all(
            np.array_equal(a, b)
            for a, b in zip(scratch.bin_edges, base.bin_edges)
        )

    def test_recomputes_class_weights_on_target(self, base_setup):
        base, draw = base_setup
        target_x, target_y = draw(30, seed=9)
        from semgkit.gbdt import LossSpec

        warm = warm_start(
            base, target_x, target_y, cfg=TransferConfig(max_rounds=2),
            loss=LossSpec(gain=1.5, hard_classes=frozenset({1})),
        )
        expected = 1.5 * np.exp(1.0 - 1.0 / 3.0)
        assert warm.class_weights[1] == pytest.approx(expected, rel=1e-12)

    def test_early_stopping_on_target_validation(self, base_setup):
        base, draw = base_setup
        target_x, target_y = draw(60, seed=10)
        cut = 120
        warm = warm_start(
            base, target_x[:cut], target_y[:cut], target_x[cut:], target_y[cut:],
            cfg=TransferConfig(max_rounds=60, early_stop_rounds=5),
        )
        n_base = base.best_iteration
        new_rounds = warm.n_rounds - n_base
        best_new = warm.best_iteration - n_base
        assert new_rounds <= best_new + 5

    def test_warm_helps_on_identical_distribution(self, base_setup):
        # small target drawn from the source distribution: the base head
        # start should win (or tie) against scratch in most paired seeds
        base, draw = base_setup
        wins = 0
        for seed in range(10):
            target_x, target_y = draw(24, seed=100 + seed)
            report = transfer_report(
                target_x, target_y, base,
                cfg=TransferConfig(max_rounds=20, early_stop_rounds=10),
                seeds=(seed,),
            )
            if report.after_accuracy[0] >= report.before_accuracy[0]:
                wins += 1
        assert wins >= 8


class TestPairedSplit:
    def test_quarter_partition(self):
        labels = np.repeat(np.arange(3), 40)
        rng = np.random.default_rng(0)
        train_mask, valid_mask, test_mask = _paired_split(labels, rng)
        assert not np.any(train_mask & valid_mask)
        assert not np.any(train_mask & test_mask)
        assert not np.any(valid_mask & test_mask)
        np.testing.assert_array_equal(train_mask | valid_mask | test_mask, True)
        for cls in range(3):
            mask = labels == cls
            assert int((train_mask & mask).sum()) == 20
            assert int((valid_mask & mask).sum()) == 10
            assert int((test_mask & mask).sum()) == 10

    def test_deterministic_given_rng_seed(self):
        labels = np.random.default_rng(1).integers(0, 4, size=100)
        a = _paired_split(labels, np.random.default_rng(5))
        b = _paired_split(labels, np.random.default_rng(5))
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)


class TestTransferReport:
    def test_report_layout(self, base_setup):
        base, draw = base_setup
        target_x, target_y = draw(32, seed=11)
        report = transfer_report(
            target_x, target_y, base,
            cfg=TransferConfig(max_rounds=5, early_stop_rounds=3),
            seeds=(0, 1, 2),
        )
        assert report.before_per_class.shape == (3, 3)
        assert report.after_per_class.shape == (3, 3)
        assert report.before_accuracy.shape == (3,)
        rows = report.per_class_rows()
        assert [c for c, _, _ in rows] == [0, 1, 2]
        mean_before, mean_after = report.mean_row()
        assert 0.0 <= mean_before <= 1.0
        assert 0.0 <= mean_after <= 1.0

    def test_shifted_target_prefers_warm_start(self, base_setup):
        base, draw = base_setup
        wins = 0
        for seed in range(6):
            target_x, target_y = draw(28, seed=200 + seed)
            target_x = shifted(target_x, seed=300 + seed, gain_lo=0.8, gain_hi=1.2)
            report = transfer_report(
                target_x, target_y, base,
                cfg=TransferConfig(max_rounds=25, early_stop_rounds=10),
                seeds=(seed,),
            )
            if report.after_accuracy[0] >= report.before_accuracy[0]:
                wins += 1
        assert wins >= 4

    def test_config_validation(self):
        with pytest.raises(ValueError):
            TransferConfig(learning_rate=0.0)
        with pytest.raises(ValueError):
            TransferConfig(max_rounds=0)
