"""
Warm-start transfer to a new recording session
==============================================

A model trained on one subject rarely fits a new session unchanged:
electrode placement and skin condition shift the signal. Warm starting
keeps the base model's trees, initializes boosting from their raw
scores, and appends a few new trees fitted on the small target set.
The base trees are never modified.
"""
import numpy as np

from semgkit import (
    SyntheticSpec,
    TrainParams,
    TransferConfig,
    compute_stats,
    extract_matrix,
    generate_synthetic,
    make_cv_plans,
    predict_label,
    predict_raw,
    segment,
    split_by_repetition,
    standardize,
    train,
    transfer_report,
    warm_start,
)


def windows_of(spec, gains=None):
    rec = generate_synthetic(spec)
    if gains is not None:
        rec = type(rec)(
            subject_id=rec.subject_id,
            sample_rate=rec.sample_rate,
            channels=rec.channels * gains[:, None],
            stimulus=rec.stimulus,
            repetition=rec.repetition,
        )
    return segment(rec)


# Source session: plenty of data. Target session: same gestures (equal
# class_seed), different noise realization and per-channel gains.
source_spec = SyntheticSpec(
    n_classes=4, repetitions=6, hold_duration=1.6, rest_duration=0.4,
    seed=0, class_seed=9,
)
target_spec = SyntheticSpec(
    n_classes=4, repetitions=4, hold_duration=1.0, rest_duration=0.4,
    seed=1, class_seed=9,
)
gains = np.random.default_rng(99).uniform(0.8, 1.2, 12)

source_windows = windows_of(source_spec)
target_windows = windows_of(target_spec, gains)
print("source windows:", len(source_windows))
print("target windows:", len(target_windows))

# Standardize everything with SOURCE statistics: the base model's input
# scale must be preserved on the target.
stats = compute_stats(source_windows)
X_src, y_src, rep_src = extract_matrix(
    [standardize(stats, w) for w in source_windows]
)
X_tgt, y_tgt, _ = extract_matrix(
    [standardize(stats, w) for w in target_windows]
)

plan = make_cv_plans()[0]
train_mask = np.isin(rep_src, sorted(plan.train_repetitions))
base = train(
    X_src[train_mask], y_src[train_mask],
    params=TrainParams(learning_rate=0.1, num_leaves=16, max_rounds=30,
                       min_data_in_leaf=10, max_bins=63, early_stop_rounds=0),
)
base_acc = float(np.mean(predict_label(base, X_tgt) == y_tgt))
print("base model on raw target:", round(base_acc, 4))

# transfer_report runs the paired comparison: per seed, split the target,
# train from scratch and warm start on the same splits, score both.
report = transfer_report(
    X_tgt, y_tgt, base,
    cfg=TransferConfig(learning_rate=0.1, max_rounds=20, early_stop_rounds=5),
    seeds=(0, 1, 2, 3, 4),
)
print("\nper-class recall (mean over seeds):")
for row in report.per_class_rows():
    print("  movement", row[0], "scratch", round(row[1], 3),
          "warm", round(row[2], 3))
before_mean, after_mean = report.mean_row()
print("mean:", "scratch", round(before_mean, 4), "warm", round(after_mean, 4))
wins = int(np.sum(report.after_accuracy >= report.before_accuracy))
print("warm >= scratch in", wins, "of", len(report.seeds), "seeds")

# The warm model extends the base additively: truncated to the base's
# rounds it reproduces the base scores exactly.
warm = warm_start(base, X_tgt, y_tgt, cfg=TransferConfig(max_rounds=10), seed=0)
probe = X_tgt[:32]
same = np.array_equal(
    predict_raw(warm, probe, n_rounds=base.best_iteration),
    predict_raw(base, probe, n_rounds=base.best_iteration),
)
print("base scores preserved inside warm model:", same)
