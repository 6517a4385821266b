"""
Windowing, cross-validation plans, and the 336-dim feature vector
=================================================================

Windows of 1280 samples (640 ms) slide over each constant-gesture run
with a step of 320. A window never spans two gestures. The three fixed
cross-validation plans split by repetition so that overlapping windows
never leak across the train/test boundary.
"""
import numpy as np

from semgkit import (
    SyntheticSpec,
    compute_stats,
    extract_features,
    extract_matrix,
    feature_names,
    generate_synthetic,
    make_cv_plans,
    plv_matrix,
    segment,
    split_by_repetition,
    standardize,
)

rec = generate_synthetic(
    SyntheticSpec(n_classes=4, repetitions=6, hold_duration=1.2, rest_duration=0.3, seed=3)
)
windows = segment(rec, window_len=1280, step=320)
print("windows:", len(windows))
print("labels present:", sorted({w.label for w in windows}))

for i, plan in enumerate(make_cv_plans(), start=1):
    train_w, test_w = split_by_repetition(windows, plan)
    print(
        f"plan {i}: train reps {sorted(plan.train_repetitions)} "
        f"({len(train_w)} windows), test reps {sorted(plan.test_repetitions)} "
        f"({len(test_w)} windows)"
    )

# Standardization statistics come from training windows only.
plan = make_cv_plans()[0]
train_w, test_w = split_by_repetition(windows, plan)
stats = compute_stats(train_w)
train_std = [standardize(stats, w) for w in train_w]
test_std = [standardize(stats, w) for w in test_w]

# One window turns into 336 numbers: 6 time-domain stats per channel,
# 10 band powers per channel, and the 12 x 12 phase-locking matrix.
names = feature_names()
vec = extract_features(train_std[0])
print("\nfeature vector length:", vec.shape[0])
print("first time-domain block:", names[:6])
print("first band-power name:", names[72])
print("first plv name:", names[192])

# PLV is symmetric with a unit diagonal.
P = plv_matrix(train_std[0].data)
print("plv diagonal all one:", bool(np.allclose(np.diag(P), 1.0)))
print("plv symmetric:", bool(np.allclose(P, P.T)))

X, y, reps = extract_matrix(train_std)
print("\nfeature matrix:", X.shape, "labels:", np.bincount(y)[1:])
