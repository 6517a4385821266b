"""
Stratified k-fold bagging
=========================
"""
import numpy as np

from semgkit import TrainParams, predict_bagged, stratified_kfold, train_bagged
from semgkit.gbdt import predict_label

rng = np.random.default_rng(42)

# imbalanced three-class problem
sizes = (300, 120, 80)
centers = rng.normal(0.0, 2.5, (3, 8))
X = np.vstack([rng.normal(centers[c], 1.0, (sizes[c], 8)) for c in range(3)])
y = np.repeat(np.arange(3), sizes)
order = rng.permutation(len(y))
X, y = X[order], y[order]
cut = 400

# stratified_kfold keeps class proportions: per class, fold counts
# differ by at most one
assignment = stratified_kfold(y[:cut], k=5, seed=0)
for cls in range(3):
    counts = np.bincount(assignment[y[:cut] == cls], minlength=5)
    print(f"class {cls} fold counts: {counts.tolist()}")

params = TrainParams(
    learning_rate=0.15,
    num_leaves=15,
    max_rounds=30,
    min_data_in_leaf=10,
    early_stop_rounds=10,
    seed=1,
)
bag = train_bagged(X[:cut], y[:cut], params=params, k=5)
labels, proba = predict_bagged(bag, X[cut:])

member_acc = [
    float(np.mean(predict_label(m, X[cut:]) == y[cut:])) for m in bag.members
]
print("\nmember accuracies:", [round(a, 3) for a in member_acc])
print("mean member accuracy:", round(float(np.mean(member_acc)), 4))
print("bagged accuracy:", round(float(np.mean(labels == y[cut:])), 4))
print("averaged probabilities sum to one:",
      bool(np.allclose(proba.sum(axis=1), 1.0)))
