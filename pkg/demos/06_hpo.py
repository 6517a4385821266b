"""
Hyperparameter search with a tree-structured Parzen estimator
=============================================================

The optimizer samples startup trials uniformly, then splits history
into good and bad fractions and proposes candidates where the good
density dominates the bad one. Dimensions can be linear or log scaled,
continuous or integer.
"""
import json
import os
import tempfile

from semgkit import Dimension, default_space, int_dim, log_dim, optimize

# A smooth 1-D objective with its optimum at x = 0.3. Higher is better.
space = {"x": Dimension(0.0, 1.0)}
study = optimize(space, 40, lambda p: -((p["x"] - 0.3) ** 2), seed=0)

print("trials:", len(study.trials))
print("best x:", round(study.best_params["x"], 4))
print("best value:", round(study.best_value, 6))

head = [round(t.params["x"], 3) for t in study.trials[:10]]
tail = [round(t.params["x"], 3) for t in study.trials[-10:]]
print("first ten suggestions:", head)
print("last ten suggestions:", tail)

# A mixed space: log-scaled learning rate, integer leaf count.
mixed = {
    "learning_rate": log_dim(0.01, 0.3),
    "num_leaves": int_dim(7, 63),
}


def objective(params):
    # stands in for a real validation score
    lr_pen = (params["learning_rate"] - 0.07) ** 2
    leaves_pen = ((params["num_leaves"] - 31) / 56.0) ** 2
    return -(lr_pen + leaves_pen)


mixed_study = optimize(mixed, 30, objective, seed=1)
print("\nmixed-space best:", {
    k: round(v, 4) if isinstance(v, float) else v
    for k, v in mixed_study.best_params.items()
})

# Every finished trial can be streamed to a JSONL log and resumed later.
with tempfile.TemporaryDirectory() as tmp:
    log = os.path.join(tmp, "trials.log")
    optimize(space, 12, lambda p: -((p["x"] - 0.3) ** 2), seed=2, log_path=log)
    with open(log) as fh:
        lines = [json.loads(line) for line in fh]
    print("\nlogged records:", len(lines))
    print("first record:", lines[0])

# The booster's own search space ships as a default.
print("\ndefault space dimensions:", sorted(default_space()))
