# # Borrowing from related tasks
#
# Four well-sampled tasks (n=200) share a support with a new task that has
# only 30 rows. Counting what the earlier models chose gives a prior that
# makes those features cheaper to code on the new task.

import numpy as np

from mdlselect.fit import Dataset
from mdlselect.tpc import run_tpc
from mdlselect.transfer import build_prior, dumps_prior, run_transfer_tpc

m = 500
cmap = np.arange(m) // 10
true = [31, 34, 172, 175]


def task(rng, n):
    x = rng.standard_normal((n, m))
    beta = np.zeros(m)
    beta[true] = rng.choice([-1, 1], 4) * rng.uniform(0.5, 1.0, 4)
    return Dataset(x, x @ beta + rng.standard_normal(n), class_map=cmap)


rng = np.random.default_rng(7)
prior = build_prior([run_tpc(task(rng, 200)) for _ in range(4)])
print(dumps_prior(prior).splitlines()[:3])
print("c3/f31 counts:", prior.feature_counts["c3/f31"])

hits = {"tpc": 0, "transfer": 0}
for _ in range(20):
    new = task(rng, 30)
    hits["tpc"] += len(set(run_tpc(new).selected_features) & set(true))
    hits["transfer"] += len(set(run_transfer_tpc(new, prior).selected_features) & set(true))
print({k: v / 80 for k, v in hits.items()}, "mean recall over 20 small tasks")
