# # Features that come in groups
#
# 300 features split into 30 classes of 10. The response depends on four
# features from the same class. Once one member is in, the others are cheap
# to name: only log2(Q) bits for the class instead of log2(K).

import numpy as np

from mdlselect.fit import Dataset
from mdlselect.tpc import (TpcConfig, run_tpc, run_tpc_forward_backward, run_tpc_streamwise,
                           tpc_savings)

rng = np.random.default_rng(1)
n, m, K = 60, 300, 30
cmap = np.arange(m) // (m // K)
x = rng.standard_normal((n, m))
y = x[:, 40:44] @ np.array([1.5, -1.2, 1.0, -1.3]) + rng.standard_normal(n)
data = Dataset(x, y, class_map=cmap)

classed = run_tpc(data)
flat = run_tpc(data.without_classes())
print("with classes:   ", sorted(classed.selected_features), f"{classed.model_bits:.1f} model bits")
print("without classes:", sorted(flat.selected_features), f"{flat.model_bits:.1f} model bits")

# How much the class code saves, in closed form, for q features spread over Q classes:

for q, Q in [(4, 1), (4, 2), (4, 4)]:
    print(f"q={q} Q={Q}: {tpc_savings(q, Q, K, m):.1f} bits saved")

# Forward-backward can reach pairs that only help together; streamwise sees
# each feature once, in a given order.

fb = run_tpc_forward_backward(data, TpcConfig(extra_steps=3))
stream = run_tpc_streamwise(data, feature_order=rng.permutation(m))
print("forward-backward:", sorted(fb.selected_features))
print("streamwise:      ", sorted(stream.selected_features))
