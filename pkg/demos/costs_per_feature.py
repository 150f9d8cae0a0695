# # What does one feature cost?
#
# Each scheme charges a different number of bits to put one feature into
# `k` of `h` task models. Here m=2000 candidate features and h=20 tasks.

import numpy as np

from mdlselect.codes import MicCostParams, c_h, log_star, mic_model_cost

params = MicCostParams(m=2000, h=20)
print("c_20 =", round(c_h(20), 4), "  log*(20) =", round(log_star(20), 4))

# The independent (RIC) scheme pays the feature index again for every task,
# the all-or-none scheme pays one index plus h coefficients, and the subset
# scheme pays one index, a code for k, which k tasks, and k coefficients.

for k in (1, 2, 5, 10, 20):
    row = {s: mic_model_cost(s, k, params) for s in ("partial", "full", "ric")}
    best = min(row, key=row.get)
    print(f"k={k:>2}  " + "  ".join(f"{s}={v:6.1f}" for s, v in row.items()) + f"   cheapest: {best}")

# The subset code is never far from the better of the other two.

ks = np.arange(1, 21)
partial = np.array([mic_model_cost("partial", k, params) for k in ks])
other = np.minimum([mic_model_cost("ric", k, params) for k in ks], mic_model_cost("full", 1, params))
print("largest overhead of the subset code:", round(float(np.max(partial - other)), 1), "bits")
