"""
Discrete communities: rank selection and K-medians
==================================================

When every node belongs to exactly one community, clustering the rows of
the HOOI factors recovers the partition.  The Tucker ranks can be chosen
from the data with a scree elbow.
"""

import math

from tensormm import (HooiOptions, NoiseSpec, dd_init, hooi, kmedians, make_rng,
                      misclustering, sample_blockmodel, sample_noise, select_ranks)

rng = make_rng(3)
p, r, delta = 100, 3, 10.0

# Noise level at five times the signal-strength proxy
# Delta^2 / sigma^2 = 5 r^3 log(p) / p^1.5
sigma = delta / math.sqrt(5 * r ** 3 * math.log(p) / p ** 1.5)
model = sample_blockmodel((p, p, p), (r, r, r), delta, rng)
noisy = model.tensor + sample_noise(model.dims, NoiseSpec(sigma), rng)
print(f"sigma_max = {sigma:.2f}")

# Ranks from the hollowed-Gram scree of each mode.  The elbow can stop one
# short when the signal singular values are widely spread, so treat it as a
# starting point.
print("selected ranks:", select_ranks(noisy, max_rank=8))

# Factors, then K-medians on their rows
fs = hooi(noisy, (r, r, r), dd_init(noisy, (r, r, r)), HooiOptions())
for k, (u, pi) in enumerate(zip(fs.factors, model.memberships), start=1):
    labels = kmedians(u, r, rng=make_rng(3, k)).labels
    print(f"mode {k}: misclustering rate {misclustering(labels, pi.argmax(axis=1)):.3f}")
