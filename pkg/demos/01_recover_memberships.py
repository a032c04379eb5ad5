"""
Recovering mixed memberships from a noisy tensor
================================================

Draw a three-way mixed-membership model, add heteroskedastic noise, and
estimate the membership matrices with diagonal deletion, HOOI and SPA.
"""

import numpy as np

from tensormm import (HooiOptions, NoiseSpec, align_memberships, estimate_all, make_rng,
                      sample_mixed_model, sample_noise, sin_theta)

# A 100 x 100 x 100 tensor with three communities per mode.  The core is
# scaled so its smallest matricization singular value (Delta) is 10.
rng = make_rng(0)
model = sample_mixed_model((100, 100, 100), (3, 3, 3), delta=10.0, rng=rng, shuffle=True)
print("core condition number kappa:", round(model.kappa, 3))
print("incoherence mu0:", round(model.mu0, 3))

# Noise with per-entry standard deviation sigma_max * Beta(1, 1).
noisy = model.tensor + sample_noise(model.dims, NoiseSpec(sigma_max=20.0, alpha=1.0), rng)

# Full pipeline.  Memberships come back as row-stochastic matrices.
est = estimate_all(noisy, model.ranks, HooiOptions(t_max=100, tol=1e-9))
print("HOOI iterations:", est.factors.iterations_run, "converged:", est.factors.converged)

# Subspace recovery per mode
for k, (u_hat, u) in enumerate(zip(est.factors.factors, model.factors), start=1):
    print(f"mode {k}: sin-theta to the true factor = {sin_theta(u_hat, u):.4f}")

# Membership errors after the best column permutation
for k, (pi_hat, pi) in enumerate(zip(est.pis, model.memberships), start=1):
    res = align_memberships(pi_hat, pi)
    print(f"mode {k}: max row l2 error {res.l2inf_error:.3f}, "
          f"mean row l1 error {res.avg_l1_error:.3f}")

# A few estimated rows next to the truth
res = align_memberships(est.pis[0], model.memberships[0])
np.set_printoptions(precision=3, suppress=True)
print(np.hstack([est.pis[0][:5][:, res.permutation], model.memberships[0][:5]]))
