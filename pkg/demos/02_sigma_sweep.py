"""
Error versus noise level
========================

A small Monte Carlo sweep over sigma_max at two tensor sizes.  The mean
l2,inf membership error grows roughly linearly in sigma_max and shrinks as
p grows.
"""

from tensormm.simulate import ExperimentConfig, cell_means, linear_fit, run_sweep, write_csv

config = ExperimentConfig(p=(60, 120), sigma_max=(1.0, 11.0, 21.0, 31.0), trials=4, seed=1)
records = run_sweep(config, progress=lambda done, total: print(f"\r{done}/{total}", end=""))
print()

# Records are plain dicts; save them for later analysis
write_csv("sigma_sweep_demo.csv", records)

means = cell_means(records)
print(" p   sigma   mean l2inf   ok/failed")
for (p, alpha, sigma), (mean, n_ok, n_failed) in sorted(means.items()):
    print(f"{p:3d}  {sigma:5.1f}   {mean:9.4f}    {n_ok}/{n_failed}")

# Linear fit of error against sigma_max for each p
for p in config.p:
    sig = [s for (pp, _, s) in sorted(means) if pp == p]
    err = [means[(p, 1.0, s)][0] for s in sig]
    a, b, r2 = linear_fit(sig, err)
    print(f"p={p}: error ~ {a:.4f} + {b:.4f} sigma_max  (R^2 = {r2:.3f})")
