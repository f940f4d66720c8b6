"""
How many samples are enough?
============================

Compare the variance-free bound, the variance-aware bound and the
zero-one estimator size for scores in [0, b], and show the relative-error
interval of a posterior formed as a ratio of two estimates.
"""

import numpy as np

from aisbn import stopping

b, eps, delta = 1.0, 0.05, 0.05
print(f"{'mu':>8} {'sigma2':>10} {'N_mu':>10} {'N_sigma':>10} {'N_01':>10}")
for mu in (0.5, 0.1, 0.01):
    for frac in (1.0, 0.1, 0.01):
        s2 = frac * mu * (b - mu)
        print(f"{mu:8.2f} {s2:10.2e} "
              f"{stopping.min_samples_mu(b, mu, eps, delta):10d} "
              f"{stopping.min_samples_sigma(b, mu, s2, eps, delta):10d} "
              f"{stopping.min_samples_zero_one(mu, s2, eps, delta):10d}")

# %%
# Knowing the variance matters most when it is far below its maximum
# mu (b - mu): the ratio N_mu / N_sigma grows as the scores concentrate.
mu = 0.01
for frac in np.logspace(0, -4, 5):
    s2 = frac * mu * (b - mu)
    ratio = stopping.mu_bound(b, mu, eps, delta) / stopping.sigma_bound(b, mu, s2, eps, delta)
    print(f"sigma2 / max = {frac:8.0e}   N_mu / N_sigma = {ratio:8.1f}")

# %%
# The staged estimator uses alpha = ln(2/delta_s) / (eps (1 - eps)).
p = stopping.StoppingParams.from_delta(0.025, 0.025, stopping.PUBLISHED_DELTA_S)
print("alpha at eps = delta = 0.025:", p.alpha)
print("posterior interval at eps = 0.05:", stopping.posterior_error_bounds(0.05, 0.05))
