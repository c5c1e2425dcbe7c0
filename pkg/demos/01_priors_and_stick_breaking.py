"""Tour of the probability-vector priors.

Three priors for mixture weights, in increasing structure:

1. Dirichlet: the plain conjugate baseline.
2. Sparse Dirichlet mixture (SDM): each mixture component boosts one
   category by an equivalent sample size; with a large boost the posterior
   snaps onto whichever category the data favors (winner takes all).
3. Stick-breaking mixture (SBM): weights are built by breaking a unit stick,
   each break drawn from a three-part beta mixture whose extreme components
   park the break near 0 (skip this position) or near 1 (consume the rest).

All three admit conjugate posterior updates from count data, which is what
keeps the Gibbs samplers closed-form.
"""

import numpy as np

from mtdbayes.priors import (
    DirichletSpec,
    SBMSpec,
    SDMSpec,
    dirichlet_sample,
    sbm_mimic_dirichlet,
    sbm_posterior_sample,
    sbm_sample,
    sdm_posterior_sample,
    sdm_sample,
)
from mtdbayes.probcore import RngStream, stick_break, stick_unbreak

rng = RngStream(2024)
np.set_printoptions(precision=3, suppress=True)

print("=== stick breaking ===")
fractions = np.array([0.2, 0.5])
theta = stick_break(fractions)
print(f"fractions {fractions} -> weights {theta}")
print(f"and back: {stick_unbreak(theta)}")

print("\n=== Dirichlet vs sparse mixture, prior draws ===")
alpha = np.ones(4)
print("Dirichlet(1,1,1,1) draws:")
print(dirichlet_sample(DirichletSpec(alpha), rng, size=3))
print("sparse mixture with boost 25 concentrates each draw on one corner:")
print(sdm_sample(SDMSpec(alpha, beta=25.0), rng, size=3))

print("\n=== winner-takes-all posterior ===")
counts = np.array([9, 1, 0, 0])
print(f"counts {counts}")
post = sdm_posterior_sample(SDMSpec(alpha, beta=25.0), counts, rng, size=2000)
print(f"posterior means: {post.mean(axis=0)}   (category 0 swallows the boost)")

print("\n=== stick-breaking mixture shrinkage ===")
m = 3
spec = SBMSpec(
    pi1=np.full(m, 0.5), pi3=np.full(m, 0.1), eta=1000.0,
    gamma=np.full(m, 0.25), delta=np.full(m, 0.25),
)
draws = sbm_sample(spec, rng, size=2000)
print(f"prior means with pi1 = 0.5, eta = 1000: {draws.mean(axis=0)}")
print(f"fraction of draws with some weight > 0.95: {(draws.max(axis=1) > 0.95).mean():.2f}")

post = sbm_posterior_sample(spec, np.array([2, 30, 1, 2]), rng, size=2000)
print(f"posterior means after counts (2, 30, 1, 2): {post.mean(axis=0)}")

print("\n=== matching a Dirichlet with pure stick breaking ===")
target = np.array([2.0, 1.0, 1.0])
gamma, delta = sbm_mimic_dirichlet(target)
match = SBMSpec(np.zeros(2), np.zeros(2), 10.0, gamma, delta)
draws = sbm_sample(match, rng, size=50_000)
print(f"matched shapes gamma={gamma}, delta={delta}")
print(f"component means {draws.mean(axis=0)} vs Dirichlet means {target / target.sum()}")
