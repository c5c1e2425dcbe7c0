"""Order and lag selection with the mixture-of-orders model.

We simulate a binary chain whose transitions truly depend on lags 1 and 3
jointly (second order), over-specify a model allowing any subset of lags
1..4 up to order 2, and let the sparsity priors shrink back to the truth.
The lag-inclusion index then summarizes per-lag importance across orders.

Runs in about half a minute.
"""

import warnings

import numpy as np

from mtdbayes.inference import McmcConfig, run_mcmc
from mtdbayes.postprocess import lag_inclusion, summarize
from mtdbayes.profiles import make_profile
from mtdbayes.simulate import ScenarioSpec, make_scenario_data

np.set_printoptions(precision=3, suppress=True)

spec = ScenarioSpec(n_states=2, active_lags=(1, 3), train_len=400, valid_len=10, seed=42)
sim = make_scenario_data(spec)
print(f"simulated second-order chain on lags {spec.active_lags}, T = {sim.train.size}")

model = make_profile("mmtd-sdm", n_states=2, n_lags=4, max_order=2, train_len=sim.train.size)
config = McmcConfig(n_burn=4000, n_keep=8000, thin=8, n_chains=4, seed=7)
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    samples = run_mcmc(model, sim.train, config)

print("\nposterior weight summary:")
print(summarize(samples).round(3).to_string(index=False))

_, inclusion = lag_inclusion(samples)
print("\nlag-inclusion index (lag 0 is the intercept):")
print(inclusion.round(3).to_string(index=False))
print(
    "\nThe pair configuration (1,3) should dominate order 2 and the index "
    "should rank lags 1 and 3 far above 2 and 4."
)
print(f"\nswap acceptance rate: {samples.swap_acceptance_rate():.4f}")
print(f"max split-chain scale reduction: {samples.diagnostics['max_rhat']:.3f}")
