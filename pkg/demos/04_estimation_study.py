"""Miniature fit-and-score study.

A third-order chain on lags 1 and 3 is approximated by three models of
increasing structure: intercept-mixing only through a shared matrix, the
per-lag generalized form, and the mixture of orders.  Estimation quality is
the scaled mean L1 distance between posterior-mean transition estimates and
the true transition distributions at held-out points (0 = perfect, 100 =
worst possible for two states).  The oracle row scores the truth against
itself as a floor.

Runs in about a minute.
"""

import warnings

import numpy as np

from mtdbayes.inference import McmcConfig
from mtdbayes.profiles import make_profile
from mtdbayes.simulate import ScenarioSpec, make_scenario_data, run_study

np.set_printoptions(precision=3, suppress=True)

spec = ScenarioSpec(n_states=2, active_lags=(1, 2, 3), train_len=300, valid_len=500, seed=11)
sim = make_scenario_data(spec)
print(f"truth: order-{spec.order} chain on lags {spec.active_lags}; train {sim.train.size}, "
      f"validation {sim.valid.size}")

t = sim.train.size
roster = [
    ("oracle", None),
    ("shared-matrix L=4", make_profile("mtd-sbm", 2, 4)),
    ("per-lag L=4", make_profile("mtdg-sbm", 2, 4)),
    ("orders<=3, L=4", make_profile("mmtd-sdm", 2, 4, max_order=3, train_len=t)),
]
config = McmcConfig(n_burn=4000, n_keep=8000, thin=8, n_chains=4, seed=3)
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    table = run_study(sim, roster, config)

print("\nscaled mean L1 loss (lower is better):")
print(table.round(2).to_string(index=False))
print("\nAdditive mixing over single lags cannot represent joint dependence "
      "on several lags, so the mixture of orders should win.")
