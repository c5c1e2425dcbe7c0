"""Bayesian mixture transition distribution models for high-order
discrete-state Markov chains.

Library layout:

- ``probcore``: simplex utilities, stick breaking, seeded random streams
- ``priors``: Dirichlet / sparse-mixture / stick-breaking-mixture priors
- ``mtd``, ``mmtd``: model parameterizations and transition evaluation
- ``inference``: full and collapsed Gibbs samplers and the MCMC driver
- ``postprocess``: inclusion index, prediction, loss, summaries
- ``simulate``: ground-truth generation and the fit-and-score harness
- ``discretize``: quantile binning of numeric series
- ``cli``: batch commands (also installed as the ``mtdbayes`` script)
"""

from .inference import (
    McmcConfig,
    MmtdModel,
    MtdgModel,
    MtdModel,
    PosteriorSamples,
    run_mcmc,
)
from .postprocess import (
    l1_loss,
    lag_inclusion,
    predict_transition,
    predict_transition_batch,
    q_redundancy,
    summarize,
)
from .probcore import RngStream
from .profiles import make_profile
from .simulate import ScenarioSpec, make_scenario_data, run_study

__version__ = "0.1.0"

__all__ = [
    "McmcConfig",
    "MmtdModel",
    "MtdgModel",
    "MtdModel",
    "PosteriorSamples",
    "RngStream",
    "ScenarioSpec",
    "l1_loss",
    "lag_inclusion",
    "make_profile",
    "make_scenario_data",
    "predict_transition",
    "predict_transition_batch",
    "q_redundancy",
    "run_mcmc",
    "run_study",
    "summarize",
    "__version__",
]
