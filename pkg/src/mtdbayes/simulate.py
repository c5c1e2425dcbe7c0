"""Synthetic ground-truth generation and the fit-and-score study harness.

A scenario fixes a true chain: a set of active lags and a transition tensor
over exactly those lags, with every outcome distribution drawn uniformly on
the simplex.  The chain is run through a burn-in, then contiguous training
and validation segments are cut, and models are scored by the scaled mean L1
distance between their posterior-mean transition estimates and the truth at
every validation point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .inference import McmcConfig, Model, run_mcmc
from .mmtd import matricize, unmatricize
from .postprocess import l1_loss, predict_transition_batch
from .probcore import RngStream

MAX_TRUTH_ENTRIES = 10**8


@dataclass
class ScenarioSpec:
    """Ground-truth design: state count, active lags, and segment lengths."""

    n_states: int
    active_lags: tuple[int, ...]
    train_len: int
    valid_len: int = 1000
    burnin_steps: int = 1000
    seed: int = 0

    def __post_init__(self) -> None:
        self.active_lags = tuple(int(l) for l in self.active_lags)
        if not self.active_lags or list(self.active_lags) != sorted(set(self.active_lags)):
            raise ValueError("active lags must be strictly increasing and nonempty")
        if self.active_lags[0] < 1:
            raise ValueError("lags are 1-based")
        if min(self.train_len, self.valid_len) < 1 or self.burnin_steps < 0:
            raise ValueError("invalid segment lengths")

    @property
    def order(self) -> int:
        return len(self.active_lags)

    @property
    def n_lags(self) -> int:
        """Maximal active lag; the true model's history horizon."""
        return self.active_lags[-1]

    def to_json(self) -> str:
        return json.dumps(
            {
                "n_states": self.n_states,
                "active_lags": list(self.active_lags),
                "train_len": self.train_len,
                "valid_len": self.valid_len,
                "burnin_steps": self.burnin_steps,
                "seed": self.seed,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "ScenarioSpec":
        doc = json.loads(text)
        return cls(
            n_states=doc["n_states"],
            active_lags=tuple(doc["active_lags"]),
            train_len=doc["train_len"],
            valid_len=doc.get("valid_len", 1000),
            burnin_steps=doc.get("burnin_steps", 1000),
            seed=doc.get("seed", 0),
        )


def random_truth(spec: ScenarioSpec, rng: RngStream) -> np.ndarray:
    """Transition tensor over the active lags with every outcome distribution
    drawn uniformly on the simplex (unit-shape symmetric Dirichlet)."""
    k = spec.n_states
    if k ** (spec.order + 1) > MAX_TRUTH_ENTRIES:
        raise ValueError("truth tensor exceeds the entry-count cap")
    cols = rng.generator.dirichlet(np.ones(k), size=k**spec.order).T
    return unmatricize(cols, spec.order)


@dataclass
class SimulatedData:
    """Contiguous train and validation segments plus the generating truth."""

    spec: ScenarioSpec
    truth: np.ndarray
    train: np.ndarray
    valid: np.ndarray

    def stitched(self, context: int) -> np.ndarray:
        """Validation segment preceded by `context` training states, so every
        validation point has a full history."""
        if context > self.train.size:
            raise ValueError("context longer than the training segment")
        if context == 0:
            return self.valid
        return np.concatenate([self.train[-context:], self.valid])

    def valid_histories(self, n_lags: int) -> np.ndarray:
        """(valid_len, n_lags) histories, most recent state first."""
        stream = self.stitched(n_lags)
        windows = np.lib.stride_tricks.sliding_window_view(stream, n_lags)
        return windows[:-1, ::-1]


def _truth_columns(truth: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(matricize(truth))


def simulate_chain(truth: np.ndarray, spec: ScenarioSpec, rng: RngStream) -> SimulatedData:
    """Run the true chain from a uniform random start, discard the burn-in,
    and split the remainder into train and validation segments."""
    k = spec.n_states
    horizon = spec.n_lags
    total = horizon + spec.burnin_steps + spec.train_len + spec.valid_len
    gen = rng.generator
    data = np.empty(total, dtype=np.int64)
    data[:horizon] = gen.integers(0, k, horizon)
    cols = _truth_columns(truth)
    cum = np.cumsum(cols, axis=0)
    offsets = np.array(spec.active_lags, dtype=np.int64)
    powers = k ** np.arange(spec.order, dtype=np.int64)
    u = gen.random(total - horizon)
    for t in range(horizon, total):
        col = int((data[t - offsets] * powers).sum())
        data[t] = min(int(np.searchsorted(cum[:, col], u[t - horizon], side="right")), k - 1)
    start = horizon + spec.burnin_steps
    return SimulatedData(
        spec=spec,
        truth=truth,
        train=data[start:start + spec.train_len],
        valid=data[start + spec.train_len:],
    )


def make_scenario_data(spec: ScenarioSpec) -> SimulatedData:
    """Draw the truth and the chain from the scenario seed."""
    truth_rng = RngStream(spec.seed, 0)
    chain_rng = RngStream(spec.seed, 1)
    truth = random_truth(spec, truth_rng)
    return simulate_chain(truth, spec, chain_rng)


def true_transition_probs(sim: SimulatedData) -> np.ndarray:
    """(valid_len, K) true transition distributions at every validation point."""
    spec = sim.spec
    hist = sim.valid_histories(spec.n_lags)
    cols = _truth_columns(sim.truth)
    sel = hist[:, np.array(spec.active_lags) - 1]
    powers = spec.n_states ** np.arange(spec.order, dtype=np.int64)
    return cols[:, sel @ powers].T


def run_study(
    sim: SimulatedData,
    roster: list[tuple[str, Model | None]],
    config: McmcConfig,
) -> pd.DataFrame:
    """Fit every roster model on the training segment and score its
    posterior-mean transition estimates against the truth at each validation
    point.  A ``None`` model scores the truth against itself (the oracle row).

    Returns a (model, loss) table; fitted samples are attached in
    ``DataFrame.attrs['samples']``.
    """
    truth_probs = true_transition_probs(sim)
    rows = []
    fitted = {}
    for name, model in roster:
        if model is None:
            estimates = truth_probs
        else:
            samples = run_mcmc(model, sim.train, config)
            fitted[name] = samples
            estimates = predict_transition_batch(samples, sim.valid_histories(model.n_lags))
        rows.append({"model": name, "loss": l1_loss(estimates, truth_probs)})
    table = pd.DataFrame(rows)
    table.attrs["samples"] = fitted
    return table
