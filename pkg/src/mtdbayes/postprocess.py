"""Posterior summaries: lag-inclusion index, predictive transition estimates,
scaled L1 loss, tensor redundancy diagnostics, and weight tables.

Transition prediction exploits that the model transition probability is
linear in the per-candidate products `candidate weight x transition block`,
so the posterior-mean prediction at any history can be read off the
draw-averaged product blocks instead of re-evaluating every draw.
"""

from __future__ import annotations

import numpy as np
import pandas as pd

from .diagnostics import ess, split_rhat
from .inference import (
    MmtdModel,
    MtdgModel,
    MtdModel,
    PosteriorSamples,
    lag_history_matrix,
)

INTERVAL_PROBS = (0.025, 0.975)  # equal-tailed 95% credible interval

# Emitted alongside inclusion summaries: shrinkage on the order weights means
# a high intercept share is not by itself evidence against serial dependence.
INTERCEPT_CAVEAT = (
    "A high inclusion index for lag 0 should not be interpreted as a lack of "
    "serial dependence unless it is near 1 with high confidence; a low lag-0 "
    "index relative to other lags can indicate strong dependence."
)


def _lag_membership(samples: PosteriorSamples) -> np.ndarray:
    """(n_candidates, n_lags) indicator of lag membership per candidate."""
    model = samples.model
    mem = np.zeros((model.n_candidates, model.n_lags))
    if isinstance(model, MmtdModel):
        for i, config in enumerate(model.zeta_map.configs):
            for lag in config:
                mem[i, lag - 1] = 1.0
    elif isinstance(model, MtdgModel):
        for l in range(1, model.n_lags + 1):
            mem[l, l - 1] = 1.0
    else:
        for l in range(model.n_lags):
            mem[l, l] = 1.0
    return mem


def lag_inclusion(samples: PosteriorSamples) -> tuple[np.ndarray, pd.DataFrame]:
    """Per-draw inclusion index for lags 0..L plus a summary table.

    Lag ``l >= 1`` accumulates the mixture weight of every candidate whose
    lag configuration contains ``l``; lag 0 carries the intercept weight.
    The single-matrix model has no intercept, so its lag-0 column is zero.
    Returns ``(index, summary)`` with ``index`` of shape (n_draws, L + 1).
    """
    model = samples.model
    cand_w = samples.candidate_weight_draws()
    index = np.zeros((samples.n_draws, model.n_lags + 1))
    index[:, 1:] = cand_w @ _lag_membership(samples)
    if not isinstance(model, MtdModel):
        index[:, 0] = cand_w[:, 0]
    lo, hi = np.quantile(index, INTERVAL_PROBS, axis=0)
    summary = pd.DataFrame(
        {
            "lag": np.arange(model.n_lags + 1),
            "mean": index.mean(axis=0),
            "lo95": lo,
            "hi95": hi,
        }
    )
    summary.attrs["note"] = INTERCEPT_CAVEAT
    return index, summary


def mean_product_blocks(samples: PosteriorSamples) -> list[np.ndarray]:
    """Draw-averaged ``weight x block`` product per candidate.

    Entry c has shape (K, block width); summing the history-selected columns
    over candidates gives the posterior-mean transition distribution.
    """
    model = samples.model
    w = samples.candidate_weight_draws()
    q = samples.q_matrix()
    starts = model.candidate_block_starts()
    out = []
    for c in range(model.n_candidates):
        if isinstance(model, MmtdModel):
            sl = model.block_slice(int(model.zeta_map.orders[c]))
        elif isinstance(model, MtdgModel):
            sl = model.block_slice(c)
        else:
            sl = model.block_slice()
        out.append(np.einsum("d,dkj->kj", w[:, c], q[:, :, sl]) / samples.n_draws)
    return out


def predict_transition_batch(samples: PosteriorSamples, histories) -> np.ndarray:
    """Posterior-mean transition distribution at each history row.

    ``histories`` is (n, L), most recent state first; returns (n, K).
    """
    model = samples.model
    histories = np.asarray(histories, dtype=np.int64)
    if histories.ndim == 1:
        histories = histories[None, :]
    cols = model.candidate_columns(histories)
    starts = model.candidate_block_starts()
    blocks = mean_product_blocks(samples)
    n = histories.shape[0]
    probs = np.zeros((n, model.n_states))
    for c, block in enumerate(blocks):
        probs += block[:, cols[:, c] - starts[c]].T
    return probs


def predict_transition(samples: PosteriorSamples, lagged) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and equal-tailed 95% intervals of the transition
    distribution at one history.

    Returns ``(mean, intervals)`` with ``intervals`` of shape (K, 2).
    """
    model = samples.model
    lagged = np.asarray(lagged, dtype=np.int64)
    cols = model.candidate_columns(lagged[None, :])[0]
    w = samples.candidate_weight_draws()
    q = samples.q_matrix()
    per_draw = np.einsum("dc,dkc->dk", w, q[:, :, cols])
    lo, hi = np.quantile(per_draw, INTERVAL_PROBS, axis=0)
    return per_draw.mean(axis=0), np.column_stack([lo, hi])


def log_predictive_score(samples: PosteriorSamples, data) -> float:
    """Mean log posterior-predictive probability of each held-out observation
    given its history.  A plumbing metric for truth-free evaluation."""
    model = samples.model
    data = np.asarray(data, dtype=np.int64)
    ctx = model.make_context(data)
    probs = predict_transition_batch(samples, lag_history_matrix(data, model.n_lags))
    return float(np.log(probs[np.arange(ctx.n_obs), ctx.srows]).mean())


def l1_loss(estimates, truth) -> float:
    """Scaled mean L1 loss: 100 times the mean absolute-difference sum per
    point, divided by the number of states."""
    estimates = np.atleast_2d(np.asarray(estimates, dtype=np.float64))
    truth = np.atleast_2d(np.asarray(truth, dtype=np.float64))
    if estimates.shape != truth.shape:
        raise ValueError(
            f"shape mismatch: estimates {estimates.shape} vs truth {truth.shape}"
        )
    n, k = estimates.shape
    return float(100.0 * np.abs(estimates - truth).sum() / (k * n))


def q_redundancy(tensor) -> np.ndarray:
    """Per-lag-axis redundancy of a transition tensor.

    For each lag axis, the mean L1 distance between outcome distributions
    across pairs of slices that differ only in that axis.  A score of 0 means
    the tensor is constant along the axis, i.e. the axis adds nothing over
    lower-order structure.
    """
    tensor = np.asarray(tensor, dtype=np.float64)
    r = tensor.ndim - 1
    if r < 1:
        raise ValueError("need at least one lag axis")
    k = tensor.shape[0]
    scores = np.empty(r)
    for axis in range(1, r + 1):
        t = np.moveaxis(tensor, axis, 1).reshape(k, k, -1)
        dist = np.abs(t[:, :, None, :] - t[:, None, :, :]).sum(axis=0)
        iu = np.triu_indices(k, 1)
        scores[axis - 1] = dist[iu].mean()
    return scores


def summarize(samples: PosteriorSamples) -> pd.DataFrame:
    """Posterior table for every mixture weight: mean, median, equal-tailed
    95% interval, effective sample size, and split scale reduction."""
    if samples.n_draws == 0:
        raise ValueError("no kept draws to summarize")
    rows = []
    for j, name in enumerate(samples.weight_names):
        draws = samples.weights[:, :, j]
        flat = draws.reshape(-1)
        lo, hi = np.quantile(flat, INTERVAL_PROBS)
        rows.append(
            {
                "param": name,
                "mean": flat.mean(),
                "median": np.median(flat),
                "lo95": lo,
                "hi95": hi,
                "ess": ess(draws),
                "rhat": split_rhat(draws),
            }
        )
    return pd.DataFrame(rows)


def posterior_mean_q(samples: PosteriorSamples) -> np.ndarray:
    """Draw-averaged transition blocks in the flat (K, total_cols) layout."""
    return samples.q_matrix().mean(axis=0)
