"""Shared statistical machinery for the sampler-correctness tests:

- forward generation of (allocations, observations) given model parameters,
- the successive-conditional joint-distribution check (forward-simulated
  parameter/data statistics versus statistics from alternating one Gibbs
  sweep with data regeneration; both target the same joint),
- exhaustive enumeration of the allocation posterior for tiny problems.
"""

from itertools import product

import numpy as np

from mtdbayes.diagnostics import ess
from mtdbayes.inference import (
    MmtdModel,
    MtdgModel,
    _draw_q_flat,
    _full_sweep,
    accumulate_counts,
    collapsed_log_marginal,
    draw_prior_state,
    mtdg_collapsed_gibbs_sweep,
    prior_swap_metropolis,
)
from mtdbayes.priors import (
    DirichletSpec,
    SBMSpec,
    dirichlet_marginal_loglik,
    sbm_marginal_loglik,
)
from mtdbayes.probcore import RngStream


def forward_generate(model, state, n_total: int, context: np.ndarray, rng: RngStream):
    """Draw data and allocations forward from the model given parameters.

    The first L states are fixed at ``context``; each later observation draws
    an allocation from the candidate weights and an outcome from the selected
    transition-block column.  Returns (data, alloc).
    """
    gen = rng.generator
    l = model.n_lags
    data = np.empty(n_total, dtype=np.int64)
    data[:l] = context
    w = model.candidate_weights(state)
    cum_w = np.cumsum(w)
    cum_q = np.cumsum(state.q_flat, axis=0)
    alloc = np.empty(n_total - l, dtype=np.int64)
    for t in range(l, n_total):
        hist = data[t - l:t][::-1]
        cols = model.candidate_columns(hist[None, :])[0]
        c = min(int(np.searchsorted(cum_w, gen.random() * cum_w[-1], side="right")), w.size - 1)
        col = cols[c]
        s = min(int(np.searchsorted(cum_q[:, col], gen.random(), side="right")), model.n_states - 1)
        alloc[t - l] = c
        data[t] = s
    return data, alloc


def geweke_zscores(model, n_total, stats_fn, n_forward, n_successive, seed):
    """z-scores comparing forward-simulated joint statistics against the
    successive-conditional sampler built from one full Gibbs sweep plus data
    regeneration.  Correct sweeps leave the joint invariant, so every
    statistic should agree up to Monte Carlo error."""
    rng = RngStream(seed)
    context = np.zeros(model.n_lags, dtype=np.int64)

    fwd = []
    for _ in range(n_forward):
        state = draw_prior_state(model, 0, rng)
        state.q_flat = _draw_q_flat(model, None, rng)
        data, alloc = forward_generate(model, state, n_total, context, rng)
        fwd.append(stats_fn(state, data, alloc))
    fwd = np.asarray(fwd)

    state = draw_prior_state(model, 0, rng)
    state.q_flat = _draw_q_flat(model, None, rng)
    data, alloc = forward_generate(model, state, n_total, context, rng)
    suc = []
    for _ in range(n_successive):
        ctx = model.make_context(data)
        state.alloc = alloc
        _full_sweep(model, state, ctx, rng)
        data, alloc = forward_generate(model, state, n_total, context, rng)
        suc.append(stats_fn(state, data, alloc))
    suc = np.asarray(suc)

    z = np.empty(fwd.shape[1])
    for j in range(fwd.shape[1]):
        se_f = fwd[:, j].std(ddof=1) / np.sqrt(n_forward)
        n_eff = max(ess(suc[None, :, j]), 4.0)
        se_s = suc[:, j].std(ddof=1) / np.sqrt(n_eff)
        z[j] = (fwd[:, j].mean() - suc[:, j].mean()) / np.hypot(se_f, se_s)
    return z


def weight_marginal_loglik(model, alloc_counts: np.ndarray) -> float:
    """Closed-form log marginal of the allocation counts under the model's
    weight priors, via the conjugate marginal of each prior."""

    def one(prior, counts):
        if isinstance(prior, DirichletSpec):
            return dirichlet_marginal_loglik(prior, counts)
        if isinstance(prior, SBMSpec):
            return sbm_marginal_loglik(prior, counts)
        raise TypeError(type(prior).__name__)

    if isinstance(model, MmtdModel):
        total = one(model.order_prior, model.order_counts(alloc_counts))
        for r in range(1, model.max_order + 1):
            total += one(model.config_priors[r - 1], alloc_counts[model.zeta_map.order_slice(r)])
        return total
    return one(model.lam_prior, alloc_counts)


def enumerate_alloc_posterior(model, ctx) -> dict[tuple, float]:
    """Exact posterior over entire allocation vectors by brute force, using
    the weight-marginal times the collapsed data marginal."""
    n = ctx.n_obs
    logps = {}
    for alloc in product(range(model.n_candidates), repeat=n):
        alloc_arr = np.array(alloc, dtype=np.int64)
        counts = accumulate_counts(model, ctx, alloc_arr)
        alloc_counts = np.bincount(alloc_arr, minlength=model.n_candidates)
        logps[alloc] = weight_marginal_loglik(model, alloc_counts) + collapsed_log_marginal(
            model, counts
        )
    values = np.array(list(logps.values()))
    values -= values.max()
    probs = np.exp(values)
    probs /= probs.sum()
    return dict(zip(logps.keys(), probs))


def mcmc_alloc_distribution(model, ctx, n_sweeps, seed, swap_period=10, burn=1000):
    """Empirical distribution over allocation vectors from the collapsed
    sampler with the prior-swap jump enabled."""
    rng = RngStream(seed)
    state = model.init_state(rng, ctx.n_obs)
    counts = accumulate_counts(model, ctx, state.alloc)
    freqs: dict[tuple, int] = {}
    for it in range(burn + n_sweeps):
        counts = mtdg_collapsed_gibbs_sweep(state, ctx, model, rng, counts)
        if swap_period and (it + 1) % swap_period == 0:
            _, counts, _ = prior_swap_metropolis(model, state, ctx, rng, counts)
        if it >= burn:
            key = tuple(state.alloc)
            freqs[key] = freqs.get(key, 0) + 1
    return {k: v / n_sweeps for k, v in freqs.items()}


def total_variation(p: dict, q: dict) -> float:
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


def mtdg_geweke_stats(model: MtdgModel):
    """Six monitored statistics for the intercept-plus-per-lag model."""
    k = model.n_states

    def stats(state, data, alloc):
        return np.array(
            [
                state.weights[0],
                state.weights[1],
                state.q_flat[0, 0],                 # intercept mass on state 0
                state.q_flat[0, 1],                 # lag-1 block, condition 0
                state.q_flat[0, 1 + k],             # lag-2 block, condition 0
                data[model.n_lags:].mean(),
            ]
        )

    return stats


def mmtd_geweke_stats(model: MmtdModel):
    """Six monitored statistics for the mixture-of-orders model."""
    off1 = model._col_offset(1)
    off2 = model._col_offset(2)

    def stats(state, data, alloc):
        return np.array(
            [
                state.order_weights[0],
                state.order_weights[1],
                state.config_weights[0][0],
                state.q_flat[0, 0],
                state.q_flat[0, off1] - state.q_flat[0, off2],
                data[model.n_lags:].mean(),
            ]
        )

    return stats
