"""Gibbs samplers for the mixture transition models.

Each model augments the likelihood with one latent allocation per observation
naming the mixture component (lag, or order plus lag configuration) that
generated the transition.  Conditioned on allocations, every parameter has a
conjugate update; conditioned on parameters, allocations follow discrete
conditionals.  The collapsed samplers additionally integrate all transition
blocks out of the posterior, scoring allocation candidates by conjugate
predictive ratios, which mixes far better than the full parameterization.

Internally every model shares one layout: transition counts live in a
``(K, total_cols)`` matrix whose columns concatenate all count blocks
(intercept vector first where the model has one), and each allocation
candidate at each observation touches exactly one column, precomputed from
the data.  The hot loops over observations are compiled in ``_kernels``.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.special import gammaln

from . import _kernels
from .diagnostics import RHAT_WARN_THRESHOLD, ess, split_rhat
from .mmtd import ZetaMap
from .priors import (
    DirichletSpec,
    SBMSpec,
    SDMSpec,
    dirichlet_posterior_sample,
    sbm_posterior_sample,
    sdm_posterior_sample,
)
from .probcore import RngStream

WeightPrior = DirichletSpec | SBMSpec | SDMSpec


def _draw_weight_posterior(prior: WeightPrior, counts, rng: RngStream) -> np.ndarray:
    if isinstance(prior, DirichletSpec):
        return dirichlet_posterior_sample(prior, counts, rng)
    if isinstance(prior, SBMSpec):
        return sbm_posterior_sample(prior, counts, rng)
    if isinstance(prior, SDMSpec):
        return sdm_posterior_sample(prior, counts, rng)
    raise TypeError(f"unsupported weight prior: {type(prior).__name__}")


def lag_history_matrix(data: np.ndarray, n_lags: int) -> np.ndarray:
    """History rows for observations t = L..T-1: row i holds the states
    1, 2, ..., L steps before observation L + i, most recent first."""
    windows = np.lib.stride_tricks.sliding_window_view(data, n_lags)
    return windows[:-1, ::-1]


@dataclass
class DataContext:
    """Per-(model, data) precomputation for the samplers."""

    data: np.ndarray
    srows: np.ndarray       # outcomes, one per modeled observation
    cand_cols: np.ndarray   # (n_obs, n_candidates) count-matrix column per candidate

    @property
    def n_obs(self) -> int:
        return self.srows.size


@dataclass
class SuffCounts:
    """Transition counts in the flat block layout, plus per-column totals."""

    flat: np.ndarray
    colsums: np.ndarray

    def copy(self) -> "SuffCounts":
        return SuffCounts(self.flat.copy(), self.colsums.copy())

    @property
    def total(self) -> float:
        return float(self.colsums.sum())


# ---------------------------------------------------------------------------
# Model specifications (dimensions plus priors)
# ---------------------------------------------------------------------------

@dataclass
class _ModelBase:
    n_states: int
    n_lags: int

    def __post_init__(self) -> None:
        if self.n_states < 2 or self.n_lags < 1:
            raise ValueError("need n_states >= 2 and n_lags >= 1")
        self._alpha_flat: np.ndarray | None = None
        self._alpha_colsum: np.ndarray | None = None

    # -- layout ------------------------------------------------------------

    def alpha_flat(self) -> np.ndarray:
        if self._alpha_flat is None:
            self._alpha_flat = self._build_alpha_flat()
        return self._alpha_flat

    def alpha_colsum(self) -> np.ndarray:
        if self._alpha_colsum is None:
            self._alpha_colsum = self.alpha_flat().sum(axis=0)
        return self._alpha_colsum

    def make_context(self, data) -> DataContext:
        data = np.asarray(data, dtype=np.int64)
        if data.ndim != 1:
            raise ValueError("state sequence must be 1-d")
        if np.any((data < 0) | (data >= self.n_states)):
            raise ValueError(f"states must lie in [0, {self.n_states})")
        if data.size <= self.n_lags:
            raise ValueError(
                f"need more than {self.n_lags} observations, got {data.size}"
            )
        hist = lag_history_matrix(data, self.n_lags)
        return DataContext(
            data=data,
            srows=data[self.n_lags:].astype(np.int64),
            cand_cols=np.ascontiguousarray(self.candidate_columns(hist)),
        )


@dataclass
class MtdModel(_ModelBase):
    """Single shared transition matrix mixed across lags; no intercept."""

    lam_prior: WeightPrior = None
    q_alpha: np.ndarray = None

    def __post_init__(self) -> None:
        super().__post_init__()
        if self.lam_prior is None:
            self.lam_prior = DirichletSpec(np.ones(self.n_lags) / self.n_lags)
        if self.q_alpha is None:
            self.q_alpha = np.ones(self.n_states) / self.n_states
        self.q_alpha = np.asarray(self.q_alpha, dtype=np.float64)
        if self.lam_prior.dim != self.n_lags:
            raise ValueError("lag-weight prior dimension must equal n_lags")

    @property
    def n_candidates(self) -> int:
        return self.n_lags

    @property
    def total_cols(self) -> int:
        return self.n_states

    def _build_alpha_flat(self) -> np.ndarray:
        return np.tile(self.q_alpha[:, None], (1, self.n_states))

    def candidate_columns(self, hist: np.ndarray) -> np.ndarray:
        return hist.astype(np.int64)

    def weight_names(self) -> list[str]:
        return [f"w_lag{l}" for l in range(1, self.n_lags + 1)]

    def init_state(self, rng: RngStream, n_obs: int, full: bool = False) -> "MtdState":
        weights = rng.generator.dirichlet(np.ones(self.n_lags))
        alloc = _sample_alloc_iid(weights, n_obs, rng)
        state = MtdState(alloc=alloc, weights=weights)
        if full:
            state.q_flat = _draw_q_flat(self, None, rng)
        return state

    def draw_state_weights(self, state, alloc_counts, rng: RngStream) -> None:
        state.weights = _draw_weight_posterior(self.lam_prior, alloc_counts, rng)

    def candidate_weights(self, state) -> np.ndarray:
        return state.weights

    def flat_weights(self, state) -> np.ndarray:
        return state.weights

    def candidate_block_starts(self) -> np.ndarray:
        """First flat column of the count/transition block each candidate
        addresses (all lags share the one matrix here)."""
        return np.zeros(self.n_lags, dtype=np.int64)

    def block_slice(self) -> slice:
        return slice(0, self.n_states)


@dataclass
class MtdgModel(_ModelBase):
    """Intercept distribution plus one transition matrix per lag."""

    lam_prior: WeightPrior = None
    q0_alpha: np.ndarray = None
    q_alpha: np.ndarray = None

    def __post_init__(self) -> None:
        super().__post_init__()
        if self.lam_prior is None:
            self.lam_prior = DirichletSpec(np.ones(self.n_lags + 1) / (self.n_lags + 1))
        if self.q0_alpha is None:
            self.q0_alpha = np.ones(self.n_states) / self.n_states
        if self.q_alpha is None:
            self.q_alpha = np.ones(self.n_states) / self.n_states
        self.q0_alpha = np.asarray(self.q0_alpha, dtype=np.float64)
        self.q_alpha = np.asarray(self.q_alpha, dtype=np.float64)
        if self.lam_prior.dim != self.n_lags + 1:
            raise ValueError("weight prior dimension must equal n_lags + 1 (intercept first)")

    @property
    def n_candidates(self) -> int:
        return self.n_lags + 1

    @property
    def total_cols(self) -> int:
        return 1 + self.n_lags * self.n_states

    def _build_alpha_flat(self) -> np.ndarray:
        out = np.tile(self.q_alpha[:, None], (1, self.total_cols))
        out[:, 0] = self.q0_alpha
        return out

    def candidate_columns(self, hist: np.ndarray) -> np.ndarray:
        n = hist.shape[0]
        cols = np.empty((n, self.n_lags + 1), dtype=np.int64)
        cols[:, 0] = 0
        for l in range(1, self.n_lags + 1):
            cols[:, l] = 1 + (l - 1) * self.n_states + hist[:, l - 1]
        return cols

    def weight_names(self) -> list[str]:
        return ["w_int"] + [f"w_lag{l}" for l in range(1, self.n_lags + 1)]

    def init_state(self, rng: RngStream, n_obs: int, full: bool = False) -> "MtdgState":
        weights = rng.generator.dirichlet(np.ones(self.n_lags + 1))
        alloc = _sample_alloc_iid(weights, n_obs, rng)
        state = MtdgState(alloc=alloc, weights=weights)
        if full:
            state.q_flat = _draw_q_flat(self, None, rng)
        return state

    def draw_state_weights(self, state, alloc_counts, rng: RngStream) -> None:
        state.weights = _draw_weight_posterior(self.lam_prior, alloc_counts, rng)

    def candidate_weights(self, state) -> np.ndarray:
        return state.weights

    def flat_weights(self, state) -> np.ndarray:
        return state.weights

    def candidate_block_starts(self) -> np.ndarray:
        starts = np.empty(self.n_lags + 1, dtype=np.int64)
        starts[0] = 0
        starts[1:] = 1 + np.arange(self.n_lags) * self.n_states
        return starts

    def block_slice(self, lag: int) -> slice:
        """Flat columns of one block: lag 0 is the intercept."""
        if lag == 0:
            return slice(0, 1)
        start = 1 + (lag - 1) * self.n_states
        return slice(start, start + self.n_states)

    # block views over a SuffCounts in this model's layout
    def intercept_counts(self, counts: SuffCounts) -> np.ndarray:
        return counts.flat[:, 0]

    def lag_counts(self, counts: SuffCounts, lag: int) -> np.ndarray:
        return counts.flat[:, self.block_slice(lag)]


@dataclass
class MmtdModel(_ModelBase):
    """Mixture over orders 0..R, each order mixing over lag configurations."""

    max_order: int = 1
    order_prior: WeightPrior = None
    config_priors: list[WeightPrior] = None
    q_alpha: np.ndarray = None

    def __post_init__(self) -> None:
        super().__post_init__()
        if not 1 <= self.max_order <= self.n_lags:
            raise ValueError("need 1 <= max_order <= n_lags")
        self.zeta_map = ZetaMap(self.n_lags, self.max_order)
        if self.order_prior is None:
            self.order_prior = DirichletSpec(np.ones(self.max_order + 1) / (self.max_order + 1))
        if self.config_priors is None:
            self.config_priors = [
                DirichletSpec(np.ones(comb(self.n_lags, r)) / comb(self.n_lags, r))
                for r in range(1, self.max_order + 1)
            ]
        if self.q_alpha is None:
            self.q_alpha = np.ones(self.n_states) / self.n_states
        self.q_alpha = np.asarray(self.q_alpha, dtype=np.float64)
        if self.order_prior.dim != self.max_order + 1:
            raise ValueError("order-weight prior dimension must equal max_order + 1")
        for r, prior in enumerate(self.config_priors, start=1):
            if prior.dim != comb(self.n_lags, r):
                raise ValueError(f"configuration prior for order {r} has wrong dimension")

    @property
    def n_candidates(self) -> int:
        return len(self.zeta_map)

    @property
    def total_cols(self) -> int:
        return sum(self.n_states**r for r in range(self.max_order + 1))

    def _col_offset(self, order: int) -> int:
        return sum(self.n_states**r for r in range(order))

    def _build_alpha_flat(self) -> np.ndarray:
        return np.tile(self.q_alpha[:, None], (1, self.total_cols))

    def candidate_columns(self, hist: np.ndarray) -> np.ndarray:
        n = hist.shape[0]
        cols = np.empty((n, self.n_candidates), dtype=np.int64)
        cols[:, 0] = 0
        for i, config in enumerate(self.zeta_map.configs[1:], start=1):
            order = len(config)
            idx = np.zeros(n, dtype=np.int64)
            for pos in range(order - 1, -1, -1):
                idx = idx * self.n_states + hist[:, config[pos] - 1]
            cols[:, i] = self._col_offset(order) + idx
        return cols

    def weight_names(self) -> list[str]:
        names = [f"order{r}" for r in range(self.max_order + 1)]
        for r in range(1, self.max_order + 1):
            sl = self.zeta_map.order_slice(r)
            for i in range(sl.start, sl.stop):
                lags = "-".join(str(l) for l in self.zeta_map.configs[i])
                names.append(f"cfg{r}_{lags}")
        return names

    def init_state(self, rng: RngStream, n_obs: int, full: bool = False) -> "MmtdState":
        gen = rng.generator
        order_weights = gen.dirichlet(np.ones(self.max_order + 1))
        config_weights = [
            gen.dirichlet(np.ones(comb(self.n_lags, r)))
            for r in range(1, self.max_order + 1)
        ]
        state = MmtdState(
            alloc=np.empty(0, dtype=np.int64),
            order_weights=order_weights,
            config_weights=config_weights,
        )
        state.alloc = _sample_alloc_iid(self.candidate_weights(state), n_obs, rng)
        if full:
            state.q_flat = _draw_q_flat(self, None, rng)
        return state

    def order_counts(self, alloc_counts: np.ndarray) -> np.ndarray:
        return np.array(
            [alloc_counts[self.zeta_map.order_slice(r)].sum() for r in range(self.max_order + 1)]
        )

    def draw_state_weights(self, state, alloc_counts, rng: RngStream) -> None:
        state.order_weights = _draw_weight_posterior(
            self.order_prior, self.order_counts(alloc_counts), rng
        )
        for r in range(1, self.max_order + 1):
            sl = self.zeta_map.order_slice(r)
            state.config_weights[r - 1] = _draw_weight_posterior(
                self.config_priors[r - 1], alloc_counts[sl], rng
            )

    def candidate_weights(self, state) -> np.ndarray:
        w = np.empty(self.n_candidates)
        w[0] = state.order_weights[0]
        for r in range(1, self.max_order + 1):
            sl = self.zeta_map.order_slice(r)
            w[sl] = state.order_weights[r] * state.config_weights[r - 1]
        return w

    def flat_weights(self, state) -> np.ndarray:
        return np.concatenate([state.order_weights] + list(state.config_weights))

    def candidate_block_starts(self) -> np.ndarray:
        return np.array(
            [self._col_offset(len(c)) for c in self.zeta_map.configs], dtype=np.int64
        )

    def block_slice(self, order: int) -> slice:
        start = self._col_offset(order)
        return slice(start, start + self.n_states**order)

    def order_block(self, counts: SuffCounts, order: int) -> np.ndarray:
        """Matricized count block of one order (the intercept is order 0)."""
        return counts.flat[:, self.block_slice(order)]


Model = MtdModel | MtdgModel | MmtdModel


# ---------------------------------------------------------------------------
# Sampler state
# ---------------------------------------------------------------------------

@dataclass
class MtdState:
    alloc: np.ndarray
    weights: np.ndarray
    q_flat: np.ndarray | None = None


@dataclass
class MtdgState:
    alloc: np.ndarray               # 0 selects the intercept, l selects lag l
    weights: np.ndarray             # intercept weight first
    q_flat: np.ndarray | None = None


@dataclass
class MmtdState:
    alloc: np.ndarray               # allocation indices in the ZetaMap
    order_weights: np.ndarray
    config_weights: list[np.ndarray]
    q_flat: np.ndarray | None = None


def _sample_alloc_iid(weights: np.ndarray, n: int, rng: RngStream) -> np.ndarray:
    cum = np.cumsum(weights)
    idx = np.searchsorted(cum, rng.generator.random(n) * cum[-1], side="right")
    return np.minimum(idx, weights.size - 1).astype(np.int64)


def draw_prior_state(model: Model, n_obs: int, rng: RngStream):
    """Draw weights from the model's prior and allocations from the implied
    categorical; the joint proposal used by the prior-swap jump."""
    if isinstance(model, MmtdModel):
        state = MmtdState(
            alloc=np.empty(0, dtype=np.int64),
            order_weights=np.full(model.max_order + 1, 1.0 / (model.max_order + 1)),
            config_weights=[np.full(p.dim, 1.0 / p.dim) for p in model.config_priors],
        )
    elif isinstance(model, MtdgModel):
        state = MtdgState(
            alloc=np.empty(0, dtype=np.int64),
            weights=np.full(model.n_lags + 1, 1.0 / (model.n_lags + 1)),
        )
    else:
        state = MtdState(
            alloc=np.empty(0, dtype=np.int64),
            weights=np.full(model.n_lags, 1.0 / model.n_lags),
        )
    # Conjugate updates at zero counts are exactly the prior.
    model.draw_state_weights(state, np.zeros(model.n_candidates), rng)
    state.alloc = _sample_alloc_iid(model.candidate_weights(state), n_obs, rng)
    return state


def accumulate_counts(model: Model, ctx: DataContext, alloc: np.ndarray) -> SuffCounts:
    """Aggregate transition counts implied by the allocations.

    Each observation contributes one count: row = outcome, column = the count
    block and condition selected by its allocation.
    """
    if alloc.size != ctx.n_obs:
        raise ValueError("need one allocation per modeled observation")
    flat = np.zeros((model.n_states, model.total_cols))
    cols = ctx.cand_cols[np.arange(ctx.n_obs), alloc]
    np.add.at(flat, (ctx.srows, cols), 1.0)
    return SuffCounts(flat=flat, colsums=flat.sum(axis=0))


def _draw_q_flat(model: Model, counts: SuffCounts | None, rng: RngStream) -> np.ndarray:
    """Draw every transition block column from its conjugate conditional."""
    shapes = model.alpha_flat()
    if counts is not None:
        shapes = shapes + counts.flat
    g = rng.generator.gamma(shapes)
    return g / g.sum(axis=0)


def collapsed_log_marginal(model: Model, counts: SuffCounts) -> float:
    """Log marginal likelihood of the data given allocations, with every
    transition block integrated out against its Dirichlet prior."""
    a = model.alpha_flat()
    asum = model.alpha_colsum()
    return float(
        (gammaln(a + counts.flat) - gammaln(a)).sum()
        + (gammaln(asum) - gammaln(asum + counts.colsums)).sum()
    )


def collapsed_alloc_conditional(
    model: Model, ctx: DataContext, counts: SuffCounts, cand_weights: np.ndarray, t: int
) -> np.ndarray:
    """Normalized allocation conditional at observation ``t`` in the
    predictive-ratio form.  ``counts`` must exclude observation ``t``."""
    row = ctx.srows[t]
    cols = ctx.cand_cols[t]
    a = model.alpha_flat()
    asum = model.alpha_colsum()
    scores = cand_weights * (a[row, cols] + counts.flat[row, cols]) / (
        asum[cols] + counts.colsums[cols]
    )
    return scores / scores.sum()


class DegenerateConditionalError(RuntimeError):
    """An allocation conditional had no finite positive mass."""

    def __init__(self, t: int):
        super().__init__(
            f"non-finite or all-zero allocation conditional at observation {t}; "
            "check priors and data encoding"
        )
        self.t = t


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

def _collapsed_sweep(
    model: Model,
    state,
    ctx: DataContext,
    rng: RngStream,
    counts: SuffCounts | None = None,
    random_scan: bool = False,
) -> SuffCounts:
    """One collapsed Gibbs sweep: weights from their conjugate conditionals
    given allocation counts, then every allocation from its discrete
    conditional with the transition blocks integrated out.

    Returns the counts, kept consistent with the updated allocations.
    """
    alloc_counts = np.bincount(state.alloc, minlength=model.n_candidates)
    model.draw_state_weights(state, alloc_counts, rng)
    w = np.ascontiguousarray(model.candidate_weights(state))
    if counts is None:
        counts = accumulate_counts(model, ctx, state.alloc)
    gen = rng.generator
    scan = (
        gen.permutation(ctx.n_obs).astype(np.int64)
        if random_scan
        else np.arange(ctx.n_obs, dtype=np.int64)
    )
    fail = _kernels.collapsed_allocation_pass(
        state.alloc,
        ctx.srows,
        ctx.cand_cols,
        counts.flat,
        counts.colsums,
        model.alpha_flat(),
        model.alpha_colsum(),
        w,
        gen.random(ctx.n_obs),
        scan,
    )
    if fail >= 0:
        raise DegenerateConditionalError(fail)
    return counts


def _full_sweep(model: Model, state, ctx: DataContext, rng: RngStream) -> SuffCounts:
    """One full Gibbs sweep: allocations given weights and transition blocks,
    then weights, then every transition block column."""
    if state.q_flat is None:
        raise ValueError("full sweep requires a state carrying transition blocks")
    w = np.ascontiguousarray(model.candidate_weights(state))
    fail = _kernels.full_allocation_pass(
        state.alloc, ctx.srows, ctx.cand_cols, state.q_flat, w, rng.generator.random(ctx.n_obs)
    )
    if fail >= 0:
        raise DegenerateConditionalError(fail)
    alloc_counts = np.bincount(state.alloc, minlength=model.n_candidates)
    model.draw_state_weights(state, alloc_counts, rng)
    counts = accumulate_counts(model, ctx, state.alloc)
    state.q_flat = _draw_q_flat(model, counts, rng)
    return counts


def mtd_collapsed_gibbs_sweep(state, ctx, model, rng, counts=None, random_scan=False):
    return _collapsed_sweep(model, state, ctx, rng, counts, random_scan)


def mtd_full_gibbs_sweep(state, ctx, model, rng):
    return _full_sweep(model, state, ctx, rng)


def mtdg_collapsed_gibbs_sweep(state, ctx, model, rng, counts=None, random_scan=False):
    """Weights from the conjugate stick-breaking (or Dirichlet) update on
    allocation counts, then each allocation from the marginal-likelihood-ratio
    conditional over intercept and lags, with incremental count updates."""
    return _collapsed_sweep(model, state, ctx, rng, counts, random_scan)


def mtdg_full_gibbs_sweep(state, ctx, model, rng):
    """Allocations from `weight x selected transition probability`, weights
    from the conjugate update, intercept and all matrix columns from their
    Dirichlet conditionals."""
    return _full_sweep(model, state, ctx, rng)


def mmtd_collapsed_gibbs_sweep(state, ctx, model, rng, counts=None, random_scan=False):
    """Order and configuration weights from their conjugate updates, then
    each allocation from the collapsed conditional; only the one count column
    a candidate touches enters its score, so a candidate costs O(1), not the
    size of the tensor block."""
    return _collapsed_sweep(model, state, ctx, rng, counts, random_scan)


def mmtd_full_gibbs_sweep(state, ctx, model, rng):
    return _full_sweep(model, state, ctx, rng)


def prior_swap_metropolis(
    model: Model,
    state,
    ctx: DataContext,
    rng: RngStream,
    counts: SuffCounts,
    cur_log_marginal: float | None = None,
) -> tuple[bool, SuffCounts, float]:
    """Jointly propose weights and all allocations from their prior.

    Because the proposal equals the prior, the acceptance ratio reduces to
    the collapsed data marginals of proposed versus current allocations; on
    rejection the state is unchanged.  Returns (accepted, counts, current log
    marginal) so the caller can keep counts and the marginal incremental.
    """
    proposal = draw_prior_state(model, ctx.n_obs, rng)
    prop_counts = accumulate_counts(model, ctx, proposal.alloc)
    if cur_log_marginal is None:
        cur_log_marginal = collapsed_log_marginal(model, counts)
    prop_log_marginal = collapsed_log_marginal(model, prop_counts)
    delta = prop_log_marginal - cur_log_marginal
    if delta >= 0 or np.log(rng.generator.random()) < delta:
        state.alloc = proposal.alloc
        if isinstance(state, MmtdState):
            state.order_weights = proposal.order_weights
            state.config_weights = proposal.config_weights
        else:
            state.weights = proposal.weights
        return True, prop_counts, prop_log_marginal
    return False, counts, cur_log_marginal


# ---------------------------------------------------------------------------
# Multi-chain driver
# ---------------------------------------------------------------------------

@dataclass
class McmcConfig:
    """Chain schedule.  Desk-scale defaults; ``paper_scale()`` gives the
    published protocol (200k burn-in, 400k kept sweeps thinned by 200)."""

    n_burn: int = 20_000
    n_keep: int = 20_000
    thin: int = 20
    n_chains: int = 4
    seed: int = 0
    swap_period: int = 10     # prior-proposal jump period; 0 disables
    mode: str = "collapsed"   # or "full"
    random_scan: bool = False

    def __post_init__(self) -> None:
        if min(self.n_burn, self.n_keep) < 0 or self.thin < 1 or self.n_chains < 1:
            raise ValueError("invalid MCMC schedule")
        if self.n_keep and self.n_keep < self.thin:
            raise ValueError("n_keep must be at least thin")
        if self.mode not in ("collapsed", "full"):
            raise ValueError(f"unknown mode {self.mode!r}")

    @classmethod
    def paper_scale(cls, **overrides) -> "McmcConfig":
        base = dict(n_burn=200_000, n_keep=400_000, thin=200)
        base.update(overrides)
        return cls(**base)

    @property
    def kept_per_chain(self) -> int:
        return self.n_keep // self.thin


@dataclass
class PosteriorSamples:
    """Thinned draws from all chains plus run telemetry.

    ``weights`` stacks the flattened weight vectors (see ``weight_names``),
    ``q`` the matricized transition blocks in the model's flat column layout.
    """

    model: Model
    config: McmcConfig
    weight_names: list[str]
    weights: np.ndarray        # (chains, kept, n_weights)
    q: np.ndarray              # (chains, kept, n_states, total_cols)
    alloc_counts: np.ndarray   # (chains, kept, n_candidates)
    log_marginal: np.ndarray   # (chains, kept)
    swap_attempts: np.ndarray  # (chains, kept) proposals since previous kept draw
    swap_accepts: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def n_chains(self) -> int:
        return self.weights.shape[0]

    @property
    def n_kept(self) -> int:
        return self.weights.shape[1]

    @property
    def n_draws(self) -> int:
        return self.n_chains * self.n_kept

    def weight_name_index(self, name: str) -> int:
        return self.weight_names.index(name)

    def weights_matrix(self) -> np.ndarray:
        """All kept weight draws, chains stacked: (n_draws, n_weights)."""
        return self.weights.reshape(self.n_draws, -1)

    def q_matrix(self) -> np.ndarray:
        return self.q.reshape(self.n_draws, self.model.n_states, self.model.total_cols)

    def candidate_weight_draws(self) -> np.ndarray:
        """Per-draw mixture weight of every allocation candidate."""
        w = self.weights_matrix()
        if isinstance(self.model, MmtdModel):
            zm = self.model.zeta_map
            r_max = self.model.max_order
            out = np.empty((self.n_draws, self.model.n_candidates))
            out[:, 0] = w[:, 0]
            col = r_max + 1
            for r in range(1, r_max + 1):
                sl = zm.order_slice(r)
                width = sl.stop - sl.start
                out[:, sl] = w[:, r:r + 1] * w[:, col:col + width]
                col += width
            return out
        return w

    def swap_acceptance_rate(self) -> float:
        att = self.swap_attempts.sum()
        return float(self.swap_accepts.sum() / att) if att else np.nan


def run_mcmc(model: Model, data, config: McmcConfig) -> PosteriorSamples:
    """Run independent chains and collect thinned draws.

    Every chain owns one random stream derived from (seed, chain index);
    identical model, data, and config reproduce identical samples.  Chains
    run the configured sweep kernel with the prior-proposal jump at its
    period (collapsed mode), and at every kept iteration the transition
    blocks are drawn from their conjugate conditionals so each stored sample
    is a complete parameter set.
    """
    ctx = model.make_context(data)
    kept = config.kept_per_chain
    m = config.n_chains
    nw = len(model.weight_names())
    out_w = np.empty((m, kept, nw))
    out_q = np.empty((m, kept, model.n_states, model.total_cols))
    out_ac = np.empty((m, kept, model.n_candidates), dtype=np.int32)
    out_lm = np.empty((m, kept))
    out_att = np.zeros((m, kept), dtype=np.int32)
    out_acc = np.zeros((m, kept), dtype=np.int32)
    chain_seconds = []

    full = config.mode == "full"
    for chain in range(m):
        t0 = time.perf_counter()
        rng = RngStream(config.seed, chain)
        state = model.init_state(rng, ctx.n_obs, full=full)
        counts = accumulate_counts(model, ctx, state.alloc)
        k_idx = 0
        window_att = 0
        window_acc = 0
        for it in range(config.n_burn + config.n_keep):
            if full:
                counts = _full_sweep(model, state, ctx, rng)
            else:
                counts = _collapsed_sweep(
                    model, state, ctx, rng, counts, config.random_scan
                )
                if config.swap_period and (it + 1) % config.swap_period == 0:
                    accepted, counts, _ = prior_swap_metropolis(
                        model, state, ctx, rng, counts
                    )
                    window_att += 1
                    window_acc += int(accepted)
            post_burn = it - config.n_burn + 1
            if post_burn >= 1 and post_burn % config.thin == 0 and k_idx < kept:
                out_w[chain, k_idx] = model.flat_weights(state)
                out_q[chain, k_idx] = (
                    state.q_flat if full else _draw_q_flat(model, counts, rng)
                )
                out_ac[chain, k_idx] = np.bincount(
                    state.alloc, minlength=model.n_candidates
                )
                out_lm[chain, k_idx] = collapsed_log_marginal(model, counts)
                out_att[chain, k_idx] = window_att
                out_acc[chain, k_idx] = window_acc
                window_att = window_acc = 0
                k_idx += 1
        chain_seconds.append(time.perf_counter() - t0)

    samples = PosteriorSamples(
        model=model,
        config=config,
        weight_names=model.weight_names(),
        weights=out_w,
        q=out_q,
        alloc_counts=out_ac,
        log_marginal=out_lm,
        swap_attempts=out_att,
        swap_accepts=out_acc,
    )
    samples.diagnostics = _run_diagnostics(samples, chain_seconds)
    return samples


def _run_diagnostics(samples: PosteriorSamples, chain_seconds: list[float]) -> dict:
    per_param = {}
    worst = 0.0
    for j, name in enumerate(samples.weight_names):
        draws = samples.weights[:, :, j]
        r = split_rhat(draws)
        per_param[name] = {"ess": ess(draws), "rhat": r}
        if np.isfinite(r):
            worst = max(worst, r)
    if worst > RHAT_WARN_THRESHOLD:
        warnings.warn(
            f"split-chain scale reduction up to {worst:.3f} exceeds "
            f"{RHAT_WARN_THRESHOLD}; chains may sit in neighboring posterior "
            "modes, so interpret weight summaries with care",
            stacklevel=2,
        )
    return {
        "params": per_param,
        "max_rhat": worst,
        "swap_acceptance_rate": samples.swap_acceptance_rate(),
        "chain_seconds": chain_seconds,
    }
