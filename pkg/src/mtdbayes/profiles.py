"""Named prior profiles for fitting.

Every profile gives transition blocks symmetric unit-information Dirichlet
priors (shapes 1/K).  The mixture-weight priors differ:

- ``mtd-dir``:   lag weights ~ symmetric Dirichlet with shapes 1/L.
- ``mtd-sbm``:   lag weights ~ stick-breaking mixture with pi1 = 0.5,
                 pi3 = 0.1, eta = 1000, and middle-component shapes matching
                 the 1/L Dirichlet (optional sparsity scale on delta).
- ``mtdg-sbm``:  intercept-first weights ~ stick-breaking mixture that never
                 penalizes the intercept (pi1 = pi3 = 0 and a uniform break
                 at position 0), with pi1 = 0.5 / pi3 = 0.2 and the 1/L
                 Dirichlet match on the remaining positions.
- ``mmtd-dir``:  lag-configuration weights ~ symmetric Dirichlet with shapes
                 1/C(L, r) per order.
- ``mmtd-sdm``:  lag-configuration weights ~ sparse Dirichlet mixture with
                 the same shapes and boost sqrt(T), concentrating each order
                 on a single configuration.

Both mixture-of-orders profiles place a stick-breaking prior on the order
weights with pi1 = pi3 = 0.25 past the unpenalized intercept position and
uniform middle components.
"""

from __future__ import annotations

import math

import numpy as np

from .inference import MmtdModel, MtdgModel, MtdModel, Model
from .priors import DirichletSpec, SBMSpec, SDMSpec, sbm_mimic_dirichlet

PROFILE_NAMES = ("mtd-dir", "mtd-sbm", "mtdg-sbm", "mmtd-dir", "mmtd-sdm")

_ETA = 1000.0


def _unit_information(n_states: int) -> np.ndarray:
    return np.ones(n_states) / n_states


def mtd_lag_sbm(n_lags: int, delta_scale: float = 1.0) -> SBMSpec:
    m = n_lags - 1
    gamma, delta = sbm_mimic_dirichlet(np.ones(n_lags) / n_lags, delta_scale)
    return SBMSpec(
        pi1=np.full(m, 0.5), pi3=np.full(m, 0.1), eta=_ETA, gamma=gamma, delta=delta
    )


def mtdg_weight_sbm(n_lags: int, delta_scale: float = 1.0) -> SBMSpec:
    """Intercept-first prior over L+1 weights: the intercept break is uniform
    and unpenalized; later breaks shrink and softly order the lags."""
    m = n_lags  # breaks for a length-(L+1) weight vector
    pi1 = np.full(m, 0.5)
    pi3 = np.full(m, 0.2)
    pi1[0] = 0.0
    pi3[0] = 0.0
    gamma = np.ones(m)
    delta = np.ones(m)
    if n_lags > 1:
        g, d = sbm_mimic_dirichlet(np.ones(n_lags) / n_lags, delta_scale)
        gamma[1:] = g
        delta[1:] = d
    return SBMSpec(pi1=pi1, pi3=pi3, eta=_ETA, gamma=gamma, delta=delta)


def order_weight_sbm(max_order: int) -> SBMSpec:
    """Prior over R+1 order weights: unpenalized uniform intercept break,
    then pi1 = pi3 = 0.25 with uniform middle components."""
    m = max_order
    pi1 = np.full(m, 0.25)
    pi3 = np.full(m, 0.25)
    pi1[0] = 0.0
    pi3[0] = 0.0
    return SBMSpec(pi1=pi1, pi3=pi3, eta=_ETA, gamma=np.ones(m), delta=np.ones(m))


def mtd_model(n_states: int, n_lags: int, lam: str = "dirichlet", delta_scale: float = 1.0) -> MtdModel:
    if lam == "dirichlet":
        prior = DirichletSpec(np.ones(n_lags) / n_lags)
    elif lam == "sbm":
        prior = mtd_lag_sbm(n_lags, delta_scale)
    else:
        raise ValueError(f"unknown lag-weight prior {lam!r}")
    return MtdModel(
        n_states=n_states, n_lags=n_lags, lam_prior=prior, q_alpha=_unit_information(n_states)
    )


def mtdg_model(n_states: int, n_lags: int, delta_scale: float = 1.0) -> MtdgModel:
    return MtdgModel(
        n_states=n_states,
        n_lags=n_lags,
        lam_prior=mtdg_weight_sbm(n_lags, delta_scale),
        q0_alpha=_unit_information(n_states),
        q_alpha=_unit_information(n_states),
    )


def mmtd_model(
    n_states: int, n_lags: int, max_order: int, config_boost: float = 1.0
) -> MmtdModel:
    """``config_boost`` is the sparse-mixture equivalent sample size on the
    lag-configuration weights; 1 gives the plain Dirichlet profile."""
    config_priors: list = []
    for r in range(1, max_order + 1):
        c = math.comb(n_lags, r)
        alpha = np.ones(c) / c
        if config_boost > 1.0:
            config_priors.append(SDMSpec(alpha, beta=config_boost))
        else:
            config_priors.append(DirichletSpec(alpha))
    return MmtdModel(
        n_states=n_states,
        n_lags=n_lags,
        max_order=max_order,
        order_prior=order_weight_sbm(max_order),
        config_priors=config_priors,
        q_alpha=_unit_information(n_states),
    )


def make_profile(
    name: str,
    n_states: int,
    n_lags: int,
    max_order: int | None = None,
    train_len: int | None = None,
    delta_scale: float = 1.0,
) -> Model:
    """Build the model for a named profile.

    ``train_len`` sets the sparse-mixture boost sqrt(T) for ``mmtd-sdm`` and
    is required there; ``max_order`` is required for the mixture-of-orders
    profiles.
    """
    if name == "mtd-dir":
        return mtd_model(n_states, n_lags, lam="dirichlet")
    if name == "mtd-sbm":
        return mtd_model(n_states, n_lags, lam="sbm", delta_scale=delta_scale)
    if name == "mtdg-sbm":
        return mtdg_model(n_states, n_lags, delta_scale=delta_scale)
    if name in ("mmtd-dir", "mmtd-sdm"):
        if max_order is None:
            raise ValueError(f"profile {name!r} needs max_order")
        if name == "mmtd-dir":
            return mmtd_model(n_states, n_lags, max_order)
        if train_len is None:
            raise ValueError("profile 'mmtd-sdm' needs train_len to set the boost sqrt(T)")
        return mmtd_model(n_states, n_lags, max_order, config_boost=math.sqrt(train_len))
    raise ValueError(f"unknown profile {name!r}; choose one of {PROFILE_NAMES}")
