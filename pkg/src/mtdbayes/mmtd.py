"""Mixture-of-orders transition model: parameterization and combinatorics.

The model mixes transition tensors of orders 0..R.  The order-r tensor is
paired with a weight vector over all C(L, r) ways of choosing which r of the
L available lags feed it.  A single allocation index enumerates every
(order, lag-configuration) pair: index 0 is the intercept, then entries are
grouped by ascending order and ordered lexicographically by lag tuple within
each order.  That ordering is part of the serialized-output contract.

Tensors are stored with the outcome axis first, then one axis per selected
lag, most recent selected lag first.  The matricized view flattens the lag
axes into columns with the most recent selected lag changing fastest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import NamedTuple

import numpy as np

from .probcore import SIMPLEX_ATOL, as_prob_vec


def enumerate_configs(n_lags: int, order: int) -> list[tuple[int, ...]]:
    """All strictly increasing order-``order`` lag tuples from {1..n_lags},
    in lexicographic order."""
    if not 0 <= order <= n_lags:
        raise ValueError(f"order must lie in [0, {n_lags}], got {order}")
    return list(combinations(range(1, n_lags + 1), order))


@dataclass
class ZetaMap:
    """Bijection between allocation indices and (order, lag tuple) pairs."""

    n_lags: int
    max_order: int
    configs: list[tuple[int, ...]] = field(init=False)
    orders: np.ndarray = field(init=False)
    offsets: list[int] = field(init=False)

    def __post_init__(self) -> None:
        if not 1 <= self.max_order <= self.n_lags:
            raise ValueError("need 1 <= max_order <= n_lags")
        self.configs = []
        self.offsets = []
        for r in range(self.max_order + 1):
            self.offsets.append(len(self.configs))
            self.configs.extend(enumerate_configs(self.n_lags, r))
        self.orders = np.array([len(c) for c in self.configs], dtype=np.int64)
        self._index = {c: i for i, c in enumerate(self.configs)}

    def __len__(self) -> int:
        return len(self.configs)

    def n_configs(self, order: int) -> int:
        return comb(self.n_lags, order)

    def order_slice(self, order: int) -> slice:
        """Indices of all order-``order`` entries."""
        start = self.offsets[order]
        return slice(start, start + self.n_configs(order))

    def encode(self, order: int, config: tuple[int, ...]) -> int:
        config = tuple(config)
        if len(config) != order:
            raise ValueError("lag tuple length must equal the order")
        try:
            return self._index[config]
        except KeyError:
            raise ValueError(f"not a valid lag tuple for this map: {config}") from None

    def decode(self, index: int) -> tuple[int, tuple[int, ...]]:
        if not 0 <= index < len(self.configs):
            raise ValueError(f"allocation index {index} out of range")
        return int(self.orders[index]), self.configs[index]


def rho_index(states: np.ndarray, n_states: int) -> int:
    """Column index of a selected-lags state vector in the matricized tensor.

    The first (most recent selected lag) coordinate changes fastest.  States
    are 0-based, as is the returned column.
    """
    idx = 0
    for i in range(len(states) - 1, -1, -1):
        idx = idx * n_states + states[i]
    return idx


def matricize(tensor: np.ndarray) -> np.ndarray:
    """Flatten an order-r transition tensor to a (K, K^r) matrix whose columns
    follow :func:`rho_index`."""
    k = tensor.shape[0]
    r = tensor.ndim - 1
    if r == 0:
        return tensor.reshape(k, 1)
    rev = tensor.transpose([0] + list(range(r, 0, -1)))
    return np.ascontiguousarray(rev.reshape(k, k**r))


def unmatricize(matrix: np.ndarray, order: int) -> np.ndarray:
    """Inverse of :func:`matricize`."""
    k = matrix.shape[0]
    if order == 0:
        return matrix.reshape(k)
    t = matrix.reshape((k,) * (order + 1))
    return np.ascontiguousarray(t.transpose([0] + list(range(order, 0, -1))))


@dataclass
class MMTDParams:
    """Order weights, per-order lag-configuration weights, and transition
    tensors of each order.

    ``order_weights`` has length R+1 (intercept weight first); ``config_weights[r - 1]`` has
    length C(L, r); ``q[r]`` is the order-r tensor, with ``q[0]`` a plain
    probability vector.
    """

    n_lags: int
    order_weights: np.ndarray
    config_weights: list[np.ndarray]
    q: list[np.ndarray]

    def __post_init__(self) -> None:
        self.order_weights = as_prob_vec(self.order_weights)
        r_max = self.order_weights.size - 1
        if len(self.config_weights) != r_max or len(self.q) != r_max + 1:
            raise ValueError("need one weight vector per order >= 1 and one tensor per order")
        self.config_weights = [as_prob_vec(v) for v in self.config_weights]
        self.q = [np.asarray(t, dtype=np.float64) for t in self.q]
        k = self.q[0].size
        for r, t in enumerate(self.q):
            if t.shape != (k,) * (r + 1):
                raise ValueError(f"tensor {r} must have shape {(k,) * (r + 1)}, got {t.shape}")
            sums = t.sum(axis=0)
            if np.any(np.abs(sums - 1.0) > SIMPLEX_ATOL) or np.any(t < 0):
                raise ValueError(f"tensor {r} is not stochastic along the outcome axis")
        for r in range(1, r_max + 1):
            if self.config_weights[r - 1].size != comb(self.n_lags, r):
                raise ValueError(
                    f"lag-configuration weights for order {r} must have length "
                    f"{comb(self.n_lags, r)}"
                )
        self.zeta_map = ZetaMap(self.n_lags, r_max)

    @property
    def max_order(self) -> int:
        return self.order_weights.size - 1

    @property
    def n_states(self) -> int:
        return self.q[0].size

    def config_weight(self, index: int) -> float:
        """Joint mixture weight of one allocation index: order weight times
        lag-configuration weight (the intercept has no configuration vector)."""
        order, _ = self.zeta_map.decode(index)
        if order == 0:
            return float(self.order_weights[0])
        within = index - self.zeta_map.offsets[order]
        return float(self.order_weights[order] * self.config_weights[order - 1][within])


def mmtd_transition(params: MMTDParams, lagged) -> np.ndarray:
    """Transition distribution at a lag history, most recent state first."""
    lagged = np.asarray(lagged, dtype=np.int64)
    k = params.n_states
    if lagged.size != params.n_lags:
        raise ValueError(f"expected {params.n_lags} lagged states, got {lagged.size}")
    if np.any((lagged < 0) | (lagged >= k)):
        raise ValueError(f"lagged states must lie in [0, {k})")
    out = params.order_weights[0] * params.q[0]
    for r in range(1, params.max_order + 1):
        if params.order_weights[r] == 0:
            continue
        mat = matricize(params.q[r])
        cols = [
            rho_index(lagged[np.array(config) - 1], k)
            for config in enumerate_configs(params.n_lags, r)
        ]
        out = out + params.order_weights[r] * (mat[:, cols] @ params.config_weights[r - 1])
    return out


class ParamCount(NamedTuple):
    """Free-parameter counts, one field per parameter group."""

    n_order: int
    n_config: int
    n_tensor: int
    total: int
    unrestricted: int


def param_count(n_states: int, n_lags: int, max_order: int) -> ParamCount:
    """Free-parameter counts of the mixture-of-orders model, next to the
    count an unrestricted order-L chain would need."""
    if not (1 <= max_order <= n_lags) or n_states < 2:
        raise ValueError("need 1 <= max_order <= n_lags and n_states >= 2")
    n_order = max_order
    n_config = sum(comb(n_lags, r) for r in range(1, max_order + 1)) - max_order
    n_tensor = n_states ** (max_order + 1) - 1
    total = n_order + n_config + n_tensor
    unrestricted = n_states**n_lags * (n_states - 1)
    return ParamCount(n_order, n_config, n_tensor, total, unrestricted)


def mmtd_params_to_json(params: MMTDParams) -> str:
    """Serialize parameters together with the explicit allocation-index
    ordering table so downstream consumers can audit weight positions."""
    doc = {
        "kind": "mmtd",
        "n_states": params.n_states,
        "n_lags": params.n_lags,
        "max_order": params.max_order,
        "order_weights": params.order_weights.tolist(),
        "config_weights": [v.tolist() for v in params.config_weights],
        "tensors": [t.tolist() for t in params.q],
        "config_table": [
            {"index": i, "order": int(params.zeta_map.orders[i]), "lags": list(c)}
            for i, c in enumerate(params.zeta_map.configs)
        ],
    }
    return json.dumps(doc, indent=2)


def mmtd_params_from_json(text: str) -> MMTDParams:
    doc = json.loads(text)
    if doc.get("kind") != "mmtd":
        raise ValueError(f"unknown parameter document kind: {doc.get('kind')!r}")
    return MMTDParams(
        n_lags=doc["n_lags"],
        order_weights=np.array(doc["order_weights"]),
        config_weights=[np.array(v) for v in doc["config_weights"]],
        q=[np.array(t) for t in doc["tensors"]],
    )
