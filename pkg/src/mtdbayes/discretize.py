"""Quantile discretization of a numeric series into categorical states.

Bin edges sit at the sample quantiles j/K (type-7, the linear-interpolation
definition), computed from the full series; a value exactly on an edge goes
to the lower bin.  Because bins are quantile-based, the assigned states are
invariant under strictly increasing transformations of the input.
"""

from __future__ import annotations

import warnings

import numpy as np


def quantile_bin_edges(values, n_bins: int) -> np.ndarray:
    """Interior bin edges at the j/K sample quantiles, j = 1..K-1."""
    values = np.asarray(values, dtype=np.float64)
    if n_bins < 2:
        raise ValueError("need at least two bins")
    if values.size == 0:
        raise ValueError("empty input series")
    probs = np.arange(1, n_bins) / n_bins
    return np.quantile(values, probs, method="linear")


def discretize_series(values, n_bins: int) -> tuple[np.ndarray, np.ndarray]:
    """Assign each value a 0-based state by quantile bin.

    Returns ``(states, edges)``.  Ties that collapse bin edges leave some
    states unused; that degeneracy is surfaced as a warning rather than an
    error so constant stretches remain processable.
    """
    values = np.asarray(values, dtype=np.float64)
    if np.any(~np.isfinite(values)):
        raise ValueError("input series contains non-finite values")
    edges = quantile_bin_edges(values, n_bins)
    if np.unique(edges).size < edges.size or (values.min() == values.max()):
        warnings.warn(
            "degenerate quantile bins: tied edges leave some states unused",
            stacklevel=2,
        )
    states = np.searchsorted(edges, values, side="left")
    return states.astype(np.int64), edges
