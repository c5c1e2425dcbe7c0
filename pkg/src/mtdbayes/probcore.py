"""Simplex-constrained vectors, stick-breaking transforms, and seeded RNG streams.

Every probability vector in this package is a plain 1-d ``float64`` numpy
array whose entries are nonnegative and sum to one.  All mixture weights and
densities elsewhere are handled in log space; this module supplies the
numeric primitives that make that safe.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

# Tolerance for validating that a probability vector sums to one.
SIMPLEX_ATOL = 1e-10

# Tolerance for round-trip identities (stick_break o stick_unbreak, etc.).
ROUNDTRIP_ATOL = 1e-12


@dataclass
class RngStream:
    """Reproducible random stream identified by (seed, stream_id).

    Two streams constructed with the same pair produce identical draw
    sequences; distinct stream ids give statistically independent streams,
    one per MCMC chain.
    """

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        self._gen = np.random.Generator(np.random.PCG64(ss))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen


def as_prob_vec(values, atol: float = SIMPLEX_ATOL) -> np.ndarray:
    """Validate and return ``values`` as a probability vector.

    Raises ``ValueError`` if any entry is negative or the entries do not sum
    to one within ``atol``.
    """
    theta = np.asarray(values, dtype=np.float64)
    if theta.ndim != 1:
        raise ValueError(f"probability vector must be 1-d, got shape {theta.shape}")
    if np.any(theta < 0):
        raise ValueError("probability vector has negative entries")
    s = theta.sum()
    if abs(s - 1.0) > atol:
        raise ValueError(f"probability vector sums to {s!r}, not 1")
    return theta


def is_prob_vec(values, atol: float = SIMPLEX_ATOL) -> bool:
    theta = np.asarray(values, dtype=np.float64)
    return theta.ndim == 1 and bool(np.all(theta >= 0)) and abs(theta.sum() - 1.0) <= atol


def stick_break(fractions) -> np.ndarray:
    """Map J-1 break fractions in [0, 1] to a length-J probability vector.

    The first entry takes fraction ``x_1`` of the unit stick, each following
    entry takes its fraction of what remains, and the last entry absorbs the
    rest::

        theta_1 = x_1
        theta_j = x_j * prod_{i<j} (1 - x_i)
        theta_J = prod_{i<J} (1 - x_i)
    """
    x = np.asarray(fractions, dtype=np.float64)
    if np.any((x < 0) | (x > 1)):
        raise ValueError("stick fractions must lie in [0, 1]")
    j = x.size
    theta = np.empty(j + 1)
    remaining = np.concatenate(([1.0], np.cumprod(1.0 - x)))
    theta[:j] = x * remaining[:j]
    theta[j] = remaining[j]
    return theta


def stick_unbreak(theta) -> np.ndarray:
    """Inverse of :func:`stick_break`.

    When the remaining stick mass hits zero the corresponding fraction is
    undetermined; it is defined as 0 so the map is deterministic.
    """
    theta = as_prob_vec(theta)
    if theta.size < 2:
        raise ValueError("need at least two components to unbreak")
    x = np.zeros(theta.size - 1)
    remaining = 1.0
    for j in range(theta.size - 1):
        if remaining > 0:
            x[j] = min(theta[j] / remaining, 1.0)
        remaining -= theta[j]
    return x


def log_sum_exp(values) -> float:
    """Stable log(sum(exp(values))) for inputs spanning hundreds of nats."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("log_sum_exp of empty input")
    return float(logsumexp(v))


def sample_categorical(log_weights, rng: RngStream) -> int:
    """Draw an index with probability proportional to ``exp(log_weights)``.

    Invariant to additive shifts of the log weights.  Weights of ``-inf``
    mark impossible outcomes; all ``-inf`` is an error.
    """
    lw = np.asarray(log_weights, dtype=np.float64)
    if lw.size == 0:
        raise ValueError("sample_categorical of empty input")
    m = lw.max()
    if m == -np.inf:
        raise ValueError("all categorical log weights are -inf")
    p = np.exp(lw - m)
    p /= p.sum()
    u = rng.generator.random()
    idx = int(np.searchsorted(np.cumsum(p), u, side="right"))
    return min(idx, lw.size - 1)
