"""MTD and MTDg model parameterizations.

The single-matrix mixture model blends the columns of one K-by-K transition
matrix across lags; the generalized form adds an intercept distribution and a
distinct matrix per lag.  The generalized form is overparameterized: mass can
be moved freely between the lag matrices and the intercept, so this module
also implements the maximal reduction that transfers as much mass as possible
to the intercept, yielding the unique representation whose lag weights are
interpretable as marginal lag contributions.

States are 0-based here and everywhere inside the package; 1-based labels
appear only in serialized files.  A lag history vector lists the most recent
state first: ``lagged[i]`` is the state ``i + 1`` steps back.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .probcore import as_prob_vec

# Guard on materializing full transition tensors, in entries.
MAX_TENSOR_ENTRIES = 10**8


def _check_column_stochastic(q: np.ndarray, name: str) -> None:
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {q.shape}")
    for j in range(q.shape[1]):
        try:
            as_prob_vec(q[:, j])
        except ValueError as exc:
            raise ValueError(f"{name} column {j} is not a probability vector: {exc}") from exc


def _check_states(lagged: np.ndarray, n_lags: int, n_states: int) -> np.ndarray:
    lagged = np.asarray(lagged, dtype=np.int64)
    if lagged.size != n_lags:
        raise ValueError(f"expected {n_lags} lagged states, got {lagged.size}")
    if np.any((lagged < 0) | (lagged >= n_states)):
        raise ValueError(f"lagged states must lie in [0, {n_states})")
    return lagged


@dataclass
class MTDParams:
    """Lag weights plus one shared column-stochastic matrix.

    ``q[k0, k]`` is the probability of outcome ``k0`` given that the selected
    lag holds state ``k``.
    """

    weights: np.ndarray
    q: np.ndarray

    def __post_init__(self) -> None:
        self.weights = as_prob_vec(self.weights)
        self.q = np.asarray(self.q, dtype=np.float64)
        _check_column_stochastic(self.q, "q")

    @property
    def n_lags(self) -> int:
        return self.weights.size

    @property
    def n_states(self) -> int:
        return self.q.shape[0]


@dataclass
class MTDgParams:
    """Intercept weight plus per-lag transition matrices.

    ``weights`` has length L+1 with the intercept weight first; ``q0`` is the
    intercept distribution; ``q[l]`` is the matrix for lag ``l + 1``.
    """

    weights: np.ndarray
    q0: np.ndarray
    q: list[np.ndarray]

    def __post_init__(self) -> None:
        self.weights = as_prob_vec(self.weights)
        self.q0 = as_prob_vec(self.q0)
        self.q = [np.asarray(m, dtype=np.float64) for m in self.q]
        if len(self.q) != self.weights.size - 1:
            raise ValueError("need one matrix per lag (weights carries the extra intercept weight)")
        for i, m in enumerate(self.q):
            _check_column_stochastic(m, f"q[{i}]")

    @property
    def n_lags(self) -> int:
        return len(self.q)

    @property
    def n_states(self) -> int:
        return self.q0.size


@dataclass
class ReducedMTDg(MTDgParams):
    """Maximally reduced MTDg parameters.

    ``active[l]`` is False when lag ``l + 1`` lost all its weight in the
    reduction; its matrix is then a placeholder with uniform columns.
    """

    active: np.ndarray = field(default_factory=lambda: np.array([], dtype=bool))


def mtd_transition(params: MTDParams, lagged) -> np.ndarray:
    """Transition distribution given the L most recent states."""
    lagged = _check_states(lagged, params.n_lags, params.n_states)
    return params.q[:, lagged] @ params.weights


def mtdg_transition(params: MTDgParams, lagged) -> np.ndarray:
    """Transition distribution of the generalized model at a lag history."""
    lagged = _check_states(lagged, params.n_lags, params.n_states)
    out = params.weights[0] * params.q0
    for l, m in enumerate(params.q):
        out = out + params.weights[l + 1] * m[:, lagged[l]]
    return out


def mtdg_reduce(params: MTDgParams) -> ReducedMTDg:
    """Maximal reduction of an MTDg parameterization.

    For each lag, the row minima of the weighted matrix ``lam_l * q_l`` are
    transferred to the intercept; transition probabilities are preserved
    exactly.  After reduction every row of every active weighted lag matrix
    has minimum zero, and the representation is unique.
    """
    k = params.n_states
    phi0 = params.weights[0] * params.q0
    new_w = np.empty_like(params.weights)
    new_q = []
    active = np.empty(params.n_lags, dtype=bool)
    for l, m in enumerate(params.q):
        phi = params.weights[l + 1] * m
        a = phi.min(axis=1)
        phi0 = phi0 + a
        phi = phi - a[:, None]
        w = phi.sum(axis=0).mean()
        # Residual mass at rounding scale is noise from an exact cancellation;
        # treat the lag as fully reduced rather than divide by it.
        if w <= 1e-14:
            w = 0.0
        new_w[l + 1] = w
        if w > 0:
            new_q.append(phi / w)
            active[l] = True
        else:
            new_q.append(np.full((k, k), 1.0 / k))
            active[l] = False
    new_w[0] = phi0.sum()
    q0 = phi0 / new_w[0] if new_w[0] > 0 else np.full(k, 1.0 / k)
    # Compensate accumulated rounding so the weights pass simplex validation.
    new_w /= new_w.sum()
    return ReducedMTDg(weights=new_w, q0=q0, q=new_q, active=active)


def build_full_tensor(model: MTDParams | MTDgParams, n_lags: int | None = None) -> np.ndarray:
    """Materialize the full (L+1)-order transition tensor.

    ``out[k0, k1, ..., kL]`` is the transition probability to ``k0`` from the
    history ``(k1, ..., kL)``, most recent lag first.  Guarded by an
    entry-count cap; use pointwise evaluation beyond it.
    """
    if n_lags is None:
        n_lags = model.n_lags
    if n_lags < model.n_lags:
        raise ValueError("n_lags smaller than the model order")
    k = model.n_states
    if k ** (n_lags + 1) > MAX_TENSOR_ENTRIES:
        raise ValueError(
            f"full tensor would hold {k ** (n_lags + 1)} entries, over the "
            f"{MAX_TENSOR_ENTRIES} cap"
        )
    shape = (k,) * (n_lags + 1)
    if isinstance(model, MTDgParams):
        out = np.zeros(shape)
        out += model.weights[0] * model.q0.reshape((k,) + (1,) * n_lags)
        per_lag = [(model.weights[l + 1], model.q[l]) for l in range(model.n_lags)]
    else:
        out = np.zeros(shape)
        per_lag = [(model.weights[l], model.q) for l in range(model.n_lags)]
    for l, (w, m) in enumerate(per_lag):
        ax_shape = [1] * (n_lags + 1)
        ax_shape[0] = k
        ax_shape[l + 1] = k
        out += w * m.reshape(ax_shape)
    return out


# ---------------------------------------------------------------------------
# JSON import/export (probabilities as decimal doubles, 1-based field naming
# follows the serialized schema documented in the README)
# ---------------------------------------------------------------------------

def mtd_params_to_json(params: MTDParams) -> str:
    doc = {
        "kind": "mtd",
        "n_states": params.n_states,
        "n_lags": params.n_lags,
        "weights": params.weights.tolist(),
        "q": params.q.tolist(),
    }
    return json.dumps(doc, indent=2)


def mtdg_params_to_json(params: MTDgParams) -> str:
    doc = {
        "kind": "mtdg",
        "n_states": params.n_states,
        "n_lags": params.n_lags,
        "weights": params.weights.tolist(),
        "q0": params.q0.tolist(),
        "q": [m.tolist() for m in params.q],
    }
    return json.dumps(doc, indent=2)


def params_from_json(text: str) -> MTDParams | MTDgParams:
    doc = json.loads(text)
    kind = doc.get("kind")
    if kind == "mtd":
        return MTDParams(weights=np.array(doc["weights"]), q=np.array(doc["q"]))
    if kind == "mtdg":
        return MTDgParams(
            weights=np.array(doc["weights"]),
            q0=np.array(doc["q0"]),
            q=[np.array(m) for m in doc["q"]],
        )
    raise ValueError(f"unknown parameter document kind: {kind!r}")
