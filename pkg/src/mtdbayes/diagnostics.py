"""MCMC convergence diagnostics: split-chain potential scale reduction and
autocorrelation-based effective sample size."""

from __future__ import annotations

import numpy as np

# Chains whose split potential-scale-reduction exceeds this are flagged; with
# multimodal posteriors parallel chains can settle in neighboring modes, so
# disagreement is surfaced as a warning rather than merged away.
RHAT_WARN_THRESHOLD = 1.1


def _split_chains(draws: np.ndarray) -> np.ndarray:
    """Split each chain in half, dropping one draw from odd-length chains."""
    draws = np.atleast_2d(np.asarray(draws, dtype=np.float64))
    m, n = draws.shape
    half = n // 2
    return np.concatenate([draws[:, :half], draws[:, n - half:]], axis=0)


def split_rhat(draws) -> float:
    """Potential scale reduction over split chains.

    ``draws`` has shape (n_chains, n_iterations).  Values near 1 indicate the
    split halves agree in location and scale.
    """
    chains = _split_chains(draws)
    m, n = chains.shape
    if n < 4:
        return np.nan
    means = chains.mean(axis=1)
    w = chains.var(axis=1, ddof=1).mean()
    b = n * means.var(ddof=1)
    if w == 0:
        return 1.0 if b == 0 else np.inf
    var_plus = (n - 1) / n * w + b / n
    return float(np.sqrt(var_plus / w))


def _autocovariance(x: np.ndarray) -> np.ndarray:
    """Biased autocovariance by FFT, normalized by n."""
    n = x.size
    xc = x - x.mean()
    size = int(2 ** np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(xc, size)
    acov = np.fft.irfft(f * np.conjugate(f), size)[:n].real
    return acov / n


def ess(draws) -> float:
    """Effective sample size across chains.

    Averages per-chain autocovariances, corrects for between-chain variance,
    and truncates the autocorrelation sum with the initial-monotone-positive
    pair criterion.
    """
    chains = _split_chains(draws)
    m, n = chains.shape
    if n < 4:
        return np.nan
    acovs = np.stack([_autocovariance(c) for c in chains])
    chain_var = acovs[:, 0] * n / (n - 1)
    mean_var = chain_var.mean()
    var_plus = mean_var * (n - 1) / n
    if m > 1:
        var_plus += chains.mean(axis=1).var(ddof=1)
    if var_plus == 0:
        return float(m * n)

    rho = 1.0 - (mean_var - acovs.mean(axis=0)) / var_plus
    # Geyer pairs: accumulate rho[2k-1] + rho[2k] while positive, enforcing
    # monotone decrease of the pair sums.
    prev_pair = np.inf
    tau = 1.0
    k = 1
    while k + 1 < n:
        pair = rho[k] + rho[k + 1]
        if pair < 0:
            break
        pair = min(pair, prev_pair)
        prev_pair = pair
        tau += 2.0 * pair
        k += 2
    return float(m * n / max(tau, 1e-12))


def summarize_convergence(draws_by_name: dict[str, np.ndarray]) -> dict[str, dict[str, float]]:
    """Per-parameter ESS and split potential-scale-reduction."""
    return {
        name: {"ess": ess(d), "rhat": split_rhat(d)}
        for name, d in draws_by_name.items()
    }
