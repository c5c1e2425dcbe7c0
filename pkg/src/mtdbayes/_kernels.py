"""Compiled inner loops for the allocation updates.

The collapsed pass reassigns one observation at a time against counts it
mutates in place, so it must run sequentially; the candidate scores are the
conjugate predictive ratios of the one count block each candidate touches
(everything else cancels in the normalization).  Randomness comes in as a
pre-drawn uniform per observation, which keeps runs bit-reproducible.

Both passes return -1 on success, or the observation index whose conditional
degenerated (all scores zero or non-finite) so the caller can abort with a
diagnostic.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def collapsed_allocation_pass(
    alloc, srows, cand_cols, counts, colsums, alpha_flat, alpha_colsum, w, uniforms, scan
):
    n_cand = cand_cols.shape[1]
    scores = np.empty(n_cand)
    for idx in range(scan.size):
        i = scan[idx]
        row = srows[i]
        old = cand_cols[i, alloc[i]]
        counts[row, old] -= 1.0
        colsums[old] -= 1.0
        total = 0.0
        for c in range(n_cand):
            col = cand_cols[i, c]
            s = w[c] * (alpha_flat[row, col] + counts[row, col]) / (alpha_colsum[col] + colsums[col])
            scores[c] = s
            total += s
        if not (total > 0.0 and np.isfinite(total)):
            counts[row, old] += 1.0
            colsums[old] += 1.0
            return i
        u = uniforms[i] * total
        acc = 0.0
        pick = n_cand - 1
        for c in range(n_cand):
            acc += scores[c]
            if u <= acc:
                pick = c
                break
        alloc[i] = pick
        new = cand_cols[i, pick]
        counts[row, new] += 1.0
        colsums[new] += 1.0
    return -1


@njit(cache=True)
def full_allocation_pass(alloc, srows, cand_cols, q_flat, w, uniforms):
    n = srows.size
    n_cand = cand_cols.shape[1]
    scores = np.empty(n_cand)
    for i in range(n):
        row = srows[i]
        total = 0.0
        for c in range(n_cand):
            s = w[c] * q_flat[row, cand_cols[i, c]]
            scores[c] = s
            total += s
        if not (total > 0.0 and np.isfinite(total)):
            return i
        u = uniforms[i] * total
        acc = 0.0
        pick = n_cand - 1
        for c in range(n_cand):
            acc += scores[c]
            if u <= acc:
                pick = c
                break
        alloc[i] = pick
    return -1
