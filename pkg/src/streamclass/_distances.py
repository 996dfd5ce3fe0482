"""Euclidean distance helper with reproducible accumulation order."""

import numpy as np


def pairwise_distances(A, B):
    """Distances between the rows of A (n, q) and B (m, q), shape (n, m).

    Accumulates squared coordinate differences in column order, matching a
    per-pair ``sqrt(sum((a - b)**2))`` evaluation, so vectorized results agree
    with naive loops to the last few ulps.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    out = np.zeros((A.shape[0], B.shape[0]))
    for k in range(A.shape[1]):
        diff = A[:, k, None] - B[None, :, k]
        out += diff * diff
    return np.sqrt(out)
