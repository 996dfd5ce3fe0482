"""Streaming dimension reduction: one-pass mean, covariance, and eigenbasis updates.

The workhorse is :class:`StreamingPCA`, a reduced-rank incremental PCA that
keeps only a d x q basis and q eigenvalues. Every new observation is folded in
through the eigendecomposition of a small (q+1) x (q+1) matrix, so the
per-update cost never depends on how many rows have streamed past.
:class:`CovarianceTracker` maintains the exact full covariance through the
matching rank-one recursion; with q = d the two trajectories coincide, which
the tests exploit as an oracle.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_array, check_is_fitted
from .linalg import covariance, sym_eigen
from .pca import BatchPCA

# Residuals below this relative size are treated as lying inside the current span.
_RESIDUAL_RTOL = 1e-10
# Re-orthonormalize when the basis drifts further than this from V^T V = I.
_ORTHO_TOL = 1e-8


def update_mean(mean, n, x):
    """Mean of n+1 points from the mean of the first n and the new point x."""
    if n < 1:
        raise ValueError("n must be at least 1")
    mean = np.asarray(mean, dtype=float)
    x = np.asarray(x, dtype=float)
    return (n / (n + 1.0)) * mean + x / (n + 1.0)


class CovarianceTracker:
    """Exact running mean and 1/n covariance, updated one observation at a time.

    The covariance recursion is
    ``S_{n+1} = n/(n+1) * S_n + n/(n+1)^2 * (x - m_n)(x - m_n)^T``
    with the mean advanced afterwards; after any stream it equals the batch
    1/n covariance of everything seen.
    """

    def __init__(self, head):
        head = check_array(head, name="head")
        self.mean, self.cov = covariance(head)
        self.count = head.shape[0]

    def update(self, x):
        x = np.asarray(x, dtype=float)
        n = self.count
        centered = x - self.mean
        self.cov = (n / (n + 1.0)) * self.cov + (n / (n + 1.0) ** 2) * np.outer(
            centered, centered
        )
        self.mean = update_mean(self.mean, n, x)
        self.count = n + 1
        return self


class StreamingPCA(BaseEstimator, TransformerMixin):
    """Reduced-rank incremental PCA.

    The first ``n_init`` rows are absorbed with a batch eigendecomposition;
    each later row rotates the basis through a (q+1) x (q+1) eigenproblem
    built from its in-span coordinates and out-of-span residual.

    Parameters
    ----------
    n_components : int
        Rank q of the maintained basis.
    n_init : int or None
        Rows buffered for the batch initialization; defaults to
        ``n_components + 1``, the smallest admissible head.

    Attributes
    ----------
    mean_ : ndarray of shape (d,)
    components_ : ndarray of shape (q, d)
        Rows form the current orthonormal basis, leading eigenvalue first.
    explained_variance_ : ndarray of shape (q,)
        Current eigenvalue estimates, descending and nonnegative.
    total_variance_ : float
        Running covariance trace (maintained exactly even at reduced rank).
    n_seen_ : int
        Number of rows absorbed so far.
    """

    def __init__(self, n_components=5, n_init=None):
        self.n_components = n_components
        self.n_init = n_init

    def _effective_init(self):
        return self.n_components + 1 if self.n_init is None else self.n_init

    def fit(self, X, y=None):
        """Initialize on the head of X and stream the remaining rows."""
        X = check_array(X)
        n_init = self._effective_init()
        if X.shape[0] < n_init:
            raise ValueError(f"fit needs at least n_init={n_init} rows, got {X.shape[0]}")
        self._init_from_head(X[:n_init])
        for x in X[n_init:]:
            self._update(x)
        return self

    def partial_fit(self, X, y=None):
        """Absorb one row or a batch of rows, buffering until the head is full."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        X = check_array(X)
        if not hasattr(self, "components_"):
            buffered = getattr(self, "_buffer", None)
            X = X if buffered is None else np.vstack([buffered, X])
            if X.shape[0] < self._effective_init():
                self._buffer = X
                return self
            self._init_from_head(X[: self._effective_init()])
            self._buffer = None
            X = X[self._effective_init():]
        for x in X:
            self._update(x)
        return self

    def _init_from_head(self, head):
        q = self.n_components
        if head.shape[0] < q + 1:
            raise ValueError(f"initialization needs at least {q + 1} rows")
        batch = BatchPCA(n_components=q).fit(head)
        self.mean_ = batch.mean_
        self.components_ = batch.components_.copy()
        self.explained_variance_ = batch.explained_variance_.copy()
        self.total_variance_ = batch.total_variance_
        self.n_seen_ = head.shape[0]

    def _update(self, x):
        n = self.n_seen_
        q = self.n_components
        V = self.components_.T  # d x q
        lam = self.explained_variance_

        centered = x - self.mean_
        coords = V.T @ centered
        residual = centered - V @ coords
        res_norm = float(np.sqrt(residual @ residual))
        factor = n / (n + 1.0) ** 2

        if res_norm < _RESIDUAL_RTOL * (1.0 + np.sqrt(centered @ centered)):
            # New point lies in the current span: rotate within it.
            small = factor * ((n + 1.0) * np.diag(lam) + np.outer(coords, coords))
            eig = sym_eigen(small, check=False)
            self.explained_variance_ = np.maximum(eig.values, 0.0)
            V = V @ eig.vectors
        else:
            small = np.empty((q + 1, q + 1))
            small[:q, :q] = (n + 1.0) * np.diag(lam) + np.outer(coords, coords)
            small[:q, q] = res_norm * coords
            small[q, :q] = res_norm * coords
            small[q, q] = res_norm * res_norm
            small *= factor
            eig = sym_eigen(small, check=False)
            self.explained_variance_ = np.maximum(eig.values[:q], 0.0)
            augmented = np.concatenate([V, residual[:, None] / res_norm], axis=1)
            V = augmented @ eig.vectors[:, :q]

        gram_drift = np.abs(V.T @ V - np.eye(q)).max()
        if gram_drift > _ORTHO_TOL:
            V = _gram_schmidt(V)
        self.components_ = V.T
        # The full covariance trace obeys the same rank-one recursion, so the
        # reduced state can still report ratios against the total variance.
        self.total_variance_ = (
            n / (n + 1.0) * self.total_variance_ + factor * (centered @ centered)
        )
        self.mean_ = update_mean(self.mean_, n, x)
        self.n_seen_ = n + 1

    def transform(self, X):
        """Centered projection onto the current basis (vector or matrix input)."""
        check_is_fitted(self, "components_")
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X2 = np.atleast_2d(X)
        if X2.shape[1] != self.mean_.shape[0]:
            raise ValueError(f"expected {self.mean_.shape[0]} features, got {X2.shape[1]}")
        Z = (X2 - self.mean_) @ self.components_.T
        return Z[0] if single else Z

    def fit_transform_online(self, X):
        """Fit while emitting each row's projection under the basis that absorbed it.

        Head rows are projected with the initialization basis; every later row
        is projected right after its own update. Use this for the one-pass
        mode where no second sweep over the stream is possible.
        """
        X = check_array(X)
        n_init = self._effective_init()
        if X.shape[0] < n_init:
            raise ValueError(f"need at least n_init={n_init} rows, got {X.shape[0]}")
        self._init_from_head(X[:n_init])
        out = np.empty((X.shape[0], self.n_components))
        out[:n_init] = self.transform(X[:n_init])
        for i in range(n_init, X.shape[0]):
            self._update(X[i])
            out[i] = self.transform(X[i])
        return out

    def reconstruction(self):
        """Current rank-q covariance surrogate ``V diag(lam) V^T``."""
        check_is_fitted(self, "components_")
        V = self.components_.T
        return (V * self.explained_variance_) @ V.T


def _gram_schmidt(V):
    """Modified Gram-Schmidt re-orthonormalization, direction-preserving."""
    V = V.copy()
    for j in range(V.shape[1]):
        for i in range(j):
            V[:, j] -= (V[:, i] @ V[:, j]) * V[:, i]
        norm = np.sqrt(V[:, j] @ V[:, j])
        if norm > 0:
            V[:, j] /= norm
    return V
