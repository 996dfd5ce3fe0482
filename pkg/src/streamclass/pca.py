"""Batch principal component analysis with explained-variance reporting."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_array, check_is_fitted
from .linalg import covariance, sym_eigen


class BatchPCA(BaseEstimator, TransformerMixin):
    """Top-q eigenbasis of the 1/n sample covariance.

    The fitted basis minimizes the mean squared distance between centered
    rows and their rank-q projections; the residual of that loss equals the
    sum of the discarded eigenvalues.

    Parameters
    ----------
    n_components : int
        Number of leading components q, 1 <= q <= n_features.

    Attributes
    ----------
    mean_ : ndarray of shape (d,)
    components_ : ndarray of shape (q, d)
        Rows are orthonormal eigenvectors, leading eigenvalue first.
    explained_variance_ : ndarray of shape (q,)
        Eigenvalues, descending, clamped at zero.
    explained_variance_ratio_ : ndarray of shape (q,)
        Eigenvalues divided by the covariance trace.
    total_variance_ : float
        Trace of the covariance matrix.
    """

    def __init__(self, n_components=5):
        self.n_components = n_components

    def fit(self, X, y=None):
        X = check_array(X)
        n, d = X.shape
        q = self.n_components
        if not 1 <= q <= d:
            raise ValueError(f"n_components={q} out of range for {d} features")
        if n < 2:
            raise ValueError("fit requires at least two rows")
        mean, cov = covariance(X)
        eig = sym_eigen(cov)
        values = np.maximum(eig.values, 0.0)
        self.mean_ = mean
        self.components_ = eig.vectors[:, :q].T.copy()
        self.explained_variance_ = values[:q]
        self.total_variance_ = float(np.trace(cov))
        if self.total_variance_ > 0:
            self.explained_variance_ratio_ = self.explained_variance_ / self.total_variance_
        else:
            self.explained_variance_ratio_ = np.zeros(q)
        self.residual_variance_ = float(values[q:].sum())
        return self

    def transform(self, X):
        """Centered projection onto the fitted basis.

        Accepts a single vector of shape (d,) or a matrix of shape (m, d)
        and preserves the input's dimensionality.
        """
        check_is_fitted(self, "components_")
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X2 = np.atleast_2d(X)
        if X2.shape[1] != self.mean_.shape[0]:
            raise ValueError(
                f"expected {self.mean_.shape[0]} features, got {X2.shape[1]}"
            )
        Z = (X2 - self.mean_) @ self.components_.T
        return Z[0] if single else Z


def explained_variance(model):
    """Per-component variance ratios and their cumulative sums.

    Raises if the model saw zero total variance (all rows identical).
    """
    check_is_fitted(model, "components_")
    if model.total_variance_ <= 0:
        raise ValueError("total variance is zero; ratios are undefined")
    ratios = model.explained_variance_ / model.total_variance_
    return ratios, np.cumsum(ratios)
