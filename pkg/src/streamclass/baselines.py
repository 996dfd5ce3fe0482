"""Gaussian discriminant and nearest-neighbor reference classifiers.

All three operate on whatever feature space they are given (the benchmark
feeds them the reduced coordinates) and break prediction ties toward the
lowest class.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ._distances import pairwise_distances
from ._validation import check_array, check_is_fitted, check_X_y, resolve_classes
from .linalg import sym_eigen

# Ridge added to covariance diagonals before inversion, relative to the
# average eigenvalue; reduced features can be near-singular in small classes.
_RIDGE = 1e-8


def _regularized_inverse(cov):
    """Pseudo-inverse and log-determinant through a floored eigendecomposition."""
    q = cov.shape[0]
    ridge = _RIDGE * np.trace(cov) / q
    if ridge <= 0:
        raise np.linalg.LinAlgError("covariance has nonpositive trace; cannot invert")
    eig = sym_eigen(cov + ridge * np.eye(q), check=False)
    floored = np.maximum(eig.values, ridge)
    inv = (eig.vectors / floored) @ eig.vectors.T
    logdet = float(np.log(floored).sum())
    return inv, logdet


class LDAClassifier(BaseEstimator, ClassifierMixin):
    """Linear discriminant scores from class means and a pooled covariance.

    Class score: ``x^T S^-1 mu_g - 0.5 * mu_g^T S^-1 mu_g + log pi_g`` with S
    the pooled (maximum-likelihood) within-class covariance.
    """

    def __init__(self, classes=None):
        self.classes = classes

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        classes = resolve_classes(y, self.classes)
        n, q = X.shape
        means = np.empty((len(classes), q))
        pooled = np.zeros((q, q))
        priors = np.empty(len(classes))
        for g, label in enumerate(classes):
            rows = X[y == label]
            if rows.shape[0] < 2:
                raise ValueError(f"class {label!r} has fewer than 2 members")
            means[g] = rows.mean(axis=0)
            centered = rows - means[g]
            pooled += centered.T @ centered
            priors[g] = rows.shape[0] / n
        pooled /= n
        precision, _ = _regularized_inverse(pooled)

        self.classes_ = classes
        self.means_ = means
        self.precision_ = precision
        self.priors_ = priors
        self.log_priors_ = np.log(priors)
        return self

    def decision_function(self, X):
        """Per-class discriminant scores, shape (m, G)."""
        check_is_fitted(self, "precision_")
        X = check_array(X)
        pm = self.precision_ @ self.means_.T  # q x G
        return X @ pm - 0.5 * np.sum(self.means_.T * pm, axis=0) + self.log_priors_

    def predict(self, X):
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]


class QDAClassifier(BaseEstimator, ClassifierMixin):
    """Quadratic discriminant scores from per-class Gaussian fits.

    Class score:
    ``-0.5 log|S_g| - 0.5 (x - mu_g)^T S_g^-1 (x - mu_g) + log pi_g``.
    Classes too small to estimate their own covariance (fewer than q + 1
    members) are shrunk toward the pooled covariance.
    """

    def __init__(self, classes=None):
        self.classes = classes

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        classes = resolve_classes(y, self.classes)
        n, q = X.shape
        means = np.empty((len(classes), q))
        covs = np.empty((len(classes), q, q))
        priors = np.empty(len(classes))
        pooled = np.zeros((q, q))
        sizes = np.empty(len(classes), dtype=int)
        for g, label in enumerate(classes):
            rows = X[y == label]
            if rows.shape[0] < 2:
                raise ValueError(f"class {label!r} has fewer than 2 members")
            sizes[g] = rows.shape[0]
            means[g] = rows.mean(axis=0)
            centered = rows - means[g]
            covs[g] = centered.T @ centered / rows.shape[0]
            pooled += centered.T @ centered
            priors[g] = rows.shape[0] / n
        pooled /= n

        precisions = np.empty_like(covs)
        logdets = np.empty(len(classes))
        for g in range(len(classes)):
            cov = covs[g]
            if sizes[g] < q + 1:
                weight = sizes[g] / (q + 1.0)
                cov = weight * cov + (1.0 - weight) * pooled
            precisions[g], logdets[g] = _regularized_inverse(cov)

        self.classes_ = classes
        self.means_ = means
        self.precisions_ = precisions
        self.log_dets_ = logdets
        self.priors_ = priors
        self.log_priors_ = np.log(priors)
        return self

    def decision_function(self, X):
        """Per-class discriminant scores, shape (m, G)."""
        check_is_fitted(self, "precisions_")
        X = check_array(X)
        scores = np.empty((X.shape[0], len(self.classes_)))
        for g in range(len(self.classes_)):
            centered = X - self.means_[g]
            maha = np.sum((centered @ self.precisions_[g]) * centered, axis=1)
            scores[:, g] = -0.5 * self.log_dets_[g] - 0.5 * maha + self.log_priors_[g]
        return scores

    def predict(self, X):
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]


def default_k_grid():
    """Odd neighbor counts 1, 3, ..., 31 (odd to limit vote ties)."""
    return tuple(range(1, 32, 2))


class KNNClassifier(BaseEstimator, ClassifierMixin):
    """Majority vote among the k nearest training rows (Euclidean metric).

    Distance ties resolve by training-row order, vote ties toward the lowest
    class. When ``k`` is None it is chosen by 10-fold cross-validation over
    ``k_grid``, minimizing the misclassified fraction with ties toward the
    smallest k.
    """

    def __init__(self, k=None, k_grid=None, n_folds=10, classes=None, random_state=0):
        self.k = k
        self.k_grid = k_grid
        self.n_folds = n_folds
        self.classes = classes
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        if X.shape[0] == 0:
            raise ValueError("training sample is empty")
        self.classes_ = resolve_classes(y, self.classes)
        self.X_, self.y_ = X, y
        if self.k is not None:
            if not 1 <= self.k <= X.shape[0]:
                raise ValueError(f"k must lie in [1, {X.shape[0]}], got {self.k}")
            self.k_ = int(self.k)
            self.cv_msr_ = None
        else:
            grid = default_k_grid() if self.k_grid is None else tuple(self.k_grid)
            self.k_, self.cv_msr_ = _select_k(
                X, y, self.classes_, grid, self.n_folds, self.random_state
            )
        return self

    def _votes(self, X, k):
        """Per-class neighbor counts among the k nearest, shape (m, G)."""
        X = check_array(X)
        D = pairwise_distances(self.X_, X)  # n x m
        order = np.argsort(D, axis=0, kind="stable")[:k]
        labels = self.y_[order]  # k x m
        return (labels[None, :, :] == self.classes_[:, None, None]).sum(axis=1).T

    def vote_fractions(self, X):
        """Share of the k nearest neighbors voting for each class, shape (m, G)."""
        check_is_fitted(self, "k_")
        return self._votes(X, self.k_) / self.k_

    def predict(self, X):
        check_is_fitted(self, "k_")
        votes = self._votes(X, self.k_)
        return self.classes_[np.argmax(votes, axis=1)]


def _select_k(X, y, classes, grid, n_folds, random_state):
    """Cross-validated neighbor count: fold errors for all k in one sweep."""
    n = X.shape[0]
    if not grid:
        raise ValueError("k_grid must be nonempty")
    if not 2 <= n_folds <= n:
        raise ValueError(f"n_folds must lie in [2, {n}], got {n_folds}")
    rng = np.random.default_rng(random_state)
    folds = np.array_split(rng.permutation(n), n_folds)
    min_train = min(n - len(f) for f in folds)
    ks = [k for k in grid if 1 <= k <= min_train]
    if not ks:
        raise ValueError(f"no usable k in grid {grid} for folds of {min_train} rows")

    errors = np.zeros(len(ks), dtype=np.int64)
    k_max = max(ks)
    for fold in folds:
        keep = np.setdiff1d(np.arange(n), fold)
        D = pairwise_distances(X[keep], X[fold])
        order = np.argsort(D, axis=0, kind="stable")[:k_max]
        labels = y[keep][order]  # k_max x |fold|
        onehot = labels[None, :, :] == classes[:, None, None]  # G x k_max x |fold|
        cumulative = np.cumsum(onehot, axis=1)
        truth = y[fold]
        for i, k in enumerate(ks):
            pred = classes[np.argmax(cumulative[:, k - 1, :], axis=0)]
            errors[i] += int((pred != truth).sum())

    msr = errors / float(n)
    best = min(zip(msr, ks))[1]
    return int(best), dict(zip(ks, msr.tolist()))
