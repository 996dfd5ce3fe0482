"""Input validation helpers shared by the estimators."""

import numpy as np
from sklearn.exceptions import NotFittedError


def check_array(X, *, ndim=2, name="X"):
    """Coerce to a float ndarray of the given rank and reject non-finite entries."""
    X = np.asarray(X, dtype=float)
    if X.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {X.shape}")
    if X.size and not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    return X


def check_X_y(X, y):
    """Validate a feature matrix / label vector pair of consistent length."""
    X = check_array(X)
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"y must be 1-dimensional, got shape {y.shape}")
    if len(y) != len(X):
        raise ValueError(f"X and y have inconsistent lengths: {len(X)} != {len(y)}")
    return X, y


def check_is_fitted(estimator, attribute):
    if not hasattr(estimator, attribute):
        raise NotFittedError(
            f"This {type(estimator).__name__} instance is not fitted yet; "
            "call fit() before using this method"
        )


def resolve_classes(y, classes=None, *, require_present=True):
    """Class catalog as an array; optionally require every class in ``y``.

    Fit contracts demand each declared class among the training labels;
    posterior evaluation accepts a wider catalog (absent classes simply get
    zero weight).
    """
    present = np.unique(y)
    if classes is None:
        return present
    classes = np.asarray(classes)
    if require_present:
        missing = np.setdiff1d(classes, present)
        if missing.size:
            raise ValueError(f"classes absent from training labels: {missing.tolist()}")
    return classes
