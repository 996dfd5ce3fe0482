"""Recursive posterior estimation for streamed observations.

Estimates at a fixed set of query points are updated per arriving pair
(x_n, y_n) by the stochastic-approximation recursion

    P_g(x) <- P_g(x) + theta_n * (1{y_n = g} - P_g(x)),

where the gain combines a 1/n-type decay with a kernel gate on the distance
between the observation and the query:

    theta_n = c * n**(-4/(d+4)) * K(n**(1/(d+4)) * ||x_n - x||),

clamped to [0, 1] so every estimate stays a convex combination. Initial
values come from the batch kernel posterior on a head sample, and the
recursion constant c is tuned once on that head by progressive validation.
"""

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ._distances import pairwise_distances
from ._validation import check_array, check_is_fitted, check_X_y, resolve_classes
from .kernel import cross_validate_bandwidths, get_kernel, nw_posterior

_STATE_VERSION = 1


def default_c_gamma_grid():
    """60 log-spaced recursion-constant candidates spanning [0.5, 120]."""
    return np.geomspace(0.5, 120.0, 60)


@dataclass(frozen=True)
class StepSchedule:
    """Gain schedule of the posterior recursion.

    ``dim`` is the dimension of the space the recursion runs in (the reduced
    feature space), which sets both the n**(-4/(dim+4)) decay and the
    n**(1/(dim+4)) kernel-argument growth.
    """

    c_gamma: float
    dim: int
    kernel: str = "epanechnikov"

    def __post_init__(self):
        if self.c_gamma <= 0:
            raise ValueError(f"c_gamma must be positive, got {self.c_gamma}")
        if self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")

    def step_size(self, n, distance):
        """Gain theta_n in [0, 1] for observation n at the given query distance.

        Zero whenever ``n**(1/(dim+4)) * distance`` falls outside the kernel
        support; the clamp at 1 keeps updates inside the probability simplex
        even for large recursion constants at small n.
        """
        if n < 1:
            raise ValueError("n must be at least 1")
        kernel_fn = get_kernel(self.kernel)
        inv = 1.0 / (self.dim + 4.0)
        raw = self.c_gamma * n ** (-4.0 * inv) * kernel_fn(n**inv * np.asarray(distance, float))
        return np.clip(raw, 0.0, 1.0)


class PosteriorTracker:
    """Per-query class-posterior estimates driven by a streamed sample.

    Attributes
    ----------
    queries : ndarray of shape (m, q)
    estimates : ndarray of shape (m, G)
        Row i estimates the class posteriors at queries[i]; entries in [0, 1].
    classes : ndarray of shape (G,)
    count : int
        Stream position: number of observations the estimates reflect.
    """

    def __init__(self, queries, estimates, classes, count):
        self.queries = np.asarray(queries, dtype=float)
        self.estimates = np.asarray(estimates, dtype=float)
        self.classes = np.asarray(classes)
        self.count = int(count)
        if self.queries.ndim != 2 or self.queries.shape[0] == 0:
            raise ValueError("queries must be a nonempty (m, q) array")
        if self.estimates.shape != (self.queries.shape[0], len(self.classes)):
            raise ValueError("estimates shape must be (n_queries, n_classes)")

    @classmethod
    def from_offline(cls, head_X, head_y, queries, params, *, classes=None,
                     kernel="epanechnikov"):
        """Initialize estimates with the batch kernel posterior on a head sample."""
        head_X, head_y = check_X_y(head_X, head_y)
        queries = check_array(queries, name="queries")
        if queries.shape[0] == 0:
            raise ValueError("queries must be nonempty")
        classes = resolve_classes(head_y, classes, require_present=False)
        estimates = np.atleast_2d(
            nw_posterior(head_X, head_y, queries, params, classes=classes, kernel=kernel)
        )
        return cls(queries, estimates, classes, head_X.shape[0])

    def update(self, x, y, schedule):
        """Fold in observation (x, y) as stream element ``count + 1``.

        One gain per query, shared by all classes, which preserves the sum of
        each row whenever it starts at one. The tiny clip only guards against
        last-ulp rounding excursions outside [0, 1].
        """
        x = np.asarray(x, dtype=float)
        if x.shape != (self.queries.shape[1],):
            raise ValueError(f"x has shape {x.shape}, queries have {self.queries.shape[1]} columns")
        n = self.count + 1
        dist = pairwise_distances(self.queries, x[None, :])[:, 0]
        theta = schedule.step_size(n, dist)
        target = (self.classes == y).astype(float)
        self.estimates += theta[:, None] * (target[None, :] - self.estimates)
        np.clip(self.estimates, 0.0, 1.0, out=self.estimates)
        self.count = n
        return self

    def classify(self, index=None):
        """Predicted class for one query, or for all queries when index is None.

        Ties resolve toward the lowest class.
        """
        if index is None:
            return self.classes[np.argmax(self.estimates, axis=1)]
        if not 0 <= index < self.queries.shape[0]:
            raise IndexError(f"query index {index} out of range")
        return self.classes[int(np.argmax(self.estimates[index]))]

    def to_dict(self):
        """Checkpoint of the full state, JSON-serializable and versioned."""
        return {
            "version": _STATE_VERSION,
            "count": self.count,
            "classes": self.classes.tolist(),
            "queries": self.queries.tolist(),
            "estimates": self.estimates.tolist(),
        }

    @classmethod
    def from_dict(cls, payload):
        version = payload.get("version")
        if version != _STATE_VERSION:
            raise ValueError(f"unsupported state version {version!r}")
        return cls(
            np.asarray(payload["queries"], dtype=float),
            np.asarray(payload["estimates"], dtype=float),
            np.asarray(payload["classes"]),
            payload["count"],
        )

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


class TuneResult(NamedTuple):
    c_gamma: float
    candidates: np.ndarray
    head_msr: np.ndarray


def tune_c_gamma(head_X, head_y, candidates, *, kernel="epanechnikov",
                 classes=None, head_params=None, init_fraction=0.25):
    """Pick the recursion constant by progressive validation on a head sample.

    The head is split into an init segment (first ``init_fraction`` of rows,
    at least 3) and a validation stream. Every validation row is a tracked
    query, initialized from the batch kernel posterior on the init segment;
    then for each candidate the stream is replayed in order: row i is
    classified with the state after row i-1 and the state is updated
    afterwards. The candidate with the smallest misclassified fraction wins,
    ties toward the smallest value.

    ``head_params`` supplies per-class bandwidths for the initialization; when
    None they are cross-validated on the init segment.
    """
    head_X, head_y = check_X_y(head_X, head_y)
    classes = resolve_classes(head_y, classes, require_present=False)
    if len(np.unique(head_y)) < 2:
        raise ValueError("head sample must contain at least two classes")
    candidates = np.asarray(list(candidates), dtype=float)
    if candidates.size == 0:
        raise ValueError("candidate grid must be nonempty")
    if np.any(candidates <= 0):
        raise ValueError("candidates must be positive")

    n_head = head_X.shape[0]
    n_init = max(3, int(round(init_fraction * n_head)))
    if n_init >= n_head:
        raise ValueError(f"head of {n_head} rows leaves no validation stream after init")

    init_X, init_y = head_X[:n_init], head_y[:n_init]
    if head_params is None:
        head_params = cross_validate_bandwidths(init_X, init_y, classes=classes,
                                                kernel=kernel)
    stream_X, stream_y = head_X[n_init:], head_y[n_init:]
    init_est = np.atleast_2d(
        nw_posterior(init_X, init_y, stream_X, head_params, classes=classes, kernel=kernel)
    )

    # The gain is linear in the candidate before clamping, so precompute the
    # candidate-free factor once per (step, query) pair.
    schedule = StepSchedule(1.0, head_X.shape[1], kernel)
    steps = stream_X.shape[0]
    D = pairwise_distances(stream_X, stream_X)
    base = np.empty((steps, steps))
    for t in range(steps):
        base[t] = schedule.step_size(n_init + t + 1, D[t])

    onehot = (stream_y[:, None] == classes[None, :]).astype(float)
    est = np.broadcast_to(init_est, (candidates.size,) + init_est.shape).copy()
    errors = np.zeros(candidates.size, dtype=np.int64)
    for t in range(steps):
        pred = np.argmax(est[:, t, :], axis=1)
        errors += classes[pred] != stream_y[t]
        theta = np.clip(candidates[:, None] * base[t][None, :], 0.0, 1.0)
        est += theta[:, :, None] * (onehot[t][None, None, :] - est)
        np.clip(est, 0.0, 1.0, out=est)

    head_msr = errors / float(steps)
    best = min(zip(head_msr, candidates))[1]
    return TuneResult(float(best), candidates, head_msr)


class OnlineKernelClassifier(BaseEstimator, ClassifierMixin):
    """Streaming kernel classifier: head initialization plus per-row recursion.

    fit() stores the training sample in stream order, cross-validates head
    bandwidths on the first ``n_init`` rows, and (when ``c_gamma`` is None)
    tunes the recursion constant on that head. predict() seeds estimates at
    the queries with the head posterior, replays rows n_init+1..n through the
    recursion, and returns the per-query argmax.

    Parameters
    ----------
    c_gamma : float or None
        Recursion constant; tuned on the head when None.
    c_gamma_grid : sequence or None
        Tuning candidates; defaults to 60 log-spaced values in [0.5, 120].
    n_init : int
        Head size used for initialization and tuning.
    kernel : str
    c_grid, nu_grid : sequences or None
        Bandwidth grids for the head cross-validation.
    init_fraction : float
        Share of the head reserved as the tuning init segment.
    classes : sequence or None
        Explicit class catalog.
    """

    def __init__(self, c_gamma=None, c_gamma_grid=None, n_init=300,
                 kernel="epanechnikov", c_grid=None, nu_grid=None,
                 init_fraction=0.25, classes=None):
        self.c_gamma = c_gamma
        self.c_gamma_grid = c_gamma_grid
        self.n_init = n_init
        self.kernel = kernel
        self.c_grid = c_grid
        self.nu_grid = nu_grid
        self.init_fraction = init_fraction
        self.classes = classes

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        n = X.shape[0]
        if not 3 <= self.n_init < n:
            raise ValueError(f"n_init must lie in [3, {n - 1}], got {self.n_init}")
        classes = resolve_classes(y, self.classes)

        head_X, head_y = X[: self.n_init], y[: self.n_init]
        head_params = cross_validate_bandwidths(
            head_X, head_y, classes=classes, c_grid=self.c_grid,
            nu_grid=self.nu_grid, kernel=self.kernel,
        )

        if self.c_gamma is None:
            candidates = (default_c_gamma_grid() if self.c_gamma_grid is None
                          else self.c_gamma_grid)
            tuning = tune_c_gamma(
                head_X, head_y, candidates, kernel=self.kernel, classes=classes,
                head_params=head_params, init_fraction=self.init_fraction,
            )
            self.c_gamma_ = tuning.c_gamma
            self.tuning_ = tuning
        else:
            self.c_gamma_ = float(self.c_gamma)
            self.tuning_ = None

        self.classes_ = classes
        self.head_params_ = head_params
        self.X_, self.y_ = X, y
        self.schedule_ = StepSchedule(self.c_gamma_, X.shape[1], self.kernel)
        return self

    def track(self, X):
        """Tracker seeded at the given queries after replaying the full stream."""
        check_is_fitted(self, "schedule_")
        tracker = PosteriorTracker.from_offline(
            self.X_[: self.n_init], self.y_[: self.n_init], X, self.head_params_,
            classes=self.classes_, kernel=self.kernel,
        )
        for i in range(self.n_init, self.X_.shape[0]):
            tracker.update(self.X_[i], self.y_[i], self.schedule_)
        return tracker

    def posterior(self, X):
        """Final per-query estimates, shape (m, G), columns follow ``classes_``."""
        return self.track(X).estimates

    def predict(self, X):
        return self.track(X).classify()
