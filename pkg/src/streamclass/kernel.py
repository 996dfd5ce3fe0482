"""Kernel posterior classifier with per-query adaptive bandwidths.

The class-g posterior at a query x is the kernel-weighted average of the
class-g indicator over the training sample,

    P_g(x) = sum_i 1{y_i = g} K(||x_i - x|| / h_g) / sum_i K(||x_i - x|| / h_g),

with a bandwidth that adapts to the query's neighborhood geometry,

    h_g = c_g * max_i ||x_i - x|| * n**(-nu_g).

The constants (c_g, nu_g) are picked per class by leave-one-out
cross-validation of the squared indicator error over a (c, nu) grid.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ._distances import pairwise_distances
from ._validation import check_array, check_is_fitted, check_X_y, resolve_classes


class DegenerateGeometryError(ValueError):
    """All training points coincide with the query, so no bandwidth exists."""


def epanechnikov(u):
    """Parabolic kernel ``0.75 * (1 - u**2)`` on ``u < 1``, zero beyond.

    Callers pass normalized distances, so only ``u >= 0`` is meaningful.
    Accepts scalars or arrays.
    """
    u = np.asarray(u, dtype=float)
    return np.where(u < 1.0, 0.75 * (1.0 - u * u), 0.0)


KERNELS = {"epanechnikov": epanechnikov}


def get_kernel(name):
    try:
        return KERNELS[name]
    except KeyError:
        raise ValueError(f"unknown kernel {name!r}; available: {sorted(KERNELS)}") from None


def default_c_grid():
    """c candidates 0.5, 1.0, ..., 9.5 inside the open (0, 10) box."""
    return np.arange(1, 20) * 0.5


def default_nu_grid():
    """nu candidates 0.05, 0.10, ..., 0.95 inside the open (0, 1) box."""
    return np.arange(1, 20) * 0.05


@dataclass(frozen=True)
class BandwidthParams:
    """Adaptive-bandwidth constants, constrained to 0 < c < 10 and 0 < nu < 1."""

    c: float
    nu: float

    def __post_init__(self):
        if not 0.0 < self.c < 10.0:
            raise ValueError(f"c must lie in (0, 10), got {self.c}")
        if not 0.0 < self.nu < 1.0:
            raise ValueError(f"nu must lie in (0, 1), got {self.nu}")


def adaptive_bandwidth(params, train_features, x_query):
    """Query-local bandwidth ``c * max_i ||x_i - x|| * n**(-nu)``."""
    train = check_array(train_features, name="train_features")
    x = np.asarray(x_query, dtype=float)
    dist = pairwise_distances(train, x[None, :])[:, 0]
    max_dist = dist.max()
    if max_dist <= 0.0:
        raise DegenerateGeometryError(
            "all training points coincide with the query; bandwidth undefined"
        )
    return params.c * max_dist * train.shape[0] ** (-params.nu)


def nw_posterior(train_X, train_y, x, params, *, classes=None, kernel="epanechnikov"):
    """Per-class kernel posterior estimates at one or several queries.

    Parameters
    ----------
    train_X, train_y : training sample of shape (n, q) and (n,).
    x : query vector (q,) or query matrix (m, q).
    params : BandwidthParams or sequence of per-class BandwidthParams.
    classes : explicit class catalog; inferred from train_y when None.

    Returns
    -------
    ndarray of shape (G,) or (m, G); entry g estimates P(Y = class g | x).
    Each entry lies in [0, 1]. When a class's weights all vanish at a query
    the training frequency of that class is used instead.
    """
    train_X, train_y = check_X_y(train_X, train_y)
    classes = resolve_classes(train_y, classes, require_present=False)
    kernel_fn = get_kernel(kernel)
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    queries = np.atleast_2d(x)
    if queries.shape[1] != train_X.shape[1]:
        raise ValueError(f"query dimension {queries.shape[1]} != {train_X.shape[1]}")

    per_class = _params_per_class(params, len(classes))
    n = train_X.shape[0]
    D = pairwise_distances(train_X, queries)  # n x m
    max_dist = D.max(axis=0)
    if np.any(max_dist <= 0.0):
        raise DegenerateGeometryError(
            "all training points coincide with a query; bandwidth undefined"
        )
    onehot = train_y[:, None] == classes[None, :]  # n x G
    priors = onehot.mean(axis=0)

    out = np.empty((queries.shape[0], len(classes)))
    for g, p in enumerate(per_class):
        h = p.c * max_dist * n ** (-p.nu)
        W = kernel_fn(D / h[None, :])
        denom = W.sum(axis=0)
        numer = onehot[:, g] @ W
        ok = denom > 0
        out[:, g] = np.where(ok, numer / np.where(ok, denom, 1.0), priors[g])
    # numer and denom are summed by different algorithms, so a unanimous
    # neighborhood can land an ulp above 1; the true ratio is always in [0, 1].
    np.clip(out, 0.0, 1.0, out=out)
    return out[0] if single else out


def _params_per_class(params, n_classes):
    if isinstance(params, BandwidthParams):
        return [params] * n_classes
    params = list(params)
    if len(params) != n_classes:
        raise ValueError(f"need {n_classes} per-class params, got {len(params)}")
    return params


def loo_cv_select(train_X, train_y, target_class, grid, *, kernel="epanechnikov"):
    """Leave-one-out bandwidth selection for one class.

    For each (c, nu) candidate, every pair j is withheld in turn and the
    class indicator at x_j is predicted from the other n-1 pairs; the score
    is the mean squared indicator error. Returns the first grid entry
    attaining the minimum.
    """
    train_X, train_y = check_X_y(train_X, train_y)
    grid = [g if isinstance(g, BandwidthParams) else BandwidthParams(*g) for g in grid]
    if not grid:
        raise ValueError("grid must be nonempty")
    if train_X.shape[0] < 3:
        raise ValueError("leave-one-out selection needs at least 3 rows")
    kernel_fn = get_kernel(kernel)
    indicator = (train_y == target_class).astype(float)
    D = pairwise_distances(train_X, train_X)
    scores = [
        _loo_score(D, indicator, p.c, p.nu, kernel_fn) for p in grid
    ]
    return grid[int(np.argmin(scores))]


def cross_validate_bandwidths(X, y, *, classes=None, c_grid=None, nu_grid=None,
                              kernel="epanechnikov", cv="loo", n_folds=10,
                              random_state=0):
    """Per-class (c, nu) selection over the cartesian grid in one shared pass.

    Equivalent to calling :func:`loo_cv_select` per class with the grid in
    (c outer, nu inner) order, but the kernel weight matrices are computed
    once for all classes.
    """
    params, _ = _cross_validate_grid(
        X, y, classes=classes, c_grid=c_grid, nu_grid=nu_grid, kernel=kernel,
        cv=cv, n_folds=n_folds, random_state=random_state,
    )
    return params


def _cross_validate_grid(X, y, *, classes, c_grid, nu_grid, kernel, cv,
                         n_folds, random_state):
    X, y = check_X_y(X, y)
    if X.shape[0] < 3:
        raise ValueError("bandwidth cross-validation needs at least 3 rows")
    if cv not in ("loo", "kfold"):
        raise ValueError(f"cv must be 'loo' or 'kfold', got {cv!r}")
    classes = resolve_classes(y, classes, require_present=False)
    kernel_fn = get_kernel(kernel)
    cs = np.asarray(default_c_grid() if c_grid is None else c_grid, float)
    nus = np.asarray(default_nu_grid() if nu_grid is None else nu_grid, float)
    if cs.size == 0 or nus.size == 0:
        raise ValueError("bandwidth grids must be nonempty")

    onehot = (y[:, None] == classes[None, :]).astype(float).T  # G x n
    D = pairwise_distances(X, X)
    if cv == "loo":
        surface = _cv_surface_loo(D, onehot, cs, nus, kernel_fn)
    else:
        surface = _cv_surface_kfold(D, onehot, cs, nus, kernel_fn,
                                    n_folds, random_state)

    params = []
    for g in range(len(classes)):
        # Ravel order (c outer, nu inner) defines the tie-break: the first
        # entry of the cartesian grid wins.
        flat = int(np.argmin(surface[g].ravel()))
        ci, vi = divmod(flat, len(nus))
        params.append(BandwidthParams(float(cs[ci]), float(nus[vi])))
    return params, surface


def _loo_score(D, indicator, c, nu, kernel_fn):
    """Mean squared leave-one-out indicator error for one (c, nu)."""
    surface = _cv_surface_loo(D, indicator[None, :], np.array([c]), np.array([nu]),
                              kernel_fn)
    return float(surface[0, 0, 0])


class OfflineKernelClassifier(BaseEstimator, ClassifierMixin):
    """Kernel posterior classifier fitted by per-class bandwidth cross-validation.

    fit() keeps the training sample and selects (c, nu) per class over the
    cartesian grid ``c_grid x nu_grid``; predict() returns the class with the
    largest posterior estimate, ties resolved toward the lowest class.

    Parameters
    ----------
    kernel : str
        Key into the kernel registry.
    c_grid, nu_grid : sequences or None
        Candidate constants; defaults cover (0, 10) x (0, 1) at steps 0.5/0.05.
    cv : {"loo", "kfold"}
        Exact leave-one-out (quadratic in n) or the k-fold approximation.
    n_folds : int
        Folds for ``cv="kfold"``.
    classes : sequence or None
        Explicit class catalog; every entry must occur in the training labels.
    random_state : int
        Seed for the fold assignment when ``cv="kfold"``.
    """

    def __init__(self, kernel="epanechnikov", c_grid=None, nu_grid=None,
                 cv="loo", n_folds=10, classes=None, random_state=0):
        self.kernel = kernel
        self.c_grid = c_grid
        self.nu_grid = nu_grid
        self.cv = cv
        self.n_folds = n_folds
        self.classes = classes
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        classes = resolve_classes(y, self.classes)
        params, surface = _cross_validate_grid(
            X, y, classes=classes, c_grid=self.c_grid, nu_grid=self.nu_grid,
            kernel=self.kernel, cv=self.cv, n_folds=self.n_folds,
            random_state=self.random_state,
        )
        self.classes_ = classes
        self.X_, self.y_ = X, y
        self.priors_ = (y[:, None] == classes[None, :]).mean(axis=0)
        self.bandwidths_ = params
        self.cv_scores_ = surface
        return self

    def posterior(self, X):
        """Per-class posterior estimates, shape (m, G).

        Columns follow ``classes_``. Each value lies in [0, 1]; because every
        class uses its own bandwidth the rows need not sum to one.
        """
        check_is_fitted(self, "bandwidths_")
        return np.atleast_2d(
            nw_posterior(self.X_, self.y_, X, self.bandwidths_,
                         classes=self.classes_, kernel=self.kernel)
        )

    def predict(self, X):
        post = self.posterior(X)
        return self.classes_[np.argmax(post, axis=1)]


def _cv_surface_loo(D, onehot, cs, nus, kernel_fn):
    """Leave-one-out CV scores for every (class, c, nu), shape (G, |cs|, |nus|)."""
    n = D.shape[0]
    G = onehot.shape[0]
    max_dist = D.max(axis=0)
    if np.any(max_dist <= 0.0):
        raise DegenerateGeometryError("duplicate-only neighborhood in training sample")
    R = D / max_dist[None, :]
    counts = onehot.sum(axis=1)
    priors_loo = (counts[:, None] - onehot) / (n - 1.0)  # G x n

    out = np.empty((G, len(cs), len(nus)))
    for vi, nu in enumerate(nus):
        S = R * (n - 1.0) ** nu
        for ci, c in enumerate(cs):
            W = kernel_fn(S / c)
            np.fill_diagonal(W, 0.0)
            denom = W.sum(axis=0)
            numer = onehot @ W
            ok = denom > 0
            est = np.where(ok[None, :], numer / np.where(ok, denom, 1.0), priors_loo)
            out[:, ci, vi] = ((onehot - est) ** 2).mean(axis=1)
    return out


def _cv_surface_kfold(D, onehot, cs, nus, kernel_fn, n_folds, random_state):
    """k-fold approximation of the leave-one-out surface."""
    n = D.shape[0]
    G = onehot.shape[0]
    if not 2 <= n_folds <= n:
        raise ValueError(f"n_folds must lie in [2, {n}], got {n_folds}")
    rng = np.random.default_rng(random_state)
    folds = np.array_split(rng.permutation(n), n_folds)

    sq_err = np.zeros((G, len(cs), len(nus)))
    for fold in folds:
        keep = np.setdiff1d(np.arange(n), fold)
        sub = D[np.ix_(keep, fold)]
        max_dist = sub.max(axis=0)
        if np.any(max_dist <= 0.0):
            raise DegenerateGeometryError("duplicate-only neighborhood in training sample")
        R = sub / max_dist[None, :]
        kept = onehot[:, keep]
        prior = kept.mean(axis=1)
        truth = onehot[:, fold]
        for vi, nu in enumerate(nus):
            S = R * float(len(keep)) ** nu
            for ci, c in enumerate(cs):
                W = kernel_fn(S / c)
                denom = W.sum(axis=0)
                numer = kept @ W
                ok = denom > 0
                est = np.where(ok[None, :], numer / np.where(ok, denom, 1.0),
                               prior[:, None])
                sq_err[:, ci, vi] += ((truth - est) ** 2).sum(axis=1)
    return sq_err / n
