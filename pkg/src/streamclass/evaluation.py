"""Classification metrics and the replicated benchmark harness.

Metrics operate on integer class labels. The harness repeats the full
pipeline (stratified split, standardization, dimension reduction, per-method
tuning/fit/predict, scoring) M times with independent sub-seeded generators
and collects the misclassified-fraction distribution per method.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from time import perf_counter

import numpy as np

from .baselines import KNNClassifier, LDAClassifier, QDAClassifier
from .data import SplitSpec, standardize, stratified_split, substream
from .kernel import OfflineKernelClassifier
from .online import OnlineKernelClassifier
from .pca import BatchPCA
from .streaming_pca import StreamingPCA

KNOWN_METHODS = ("lda", "qda", "knn", "offline", "online")


def msr(y_true, y_pred):
    """Misclassified fraction."""
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise ValueError("y_true and y_pred must be 1-d arrays of equal length")
    if y_true.size == 0:
        raise ValueError("need at least one prediction")
    return float(np.mean(y_true != y_pred))


def confusion_matrix(y_true, y_pred, classes):
    """Counts indexed [true, predicted] in the order of ``classes``."""
    classes = np.asarray(classes)
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise ValueError("y_true and y_pred must have equal length")
    G = len(classes)
    index = {label: i for i, label in enumerate(classes.tolist())}
    cm = np.zeros((G, G), dtype=np.int64)
    for t, p in zip(y_true.tolist(), y_pred.tolist()):
        cm[index[t], index[p]] += 1
    return cm


@dataclass
class ClassMetrics:
    """One-vs-rest metrics for a single class; None marks an undefined value."""

    recall: float | None
    specificity: float | None
    balanced_accuracy: float | None
    precision: float | None
    f1: float | None


def class_metrics(cm, index):
    """Metrics of class ``index`` (position in the confusion matrix)."""
    cm = np.asarray(cm)
    total = cm.sum()
    tp = cm[index, index]
    fn = cm[index].sum() - tp
    fp = cm[:, index].sum() - tp
    tn = total - tp - fn - fp

    recall = tp / (tp + fn) if tp + fn > 0 else None
    specificity = tn / (tn + fp) if tn + fp > 0 else None
    balanced = (
        (recall + specificity) / 2.0
        if recall is not None and specificity is not None
        else None
    )
    precision = tp / (tp + fp) if tp + fp > 0 else None
    # Direct form 2TP / (2TP + FP + FN): defined whenever the class occurs
    # in the truth or the predictions at all.
    f1 = 2.0 * tp / (2.0 * tp + fp + fn) if 2 * tp + fp + fn > 0 else None
    return ClassMetrics(
        recall=_maybe_float(recall),
        specificity=_maybe_float(specificity),
        balanced_accuracy=_maybe_float(balanced),
        precision=_maybe_float(precision),
        f1=_maybe_float(f1),
    )


def _maybe_float(x):
    return None if x is None else float(x)


def accuracy(cm):
    cm = np.asarray(cm)
    return float(np.trace(cm) / cm.sum())


def weighted_f1(cm):
    """Support-weighted mean of the per-class F1 scores."""
    cm = np.asarray(cm)
    supports = cm.sum(axis=1)
    total, acc = 0, 0.0
    for g in range(cm.shape[0]):
        if supports[g] == 0:
            continue
        f1 = class_metrics(cm, g).f1
        acc += supports[g] * f1
        total += supports[g]
    if total == 0:
        raise ValueError("confusion matrix has no observations")
    return acc / total


@dataclass
class RocCurve:
    """One-vs-rest operating points swept over all distinct score thresholds."""

    thresholds: np.ndarray  # descending; leading +inf gives the (0, 0) point
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float


def roc_curve(scores, y_true, positive_class):
    """ROC points and trapezoidal AUC for one class against the rest.

    With ties in ``scores`` the curve cuts diagonally across the tied block,
    which makes the trapezoidal area equal the tie-corrected rank statistic
    P(score_pos > score_neg) + 0.5 P(score_pos = score_neg).
    """
    scores = np.asarray(scores, dtype=float)
    y_true = np.asarray(y_true)
    if scores.shape != y_true.shape or scores.ndim != 1:
        raise ValueError("scores and y_true must be 1-d arrays of equal length")
    pos = y_true == positive_class
    n_pos = int(pos.sum())
    n_neg = int(len(pos) - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise ValueError("roc_curve needs both positive and negative examples")

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    tp = np.cumsum(pos[order])
    fp = np.cumsum(~pos[order])
    # Keep one operating point per distinct score: the last index of each block.
    last = np.flatnonzero(np.diff(sorted_scores, append=-np.inf) != 0)
    thresholds = np.concatenate([[np.inf], sorted_scores[last]])
    tpr = np.concatenate([[0.0], tp[last] / n_pos])
    fpr = np.concatenate([[0.0], fp[last] / n_neg])
    auc = float(np.trapezoid(tpr, fpr))
    return RocCurve(thresholds, fpr, tpr, auc)


@dataclass
class BenchmarkConfig:
    """Everything one replicated benchmark run depends on."""

    methods: tuple = KNOWN_METHODS
    n_components: int = 5
    n_init: int = 300
    train_counts: tuple | None = None
    train_fraction: float | None = None
    n_replications: int = 1
    seed: int = 0
    standardize: bool = True
    kernel: str = "epanechnikov"
    c_grid: tuple | None = None
    nu_grid: tuple | None = None
    c_gamma: float | None = None
    c_gamma_grid: tuple | None = None
    k_grid: tuple | None = None
    offline_cv: str = "loo"
    streaming_projection: bool = False
    workers: int = 1

    def validate(self):
        if not self.methods:
            raise ValueError("methods must be nonempty")
        unknown = [m for m in self.methods if m not in KNOWN_METHODS]
        if unknown:
            raise ValueError(f"unknown methods {unknown}; known: {list(KNOWN_METHODS)}")
        if (self.train_counts is None) == (self.train_fraction is None):
            raise ValueError("specify exactly one of train_counts / train_fraction")
        if self.n_replications < 1:
            raise ValueError("n_replications must be at least 1")
        if self.n_components < 1:
            raise ValueError("n_components must be at least 1")
        if self.n_init < 3:
            raise ValueError("n_init must be at least 3")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.c_grid is not None and any(not 0 < c < 10 for c in self.c_grid):
            raise ValueError("c_grid values must lie in (0, 10)")
        if self.nu_grid is not None and any(not 0 < v < 1 for v in self.nu_grid):
            raise ValueError("nu_grid values must lie in (0, 1)")
        if self.c_gamma is not None and self.c_gamma <= 0:
            raise ValueError("c_gamma must be positive")
        if self.c_gamma_grid is not None and any(c <= 0 for c in self.c_gamma_grid):
            raise ValueError("c_gamma_grid values must be positive")
        if self.k_grid is not None and any(k < 1 for k in self.k_grid):
            raise ValueError("k_grid values must be at least 1")
        if self.offline_cv not in ("loo", "kfold"):
            raise ValueError("offline_cv must be 'loo' or 'kfold'")
        return self

    def split_spec(self):
        return SplitSpec(
            train_fraction=self.train_fraction, train_counts=self.train_counts
        )


@dataclass
class MethodOutcome:
    """Per-method results accumulated across replications."""

    msr_values: dict = field(default_factory=dict)   # replication -> float
    seconds: dict = field(default_factory=dict)      # replication -> float
    errors: dict = field(default_factory=dict)       # replication -> message
    info: dict = field(default_factory=dict)         # replication -> tuning extras

    def msr_list(self):
        return [self.msr_values[k] for k in sorted(self.msr_values)]

    def summary(self):
        values = self.msr_list()
        if not values:
            return None
        return summarize(values)


def summarize(values):
    """Quartile/median/mean summary (linearly interpolated percentiles)."""
    arr = np.asarray(values, dtype=float)
    return {
        "first_quartile": float(np.percentile(arr, 25)),
        "median": float(np.percentile(arr, 50)),
        "mean": float(arr.mean()),
        "third_quartile": float(np.percentile(arr, 75)),
    }


@dataclass
class ReplicationReport:
    """Output of :func:`replicate`.

    ``first_replication`` keeps the raw predictions and per-class scores of
    replication 1 for the per-class tables and ROC curves; later replications
    only contribute their misclassified fraction.
    """

    config: BenchmarkConfig
    class_names: list
    methods: dict
    first_replication: dict | None
    test_manifest: dict  # replication -> (row indices, true labels)


def replicate(data, config):
    """Run the replicated benchmark on ``data``.

    Replication k derives its generator from ``(seed, k)``, draws a
    stratified split, standardizes (train-fitted), reduces dimension, then
    tunes/fits/scores every requested method. Replication 1 always runs on a
    dedicated serial lane so its wall-clock timings are uncontended; the
    remaining replications fan out over ``config.workers`` threads. A method
    failure inside one replication is recorded and skipped, never fatal to
    the other methods or replications.
    """
    config.validate()
    outcomes = {m: MethodOutcome() for m in config.methods}
    manifest = {}

    first = _run_replication(data, config, 1, keep_details=True)
    _absorb(outcomes, manifest, first)
    first_details = first["details"]

    remaining = range(2, config.n_replications + 1)
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = pool.map(
                lambda k: _run_replication(data, config, k, keep_details=False),
                remaining,
            )
            for result in results:
                _absorb(outcomes, manifest, result)
    else:
        for k in remaining:
            _absorb(outcomes, manifest, _run_replication(data, config, k, keep_details=False))

    return ReplicationReport(
        config=config,
        class_names=list(data.class_names),
        methods=outcomes,
        first_replication=first_details,
        test_manifest=manifest,
    )


def _absorb(outcomes, manifest, result):
    k = result["replication"]
    manifest[k] = (result["test_rows"], result["y_true"])
    for method, payload in result["methods"].items():
        out = outcomes[method]
        if "error" in payload:
            out.errors[k] = payload["error"]
            continue
        out.msr_values[k] = payload["msr"]
        out.seconds[k] = payload["seconds"]
        if payload.get("info"):
            out.info[k] = payload["info"]


def _run_replication(data, config, rep_index, *, keep_details):
    rng = substream(config.seed, rep_index)
    train, test, _, test_rows = stratified_split(
        data, config.split_spec(), rng, return_indices=True
    )
    if config.standardize:
        train, scaler = standardize(train)
        test = scaler.transform_dataset(test)

    classes = np.arange(1, data.n_classes + 1)
    features = _reduced_features(train, test, config)
    fold_seed = int(rng.integers(2**31 - 1))

    result = {
        "replication": rep_index,
        "test_rows": np.asarray(test_rows),
        "y_true": test.labels,
        "methods": {},
    }
    details = {"y_true": test.labels, "methods": {}} if keep_details else None

    for method in config.methods:
        start = perf_counter()
        try:
            y_pred, scores, info = _run_method(
                method, features, train.labels, classes, config, fold_seed
            )
        except Exception as exc:  # recorded, not fatal to other methods
            result["methods"][method] = {"error": f"{type(exc).__name__}: {exc}"}
            continue
        seconds = perf_counter() - start
        result["methods"][method] = {
            "msr": msr(test.labels, y_pred),
            "seconds": seconds,
            "info": info,
        }
        if keep_details:
            details["methods"][method] = {"y_pred": y_pred, "scores": scores}
    if keep_details:
        result["details"] = details
    return result


def _reduced_features(train, test, config):
    """Reduced train/test coordinates for both reduction routes.

    The batch eigenbasis feeds the offline classifier; the streaming basis
    (final pass, or per-row when streaming_projection is set) feeds the
    online classifier and the reference methods.
    """
    out = {}
    q = config.n_components
    if "offline" in config.methods:
        batch = BatchPCA(n_components=q).fit(train.features)
        out["batch"] = (batch.transform(train.features), batch.transform(test.features))
    stream_users = {"online", "lda", "qda", "knn"}
    if stream_users & set(config.methods):
        ipca = StreamingPCA(n_components=q, n_init=min(config.n_init, train.n_samples))
        if config.streaming_projection:
            Ztr = ipca.fit_transform_online(train.features)
        else:
            ipca.fit(train.features)
            Ztr = ipca.transform(train.features)
        out["stream"] = (Ztr, ipca.transform(test.features))
    return out


def _run_method(method, features, y_train, classes, config, fold_seed):
    if method == "offline":
        Ztr, Zte = features["batch"]
        clf = OfflineKernelClassifier(
            kernel=config.kernel, c_grid=config.c_grid, nu_grid=config.nu_grid,
            cv=config.offline_cv, classes=classes, random_state=fold_seed,
        ).fit(Ztr, y_train)
        scores = clf.posterior(Zte)
        y_pred = clf.classes_[np.argmax(scores, axis=1)]
        info = {"bandwidths": [(p.c, p.nu) for p in clf.bandwidths_]}
        return y_pred, scores, info

    Ztr, Zte = features["stream"]
    if method == "online":
        clf = OnlineKernelClassifier(
            c_gamma=config.c_gamma, c_gamma_grid=config.c_gamma_grid,
            n_init=config.n_init, kernel=config.kernel,
            c_grid=config.c_grid, nu_grid=config.nu_grid, classes=classes,
        ).fit(Ztr, y_train)
        tracker = clf.track(Zte)
        scores = tracker.estimates
        y_pred = tracker.classify()
        info = {"c_gamma": clf.c_gamma_,
                "bandwidths": [(p.c, p.nu) for p in clf.head_params_]}
        return y_pred, scores, info
    if method == "lda":
        clf = LDAClassifier(classes=classes).fit(Ztr, y_train)
        scores = clf.decision_function(Zte)
        return clf.classes_[np.argmax(scores, axis=1)], scores, None
    if method == "qda":
        clf = QDAClassifier(classes=classes).fit(Ztr, y_train)
        scores = clf.decision_function(Zte)
        return clf.classes_[np.argmax(scores, axis=1)], scores, None
    if method == "knn":
        clf = KNNClassifier(
            k_grid=config.k_grid, classes=classes, random_state=fold_seed
        ).fit(Ztr, y_train)
        scores = clf.vote_fractions(Zte)
        return clf.classes_[np.argmax(scores, axis=1)], scores, {"k": clf.k_}
    raise ValueError(f"unknown method {method!r}")
