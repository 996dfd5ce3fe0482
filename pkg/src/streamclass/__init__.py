"""Streaming nonparametric classification toolkit.

Batch and incremental principal component reduction, a kernel posterior
classifier with cross-validated adaptive bandwidths, its streaming
counterpart driven by a stochastic-approximation recursion, reference
discriminant/neighbor classifiers, and a replicated benchmark harness.
"""

__version__ = "0.1.0"

from .baselines import KNNClassifier, LDAClassifier, QDAClassifier, default_k_grid
from .data import (
    CTG_SCHEMA,
    CsvSchema,
    DataError,
    Dataset,
    SplitSpec,
    Standardizer,
    load_csv,
    standardize,
    stratified_split,
    substream,
)
from .evaluation import (
    BenchmarkConfig,
    ClassMetrics,
    MethodOutcome,
    ReplicationReport,
    RocCurve,
    accuracy,
    class_metrics,
    confusion_matrix,
    msr,
    replicate,
    roc_curve,
    summarize,
    weighted_f1,
)
from .kernel import (
    BandwidthParams,
    DegenerateGeometryError,
    OfflineKernelClassifier,
    adaptive_bandwidth,
    cross_validate_bandwidths,
    default_c_grid,
    default_nu_grid,
    epanechnikov,
    get_kernel,
    loo_cv_select,
    nw_posterior,
)
from .linalg import EigenDecomposition, covariance, sym_eigen
from .online import (
    OnlineKernelClassifier,
    PosteriorTracker,
    StepSchedule,
    TuneResult,
    default_c_gamma_grid,
    tune_c_gamma,
)
from .pca import BatchPCA, explained_variance
from .streaming_pca import CovarianceTracker, StreamingPCA, update_mean

__all__ = [
    "BandwidthParams",
    "BatchPCA",
    "BenchmarkConfig",
    "ClassMetrics",
    "CovarianceTracker",
    "CsvSchema",
    "CTG_SCHEMA",
    "DataError",
    "Dataset",
    "DegenerateGeometryError",
    "EigenDecomposition",
    "KNNClassifier",
    "LDAClassifier",
    "MethodOutcome",
    "OfflineKernelClassifier",
    "OnlineKernelClassifier",
    "PosteriorTracker",
    "QDAClassifier",
    "ReplicationReport",
    "RocCurve",
    "SplitSpec",
    "Standardizer",
    "StepSchedule",
    "StreamingPCA",
    "TuneResult",
    "accuracy",
    "adaptive_bandwidth",
    "class_metrics",
    "confusion_matrix",
    "covariance",
    "cross_validate_bandwidths",
    "default_c_gamma_grid",
    "default_c_grid",
    "default_k_grid",
    "default_nu_grid",
    "epanechnikov",
    "explained_variance",
    "get_kernel",
    "load_csv",
    "loo_cv_select",
    "msr",
    "nw_posterior",
    "replicate",
    "roc_curve",
    "standardize",
    "stratified_split",
    "substream",
    "summarize",
    "sym_eigen",
    "tune_c_gamma",
    "update_mean",
    "weighted_f1",
]
