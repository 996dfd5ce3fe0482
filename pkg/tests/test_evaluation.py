import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import mann_whitney
from streamclass.evaluation import (
    BenchmarkConfig,
    accuracy,
    class_metrics,
    confusion_matrix,
    msr,
    replicate,
    roc_curve,
    summarize,
    weighted_f1,
)




class TestMsr:
    def test_all_correct(self):
        assert msr([1, 2, 3], [1, 2, 3]) == 0.0

    def test_all_wrong(self):
        assert msr([1, 2, 3], [2, 3, 1]) == 1.0

    def test_direct_count(self):
        rng = np.random.default_rng(0)
        y = rng.integers(1, 4, size=638)
        pred = y.copy()
        flip = rng.choice(638, size=76, replace=False)
        pred[flip] = (y[flip] % 3) + 1
        value = msr(y, pred)
        assert value == pytest.approx(76 / 638, abs=1e-15)

    @given(st.lists(st.tuples(st.integers(1, 3), st.integers(1, 3)),
                    min_size=1, max_size=40),
           st.randoms())
    @settings(max_examples=50, deadline=None)
    def test_permutation_equivariance(self, pairs, shuffler):
        y, pred = zip(*pairs)
        base = msr(list(y), list(pred))
        order = list(range(len(pairs)))
        shuffler.shuffle(order)
        shuffled = [pairs[i] for i in order]
        y2, pred2 = zip(*shuffled)
        assert msr(list(y2), list(pred2)) == base

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            msr([1, 2], [1])


class TestConfusion:
    def test_row_sums_are_class_supports(self):
        rng = np.random.default_rng(1)
        y = rng.integers(1, 4, size=100)
        pred = rng.integers(1, 4, size=100)
        cm = confusion_matrix(y, pred, [1, 2, 3])
        for g in (1, 2, 3):
            assert cm[g - 1].sum() == np.sum(y == g)
        assert accuracy(cm) == pytest.approx(1.0 - msr(y, pred), abs=1e-15)
        assert cm.sum() == 100

    def test_perfect_diagonal(self):
        cm = confusion_matrix([1, 2, 3, 3], [1, 2, 3, 3], [1, 2, 3])
        for g in range(3):
            metrics = class_metrics(cm, g)
            assert metrics.recall == 1.0
            assert metrics.specificity == 1.0
            assert metrics.balanced_accuracy == 1.0
            assert metrics.precision == 1.0
            assert metrics.f1 == 1.0
        assert weighted_f1(cm) == 1.0


class TestClassMetrics:
    def test_hand_counts(self):
        # TP=3, FN=1, FP=1, TN=5 for class 1.
        cm = np.array([[3, 1], [1, 5]])
        metrics = class_metrics(cm, 0)
        assert metrics.recall == pytest.approx(0.75)
        assert metrics.specificity == pytest.approx(5.0 / 6.0)
        assert metrics.balanced_accuracy == pytest.approx(0.7917, abs=5e-5)
        assert metrics.precision == pytest.approx(0.75)
        assert metrics.f1 == pytest.approx(0.75)

    def test_balanced_is_exact_mean(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            cm = rng.integers(0, 30, size=(3, 3))
            cm[np.diag_indices(3)] += 1  # keep every class present
            for g in range(3):
                m = class_metrics(cm, g)
                assert m.balanced_accuracy == (m.recall + m.specificity) / 2.0

    def test_balanced_mean_arithmetic(self):
        assert (0.9570 + 0.6500) / 2.0 == pytest.approx(0.8035, abs=1e-12)

    def test_absent_class_reports_none_not_zero(self):
        cm = np.array([[5, 0, 0], [0, 4, 0], [0, 0, 0]])
        metrics = class_metrics(cm, 2)
        assert metrics.recall is None
        assert metrics.balanced_accuracy is None
        assert metrics.precision is None
        assert metrics.f1 is None

    def test_never_predicted_class_has_zero_f1(self):
        cm = np.array([[0, 3], [0, 5]])
        metrics = class_metrics(cm, 0)
        assert metrics.recall == 0.0
        assert metrics.precision is None
        assert metrics.f1 == 0.0


class TestRoc:
    def test_perfect_separation(self):
        curve = roc_curve(np.array([0.9, 0.8, 0.2, 0.1]),
                          np.array([1, 1, 2, 2]), 1)
        assert curve.auc == pytest.approx(1.0, abs=1e-15)

    def test_constant_scores(self):
        curve = roc_curve(np.full(10, 0.5),
                          np.array([1, 2] * 5), 1)
        assert curve.auc == pytest.approx(0.5, abs=1e-15)

    def test_three_point_example(self):
        curve = roc_curve(np.array([0.9, 0.8, 0.4]), np.array([1, 2, 1]), 1)
        assert curve.auc == pytest.approx(0.5, abs=1e-15)

    def test_endpoints_and_monotonicity(self):
        rng = np.random.default_rng(3)
        scores = rng.uniform(size=50).round(1)  # coarse grid forces ties
        y = rng.integers(1, 3, size=50)
        y[:2] = [1, 2]
        curve = roc_curve(scores, y, 1)
        assert curve.fpr[0] == 0.0 and curve.tpr[0] == 0.0
        assert curve.fpr[-1] == 1.0 and curve.tpr[-1] == 1.0
        assert np.all(np.diff(curve.fpr) >= 0)
        assert np.all(np.diff(curve.tpr) >= 0)
        assert np.all(np.diff(curve.thresholds) < 0)

    @given(st.integers(0, 2**31 - 1))
    @settings(max_examples=60, deadline=None)
    def test_auc_equals_mann_whitney(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(4, 25))
        scores = rng.choice([0.1, 0.3, 0.5, 0.7, 0.9], size=n)
        y = rng.integers(1, 3, size=n)
        y[:2] = [1, 2]  # both labels present
        curve = roc_curve(scores, y, 1)
        assert abs(curve.auc - mann_whitney(scores, y, 1)) <= 1e-12

    def test_single_class_rejected(self):
        with pytest.raises(ValueError, match="positive and negative"):
            roc_curve(np.array([0.1, 0.2]), np.array([1, 1]), 1)


class TestSummarize:
    def test_linear_interpolation_quartiles(self):
        out = summarize([1.0, 2.0, 3.0, 4.0])
        assert out["first_quartile"] == pytest.approx(1.75)
        assert out["median"] == pytest.approx(2.5)
        assert out["third_quartile"] == pytest.approx(3.25)
        assert out["mean"] == pytest.approx(2.5)


class TestReplicate:
    def config(self, **kw):
        base = dict(methods=("lda", "knn"), n_components=3, n_init=20,
                    train_fraction=0.6, n_replications=1, seed=5,
                    k_grid=(1, 3), c_grid=(2.0, 6.0), nu_grid=(0.2, 0.5),
                    c_gamma_grid=(1.0, 30.0))
        base.update(kw)
        return BenchmarkConfig(**base)

    def test_single_replication_summary_is_value(self, small_blobs):
        report = replicate(small_blobs, self.config())
        for outcome in report.methods.values():
            values = outcome.msr_list()
            assert len(values) == 1
            assert outcome.summary()["median"] == values[0]
            assert 0.0 <= values[0] <= 1.0

    def test_same_seed_identical_reports(self, small_blobs):
        cfg = self.config(n_replications=3)
        a = replicate(small_blobs, cfg)
        b = replicate(small_blobs, cfg)
        for method in cfg.methods:
            assert a.methods[method].msr_values == b.methods[method].msr_values
            pred_a = a.first_replication["methods"][method]["y_pred"]
            pred_b = b.first_replication["methods"][method]["y_pred"]
            assert np.array_equal(pred_a, pred_b)

    def test_all_methods_run(self, small_blobs):
        cfg = self.config(methods=("lda", "qda", "knn", "offline", "online"))
        report = replicate(small_blobs, cfg)
        for method, outcome in report.methods.items():
            assert outcome.errors == {}, (method, outcome.errors)
            assert len(outcome.msr_values) == 1
            # Well-separated blobs: every method must do far better than chance.
            assert outcome.msr_values[1] <= 0.2

    def test_method_failure_is_recorded_not_fatal(self, small_blobs):
        # A train split with a single member of class 3 breaks the Gaussian
        # fits but not the neighbor vote.
        counts = (20, 20, 1)
        cfg = self.config(methods=("qda", "knn"), train_counts=counts,
                          train_fraction=None, k_grid=(1,))
        report = replicate(small_blobs, cfg)
        assert 1 in report.methods["qda"].errors
        assert report.methods["knn"].msr_values
        assert 1 not in report.methods["knn"].errors

    def test_parallel_matches_serial(self, small_blobs):
        serial = replicate(small_blobs, self.config(n_replications=4, workers=1))
        threaded = replicate(small_blobs, self.config(n_replications=4, workers=3))
        for method in ("lda", "knn"):
            assert serial.methods[method].msr_values == threaded.methods[method].msr_values

    def test_streaming_projection_mode(self, small_blobs):
        cfg = self.config(methods=("online", "knn"), streaming_projection=True)
        report = replicate(small_blobs, cfg)
        for outcome in report.methods.values():
            assert outcome.errors == {}
            assert outcome.msr_values[1] <= 0.25

    def test_offline_kfold_mode(self, small_blobs):
        cfg = self.config(methods=("offline",), offline_cv="kfold")
        report = replicate(small_blobs, cfg)
        assert report.methods["offline"].errors == {}
        assert report.methods["offline"].msr_values[1] <= 0.2

    def test_manifest_covers_all_replications(self, small_blobs):
        cfg = self.config(n_replications=2)
        report = replicate(small_blobs, cfg)
        assert sorted(report.test_manifest) == [1, 2]
        rows, labels = report.test_manifest[1]
        assert len(rows) == len(labels)
        assert len(rows) == report.first_replication["y_true"].shape[0]

    def test_config_validation(self):
        with pytest.raises(ValueError, match="methods"):
            BenchmarkConfig(methods=(), train_fraction=0.5).validate()
        with pytest.raises(ValueError, match="unknown"):
            BenchmarkConfig(methods=("forest",), train_fraction=0.5).validate()
        with pytest.raises(ValueError, match="exactly one"):
            BenchmarkConfig(methods=("lda",)).validate()
