import numpy as np
import pytest

from conftest import ctg_csv_path, requires_ctg
from streamclass.data import (
    CTG_SCHEMA,
    CsvSchema,
    DataError,
    Dataset,
    SplitSpec,
    load_csv,
    standardize,
    stratified_split,
    substream,
)

TOY_SCHEMA = CsvSchema(feature_names=["a", "b"], label_column="y")


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestLoadCsv:
    def test_toy_roundtrip(self, tmp_path):
        path = write(tmp_path, "a,b,y\n1,2,A\n3,4,B\n")
        ds = load_csv(path, TOY_SCHEMA)
        assert np.array_equal(ds.features, [[1.0, 2.0], [3.0, 4.0]])
        assert np.array_equal(ds.labels, [1, 2])
        assert ds.class_names == ["A", "B"]

    def test_header_case_insensitive_and_reordered(self, tmp_path):
        path = write(tmp_path, "Y,B,A\nA,2,1\nB,4,3\n")
        ds = load_csv(path, TOY_SCHEMA)
        assert np.array_equal(ds.features, [[1.0, 2.0], [3.0, 4.0]])

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="not found"):
            load_csv(tmp_path / "nope.csv", TOY_SCHEMA)

    def test_missing_column(self, tmp_path):
        path = write(tmp_path, "a,y\n1,A\n2,B\n")
        with pytest.raises(DataError, match="missing columns.*b"):
            load_csv(path, TOY_SCHEMA)

    def test_extra_column(self, tmp_path):
        path = write(tmp_path, "a,b,c,y\n1,2,3,A\n4,5,6,B\n")
        with pytest.raises(DataError, match="unexpected columns.*c"):
            load_csv(path, TOY_SCHEMA)

    def test_non_numeric_cell_names_location(self, tmp_path):
        path = write(tmp_path, "a,b,y\n1,2,A\n3,oops,B\n")
        with pytest.raises(DataError, match="row 3, column 'b'"):
            load_csv(path, TOY_SCHEMA)

    def test_nan_cell_rejected(self, tmp_path):
        path = write(tmp_path, "a,b,y\n1,NaN,A\n3,4,B\n")
        with pytest.raises(DataError, match="row 2, column 'b'"):
            load_csv(path, TOY_SCHEMA)

    def test_unknown_label_with_fixed_catalog(self, tmp_path):
        schema = CsvSchema(["a"], "y", class_names=["a1", "a2"],
                           label_values={"1": "a1", "2": "a2"})
        path = write(tmp_path, "a,y\n1,1\n2,9\n")
        with pytest.raises(DataError, match="row 3.*unknown label"):
            load_csv(path, schema)

    def test_label_value_numeric_normalization(self, tmp_path):
        schema = CsvSchema(["a"], "y", class_names=["a1", "a2"],
                           label_values={"1": "a1", "2": "a2"})
        path = write(tmp_path, "a,y\n1,1.0\n2,2\n")
        ds = load_csv(path, schema)
        assert np.array_equal(ds.labels, [1, 2])

    def test_single_class_rejected(self, tmp_path):
        path = write(tmp_path, "a,b,y\n1,2,A\n3,4,A\n")
        with pytest.raises(DataError, match="fewer than two"):
            load_csv(path, TOY_SCHEMA)

    @requires_ctg
    def test_ctg_class_totals(self):
        ds = load_csv(ctg_csv_path(), CTG_SCHEMA)
        assert ds.n_samples == 2126
        assert ds.n_features == 21
        assert ds.class_counts().tolist() == [1655, 295, 176]


class TestStandardize:
    def test_two_point_column(self):
        # Sample std of [0, 2] with denominator n-1 is sqrt(2).
        ds = Dataset([[0.0], [2.0]], [1, 2], ["a"], ["c1", "c2"])
        out, params = standardize(ds)
        root_half = 1.0 / np.sqrt(2.0)
        assert np.allclose(out.features[:, 0], [-root_half, root_half])
        assert np.allclose(params.means, [1.0])
        assert np.allclose(params.stds, [np.sqrt(2.0)])
        assert abs(out.features[:, 0].std(ddof=1) - 1.0) <= 1e-12

    def test_idempotent_on_standardized_column(self):
        rng = np.random.default_rng(0)
        col = rng.normal(size=40)
        col = (col - col.mean()) / col.std(ddof=1)
        ds = Dataset(col[:, None], rng.integers(1, 3, 40), ["a"], ["c1", "c2"])
        out, _ = standardize(ds)
        assert np.abs(out.features[:, 0] - col).max() <= 1e-12

    def test_constant_column_dropped(self):
        ds = Dataset([[5.0, 1.0], [5.0, 2.0], [5.0, 4.0]], [1, 2, 1],
                     ["const", "var"], ["c1", "c2"])
        out, params = standardize(ds)
        assert out.n_features == 1
        assert out.feature_names == ["var"]
        assert params.dropped_names == ["const"]

    def test_all_constant_errors(self):
        ds = Dataset([[5.0], [5.0]], [1, 2], ["a"], ["c1", "c2"])
        with pytest.raises(DataError, match="constant"):
            standardize(ds)

    def test_params_reproduce_fit_bit_for_bit(self):
        rng = np.random.default_rng(4)
        ds = Dataset(rng.normal(size=(30, 5)), rng.integers(1, 3, 30),
                     [f"f{j}" for j in range(5)], ["c1", "c2"])
        out, params = standardize(ds)
        again = params.transform(ds.features)
        assert np.array_equal(out.features, again)


class TestStratifiedSplit:
    def test_explicit_counts(self, ctg_scale):
        spec = SplitSpec(train_counts=(1153, 205, 130))
        train, test = stratified_split(ctg_scale, spec, substream(1, 0))
        assert train.n_samples == 1488
        assert test.n_samples == 638
        assert train.class_counts().tolist() == [1153, 205, 130]
        assert test.class_counts().tolist() == [502, 90, 46]

    def test_even_fraction(self):
        ds = Dataset(np.arange(16, dtype=float).reshape(8, 2),
                     [1, 1, 1, 1, 2, 2, 2, 2], ["a", "b"], ["c1", "c2"])
        train, test = stratified_split(ds, SplitSpec(train_fraction=0.5), substream(0, 0))
        assert train.class_counts().tolist() == [2, 2]
        assert test.class_counts().tolist() == [2, 2]

    def test_seeds_change_membership_not_counts(self, small_blobs):
        spec = SplitSpec(train_fraction=0.6)
        _, _, idx_a, _ = stratified_split(small_blobs, spec, substream(0, 0),
                                          return_indices=True)
        _, _, idx_b, _ = stratified_split(small_blobs, spec, substream(1, 0),
                                          return_indices=True)
        assert sorted(idx_a.tolist()) != sorted(idx_b.tolist())
        assert len(idx_a) == len(idx_b)

    def test_union_is_permutation(self, small_blobs):
        spec = SplitSpec(train_fraction=0.7)
        _, _, tr, te = stratified_split(small_blobs, spec, substream(3, 1),
                                        return_indices=True)
        combined = np.sort(np.concatenate([tr, te]))
        assert np.array_equal(combined, np.arange(small_blobs.n_samples))

    def test_deterministic_given_seed(self, small_blobs):
        spec = SplitSpec(train_fraction=0.7)
        a = stratified_split(small_blobs, spec, substream(5, 2))[0]
        b = stratified_split(small_blobs, spec, substream(5, 2))[0]
        assert np.array_equal(a.features, b.features)
        assert np.array_equal(a.labels, b.labels)

    def test_count_exceeding_class_size(self):
        ds = Dataset(np.zeros((4, 1)) + np.arange(4)[:, None],
                     [1, 1, 2, 2], ["a"], ["c1", "c2"])
        with pytest.raises(DataError, match="requested 3"):
            stratified_split(ds, SplitSpec(train_counts=(3, 1)), substream(0, 0))

    def test_spec_requires_exactly_one_mode(self):
        with pytest.raises(DataError):
            SplitSpec()
        with pytest.raises(DataError):
            SplitSpec(train_fraction=0.5, train_counts=(1, 1))


class TestSubstream:
    def test_same_seed_same_sequence(self):
        a = substream(123, 4).normal(size=10)
        b = substream(123, 4).normal(size=10)
        assert np.array_equal(a, b)

    def test_different_index_different_sequence(self):
        a = substream(123, 0).normal(size=10)
        b = substream(123, 1).normal(size=10)
        assert not np.array_equal(a, b)
