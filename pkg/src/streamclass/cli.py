"""Command-line benchmark driver.

Three subcommands cover the pipeline end to end:

* ``bench``        replicated comparison of the classifiers, emitting MSR
                   distribution, per-class metric, timing, and ROC artifacts;
* ``tune-cgamma``  recursion-constant tuning curve on the stream head;
* ``pca``          explained-variance (and optional score) reports for the
                   batch and streaming reducers.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric failure.
"""

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .data import CTG_SCHEMA, CsvSchema, DataError, load_csv, standardize, substream
from .evaluation import (
    BenchmarkConfig,
    accuracy,
    class_metrics,
    confusion_matrix,
    msr,
    roc_curve,
    summarize,
    weighted_f1,
)
from .kernel import DegenerateGeometryError
from .online import OnlineKernelClassifier
from .pca import BatchPCA, explained_variance
from .streaming_pca import StreamingPCA

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

_NUMERIC_ERRORS = (DegenerateGeometryError, np.linalg.LinAlgError, FloatingPointError)


class ConfigError(ValueError):
    pass


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except _NUMERIC_ERRORS as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # Config is validated up front, so a late ValueError means the data
        # cannot support the requested computation (degenerate head, etc).
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="streamclass",
        description="Streaming nonparametric classification benchmark tools",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="replicated classifier comparison")
    _add_input_flags(bench)
    _add_split_flags(bench)
    bench.add_argument("--methods", default="lda,qda,knn,offline,online",
                       help="comma-separated subset of lda,qda,knn,offline,online")
    bench.add_argument("--q", type=int, default=5, help="reduced dimension")
    bench.add_argument("--m", type=int, default=1, help="number of replications")
    bench.add_argument("--seed", type=int, default=0, help="master seed")
    bench.add_argument("--n0", type=int, default=300, help="stream head size")
    bench.add_argument("--kernel", default="epanechnikov")
    bench.add_argument("--cgamma", type=float, default=None,
                       help="fixed recursion constant (tuned on the head when absent)")
    bench.add_argument("--cgamma-grid", default=None,
                       help="comma-separated recursion-constant candidates")
    bench.add_argument("--c-grid", default=None,
                       help="comma-separated bandwidth c candidates")
    bench.add_argument("--nu-grid", default=None,
                       help="comma-separated bandwidth nu candidates")
    bench.add_argument("--k-grid", default=None,
                       help="comma-separated neighbor-count candidates")
    bench.add_argument("--offline-cv", choices=("loo", "kfold"), default="loo")
    bench.add_argument("--streaming-projection", action="store_true",
                       help="project each training row with the basis that absorbed it")
    bench.add_argument("--workers", type=int, default=None,
                       help="thread count for replications 2..M "
                            "(default: STREAMCLASS_WORKERS or 1)")
    bench.add_argument("--serial", action="store_true",
                       help="force sequential execution (workers=1)")
    bench.add_argument("--merge-predictions", action="append", default=[],
                       metavar="LABEL:CSV",
                       help="merge externally produced predictions aligned to the "
                            "test manifest (columns: replication,row,prediction)")
    bench.add_argument("--omit-timing", action="store_true",
                       help="drop measured wall-clock fields so artifacts are "
                            "byte-reproducible across runs")
    bench.add_argument("--verbose", action="store_true")
    bench.set_defaults(func=cmd_bench)

    tune = sub.add_parser("tune-cgamma", help="recursion-constant tuning curve")
    _add_input_flags(tune)
    _add_split_flags(tune)
    tune.add_argument("--q", type=int, default=5)
    tune.add_argument("--seed", type=int, default=0)
    tune.add_argument("--n0", type=int, default=300)
    tune.add_argument("--kernel", default="epanechnikov")
    tune.add_argument("--cgamma-grid", default=None)
    tune.add_argument("--c-grid", default=None)
    tune.add_argument("--nu-grid", default=None)
    tune.set_defaults(func=cmd_tune_cgamma)

    pca = sub.add_parser("pca", help="explained-variance and score reports")
    _add_input_flags(pca)
    pca.add_argument("--q", type=int, default=5)
    pca.add_argument("--mode", choices=("batch", "streaming", "both"), default="batch")
    pca.add_argument("--n0", type=int, default=300,
                     help="streaming initialization head size")
    pca.add_argument("--scores", action="store_true",
                     help="also emit per-row scores on the first two components")
    pca.set_defaults(func=cmd_pca)
    return parser


def _add_input_flags(cmd):
    cmd.add_argument("--input", required=True, help="input CSV path")
    cmd.add_argument("--data-schema", choices=("ctg", "generic"), default="ctg",
                     help="'ctg' expects the fetal-monitoring columns; 'generic' "
                          "takes every non-label column as a feature")
    cmd.add_argument("--label-column", default="NSP",
                     help="label column name for --data-schema generic")
    cmd.add_argument("--no-standardize", action="store_true",
                     help="skip column standardization")
    cmd.add_argument("--outdir", default=".", help="artifact directory")


def _add_split_flags(cmd):
    cmd.add_argument("--train-counts", default=None,
                     help="comma-separated per-class training counts")
    cmd.add_argument("--train-fraction", type=float, default=None,
                     help="global training fraction (per-class rounding)")


def _parse_floats(text, flag):
    if text is None:
        return None
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise ConfigError(f"{flag} must be a comma-separated list of numbers") from None


def _parse_ints(text, flag):
    if text is None:
        return None
    try:
        return tuple(int(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise ConfigError(f"{flag} must be a comma-separated list of integers") from None


def _load_dataset(args):
    if args.data_schema == "ctg":
        schema = CTG_SCHEMA
    else:
        schema = _sniff_generic_schema(args.input, args.label_column)
    return load_csv(args.input, schema)


def _sniff_generic_schema(path, label_column):
    path = Path(path)
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    with open(path, newline="", encoding="utf-8-sig") as fh:
        header = next(csv.reader(fh), None)
    if not header:
        raise DataError(f"{path}: file is empty")
    names = [h.strip() for h in header]
    lowered = [h.lower() for h in names]
    if label_column.lower() not in lowered:
        raise DataError(f"{path}: label column {label_column!r} not in header")
    features = [h for h in names if h.lower() != label_column.lower()]
    return CsvSchema(feature_names=features, label_column=label_column)


def _split_arguments(args, data):
    counts = _parse_ints(args.train_counts, "--train-counts")
    fraction = args.train_fraction
    if counts is None and fraction is None:
        fraction = 0.7
    if counts is not None and fraction is not None:
        raise ConfigError("give either --train-counts or --train-fraction, not both")
    if counts is not None and len(counts) != data.n_classes:
        raise ConfigError(
            f"--train-counts needs {data.n_classes} entries, got {len(counts)}"
        )
    return counts, fraction


def _workers(args):
    if args.serial:
        return 1
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        return args.workers
    env = os.environ.get("STREAMCLASS_WORKERS")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError("STREAMCLASS_WORKERS must be an integer") from None
        if value < 1:
            raise ConfigError("STREAMCLASS_WORKERS must be at least 1")
        return value
    return 1


# ---------------------------------------------------------------------------
# bench

def cmd_bench(args):
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    merges = [_parse_merge_flag(item) for item in args.merge_predictions]

    data = _load_dataset(args)
    counts, fraction = _split_arguments(args, data)
    try:
        config = BenchmarkConfig(
            methods=methods,
            n_components=args.q,
            n_init=args.n0,
            train_counts=counts,
            train_fraction=fraction,
            n_replications=args.m,
            seed=args.seed,
            standardize=not args.no_standardize,
            kernel=args.kernel,
            c_grid=_parse_floats(args.c_grid, "--c-grid"),
            nu_grid=_parse_floats(args.nu_grid, "--nu-grid"),
            c_gamma=args.cgamma,
            c_gamma_grid=_parse_floats(args.cgamma_grid, "--cgamma-grid"),
            k_grid=_parse_ints(args.k_grid, "--k-grid"),
            offline_cv=args.offline_cv,
            streaming_projection=args.streaming_projection,
            workers=_workers(args),
        ).validate()
        if args.q > data.n_features:
            raise ConfigError(f"--q={args.q} exceeds the {data.n_features} features")
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    if args.verbose:
        print(f"running {config.n_replications} replications of {methods}",
              file=sys.stderr)

    from .evaluation import replicate

    report = replicate(data, config)
    merged = {label: _merge_external(path, report, data.class_names)
              for label, path in merges}

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_bench_artifacts(outdir, report, merged, omit_timing=args.omit_timing)

    for method, outcome in report.methods.items():
        summary = outcome.summary()
        if summary is None:
            print(f"{method}: no successful replications", file=sys.stderr)
        else:
            print(f"{method}: median MSR {summary['median']:.4f} "
                  f"over {len(outcome.msr_values)} replications")
    return EXIT_OK


def _parse_merge_flag(item):
    label, sep, path = item.partition(":")
    if not sep or not label or not path:
        raise ConfigError(f"--merge-predictions expects LABEL:CSV, got {item!r}")
    return label, path


def _merge_external(path, report, class_names):
    """Misclassified fractions of externally produced predictions.

    The CSV must carry replication,row,prediction and cover every manifest
    row of each replication it mentions.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"predictions file not found: {path}")
    name_to_index = {name: i + 1 for i, name in enumerate(class_names)}
    by_rep = {}
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        wanted = {"replication", "row", "prediction"}
        if reader.fieldnames is None or wanted - {f.strip().lower() for f in reader.fieldnames}:
            raise DataError(f"{path}: header must contain {sorted(wanted)}")
        for i, row in enumerate(reader, start=2):
            row = {k.strip().lower(): v for k, v in row.items()}
            try:
                rep = int(row["replication"])
                source = int(row["row"])
            except (TypeError, ValueError):
                raise DataError(f"{path}: row {i}: bad replication/row value") from None
            pred = (row["prediction"] or "").strip()
            if pred in name_to_index:
                label = name_to_index[pred]
            else:
                try:
                    label = int(pred)
                except ValueError:
                    raise DataError(f"{path}: row {i}: unknown prediction {pred!r}") from None
                if not 1 <= label <= len(class_names):
                    raise DataError(f"{path}: row {i}: prediction index {label} out of range")
            by_rep.setdefault(rep, {})[source] = label

    merged = {"msr_values": {}, "rep1_y_pred": None}
    for rep, preds in sorted(by_rep.items()):
        if rep not in report.test_manifest:
            raise DataError(f"{path}: replication {rep} not present in this run")
        rows, y_true = report.test_manifest[rep]
        missing = [int(r) for r in rows if int(r) not in preds]
        if missing:
            raise DataError(
                f"{path}: replication {rep} is missing predictions for "
                f"{len(missing)} test rows (first: {missing[:3]})"
            )
        y_pred = np.array([preds[int(r)] for r in rows])
        merged["msr_values"][rep] = msr(y_true, y_pred)
        if rep == 1:
            merged["rep1_y_pred"] = y_pred
    if not merged["msr_values"]:
        raise DataError(f"{path}: no predictions found")
    return merged


def _write_bench_artifacts(outdir, report, merged, *, omit_timing):
    class_names = report.class_names
    classes = np.arange(1, len(class_names) + 1)
    first = report.first_replication
    y_true1 = first["y_true"] if first else None

    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "bench",
        "config": _config_payload(report.config),
        "class_names": class_names,
        "methods": {},
    }

    table3_rows, table4_rows, table5_rows = [], [], []

    def rep1_block(y_pred, scores):
        cm = confusion_matrix(y_true1, y_pred, classes)
        per_class = {}
        auc = {}
        for g, name in enumerate(class_names):
            metrics = class_metrics(cm, g)
            per_class[name] = {
                "recall": metrics.recall,
                "specificity": metrics.specificity,
                "balanced_accuracy": metrics.balanced_accuracy,
                "precision": metrics.precision,
                "f1": metrics.f1,
            }
            if scores is not None:
                auc[name] = roc_curve(scores[:, g], y_true1, classes[g]).auc
        return cm, per_class, auc

    def add_rows(name, summary, rep1, seconds_rep1):
        if summary is not None:
            table3_rows.append([name, summary["first_quartile"], summary["median"],
                                summary["mean"], summary["third_quartile"]])
        if rep1 is not None:
            cm, per_class, _ = rep1
            for cls_name in class_names:
                m = per_class[cls_name]
                table4_rows.append([name, cls_name, m["recall"], m["specificity"],
                                    m["balanced_accuracy"], m["precision"], m["f1"]])
            table5_rows.append([name, seconds_rep1, accuracy(cm), weighted_f1(cm)])

    for method, outcome in report.methods.items():
        block = {
            "msr": {str(k): v for k, v in sorted(outcome.msr_values.items())},
            "summary": outcome.summary(),
            "errors": {str(k): v for k, v in sorted(outcome.errors.items())},
        }
        if not omit_timing:
            block["seconds"] = {str(k): v for k, v in sorted(outcome.seconds.items())}
        if outcome.info.get(1) is not None:
            block["tuning"] = outcome.info[1]

        rep1 = None
        if first and method in first["methods"]:
            detail = first["methods"][method]
            rep1 = rep1_block(detail["y_pred"], detail["scores"])
            cm, per_class, auc = rep1
            block["replication1"] = {
                "accuracy": accuracy(cm),
                "f1_weighted": weighted_f1(cm),
                "per_class": per_class,
                "auc": auc,
                "confusion": cm.tolist(),
            }
            if detail["scores"] is not None:
                for g, cls_name in enumerate(class_names):
                    curve = roc_curve(detail["scores"][:, g], y_true1, classes[g])
                    _write_csv(
                        outdir / f"roc_{method}_{_slug(cls_name)}.csv",
                        ["threshold", "fpr", "tpr"],
                        zip(curve.thresholds, curve.fpr, curve.tpr),
                    )
        payload["methods"][method] = block
        seconds_rep1 = None if omit_timing else outcome.seconds.get(1)
        add_rows(method, outcome.summary(), rep1, seconds_rep1)

    for label, result in merged.items():
        values = [result["msr_values"][k] for k in sorted(result["msr_values"])]
        block = {
            "external": True,
            "msr": {str(k): v for k, v in sorted(result["msr_values"].items())},
            "summary": summarize(values),
        }
        rep1 = None
        if result["rep1_y_pred"] is not None and first is not None:
            rep1 = rep1_block(result["rep1_y_pred"], None)
            cm, per_class, _ = rep1
            block["replication1"] = {
                "accuracy": accuracy(cm),
                "f1_weighted": weighted_f1(cm),
                "per_class": per_class,
                "confusion": cm.tolist(),
            }
        payload["methods"][label] = block
        add_rows(label, block["summary"], rep1, None)

    _write_json(outdir / "results.json", payload)
    _write_csv(outdir / "table3.csv",
               ["method", "first_quartile", "median", "mean", "third_quartile"],
               table3_rows)
    _write_csv(outdir / "table4.csv",
               ["method", "class", "recall", "specificity", "balanced_accuracy",
                "precision", "f1"],
               table4_rows)
    _write_csv(outdir / "table5.csv",
               ["method", "cpu_seconds", "accuracy", "f1_weighted"],
               table5_rows)

    manifest_rows = []
    for rep in sorted(report.test_manifest):
        rows, labels = report.test_manifest[rep]
        for position, (source, label) in enumerate(zip(rows.tolist(), labels.tolist())):
            manifest_rows.append([rep, position, source, class_names[label - 1]])
    _write_csv(outdir / "test_manifest.csv",
               ["replication", "position", "row", "label"], manifest_rows)


def _config_payload(config):
    out = {}
    for key, value in vars(config).items():
        if isinstance(value, tuple):
            value = list(value)
        out[key] = value
    return out


# ---------------------------------------------------------------------------
# tune-cgamma

def cmd_tune_cgamma(args):
    data = _load_dataset(args)
    counts, fraction = _split_arguments(args, data)
    grid = _parse_floats(args.cgamma_grid, "--cgamma-grid")
    if grid is not None and any(c <= 0 for c in grid):
        raise ConfigError("--cgamma-grid values must be positive")
    c_grid = _parse_floats(args.c_grid, "--c-grid")
    nu_grid = _parse_floats(args.nu_grid, "--nu-grid")
    if c_grid is not None and any(not 0 < c < 10 for c in c_grid):
        raise ConfigError("--c-grid values must lie in (0, 10)")
    if nu_grid is not None and any(not 0 < v < 1 for v in nu_grid):
        raise ConfigError("--nu-grid values must lie in (0, 1)")
    if args.q > data.n_features:
        raise ConfigError(f"--q={args.q} exceeds the {data.n_features} features")

    from .data import SplitSpec, stratified_split

    rng = substream(args.seed, 1)
    train, _ = stratified_split(
        data, SplitSpec(train_fraction=fraction, train_counts=counts), rng
    )
    if not args.no_standardize:
        train, _ = standardize(train)
    if not 3 <= args.n0 < train.n_samples:
        raise ConfigError(f"--n0 must lie in [3, {train.n_samples - 1}]")

    reducer = StreamingPCA(n_components=args.q, n_init=args.n0).fit(train.features)
    reduced = reducer.transform(train.features)
    clf = OnlineKernelClassifier(
        c_gamma=None, c_gamma_grid=grid, n_init=args.n0, kernel=args.kernel,
        c_grid=c_grid, nu_grid=nu_grid,
        classes=np.arange(1, data.n_classes + 1),
    ).fit(reduced, train.labels)
    tuning = clf.tuning_

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    _write_csv(outdir / "cgamma_curve.csv", ["candidate", "head_msr"],
               zip(tuning.candidates, tuning.head_msr))
    _write_json(outdir / "tune_result.json", {
        "schema_version": SCHEMA_VERSION,
        "command": "tune-cgamma",
        "selected_c_gamma": tuning.c_gamma,
        "n_candidates": int(tuning.candidates.size),
        "head_size": args.n0,
        "seed": args.seed,
    })
    print(f"selected c_gamma: {tuning.c_gamma}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# pca

def cmd_pca(args):
    data = _load_dataset(args)
    if not 1 <= args.q <= data.n_features:
        raise ConfigError(f"--q={args.q} out of range for {data.n_features} features")
    if not args.no_standardize:
        data, _ = standardize(data)

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    if args.mode in ("batch", "both"):
        model = BatchPCA(n_components=args.q).fit(data.features)
        _write_variance_csv(outdir / "pca_variance_batch.csv", model)
        if args.scores:
            _write_scores_csv(outdir / "pca_scores_batch.csv", model, data)
    if args.mode in ("streaming", "both"):
        n_init = min(args.n0, data.n_samples)
        if n_init < args.q + 1:
            raise ConfigError(f"streaming initialization needs at least {args.q + 1} rows")
        model = StreamingPCA(n_components=args.q, n_init=n_init).fit(data.features)
        _write_variance_csv(outdir / "pca_variance_streaming.csv", model)
        if args.scores:
            _write_scores_csv(outdir / "pca_scores_streaming.csv", model, data)
    print(f"explained-variance reports written to {outdir}")
    return EXIT_OK


def _write_variance_csv(path, model):
    values = model.explained_variance_
    ratios, cumulative = explained_variance(model)
    rows = [
        [j + 1, values[j], ratios[j], cumulative[j]] for j in range(len(values))
    ]
    _write_csv(path, ["component", "eigenvalue", "ratio", "cumulative"], rows)


def _write_scores_csv(path, model, data):
    Z = model.transform(data.features)
    header = ["row", "pc1"] + (["pc2"] if Z.shape[1] >= 2 else []) + ["label"]
    rows = []
    for i in range(Z.shape[0]):
        row = [i, Z[i, 0]]
        if Z.shape[1] >= 2:
            row.append(Z[i, 1])
        row.append(data.class_names[data.labels[i] - 1])
        rows.append(row)
    _write_csv(path, header, rows)


# ---------------------------------------------------------------------------
# artifact helpers

def _slug(name):
    return "".join(ch.lower() if ch.isalnum() else "_" for ch in name)


def _format_cell(value):
    if value is None:
        return ""
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    if isinstance(value, (np.integer, int)):
        return str(int(value))
    return str(value)


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(cell) for cell in row])


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


if __name__ == "__main__":
    sys.exit(main())
