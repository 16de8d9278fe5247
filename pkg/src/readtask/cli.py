"""Command-line entry point.

Subcommands: synth, features, eval, ablate-fixations, ablate-blocks,
outliers, correlate, patterns, stats. Every evaluation-style command
writes its artifacts under ``<out>/<run_id>/`` with the resolved
configuration and master seed embedded in the report, so rerunning with
the same seed reproduces the files byte for byte. Failures print a
machine-readable JSON error record to stderr and exit nonzero (2 for
usage errors, 1 otherwise).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import SCHEMA_VERSION, __version__
from . import analysis, evaluation, features
from .config import load_config
from .corpus import (
    block_drift_spec,
    load_corpus,
    null_spec,
    omission_only_spec,
    save_corpus,
    synthesize_corpus,
    zuco1_like_spec,
    zuco2_like_spec,
)
from .dsp import DspConfig
from .errors import (
    ParameterError,
    ProtocolError,
    ReadtaskError,
    UnknownFeatureSetError,
)
from .learners import (
    LstmHyperParams,
    apply_scaler,
    fit_scaler,
    train_svm,
)
from .text import load_embeddings

PRESETS = {
    "zuco1": zuco1_like_spec,
    "zuco2": zuco2_like_spec,
    "omission-only": omission_only_spec,
    "null": null_spec,
    "block-drift": block_drift_spec,
}

USAGE_ERRORS = (UnknownFeatureSetError, ParameterError, ProtocolError)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="readtask",
        description="Reading-task decoding from gaze and EEG features.",
    )
    parser.add_argument(
        "--version", action="version",
        version=f"readtask {__version__} (schema {SCHEMA_VERSION})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, corpus=True):
        if corpus:
            p.add_argument("--corpus", required=True, help="corpus directory")
        p.add_argument("--config", help="key=value config file (flags win)")
        p.add_argument("--out", default="out", help="output root directory")
        p.add_argument("--run-id", help="output subdirectory name")
        p.add_argument("--seed", type=int, default=0, help="master seed")
        p.add_argument("--jobs", type=int, default=None,
                       help="max concurrent work items (default: cores)")

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--preset", choices=sorted(PRESETS), default="zuco2")
    p.add_argument("--subjects", type=int, help="override subject count")
    p.add_argument("--sentences-per-class", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="key=value config file (flags win)")
    p.add_argument("--out", required=True, help="corpus directory to write")

    p = sub.add_parser("features", help="export a feature matrix as CSV")
    common(p)
    p.add_argument("--set", dest="feature_set", required=True)
    p.add_argument("--embeddings", help="token<TAB>vector table for 'embeddings'")
    _dsp_flags(p)

    p = sub.add_parser("eval", help="run an evaluation protocol")
    common(p)
    p.add_argument("--protocol", required=True,
                   choices=["within-sentence", "within-word", "cross-subject"])
    p.add_argument("--features", required=True, help="feature set name")
    p.add_argument("--scheme", default="task",
                   choices=list(evaluation.LABEL_SCHEMES))
    p.add_argument("--balanced", action="store_true",
                   help="subsample classes to equal counts per run")
    p.add_argument("--runs", type=int, default=50)
    p.add_argument("--folds", type=int, default=3)
    p.add_argument("--lstm-seeds", type=int, default=5)
    p.add_argument("--svm-c", type=float, default=1.0)
    p.add_argument("--embeddings")
    _lstm_flags(p)
    _dsp_flags(p)

    p = sub.add_parser("ablate-fixations",
                       help="accuracy vs fraction of first fixations")
    common(p)
    p.add_argument("--band", default="gamma")
    p.add_argument("--fractions", default="0.1,0.2,0.5,0.75,1.0")
    p.add_argument("--runs", type=int, default=50)
    p.add_argument("--svm-c", type=float, default=1.0)
    _dsp_flags(p)

    p = sub.add_parser("ablate-blocks",
                       help="accuracy vs number of training blocks per task")
    common(p)
    p.add_argument("--features", required=True)
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--k-max", type=int, default=6)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--svm-c", type=float, default=1.0)
    _dsp_flags(p)

    p = sub.add_parser("outliers", help="flag outlier subjects per feature")
    common(p)
    p.add_argument("--features",
                   default="fixation_number,omission_rate,reading_speed,"
                           "max_sacc_dur,max_sacc_velocity,mean_sacc_dur,"
                           "mean_sacc_velocity,theta_mean,alpha_mean,"
                           "beta_mean,gamma_mean",
                   help="comma-separated single-feature sets")

    p = sub.add_parser("correlate",
                       help="correlate per-subject accuracies with covariates")
    common(p)
    p.add_argument("--reports", nargs="+", required=True,
                   help="report.json files from eval runs")

    p = sub.add_parser("patterns",
                       help="forward-model patterns for topography plots")
    common(p)
    p.add_argument("--features", default="electrode_features_gamma")
    p.add_argument("--svm-c", type=float, default=1.0)
    _dsp_flags(p)

    p = sub.add_parser("stats", help="per-task descriptive statistics")
    common(p)
    return parser


def _dsp_flags(p) -> None:
    p.add_argument("--power", choices=["amplitude", "amplitude_squared"],
                   default="amplitude")
    p.add_argument("--subbands", type=int, choices=[4, 8], default=4)


def _lstm_flags(p) -> None:
    p.add_argument("--hidden-size", type=int, default=64)
    p.add_argument("--dense-size", type=int, default=64)
    p.add_argument("--learning-rate", type=float, default=0.001)
    p.add_argument("--batch-size", type=int, default=40)
    p.add_argument("--max-epochs", type=int, default=200)
    p.add_argument("--patience", type=int, default=104)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)

    if getattr(args, "config", None):
        try:
            _overlay_config(args, argv, load_config(args.config))
        except ReadtaskError as exc:
            _print_error(exc)
            return 2

    try:
        return _dispatch(args)
    except USAGE_ERRORS as exc:
        _print_error(exc)
        return 2
    except ReadtaskError as exc:
        _print_error(exc)
        return 1


def _overlay_config(args, argv: list[str], config: dict) -> None:
    """Config values fill in any option the command line left at its
    default; explicit flags always win."""
    for key, value in config.items():
        if not hasattr(args, key):
            raise ParameterError(
                f"config key {key!r} does not match an option of "
                f"{args.command!r}"
            )
        flag = "--" + key.replace("_", "-")
        explicit = any(a == flag or a.startswith(flag + "=") for a in argv)
        if not explicit:
            setattr(args, key, value)


def _print_error(exc: Exception) -> None:
    record = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    print(json.dumps(record), file=sys.stderr)


def _out_dir(args, default_id: str) -> Path:
    run_id = args.run_id or default_id
    out = Path(args.out) / run_id
    out.mkdir(parents=True, exist_ok=True)
    return out


def _dsp_config(args) -> DspConfig:
    return DspConfig(power=args.power, subbands=args.subbands)


def _hyper(args) -> LstmHyperParams:
    return LstmHyperParams(
        hidden_size=args.hidden_size,
        dense_size=args.dense_size,
        learning_rate=args.learning_rate,
        batch_size=args.batch_size,
        max_epochs=args.max_epochs,
        patience=args.patience,
    )


def _dispatch(args) -> int:
    handler = {
        "synth": _cmd_synth,
        "features": _cmd_features,
        "eval": _cmd_eval,
        "ablate-fixations": _cmd_ablate_fixations,
        "ablate-blocks": _cmd_ablate_blocks,
        "outliers": _cmd_outliers,
        "correlate": _cmd_correlate,
        "patterns": _cmd_patterns,
        "stats": _cmd_stats,
    }[args.command]
    return handler(args)


def _cmd_synth(args) -> int:
    factory = PRESETS[args.preset]
    kwargs = {}
    if args.subjects:
        kwargs["n_subjects"] = args.subjects
    if args.sentences_per_class:
        kwargs["sentences_per_class"] = args.sentences_per_class
    spec = factory(**kwargs)
    corpus = synthesize_corpus(spec, args.seed)
    path = save_corpus(corpus, args.out)
    print(f"wrote corpus {corpus.dataset_id!r} "
          f"({corpus.n_subjects} subjects) to {path}")
    return 0


def _cmd_features(args) -> int:
    corpus = load_corpus(args.corpus)
    embeddings = load_embeddings(args.embeddings) if args.embeddings else None
    data = features.assemble(corpus, args.feature_set,
                             dsp_config=_dsp_config(args),
                             embeddings=embeddings)
    out = _out_dir(args, f"features_{args.feature_set}_{args.seed}")
    if isinstance(data, features.SequenceDataset):
        raise ParameterError(
            f"{args.feature_set!r} is a word-level sequence set; CSV export "
            f"covers fixed-width sentence-level sets"
        )
    path = data.to_csv(out / f"features_{args.feature_set}.csv")
    print(f"wrote {path}")
    return 0


def _cmd_eval(args) -> int:
    corpus = load_corpus(args.corpus)
    dsp_config = _dsp_config(args)
    embeddings = load_embeddings(args.embeddings) if args.embeddings else None
    if args.protocol == "within-sentence":
        report = evaluation.within_subject_sentence(
            corpus, args.features, runs=args.runs, C=args.svm_c,
            master_seed=args.seed, scheme=args.scheme, balanced=args.balanced,
            jobs=args.jobs, dsp_config=dsp_config,
        )
    elif args.protocol == "within-word":
        if args.scheme != "task":
            raise ParameterError("word-level evaluation supports --scheme task")
        report = evaluation.within_subject_word(
            corpus, args.features, folds=args.folds, seeds=args.lstm_seeds,
            hyper=_hyper(args), master_seed=args.seed, jobs=args.jobs,
            dsp_config=dsp_config, embeddings=embeddings,
        )
    else:
        if args.scheme != "task":
            raise ParameterError("cross-subject evaluation supports --scheme task")
        report = evaluation.cross_subject(
            corpus, args.features, C=args.svm_c, hyper=_hyper(args),
            master_seed=args.seed, jobs=args.jobs, dsp_config=dsp_config,
            embeddings=embeddings,
        )
    out = _out_dir(args, f"{args.protocol}_{args.features}_{args.scheme}_{args.seed}")
    print(f"wrote {report.write_json(out / 'report.json')}")
    print(f"wrote {report.write_summary_csv(out / 'summary.csv')}")
    print(f"wrote {report.write_confusion_csv(out / f'confusion_{args.scheme}.csv')}")
    print(f"median {report.median:.4f}  MAD {report.mad:.4f}")
    return 0


def _cmd_ablate_fixations(args) -> int:
    corpus = load_corpus(args.corpus)
    fractions = [float(f) for f in str(args.fractions).split(",") if f]
    report = evaluation.fixation_ablation(
        corpus, band=args.band, fractions=fractions, runs=args.runs,
        C=args.svm_c, master_seed=args.seed, jobs=args.jobs,
        dsp_config=_dsp_config(args),
    )
    out = _out_dir(args, f"ablate_fixations_{args.band}_{args.seed}")
    print(f"wrote {report.write_json(out / 'ablate_fixations.json')}")
    print(f"wrote {report.write_csv(out / 'ablate_fixations.csv')}")
    return 0


def _cmd_ablate_blocks(args) -> int:
    corpus = load_corpus(args.corpus)
    report = evaluation.block_ablation(
        corpus, args.features, k_values=range(args.k_min, args.k_max + 1),
        repeats=args.repeats, C=args.svm_c, master_seed=args.seed,
        jobs=args.jobs, dsp_config=_dsp_config(args),
    )
    out = _out_dir(args, f"ablate_blocks_{args.features}_{args.seed}")
    print(f"wrote {report.write_json(out / 'ablate_blocks.json')}")
    print(f"wrote {report.write_csv(out / 'ablate_blocks.csv')}")
    return 0


def _cmd_outliers(args) -> int:
    corpus = load_corpus(args.corpus)
    names = [f.strip() for f in str(args.features).split(",") if f.strip()]
    rows = []
    for name in names:
        means = analysis.subject_feature_means(corpus, name)
        values = np.array(list(means.values()))
        rows.append({
            "feature": name,
            "mean": float(values.mean()),
            "std": float(values.std(ddof=1)) if values.size > 1 else 0.0,
            "outliers": analysis.detect_outliers(corpus, name),
        })
    out = _out_dir(args, f"outliers_{args.seed}")
    json_path = out / "outliers.json"
    json_path.write_text(json.dumps(
        {"schema_version": SCHEMA_VERSION, "dataset_id": corpus.dataset_id,
         "rows": rows}, indent=2) + "\n")
    csv_path = out / "outliers.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature", "mean", "std", "outliers"])
        for row in rows:
            writer.writerow([row["feature"], repr(row["mean"]),
                             repr(row["std"]), ";".join(row["outliers"])])
    print(f"wrote {json_path}")
    print(f"wrote {csv_path}")
    return 0


def _cmd_correlate(args) -> int:
    corpus = load_corpus(args.corpus)
    accuracies_by_set: dict[str, dict[str, float]] = {}
    for path in args.reports:
        report = evaluation.load_report(path)
        if report.label_scheme == "subject":
            raise ParameterError(
                f"{path}: subject-scheme reports have no per-subject accuracies"
            )
        key = f"{report.feature_set}@{report.protocol}"
        accuracies_by_set[key] = {
            s.subject_id: s.accuracy for s in report.subjects
        }
    metas = [subj.meta for subj in corpus.subjects]
    rows = analysis.correlation_table(accuracies_by_set, metas)
    out = _out_dir(args, f"correlate_{args.seed}")
    json_path = out / "correlations.json"
    json_path.write_text(json.dumps(
        {"schema_version": SCHEMA_VERSION, "rows": [asdict(r) for r in rows]},
        indent=2) + "\n")
    csv_path = out / "correlations.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature_set", "covariate", "rho", "p_value",
                         "significant"])
        for r in rows:
            writer.writerow([
                r.feature_set, r.covariate,
                "" if r.rho is None else repr(r.rho),
                "" if r.p_value is None else repr(r.p_value),
                r.significant,
            ])
    print(f"wrote {json_path}")
    print(f"wrote {csv_path}")
    return 0


def _cmd_patterns(args) -> int:
    corpus = load_corpus(args.corpus)
    matrix = features.assemble(corpus, args.features,
                               dsp_config=_dsp_config(args))
    if isinstance(matrix, features.SequenceDataset):
        raise ParameterError("patterns need a sentence-level electrode set")
    out = _out_dir(args, f"patterns_{args.features}_{args.seed}")
    task_mask = [lab in ("NR", "TSR") for lab in matrix.labels]
    matrix = matrix.subset(task_mask)

    per_band_accumulator: dict[str, list[np.ndarray]] = {}
    written = []
    for sid in corpus.subject_ids:
        sub = matrix.for_subject(sid)
        if len(sub.class_names) < 2:
            continue
        scaler = fit_scaler(sub.values)
        scaled = apply_scaler(scaler, sub.values)
        model = train_svm((scaled, sub.labels), C=args.svm_c,
                          seed=args.seed)
        pattern = analysis.forward_model_pattern(model, scaled)[0]
        for band, channels in analysis.pattern_channels(pattern).items():
            band_name = band if band != "all" else _single_band(args.features)
            per_band_accumulator.setdefault(band_name, []).append(channels)
            path = out / f"patterns_{band_name}_{sid}.json"
            _write_pattern(path, band_name, channels, subject_id=sid)
            written.append(path)

    for band_name, stack in per_band_accumulator.items():
        mean = np.mean(np.stack(stack), axis=0)
        norm = np.linalg.norm(mean)
        if norm > 0:
            mean = mean / norm
        path = out / f"patterns_{band_name}.json"
        _write_pattern(path, band_name, mean, subject_id=None)
        written.append(path)
    for path in written:
        print(f"wrote {path}")
    return 0


def _single_band(feature_set: str) -> str:
    if feature_set.startswith("electrode_features_"):
        suffix = feature_set[len("electrode_features_"):]
        if suffix != "all":
            return suffix
    return "pattern"


def _write_pattern(path: Path, band: str, channels: np.ndarray,
                   subject_id: str | None) -> None:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "band": band,
        "channel_values": [float(v) for v in channels],
    }
    if subject_id is not None:
        payload["subject_id"] = subject_id
    path.write_text(json.dumps(payload, indent=2) + "\n")


def _cmd_stats(args) -> int:
    corpus = load_corpus(args.corpus)
    stats = analysis.descriptive_stats(corpus)
    out = _out_dir(args, f"stats_{args.seed}")
    json_path = out / "stats.json"
    json_path.write_text(json.dumps(
        {"schema_version": SCHEMA_VERSION, "dataset_id": corpus.dataset_id,
         **stats.to_dict()}, indent=2) + "\n")
    csv_path = out / "stats.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["quantity", "task", "mean", "std", "p_value"])
        for quantity in analysis.DESCRIPTIVE_QUANTITIES:
            for task, d in stats.per_task.items():
                writer.writerow([
                    quantity, task, repr(d.mean[quantity]),
                    repr(d.std[quantity]), repr(stats.p_values[quantity]),
                ])
    print(f"wrote {json_path}")
    print(f"wrote {csv_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
