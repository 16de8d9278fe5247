"""Evaluation protocols, label schemes, aggregate metrics, and reports.

Protocols
---------
* within-subject sentence level: per subject, ``runs`` stratified 90/10
  shuffled splits; the scaler is fit on the training split only; one
  linear SVM per split; subject accuracy is the mean over runs.
* within-subject word level: per subject, ``folds``-fold stratified
  cross-validation repeated for ``seeds`` random seeds; one BiLSTM per
  (seed, fold), with 10% of each training fold held out for validation.
* cross-subject: train on n-1 subjects, test on the left-out subject;
  exactly n models, a single run each.
* relabeling: the same machinery classifying session, block, or subject
  labels instead of the reading task.
* block-count ablation: train on k random blocks per task, test on the
  remaining blocks, repeated with different seeds.
* fixation ablation: sentence vectors from the first fraction of
  fixations in chronological order, swept over the canonical fractions.

Reports aggregate the per-subject accuracies as median and (unscaled)
median absolute deviation, carry one summed confusion matrix per subject,
and embed the resolved configuration and master seed. Runs with the same
master seed produce byte-identical report files; no timestamps are
recorded. Test samples never share a sentence with the training split;
tests re-derive the splits to assert this.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import SCHEMA_VERSION, __version__
from .corpus.types import Corpus
from .dsp import DspConfig
from .eeg import ABLATION_FRACTIONS, ablated_word_eeg
from .errors import ProtocolError, SchemaVersionError
from .features import (
    FeatureMatrix,
    SampleGroup,
    SequenceDataset,
    assemble,
    is_sequence_set,
)
from .learners import (
    LstmHyperParams,
    apply_scaler,
    apply_sequence_scaler,
    fit_scaler,
    fit_sequence_scaler,
    predict,
    predict_bilstm,
    train_bilstm,
    train_svm,
)
from .parallel import parallel_map
from .seeding import derive_seed, derived_rng

LABEL_SCHEMES = ("task", "session", "block", "subject")
TASK_CLASSES = ("NR", "TSR")
MIN_SAMPLES_PER_SUBJECT = 10


# ---------------------------------------------------------------------------
# metrics


def median_mad(accuracies: Sequence[float]) -> tuple[float, float]:
    """Median and unscaled median absolute deviation."""
    values = np.asarray(list(accuracies), dtype=float)
    if values.size == 0:
        raise ProtocolError("median_mad needs at least one value")
    med = float(np.median(values))
    return med, float(np.median(np.abs(values - med)))


def confusion_matrix(y_true: Sequence[str], y_pred: Sequence[str],
                     classes: Sequence[str]) -> np.ndarray:
    index = {c: k for k, c in enumerate(classes)}
    out = np.zeros((len(classes), len(classes)), dtype=int)
    for t, p in zip(y_true, y_pred):
        out[index[t], index[p]] += 1
    return out


# ---------------------------------------------------------------------------
# report model


@dataclass
class SubjectResult:
    subject_id: str
    accuracy: float
    run_accuracies: list[float]
    n_samples: int
    confusion: list[list[int]]  # summed over runs; rows = true class


@dataclass
class EvalReport:
    protocol: str
    feature_set: str
    label_scheme: str
    model_family: str
    dataset_id: str
    master_seed: int
    chance_level: float
    class_names: list[str]
    config: dict
    subjects: list[SubjectResult]
    skipped: list[dict]
    median: float
    mad: float
    schema_version: int = SCHEMA_VERSION
    artifact_version: str = __version__

    @property
    def accuracies(self) -> list[float]:
        return [s.accuracy for s in self.subjects]

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "artifact_version": self.artifact_version,
            "protocol": self.protocol,
            "feature_set": self.feature_set,
            "label_scheme": self.label_scheme,
            "model_family": self.model_family,
            "dataset_id": self.dataset_id,
            "master_seed": self.master_seed,
            "chance_level": self.chance_level,
            "class_names": self.class_names,
            "config": self.config,
            "subjects": [asdict(s) for s in self.subjects],
            "skipped": self.skipped,
            "median": self.median,
            "mad": self.mad,
        }

    def write_json(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_dict(), indent=2) + "\n")
        return path

    def write_summary_csv(self, path: str | Path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["subject_id", "accuracy", "n_samples"])
            for s in self.subjects:
                writer.writerow([s.subject_id, repr(s.accuracy), s.n_samples])
            writer.writerow(["median", repr(self.median), ""])
            writer.writerow(["mad", repr(self.mad), ""])
        return path

    def write_confusion_csv(self, path: str | Path) -> Path:
        """Summed confusion matrix across subjects, rows = true class."""
        total = np.zeros((len(self.class_names), len(self.class_names)), dtype=int)
        for s in self.subjects:
            total += np.asarray(s.confusion, dtype=int)
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["true\\pred", *self.class_names])
            for name, row in zip(self.class_names, total):
                writer.writerow([name, *row.tolist()])
        return path


def load_report(path: str | Path) -> EvalReport:
    payload = json.loads(Path(path).read_text())
    version = payload.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(
            f"{path}: report schema_version {version} unsupported "
            f"(expected {SCHEMA_VERSION})"
        )
    subjects = [SubjectResult(**s) for s in payload["subjects"]]
    return EvalReport(
        protocol=payload["protocol"],
        feature_set=payload["feature_set"],
        label_scheme=payload["label_scheme"],
        model_family=payload["model_family"],
        dataset_id=payload["dataset_id"],
        master_seed=payload["master_seed"],
        chance_level=payload["chance_level"],
        class_names=payload["class_names"],
        config=payload["config"],
        subjects=subjects,
        skipped=payload["skipped"],
        median=payload["median"],
        mad=payload["mad"],
        schema_version=version,
        artifact_version=payload.get("artifact_version", "unknown"),
    )


# ---------------------------------------------------------------------------
# splitting helpers


def stratified_split(labels: Sequence[str], test_fraction: float,
                     rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Shuffled per-class split; every class with >= 2 members keeps at
    least one sample on each side."""
    labels = np.asarray(labels)
    train_idx, test_idx = [], []
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        members = members[rng.permutation(members.size)]
        n_test = int(round(test_fraction * members.size))
        if members.size >= 2:
            n_test = max(1, min(n_test, members.size - 1))
        else:
            n_test = 0
        test_idx.extend(members[:n_test])
        train_idx.extend(members[n_test:])
    if not test_idx:
        raise ProtocolError("split produced an empty test set")
    return np.sort(np.array(train_idx)), np.sort(np.array(test_idx))


def stratified_kfold(labels: Sequence[str], folds: int,
                     rng: np.random.Generator) -> list[np.ndarray]:
    """Test-fold index arrays that partition all samples exactly."""
    labels = np.asarray(labels)
    if folds < 2:
        raise ProtocolError("folds must be >= 2")
    parts: list[list[int]] = [[] for _ in range(folds)]
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        members = members[rng.permutation(members.size)]
        for k, chunk in enumerate(np.array_split(members, folds)):
            parts[k].extend(chunk.tolist())
    return [np.sort(np.array(p, dtype=int)) for p in parts]


def _balanced_subsample(labels: Sequence[str],
                        rng: np.random.Generator) -> np.ndarray:
    labels = np.asarray(labels)
    classes, counts = np.unique(labels, return_counts=True)
    n_keep = counts.min()
    keep = []
    for cls in classes:
        members = np.flatnonzero(labels == cls)
        members = members[rng.permutation(members.size)]
        keep.extend(members[:n_keep])
    return np.sort(np.array(keep))


def _scheme_labels(groups: Sequence[SampleGroup], task_labels: Sequence[str],
                   scheme: str) -> list[str]:
    if scheme == "task":
        return list(task_labels)
    if scheme == "session":
        return [f"session_{g.session_id}" for g in groups]
    if scheme == "block":
        return [f"block_{g.block_id:02d}" for g in groups]
    if scheme == "subject":
        return [g.subject_id for g in groups]
    raise ProtocolError(f"unknown label scheme {scheme!r}; valid: {LABEL_SCHEMES}")


def _task_rows(data: FeatureMatrix | SequenceDataset):
    """Samples eligible for reading-task classification (NR/TSR only)."""
    mask = [lab in TASK_CLASSES for lab in data.labels]
    return data.subset(mask)


# ---------------------------------------------------------------------------
# sentence-level protocols (linear SVM)


def _sentence_runs(matrix: FeatureMatrix, runs: int, C: float,
                   master_seed: int, scope: str, balanced: bool,
                   test_fraction: float = 0.1) -> SubjectResult:
    classes = matrix.class_names
    labels = np.asarray(matrix.labels)
    run_accs: list[float] = []
    conf = np.zeros((len(classes), len(classes)), dtype=int)
    for run in range(runs):
        rng = derived_rng(master_seed, "run", scope, run)
        if balanced:
            keep = _balanced_subsample(labels, rng)
            sub = matrix.subset(keep)
            sub_labels = np.asarray(sub.labels)
        else:
            sub = matrix
            sub_labels = labels
        train_idx, test_idx = stratified_split(sub_labels, test_fraction, rng)
        scaler = fit_scaler(sub.values[train_idx])
        model = train_svm(
            (apply_scaler(scaler, sub.values[train_idx]),
             [sub.labels[i] for i in train_idx]),
            C=C, seed=derive_seed(master_seed, "svm", scope, run),
        )
        predicted = predict(model, apply_scaler(scaler, sub.values[test_idx]))
        truth = [sub.labels[i] for i in test_idx]
        run_accs.append(float(np.mean([p == t for p, t in zip(predicted, truth)])))
        conf += confusion_matrix(truth, predicted, classes)
    return SubjectResult(
        subject_id=scope,
        accuracy=float(np.mean(run_accs)),
        run_accuracies=run_accs,
        n_samples=matrix.n_samples,
        confusion=conf.tolist(),
    )


def within_subject_sentence(
    corpus: Corpus,
    feature_set: str | FeatureMatrix,
    runs: int = 50,
    C: float = 1.0,
    master_seed: int = 0,
    scheme: str = "task",
    balanced: bool = False,
    min_samples: int = MIN_SAMPLES_PER_SUBJECT,
    jobs: int | None = None,
    dsp_config: DspConfig | None = None,
) -> EvalReport:
    """Per-subject 90/10 shuffled-split evaluation (sentence-level SVM)."""
    if scheme not in LABEL_SCHEMES:
        raise ProtocolError(f"unknown label scheme {scheme!r}; valid: {LABEL_SCHEMES}")
    if scheme == "subject":
        return _pooled_subject_classification(
            corpus, feature_set, runs, C, master_seed, balanced, jobs, dsp_config)

    matrix = _resolve_matrix(corpus, feature_set, dsp_config)
    set_name = matrix.set_name
    relabeled = matrix.with_labels(
        _scheme_labels(matrix.groups, matrix.labels, scheme))
    if scheme == "task":
        relabeled = _task_rows(relabeled)

    subjects, skipped = [], []
    eligible = []
    for sid in corpus.subject_ids:
        sub = relabeled.for_subject(sid)
        if sub.n_samples < min_samples:
            skipped.append({"subject_id": sid,
                            "reason": f"only {sub.n_samples} samples "
                                      f"(need >= {min_samples})"})
            continue
        if len(sub.class_names) < 2:
            skipped.append({"subject_id": sid,
                            "reason": "fewer than two classes present"})
            continue
        eligible.append((sid, sub))

    results = parallel_map(
        lambda item: _sentence_runs(item[1], runs, C, master_seed, item[0],
                                    balanced),
        eligible, jobs=jobs,
    )
    subjects = list(results)
    if not subjects:
        raise ProtocolError("no subject passed the protocol preconditions")
    med, mad = median_mad([s.accuracy for s in subjects])
    class_names = sorted({c for _, sub in eligible for c in sub.class_names})
    return EvalReport(
        protocol="within_subject_sentence",
        feature_set=set_name,
        label_scheme=scheme,
        model_family="svm",
        dataset_id=corpus.dataset_id,
        master_seed=master_seed,
        chance_level=1.0 / max(2, len(class_names)),
        class_names=class_names,
        config={"runs": runs, "C": C, "balanced": balanced,
                "min_samples": min_samples, "test_fraction": 0.1},
        subjects=subjects,
        skipped=skipped,
        median=med,
        mad=mad,
    )


def _pooled_subject_classification(
    corpus, feature_set, runs, C, master_seed, balanced, jobs, dsp_config,
) -> EvalReport:
    """Subject decoding: all sentences pooled, labels = subject ids."""
    matrix = _resolve_matrix(corpus, feature_set, dsp_config)
    relabeled = matrix.with_labels(
        _scheme_labels(matrix.groups, matrix.labels, "subject"))
    if len(relabeled.class_names) < 2:
        raise ProtocolError("subject classification needs >= 2 subjects")
    pooled = _sentence_runs(relabeled, runs, C, master_seed, "pooled", balanced)
    med, mad = median_mad(pooled.run_accuracies)
    return EvalReport(
        protocol="within_subject_sentence",
        feature_set=matrix.set_name,
        label_scheme="subject",
        model_family="svm",
        dataset_id=corpus.dataset_id,
        master_seed=master_seed,
        chance_level=1.0 / len(relabeled.class_names),
        class_names=relabeled.class_names,
        config={"runs": runs, "C": C, "balanced": balanced,
                "test_fraction": 0.1},
        subjects=[pooled],
        skipped=[],
        median=med,
        mad=mad,
    )


def relabel_and_classify(
    corpus: Corpus,
    scheme: str,
    feature_set: str | FeatureMatrix,
    balanced: bool = False,
    runs: int = 50,
    C: float = 1.0,
    master_seed: int = 0,
    jobs: int | None = None,
    dsp_config: DspConfig | None = None,
) -> EvalReport:
    """Session/block/subject control classification through the standard
    sentence-level pipeline."""
    return within_subject_sentence(
        corpus, feature_set, runs=runs, C=C, master_seed=master_seed,
        scheme=scheme, balanced=balanced, jobs=jobs, dsp_config=dsp_config,
    )


# ---------------------------------------------------------------------------
# word-level protocol (BiLSTM)


def _subject_word_eval(dataset: SequenceDataset, folds: int, seeds: int,
                       hyper: LstmHyperParams, master_seed: int,
                       subject_id: str) -> SubjectResult:
    classes = dataset.class_names
    conf = np.zeros((len(classes), len(classes)), dtype=int)
    accs = []
    for seed_i in range(seeds):
        rng = derived_rng(master_seed, "folds", subject_id, seed_i)
        fold_tests = stratified_kfold(dataset.labels, folds, rng)
        for fold_i, test_idx in enumerate(fold_tests):
            test_mask = np.zeros(dataset.n_samples, dtype=bool)
            test_mask[test_idx] = True
            train = dataset.subset(~test_mask)
            test = dataset.subset(test_mask)
            scaler = fit_sequence_scaler(train.sequences)
            model = train_bilstm(
                apply_sequence_scaler(scaler, train.sequences),
                train.labels, hyper=hyper,
                seed=derive_seed(master_seed, "lstm", subject_id, seed_i, fold_i),
            )
            predicted = predict_bilstm(
                model, apply_sequence_scaler(scaler, test.sequences))
            accs.append(float(np.mean(
                [p == t for p, t in zip(predicted, test.labels)])))
            conf += confusion_matrix(test.labels, predicted, classes)
    return SubjectResult(
        subject_id=subject_id,
        accuracy=float(np.mean(accs)),
        run_accuracies=accs,
        n_samples=dataset.n_samples,
        confusion=conf.tolist(),
    )


def within_subject_word(
    corpus: Corpus,
    feature_set: str | SequenceDataset,
    folds: int = 3,
    seeds: int = 5,
    hyper: LstmHyperParams | None = None,
    master_seed: int = 0,
    min_samples: int = MIN_SAMPLES_PER_SUBJECT,
    jobs: int | None = None,
    dsp_config: DspConfig | None = None,
    embeddings=None,
) -> EvalReport:
    """Per-subject k-fold cross-validation of the word-level BiLSTM,
    averaged over folds and random seeds."""
    hyper = hyper or LstmHyperParams()
    dataset = _resolve_sequences(corpus, feature_set, dsp_config, embeddings)
    dataset = _task_rows(dataset)

    eligible, skipped = [], []
    for sid in corpus.subject_ids:
        sub = dataset.for_subject(sid)
        if sub.n_samples < min_samples:
            skipped.append({"subject_id": sid,
                            "reason": f"only {sub.n_samples} samples "
                                      f"(need >= {min_samples})"})
            continue
        if len(sub.class_names) < 2:
            skipped.append({"subject_id": sid,
                            "reason": "fewer than two classes present"})
            continue
        eligible.append((sid, sub))
    results = parallel_map(
        lambda item: _subject_word_eval(item[1], folds, seeds, hyper,
                                        master_seed, item[0]),
        eligible, jobs=jobs,
    )
    subjects = list(results)
    if not subjects:
        raise ProtocolError("no subject passed the protocol preconditions")
    med, mad = median_mad([s.accuracy for s in subjects])
    class_names = sorted({c for _, sub in eligible for c in sub.class_names})
    return EvalReport(
        protocol="within_subject_word",
        feature_set=dataset.set_name,
        label_scheme="task",
        model_family="bilstm",
        dataset_id=corpus.dataset_id,
        master_seed=master_seed,
        chance_level=1.0 / max(2, len(class_names)),
        class_names=class_names,
        config={"folds": folds, "seeds": seeds, "min_samples": min_samples,
                "hyper": asdict(hyper)},
        subjects=subjects,
        skipped=skipped,
        median=med,
        mad=mad,
    )


# ---------------------------------------------------------------------------
# cross-subject protocol


def cross_subject(
    corpus: Corpus,
    feature_set: str | FeatureMatrix | SequenceDataset,
    model_family: str = "auto",
    C: float = 1.0,
    hyper: LstmHyperParams | None = None,
    master_seed: int = 0,
    jobs: int | None = None,
    dsp_config: DspConfig | None = None,
    embeddings=None,
) -> EvalReport:
    """Leave-one-subject-out: train on n-1 subjects, test on the held-out
    one; exactly n models, one run each."""
    if corpus.n_subjects < 3:
        raise ProtocolError(
            f"cross-subject evaluation needs >= 3 subjects, got {corpus.n_subjects}"
        )
    sequence_input = (
        isinstance(feature_set, SequenceDataset)
        or (isinstance(feature_set, str) and is_sequence_set(feature_set))
    )
    if model_family == "auto":
        model_family = "bilstm" if sequence_input else "svm"
    if model_family not in ("svm", "bilstm"):
        raise ProtocolError(f"unknown model family {model_family!r}")

    if model_family == "svm":
        data = _task_rows(_resolve_matrix(corpus, feature_set, dsp_config))
    else:
        data = _task_rows(
            _resolve_sequences(corpus, feature_set, dsp_config, embeddings))
    hyper = hyper or LstmHyperParams()
    classes = data.class_names

    def evaluate_heldout(sid: str) -> SubjectResult:
        test = data.for_subject(sid)
        train = data.subset([g.subject_id != sid for g in data.groups])
        if len(set(train.labels)) < 2 or test.n_samples == 0:
            return SubjectResult(subject_id=sid, accuracy=float("nan"),
                                 run_accuracies=[], n_samples=test.n_samples,
                                 confusion=np.zeros((len(classes), len(classes)),
                                                    dtype=int).tolist())
        if model_family == "svm":
            scaler = fit_scaler(train.values)
            model = train_svm(
                (apply_scaler(scaler, train.values), train.labels),
                C=C, seed=derive_seed(master_seed, "cross_svm", sid),
            )
            predicted = predict(model, apply_scaler(scaler, test.values))
        else:
            scaler = fit_sequence_scaler(train.sequences)
            model = train_bilstm(
                apply_sequence_scaler(scaler, train.sequences), train.labels,
                hyper=hyper, seed=derive_seed(master_seed, "cross_lstm", sid),
            )
            predicted = predict_bilstm(
                model, apply_sequence_scaler(scaler, test.sequences))
        acc = float(np.mean([p == t for p, t in zip(predicted, test.labels)]))
        return SubjectResult(
            subject_id=sid,
            accuracy=acc,
            run_accuracies=[acc],
            n_samples=test.n_samples,
            confusion=confusion_matrix(test.labels, predicted, classes).tolist(),
        )

    subjects = parallel_map(evaluate_heldout, corpus.subject_ids, jobs=jobs)
    valid = [s.accuracy for s in subjects if not np.isnan(s.accuracy)]
    med, mad = median_mad(valid)
    return EvalReport(
        protocol="cross_subject",
        feature_set=data.set_name,
        label_scheme="task",
        model_family=model_family,
        dataset_id=corpus.dataset_id,
        master_seed=master_seed,
        chance_level=1.0 / max(2, len(classes)),
        class_names=classes,
        config={"C": C, "hyper": asdict(hyper) if model_family == "bilstm" else None},
        subjects=subjects,
        skipped=[],
        median=med,
        mad=mad,
    )


# ---------------------------------------------------------------------------
# ablations


@dataclass
class BlockAblationReport:
    feature_set: str
    k_values: list[int]
    repeats: int
    mean_accuracy: list[float]
    std_accuracy: list[float]
    accuracies_per_k: dict[str, list[float]]  # str(k) -> per (repeat, subject)
    master_seed: int
    dataset_id: str
    config: dict
    schema_version: int = SCHEMA_VERSION
    artifact_version: str = __version__

    def write_json(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(asdict(self), indent=2) + "\n")
        return path

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k_blocks_per_task", "mean_accuracy", "std_accuracy"])
            for k, m, s in zip(self.k_values, self.mean_accuracy,
                               self.std_accuracy):
                writer.writerow([k, repr(m), repr(s)])
        return path


def block_ablation(
    corpus: Corpus,
    feature_set: str | FeatureMatrix,
    k_values: Sequence[int] = tuple(range(1, 7)),
    repeats: int = 5,
    C: float = 1.0,
    master_seed: int = 0,
    jobs: int | None = None,
    dsp_config: DspConfig | None = None,
) -> BlockAblationReport:
    """Reading-task accuracy as a function of the number of training
    blocks per task; tests on the blocks left out."""
    matrix = _task_rows(_resolve_matrix(corpus, feature_set, dsp_config))
    block_tasks: dict[int, set[str]] = {}
    for g, lab in zip(matrix.groups, matrix.labels):
        block_tasks.setdefault(g.block_id, set()).add(lab)
    for block, tasks in sorted(block_tasks.items()):
        if len(tasks) != 1:
            raise ProtocolError(
                f"block {block} mixes tasks {sorted(tasks)}; block ablation "
                f"needs single-task blocks"
            )
    nr_blocks = sorted(b for b, t in block_tasks.items() if t == {"NR"})
    tsr_blocks = sorted(b for b, t in block_tasks.items() if t == {"TSR"})
    k_values = sorted(int(k) for k in k_values)
    needed = max(k_values) + 1
    if len(nr_blocks) < needed or len(tsr_blocks) < needed:
        raise ProtocolError(
            f"block ablation up to k={max(k_values)} needs >= {needed} blocks "
            f"per task, got NR={len(nr_blocks)}, TSR={len(tsr_blocks)}"
        )

    def run_one(args) -> tuple[int, list[float]]:
        k, rep = args
        rng = derived_rng(master_seed, "blocks", k, rep)
        train_blocks = set(rng.choice(nr_blocks, size=k, replace=False).tolist())
        train_blocks |= set(rng.choice(tsr_blocks, size=k, replace=False).tolist())
        accs = []
        for sid in corpus.subject_ids:
            sub = matrix.for_subject(sid)
            train_mask = np.array([g.block_id in train_blocks for g in sub.groups])
            train = sub.subset(train_mask)
            test = sub.subset(~train_mask)
            if len(set(train.labels)) < 2 or test.n_samples == 0:
                continue
            scaler = fit_scaler(train.values)
            model = train_svm(
                (apply_scaler(scaler, train.values), train.labels), C=C,
                seed=derive_seed(master_seed, "block_svm", k, rep, sid),
            )
            predicted = predict(model, apply_scaler(scaler, test.values))
            accs.append(float(np.mean(
                [p == t for p, t in zip(predicted, test.labels)])))
        return k, accs

    jobs_items = [(k, rep) for k in k_values for rep in range(repeats)]
    outcomes = parallel_map(run_one, jobs_items, jobs=jobs)
    per_k: dict[str, list[float]] = {str(k): [] for k in k_values}
    for k, accs in outcomes:
        per_k[str(k)].extend(accs)
    means = [float(np.mean(per_k[str(k)])) for k in k_values]
    stds = [float(np.std(per_k[str(k)])) for k in k_values]
    return BlockAblationReport(
        feature_set=matrix.set_name,
        k_values=list(k_values),
        repeats=repeats,
        mean_accuracy=means,
        std_accuracy=stds,
        accuracies_per_k=per_k,
        master_seed=master_seed,
        dataset_id=corpus.dataset_id,
        config={"C": C},
    )


@dataclass
class FixationAblationReport:
    band: str
    fractions: list[float]
    reports: dict[str, EvalReport]  # str(fraction) -> report
    master_seed: int
    dataset_id: str
    schema_version: int = SCHEMA_VERSION
    artifact_version: str = __version__

    def write_json(self, path: str | Path) -> Path:
        payload = {
            "schema_version": self.schema_version,
            "artifact_version": self.artifact_version,
            "band": self.band,
            "fractions": self.fractions,
            "master_seed": self.master_seed,
            "dataset_id": self.dataset_id,
            "reports": {k: r.to_dict() for k, r in self.reports.items()},
        }
        path = Path(path)
        path.write_text(json.dumps(payload, indent=2) + "\n")
        return path

    def write_csv(self, path: str | Path) -> Path:
        """One row per (subject, fraction)."""
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["subject_id", "fraction", "accuracy"])
            subject_ids = [s.subject_id
                           for s in next(iter(self.reports.values())).subjects]
            for sid in subject_ids:
                for frac in self.fractions:
                    report = self.reports[_frac_key(frac)]
                    acc = next(s.accuracy for s in report.subjects
                               if s.subject_id == sid)
                    writer.writerow([sid, frac, repr(acc)])
        return path


def _frac_key(fraction: float) -> str:
    return format(float(fraction), "g")


def fixation_ablation(
    corpus: Corpus,
    band: str = "gamma",
    fractions: Sequence[float] = ABLATION_FRACTIONS,
    runs: int = 50,
    C: float = 1.0,
    master_seed: int = 0,
    jobs: int | None = None,
    dsp_config: DspConfig | None = None,
) -> FixationAblationReport:
    """Sentence-level evaluation on vectors built from only the first
    fraction of fixations, swept over ``fractions``."""
    reports = {}
    for fraction in fractions:
        rows, labels, groups = [], [], []
        for subj, sent in corpus.iter_sentences():
            if sent.task_label not in TASK_CLASSES:
                continue
            rows.append(ablated_word_eeg(sent, band, fraction, dsp_config))
            labels.append(sent.task_label)
            groups.append(SampleGroup(
                subject_id=subj.subject_id, session_id=sent.session_id,
                block_id=sent.block_id, sentence_id=sent.sentence_id,
            ))
        matrix = FeatureMatrix(
            set_name=f"ablated_{band}_{_frac_key(fraction)}",
            feature_names=[f"{band}_ch{c:03d}" for c in range(105)],
            values=np.asarray(rows, dtype=float),
            labels=labels,
            groups=groups,
        )
        reports[_frac_key(fraction)] = within_subject_sentence(
            corpus, matrix, runs=runs, C=C,
            master_seed=derive_seed(master_seed, "ablate_fix", _frac_key(fraction)),
            jobs=jobs,
        )
    return FixationAblationReport(
        band=band,
        fractions=[float(f) for f in fractions],
        reports=reports,
        master_seed=master_seed,
        dataset_id=corpus.dataset_id,
    )


# ---------------------------------------------------------------------------
# input resolution


def _resolve_matrix(corpus, feature_set, dsp_config) -> FeatureMatrix:
    if isinstance(feature_set, FeatureMatrix):
        return feature_set
    if isinstance(feature_set, SequenceDataset):
        raise ProtocolError(
            f"{feature_set.set_name!r} is a word-level set; sentence-level "
            f"protocols need a fixed-width feature matrix"
        )
    if is_sequence_set(feature_set):
        raise ProtocolError(
            f"{feature_set!r} is a word-level set; sentence-level protocols "
            f"need a fixed-width feature matrix"
        )
    return assemble(corpus, feature_set, dsp_config=dsp_config)


def _resolve_sequences(corpus, feature_set, dsp_config,
                       embeddings) -> SequenceDataset:
    if isinstance(feature_set, SequenceDataset):
        return feature_set
    if isinstance(feature_set, FeatureMatrix) or not is_sequence_set(feature_set):
        name = (feature_set.set_name
                if isinstance(feature_set, FeatureMatrix) else feature_set)
        raise ProtocolError(
            f"{name!r} is a sentence-level set; word-level protocols need "
            f"per-word sequences"
        )
    return assemble(corpus, feature_set, dsp_config=dsp_config,
                    embeddings=embeddings)
