"""Control analyses: descriptive statistics, outlier subjects, rank
correlations with subject covariates, and forward-model patterns.

Outliers follow the sample-mean +/- 2 std rule over per-subject mean
feature values (before any scaling); subjects are only flagged when the
group std is strictly positive. Spearman correlations are Pearson
correlations of average ranks with a t-approximation p-value (n - 2
degrees of freedom) — coarse for n <= 18 but standard practice. The
forward-model pattern multiplies the classifier weights by the training
feature covariance and normalizes to unit norm, which turns backward
weights into an interpretable activation topography.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as scipy_stats

from .corpus.types import Corpus, SubjectMeta
from .errors import ParameterError, ProtocolError
from .features import FeatureMatrix, assemble
from .gaze import sentence_gaze_features
from .learners.svm import LinearSvmModel

COVARIATES = ("score_nr", "score_tsr", "speed_nr", "speed_tsr", "lextale")
DESCRIPTIVE_QUANTITIES = ("sentence_length", "reading_speed_s", "omission_rate")
TASK_CLASSES = ("NR", "TSR")


# ---------------------------------------------------------------------------
# descriptive statistics


@dataclass
class TaskDescriptives:
    task: str
    n_sentences: int
    mean: dict[str, float]
    std: dict[str, float]


@dataclass
class DescriptiveStats:
    per_task: dict[str, TaskDescriptives]
    p_values: dict[str, float]  # Welch two-sample t-test, NR vs TSR

    def to_dict(self) -> dict:
        return {
            "per_task": {
                t: {"n_sentences": d.n_sentences, "mean": d.mean, "std": d.std}
                for t, d in self.per_task.items()
            },
            "p_values": self.p_values,
        }


def descriptive_stats(corpus: Corpus) -> DescriptiveStats:
    """Per-task mean/std of sentence length, reading speed (s/sentence)
    and omission rate, with Welch p-values for the NR-TSR differences."""
    samples: dict[str, dict[str, list[float]]] = {
        t: {q: [] for q in DESCRIPTIVE_QUANTITIES} for t in TASK_CLASSES
    }
    for _, sent in corpus.iter_sentences():
        if sent.task_label not in TASK_CLASSES:
            continue
        feats = sentence_gaze_features(sent)
        bucket = samples[sent.task_label]
        bucket["sentence_length"].append(float(sent.n_words))
        bucket["reading_speed_s"].append(sent.total_reading_ms / 1000.0)
        bucket["omission_rate"].append(feats.omission_rate)
    for task in TASK_CLASSES:
        if not samples[task]["omission_rate"]:
            raise ProtocolError(f"descriptive stats need sentences for {task}")

    per_task = {}
    for task in TASK_CLASSES:
        per_task[task] = TaskDescriptives(
            task=task,
            n_sentences=len(samples[task]["omission_rate"]),
            mean={q: float(np.mean(samples[task][q]))
                  for q in DESCRIPTIVE_QUANTITIES},
            std={q: float(np.std(samples[task][q], ddof=1))
                 for q in DESCRIPTIVE_QUANTITIES},
        )
    p_values = {}
    for q in DESCRIPTIVE_QUANTITIES:
        result = scipy_stats.ttest_ind(
            samples["NR"][q], samples["TSR"][q], equal_var=False)
        p_values[q] = float(result.pvalue)
    return DescriptiveStats(per_task=per_task, p_values=p_values)


# ---------------------------------------------------------------------------
# outlier subjects


def subject_feature_means(corpus: Corpus, feature: str) -> dict[str, float]:
    """Per-subject mean of a single sentence-level feature over NR/TSR
    sentences, before any scaling."""
    matrix = assemble(corpus, feature)
    if matrix.n_features != 1:
        raise ParameterError(
            f"outlier detection works on single features, {feature!r} has "
            f"{matrix.n_features} columns"
        )
    means = {}
    for sid in corpus.subject_ids:
        rows = [v for v, g, lab in zip(matrix.values[:, 0], matrix.groups,
                                       matrix.labels)
                if g.subject_id == sid and lab in TASK_CLASSES]
        if rows:
            means[sid] = float(np.mean(rows))
    return means


def detect_outliers(corpus: Corpus, feature: str) -> list[str]:
    """Subjects whose mean feature value sits outside the group
    mean +/- 2 std (std over subject means, ddof=1)."""
    if corpus.n_subjects < 3:
        raise ProtocolError("outlier detection needs >= 3 subjects")
    means = subject_feature_means(corpus, feature)
    values = np.array(list(means.values()))
    center = float(values.mean())
    spread = float(values.std(ddof=1))
    if spread == 0.0:
        return []
    return sorted(sid for sid, v in means.items()
                  if abs(v - center) > 2.0 * spread)


# ---------------------------------------------------------------------------
# Spearman correlation


@dataclass(frozen=True)
class SpearmanResult:
    rho: float | None
    p_value: float | None
    n: int

    @property
    def undefined(self) -> bool:
        return self.rho is None


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=float)
    i = 0
    sorted_vals = values[order]
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0  # average rank, 1-based
        i = j + 1
    return ranks


def spearman(x, y) -> SpearmanResult:
    """Rank correlation with average ranks for ties; p from the t
    approximation. Constant inputs make rho undefined (rho=None), not 0."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ParameterError("spearman needs two equal-length vectors")
    n = x.size
    if n < 3:
        raise ParameterError("spearman needs length >= 3")
    if np.all(x == x[0]) or np.all(y == y[0]):
        return SpearmanResult(rho=None, p_value=None, n=n)
    rx = _average_ranks(x)
    ry = _average_ranks(y)
    rho = float(np.corrcoef(rx, ry)[0, 1])
    rho = max(-1.0, min(1.0, rho))
    if abs(rho) == 1.0:
        p = 0.0
    else:
        t = rho * np.sqrt((n - 2) / (1.0 - rho * rho))
        p = float(2.0 * scipy_stats.t.sf(abs(t), df=n - 2))
    return SpearmanResult(rho=rho, p_value=p, n=n)


@dataclass
class CorrelationRow:
    feature_set: str
    covariate: str
    rho: float | None
    p_value: float | None
    significant: bool  # p < 0.05


def correlation_table(
    accuracies_by_set: dict[str, dict[str, float]],
    metas: list[SubjectMeta],
    alpha: float = 0.05,
) -> list[CorrelationRow]:
    """Spearman correlation of per-subject accuracies against the subject
    covariates, one row per (feature set, covariate)."""
    meta_by_id = {m.subject_id: m for m in metas}
    rows = []
    for set_name, accuracies in accuracies_by_set.items():
        if set(accuracies) - set(meta_by_id):
            missing = sorted(set(accuracies) - set(meta_by_id))
            raise ParameterError(
                f"no metadata for subjects {missing} (feature set {set_name!r})"
            )
        subject_ids = sorted(accuracies)
        acc = [accuracies[sid] for sid in subject_ids]
        for covariate in COVARIATES:
            cov = [getattr(meta_by_id[sid], covariate) for sid in subject_ids]
            result = spearman(acc, cov)
            rows.append(CorrelationRow(
                feature_set=set_name,
                covariate=covariate,
                rho=result.rho,
                p_value=result.p_value,
                significant=(result.p_value is not None
                             and result.p_value < alpha),
            ))
    return rows


# ---------------------------------------------------------------------------
# forward-model patterns


def forward_model_pattern(model: LinearSvmModel,
                          train: FeatureMatrix | np.ndarray) -> np.ndarray:
    """Covariance-transformed classifier weights, unit-normalized.

    For each weight vector w, the pattern is cov(X_train) @ w. Returns an
    array shaped like ``model.weights`` (one row per decision vector).
    """
    X = train.values if isinstance(train, FeatureMatrix) else np.asarray(train)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ParameterError("need a 2-D training matrix with >= 2 rows")
    if X.shape[1] != model.n_features:
        raise ParameterError(
            f"training matrix has {X.shape[1]} features, model expects "
            f"{model.n_features}"
        )
    cov = np.cov(X, rowvar=False, ddof=1)
    cov = np.atleast_2d(cov)
    patterns = model.weights @ cov.T
    norms = np.linalg.norm(patterns, axis=1, keepdims=True)
    safe = np.where(norms > 0, norms, 1.0)
    return patterns / safe


def pattern_channels(pattern: np.ndarray, n_channels: int = 105) -> dict[str, np.ndarray]:
    """Split a concatenated multi-band pattern into per-band 105-channel
    vectors (theta, alpha, beta, gamma order)."""
    flat = np.asarray(pattern).ravel()
    if flat.size == n_channels:
        return {"all": flat}
    if flat.size % n_channels != 0:
        raise ParameterError(
            f"pattern length {flat.size} is not a multiple of {n_channels}"
        )
    bands = ("theta", "alpha", "beta", "gamma")
    n_bands = flat.size // n_channels
    if n_bands > len(bands):
        raise ParameterError(f"cannot split pattern of {n_bands} bands")
    return {bands[i]: flat[i * n_channels:(i + 1) * n_channels]
            for i in range(n_bands)}
