"""Feature matrices, sequence datasets, and the named-set registry.

Sentence-level sets feed the linear SVM; word-level sets are sequences of
per-word vectors for the bidirectional LSTM. Every row/sequence carries
its (subject, session, block, sentence) group so evaluation protocols can
split and relabel without touching the corpus again.

CSV export writes one column per feature plus a final ``label`` column.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .corpus.types import Corpus
from .dsp import CANONICAL_BANDS, DspConfig
from .errors import UnknownFeatureSetError
from .eeg import sentence_eeg_features, word_eeg_features
from .gaze import (
    SENT_GAZE_FEATURES,
    SENT_SACCADE_FEATURES,
    WORD_FEATURES_ALL,
    WORD_FIXATION_FEATURES,
    sentence_gaze_features,
    word_gaze_features,
)
from .text import EmbeddingTable, fre_feature_matrix


@dataclass(frozen=True)
class SampleGroup:
    subject_id: str
    session_id: int
    block_id: int
    sentence_id: str


@dataclass
class FeatureMatrix:
    set_name: str
    feature_names: list[str]
    values: np.ndarray  # (n_samples, n_features)
    labels: list[str]
    groups: list[SampleGroup]

    @property
    def n_samples(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.values.shape[1])

    @property
    def class_names(self) -> list[str]:
        return sorted(set(self.labels))

    def subset(self, indices) -> "FeatureMatrix":
        idx = np.asarray(indices)
        if idx.dtype == bool:
            idx = np.flatnonzero(idx)
        return replace(
            self,
            values=self.values[idx],
            labels=[self.labels[i] for i in idx],
            groups=[self.groups[i] for i in idx],
        )

    def for_subject(self, subject_id: str) -> "FeatureMatrix":
        return self.subset([g.subject_id == subject_id for g in self.groups])

    def with_labels(self, labels: list[str]) -> "FeatureMatrix":
        if len(labels) != self.n_samples:
            raise ValueError("label list must match sample count")
        return replace(self, labels=list(labels))

    def to_csv(self, path: str | Path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([*self.feature_names, "label"])
            for row, label in zip(self.values, self.labels):
                writer.writerow([repr(float(v)) for v in row] + [label])
        return path


@dataclass
class SequenceDataset:
    set_name: str
    feature_names: list[str]  # per-timestep dimensions
    sequences: list[np.ndarray]  # each (T_i, d)
    labels: list[str]
    groups: list[SampleGroup]

    @property
    def n_samples(self) -> int:
        return len(self.sequences)

    @property
    def n_features(self) -> int:
        return int(self.sequences[0].shape[1]) if self.sequences else 0

    @property
    def class_names(self) -> list[str]:
        return sorted(set(self.labels))

    def subset(self, indices) -> "SequenceDataset":
        idx = np.asarray(indices)
        if idx.dtype == bool:
            idx = np.flatnonzero(idx)
        return replace(
            self,
            sequences=[self.sequences[i] for i in idx],
            labels=[self.labels[i] for i in idx],
            groups=[self.groups[i] for i in idx],
        )

    def for_subject(self, subject_id: str) -> "SequenceDataset":
        return self.subset([g.subject_id == subject_id for g in self.groups])

    def with_labels(self, labels: list[str]) -> "SequenceDataset":
        if len(labels) != self.n_samples:
            raise ValueError("label list must match sample count")
        return replace(self, labels=list(labels))


SENTENCE_GAZE_SETS = {
    "omission_rate": ["omission_rate"],
    "fixation_number": ["fixation_number"],
    "reading_speed": ["reading_speed"],
    "sent_gaze": list(SENT_GAZE_FEATURES),
    "mean_sacc_dur": ["mean_sacc_dur"],
    "max_sacc_dur": ["max_sacc_dur"],
    "mean_sacc_velocity": ["mean_sacc_velocity"],
    "max_sacc_velocity": ["max_sacc_velocity"],
    "mean_sacc_amplitude": ["mean_sacc_amplitude"],
    "max_sacc_amplitude": ["max_sacc_amplitude"],
    "sent_saccade": list(SENT_SACCADE_FEATURES),
    "sent_gaze_sacc": list(SENT_GAZE_FEATURES) + list(SENT_SACCADE_FEATURES),
}

SENTENCE_EEG_SET_DIMS = {
    "theta_mean": 1, "alpha_mean": 1, "beta_mean": 1, "gamma_mean": 1,
    "eeg_means": 4,
    "electrode_features_theta": 105, "electrode_features_alpha": 105,
    "electrode_features_beta": 105, "electrode_features_gamma": 105,
    "electrode_features_all": 420,
}

WORD_LEVEL_SETS = {
    "eye_tracking": list(WORD_FIXATION_FEATURES),
    "eye_tracking_sacc": list(WORD_FEATURES_ALL),
    "eeg_theta": None, "eeg_alpha": None, "eeg_beta": None,
    "eeg_gamma": None, "eeg_raw": None,  # 105 channels each
    "embeddings": None,
}

COMBINED_SETS = ("sent_gaze_eeg_means",)

SENTENCE_SETS = (
    tuple(SENTENCE_GAZE_SETS) + tuple(SENTENCE_EEG_SET_DIMS)
    + COMBINED_SETS + ("fre",)
)
ALL_SETS = SENTENCE_SETS + tuple(WORD_LEVEL_SETS)

_WORD_EEG_BAND = {
    "eeg_theta": "theta", "eeg_alpha": "alpha", "eeg_beta": "beta",
    "eeg_gamma": "gamma", "eeg_raw": "broadband",
}


def is_sequence_set(set_name: str) -> bool:
    return set_name in WORD_LEVEL_SETS


def assemble(
    corpus: Corpus,
    set_name: str,
    dsp_config: DspConfig | None = None,
    embeddings: EmbeddingTable | None = None,
) -> FeatureMatrix | SequenceDataset:
    """Build the named feature set for every sentence in the corpus."""
    if set_name not in ALL_SETS:
        raise UnknownFeatureSetError(
            f"unknown feature set {set_name!r}; valid names: "
            + ", ".join(sorted(ALL_SETS))
        )
    if set_name == "fre":
        return fre_feature_matrix(corpus)
    if set_name in WORD_LEVEL_SETS:
        return _assemble_sequences(corpus, set_name, dsp_config, embeddings)
    return _assemble_sentence_matrix(corpus, set_name, dsp_config)


def _groups_and_labels(corpus: Corpus):
    labels, groups = [], []
    for subj, sent in corpus.iter_sentences():
        labels.append(sent.task_label)
        groups.append(SampleGroup(
            subject_id=subj.subject_id,
            session_id=sent.session_id,
            block_id=sent.block_id,
            sentence_id=sent.sentence_id,
        ))
    return labels, groups


def _assemble_sentence_matrix(corpus: Corpus, set_name: str,
                              dsp_config: DspConfig | None) -> FeatureMatrix:
    dsp_config = dsp_config or DspConfig()
    labels, groups = _groups_and_labels(corpus)
    rows = []
    if set_name in SENTENCE_GAZE_SETS:
        names = SENTENCE_GAZE_SETS[set_name]
        for _, sent in corpus.iter_sentences():
            feats = sentence_gaze_features(sent)
            rows.append([getattr(feats, n) for n in names])
    elif set_name in SENTENCE_EEG_SET_DIMS:
        names = _eeg_feature_names(set_name, dsp_config)
        for _, sent in corpus.iter_sentences():
            rows.append(sentence_eeg_features(sent, set_name, dsp_config))
    elif set_name == "sent_gaze_eeg_means":
        names = list(SENT_GAZE_FEATURES) + _eeg_feature_names("eeg_means", dsp_config)
        for _, sent in corpus.iter_sentences():
            gaze = sentence_gaze_features(sent).gaze_vector()
            means = sentence_eeg_features(sent, "eeg_means", dsp_config)
            rows.append(np.concatenate([gaze, means]))
    else:  # pragma: no cover - guarded by ALL_SETS check
        raise UnknownFeatureSetError(set_name)
    return FeatureMatrix(
        set_name=set_name,
        feature_names=list(names),
        values=np.asarray(rows, dtype=float),
        labels=labels,
        groups=groups,
    )


def _eeg_feature_names(set_name: str, dsp_config: DspConfig) -> list[str]:
    if set_name == "eeg_means":
        if dsp_config.subbands == 8:
            return [f"{b}{i}_mean" for b in CANONICAL_BANDS for i in (1, 2)]
        return [f"{b}_mean" for b in CANONICAL_BANDS]
    if set_name == "electrode_features_all":
        return [f"{b}_ch{c:03d}" for b in CANONICAL_BANDS for c in range(105)]
    if set_name.startswith("electrode_features_"):
        band = set_name[len("electrode_features_"):]
        return [f"{band}_ch{c:03d}" for c in range(105)]
    return [set_name]


def _assemble_sequences(corpus: Corpus, set_name: str,
                        dsp_config: DspConfig | None,
                        embeddings: EmbeddingTable | None) -> SequenceDataset:
    dsp_config = dsp_config or DspConfig()
    labels, groups = _groups_and_labels(corpus)
    sequences: list[np.ndarray] = []
    if set_name in ("eye_tracking", "eye_tracking_sacc"):
        include_sacc = set_name == "eye_tracking_sacc"
        names = WORD_LEVEL_SETS[set_name]
        for _, sent in corpus.iter_sentences():
            feats = word_gaze_features(sent, include_saccades=include_sacc)
            sequences.append(np.stack([f.vector(include_sacc) for f in feats]))
    elif set_name in _WORD_EEG_BAND:
        band = _WORD_EEG_BAND[set_name]
        names = [f"{band}_ch{c:03d}" for c in range(105)]
        for _, sent in corpus.iter_sentences():
            sequences.append(np.stack(word_eeg_features(sent, band, dsp_config)))
    else:  # embeddings
        if embeddings is None:
            raise UnknownFeatureSetError(
                "the 'embeddings' set needs an EmbeddingTable (pass "
                "embeddings=... or the --embeddings CLI flag)"
            )
        names = [f"emb_{i:03d}" for i in range(embeddings.dim)]
        for _, sent in corpus.iter_sentences():
            sequences.append(np.stack(
                [embeddings.lookup(w.token) for w in sent.words]
            ))
    return SequenceDataset(
        set_name=set_name,
        feature_names=list(names),
        sequences=sequences,
        labels=labels,
        groups=groups,
    )
