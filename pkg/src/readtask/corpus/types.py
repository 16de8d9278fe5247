"""Data model for co-registered gaze/EEG reading recordings.

A corpus is a set of subjects; each subject has metadata plus an ordered
list of sentence recordings. A recording holds the word tokens, the
chronological fixation stream (stored per word, ordered globally by
``fixation_order``), the saccade list, and optional EEG data: per-word
band-power vectors and/or the continuous 105-channel signal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TASK_LABELS = ("NR", "TSR", "SR")
BAND_NAMES = ("theta", "alpha", "beta", "gamma", "broadband")
N_CHANNELS = 105


@dataclass(frozen=True)
class FixationEvent:
    """One stable-gaze event. Times are milliseconds from sentence onset."""

    onset_ms: float
    duration_ms: float
    word_index: int
    fixation_order: int  # chronological rank within the sentence, 0-based


@dataclass(frozen=True)
class SaccadeEvent:
    """Rapid eye movement between fixations.

    ``to_word == w`` makes this an incoming saccade of word w;
    ``from_word == w`` an outgoing one. Either end may be None (entering or
    leaving the sentence area).
    """

    duration_ms: float
    amplitude_deg: float
    velocity_degps: float  # peak velocity
    from_word: int | None = None
    to_word: int | None = None


@dataclass
class WordRecord:
    token: str
    fixations: list[FixationEvent] = field(default_factory=list)
    band_power: dict[str, np.ndarray] | None = None  # band -> (105,) amplitudes


@dataclass
class ContinuousEeg:
    """Continuous 105 x T signal sampled at ``sample_rate_hz``."""

    data: np.ndarray
    sample_rate_hz: float

    @property
    def n_samples(self) -> int:
        return int(self.data.shape[1])

    @property
    def duration_ms(self) -> float:
        return self.n_samples / self.sample_rate_hz * 1000.0


@dataclass
class SentenceRecording:
    sentence_id: str
    task_label: str  # one of TASK_LABELS
    session_id: int
    block_id: int
    words: list[WordRecord]
    saccades: list[SaccadeEvent]
    total_reading_ms: float
    continuous_eeg: ContinuousEeg | None = None

    def all_fixations(self) -> list[FixationEvent]:
        """Sentence fixations in chronological order."""
        events = [f for w in self.words for f in w.fixations]
        events.sort(key=lambda f: f.fixation_order)
        return events

    @property
    def n_words(self) -> int:
        return len(self.words)


@dataclass
class SubjectMeta:
    subject_id: str
    lextale: float  # percent
    score_nr: float  # percent
    score_tsr: float  # percent
    speed_nr: float  # seconds per sentence
    speed_tsr: float  # seconds per sentence


@dataclass
class SubjectData:
    meta: SubjectMeta
    sentences: list[SentenceRecording]

    @property
    def subject_id(self) -> str:
        return self.meta.subject_id


@dataclass
class Corpus:
    """Immutable-by-convention container; safe for concurrent reads."""

    dataset_id: str
    subjects: list[SubjectData]

    @property
    def subject_ids(self) -> list[str]:
        return [s.subject_id for s in self.subjects]

    @property
    def n_subjects(self) -> int:
        return len(self.subjects)

    def subject(self, subject_id: str) -> SubjectData:
        for s in self.subjects:
            if s.subject_id == subject_id:
                return s
        raise KeyError(f"no subject {subject_id!r} in corpus {self.dataset_id!r}")

    def iter_sentences(self):
        """Yield (SubjectData, SentenceRecording) pairs in corpus order."""
        for subj in self.subjects:
            for sent in subj.sentences:
                yield subj, sent
