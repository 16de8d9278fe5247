"""Word-level and sentence-level eye-tracking features.

Word-level definitions (durations in ms, velocities in °/s, amplitudes
in °):

* nFix — number of fixations on the word
* FFD  — duration of the chronologically first fixation on the word
* TRT  — sum of all fixation durations on the word
* GD   — gaze duration: sum of the consecutive fixations on the word from
  its first fixation until the gaze lands anywhere else
* GPT  — go-past time: sum of all fixation durations from the word's
  first fixation until the first fixation on any *later* word (regressions
  to earlier words count toward the region; for the sentence-final word,
  and any word never followed by a later-word fixation, the region extends
  to the last fixation of the sentence)

Never-fixated words get all-zero vectors, so fixed-width model inputs need
no masking beyond the sequence model's padding mask.

Sentence-level definitions follow the published feature table: the
fixation-based aggregates and mean saccade duration are normalized by the
word count, mean saccade velocity/amplitude by the saccade count (the
asymmetry is intentional and kept verbatim), maxima are plain maxima.
reading_speed is in seconds per word.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus.types import SaccadeEvent, SentenceRecording
from .errors import ParameterError

WORD_FIXATION_FEATURES = ("nFix", "FFD", "TRT", "GD", "GPT")
WORD_SACCADE_FEATURES = (
    "inSacc_velocity_mean", "inSacc_duration_mean", "inSacc_amplitude_mean",
    "outSacc_velocity_mean", "outSacc_duration_mean", "outSacc_amplitude_mean",
    "inSacc_velocity_max", "inSacc_duration_max", "inSacc_amplitude_max",
    "outSacc_velocity_max", "outSacc_duration_max", "outSacc_amplitude_max",
)
WORD_FEATURES_ALL = WORD_FIXATION_FEATURES + WORD_SACCADE_FEATURES

SENT_GAZE_FEATURES = ("omission_rate", "fixation_number", "reading_speed")
SENT_SACCADE_FEATURES = (
    "mean_sacc_dur", "max_sacc_dur",
    "mean_sacc_velocity", "max_sacc_velocity",
    "mean_sacc_amplitude", "max_sacc_amplitude",
)


@dataclass(frozen=True)
class WordGazeFeatures:
    nFix: float
    FFD: float
    TRT: float
    GD: float
    GPT: float
    saccades: tuple[float, ...]  # 12 values, WORD_SACCADE_FEATURES order

    def vector(self, include_saccades: bool = True) -> np.ndarray:
        base = (self.nFix, self.FFD, self.TRT, self.GD, self.GPT)
        if include_saccades:
            return np.array(base + self.saccades, dtype=float)
        return np.array(base, dtype=float)


@dataclass(frozen=True)
class SentenceGazeFeatures:
    omission_rate: float
    fixation_number: float
    reading_speed: float  # seconds per word
    mean_sacc_dur: float
    max_sacc_dur: float
    mean_sacc_velocity: float
    max_sacc_velocity: float
    mean_sacc_amplitude: float
    max_sacc_amplitude: float

    def gaze_vector(self) -> np.ndarray:
        return np.array(
            [self.omission_rate, self.fixation_number, self.reading_speed]
        )

    def saccade_vector(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in SENT_SACCADE_FEATURES])


def word_gaze_features(sentence: SentenceRecording,
                       include_saccades: bool = True) -> list[WordGazeFeatures]:
    """One feature record per word (dimension 5, or 17 with saccades)."""
    fixations = sentence.all_fixations()
    results = []
    for wi in range(sentence.n_words):
        word_fixes = [f for f in fixations if f.word_index == wi]
        if not word_fixes:
            results.append(WordGazeFeatures(0.0, 0.0, 0.0, 0.0, 0.0,
                                            (0.0,) * 12))
            continue
        first = word_fixes[0].fixation_order
        ffd = word_fixes[0].duration_ms
        trt = sum(f.duration_ms for f in word_fixes)

        gd = 0.0
        for f in fixations[first:]:
            if f.word_index != wi:
                break
            gd += f.duration_ms

        gpt = 0.0
        for f in fixations[first:]:
            if f.word_index > wi:
                break
            gpt += f.duration_ms

        results.append(WordGazeFeatures(
            nFix=float(len(word_fixes)),
            FFD=ffd,
            TRT=trt,
            GD=gd,
            GPT=gpt,
            saccades=_word_saccade_stats(sentence.saccades, wi),
        ))
    return results


def _word_saccade_stats(saccades: list[SaccadeEvent], word_index: int) -> tuple[float, ...]:
    incoming = [s for s in saccades if s.to_word == word_index]
    outgoing = [s for s in saccades if s.from_word == word_index]

    def stats(events: list[SaccadeEvent], fn) -> tuple[float, float, float]:
        if not events:
            return 0.0, 0.0, 0.0
        return (
            fn([s.velocity_degps for s in events]),
            fn([s.duration_ms for s in events]),
            fn([s.amplitude_deg for s in events]),
        )

    mean = lambda v: float(np.mean(v))
    peak = lambda v: float(np.max(v))
    return stats(incoming, mean) + stats(outgoing, mean) + \
        stats(incoming, peak) + stats(outgoing, peak)


def sentence_gaze_features(sentence: SentenceRecording) -> SentenceGazeFeatures:
    if not sentence.words:
        raise ParameterError("sentence has no words")
    n_words = sentence.n_words
    fixations = sentence.all_fixations()
    fixated_words = {f.word_index for f in fixations}
    total_fix_ms = sum(f.duration_ms for f in fixations)

    saccades = sentence.saccades
    if saccades:
        durations = [s.duration_ms for s in saccades]
        velocities = [s.velocity_degps for s in saccades]
        amplitudes = [s.amplitude_deg for s in saccades]
        sacc = dict(
            mean_sacc_dur=sum(durations) / n_words,
            max_sacc_dur=max(durations),
            mean_sacc_velocity=sum(velocities) / len(saccades),
            max_sacc_velocity=max(velocities),
            mean_sacc_amplitude=sum(amplitudes) / len(saccades),
            max_sacc_amplitude=max(amplitudes),
        )
    else:
        sacc = {name: 0.0 for name in SENT_SACCADE_FEATURES}

    return SentenceGazeFeatures(
        omission_rate=(n_words - len(fixated_words)) / n_words,
        fixation_number=len(fixations) / n_words,
        reading_speed=total_fix_ms / 1000.0 / n_words,
        **sacc,
    )
