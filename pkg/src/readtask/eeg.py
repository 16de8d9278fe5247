"""Word-level and sentence-level EEG feature sets.

Two data paths feed every feature:

* stored: each fixated word carries a per-band 105-channel amplitude
  vector (the word-level aggregate over its total reading time);
* continuous: the sentence carries the raw 105 x T signal, and band power
  is extracted per segment through :mod:`readtask.dsp`.

The continuous path is preferred when both are present. Word-level
aggregation is fixation-duration-weighted (total-reading-time semantics);
the fixation-order ablation averages the selected fixations unweighted.

Sentence-level sets: ``<band>_mean`` (scalar over channels), ``eeg_means``
(4 band means, 8 with ``subbands=8`` on the continuous path),
``electrode_features_<band>`` (105 channels) and ``electrode_features_all``
(420 = theta, alpha, beta, gamma concatenated in that fixed order).
"""

from __future__ import annotations

import math

import numpy as np

from .corpus.types import N_CHANNELS, SentenceRecording, WordRecord
from .dsp import BANDS, CANONICAL_BANDS, DspConfig, resolve_band, segment_band_power, split_band
from .errors import DataUnavailableError, NoFixationsError, ParameterError

ABLATION_FRACTIONS = (0.10, 0.20, 0.50, 0.75, 1.0)

SENTENCE_EEG_SETS = (
    "theta_mean", "alpha_mean", "beta_mean", "gamma_mean", "eeg_means",
    "electrode_features_theta", "electrode_features_alpha",
    "electrode_features_beta", "electrode_features_gamma",
    "electrode_features_all",
)


def weighted_fixation_mean(vectors: list[np.ndarray],
                           durations_ms: list[float]) -> np.ndarray:
    """Fixation-duration-weighted mean of per-fixation band-power vectors."""
    if not vectors:
        raise NoFixationsError("no fixations to average")
    if len(vectors) != len(durations_ms):
        raise ParameterError("vectors and durations must align")
    weights = np.asarray(durations_ms, dtype=float)
    if np.any(weights <= 0):
        raise ParameterError("fixation durations must be > 0")
    stacked = np.stack([np.asarray(v, dtype=float) for v in vectors])
    return (weights[:, None] * stacked).sum(axis=0) / weights.sum()


def word_eeg_features(sentence: SentenceRecording, band: str,
                      config: DspConfig | None = None) -> list[np.ndarray]:
    """Per word, the duration-weighted mean band-power vector over its
    fixations; skipped words yield zero vectors."""
    _check_band_name(band)
    config = config or DspConfig()
    use_continuous = sentence.continuous_eeg is not None
    if not use_continuous and not _has_stored_band(sentence, band):
        raise DataUnavailableError(
            f"sentence {sentence.sentence_id!r} has neither stored band power "
            f"for {band!r} nor continuous EEG"
        )

    results = []
    for word in sentence.words:
        if not word.fixations:
            results.append(np.zeros(N_CHANNELS))
        elif use_continuous:
            vectors = [
                segment_band_power(
                    sentence.continuous_eeg.data, band,
                    sentence.continuous_eeg.sample_rate_hz,
                    [(f.onset_ms, f.duration_ms)], config,
                )
                for f in word.fixations
            ]
            durations = [f.duration_ms for f in word.fixations]
            results.append(weighted_fixation_mean(vectors, durations))
        else:
            results.append(_stored_vector(sentence, word, band))
    return results


def sentence_band_vector(sentence: SentenceRecording, band: str,
                         config: DspConfig | None = None) -> np.ndarray:
    """Whole-sentence 105-channel band power.

    Continuous path: mean envelope over [0, total_reading_ms] (the full
    display duration, fixated or not). Stored path: total-reading-time
    weighted mean over the fixated words' vectors — an approximation
    documented for corpora without continuous signals.
    """
    _check_band_name(band)
    config = config or DspConfig()
    if sentence.continuous_eeg is not None:
        eeg = sentence.continuous_eeg
        span_ms = min(sentence.total_reading_ms, eeg.duration_ms)
        return segment_band_power(
            eeg.data, band, eeg.sample_rate_hz, [(0.0, span_ms)], config
        )
    vectors, weights = [], []
    for word in sentence.words:
        if word.fixations and _word_has_band(word, band):
            vectors.append(_stored_vector(sentence, word, band))
            weights.append(sum(f.duration_ms for f in word.fixations))
    if not vectors:
        raise DataUnavailableError(
            f"sentence {sentence.sentence_id!r} has no band power for {band!r}"
        )
    return weighted_fixation_mean(vectors, weights)


def sentence_eeg_features(sentence: SentenceRecording, set_name: str,
                          config: DspConfig | None = None) -> np.ndarray:
    """One named sentence-level feature vector; see the module docstring
    for the set definitions."""
    config = config or DspConfig()
    if set_name not in SENTENCE_EEG_SETS:
        raise ParameterError(
            f"unknown sentence EEG set {set_name!r}; valid: {SENTENCE_EEG_SETS}"
        )
    if set_name.endswith("_mean") and set_name != "eeg_means":
        band = set_name[:-len("_mean")]
        return np.array([sentence_band_vector(sentence, band, config).mean()])
    if set_name == "eeg_means":
        if config.subbands == 8:
            return _subband_means(sentence, config)
        return np.array([
            sentence_band_vector(sentence, band, config).mean()
            for band in CANONICAL_BANDS
        ])
    if set_name == "electrode_features_all":
        return np.concatenate([
            sentence_band_vector(sentence, band, config)
            for band in CANONICAL_BANDS
        ])
    band = set_name[len("electrode_features_"):]
    return sentence_band_vector(sentence, band, config)


def _subband_means(sentence: SentenceRecording, config: DspConfig) -> np.ndarray:
    if sentence.continuous_eeg is None:
        raise DataUnavailableError(
            "subbands=8 needs continuous EEG; stored vectors only carry the "
            "four canonical bands"
        )
    eeg = sentence.continuous_eeg
    span_ms = min(sentence.total_reading_ms, eeg.duration_ms)
    values = []
    for name in CANONICAL_BANDS:
        for half in split_band(BANDS[name]):
            vec = segment_band_power(
                eeg.data, half, eeg.sample_rate_hz, [(0.0, span_ms)], config
            )
            values.append(vec.mean())
    return np.array(values)


def ablated_word_eeg(sentence: SentenceRecording, band: str, fraction: float,
                     config: DspConfig | None = None) -> np.ndarray:
    """Sentence-level vector from the first ceil(fraction * n_fix)
    fixations in chronological order (minimum one), averaged unweighted."""
    _check_band_name(band)
    config = config or DspConfig()
    if not 0.0 < fraction <= 1.0:
        raise ParameterError(f"fraction must be in (0, 1], got {fraction}")
    fixations = sentence.all_fixations()
    if not fixations:
        raise NoFixationsError(
            f"no fixations in sentence {sentence.sentence_id!r}"
        )
    n_keep = max(1, math.ceil(fraction * len(fixations)))
    selected = fixations[:n_keep]

    use_continuous = sentence.continuous_eeg is not None
    vectors = []
    for fix in selected:
        if use_continuous:
            vectors.append(segment_band_power(
                sentence.continuous_eeg.data, band,
                sentence.continuous_eeg.sample_rate_hz,
                [(fix.onset_ms, fix.duration_ms)], config,
            ))
        else:
            word = sentence.words[fix.word_index]
            if not _word_has_band(word, band):
                raise DataUnavailableError(
                    f"word {fix.word_index} of sentence "
                    f"{sentence.sentence_id!r} has no stored {band!r} power"
                )
            vectors.append(_stored_vector(sentence, word, band))
    return np.stack(vectors).mean(axis=0)


def _check_band_name(band: str) -> None:
    resolve_band(band)


def _word_has_band(word: WordRecord, band: str) -> bool:
    return word.band_power is not None and band in word.band_power


def _has_stored_band(sentence: SentenceRecording, band: str) -> bool:
    return any(_word_has_band(w, band) for w in sentence.words if w.fixations)


def _stored_vector(sentence: SentenceRecording, word: WordRecord,
                   band: str) -> np.ndarray:
    if not _word_has_band(word, band):
        raise DataUnavailableError(
            f"a fixated word in sentence {sentence.sentence_id!r} has no "
            f"stored {band!r} power"
        )
    return np.asarray(word.band_power[band], dtype=float)
