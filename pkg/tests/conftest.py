import numpy as np
import pytest

from readtask.corpus import (
    EegParams,
    Gaussian,
    SynthSpec,
    TaskParams,
    null_spec,
    omission_only_spec,
    synthesize_corpus,
    zuco2_like_spec,
)
from readtask.corpus.types import (
    FixationEvent,
    SentenceRecording,
    WordRecord,
)


def make_sentence(fix_spec, n_words, saccades=(), sentence_id="s1",
                  task_label="NR", total_reading_ms=None, band_power=None,
                  continuous_eeg=None, session_id=1, block_id=1):
    """Build a sentence from a [(word_index, duration_ms), ...] fixation
    trace in chronological order; onsets are spaced to respect the order."""
    words = [WordRecord(token=f"w{i}") for i in range(n_words)]
    t = 0.0
    for order, (wi, dur) in enumerate(fix_spec):
        t += 20.0
        words[wi].fixations.append(FixationEvent(
            onset_ms=t, duration_ms=float(dur), word_index=wi,
            fixation_order=order,
        ))
        t += dur
    if band_power is not None:
        for wi, powers in band_power.items():
            words[wi].band_power = {
                b: np.asarray(v, dtype=float) for b, v in powers.items()
            }
    total = total_reading_ms if total_reading_ms is not None else t + 100.0
    return SentenceRecording(
        sentence_id=sentence_id,
        task_label=task_label,
        session_id=session_id,
        block_id=block_id,
        words=words,
        saccades=list(saccades),
        total_reading_ms=total,
        continuous_eeg=continuous_eeg,
    )


@pytest.fixture(scope="session")
def omission_corpus():
    """3 subjects x 120 sentences, classes differ only in omission rate."""
    return synthesize_corpus(
        omission_only_spec(n_subjects=3, sentences_per_class=60), seed=7)


@pytest.fixture(scope="session")
def null_corpus():
    """Zero class separation."""
    return synthesize_corpus(
        null_spec(n_subjects=3, sentences_per_class=40), seed=11)


@pytest.fixture(scope="session")
def eeg_corpus():
    """ZuCo-2-like layout with stored band power and a gamma class shift."""
    return synthesize_corpus(
        zuco2_like_spec(n_subjects=3, sentences_per_class=28), seed=13)


@pytest.fixture(scope="session")
def continuous_corpus():
    """Tiny corpus carrying continuous EEG (dsp-backed path)."""
    spec = SynthSpec(
        dataset_id="synth-continuous",
        n_subjects=1,
        sentences_per_class=2,
        classes={
            "NR": TaskParams(omission_rate=Gaussian(0.3, 0.05),
                             reading_speed_s=Gaussian(3.0, 0.3),
                             sentence_length=Gaussian(8.0, 1.0)),
            "TSR": TaskParams(omission_rate=Gaussian(0.45, 0.05),
                              reading_speed_s=Gaussian(3.0, 0.3),
                              sentence_length=Gaussian(8.0, 1.0)),
        },
        blocks_per_task=1,
        eeg=EegParams(
            bands=("theta", "alpha", "beta", "gamma"),
            continuous=True,
            store_band_power=True,
            sentence_std=0.05,
            word_std=0.05,
        ),
    )
    return synthesize_corpus(spec, seed=3)
