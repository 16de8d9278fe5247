"""Synthetic corpora with known class-conditional distributions.

The generator draws per-sentence omission rates, reading times, fixation
streams, saccades and (optionally) EEG band power from per-class Gaussians,
so downstream classifiers can be checked against the analytic Bayes
accuracy of the generating spec (see :mod:`readtask.corpus.oracle`).

Determinism: the corpus is a pure function of (spec, seed). Every random
draw uses a generator derived from the master seed plus a structural path,
so subjects and sentences can be generated in any order. The generator
redraws (with an attempt-derived seed) until the realized per-class sample
means of omission rate and reading speed fall within 3 standard errors of
the spec means, making that post-condition a guarantee.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import ParameterError
from ..seeding import derived_rng
from .types import (
    N_CHANNELS,
    ContinuousEeg,
    Corpus,
    FixationEvent,
    SaccadeEvent,
    SentenceRecording,
    SubjectData,
    SubjectMeta,
    WordRecord,
)

# Small vocabulary for token streams; enough spread in syllable counts to
# give the readability baseline a non-degenerate feature distribution.
_VOCAB = (
    "the", "a", "an", "of", "to", "in", "and", "was", "he", "she",
    "born", "city", "river", "famous", "award", "national", "university",
    "player", "company", "history", "political", "american", "musician",
    "director", "president", "village", "team", "season", "became",
    "received", "studied", "worked", "founded", "married", "wrote",
    "known", "career", "early", "later", "family",
)

REFIXATION_PROB = 0.12
REGRESSION_PROB = 0.08
FIXATION_TIME_FRACTION = 0.80  # of total reading time spent in fixations
SACCADE_TIME_FRACTION = 0.15

_MAX_ATTEMPTS = 32


@dataclass(frozen=True)
class Gaussian:
    mean: float
    std: float

    def check(self, name: str) -> None:
        if not self.std > 0:
            raise ParameterError(f"{name}: std must be > 0, got {self.std}")


@dataclass(frozen=True)
class TaskParams:
    """Per-class generating distributions."""

    omission_rate: Gaussian
    reading_speed_s: Gaussian  # seconds per sentence
    sentence_length: Gaussian = Gaussian(20.0, 9.0)  # words
    saccade_duration_ms: Gaussian = Gaussian(20.0, 7.0)
    saccade_amplitude_deg: Gaussian = Gaussian(2.5, 1.2)
    saccade_velocity_degps: Gaussian = Gaussian(250.0, 80.0)

    def check(self, task: str) -> None:
        for name in (
            "omission_rate",
            "reading_speed_s",
            "sentence_length",
            "saccade_duration_ms",
            "saccade_amplitude_deg",
            "saccade_velocity_degps",
        ):
            getattr(self, name).check(f"{task}.{name}")


DEFAULT_BASE_AMPLITUDE = {
    "theta": 2.8,
    "alpha": 2.5,
    "beta": 2.4,
    "gamma": 1.8,
    "broadband": 3.2,
}


@dataclass(frozen=True)
class EegParams:
    """EEG synthesis: per-band channel baselines plus class/session/block
    mean structure, all in µV of mean Hilbert amplitude."""

    bands: tuple[str, ...] = ("theta", "alpha", "beta", "gamma", "broadband")
    base_amplitude: dict[str, float] = field(
        default_factory=lambda: dict(DEFAULT_BASE_AMPLITUDE)
    )
    channel_std: float = 0.3  # across-channel baseline topography spread
    sentence_std: float = 0.25  # sentence-to-sentence spread per channel
    word_std: float = 0.2  # word-to-word spread around the sentence level
    class_shift: dict[str, dict[str, float]] = field(default_factory=dict)
    shift_channels: tuple[int, ...] = tuple(range(20))  # "frontal" block
    session_shift: dict[str, float] = field(default_factory=dict)  # session 2
    block_drift_std: float = 0.0  # per-(band, block) channel offsets
    subject_offset_std: float = 0.0  # per-subject channel fingerprint
    store_band_power: bool = True
    continuous: bool = False
    sample_rate_hz: float = 500.0

    def check(self) -> None:
        for name in ("channel_std", "sentence_std", "word_std"):
            if getattr(self, name) < 0:
                raise ParameterError(f"eeg.{name} must be >= 0")
        for band in self.bands:
            if band not in DEFAULT_BASE_AMPLITUDE:
                raise ParameterError(f"unknown EEG band {band!r}")
            if self.base_amplitude.get(band, 0.0) <= 0:
                raise ParameterError(f"eeg.base_amplitude[{band!r}] must be > 0")
        if self.continuous and not self.sample_rate_hz > 0:
            raise ParameterError("eeg.sample_rate_hz must be > 0")


@dataclass(frozen=True)
class SynthSpec:
    dataset_id: str = "synthetic"
    n_subjects: int = 5
    sentences_per_class: int = 100
    classes: dict[str, TaskParams] = field(default_factory=dict)
    blocks_per_task: int = 7
    session_layout: str = "single"  # or "by_task" (ZuCo 1.0 style)
    subject_omission_spread: float = 0.0  # std of per-subject omission offsets
    subject_speed_spread: float = 0.0  # std of per-subject speed offsets (s)
    eeg: EegParams | None = None
    subject_ids: tuple[str, ...] | None = None

    def check(self) -> None:
        if self.n_subjects <= 0:
            raise ParameterError("n_subjects must be > 0")
        if self.sentences_per_class <= 0:
            raise ParameterError("sentences_per_class must be > 0")
        if self.blocks_per_task <= 0:
            raise ParameterError("blocks_per_task must be > 0")
        if not self.classes:
            raise ParameterError("spec.classes must not be empty")
        if self.session_layout not in ("single", "by_task"):
            raise ParameterError(
                f"session_layout must be 'single' or 'by_task', got {self.session_layout!r}"
            )
        for task, params in self.classes.items():
            if task not in ("NR", "TSR", "SR"):
                raise ParameterError(f"unknown task label {task!r}")
            params.check(task)
        if self.subject_ids is not None and len(self.subject_ids) != self.n_subjects:
            raise ParameterError("subject_ids length must equal n_subjects")
        if self.eeg is not None:
            self.eeg.check()


# ---------------------------------------------------------------------------
# spec factories


def zuco1_like_spec(n_subjects: int = 11, sentences_per_class: int = 50,
                    with_eeg: bool = True) -> SynthSpec:
    """Two-session layout with the published omission/speed statistics."""
    eeg = None
    if with_eeg:
        eeg = EegParams(
            class_shift={
                "theta": {"NR": 0.4},
                "alpha": {"NR": 0.4},
                "gamma": {"TSR": 0.4},
            },
        )
    return SynthSpec(
        dataset_id="synth-zuco1-like",
        n_subjects=n_subjects,
        sentences_per_class=sentences_per_class,
        classes={
            "NR": TaskParams(
                omission_rate=Gaussian(0.32, 0.09),
                reading_speed_s=Gaussian(7.3, 2.5),
                sentence_length=Gaussian(21.9, 11.1),
            ),
            "TSR": TaskParams(
                omission_rate=Gaussian(0.47, 0.11),
                reading_speed_s=Gaussian(4.2, 1.5),
                sentence_length=Gaussian(20.1, 9.9),
            ),
        },
        blocks_per_task=4,
        session_layout="by_task",
        eeg=eeg,
    )


def zuco2_like_spec(n_subjects: int = 16, sentences_per_class: int = 50,
                    with_eeg: bool = True) -> SynthSpec:
    """Single-session, 14 alternating blocks."""
    eeg = None
    if with_eeg:
        eeg = EegParams(
            class_shift={
                "theta": {"NR": 0.3},
                "alpha": {"NR": 0.3},
                "gamma": {"TSR": 0.3},
            },
        )
    return SynthSpec(
        dataset_id="synth-zuco2-like",
        n_subjects=n_subjects,
        sentences_per_class=sentences_per_class,
        classes={
            "NR": TaskParams(
                omission_rate=Gaussian(0.33, 0.09),
                reading_speed_s=Gaussian(5.8, 1.4),
                sentence_length=Gaussian(19.6, 8.8),
            ),
            "TSR": TaskParams(
                omission_rate=Gaussian(0.45, 0.14),
                reading_speed_s=Gaussian(4.8, 2.0),
                sentence_length=Gaussian(21.3, 9.5),
            ),
        },
        blocks_per_task=7,
        session_layout="single",
        eeg=eeg,
    )


def omission_only_spec(n_subjects: int = 5, sentences_per_class: int = 100) -> SynthSpec:
    """Classes differ in omission rate only; no EEG. The one-dimensional
    oracle target for end-to-end pipeline checks."""
    common = dict(
        reading_speed_s=Gaussian(5.0, 1.2),
        sentence_length=Gaussian(18.0, 6.0),
    )
    return SynthSpec(
        dataset_id="synth-omission-only",
        n_subjects=n_subjects,
        sentences_per_class=sentences_per_class,
        classes={
            "NR": TaskParams(omission_rate=Gaussian(0.32, 0.09), **common),
            "TSR": TaskParams(omission_rate=Gaussian(0.47, 0.11), **common),
        },
        blocks_per_task=7,
        session_layout="single",
    )


def null_spec(n_subjects: int = 5, sentences_per_class: int = 100,
              with_eeg: bool = False) -> SynthSpec:
    """Identical NR and TSR distributions: zero class separation."""
    params = TaskParams(
        omission_rate=Gaussian(0.40, 0.10),
        reading_speed_s=Gaussian(5.0, 1.2),
        sentence_length=Gaussian(18.0, 6.0),
    )
    return SynthSpec(
        dataset_id="synth-null",
        n_subjects=n_subjects,
        sentences_per_class=sentences_per_class,
        classes={"NR": params, "TSR": replace(params)},
        blocks_per_task=7,
        session_layout="single",
        eeg=EegParams() if with_eeg else None,
    )


def block_drift_spec(n_subjects: int = 3, sentences_per_class: int = 112,
                     drift_std: float = 0.25, class_shift: float = 0.5) -> SynthSpec:
    """ZuCo-2-style corpus whose EEG channels carry per-block mean offsets
    shared by all subjects; used by the block-count ablation trend test."""
    spec = zuco2_like_spec(n_subjects=n_subjects,
                           sentences_per_class=sentences_per_class)
    eeg = EegParams(
        class_shift={"gamma": {"TSR": class_shift}},
        block_drift_std=drift_std,
    )
    return replace(spec, dataset_id="synth-block-drift", eeg=eeg)


# ---------------------------------------------------------------------------
# generation


def synthesize_corpus(spec: SynthSpec, seed: int) -> Corpus:
    """Deterministic corpus for (spec, seed); see the module docstring for
    the realized-mean guarantee."""
    spec.check()
    for attempt in range(_MAX_ATTEMPTS):
        corpus, realized = _generate(spec, seed, attempt)
        if _within_three_se(spec, realized):
            return corpus
    raise ParameterError(
        f"could not match spec means within 3 standard errors after "
        f"{_MAX_ATTEMPTS} attempts; spec stds may be unrealistically tight"
    )


def _within_three_se(spec: SynthSpec, realized: dict[str, dict[str, list[float]]]) -> bool:
    for task, params in spec.classes.items():
        for quantity, gauss in (
            ("omission_rate", params.omission_rate),
            ("reading_speed_s", params.reading_speed_s),
        ):
            values = realized[task][quantity]
            se = gauss.std / math.sqrt(len(values))
            if abs(float(np.mean(values)) - gauss.mean) > 3.0 * se:
                return False
    return True


def _generate(spec: SynthSpec, seed: int, attempt: int):
    layout = _block_layout(spec)
    corpus_rng_path = (seed, attempt, "corpus")

    channel_base: dict[str, np.ndarray] = {}
    block_effects: dict[tuple[str, int], np.ndarray] = {}
    if spec.eeg is not None:
        for band in spec.eeg.bands:
            rng = derived_rng(*corpus_rng_path, "channel_base", band)
            channel_base[band] = np.clip(
                rng.normal(spec.eeg.base_amplitude[band], spec.eeg.channel_std,
                           N_CHANNELS),
                0.05, None,
            )
        if spec.eeg.block_drift_std > 0:
            all_blocks = sorted({blk for slots in layout.values() for blk, _ in slots})
            for band in spec.eeg.bands:
                for block_id in all_blocks:
                    rng = derived_rng(*corpus_rng_path, "block", band, block_id)
                    block_effects[(band, block_id)] = rng.normal(
                        0.0, spec.eeg.block_drift_std, N_CHANNELS
                    )

    realized: dict[str, dict[str, list[float]]] = {
        task: {"omission_rate": [], "reading_speed_s": []} for task in spec.classes
    }

    subjects = []
    for si in range(spec.n_subjects):
        subject_id = (
            spec.subject_ids[si] if spec.subject_ids is not None else f"S{si + 1:02d}"
        )
        subj_rng = derived_rng(seed, attempt, "subject", si)
        om_offset = (
            subj_rng.normal(0.0, spec.subject_omission_spread)
            if spec.subject_omission_spread > 0 else 0.0
        )
        sp_offset = (
            subj_rng.normal(0.0, spec.subject_speed_spread)
            if spec.subject_speed_spread > 0 else 0.0
        )
        subject_offsets: dict[str, np.ndarray] = {}
        if spec.eeg is not None and spec.eeg.subject_offset_std > 0:
            for band in spec.eeg.bands:
                subject_offsets[band] = derived_rng(
                    seed, attempt, "subject_eeg", si, band
                ).normal(0.0, spec.eeg.subject_offset_std, N_CHANNELS)

        sentences = []
        speed_by_task: dict[str, list[float]] = {t: [] for t in spec.classes}
        for task in spec.classes:
            for j in range(spec.sentences_per_class):
                block_id, session_id = layout[task][j % len(layout[task])]
                rng = derived_rng(seed, attempt, "sentence", si, task, j)
                sent = _generate_sentence(
                    spec, task, f"{task.lower()}_{j:04d}", session_id, block_id,
                    rng, om_offset, sp_offset, channel_base, block_effects,
                    subject_offsets,
                )
                sentences.append(sent)
                realized_om = (
                    sum(1 for w in sent.words if not w.fixations) / len(sent.words)
                )
                realized[task]["omission_rate"].append(realized_om)
                realized[task]["reading_speed_s"].append(
                    sent.total_reading_ms / 1000.0
                )
                speed_by_task[task].append(sent.total_reading_ms / 1000.0)

        meta = SubjectMeta(
            subject_id=subject_id,
            lextale=round(float(subj_rng.uniform(70.0, 100.0)), 2),
            score_nr=round(float(subj_rng.uniform(75.0, 100.0)), 2),
            score_tsr=round(float(subj_rng.uniform(75.0, 100.0)), 2),
            speed_nr=_mean_or(speed_by_task.get("NR"), spec, "NR"),
            speed_tsr=_mean_or(speed_by_task.get("TSR"), spec, "TSR"),
        )
        subjects.append(SubjectData(meta=meta, sentences=sentences))

    return Corpus(dataset_id=spec.dataset_id, subjects=subjects), realized


def _mean_or(values: list[float] | None, spec: SynthSpec, task: str) -> float:
    if values:
        return round(float(np.mean(values)), 6)
    if task in spec.classes:
        return spec.classes[task].reading_speed_s.mean
    return 1.0


def _block_layout(spec: SynthSpec) -> dict[str, list[tuple[int, int]]]:
    """Per task, the (block_id, session_id) slots its sentences cycle over.

    "single": 2 * blocks_per_task alternating NR/TSR blocks, all session 1.
    "by_task": NR blocks in session 1, TSR blocks in session 2; SR (when
    present) is split between two extra blocks, one per session.
    """
    layout: dict[str, list[tuple[int, int]]] = {}
    main = [t for t in ("NR", "TSR") if t in spec.classes]
    if spec.session_layout == "single":
        next_block = 1
        slots: dict[str, list[tuple[int, int]]] = {t: [] for t in main}
        for _ in range(spec.blocks_per_task):
            for t in main:
                slots[t].append((next_block, 1))
                next_block += 1
        layout.update(slots)
        if "SR" in spec.classes:
            layout["SR"] = [(next_block, 1)]
    else:
        next_block = 1
        for session, t in ((1, "NR"), (2, "TSR")):
            if t in spec.classes:
                layout[t] = [
                    (next_block + k, session) for k in range(spec.blocks_per_task)
                ]
                next_block += spec.blocks_per_task
        if "SR" in spec.classes:
            layout["SR"] = [(next_block, 1), (next_block + 1, 2)]
    return layout


def _generate_sentence(
    spec: SynthSpec,
    task: str,
    sentence_id: str,
    session_id: int,
    block_id: int,
    rng: np.random.Generator,
    om_offset: float,
    sp_offset: float,
    channel_base: dict[str, np.ndarray],
    block_effects: dict[tuple[str, int], np.ndarray],
    subject_offsets: dict[str, np.ndarray],
) -> SentenceRecording:
    params = spec.classes[task]
    n_words = max(3, int(round(rng.normal(params.sentence_length.mean,
                                          params.sentence_length.std))))
    tokens = [str(t) for t in rng.choice(_VOCAB, size=n_words)]

    target_om = float(np.clip(
        rng.normal(params.omission_rate.mean + om_offset, params.omission_rate.std),
        0.0, 1.0,
    ))
    n_skip = int(np.clip(round(target_om * n_words), 0, n_words - 1))
    skipped = set(rng.choice(n_words, size=n_skip, replace=False).tolist())
    fixated = [w for w in range(n_words) if w not in skipped]

    total_s = max(0.5, float(rng.normal(params.reading_speed_s.mean + sp_offset,
                                        params.reading_speed_s.std)))
    total_ms = total_s * 1000.0

    visits: list[int] = []
    for w in fixated:
        visits.append(w)
        if rng.random() < REFIXATION_PROB:
            visits.append(w)
        if len(visits) > 1 and rng.random() < REGRESSION_PROB:
            visits.append(int(visits[rng.integers(0, len(visits) - 1)]))
    n_fix = len(visits)

    raw_dur = np.clip(rng.normal(1.0, 0.25, n_fix), 0.3, None)
    durations = raw_dur / raw_dur.sum() * (FIXATION_TIME_FRACTION * total_ms)
    raw_gap = np.clip(rng.normal(1.0, 0.3, n_fix), 0.1, None)
    gaps = raw_gap / raw_gap.sum() * (SACCADE_TIME_FRACTION * total_ms)

    words = [WordRecord(token=tokens[w]) for w in range(n_words)]
    t = 0.0
    for k in range(n_fix):
        t += float(gaps[k])
        fix = FixationEvent(
            onset_ms=t,
            duration_ms=float(durations[k]),
            word_index=visits[k],
            fixation_order=k,
        )
        words[visits[k]].fixations.append(fix)
        t += float(durations[k])

    saccades = []
    prev: int | None = None
    for k in range(n_fix):
        saccades.append(SaccadeEvent(
            duration_ms=max(1.0, float(rng.normal(params.saccade_duration_ms.mean,
                                                  params.saccade_duration_ms.std))),
            amplitude_deg=max(0.01, float(rng.normal(
                params.saccade_amplitude_deg.mean, params.saccade_amplitude_deg.std))),
            velocity_degps=max(1.0, float(rng.normal(
                params.saccade_velocity_degps.mean,
                params.saccade_velocity_degps.std))),
            from_word=prev,
            to_word=visits[k],
        ))
        prev = visits[k]

    continuous = None
    if spec.eeg is not None:
        sentence_level: dict[str, np.ndarray] = {}
        for band in spec.eeg.bands:
            vec = channel_base[band].copy()
            shift = spec.eeg.class_shift.get(band, {}).get(task, 0.0)
            if shift:
                vec[list(spec.eeg.shift_channels)] += shift
            if session_id == 2:
                vec += spec.eeg.session_shift.get(band, 0.0)
            if (band, block_id) in block_effects:
                vec += block_effects[(band, block_id)]
            if band in subject_offsets:
                vec += subject_offsets[band]
            vec = vec + rng.normal(0.0, spec.eeg.sentence_std, N_CHANNELS)
            sentence_level[band] = np.clip(vec, 0.0, None)

        if spec.eeg.store_band_power:
            for w in fixated:
                words[w].band_power = {
                    band: np.clip(
                        sentence_level[band]
                        + rng.normal(0.0, spec.eeg.word_std, N_CHANNELS),
                        0.0, None,
                    )
                    for band in spec.eeg.bands
                }
        if spec.eeg.continuous:
            continuous = _continuous_from_levels(
                sentence_level, total_ms, spec.eeg.sample_rate_hz, rng
            )

    return SentenceRecording(
        sentence_id=sentence_id,
        task_label=task,
        session_id=session_id,
        block_id=block_id,
        words=words,
        saccades=saccades,
        total_reading_ms=total_ms,
        continuous_eeg=continuous,
    )


def _continuous_from_levels(
    sentence_level: dict[str, np.ndarray],
    total_ms: float,
    sample_rate_hz: float,
    rng: np.random.Generator,
) -> ContinuousEeg:
    """Band-limited noise per canonical band, each channel rescaled so its
    realized mean Hilbert envelope equals the target band amplitude."""
    from ..dsp import CANONICAL_BANDS, bandpass, hilbert_envelope

    n = int(math.ceil(total_ms / 1000.0 * sample_rate_hz))
    data = np.zeros((N_CHANNELS, n))
    for band in CANONICAL_BANDS:  # theta..gamma; broadband is their sum
        if band not in sentence_level:
            continue
        noise = rng.standard_normal((N_CHANNELS, n))
        component = bandpass(noise, band, sample_rate_hz)
        env_mean = hilbert_envelope(component).mean(axis=1)
        env_mean = np.where(env_mean > 0, env_mean, 1.0)
        data += component * (sentence_level[band] / env_mean)[:, None]
    return ContinuousEeg(data=data, sample_rate_hz=sample_rate_hz)
